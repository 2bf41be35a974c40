import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commontree import (
    MastResult,
    SizeGuardError,
    Tree,
    brute_force_mast,
    induced_subtree,
    mast,
    original,
    original_range,
    parse_newick,
    random_tree,
    root_at_leaf,
    rooted_mast,
    trees_equal,
)

from conftest import uniform_pair


def check_witness(result, t1, t2):
    """A witness must induce the same tree in both inputs."""
    assert len(result.witness) == result.size
    assert trees_equal(
        induced_subtree(t1, result.witness), induced_subtree(t2, result.witness)
    )


# every 4-subset of these two disagrees, so the maximum is the floor of 3
MAX_CONFLICT_PAIR = ("(1,(2,3),(4,5));", "(1,(2,4),(3,5));")


def test_frozen_small_cases():
    t1, t2 = (parse_newick(s) for s in MAX_CONFLICT_PAIR)
    assert mast(t1, t2).size == 3
    assert brute_force_mast(t1, t2).size == 3

    t3 = parse_newick("((1,2),(3,4),(5,6));")
    t4 = parse_newick("((1,3),(2,5),(4,6));")
    r = mast(t3, t4)
    assert r.size == 4
    check_witness(r, t3, t4)


def test_identity_is_everything(rng):
    for n in (3, 5, 8, 12):
        t = random_tree(original_range(n), rng)
        r = mast(t, t)
        assert r.size == n
        assert r.witness == t.leaves


def test_any_three_shared_leaves_agree(rng):
    """Induced 3-leaf trees are always stars, so the size is at least 3."""
    for _ in range(20):
        t, u = uniform_pair(8, rng)
        assert mast(t, u).size >= 3


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 9), st.integers(0, 2**32 - 1))
def test_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    t, u = uniform_pair(n, rng)
    fast = mast(t, u)
    slow = brute_force_mast(t, u)
    assert fast.size == slow.size
    check_witness(fast, t, u)
    check_witness(slow, t, u)


def test_partial_overlap(rng):
    t = parse_newick("((1,2),(3,4),(5,6));")
    u = parse_newick("((5,6),(7,8),(1,9));")
    r = mast(t, u)
    assert r.witness <= (t.leaves & u.leaves)
    assert r.size == 3  # shared leaves {1,5,6} always agree
    check_witness(r, t, u)


def test_degenerate_overlaps(rng):
    t = random_tree(original_range(6), rng)
    u = random_tree([original(i) for i in (7, 8, 9, 10)], rng)
    assert mast(t, u) == MastResult(0, frozenset())

    v = random_tree([original(i) for i in (1, 7, 8, 9)], rng)
    assert mast(t, v).size == 1
    w = random_tree([original(i) for i in (1, 2, 9, 10)], rng)
    assert mast(t, w).size == 2


def test_empty_inputs_rejected():
    with pytest.raises(ValueError):
        mast(Tree.empty(), parse_newick("(1,2,3);"))


def test_brute_force_guard(rng):
    t, u = uniform_pair(15, rng)
    with pytest.raises(SizeGuardError):
        brute_force_mast(t, u)


def test_root_at_leaf_shape(rng):
    t = random_tree(original_range(9), rng)
    rooted = root_at_leaf(t, original(1))
    # 8 remaining leaves in a binary rooted tree: 2*8 - 1 nodes
    assert rooted.n_nodes == 15
    assert rooted.leaf_labels() == set(original_range(9)) - {original(1)}
    with pytest.raises(ValueError):
        root_at_leaf(t, original(99))


def test_rooted_mast_identity(rng):
    t = random_tree(original_range(7), rng)
    a = root_at_leaf(t, original(1))
    b = root_at_leaf(t, original(1))
    assert rooted_mast(a, b).size == 6


def test_rooted_mast_across_rootings(rng):
    """Rooting the same tree at different leaves keeps the rest intact."""
    t = random_tree(original_range(8), rng)
    a = root_at_leaf(t, original(1))
    b = root_at_leaf(t, original(2))
    # shared labels: {3..8} plus each other's root leaf -> at least 6 agree
    assert rooted_mast(a, b).size >= 6


def test_mast_result_validates():
    with pytest.raises(ValueError):
        MastResult(2, frozenset({original(1)}))


def test_larger_instance_stays_exact(rng):
    """Cross-check one mid-size pair against the subset scan."""
    t, u = uniform_pair(12, rng)
    assert mast(t, u).size == brute_force_mast(t, u).size
