import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from commontree import (
    ENUMERATION_LIMIT,
    SizeGuardError,
    Tree,
    branch_leaf_counts,
    branchpoint_of_three,
    canonical_form,
    centroid,
    count_trees,
    count_trees_asymptotic,
    enumerate_trees,
    induced_subtree,
    original,
    original_range,
    parse_newick,
    random_tree,
    relabel,
    split_at_branchpoint,
    terminal,
    to_newick,
    trees_equal,
)

from conftest import uniform_pair

# (2n-5)!! for n = 1..8, the sequence every generator here must follow
COUNTS = {1: 1, 2: 1, 3: 1, 4: 3, 5: 15, 6: 105, 7: 945, 8: 10395}


def test_count_trees_known_values():
    for n, c in COUNTS.items():
        assert count_trees(n) == c
    assert count_trees(9) == 135135
    with pytest.raises(ValueError):
        count_trees(0)


def test_count_recurrence():
    for n in range(3, 40):
        assert count_trees(n + 1) == (2 * n - 3) * count_trees(n)


def test_enumerate_matches_count():
    for n in range(1, 8):
        trees = enumerate_trees(original_range(n))
        assert len(trees) == COUNTS[n]
        # no duplicates: canonical forms are pairwise distinct
        assert len({canonical_form(t) for t in trees}) == COUNTS[n]


def test_enumeration_guard():
    assert len(enumerate_trees(original_range(ENUMERATION_LIMIT))[:1]) == 1
    with pytest.raises(SizeGuardError):
        enumerate_trees(original_range(ENUMERATION_LIMIT + 1))


def test_asymptotic_count_calibration():
    """The first-order approximation undershoots by a factor e**(2/n)."""
    for n in (50, 100, 144):
        ratio = float(count_trees(n)) / count_trees_asymptotic(n)
        assert abs(ratio - math.exp(2.0 / n)) < 3e-3
    r50 = float(count_trees(50)) / count_trees_asymptotic(50)
    r144 = float(count_trees(144)) / count_trees_asymptotic(144)
    assert 1.03 < r50 < 1.05  # ~4% off at n=50
    assert abs(r144 - 1.0) < 0.015  # inside 1.5% by n=144


def test_random_tree_small_cases(rng):
    assert random_tree([], rng).is_empty
    assert random_tree([original(1)], rng).n_leaves == 1
    t = random_tree(original_range(2), rng)
    assert t.leaves == frozenset(original_range(2))


def test_random_tree_structure(rng):
    t = random_tree(original_range(40), rng)
    assert t.n_leaves == 40
    assert len(t.internal_vertices()) == 38
    assert all(t.degree(v) == 3 for v in t.internal_vertices())


def test_random_tree_uniform(rng):
    """Chi-square over all 15 shapes at n=5."""
    forms = [canonical_form(t) for t in enumerate_trees(original_range(5))]
    counts = dict.fromkeys(forms, 0)
    for _ in range(3000):
        counts[canonical_form(random_tree(original_range(5), rng))] += 1
    result = stats.chisquare(list(counts.values()))
    assert result.pvalue > 0.001


def test_random_tree_deterministic():
    a = random_tree(original_range(30), np.random.default_rng(5))
    b = random_tree(original_range(30), np.random.default_rng(5))
    assert to_newick(a) == to_newick(b)


def test_random_tree_rejects_duplicates(rng):
    with pytest.raises(ValueError):
        random_tree([original(1), original(1)], rng)


def test_induced_subtree_hand_case():
    t = parse_newick("((1,2),(3,4),(5,6));")
    assert trees_equal(induced_subtree(t, [original(i) for i in (1, 3, 5)]), parse_newick("(1,3,5);"))
    assert trees_equal(
        induced_subtree(t, [original(i) for i in (1, 2, 3, 5)]),
        parse_newick("((1,2),3,5);"),
    )
    assert induced_subtree(t, []).is_empty
    assert induced_subtree(t, [original(4)]).n_leaves == 1


def test_induced_subtree_missing_label():
    t = parse_newick("(1,2,3);")
    with pytest.raises(ValueError):
        induced_subtree(t, [original(9)])


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 12), st.integers(0, 2**32 - 1), st.data())
def test_induced_commutes_with_subsets(n, seed, data):
    rng = np.random.default_rng(seed)
    t = random_tree(original_range(n), rng)
    big = data.draw(st.sets(st.sampled_from(original_range(n)), min_size=3))
    small = data.draw(st.sets(st.sampled_from(sorted(big)), min_size=1))
    direct = induced_subtree(t, small)
    staged = induced_subtree(induced_subtree(t, big), small)
    assert trees_equal(direct, staged)
    assert direct.leaves == frozenset(small)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 14), st.integers(0, 2**32 - 1))
def test_newick_round_trip(n, seed):
    t = random_tree(original_range(n), np.random.default_rng(seed))
    assert trees_equal(parse_newick(to_newick(t)), t)


def test_newick_accepts_mixed_label_kinds():
    t = parse_newick("(t_1,(2,b_12),(t_21,7));")
    assert t.has_leaf(terminal("1"))
    rendered = to_newick(t)
    assert rendered == "(2,((7,t_21),t_1),b_12);"  # canonical rendering
    assert to_newick(parse_newick(rendered)) == rendered


def test_newick_rejects_malformed():
    for bad in ["", "(1,2", "(1,2));", "(1);", "(1,2,3,4);", "((1,2),(3));", "(1,1,2);"]:
        with pytest.raises(ValueError):
            parse_newick(bad)


def test_canonical_form_ignores_construction_order(rng):
    """The same shape reached via different insertions serializes equally."""
    t = parse_newick("((1,2),3,(4,5));")
    u = parse_newick("((5,4),(2,1),3);")
    assert trees_equal(t, u)
    assert hash(t) == hash(u)
    assert not trees_equal(t, parse_newick("((1,4),3,(2,5));"))


def test_relabel_round_trip(rng):
    t = random_tree(original_range(8), rng)
    fwd = {original(3): terminal("1")}
    back = {terminal("1"): original(3)}
    assert trees_equal(relabel(relabel(t, fwd), back), t)
    with pytest.raises(ValueError):
        relabel(t, {original(99): terminal("2")})
    with pytest.raises(ValueError):
        relabel(t, {original(1): original(2)})  # collides with existing leaf


def test_branchpoint_of_three():
    t = parse_newick("((1,2),(3,4),(5,6));")
    v = branchpoint_of_three(t, original(1), original(2), original(3))
    # the hub of {1,2,x} is the branchpoint joining the (1,2) cherry
    assert set(t.label_at(u) for u in t.neighbors(v) if t.is_leaf_vertex(u)) == {
        original(1),
        original(2),
    }
    with pytest.raises(ValueError):
        branchpoint_of_three(t, original(1), original(1), original(3))


def test_split_at_branchpoint_partitions(rng):
    t = random_tree(original_range(9), rng)
    hub = branchpoint_of_three(t, original(1), original(2), original(3))
    new = (terminal("1"), terminal("2"), terminal("3"))
    anchors = (original(1), original(2), original(3))
    parts = split_at_branchpoint(t, hub, new, anchors)
    assert len(parts) == 3
    seen = set()
    for part, fresh, anchor in zip(parts, new, anchors):
        assert part.has_leaf(fresh)
        assert part.has_leaf(anchor)
        originals = {lab for lab in part.leaves if lab != fresh}
        assert not originals & seen
        seen |= originals
    assert seen == t.leaves


def test_split_requires_branchpoint(rng):
    t = parse_newick("(1,2,3);")
    leaf_vertex = t.vertex_of(original(1))
    with pytest.raises(ValueError):
        split_at_branchpoint(
            t,
            leaf_vertex,
            (terminal("1"), terminal("2"), terminal("3")),
            (original(1), original(2), original(3)),
        )


def test_branch_leaf_counts(rng):
    t = random_tree(original_range(11), rng)
    for v, sizes in branch_leaf_counts(t).items():
        assert len(sizes) == 3
        assert sum(sizes) == 11
        assert all(s >= 1 for s in sizes)


def test_centroid_caterpillar():
    # caterpillar on 6: centroid must be one of the two middle branchpoints
    t = parse_newick("(1,2,(3,(4,(5,6))));")
    v = centroid(t)
    assert max(branch_leaf_counts(t)[v]) <= 3


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 40), st.integers(0, 2**32 - 1))
def test_centroid_halving_property(n, seed):
    t = random_tree(original_range(n), np.random.default_rng(seed))
    assert max(branch_leaf_counts(t)[centroid(t)]) <= n / 2


def test_tree_factories():
    assert Tree.empty().is_empty
    assert Tree.single(original(1)).n_leaves == 1
    e = Tree.edge(original(1), original(2))
    assert e.n_leaves == 2
    assert to_newick(e) == "(1,2);"


def test_uniform_pair_helper(rng):
    t, u = uniform_pair(7, rng)
    assert t.leaves == u.leaves
    assert t.n_leaves == 7
