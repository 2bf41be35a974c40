from fractions import Fraction

import numpy as np
import pytest

from commontree import (
    branch_size_pmf,
    branchpoint_of_three,
    enumerate_trees,
    hypergeometric_pmf,
    original_range,
    random_tree,
    relabel,
    split_at_branchpoint,
    terminal,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


def uniform_pair(n, rng):
    """Two independent uniform trees on the same n original labels."""
    labels = original_range(n)
    return random_tree(labels, rng), random_tree(labels, rng)


def tally_branch_triples(m):
    """Exhaustive oracle for the branch-size law at item size m.

    Enumerates every tree on m originals plus the two special leaves,
    relabels each of the m originals in turn, cuts at the hub of the
    three specials and tallies how many originals land in each branch
    (ordered by which special anchors it).  Returns exact probabilities
    as ``{(m1, m2, m3): Fraction}``.
    """
    s_one, s_two, s_three = terminal("1"), terminal("2"), terminal("3")
    originals = original_range(m)
    doors = (terminal("11"), terminal("21"), terminal("31"))
    tally: dict[tuple[int, int, int], int] = {}
    total = 0
    for tree in enumerate_trees(originals + [s_one, s_two]):
        for chosen in originals:
            work = relabel(tree, {chosen: s_three})
            hub = branchpoint_of_three(work, s_one, s_two, s_three)
            parts = split_at_branchpoint(work, hub, doors, (s_one, s_two, s_three))
            triple = tuple(
                sum(1 for lab in part.leaves if lab.kind == "original")
                for part in parts
            )
            tally[triple] = tally.get(triple, 0) + 1
            total += 1
    return {triple: Fraction(count, total) for triple, count in tally.items()}


def one_step_law(m):
    """Exact law of the tracked survivor's next item size (0 = lost).

    Independent of the simulator: composed from the branch-size law, the
    survival of the two relabel draws, the branch the tracked leaf lands
    in on each side, whether the two cut points separate it the same way,
    and the hypergeometric overlap of the remaining survivors.
    """
    law = {k: Fraction(0) for k in range(m)}
    survive = Fraction(m - 1, m) ** 2
    triples = [
        (a1, a2, m - 1 - a1 - a2)
        for a1 in range(m)
        for a2 in range(m - a1)
    ]
    weight = {tr: branch_size_pmf(m, *tr) for tr in triples}
    for ta, wa in weight.items():
        if not wa:
            continue
        for tb, wb in weight.items():
            if not wb:
                continue
            for a_i, b_i in zip(ta, tb):
                here = wa * wb * Fraction(a_i, m - 1) * Fraction(b_i, m - 1)
                if not here:
                    continue
                # both cut points land next to the tracked leaf
                for k in range(1, m):
                    law[k] += (
                        survive
                        * here
                        * Fraction(1, m - 1)
                        * hypergeometric_pmf(a_i - 1, b_i - 1, m - 2, k - 1)
                    )
                if m < 3:
                    continue
                for da in (0, 1):
                    pda = (
                        Fraction(a_i - 1, m - 2)
                        if da
                        else Fraction(m - 1 - a_i, m - 2)
                    )
                    for db in (0, 1):
                        pdb = (
                            Fraction(b_i - 1, m - 2)
                            if db
                            else Fraction(m - 1 - b_i, m - 2)
                        )
                        w2 = survive * here * Fraction(m - 2, m - 1) * pda * pdb
                        if not w2:
                            continue
                        for k in range(1, m):
                            law[k] += w2 * hypergeometric_pmf(
                                a_i - 1 - da, b_i - 1 - db, m - 3, k - 1
                            )
    law[0] = 1 - sum(law[k] for k in range(1, m))
    return law
