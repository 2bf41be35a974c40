"""Maximum agreement subtree computation.

``mast`` computes the exact size of a largest leaf set on which two
leaf-labeled trees induce the same topology, together with a witness set.
The unrooted problem reduces to a rooted one: any nonempty agreement set
contains some leaf, and two unrooted induced topologies containing a leaf
``l`` agree exactly when the trees rooted at ``l`` agree on the rest.  So
we take the maximum over shared leaves of a rooted dynamic program and add
the root leaf back in.

The rooted program is the classical O(n^2)-pairs recurrence, run here as a
numba kernel over post-order index arrays; with the O(n) outer loop over
root choices the whole thing is cubic, which is perfectly fine at the tree
sizes this package targets (hundreds of leaves).  ``brute_force_mast`` is
the independent subset-scanning oracle used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .labels import Label
from .trees import SizeGuardError, Tree, induced_subtree, trees_equal

__all__ = [
    "MastResult",
    "RootedTree",
    "root_at_leaf",
    "rooted_mast",
    "mast",
    "brute_force_mast",
]


@dataclass(frozen=True)
class MastResult:
    """Size of a maximum agreement leaf set, plus one witness set."""

    size: int
    witness: frozenset[Label] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "witness", frozenset(self.witness))
        if self.size != len(self.witness):
            raise ValueError(
                f"witness has {len(self.witness)} labels for size {self.size}"
            )


@dataclass(frozen=True)
class RootedTree:
    """Binary rooted tree flattened to post-order arrays.

    ``left``/``right`` hold child indices (-1 on leaves), ``labels`` holds
    the leaf label at each node (``None`` on internal nodes).  Children
    come before parents, so the root is the last index; every internal
    node has exactly two children.
    """

    left: np.ndarray
    right: np.ndarray
    labels: tuple[Label | None, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def root(self) -> int:
        return len(self.labels) - 1

    def leaf_labels(self) -> set[Label]:
        return {lab for lab in self.labels if lab is not None}


def root_at_leaf(t: Tree, leaf: Label) -> RootedTree:
    """Root ``t`` at the neighbor of ``leaf``, dropping ``leaf`` itself.

    Directing every edge away from ``leaf`` turns each remaining internal
    vertex into a node with exactly two children.  Children are ordered by
    the smallest leaf label in their subtree, so the layout (and therefore
    any witness backtracking over it) is independent of adjacency
    insertion order.
    """
    if not t.has_leaf(leaf):
        raise ValueError(f"{leaf.name} is not a leaf of the tree")
    if t.n_leaves < 2:
        raise ValueError("rooting needs at least two leaves")
    start = t.vertex_of(leaf)
    root = next(iter(t.neighbors(start)))

    order = [root]
    parent = {root: start}
    kids: dict[int, list[int]] = {}
    for v in order:
        below = [w for w in t.neighbors(v) if w != parent[v]]
        kids[v] = below
        for w in below:
            parent[w] = v
        order.extend(below)

    min_leaf: dict[int, Label] = {}
    for v in reversed(order):
        if not kids[v]:
            min_leaf[v] = t.label_at(v)
        else:
            min_leaf[v] = min(min_leaf[w] for w in kids[v])
    for v in order:
        kids[v].sort(key=lambda w: min_leaf[w])

    left: list[int] = []
    right: list[int] = []
    labels: list[Label | None] = []
    index: dict[int, int] = {}
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        v, expanded = stack.pop()
        if not expanded:
            stack.append((v, True))
            for w in reversed(kids[v]):
                stack.append((w, False))
        else:
            if kids[v]:
                index[v] = len(labels)
                left.append(index[kids[v][0]])
                right.append(index[kids[v][1]])
                labels.append(None)
            else:
                index[v] = len(labels)
                left.append(-1)
                right.append(-1)
                labels.append(t.label_at(v))
    return RootedTree(
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        labels=tuple(labels),
    )


@njit(cache=True)
def _agreement_table(left1, right1, key1, left2, right2, key2):  # pragma: no cover
    n1 = left1.size
    n2 = left2.size
    table = np.zeros((n1, n2), dtype=np.int32)
    for i in range(n1):
        l1 = left1[i]
        r1 = right1[i]
        k1 = key1[i]
        for j in range(n2):
            l2 = left2[j]
            r2 = right2[j]
            if l1 < 0 and l2 < 0:
                table[i, j] = 1 if (k1 >= 0 and k1 == key2[j]) else 0
            elif l1 < 0:
                a = table[i, l2]
                b = table[i, r2]
                table[i, j] = a if a >= b else b
            elif l2 < 0:
                a = table[l1, j]
                b = table[r1, j]
                table[i, j] = a if a >= b else b
            else:
                best = table[l1, l2] + table[r1, r2]
                alt = table[l1, r2] + table[r1, l2]
                if alt > best:
                    best = alt
                if table[l1, j] > best:
                    best = table[l1, j]
                if table[r1, j] > best:
                    best = table[r1, j]
                if table[i, l2] > best:
                    best = table[i, l2]
                if table[i, r2] > best:
                    best = table[i, r2]
                table[i, j] = best
    return table


def _shared_keys(r1: RootedTree, r2: RootedTree) -> tuple[np.ndarray, np.ndarray]:
    shared = sorted(r1.leaf_labels() & r2.leaf_labels())
    rank = {lab: i for i, lab in enumerate(shared)}

    def keys(rt: RootedTree) -> np.ndarray:
        out = np.full(rt.n_nodes, -1, dtype=np.int32)
        for i, lab in enumerate(rt.labels):
            if lab is not None and lab in rank:
                out[i] = rank[lab]
        return out

    return keys(r1), keys(r2)


def _backtrack(table: np.ndarray, r1: RootedTree, r2: RootedTree) -> set[Label]:
    """Recover one maximizing leaf set, preferring the first branch of the
    recurrence at every tie so witnesses are deterministic."""
    witness: set[Label] = set()
    stack = [(r1.root, r2.root)]
    left1, right1 = r1.left, r1.right
    left2, right2 = r2.left, r2.right
    while stack:
        i, j = stack.pop()
        v = table[i, j]
        if v == 0:
            continue
        leaf1 = left1[i] < 0
        leaf2 = left2[j] < 0
        if leaf1 and leaf2:
            witness.add(r1.labels[i])
        elif leaf1:
            if table[i, left2[j]] == v:
                stack.append((i, left2[j]))
            else:
                stack.append((i, right2[j]))
        elif leaf2:
            if table[left1[i], j] == v:
                stack.append((left1[i], j))
            else:
                stack.append((right1[i], j))
        else:
            l1, rr1 = left1[i], right1[i]
            l2, rr2 = left2[j], right2[j]
            if table[l1, l2] + table[rr1, rr2] == v:
                stack.append((l1, l2))
                stack.append((rr1, rr2))
            elif table[l1, rr2] + table[rr1, l2] == v:
                stack.append((l1, rr2))
                stack.append((rr1, l2))
            elif table[l1, j] == v:
                stack.append((l1, j))
            elif table[rr1, j] == v:
                stack.append((rr1, j))
            elif table[i, l2] == v:
                stack.append((i, l2))
            else:
                stack.append((i, rr2))
    return witness


def rooted_mast(r1: RootedTree, r2: RootedTree) -> MastResult:
    """Largest leaf set on which the two rooted trees agree, with witness.

    Runs the vertex-pair recurrence: a leaf pair matches when the labels
    coincide, and an internal pair takes the best of matching the two
    child pairs either way or descending on one side only.
    """
    key1, key2 = _shared_keys(r1, r2)
    table = _agreement_table(r1.left, r1.right, key1, r2.left, r2.right, key2)
    size = int(table[r1.root, r2.root])
    witness = _backtrack(table, r1, r2)
    return MastResult(size=size, witness=frozenset(witness))


def mast(t1: Tree, t2: Tree) -> MastResult:
    """Exact maximum common (agreement) subtree of two trees, with witness.

    Takes the best of ``rooted_mast`` over every shared leaf used as the
    root (adding that leaf back), preferring the earliest maximizing leaf
    in label order.  Shared-leaf counts of 2 or less are degenerate: any
    such set agrees outright.  The winning witness is always re-verified
    by comparing actual induced subtrees.
    """
    if t1.is_empty or t2.is_empty:
        raise ValueError("maximum agreement needs two nonempty trees")
    shared = sorted(t1.leaves & t2.leaves)
    if len(shared) <= 2:
        result = MastResult(size=len(shared), witness=frozenset(shared))
        return _verified(result, t1, t2)

    best: MastResult | None = None
    best_root: Label | None = None
    for leaf in shared:
        candidate = rooted_mast(root_at_leaf(t1, leaf), root_at_leaf(t2, leaf))
        if best is None or candidate.size > best.size:
            best, best_root = candidate, leaf
    assert best is not None and best_root is not None
    result = MastResult(size=best.size + 1, witness=best.witness | {best_root})
    return _verified(result, t1, t2)


def brute_force_mast(t1: Tree, t2: Tree) -> MastResult:
    """Independent oracle: scan subsets of the shared leaves, biggest first.

    Exponential in the shared-leaf count, hence the guard at 14.  Subsets
    of equal size are tried in lexicographic label order, so results are
    deterministic and the returned witness is the lexicographically first
    maximum agreement set.
    """
    from itertools import combinations

    shared = sorted(t1.leaves & t2.leaves)
    if len(shared) > 14:
        raise SizeGuardError(
            f"brute force over {len(shared)} shared leaves is out of reach (max 14)"
        )
    for size in range(len(shared), 0, -1):
        for combo in combinations(shared, size):
            witness = frozenset(combo)
            if trees_equal(induced_subtree(t1, witness), induced_subtree(t2, witness)):
                return MastResult(size=size, witness=witness)
    return MastResult(size=0, witness=frozenset())


def _verified(result: MastResult, t1: Tree, t2: Tree) -> MastResult:
    if result.size and not trees_equal(
        induced_subtree(t1, result.witness), induced_subtree(t2, result.witness)
    ):
        raise RuntimeError(
            "internal error: witness failed the induced-subtree agreement check"
        )
    return result
