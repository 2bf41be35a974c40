"""Unrooted leaf-labeled binary trees.

A tree on n >= 3 leaves has n labeled degree-1 vertices, n - 2 unlabeled
degree-3 branchpoints and 2n - 3 edges.  Degenerate forms are first-class:
the empty tree, the single labeled vertex and the single edge on two
leaves.  There are (2n - 5)!! distinct trees on a fixed n-leaf label set,
which is what :func:`count_trees` returns and what the sequential
edge-attachment process behind :func:`random_tree` and
:func:`enumerate_trees` produces uniformly.

Vertices are plain ints, private to each tree instance.  Everything
user-facing speaks :class:`~commontree.labels.Label`.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Sequence

import numpy as np

from .labels import Label, parse_label

__all__ = [
    "SizeGuardError",
    "Tree",
    "count_trees",
    "count_trees_asymptotic",
    "random_tree",
    "enumerate_trees",
    "induced_subtree",
    "relabel",
    "canonical_form",
    "trees_equal",
    "branchpoint_of_three",
    "split_at_branchpoint",
    "branch_leaf_counts",
    "centroid",
    "parse_newick",
    "to_newick",
]

ENUMERATION_LIMIT = 9


class SizeGuardError(ValueError):
    """An operation was asked to run beyond its guarded input size."""


class Tree:
    """Immutable unrooted tree with labeled leaves.

    Construct through the module functions or the small factories below;
    the raw constructor checks all structural invariants (degrees, leaf
    count, connectivity, distinct labels).
    """

    __slots__ = ("_adj", "_leaf_at", "_vertex_of")

    def __init__(self, adj: dict[int, tuple[int, ...]], leaf_at: dict[int, Label]):
        self._adj = adj
        self._leaf_at = leaf_at
        self._vertex_of = {lab: v for v, lab in leaf_at.items()}
        self._check()

    def _check(self) -> None:
        adj, leaf_at = self._adj, self._leaf_at
        n = len(leaf_at)
        if len(self._vertex_of) != n:
            raise ValueError("duplicate leaf labels")
        if n == 0:
            if adj:
                raise ValueError("empty tree must have no vertices")
            return
        if set(leaf_at) - set(adj):
            raise ValueError("leaf vertex missing from adjacency")
        if n == 1:
            if len(adj) != 1 or any(adj.values()):
                raise ValueError("one leaf means one isolated vertex")
            return
        edges = 0
        internal = 0
        for v, nbrs in adj.items():
            d = len(nbrs)
            edges += d
            if v in leaf_at:
                if d != 1:
                    raise ValueError(f"leaf vertex {v} has degree {d}")
            else:
                internal += 1
                if d != 3:
                    raise ValueError(f"branchpoint {v} has degree {d}")
        if edges % 2:
            raise ValueError("adjacency is not symmetric")
        edges //= 2
        if n == 2:
            ok = internal == 0 and edges == 1
        else:
            ok = internal == n - 2 and edges == 2 * n - 3
        if not ok:
            raise ValueError(f"bad vertex/edge counts for {n} leaves")
        # connectivity: a walk from any vertex must reach all of them
        start = next(iter(adj))
        seen = {start}
        stack = [start]
        while stack:
            for u in adj[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != len(adj):
            raise ValueError("tree is disconnected")

    # ------------------------------------------------------------------
    # factories

    @staticmethod
    def empty() -> "Tree":
        return Tree({}, {})

    @staticmethod
    def single(label: Label) -> "Tree":
        return Tree({0: ()}, {0: label})

    @staticmethod
    def edge(a: Label, b: Label) -> "Tree":
        return Tree({0: (1,), 1: (0,)}, {0: a, 1: b})

    # ------------------------------------------------------------------
    # accessors

    @property
    def n_leaves(self) -> int:
        return len(self._leaf_at)

    @property
    def is_empty(self) -> bool:
        return not self._leaf_at

    @property
    def leaves(self) -> frozenset[Label]:
        return frozenset(self._vertex_of)

    def sorted_leaves(self) -> list[Label]:
        return sorted(self._vertex_of)

    def vertices(self) -> Iterable[int]:
        return self._adj.keys()

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def is_leaf_vertex(self, v: int) -> bool:
        return v in self._leaf_at

    def label_at(self, v: int) -> Label:
        return self._leaf_at[v]

    def vertex_of(self, label: Label) -> int:
        try:
            return self._vertex_of[label]
        except KeyError:
            raise KeyError(f"no leaf labeled {label!r} in this tree") from None

    def has_leaf(self, label: Label) -> bool:
        return label in self._vertex_of

    def internal_vertices(self) -> list[int]:
        return [v for v in self._adj if v not in self._leaf_at]

    def __repr__(self) -> str:
        if self.is_empty:
            return "Tree(empty)"
        return f"Tree({to_newick(self)!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return trees_equal(self, other)

    def __hash__(self) -> int:
        return hash(canonical_form(self))


# ----------------------------------------------------------------------
# counting


def count_trees(n: int) -> int:
    """Number of distinct trees on a fixed set of n labeled leaves.

    Equals the double factorial (2n - 5)!! for n >= 3 and 1 for n in
    {1, 2}; satisfies count(n + 1) = (2n - 3) * count(n).
    """
    if n < 1:
        raise ValueError("need at least one leaf")
    out = 1
    for k in range(1, 2 * n - 4, 2):
        out *= k
    return out


def count_trees_asymptotic(n: int) -> float:
    """First-order approximation 2**(n - 3/2) * e**-n * n**(n - 2).

    Evaluated in log space so it stays finite well past the float range
    of the factorials involved.
    """
    if n < 1:
        raise ValueError("need at least one leaf")
    return math.exp((n - 1.5) * math.log(2.0) - n + (n - 2) * math.log(n))


# ----------------------------------------------------------------------
# generation and enumeration


def _attach(
    adj: dict[int, tuple[int, ...]],
    leaf_at: dict[int, Label],
    edge: tuple[int, int],
    label: Label,
    next_vertex: int,
) -> None:
    """Subdivide ``edge`` with a new branchpoint and hang ``label`` off it."""
    u, v = edge
    w, leaf = next_vertex, next_vertex + 1
    adj[u] = tuple(w if x == v else x for x in adj[u])
    adj[v] = tuple(w if x == u else x for x in adj[v])
    adj[w] = (u, v, leaf)
    adj[leaf] = (w,)
    leaf_at[leaf] = label


def random_tree(labels: Sequence[Label], rng: np.random.Generator) -> Tree:
    """Uniform random tree on the given distinct labels.

    Leaves are inserted in sorted label order; each insertion subdivides
    an edge chosen uniformly at random.  Every tree arises from exactly
    one choice sequence, so the output is uniform over all count_trees(n)
    possibilities no matter the insertion order.
    """
    labs = sorted(labels)
    if len(set(labs)) != len(labs):
        raise ValueError("labels must be distinct")
    n = len(labs)
    if n == 0:
        return Tree.empty()
    if n == 1:
        return Tree.single(labs[0])
    adj: dict[int, tuple[int, ...]] = {0: (1,), 1: (0,)}
    leaf_at = {0: labs[0], 1: labs[1]}
    edges: list[tuple[int, int]] = [(0, 1)]
    nxt = 2
    for lab in labs[2:]:
        k = int(rng.integers(len(edges)))
        u, v = edges[k]
        w, leaf = nxt, nxt + 1
        _attach(adj, leaf_at, (u, v), lab, nxt)
        nxt += 2
        edges[k] = (u, w)
        edges.append((w, v))
        edges.append((w, leaf))
    return Tree(adj, leaf_at)


def enumerate_trees(labels: Sequence[Label]) -> list[Tree]:
    """All distinct trees on the given labels, without duplicates.

    Guarded at 9 leaves (135135 trees); use :func:`count_trees` when only
    the number is needed.
    """
    labs = sorted(labels)
    if len(set(labs)) != len(labs):
        raise ValueError("labels must be distinct")
    n = len(labs)
    if n > ENUMERATION_LIMIT:
        raise SizeGuardError(f"enumeration is guarded at {ENUMERATION_LIMIT} leaves, got {n}")
    if n == 0:
        return [Tree.empty()]
    if n == 1:
        return [Tree.single(labs[0])]
    partial: list[tuple[dict[int, tuple[int, ...]], dict[int, Label], list[tuple[int, int]], int]]
    partial = [({0: (1,), 1: (0,)}, {0: labs[0], 1: labs[1]}, [(0, 1)], 2)]
    for lab in labs[2:]:
        grown = []
        for adj, leaf_at, edges, nxt in partial:
            for k, (u, v) in enumerate(edges):
                adj2 = dict(adj)
                leaf2 = dict(leaf_at)
                _attach(adj2, leaf2, (u, v), lab, nxt)
                w, leaf = nxt, nxt + 1
                edges2 = list(edges)
                edges2[k] = (u, w)
                edges2.append((w, v))
                edges2.append((w, leaf))
                grown.append((adj2, leaf2, edges2, nxt + 2))
        partial = grown
    return [Tree(adj, leaf_at) for adj, leaf_at, _, _ in partial]


# ----------------------------------------------------------------------
# induced subtrees and relabeling


def induced_subtree(t: Tree, subset: Iterable[Label]) -> Tree:
    """Subtree spanned by ``subset`` with degree-2 vertices smoothed away.

    The result is again a leaf-labeled binary tree, on exactly the labels
    in ``subset``.  Inducing commutes with taking further subsets.
    """
    want = set(subset)
    missing = want - set(t._vertex_of)
    if missing:
        raise ValueError(f"labels not in tree: {sorted(missing)!r}")
    if not want:
        return Tree.empty()
    if len(want) == 1:
        return Tree.single(next(iter(want)))

    keep = {t._vertex_of[lab] for lab in want}
    nbrs = {v: set(ns) for v, ns in t._adj.items()}
    dead = deque(v for v, ns in nbrs.items() if len(ns) <= 1 and v not in keep)
    removed = set()
    while dead:
        v = dead.popleft()
        if v in removed:
            continue
        removed.add(v)
        for u in nbrs[v]:
            nbrs[u].discard(v)
            if len(nbrs[u]) <= 1 and u not in keep and u not in removed:
                dead.append(u)
        nbrs[v] = set()

    remaining = [v for v in nbrs if v not in removed]
    for v in remaining:
        if len(nbrs[v]) == 2:
            a, b = nbrs[v]
            nbrs[a].discard(v)
            nbrs[b].discard(v)
            nbrs[a].add(b)
            nbrs[b].add(a)
            removed.add(v)

    adj = {v: tuple(sorted(nbrs[v])) for v in nbrs if v not in removed}
    leaf_at = {t._vertex_of[lab]: lab for lab in want}
    return Tree(adj, leaf_at)


def relabel(t: Tree, mapping: dict[Label, Label]) -> Tree:
    """Same shape with some leaf labels swapped out (must stay distinct)."""
    for old in mapping:
        if old not in t._vertex_of:
            raise ValueError(f"cannot relabel absent leaf {old!r}")
    leaf_at = {v: mapping.get(lab, lab) for v, lab in t._leaf_at.items()}
    return Tree(dict(t._adj), leaf_at)


# ----------------------------------------------------------------------
# canonical form


def _canonical_orientation(t: Tree) -> tuple[int, dict[int, list[int]]]:
    """Root at the branchpoint next to the smallest leaf; order children by
    the smallest leaf label reachable through them.  Needs n >= 3."""
    min_leaf = min(t._vertex_of.values(), key=lambda v: t._leaf_at[v].sort_key)
    root = t._adj[min_leaf][0]
    parent = {root: -1}
    order = [root]
    for v in order:
        for u in t._adj[v]:
            if u not in parent:
                parent[u] = v
                order.append(u)
    min_key: dict[int, tuple] = {}
    for v in reversed(order):
        if v in t._leaf_at:
            min_key[v] = t._leaf_at[v].sort_key
        else:
            min_key[v] = min(min_key[u] for u in t._adj[v] if parent.get(u) == v)
    children = {
        v: sorted((u for u in t._adj[v] if parent.get(u) == v), key=min_key.__getitem__)
        for v in order
        if v not in t._leaf_at
    }
    return root, children


def to_newick(t: Tree) -> str:
    """Serialize; inverse of :func:`parse_newick` and canonical.

    Trees on n >= 3 leaves are written as a trifurcation at the
    branchpoint adjacent to the smallest leaf, children ordered by their
    smallest descendant label, so equal trees always serialize to equal
    strings.
    """
    n = t.n_leaves
    if n == 0:
        return ";"
    if n == 1:
        return f"{next(iter(t.leaves)).name};"
    if n == 2:
        a, b = t.sorted_leaves()
        return f"({a.name},{b.name});"
    root, children = _canonical_orientation(t)
    rendered: dict[int, str] = {}
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        v, expanded = stack.pop()
        if v in t._leaf_at:
            rendered[v] = t._leaf_at[v].name
        elif expanded:
            rendered[v] = "(" + ",".join(rendered[u] for u in children[v]) + ")"
        else:
            stack.append((v, True))
            stack.extend((u, False) for u in children[v])
    return rendered[root] + ";"


def canonical_form(t: Tree) -> bytes:
    """Byte string equal between two trees iff the trees are equal."""
    return to_newick(t).encode("ascii")


def trees_equal(a: Tree, b: Tree) -> bool:
    return canonical_form(a) == canonical_form(b)


def canonical_vertex_ranks(t: Tree) -> dict[int, int]:
    """Deterministic, label-driven rank for every vertex (n >= 3)."""
    root, children = _canonical_orientation(t)
    ranks = {}
    stack = [root]
    while stack:
        v = stack.pop()
        ranks[v] = len(ranks)
        if v not in t._leaf_at:
            stack.extend(reversed(children[v]))
    return ranks


# ----------------------------------------------------------------------
# medians, splits, centroid


def branchpoint_of_three(t: Tree, a: Label, b: Label, c: Label) -> int:
    """The unique vertex lying on all three pairwise leaf paths."""
    if len({a, b, c}) != 3:
        raise ValueError("need three distinct leaves")
    va, vb, vc = t.vertex_of(a), t.vertex_of(b), t.vertex_of(c)
    parent = {va: -1}
    queue = deque([va])
    while queue:
        v = queue.popleft()
        if v == vb:
            break
        for u in t._adj[v]:
            if u not in parent:
                parent[u] = v
                queue.append(u)
    on_path = set()
    v = vb
    while v != -1:
        on_path.add(v)
        v = parent[v]
    seen = {vc}
    queue = deque([vc])
    while queue:
        v = queue.popleft()
        if v in on_path:
            return v
        for u in t._adj[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    raise AssertionError("median search fell off the tree")


def split_at_branchpoint(
    t: Tree,
    v: int,
    new_labels: tuple[Label, Label, Label],
    anchors: tuple[Label, Label, Label],
) -> tuple[Tree, Tree, Tree]:
    """Cut the tree at branchpoint ``v`` into its three branches.

    Branch i is the component containing ``anchors[i]``, with a fresh
    leaf labeled ``new_labels[i]`` attached where ``v`` used to be.  The
    anchors must sit in three different components.
    """
    if t.degree(v) != 3:
        raise ValueError("can only split at a degree-3 branchpoint")
    if len(set(new_labels)) != 3:
        raise ValueError("new labels must be distinct")
    comp_of: dict[int, int] = {}
    comps: list[set[int]] = []
    doors = t._adj[v]
    for i, u in enumerate(doors):
        comp = {u}
        stack = [u]
        while stack:
            x = stack.pop()
            for y in t._adj[x]:
                if y != v and y not in comp:
                    comp.add(y)
                    stack.append(y)
        comps.append(comp)
        for x in comp:
            comp_of[x] = i

    order = []
    for lab in anchors:
        w = t.vertex_of(lab)
        if w == v or w not in comp_of:
            raise ValueError(f"anchor {lab!r} does not select a branch")
        order.append(comp_of[w])
    if len(set(order)) != 3:
        raise ValueError("anchors must lie in three distinct branches")

    fresh = max(t._adj) + 1
    out = []
    for i, lab in zip(order, new_labels):
        comp = comps[i]
        door = doors[i]
        adj = {x: tuple(y for y in t._adj[x] if y in comp) for x in comp}
        adj[door] = adj[door] + (fresh,)
        adj[fresh] = (door,)
        leaf_at = {x: t._leaf_at[x] for x in comp if x in t._leaf_at}
        leaf_at[fresh] = lab
        out.append(Tree(adj, leaf_at))
    return tuple(out)  # type: ignore[return-value]


def branch_leaf_counts(t: Tree) -> dict[int, tuple[int, ...]]:
    """For every branchpoint, the leaf counts of its three branches."""
    n = t.n_leaves
    if n < 3:
        return {}
    root = next(iter(t._leaf_at))
    parent = {root: -1}
    order = [root]
    for v in order:
        for u in t._adj[v]:
            if u not in parent:
                parent[u] = v
                order.append(u)
    below = {}
    for v in reversed(order):
        below[v] = 1 if v in t._leaf_at else sum(below[u] for u in t._adj[v] if parent[u] == v)
    out = {}
    for v in t._adj:
        if v in t._leaf_at:
            continue
        sizes = tuple(below[u] if parent.get(u) == v else n - below[v] for u in t._adj[v])
        out[v] = sizes
    return out


def centroid(t: Tree) -> int:
    """Branchpoint whose largest branch is smallest.

    Such a vertex always keeps every branch at or below half the leaves.
    Ties go to the vertex encountered first in canonical traversal
    order, so the choice is a function of the tree alone.
    """
    if t.n_leaves < 3:
        raise ValueError("centroid needs at least three leaves")
    sizes = branch_leaf_counts(t)
    ranks = canonical_vertex_ranks(t)
    return min(sizes, key=lambda v: (max(sizes[v]), ranks[v]))


# ----------------------------------------------------------------------
# newick I/O


def _tokenize_newick(text: str) -> list[tuple[str, int]]:
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "(),;":
            toks.append((ch, i))
            i += 1
        else:
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i:
                raise ValueError(f"newick: unexpected character {ch!r} at position {i}")
            toks.append((text[i:j], i))
            i = j
    return toks


def parse_newick(text: str) -> Tree:
    """Parse one Newick line.

    Leaf names are decimal integers for original labels and ``t_<index>``
    or ``b_<index>`` for novel ones.  Inner groups must be binary; the
    top-level group may have two children (an edge, or a tree rooted on
    an edge) or three (the canonical trifurcation).  ``";"`` alone is the
    empty tree.
    """
    toks = _tokenize_newick(text)
    if not toks or toks[-1][0] != ";":
        raise ValueError("newick: expected terminating ';'")
    toks = toks[:-1]
    if not toks:
        return Tree.empty()

    stack: list[list] = []
    top: list | None = None
    for tok, pos in toks:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise ValueError(f"newick: unbalanced ')' at position {pos}")
            group = stack.pop()
            if len(group) < 2:
                raise ValueError(f"newick: group closed at position {pos} has {len(group)} children")
            if stack:
                stack[-1].append(group)
            elif top is None:
                top = group
            else:
                raise ValueError(f"newick: trailing content at position {pos}")
        elif tok == ",":
            if not stack:
                raise ValueError(f"newick: ',' outside any group at position {pos}")
        else:
            try:
                lab = parse_label(tok)
            except ValueError as exc:
                raise ValueError(f"newick: {exc} at position {pos}") from None
            if stack:
                stack[-1].append(lab)
            elif top is None:
                top = lab
            else:
                raise ValueError(f"newick: trailing content at position {pos}")
    if stack:
        raise ValueError("newick: unbalanced '('")
    if top is None:
        raise ValueError("newick: empty input before ';'")

    if isinstance(top, Label):
        return Tree.single(top)

    adj: dict[int, tuple[int, ...]] = {}
    leaf_at: dict[int, Label] = {}
    seen_labels: set[Label] = set()
    counter = [0]

    def new_vertex() -> int:
        counter[0] += 1
        return counter[0] - 1

    def build(item) -> int:
        """Create vertices for ``item`` and return the one that attaches upward.

        Every group below the top level stands for a branchpoint and must
        be binary: its third edge is the one added by the caller.
        """
        order: list[tuple[int, object]] = []
        kids_of: dict[int, list[int]] = {}
        todo: list[tuple[int, object]] = [(0, item)]
        serial = 0
        while todo:
            key, it = todo.pop()
            order.append((key, it))
            if isinstance(it, list):
                if len(it) != 2:
                    raise ValueError("newick: inner groups must have exactly two children")
                kids = []
                for sub in it:
                    serial += 1
                    kids.append(serial)
                    todo.append((serial, sub))
                kids_of[key] = kids
        vertex: dict[int, int] = {}
        for key, it in reversed(order):
            v = new_vertex()
            if isinstance(it, Label):
                if it in seen_labels:
                    raise ValueError(f"newick: duplicate leaf name {it.name!r}")
                seen_labels.add(it)
                adj[v] = ()
                leaf_at[v] = it
            else:
                kid_vs = [vertex[k] for k in kids_of[key]]
                adj[v] = tuple(kid_vs)
                for kv in kid_vs:
                    adj[kv] = adj[kv] + (v,)
            vertex[key] = v
        return vertex[0]

    if len(top) == 2:
        # a two-child top group encodes an edge, not a vertex
        va = build(top[0])
        vb = build(top[1])
        adj[va] = adj[va] + (vb,)
        adj[vb] = adj[vb] + (va,)
    elif len(top) == 3:
        kid_vs = [build(sub) for sub in top]
        center = new_vertex()
        adj[center] = tuple(kid_vs)
        for kv in kid_vs:
            adj[kv] = adj[kv] + (center,)
    else:
        raise ValueError("newick: top-level group must have two or three children")

    return Tree(adj, leaf_at)
