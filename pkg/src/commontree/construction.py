"""The randomized recursive common-subtree construction.

Given two trees on the same original leaf set, the algorithm maintains a
worklist of *items*.  An item is a common label set ``A`` together with
the two trees induced on ``A`` plus a pair of special (novel) leaves that
remember where the item was cut out of its parents.  Splitting an item
relabels one uniform original leaf per side as a shared fresh terminal,
cuts each side at the branchpoint of its three special leaves, and
intersects the per-branch label sets; the up-to-three nonempty
intersections become child items.  Items whose label set falls below the
cutoff stop and contribute a single picked leaf, and the output is the
subtree induced on all picked leaves — a common subtree of the inputs by
construction, which is verified before returning anyway.

``track_leaf_sizes`` instruments the same run to report how the label-set
size of the item containing one tagged leaf evolves stage by stage; this
integer trajectory is the bridge to the size chain in
:mod:`commontree.stochastic`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .labels import ORIGINAL, Label, branchpoint, terminal
from .mast import mast
from .trees import (
    Tree,
    branchpoint_of_three,
    induced_subtree,
    relabel,
    split_at_branchpoint,
    trees_equal,
)

__all__ = [
    "ConstructionItem",
    "ConstructionOutput",
    "TraceRecord",
    "stage0",
    "split_item",
    "run_construction",
    "track_leaf_sizes",
]

_BRANCH_DIGITS = "123"


@dataclass(frozen=True)
class ConstructionItem:
    """One worklist entry: a common label set and its two induced trees.

    ``index`` is the branch path from the root item ("" at stage 0, then
    one digit of 1/2/3 per split); it only feeds the naming of fresh
    novel labels, which keeps every label created during a run distinct.
    """

    originals: frozenset[Label]
    special_pair: tuple[Label, Label]
    tree_left: Tree
    tree_right: Tree
    depth: int
    index: str = ""

    def __post_init__(self) -> None:
        if any(lab.kind != ORIGINAL for lab in self.originals):
            raise ValueError("item label set must contain only original labels")
        if any(lab.kind == ORIGINAL for lab in self.special_pair):
            raise ValueError("special labels must be novel")
        expected = self.originals | set(self.special_pair)
        if self.tree_left.leaves != expected or self.tree_right.leaves != expected:
            raise ValueError("item trees must live on originals + special pair")


@dataclass(frozen=True)
class TraceRecord:
    """Per-item accounting row emitted while a construction runs.

    ``b1..b3`` hold the intersected branch sizes of a split (0 marks an
    empty branch) and are ``None`` on stopped items, which instead carry
    their ``picked_label``.
    """

    item_id: int
    parent_id: int  # -1 for the stage-0 item
    depth: int
    m_before: int
    b1: int | None
    b2: int | None
    b3: int | None
    stopped: bool
    picked_label: Label | None


@dataclass(frozen=True)
class ConstructionOutput:
    picked: frozenset[Label]
    subtree: Tree
    item_trace: list[TraceRecord] = field(default_factory=list)


def _require_same_original_leafset(t: Tree, t_prime: Tree) -> None:
    if t.is_empty or t_prime.is_empty:
        raise ValueError("both input trees must be nonempty")
    if t.leaves != t_prime.leaves:
        raise ValueError("input trees must share one leaf set")
    if any(lab.kind != ORIGINAL for lab in t.leaves):
        raise ValueError("input leaves must all be original labels")


def _ordered_distinct_pair(
    ordered: list[Label], rng: np.random.Generator
) -> tuple[Label, Label]:
    n = len(ordered)
    i = int(rng.integers(n))
    j = int(rng.integers(n - 1))
    if j >= i:
        j += 1
    return ordered[i], ordered[j]


def stage0(t: Tree, t_prime: Tree, rng: np.random.Generator) -> ConstructionItem:
    """Initial item: both trees with a random pair relabeled t_1, t_2.

    Each tree independently turns an ordered pair of distinct uniform
    leaves into the special pair, and the item keeps the intersection of
    surviving original labels (size n-4, n-3 or n-2 depending on how the
    two pairs overlap).
    """
    _require_same_original_leafset(t, t_prime)
    n = t.n_leaves
    if n < 5:
        raise ValueError(f"the staged construction needs n >= 5 leaves, got {n}")
    t_one, t_two = terminal("1"), terminal("2")
    ordered = t.sorted_leaves()
    first_l, second_l = _ordered_distinct_pair(ordered, rng)
    first_r, second_r = _ordered_distinct_pair(ordered, rng)
    common = t.leaves - {first_l, second_l, first_r, second_r}
    keep = common | {t_one, t_two}
    return ConstructionItem(
        originals=frozenset(common),
        special_pair=(t_one, t_two),
        tree_left=induced_subtree(relabel(t, {first_l: t_one, second_l: t_two}), keep),
        tree_right=induced_subtree(
            relabel(t_prime, {first_r: t_one, second_r: t_two}), keep
        ),
        depth=0,
        index="",
    )


def split_item(
    item: ConstructionItem, rng: np.random.Generator
) -> list[ConstructionItem]:
    """Split an item into its nonempty child items (0 to 3 of them).

    Each side independently relabels one uniform original leaf with the
    same fresh terminal, is cut at the branchpoint of its three special
    leaves, and contributes per-branch original label sets B_i / B'_i;
    children are built on the intersections A_i = B_i & B'_i.  Branches
    are numbered by the special leaf they contain — first special, second
    special, new terminal — and child i inherits that leaf together with
    the fresh branchpoint label standing in for the rest of the tree.
    """
    m = len(item.originals)
    if m == 0:
        raise ValueError("cannot split an item with no original labels")
    s_one, s_two = item.special_pair
    fresh = terminal("3" if item.index == "" else item.index + "1")
    doors = tuple(branchpoint(item.index + d) for d in _BRANCH_DIGITS)
    anchors = (s_one, s_two, fresh)
    ordered = sorted(item.originals)

    relabeled: list[Label] = []
    branches: list[tuple[Tree, Tree, Tree]] = []
    for tree in (item.tree_left, item.tree_right):
        chosen = ordered[int(rng.integers(m))]
        relabeled.append(chosen)
        work = relabel(tree, {chosen: fresh})
        hub = branchpoint_of_three(work, s_one, s_two, fresh)
        branches.append(split_at_branchpoint(work, hub, doors, anchors))
    left_branches, right_branches = branches

    children: list[ConstructionItem] = []
    for i in range(3):
        kept = frozenset(
            lab
            for lab in left_branches[i].leaves & right_branches[i].leaves
            if lab.kind == ORIGINAL
        )
        # the two relabeled leaves can never survive the intersection:
        # each is missing (as an original) from its own side's branch
        assert not kept & set(relabeled)
        if not kept:
            continue
        keep = kept | {anchors[i], doors[i]}
        children.append(
            ConstructionItem(
                originals=kept,
                special_pair=(anchors[i], doors[i]),
                tree_left=induced_subtree(left_branches[i], keep),
                tree_right=induced_subtree(right_branches[i], keep),
                depth=item.depth + 1,
                index=item.index + _BRANCH_DIGITS[i],
            )
        )
    return children


def _run_engine(
    t: Tree,
    t_prime: Tree,
    cutoff: int,
    rng: np.random.Generator,
    tracked: Label | None,
) -> tuple[list[Label], list[TraceRecord], list[int]]:
    """Shared FIFO worklist driver for runs and tagged-leaf tracking.

    Tracking is pure observation: the random draws are identical with and
    without a tracked leaf, so a tracked run reproduces the plain run for
    the same seed bit for bit.
    """
    root = stage0(t, t_prime, rng)
    trajectory: list[int] = []
    tracked_id: int | None = None
    if tracked is not None:
        if tracked in root.originals:
            tracked_id = 0
            trajectory.append(len(root.originals))
        else:
            trajectory.append(0)

    queue: deque[tuple[int, int, ConstructionItem]] = deque([(0, -1, root)])
    next_id = 1
    picked: list[Label] = []
    trace: list[TraceRecord] = []
    while queue:
        item_id, parent_id, item = queue.popleft()
        m = len(item.originals)
        if m >= cutoff:
            children = split_item(item, rng)
            sizes = {child.index[-1]: len(child.originals) for child in children}
            trace.append(
                TraceRecord(
                    item_id=item_id,
                    parent_id=parent_id,
                    depth=item.depth,
                    m_before=m,
                    b1=sizes.get("1", 0),
                    b2=sizes.get("2", 0),
                    b3=sizes.get("3", 0),
                    stopped=False,
                    picked_label=None,
                )
            )
            followed = False
            for child in children:
                child_id = next_id
                next_id += 1
                queue.append((child_id, item_id, child))
                if tracked_id == item_id and tracked in child.originals:
                    trajectory.append(len(child.originals))
                    tracked_id = child_id
                    followed = True
            if tracked_id == item_id and not followed:
                trajectory.append(0)
                tracked_id = None
        else:
            choice = min(item.originals)
            assert choice not in picked  # items hold pairwise disjoint label sets
            picked.append(choice)
            trace.append(
                TraceRecord(
                    item_id=item_id,
                    parent_id=parent_id,
                    depth=item.depth,
                    m_before=m,
                    b1=None,
                    b2=None,
                    b3=None,
                    stopped=True,
                    picked_label=choice,
                )
            )
            if tracked_id == item_id:
                tracked_id = None  # trajectory already ends at this size
    return picked, trace, trajectory


def run_construction(
    t: Tree, t_prime: Tree, cutoff: int, rng: np.random.Generator
) -> ConstructionOutput:
    """Run the full staged construction and return its common subtree.

    Items at least as large as ``cutoff`` are split; smaller ones stop
    and contribute their minimum original label (a deterministic stand-in
    for "pick any leaf").  Inputs with fewer than 5 leaves fall back to
    the exact maximum-agreement witness, since no stage can meaningfully
    run there.  The returned subtree is always re-verified to be induced
    identically in both inputs.
    """
    _require_same_original_leafset(t, t_prime)
    if cutoff < 2:
        raise ValueError(f"cutoff must be at least 2, got {cutoff}")
    if t.n_leaves < 5:
        witness = mast(t, t_prime).witness
        return ConstructionOutput(
            picked=frozenset(witness),
            subtree=induced_subtree(t, witness),
            item_trace=[],
        )
    picked, trace, _ = _run_engine(t, t_prime, cutoff, rng, tracked=None)
    subtree = induced_subtree(t, picked)
    if not trees_equal(subtree, induced_subtree(t_prime, picked)):
        raise RuntimeError(
            "internal error: construction output failed the common-subtree check"
        )
    return ConstructionOutput(
        picked=frozenset(picked), subtree=subtree, item_trace=trace
    )


def track_leaf_sizes(
    t: Tree,
    t_prime: Tree,
    cutoff: int,
    leaf: Label,
    rng: np.random.Generator,
) -> list[int]:
    """Stage-by-stage label-set sizes of the item holding ``leaf``.

    Entry 0 is the size of the stage-0 item if ``leaf`` survived the
    initial relabeling (0 otherwise); each split of the tracked item
    appends the size of the child containing the leaf, or a terminal 0
    when the leaf falls out.  A trajectory that ends at a positive value
    is one whose item stopped below the cutoff with the leaf inside.
    """
    _require_same_original_leafset(t, t_prime)
    if cutoff < 2:
        raise ValueError(f"cutoff must be at least 2, got {cutoff}")
    if t.n_leaves < 5:
        raise ValueError("tracking needs the staged construction (n >= 5)")
    if leaf not in t.leaves:
        raise ValueError(f"{leaf.name} is not a leaf of the inputs")
    _, _, trajectory = _run_engine(t, t_prime, cutoff, rng, tracked=leaf)
    return trajectory
