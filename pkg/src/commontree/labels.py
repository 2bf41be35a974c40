"""Leaf labels.

A leaf carries exactly one of three kinds of label:

* ``original``  -- a positive integer id, the labels trees start with;
* ``terminal``  -- a novel label ``t_<index>`` attached when an original
  leaf is re-marked during the recursive construction;
* ``branchpoint`` -- a novel label ``b_<index>`` attached at a cut point
  when a tree is split into branches.

Novel indexes are nonempty strings over the alphabet ``{1, 2, 3}`` and are
unique per kind within one construction run.  Labels order as
original < terminal < branchpoint, originals by id and novel labels
lexicographically by index.
"""

from __future__ import annotations

from dataclasses import dataclass

ORIGINAL = "original"
TERMINAL = "terminal"
BRANCHPOINT = "branchpoint"

_KIND_RANK = {ORIGINAL: 0, TERMINAL: 1, BRANCHPOINT: 2}
_INDEX_ALPHABET = frozenset("123")


@dataclass(frozen=True, slots=True)
class Label:
    """One leaf label.  ``value`` is an int for originals, else an index string."""

    kind: str
    value: int | str

    def __post_init__(self) -> None:
        if self.kind == ORIGINAL:
            if not isinstance(self.value, int) or self.value < 1:
                raise ValueError(f"original label id must be a positive integer, got {self.value!r}")
        elif self.kind in (TERMINAL, BRANCHPOINT):
            if (
                not isinstance(self.value, str)
                or not self.value
                or not set(self.value) <= _INDEX_ALPHABET
            ):
                raise ValueError(
                    f"novel label index must be a nonempty string over 1/2/3, got {self.value!r}"
                )
        else:
            raise ValueError(f"unknown label kind {self.kind!r}")

    @property
    def sort_key(self) -> tuple[int, int, str]:
        if self.kind == ORIGINAL:
            return (0, self.value, "")
        return (_KIND_RANK[self.kind], 0, self.value)

    def __lt__(self, other: "Label") -> bool:
        return self.sort_key < other.sort_key

    def __le__(self, other: "Label") -> bool:
        return self.sort_key <= other.sort_key

    def __gt__(self, other: "Label") -> bool:
        return self.sort_key > other.sort_key

    def __ge__(self, other: "Label") -> bool:
        return self.sort_key >= other.sort_key

    @property
    def name(self) -> str:
        """Serialized form: ``"7"``, ``"t_12"`` or ``"b_3"``."""
        if self.kind == ORIGINAL:
            return str(self.value)
        prefix = "t" if self.kind == TERMINAL else "b"
        return f"{prefix}_{self.value}"

    def __repr__(self) -> str:
        return f"Label({self.name})"


def original(ident: int) -> Label:
    return Label(ORIGINAL, ident)


def terminal(index: str) -> Label:
    return Label(TERMINAL, index)


def branchpoint(index: str) -> Label:
    return Label(BRANCHPOINT, index)


def original_range(n: int) -> list[Label]:
    """The labels 1..n, the usual starting leaf set."""
    return [Label(ORIGINAL, i) for i in range(1, n + 1)]


def parse_label(name: str) -> Label:
    """Inverse of :attr:`Label.name`; raises ValueError on anything else."""
    if name.startswith("t_"):
        return Label(TERMINAL, name[2:])
    if name.startswith("b_"):
        return Label(BRANCHPOINT, name[2:])
    if name.isdigit():
        return Label(ORIGINAL, int(name))
    raise ValueError(f"cannot parse leaf name {name!r}: expected an integer, t_<index> or b_<index>")
