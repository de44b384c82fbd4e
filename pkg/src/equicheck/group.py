"""The p4/p4m symmetry groups and their actions on square grids.

Coordinate convention: an index is written ``(x, y)`` = (column, row) with
row 0 at the top.  On an ``n``-sized grid the quarter-turn map is

    R_n(x, y) = (y, n-1-x)

which rotates content counterclockwise when row 0 is displayed on top, and
the horizontal mirror is

    M_n(x, y) = (n-1-x, y).

A group element is stored in the normal form "mirror first, then
``rotations`` quarter turns".  The clockwise quarter turn is simply the
inverse of ``ROT90``.  The canonical order of group-axis slots is
``[e, r, r2, r3, m, mr, mr2, mr3]`` (``mr`` = mirror, then one quarter
turn), so an element's slot index is ``rotations + 4*mirrored``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import GroupKindError, PatchError, ShapeError
from .tensor import FeatureMap


class GroupKind(enum.Enum):
    """Symmetry group of a network: trivial, 4 rotations, or rotations+mirror."""

    Z2 = "z2"
    P4 = "p4"
    P4M = "p4m"

    @property
    def size(self) -> int:
        return {GroupKind.Z2: 1, GroupKind.P4: 4, GroupKind.P4M: 8}[self]

    @classmethod
    def from_label(cls, label: str) -> "GroupKind":
        for kind in cls:
            if kind.value == label:
                return kind
        raise GroupKindError(f"unknown group kind {label!r} (expected z2, p4 or p4m)")


_NAMES = ("e", "r", "r2", "r3", "m", "mr", "mr2", "mr3")


@dataclass(frozen=True)
class GroupElement:
    """Element of p4m: ``rotations`` counterclockwise quarter turns applied
    after an optional horizontal mirror."""

    rotations: int
    mirrored: bool = False

    def __post_init__(self):
        if self.rotations not in (0, 1, 2, 3):
            raise ValueError(f"rotations must be in 0..3, got {self.rotations}")

    @property
    def name(self) -> str:
        return _NAMES[self.rotations + 4 * self.mirrored]

    @classmethod
    def from_name(cls, name: str) -> "GroupElement":
        try:
            slot = _NAMES.index(name)
        except ValueError:
            raise ValueError(f"unknown group element {name!r} (expected one of {_NAMES})")
        return cls(slot % 4, slot >= 4)

    def __str__(self) -> str:
        return self.name


IDENTITY = GroupElement(0)
ROT90 = GroupElement(1)
ROT180 = GroupElement(2)
ROT270 = GroupElement(3)
MIRROR = GroupElement(0, True)


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group product a*b, i.e. the map "apply b, then a"."""
    sign = -1 if a.mirrored else 1
    return GroupElement((a.rotations + sign * b.rotations) % 4, a.mirrored ^ b.mirrored)


def inverse(a: GroupElement) -> GroupElement:
    """Inverse element; mirrored elements are involutions."""
    if a.mirrored:
        return a
    return GroupElement((-a.rotations) % 4)


def elements(kind: GroupKind) -> tuple[GroupElement, ...]:
    """All elements of the group in canonical slot order."""
    rots = tuple(GroupElement(a) for a in range(4))
    if kind is GroupKind.Z2:
        return (IDENTITY,)
    if kind is GroupKind.P4:
        return rots
    return rots + tuple(GroupElement(a, True) for a in range(4))


def slot_index(g: GroupElement) -> int:
    """Position of ``g`` on the canonical group axis."""
    return g.rotations + 4 * g.mirrored


def _check_index(n: int, x: int, y: int) -> None:
    if n < 1:
        raise IndexError(f"grid side must be >= 1, got {n}")
    if not (0 <= x < n and 0 <= y < n):
        raise IndexError(f"index ({x}, {y}) out of range for side {n}")


def rotate_index(n: int, x: int, y: int) -> tuple[int, int]:
    """Quarter-turn map R_n on a single (col, row) index."""
    _check_index(n, x, y)
    return (y, n - 1 - x)


def mirror_index(n: int, x: int, y: int) -> tuple[int, int]:
    """Horizontal mirror map M_n on a single (col, row) index."""
    _check_index(n, x, y)
    return (n - 1 - x, y)


def transform_index(g: GroupElement, n: int, x: int, y: int) -> tuple[int, int]:
    """Apply a group element to one index: mirror first, then quarter turns."""
    if g.mirrored:
        x, y = mirror_index(n, x, y)
    for _ in range(g.rotations):
        x, y = rotate_index(n, x, y)
    _check_index(n, x, y)
    return (x, y)


@dataclass(frozen=True)
class IndexPatch:
    """Axis-aligned block of integer indices, stored as its two corners.

    ``top_left`` and ``bottom_right`` are (col, row) pairs;  the patch
    contains every integer pair between them, inclusive.
    """

    top_left: tuple[int, int]
    bottom_right: tuple[int, int]

    def __post_init__(self):
        (x1, y1), (x2, y2) = self.top_left, self.bottom_right
        if x1 > x2 or y1 > y2:
            raise PatchError(f"corners out of order: {self.top_left} vs {self.bottom_right}")

    def indices(self) -> list[tuple[int, int]]:
        """All (col, row) pairs covered by the patch."""
        (x1, y1), (x2, y2) = self.top_left, self.bottom_right
        return [(x, y) for y in range(y1, y2 + 1) for x in range(x1, x2 + 1)]


def _check_patch(n: int, patch: IndexPatch) -> None:
    for x, y in (patch.top_left, patch.bottom_right):
        if not (0 <= x < n and 0 <= y < n):
            raise PatchError(f"patch corner ({x}, {y}) out of range for side {n}")


def rotate_patch(n: int, patch: IndexPatch) -> IndexPatch:
    """Quarter-turn map on a whole patch; the corners swap roles so the
    result is again top-left/bottom-right ordered."""
    _check_patch(n, patch)
    (x1, y1), (x2, y2) = patch.top_left, patch.bottom_right
    return IndexPatch((y1, n - 1 - x2), (y2, n - 1 - x1))


def mirror_patch(n: int, patch: IndexPatch) -> IndexPatch:
    """Horizontal mirror of a whole patch."""
    _check_patch(n, patch)
    (x1, y1), (x2, y2) = patch.top_left, patch.bottom_right
    return IndexPatch((n - 1 - x2, y1), (n - 1 - x1, y2))


def act_spatial(g: GroupElement, fm: FeatureMap) -> FeatureMap:
    """Move every value from index p to index g(p); channel and group axes
    are untouched.  Requires a square map."""
    if not fm.is_square:
        raise ShapeError(f"spatial action needs a square map, got {fm.height}x{fm.width}")
    vals = fm.values
    if g.mirrored:
        vals = vals[:, :, :, ::-1]
    if g.rotations:
        vals = np.rot90(vals, g.rotations, axes=(2, 3))
    return FeatureMap(vals)


def group_permutation(g: GroupElement, kind: GroupKind) -> np.ndarray:
    """Permutation of group-axis slots induced by left multiplication:
    ``perm[slot(h)] = slot(g*h)``."""
    if kind is GroupKind.Z2:
        raise GroupKindError("the trivial group has no group axis to permute")
    if g.mirrored and kind is GroupKind.P4:
        raise GroupKindError(f"element {g.name} is not in p4")
    perm = np.empty(kind.size, dtype=np.intp)
    for h in elements(kind):
        perm[slot_index(h)] = slot_index(compose(g, h))
    return perm


def act_full(g: GroupElement, fm: FeatureMap, kind: GroupKind) -> FeatureMap:
    """Full feature-map action: spatial transform plus the group-axis
    permutation.  This is the transform a group-equivariant network commutes
    with; it inverts via ``act_full(inverse(g), ...)``."""
    if fm.group_size != kind.size:
        raise ShapeError(
            f"group axis {fm.group_size} does not match {kind.value} (size {kind.size})"
        )
    spatial = act_spatial(g, fm)
    perm = group_permutation(g, kind)
    out = np.empty_like(spatial.values)
    out[:, perm] = spatial.values
    return FeatureMap(out)
