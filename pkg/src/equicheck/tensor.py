"""Dense feature-map and filter containers.

Layout convention used everywhere in this package: a feature map is indexed
``(channel, group, row, col)`` with row 0 at the top and column 0 on the
left.  The group axis has length 1 for plain planar maps, 4 for p4 maps and
8 for p4m maps.  Values are float64; small-integer contents are stored
exactly, which is what makes the bit-exact equivariance assertions in the
test suite meaningful.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ShapeError

VALID_GROUP_SIZES = (1, 4, 8)

#: Largest magnitude below which every integer is exactly representable in
#: float64.  Integer-valued accumulations are guarded against crossing it.
EXACT_INT_LIMIT = float(2**53)


def _as_float64(values, ndim: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, order="C")
    if arr.ndim != ndim:
        raise DimensionError(f"{what} needs {ndim} axes, got {arr.ndim}")
    if any(d < 1 for d in arr.shape):
        raise DimensionError(f"{what} has a zero or negative dimension: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite values")
    arr.flags.writeable = False
    return arr


class FeatureMap:
    """Immutable activation tensor with axes (channel, group, row, col)."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = _as_float64(values, 4, "feature map")
        if arr.shape[1] not in VALID_GROUP_SIZES:
            raise DimensionError(
                f"group axis must have length in {VALID_GROUP_SIZES}, got {arr.shape[1]}"
            )
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        """Read-only float64 array of shape (channels, group, height, width)."""
        return self._values

    @property
    def channels(self) -> int:
        return self._values.shape[0]

    @property
    def group_size(self) -> int:
        return self._values.shape[1]

    @property
    def height(self) -> int:
        return self._values.shape[2]

    @property
    def width(self) -> int:
        return self._values.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self._values.shape

    @property
    def is_square(self) -> bool:
        return self.height == self.width

    def __repr__(self) -> str:
        c, g, h, w = self.shape
        return f"FeatureMap(channels={c}, group={g}, size={h}x{w})"


class FilterBank:
    """Immutable convolution weights with axes (out, in, in_group, row, col).

    The kernel is square; ``in_group_size`` must match the group axis of the
    feature map the bank is applied to.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = _as_float64(values, 5, "filter bank")
        if arr.shape[2] not in VALID_GROUP_SIZES:
            raise DimensionError(
                f"filter group axis must have length in {VALID_GROUP_SIZES}, got {arr.shape[2]}"
            )
        if arr.shape[3] != arr.shape[4]:
            raise DimensionError(f"kernel must be square, got {arr.shape[3]}x{arr.shape[4]}")
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def out_channels(self) -> int:
        return self._values.shape[0]

    @property
    def in_channels(self) -> int:
        return self._values.shape[1]

    @property
    def in_group_size(self) -> int:
        return self._values.shape[2]

    @property
    def k(self) -> int:
        return self._values.shape[3]

    def __repr__(self) -> str:
        o, i, g, k, _ = self._values.shape
        return f"FilterBank(out={o}, in={i}, in_group={g}, k={k})"


def make_feature_map(
    channels: int, group_size: int, height: int, width: int, fill: float = 0.0
) -> FeatureMap:
    """Constant-filled feature map of the requested shape."""
    return FeatureMap(np.full((channels, group_size, height, width), fill, dtype=np.float64))


def random_feature_map(
    seed,
    channels: int,
    group_size: int,
    height: int,
    width: int,
    integer_valued: bool = False,
) -> FeatureMap:
    """Seeded random feature map, reproducible bit-exactly for a fixed seed.

    With ``integer_valued`` every entry is an integer in [-4, 4] stored
    exactly, so sums of products stay exact in float64 at desk scale.
    Otherwise entries are uniform in [-1, 1).
    """
    rng = np.random.default_rng(seed)
    shape = (channels, group_size, height, width)
    if integer_valued:
        vals = rng.integers(-4, 5, size=shape).astype(np.float64)
    else:
        vals = rng.uniform(-1.0, 1.0, size=shape)
    return FeatureMap(vals)


def random_filter_bank(
    seed,
    out_channels: int,
    in_channels: int,
    in_group_size: int,
    k: int,
    integer_valued: bool = False,
) -> FilterBank:
    """Seeded random filter bank; value ranges as in :func:`random_feature_map`."""
    rng = np.random.default_rng(seed)
    shape = (out_channels, in_channels, in_group_size, k, k)
    if integer_valued:
        vals = rng.integers(-4, 5, size=shape).astype(np.float64)
    else:
        vals = rng.uniform(-1.0, 1.0, size=shape)
    return FilterBank(vals)


def max_abs_diff(a: FeatureMap, b: FeatureMap) -> float:
    """Largest absolute entrywise difference; 0.0 iff the maps are identical."""
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a.values - b.values)))
