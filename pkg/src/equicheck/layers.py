"""Forward-only network layers and a sequential network container.

Convolutions are cross-correlations (no kernel flip).  A group convolution
produces one output slot per group element g, computed by correlating the
input with the filter bank transformed by g; for group-valued inputs the
transform both rotates/mirrors the kernels spatially and permutes the
filter's group axis.  Stride-s layers sample input index patches
[(s*x, s*y), (s*x+k-1, s*y+k-1)], so whether they commute with the group
action depends on the padded input size (see the analyzer module).

Exactness: when both operands of a contraction are integer-valued, a
parallel absolute-value accumulation verifies every partial sum stays below
2**53, which makes the float64 result exact regardless of summation order.
Integer-mode equivariance tests can therefore assert equality with zero
tolerance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ExactnessOverflowError, LayerError, ShapeError
from .group import GroupElement, GroupKind, act_spatial, elements, group_permutation
from .tensor import EXACT_INT_LIMIT, FeatureMap, FilterBank


class LayerKind(enum.Enum):
    GCONV_LIFT = "gconv_lift"
    GCONV = "gconv"
    CONV2D = "conv2d"
    MAXPOOL = "maxpool"
    RELU = "relu"
    COSET_MAXPOOL = "coset_maxpool"
    GLOBAL_AVG_POOL = "global_avg_pool"
    CIRCLE_CROP = "circle_crop"
    DENSE = "dense"


#: Layers with a spatial kernel, i.e. the ones the exactness condition applies to.
SPATIAL_KINDS = frozenset(
    {LayerKind.GCONV_LIFT, LayerKind.GCONV, LayerKind.CONV2D, LayerKind.MAXPOOL}
)

CONV_KINDS = frozenset({LayerKind.GCONV_LIFT, LayerKind.GCONV, LayerKind.CONV2D})


@dataclass
class Layer:
    """One network layer; ``k``/``s``/``p``/``out_channels`` apply only to the
    kinds that use them, ``weights`` is a FilterBank (convs) or a 2-d matrix
    (dense)."""

    kind: LayerKind
    k: int | None = None
    s: int = 1
    p: int = 0
    out_channels: int | None = None
    weights: object = None


@dataclass
class Network:
    """Sequential architecture evaluated on square single-image inputs."""

    kind: GroupKind
    layers: list[Layer] = field(default_factory=list)
    input_size: int = 1
    in_channels: int = 1
    name: str = ""


def _is_integral(arr: np.ndarray) -> bool:
    return bool(np.all(arr == np.rint(arr)))


def _correlate(vals: np.ndarray, w: np.ndarray, s: int) -> np.ndarray:
    """Strided cross-correlation of a padded (C, G, n, n) array with a
    (O, C, G, k, k) bank, contracting channels and group; returns (O, o, o).

    Accumulates kernel position by kernel position in a fixed order.
    """
    k = w.shape[-1]
    n = vals.shape[-1]
    o = (n - k) // s + 1
    hi = s * (o - 1) + 1
    out = np.zeros((w.shape[0], o, o), dtype=np.float64)
    for dy in range(k):
        for dx in range(k):
            win = vals[:, :, dy : dy + hi : s, dx : dx + hi : s]
            out += np.einsum("cgyx,ocg->oyx", win, w[:, :, :, dy, dx])
    return out


def _guard_exact_contraction(vals: np.ndarray, w: np.ndarray, s: int) -> None:
    """For integer operands, bound each output cell's sum of |terms|; if any
    bound reaches 2**53 the float64 result could silently round."""
    if not (_is_integral(vals) and _is_integral(w)):
        return
    bound = _correlate(np.abs(vals), np.abs(w), s)
    if bound.max() >= EXACT_INT_LIMIT:
        raise ExactnessOverflowError(
            f"integer accumulation bound {bound.max():.3e} exceeds 2**53; "
            "reduce magnitudes or depth for exact comparisons"
        )


def _pad(vals: np.ndarray, p: int) -> np.ndarray:
    if p == 0:
        return vals
    return np.pad(vals, ((0, 0), (0, 0), (p, p), (p, p)))


def _check_conv_args(fm: FeatureMap, filters: FilterBank, s: int, p: int) -> None:
    if s < 1 or p < 0:
        raise ShapeError(f"stride must be >= 1 and padding >= 0, got s={s}, p={p}")
    if fm.group_size != filters.in_group_size:
        raise ShapeError(
            f"filter expects group axis {filters.in_group_size}, map has {fm.group_size}"
        )
    if fm.channels != filters.in_channels:
        raise ShapeError(f"filter expects {filters.in_channels} channels, map has {fm.channels}")
    if min(fm.height, fm.width) + 2 * p < filters.k:
        raise ShapeError(
            f"kernel {filters.k} exceeds padded input {min(fm.height, fm.width) + 2 * p}"
        )


def conv2d(fm: FeatureMap, filters: FilterBank, s: int = 1, p: int = 0) -> FeatureMap:
    """Plain strided cross-correlation contracting channel and group axes;
    output side is floor((i + 2p - k)/s) + 1 and the output group axis is 1."""
    _check_conv_args(fm, filters, s, p)
    vals = _pad(fm.values, p)
    _guard_exact_contraction(vals, filters.values, s)
    out = _correlate(vals, filters.values, s)
    return FeatureMap(out[:, np.newaxis])


def transform_filters(g: GroupElement, filters: FilterBank, kind: GroupKind) -> FilterBank:
    """Filter bank as seen by output slot g: kernels spatially transformed by
    g and, for group-valued banks, the group axis permuted so that slot h
    reads the original slot g^-1 h."""
    vals = filters.values
    if g.mirrored:
        vals = vals[..., ::-1]
    if g.rotations:
        vals = np.rot90(vals, g.rotations, axes=(3, 4))
    if filters.in_group_size > 1:
        perm = group_permutation(g, kind)
        moved = np.empty_like(vals)
        moved[:, :, perm] = vals
        vals = moved
    return FilterBank(vals)


def gconv_lift(
    fm: FeatureMap, filters: FilterBank, kind: GroupKind, s: int = 1, p: int = 0
) -> FeatureMap:
    """Lifting group convolution: planar input, one output slot per group
    element, each the correlation with the g-transformed kernels."""
    if kind is GroupKind.Z2:
        raise ShapeError("lifting requires a non-trivial group; use conv2d for z2")
    if fm.group_size != 1:
        raise ShapeError(f"lifting expects a planar input, got group axis {fm.group_size}")
    slots = [
        conv2d(fm, transform_filters(g, filters, kind), s, p).values[:, 0]
        for g in elements(kind)
    ]
    return FeatureMap(np.stack(slots, axis=1))


def gconv(
    fm: FeatureMap, filters: FilterBank, kind: GroupKind, s: int = 1, p: int = 0
) -> FeatureMap:
    """Group convolution on a group-valued input; preserves the group axis."""
    if kind is GroupKind.Z2:
        raise ShapeError("group convolution requires a non-trivial group")
    if fm.group_size != kind.size:
        raise ShapeError(f"expected group axis {kind.size}, got {fm.group_size}")
    slots = [
        conv2d(fm, transform_filters(g, filters, kind), s, p).values[:, 0]
        for g in elements(kind)
    ]
    return FeatureMap(np.stack(slots, axis=1))


def maxpool(fm: FeatureMap, k: int, s: int) -> FeatureMap:
    """Spatial max pooling per channel and group slot, no padding."""
    if k < 1 or s < 1:
        raise ShapeError(f"pool needs k >= 1 and s >= 1, got k={k}, s={s}")
    if min(fm.height, fm.width) < k:
        raise ShapeError(f"pool kernel {k} exceeds input {fm.height}x{fm.width}")
    windows = sliding_window_view(fm.values, (k, k), axis=(2, 3))
    return FeatureMap(windows[:, :, ::s, ::s].max(axis=(4, 5)))


def coset_maxpool(fm: FeatureMap) -> FeatureMap:
    """Max over the group axis; the result is invariant to the group-axis
    permutation part of the full action."""
    if fm.group_size == 1:
        raise ShapeError("coset pooling needs a group axis of length > 1")
    return FeatureMap(fm.values.max(axis=1, keepdims=True))


def global_avg_pool(fm: FeatureMap) -> FeatureMap:
    """Mean over the spatial axes, kept as a 1x1 map per (channel, slot)."""
    return FeatureMap(fm.values.mean(axis=(2, 3), keepdims=True))


def relu(fm: FeatureMap) -> FeatureMap:
    return FeatureMap(np.maximum(fm.values, 0.0))


def circle_crop(fm: FeatureMap) -> FeatureMap:
    """Zero everything outside the largest inscribed disk.

    A pixel (x, y) is kept iff (x-c)^2 + (y-c)^2 <= r^2 with c = (n-1)/2 and
    r = n/2, boundary inclusive; evaluated in integers as
    (2x-(n-1))^2 + (2y-(n-1))^2 <= n^2 so the mask is exactly symmetric
    under all eight p4m actions.
    """
    if not fm.is_square:
        raise ShapeError(f"circle crop needs a square map, got {fm.height}x{fm.width}")
    n = fm.height
    d = 2 * np.arange(n) - (n - 1)
    inside = (d[:, np.newaxis] ** 2 + d[np.newaxis, :] ** 2) <= n * n
    return FeatureMap(np.where(inside, fm.values, 0.0))


def dense(fm: FeatureMap, weights: np.ndarray) -> FeatureMap:
    """Fully connected layer on the flattened map; output is (out, 1, 1, 1)."""
    w = np.asarray(weights, dtype=np.float64)
    flat = fm.values.reshape(-1)
    if w.ndim != 2 or w.shape[1] != flat.size:
        raise ShapeError(f"dense weights {w.shape} do not match flattened input {flat.size}")
    if _is_integral(flat) and _is_integral(w):
        bound = np.abs(w) @ np.abs(flat)
        if bound.size and bound.max() >= EXACT_INT_LIMIT:
            raise ExactnessOverflowError("dense accumulation bound exceeds 2**53")
    out = w @ flat
    return FeatureMap(out.reshape(-1, 1, 1, 1))


def _output_side(side: int, k: int, s: int, p: int) -> int:
    padded = side + 2 * p
    if padded < k:
        raise ShapeError(f"kernel {k} exceeds padded input {padded}")
    return (padded - k) // s + 1


def _walk_shapes(net: Network):
    """Yield (layer, in_shape, out_shape) with shapes (channels, group, side),
    validating the chain as it goes."""
    c, g, side = net.in_channels, 1, net.input_size
    gsize = net.kind.size
    for idx, layer in enumerate(net.layers):
        shape_in = (c, g, side)
        try:
            kind = layer.kind
            if kind is LayerKind.GCONV_LIFT:
                if net.kind is GroupKind.Z2:
                    raise ShapeError("lifting layer in a z2 network")
                if g != 1:
                    raise ShapeError(f"lifting expects a planar input, group axis is {g}")
                c, g, side = layer.out_channels, gsize, _output_side(side, layer.k, layer.s, layer.p)
            elif kind is LayerKind.GCONV:
                if g != gsize or g == 1:
                    raise ShapeError(f"group conv expects group axis {gsize}, got {g}")
                c, side = layer.out_channels, _output_side(side, layer.k, layer.s, layer.p)
            elif kind is LayerKind.CONV2D:
                if g != 1:
                    raise ShapeError(f"plain conv expects a planar input, group axis is {g}")
                c, side = layer.out_channels, _output_side(side, layer.k, layer.s, layer.p)
            elif kind is LayerKind.MAXPOOL:
                side = _output_side(side, layer.k, layer.s, 0)
            elif kind is LayerKind.COSET_MAXPOOL:
                if g == 1:
                    raise ShapeError("coset pooling needs a group axis of length > 1")
                g = 1
            elif kind is LayerKind.GLOBAL_AVG_POOL:
                side = 1
            elif kind is LayerKind.DENSE:
                c, g, side = layer.out_channels, 1, 1
            elif kind in (LayerKind.RELU, LayerKind.CIRCLE_CROP):
                pass
            else:  # pragma: no cover - enum is closed
                raise ShapeError(f"unknown layer kind {kind}")
        except ShapeError as exc:
            raise LayerError(f"layer {idx} ({layer.kind.value}): {exc}") from exc
        yield layer, shape_in, (c, g, side)


def infer_shapes(net: Network) -> list[tuple[int, int, int]]:
    """Per-layer output shapes (channels, group, side), input excluded."""
    return [out for _, _, out in _walk_shapes(net)]


def seed_network(net: Network, seed, integer_valued: bool = False) -> Network:
    """Copy of the network with weights drawn deterministically from seed.

    Integer mode draws every weight as an integer in [-4, 4] so forward
    passes stay exact; otherwise weights are uniform in [-1, 1).
    """
    rng = np.random.default_rng([seed, 0])

    def draw(shape):
        if integer_valued:
            return rng.integers(-4, 5, size=shape).astype(np.float64)
        return rng.uniform(-1.0, 1.0, size=shape)

    new_layers = []
    for layer, (c, g, side), _ in _walk_shapes(net):
        if layer.kind in CONV_KINDS:
            bank = FilterBank(draw((layer.out_channels, c, g, layer.k, layer.k)))
            new_layers.append(replace(layer, weights=bank))
        elif layer.kind is LayerKind.DENSE:
            mat = draw((layer.out_channels, c * g * side * side))
            new_layers.append(replace(layer, weights=mat))
        else:
            new_layers.append(replace(layer))
    return replace(net, layers=new_layers)


def _apply(layer: Layer, fm: FeatureMap, kind: GroupKind) -> FeatureMap:
    lk = layer.kind
    if lk is LayerKind.GCONV_LIFT:
        return gconv_lift(fm, layer.weights, kind, layer.s, layer.p)
    if lk is LayerKind.GCONV:
        return gconv(fm, layer.weights, kind, layer.s, layer.p)
    if lk is LayerKind.CONV2D:
        return conv2d(fm, layer.weights, layer.s, layer.p)
    if lk is LayerKind.MAXPOOL:
        return maxpool(fm, layer.k, layer.s)
    if lk is LayerKind.RELU:
        return relu(fm)
    if lk is LayerKind.COSET_MAXPOOL:
        return coset_maxpool(fm)
    if lk is LayerKind.GLOBAL_AVG_POOL:
        return global_avg_pool(fm)
    if lk is LayerKind.CIRCLE_CROP:
        return circle_crop(fm)
    if lk is LayerKind.DENSE:
        return dense(fm, layer.weights)
    raise ShapeError(f"unknown layer kind {lk}")  # pragma: no cover


def forward(net: Network, fm: FeatureMap) -> list[FeatureMap]:
    """Evaluate the network, returning one activation per layer (final last).

    An empty network returns just the input.  Layer failures are re-raised
    with the layer index attached.
    """
    if fm.height != net.input_size or fm.width != net.input_size:
        raise ShapeError(
            f"input is {fm.height}x{fm.width}, network declares {net.input_size}"
        )
    acts: list[FeatureMap] = []
    current = fm
    for idx, layer in enumerate(net.layers):
        if layer.kind in CONV_KINDS or layer.kind is LayerKind.DENSE:
            if layer.weights is None:
                raise LayerError(f"layer {idx} ({layer.kind.value}): weights not set")
        try:
            current = _apply(layer, current, net.kind)
        except (ShapeError, ExactnessOverflowError) as exc:
            raise LayerError(f"layer {idx} ({layer.kind.value}): {exc}") from exc
        acts.append(current)
    return acts if acts else [fm]
