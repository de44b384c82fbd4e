"""Built-in example architectures, embedded so analyses need no files.

``toy41`` is the minimal rotation-invariant classifier head (one strided
lifting convolution, spatial mean, group max, two logits): exact at 33,
inexact at 32.  ``p4cnn``/``z2cnn`` are the classic 7-conv MNIST stacks
with a stride-2 pool after the second conv; the p4 variant carries 10
channels per layer, the planar one 20.  ``fig1-maxpool`` is a bare 5x5
stride-2 max pool, the smallest architecture whose pooling breaks the
quarter-turn action.
"""

from __future__ import annotations

from .config import ArchitectureConfig, LayerConfig


def _conv(kind: str, k: int, out_channels: int, s: int = 1, p: int = 0) -> LayerConfig:
    return LayerConfig(kind=kind, k=k, s=s, p=p, out_channels=out_channels)


_RELU = LayerConfig(kind="relu")

TOY41 = ArchitectureConfig(
    name="toy41",
    group="p4",
    input_size=33,
    layers=(
        _conv("gconv_lift", k=3, out_channels=1, s=2, p=1),
        LayerConfig(kind="global_avg_pool"),
        LayerConfig(kind="coset_maxpool"),
        LayerConfig(kind="dense", out_channels=2),
    ),
)


def _cnn_stack(conv_kind: str, lift_kind: str, channels: int, classes: int,
               name: str, group: str, with_coset: bool) -> ArchitectureConfig:
    layers: list[LayerConfig] = [
        _conv(lift_kind, k=3, out_channels=channels), _RELU,
        _conv(conv_kind, k=3, out_channels=channels), _RELU,
        LayerConfig(kind="maxpool", k=2, s=2),
        _conv(conv_kind, k=3, out_channels=channels), _RELU,
        _conv(conv_kind, k=3, out_channels=channels), _RELU,
        _conv(conv_kind, k=3, out_channels=channels), _RELU,
        _conv(conv_kind, k=3, out_channels=channels), _RELU,
        _conv(conv_kind, k=4, out_channels=channels), _RELU,
        LayerConfig(kind="global_avg_pool"),
    ]
    if with_coset:
        layers.append(LayerConfig(kind="coset_maxpool"))
    layers.append(LayerConfig(kind="dense", out_channels=classes))
    return ArchitectureConfig(name=name, group=group, input_size=28, layers=tuple(layers))


P4CNN = _cnn_stack("gconv", "gconv_lift", channels=10, classes=10,
                   name="p4cnn", group="p4", with_coset=True)

Z2CNN = _cnn_stack("conv2d", "conv2d", channels=20, classes=10,
                   name="z2cnn", group="z2", with_coset=False)

FIG1_MAXPOOL = ArchitectureConfig(
    name="fig1-maxpool",
    group="z2",
    input_size=5,
    layers=(LayerConfig(kind="maxpool", k=2, s=2),),
)

BUILTINS: dict[str, ArchitectureConfig] = {
    cfg.name: cfg for cfg in (TOY41, P4CNN, Z2CNN, FIG1_MAXPOOL)
}
