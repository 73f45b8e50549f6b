"""Forward-only inference in two domains: pixels, or DCT coefficients.

A :class:`NetworkSpec` describes a small residual classifier (convolutions,
batch norm, ReLU, residual blocks, global average pooling, fully-connected
head). :func:`forward` evaluates it on pixel planes; :func:`convert_weights`
turns every stage into its coefficient-space counterpart -- convolutions
become exploded maps, batch norm and pooling read block statistics, ReLU uses
approximated spatial masking -- after which :func:`forward` evaluates the
same weights on coefficient tensors. With the full-basis mask the two paths
agree to floating-point accumulation error for any weights.

Inside the converted network coefficients always live in orthonormal DCT
space: a quantization-scaled input is rescaled once on entry (exactly), so
batch-norm statistics and pooling need no per-quantizer correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec.tables import QuantizationMatrix
from .jdr import (
    BnParams,
    CompressedConv,
    apply_conv_pixel,
    asm_relu,
    bn_transform,
    explode_conv_fast,
    gap_transform,
)
from .linmaps import apply_jpeg, compose_jpeg
from .tensor import LabeledTensor, elementwise

__all__ = [
    "Conv",
    "BatchNorm",
    "Relu",
    "ResidualBlock",
    "Gap",
    "FullyConnected",
    "NetworkSpec",
    "DomainMode",
    "JpegNetwork",
    "forward",
    "convert_weights",
    "deviation",
    "random_toy_network",
]


@dataclass(frozen=True)
class Conv:
    """2D convolution, 'same' zero padding. ``weights`` is
    (out_channels, in_channels, kh, kw); ``stride`` subsamples the output
    (pixel domain only)."""

    weights: np.ndarray
    stride: int = 1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 4:
            raise ValueError(f"conv weights must be 4D, got {w.shape}")
        object.__setattr__(self, "weights", w)

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class BatchNorm:
    params: BnParams
    mode: str = "train-stats"


@dataclass(frozen=True)
class Relu:
    pass


@dataclass(frozen=True)
class ResidualBlock:
    """conv-bn-relu-conv-bn plus the identity skip, then a trailing ReLU."""

    conv1: Conv
    bn1: BatchNorm
    conv2: Conv
    bn2: BatchNorm

    def __post_init__(self):
        if self.conv1.out_channels != self.conv2.in_channels:
            raise ValueError("residual block convolutions do not chain")
        if self.conv1.in_channels != self.conv2.out_channels:
            raise ValueError("residual skip requires matching channel counts")
        if self.conv1.stride != 1 or self.conv2.stride != 1:
            raise ValueError("residual blocks are stride-free")


@dataclass(frozen=True)
class Gap:
    pass


@dataclass(frozen=True)
class FullyConnected:
    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ValueError(f"bad fully-connected shapes {w.shape} / {b.shape}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)


def _layer_channels(layer, channels: int) -> int:
    if isinstance(layer, Conv):
        if layer.in_channels != channels:
            raise ValueError(
                f"conv expects {layer.in_channels} channels, pipeline has {channels}"
            )
        return layer.out_channels
    if isinstance(layer, ResidualBlock):
        if layer.conv1.in_channels != channels:
            raise ValueError(
                f"residual block expects {layer.conv1.in_channels} channels, "
                f"pipeline has {channels}"
            )
        return channels
    if isinstance(layer, BatchNorm):
        if layer.params.gamma.shape[0] != channels:
            raise ValueError("batch-norm channel count mismatch")
        return channels
    return channels


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered layers plus the input geometry. Exactly one Gap splits the
    spatial stage from the fully-connected head."""

    layers: tuple
    input_channels: int
    input_dims: tuple[int, int]

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        gaps = [i for i, l in enumerate(layers) if isinstance(l, Gap)]
        if len(gaps) != 1:
            raise ValueError(f"spec needs exactly one Gap layer, found {len(gaps)}")
        gap_at = gaps[0]
        channels = self.input_channels
        for layer in layers[:gap_at]:
            if isinstance(layer, FullyConnected):
                raise ValueError("fully-connected layers must come after Gap")
            channels = _layer_channels(layer, channels)
        width = channels
        for layer in layers[gap_at + 1 :]:
            if not isinstance(layer, FullyConnected):
                raise ValueError("only fully-connected layers may follow Gap")
            if layer.weights.shape[1] != width:
                raise ValueError(
                    f"fully-connected expects {layer.weights.shape[1]} inputs, "
                    f"pipeline has {width}"
                )
            width = layer.weights.shape[0]


@dataclass(frozen=True)
class DomainMode:
    """Where :func:`forward` evaluates: ``pixel``, or ``jpeg`` with the input
    quantization and the ReLU frequency threshold."""

    mode: str
    quantization: QuantizationMatrix | None = None
    relu_m: int = 14

    def __post_init__(self):
        if self.mode not in ("pixel", "jpeg"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "jpeg":
            if self.quantization is None:
                object.__setattr__(self, "quantization", QuantizationMatrix.ones())
            if not 0 <= self.relu_m <= 14:
                raise ValueError(f"relu_m must be in [0, 14], got {self.relu_m}")


@dataclass(frozen=True)
class JpegNetwork:
    """A converted spec: exploded convolutions plus transform-domain stages."""

    spec: NetworkSpec
    layers: tuple
    quantization: QuantizationMatrix
    relu_m: int


def _pixel_bn(planes: np.ndarray, layer: BatchNorm) -> np.ndarray:
    p = layer.params
    if layer.mode == "train-stats":
        mean = planes.mean(axis=(1, 2))
        var = planes.var(axis=(1, 2))
    else:
        mean, var = p.running_mean, p.running_var
    scale = p.gamma / np.sqrt(var + p.epsilon)
    return (planes - mean[:, None, None]) * scale[:, None, None] + p.beta[:, None, None]


def _forward_pixel(spec: NetworkSpec, planes: np.ndarray) -> np.ndarray:
    x = planes
    vector = None
    for layer in spec.layers:
        if isinstance(layer, Conv):
            x = apply_conv_pixel(layer.weights, x)
            if layer.stride > 1:
                x = x[:, :: layer.stride, :: layer.stride]
        elif isinstance(layer, BatchNorm):
            x = _pixel_bn(x, layer)
        elif isinstance(layer, Relu):
            x = np.maximum(x, 0.0)
        elif isinstance(layer, ResidualBlock):
            y = apply_conv_pixel(layer.conv1.weights, x)
            y = _pixel_bn(y, layer.bn1)
            y = np.maximum(y, 0.0)
            y = apply_conv_pixel(layer.conv2.weights, y)
            y = _pixel_bn(y, layer.bn2)
            x = np.maximum(x + y, 0.0)
        elif isinstance(layer, Gap):
            vector = x.mean(axis=(1, 2))
        elif isinstance(layer, FullyConnected):
            vector = layer.weights @ vector + layer.bias
    return vector


def convert_weights(
    spec: NetworkSpec, quantization: QuantizationMatrix | None = None, relu_m: int = 14
) -> JpegNetwork:
    """Explode every convolution and swap the remaining stages for their
    coefficient-space versions; fully-connected layers pass through unchanged."""
    quantization = quantization or QuantizationMatrix.ones()
    h, w = spec.input_dims
    maps = compose_jpeg(h, w, QuantizationMatrix.ones())

    def explode(conv: Conv) -> CompressedConv:
        if conv.stride != 1:
            raise ValueError("strided convolutions have no coefficient-space form here")
        return explode_conv_fast(conv.weights, maps["J"], maps["J_tilde"])

    converted = []
    for layer in spec.layers:
        if isinstance(layer, Conv):
            converted.append(explode(layer))
        elif isinstance(layer, ResidualBlock):
            converted.append(
                (explode(layer.conv1), layer.bn1, explode(layer.conv2), layer.bn2)
            )
        else:
            converted.append(layer)
    return JpegNetwork(spec, tuple(converted), quantization, relu_m)


def _forward_jpeg(net: JpegNetwork, coef: LabeledTensor) -> np.ndarray:
    # Undo the input scaling once; everything downstream is plain DCT space.
    qv = net.quantization.zigzag.astype(np.float64)
    x = LabeledTensor.from_array(coef.data * qv, ["p", "x", "y", "k"])
    m = net.relu_m
    vector = None
    for layer in net.layers:
        if isinstance(layer, CompressedConv):
            x = layer.apply(x)
        elif isinstance(layer, BatchNorm):
            x = bn_transform(x, layer.params, layer.mode)
        elif isinstance(layer, Relu):
            x = asm_relu(x, m)
        elif isinstance(layer, tuple):  # converted residual block
            conv1, bn1, conv2, bn2 = layer
            y = conv1.apply(x)
            y = bn_transform(y, bn1.params, bn1.mode)
            y = asm_relu(y, m)
            y = conv2.apply(y)
            y = bn_transform(y, bn2.params, bn2.mode)
            x = asm_relu(elementwise(x, y, "add"), m)
        elif isinstance(layer, Gap):
            vector = gap_transform(x)
        elif isinstance(layer, FullyConnected):
            vector = layer.weights @ vector + layer.bias
    return vector


def _as_planes(image, channels: int) -> np.ndarray:
    planes = np.asarray(image, dtype=np.float64)
    if planes.ndim == 2:
        planes = planes[None]
    if planes.ndim != 3 or planes.shape[0] != channels:
        raise ValueError(f"expected ({channels}, h, w) input, got {planes.shape}")
    return planes


def image_to_coefficients(image, spec: NetworkSpec, q: QuantizationMatrix) -> LabeledTensor:
    """Per-channel scaled block coefficients of a pixel input (no rounding)."""
    planes = _as_planes(image, spec.input_channels)
    coef = np.stack([apply_jpeg(p, q) for p in planes])
    return LabeledTensor.from_array(coef, ["p", "x", "y", "k"])


def forward(spec_or_net, image, mode: DomainMode) -> np.ndarray:
    """Deterministic logits. Pixel mode takes (channels, h, w) planes; jpeg
    mode takes either planes (transformed internally) or a coefficient tensor
    with axes (p, x, y, k) already scaled by the mode's quantization."""
    if mode.mode == "pixel":
        if not isinstance(spec_or_net, NetworkSpec):
            raise TypeError("pixel mode evaluates a NetworkSpec")
        planes = _as_planes(image, spec_or_net.input_channels)
        if planes.shape[1:] != spec_or_net.input_dims:
            raise ValueError(
                f"input dims {planes.shape[1:]} do not match spec {spec_or_net.input_dims}"
            )
        return _forward_pixel(spec_or_net, planes)

    if isinstance(spec_or_net, NetworkSpec):
        net = convert_weights(spec_or_net, mode.quantization, mode.relu_m)
    else:
        net = spec_or_net
    if isinstance(image, LabeledTensor):
        coef = image
    else:
        coef = image_to_coefficients(image, net.spec, net.quantization)
    return _forward_jpeg(net, coef)


def deviation(
    spec: NetworkSpec,
    inputs,
    quantization: QuantizationMatrix | None = None,
    relu_m: int = 14,
) -> dict:
    """Max/mean absolute logit gap between the two domains over a batch."""
    inputs = list(inputs)
    if not inputs:
        raise ValueError("need at least one input")
    net = convert_weights(spec, quantization, relu_m)
    pixel_mode = DomainMode("pixel")
    jpeg_mode = DomainMode("jpeg", net.quantization, relu_m)
    gaps = []
    for image in inputs:
        ref = forward(spec, image, pixel_mode)
        got = forward(net, image, jpeg_mode)
        gaps.append(np.abs(ref - got))
    gaps = np.stack(gaps)
    return {"max_abs": float(gaps.max()), "mean_abs": float(gaps.mean())}


def random_toy_network(
    seed: int = 0,
    channels: int = 2,
    classes: int = 10,
    input_dims: tuple[int, int] = (32, 32),
    input_channels: int = 1,
) -> NetworkSpec:
    """Three stride-free residual blocks, global pooling, one FC head, with
    uniform [-0.5, 0.5] weights. The stand-in for trained models in the
    domain-equivalence experiments."""
    rng = np.random.default_rng(seed)

    def conv(p_out, p_in):
        return Conv(rng.uniform(-0.5, 0.5, size=(p_out, p_in, 3, 3)))

    def bn(ch):
        return BatchNorm(
            BnParams(
                gamma=rng.uniform(0.5, 1.5, size=ch),
                beta=rng.uniform(-0.5, 0.5, size=ch),
                running_mean=np.zeros(ch),
                running_var=np.ones(ch),
            )
        )

    def block(ch):
        return ResidualBlock(conv(ch, ch), bn(ch), conv(ch, ch), bn(ch))

    layers = [
        conv(channels, input_channels),
        bn(channels),
        Relu(),
        block(channels),
        block(channels),
        block(channels),
        Gap(),
        FullyConnected(
            rng.uniform(-0.5, 0.5, size=(classes, channels)),
            rng.uniform(-0.5, 0.5, size=classes),
        ),
    ]
    return NetworkSpec(tuple(layers), input_channels, input_dims)
