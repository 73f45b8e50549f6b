"""Debug-friendly binary sidecar formats.

All integers are little-endian; all floats are IEEE float64 little-endian.

Tensor sidecar (``.jpst``)::

    magic  b"JPSTEN1\\n"
    u32    axis count
    per axis: u16 label length, utf-8 label bytes, u32 extent
    f64[]  row-major data

Coefficient sidecar (``.jpsc``)::

    magic  b"JPSCOF1\\n"
    u8     mode (0 gray, 1 4:4:4, 2 4:2:0)
    u32    active height, u32 active width
    u8     quantization table count, each 64 bytes in zig-zag order
    u8     plane count
    per plane: u8 table index, u32 blocks_x, u32 blocks_y,
               i32[blocks_x * blocks_y * 64] zig-zag coefficients

Network sidecar (``.jpsn``)::

    magic  b"JPSNET1\\n"
    u32    input channels, u32 input height, u32 input width
    u32    layer count, then per layer a u8 kind tag:
           1 conv:   u32 out,in,kh,kw, u32 stride, f64 weights
           2 bnorm:  u32 channels, f64 gamma/beta/mean/var blocks, f64 eps,
                     u8 mode (0 train-stats, 1 inference)
           3 relu
           4 resblock: conv, bnorm, conv, bnorm (as above, untagged)
           5 gap
           6 fc:     u32 out,in, f64 weights, f64 bias
"""

from __future__ import annotations

import struct

import numpy as np

from .codec.blocks import CoefficientGrid
from .codec.tables import QuantizationMatrix
from .jdr import BnParams
from .network import (
    BatchNorm,
    Conv,
    FullyConnected,
    Gap,
    NetworkSpec,
    Relu,
    ResidualBlock,
)
from .tensor import LabeledTensor

__all__ = [
    "write_tensor",
    "read_tensor",
    "write_coefficients",
    "read_coefficients",
    "write_network",
    "read_network",
]

TENSOR_MAGIC = b"JPSTEN1\n"
COEF_MAGIC = b"JPSCOF1\n"
NET_MAGIC = b"JPSNET1\n"

_MODE_CODES = {"gray": 0, "444": 1, "420": 2}
_MODE_NAMES = {v: k for k, v in _MODE_CODES.items()}


def write_tensor(path, tensor: LabeledTensor) -> None:
    out = bytearray(TENSOR_MAGIC)
    out += struct.pack("<I", len(tensor.axes))
    for label, extent in tensor.axes:
        encoded = label.encode("utf-8")
        out += struct.pack("<H", len(encoded)) + encoded + struct.pack("<I", extent)
    out += tensor.data.astype("<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(out)


def read_tensor(path) -> LabeledTensor:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != TENSOR_MAGIC:
        raise ValueError("not a tensor sidecar file")
    pos = 8
    (n_axes,) = struct.unpack_from("<I", data, pos)
    pos += 4
    axes = []
    for _ in range(n_axes):
        (label_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        label = data[pos : pos + label_len].decode("utf-8")
        pos += label_len
        (extent,) = struct.unpack_from("<I", data, pos)
        pos += 4
        axes.append((label, extent))
    count = int(np.prod([e for _, e in axes])) if axes else 1
    values = np.frombuffer(data, dtype="<f8", count=count, offset=pos)
    return LabeledTensor(tuple(axes), values.copy())


def write_coefficients(path, grids, quantization, dims, mode: str, table_index=None) -> None:
    """``table_index[i]`` maps plane i to its quantization table (defaults to
    table 0 for the first plane and 1 for the rest)."""
    if table_index is None:
        table_index = [0] + [min(1, len(quantization) - 1)] * (len(grids) - 1)
    out = bytearray(COEF_MAGIC)
    out += struct.pack("<BII", _MODE_CODES[mode], dims[0], dims[1])
    out += struct.pack("<B", len(quantization))
    for q in quantization:
        out += bytes(int(v) for v in q.zigzag)
    out += struct.pack("<B", len(grids))
    for grid, ti in zip(grids, table_index):
        bx, by = grid.block_shape
        out += struct.pack("<BII", ti, bx, by)
        out += grid.blocks.data.astype("<i4").tobytes()
    with open(path, "wb") as fh:
        fh.write(out)


def read_coefficients(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != COEF_MAGIC:
        raise ValueError("not a coefficient sidecar file")
    pos = 8
    mode_code, height, width = struct.unpack_from("<BII", data, pos)
    pos += 9
    (n_tables,) = struct.unpack_from("<B", data, pos)
    pos += 1
    tables = []
    for _ in range(n_tables):
        tables.append(QuantizationMatrix.from_zigzag(list(data[pos : pos + 64])))
        pos += 64
    (n_planes,) = struct.unpack_from("<B", data, pos)
    pos += 1
    names = ["y", "cb", "cr"]
    grids = []
    table_index = []
    for i in range(n_planes):
        ti, bx, by = struct.unpack_from("<BII", data, pos)
        pos += 9
        count = bx * by * 64
        values = np.frombuffer(data, dtype="<i4", count=count, offset=pos)
        pos += 4 * count
        tensor = LabeledTensor.from_array(
            values.astype(np.float64).reshape(bx, by, 64), ["x", "y", "k"]
        )
        grids.append(CoefficientGrid(names[i], tensor, quantized=True))
        table_index.append(ti)
    return {
        "grids": tuple(grids),
        "quantization": tuple(tables),
        "table_index": tuple(table_index),
        "dims": (height, width),
        "mode": _MODE_NAMES[mode_code],
    }


def _pack_array(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype="<f8").tobytes()


def _pack_conv(conv: Conv) -> bytes:
    return (
        struct.pack("<IIIII", *conv.weights.shape, conv.stride)
        + _pack_array(conv.weights)
    )


def _unpack_conv(data, pos):
    p_out, p_in, kh, kw, stride = struct.unpack_from("<IIIII", data, pos)
    pos += 20
    count = p_out * p_in * kh * kw
    weights = np.frombuffer(data, dtype="<f8", count=count, offset=pos)
    pos += 8 * count
    return Conv(weights.reshape(p_out, p_in, kh, kw).copy(), stride), pos


def _pack_bn(bn: BatchNorm) -> bytes:
    p = bn.params
    ch = p.gamma.shape[0]
    return (
        struct.pack("<I", ch)
        + _pack_array(p.gamma)
        + _pack_array(p.beta)
        + _pack_array(p.running_mean)
        + _pack_array(p.running_var)
        + struct.pack("<d", p.epsilon)
        + struct.pack("<B", 0 if bn.mode == "train-stats" else 1)
    )


def _unpack_bn(data, pos):
    (ch,) = struct.unpack_from("<I", data, pos)
    pos += 4
    arrays = []
    for _ in range(4):
        arrays.append(np.frombuffer(data, dtype="<f8", count=ch, offset=pos).copy())
        pos += 8 * ch
    (epsilon,) = struct.unpack_from("<d", data, pos)
    pos += 8
    (mode_code,) = struct.unpack_from("<B", data, pos)
    pos += 1
    params = BnParams(*arrays, epsilon=epsilon)
    return BatchNorm(params, "train-stats" if mode_code == 0 else "inference"), pos


def write_network(path, spec: NetworkSpec) -> None:
    out = bytearray(NET_MAGIC)
    out += struct.pack("<III", spec.input_channels, *spec.input_dims)
    out += struct.pack("<I", len(spec.layers))
    for layer in spec.layers:
        if isinstance(layer, Conv):
            out += b"\x01" + _pack_conv(layer)
        elif isinstance(layer, BatchNorm):
            out += b"\x02" + _pack_bn(layer)
        elif isinstance(layer, Relu):
            out += b"\x03"
        elif isinstance(layer, ResidualBlock):
            out += b"\x04"
            out += _pack_conv(layer.conv1) + _pack_bn(layer.bn1)
            out += _pack_conv(layer.conv2) + _pack_bn(layer.bn2)
        elif isinstance(layer, Gap):
            out += b"\x05"
        elif isinstance(layer, FullyConnected):
            out += b"\x06" + struct.pack("<II", *layer.weights.shape)
            out += _pack_array(layer.weights) + _pack_array(layer.bias)
        else:
            raise ValueError(f"cannot serialize layer {layer!r}")
    with open(path, "wb") as fh:
        fh.write(out)


def read_network(path) -> NetworkSpec:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != NET_MAGIC:
        raise ValueError("not a network sidecar file")
    pos = 8
    channels, h, w = struct.unpack_from("<III", data, pos)
    pos += 12
    (n_layers,) = struct.unpack_from("<I", data, pos)
    pos += 4
    layers = []
    for _ in range(n_layers):
        kind = data[pos]
        pos += 1
        if kind == 1:
            layer, pos = _unpack_conv(data, pos)
        elif kind == 2:
            layer, pos = _unpack_bn(data, pos)
        elif kind == 3:
            layer = Relu()
        elif kind == 4:
            conv1, pos = _unpack_conv(data, pos)
            bn1, pos = _unpack_bn(data, pos)
            conv2, pos = _unpack_conv(data, pos)
            bn2, pos = _unpack_bn(data, pos)
            layer = ResidualBlock(conv1, bn1, conv2, bn2)
        elif kind == 5:
            layer = Gap()
        elif kind == 6:
            n_out, n_in = struct.unpack_from("<II", data, pos)
            pos += 8
            weights = np.frombuffer(data, dtype="<f8", count=n_out * n_in, offset=pos)
            pos += 8 * n_out * n_in
            bias = np.frombuffer(data, dtype="<f8", count=n_out, offset=pos)
            pos += 8 * n_out
            layer = FullyConnected(weights.reshape(n_out, n_in).copy(), bias.copy())
        else:
            raise ValueError(f"unknown layer tag {kind}")
        layers.append(layer)
    return NetworkSpec(tuple(layers), channels, (h, w))
