"""The codec as composable linear maps.

Compression factors into four maps which contract into one: blockify ``B``
(image pixels ``h, w`` -> block grid ``x, y`` with offsets ``m, n``), the
blockwise DCT ``D`` (offsets -> frequencies ``a, b``), zig-zag flattening
``Z`` (frequencies -> ``g``), and quantizer scaling ``S`` (``g`` -> ``k``,
dividing by the quantization entries). Their composition ``J`` sends an image
straight to scaled coefficients; ``J_tilde`` (built from the transposes and
the inverse scaling) sends coefficients back. Rounding is the only codec step
these maps exclude.

Dense materialization is intended for test-sized images (<= 64x64); use
:func:`apply_jpeg` / :func:`apply_jpeg_inverse` to run the same maps
blockwise without building them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec.tables import (
    RC_TO_ZIGZAG,
    QuantizationMatrix,
    zigzag_flatten,
    zigzag_unflatten,
)
from .harmonic import dct_basis, dct_matrix
from .tensor import LabeledTensor, contract

__all__ = [
    "LinearJpegMap",
    "build_blockify",
    "build_dct_map",
    "build_zigzag_map",
    "build_scale_maps",
    "compose_jpeg",
    "apply_jpeg",
    "apply_jpeg_inverse",
    "build_pixel_map",
]


@dataclass(frozen=True)
class LinearJpegMap:
    """A materialized codec map with its axis metadata.

    ``kind`` is one of ``blockify``, ``dct``, ``zigzag``, ``scale``,
    ``scale_inv``, ``compress``, ``decompress``. ``image_dims`` records the
    (h, w) the map was built for where that applies; ``quantization`` is kept
    for the scale-bearing maps.
    """

    tensor: LabeledTensor
    kind: str
    image_dims: tuple[int, int] | None = None
    quantization: QuantizationMatrix | None = None


def _check_dims(h: int, w: int):
    if h % 8 or w % 8 or h < 8 or w < 8:
        raise ValueError(f"image dims must be positive multiples of 8, got {(h, w)}")


def build_blockify(h: int, w: int) -> LinearJpegMap:
    """0/1 tensor routing pixel (h, w) to block (x, y) at offset (m, n)."""
    _check_dims(h, w)
    bx, by = h // 8, w // 8
    tensor = np.zeros((h, w, bx, by, 8, 8))
    hh = np.arange(h)
    ww = np.arange(w)
    tensor[hh[:, None], ww[None, :], hh[:, None] // 8, ww[None, :] // 8,
           hh[:, None] % 8, ww[None, :] % 8] = 1.0
    return LinearJpegMap(
        LabeledTensor.from_array(tensor, ["h", "w", "x", "y", "m", "n"]),
        kind="blockify",
        image_dims=(h, w),
    )


def build_dct_map() -> LinearJpegMap:
    """Blockwise 8x8 DCT as a map from offsets (m, n) to frequencies (a, b)."""
    return LinearJpegMap(dct_basis(8).forward, kind="dct")


def build_zigzag_map() -> LinearJpegMap:
    """Permutation flattening frequencies (a, b) to the zig-zag index g."""
    tensor = np.zeros((8, 8, 64))
    for (row, col), k in RC_TO_ZIGZAG.items():
        tensor[row, col, k] = 1.0
    return LinearJpegMap(
        LabeledTensor.from_array(tensor, ["a", "b", "g"]), kind="zigzag"
    )


def build_scale_maps(q: QuantizationMatrix) -> tuple[LinearJpegMap, LinearJpegMap]:
    """Diagonal maps dividing (S) and multiplying (S_tilde) by the zig-zag
    ordered quantization entries."""
    qv = q.zigzag.astype(np.float64)
    s = LabeledTensor.from_array(np.diag(1.0 / qv), ["g", "k"])
    s_inv = LabeledTensor.from_array(np.diag(qv), ["k", "g"])
    return (
        LinearJpegMap(s, kind="scale", quantization=q),
        LinearJpegMap(s_inv, kind="scale_inv", quantization=q),
    )


def compose_jpeg(h: int, w: int, q: QuantizationMatrix) -> dict[str, LinearJpegMap]:
    """Contract the four factors into the compression map ``J`` (axes
    ``h, w -> x, y, k``) and decompression map ``J_tilde`` (``x, y, k -> h, w``)."""
    _check_dims(h, w)
    blockify = build_blockify(h, w).tensor
    basis = dct_basis(8)
    zigzag = build_zigzag_map().tensor
    scale, scale_inv = build_scale_maps(q)

    fwd = contract(blockify, basis.forward, ["h", "w", "x", "y", "a", "b"])
    fwd = contract(fwd, zigzag, ["h", "w", "x", "y", "g"])
    fwd = contract(fwd, scale.tensor, ["h", "w", "x", "y", "k"])

    inv = contract(scale_inv.tensor, zigzag, ["k", "a", "b"])
    inv = contract(inv, basis.inverse, ["k", "m", "n"])
    inv = contract(inv, blockify, ["x", "y", "k", "h", "w"])

    return {
        "J": LinearJpegMap(fwd, kind="compress", image_dims=(h, w), quantization=q),
        "J_tilde": LinearJpegMap(
            inv, kind="decompress", image_dims=(h, w), quantization=q
        ),
    }


def apply_jpeg(plane: np.ndarray, q: QuantizationMatrix) -> np.ndarray:
    """Blockwise application of ``J`` to an (h, w) array without materializing
    it; returns scaled coefficients shaped (x, y, k)."""
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    _check_dims(h, w)
    blocks = plane.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3)
    d = dct_matrix(8)
    coef = np.einsum("am,bn,xymn->xyab", d, d, blocks, optimize=True)
    return zigzag_flatten(coef) / q.zigzag.astype(np.float64)


def apply_jpeg_inverse(coef: np.ndarray, q: QuantizationMatrix) -> np.ndarray:
    """Blockwise application of ``J_tilde`` to (x, y, k) coefficients."""
    coef = np.asarray(coef, dtype=np.float64)
    scaled = zigzag_unflatten(coef * q.zigzag.astype(np.float64))
    d = dct_matrix(8)
    blocks = np.einsum("am,bn,xyab->xymn", d, d, scaled, optimize=True)
    bx, by = blocks.shape[:2]
    return blocks.transpose(0, 2, 1, 3).reshape(bx * 8, by * 8)


def build_pixel_map(kind: str, h: int, w: int, kernel=None) -> LabeledTensor:
    """Pixel-domain manipulations as dense linear maps (test oracles).

    ``gaussian3x3``: cross-shaped smoothing, 0.5 center and 0.125 per
    neighbor, with edge-clamped taps so constants are preserved everywhere.
    ``grayscale``: 0.299/0.587/0.114 channel mix (input axes ``p, h, w``).
    ``downsample2``/``upsample2``: nearest-neighbor resampling by 2.
    ``conv``: arbitrary odd-sized ``kernel`` with zero padding, laid out so
    applying the map equals a true 'same' convolution.
    """
    if kind == "gaussian3x3":
        tensor = np.zeros((h, w, h, w))
        for u in range(h):
            for v in range(w):
                tensor[u, v, u, v] += 0.5
                for du, dv in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    i = min(max(u + du, 0), h - 1)
                    j = min(max(v + dv, 0), w - 1)
                    tensor[i, j, u, v] += 0.125
        return LabeledTensor.from_array(tensor, ["h", "w", "u", "v"])

    if kind == "grayscale":
        weights = (0.299, 0.587, 0.114)
        tensor = np.zeros((3, h, w, h, w))
        for p, weight in enumerate(weights):
            idx = np.arange(h)[:, None], np.arange(w)[None, :]
            tensor[p, idx[0], idx[1], idx[0], idx[1]] = weight
        return LabeledTensor.from_array(tensor, ["p", "h", "w", "u", "v"])

    if kind == "downsample2":
        if h % 2 or w % 2:
            raise ValueError("downsample2 needs even dims")
        tensor = np.zeros((h, w, h // 2, w // 2))
        uu = np.arange(h // 2)
        vv = np.arange(w // 2)
        tensor[2 * uu[:, None], 2 * vv[None, :], uu[:, None], vv[None, :]] = 1.0
        return LabeledTensor.from_array(tensor, ["h", "w", "u", "v"])

    if kind == "upsample2":
        tensor = np.zeros((h, w, 2 * h, 2 * w))
        uu = np.arange(2 * h)
        vv = np.arange(2 * w)
        tensor[uu[:, None] // 2, vv[None, :] // 2, uu[:, None], vv[None, :]] = 1.0
        return LabeledTensor.from_array(tensor, ["h", "w", "u", "v"])

    if kind == "conv":
        kernel = np.asarray(kernel, dtype=np.float64)
        if kernel.ndim != 2 or kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
            raise ValueError(f"kernel must be 2D with odd extents, got {kernel.shape}")
        if kernel.shape[0] > h or kernel.shape[1] > w:
            raise ValueError("kernel larger than the image")
        s0, s1 = kernel.shape[0] // 2, kernel.shape[1] // 2
        tensor = np.zeros((h, w, h, w))
        for u in range(h):
            for v in range(w):
                for i in range(max(0, u - s0), min(h, u + s0 + 1)):
                    for j in range(max(0, v - s1), min(w, v + s1 + 1)):
                        tensor[i, j, u, v] = kernel[u - i + s0, v - j + s1]
        return LabeledTensor.from_array(tensor, ["h", "w", "u", "v"])

    raise ValueError(f"unknown pixel map kind {kind!r}")
