"""Blockwise DCT stage of the codec: plane <-> zig-zag coefficient grids,
quantization, and run-length coding of coefficient vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..harmonic import dct_matrix
from ..tensor import LabeledTensor
from .tables import QuantizationMatrix, zigzag_flatten, zigzag_unflatten

__all__ = [
    "CoefficientGrid",
    "forward_blocks",
    "inverse_blocks",
    "quantize",
    "dequantize",
    "round_half_away",
    "EOB",
    "rle_encode",
    "rle_decode",
]


@dataclass(frozen=True)
class CoefficientGrid:
    """DCT coefficients for one plane, indexed (block row x, block col y,
    zig-zag index k). ``quantized`` grids hold integer values."""

    plane: str
    blocks: LabeledTensor
    quantized: bool

    def __post_init__(self):
        if self.blocks.labels != ("x", "y", "k"):
            raise ValueError(f"expected axes (x, y, k), got {self.blocks.labels}")
        if self.blocks.extent("k") != 64:
            raise ValueError("k axis must have extent 64")
        if self.quantized and not np.allclose(
            self.blocks.data, np.round(self.blocks.data)
        ):
            raise ValueError("quantized grid holds non-integer values")

    @property
    def block_shape(self) -> tuple[int, int]:
        return self.blocks.extent("x"), self.blocks.extent("y")


def _plane_to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return plane.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3)


def _blocks_to_plane(blocks: np.ndarray) -> np.ndarray:
    bx, by = blocks.shape[:2]
    return blocks.transpose(0, 2, 1, 3).reshape(bx * 8, by * 8)


def forward_blocks(plane: LabeledTensor, plane_id: str = "y") -> CoefficientGrid:
    """Center by -128, apply the 8x8 DCT per block, flatten in zig-zag order."""
    h, w = plane.shape
    if h % 8 or w % 8:
        raise ValueError(f"plane extents must be multiples of 8, got {plane.shape}")
    centered = _plane_to_blocks(plane.data - 128.0)
    d = dct_matrix(8)
    coef = np.einsum("am,bn,xymn->xyab", d, d, centered, optimize=True)
    grid = LabeledTensor.from_array(zigzag_flatten(coef), ["x", "y", "k"])
    return CoefficientGrid(plane_id, grid, quantized=False)


def inverse_blocks(grid: CoefficientGrid) -> LabeledTensor:
    """Inverse DCT per block and un-center by +128; expects dequantized input."""
    coef = zigzag_unflatten(grid.blocks.data)
    d = dct_matrix(8)
    pixels = np.einsum("am,bn,xyab->xymn", d, d, coef, optimize=True) + 128.0
    return LabeledTensor.from_array(_blocks_to_plane(pixels), ["h", "w"])


def round_half_away(values: np.ndarray) -> np.ndarray:
    """Round to nearest with halves away from zero (-1.5 -> -2, 1.5 -> 2)."""
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def quantize(grid: CoefficientGrid, q: QuantizationMatrix) -> CoefficientGrid:
    divided = grid.blocks.data / q.zigzag.astype(np.float64)
    quantized = LabeledTensor.from_array(round_half_away(divided), ["x", "y", "k"])
    return CoefficientGrid(grid.plane, quantized, quantized=True)


def dequantize(grid: CoefficientGrid, q: QuantizationMatrix) -> CoefficientGrid:
    scaled = grid.blocks.data * q.zigzag.astype(np.float64)
    return CoefficientGrid(
        grid.plane, LabeledTensor.from_array(scaled, ["x", "y", "k"]), quantized=False
    )


EOB = (0, 0)
"""End-of-block sentinel terminating every run-length coded vector."""


def rle_encode(vector) -> list[tuple[int, int]]:
    """64-entry integer vector -> (zero run, value) pairs ending with EOB."""
    vector = np.asarray(vector)
    if vector.shape != (64,):
        raise ValueError(f"expected 64 entries, got {vector.shape}")
    pairs = []
    run = 0
    for value in vector:
        if value == 0:
            run += 1
        else:
            pairs.append((run, int(value)))
            run = 0
    pairs.append(EOB)
    return pairs


def rle_decode(pairs) -> np.ndarray:
    """Inverse of :func:`rle_encode`; validates runs fit in 64 entries."""
    out = np.zeros(64, dtype=np.int64)
    i = 0
    terminated = False
    for run, value in pairs:
        if terminated:
            raise ValueError("data after end-of-block")
        if (run, value) == EOB:
            terminated = True
            continue
        if value == 0:
            raise ValueError("zero value outside end-of-block")
        i += run
        if i >= 64:
            raise ValueError(f"run overflows the 64-entry block at index {i}")
        out[i] = value
        i += 1
    if not terminated:
        raise ValueError("missing end-of-block")
    return out
