"""Constant tables for the baseline codec: zig-zag order, quantization
matrices, quality scaling, and the default Huffman table definitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ZIGZAG_TO_RC",
    "RC_TO_ZIGZAG",
    "zigzag_flatten",
    "zigzag_unflatten",
    "QuantizationMatrix",
    "BASE_LUMA_TABLE",
    "BASE_CHROMA_TABLE",
    "quality_to_matrix",
    "DEFAULT_HUFFMAN_TABLES",
]


def _zigzag_order() -> list[tuple[int, int]]:
    # Diagonal walk: even diagonals go bottom-left to top-right, odd ones the
    # reverse, matching (0,0),(0,1),(1,0),(2,0),(1,1),(0,2),...
    order = []
    for s in range(15):
        rows = range(max(0, s - 7), min(7, s) + 1)
        if s % 2 == 0:
            rows = reversed(rows)
        order.extend((r, s - r) for r in rows)
    return order


ZIGZAG_TO_RC: tuple[tuple[int, int], ...] = tuple(_zigzag_order())
RC_TO_ZIGZAG: dict[tuple[int, int], int] = {rc: k for k, rc in enumerate(ZIGZAG_TO_RC)}

_ZZ_ROWS = np.array([r for r, _ in ZIGZAG_TO_RC])
_ZZ_COLS = np.array([c for _, c in ZIGZAG_TO_RC])


def zigzag_flatten(blocks: np.ndarray) -> np.ndarray:
    """(..., 8, 8) -> (..., 64) in zig-zag order."""
    return blocks[..., _ZZ_ROWS, _ZZ_COLS]


def zigzag_unflatten(vectors: np.ndarray) -> np.ndarray:
    """(..., 64) -> (..., 8, 8), inverse of :func:`zigzag_flatten`."""
    out = np.empty(vectors.shape[:-1] + (8, 8), dtype=vectors.dtype)
    out[..., _ZZ_ROWS, _ZZ_COLS] = vectors
    return out


@dataclass(frozen=True)
class QuantizationMatrix:
    """8x8 table of integer divisors in [1, 255], exposed both as a matrix
    and in zig-zag order."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.int64)
        if matrix.shape != (8, 8):
            raise ValueError(f"expected 8x8 table, got {matrix.shape}")
        if matrix.min() < 1 or matrix.max() > 255:
            raise ValueError("quantization entries must lie in [1, 255]")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_zigzag(cls, values) -> "QuantizationMatrix":
        return cls(zigzag_unflatten(np.asarray(values, dtype=np.int64)))

    @property
    def zigzag(self) -> np.ndarray:
        return zigzag_flatten(self.matrix)

    @classmethod
    def ones(cls) -> "QuantizationMatrix":
        return cls(np.ones((8, 8), dtype=np.int64))


BASE_LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)

BASE_CHROMA_TABLE = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.int64,
)


def quality_to_matrix(quality: int, plane_kind: str = "luma") -> QuantizationMatrix:
    """Scale the base table by the libjpeg-style scalar quality factor.

    ``s = 5000/q`` below 50, ``200 - 2q`` at or above; entries become
    ``clamp(floor((base*s + 50) / 100), 1, 255)``, so quality 50 returns the
    base table and quality 100 the all-ones table.
    """
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in [1, 100], got {quality}")
    if plane_kind == "luma":
        base = BASE_LUMA_TABLE
    elif plane_kind == "chroma":
        base = BASE_CHROMA_TABLE
    else:
        raise ValueError(f"plane_kind must be 'luma' or 'chroma', got {plane_kind!r}")
    s = 5000 // quality if quality < 50 else 200 - 2 * quality
    scaled = (base * s + 50) // 100
    return QuantizationMatrix(np.clip(scaled, 1, 255))


# Default Huffman tables (ITU T.81 Annex K): (bits, values) where bits[i] is
# the number of codes with length i+1 and values lists symbols in code order.

DC_LUMA_BITS = (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0)
DC_LUMA_VALUES = tuple(range(12))

DC_CHROMA_BITS = (0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0)
DC_CHROMA_VALUES = tuple(range(12))

AC_LUMA_BITS = (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D)
AC_LUMA_VALUES = (
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12,
    0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
    0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16,
    0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
    0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79,
    0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98,
    0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
    0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
    0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4,
    0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA,
    0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
)

AC_CHROMA_BITS = (0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77)
AC_CHROMA_VALUES = (
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21,
    0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
    0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
    0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0,
    0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34,
    0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
    0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38,
    0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
    0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
    0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
    0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78,
    0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96,
    0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
    0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
    0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
    0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2,
    0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
    0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9,
    0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
    0xF9, 0xFA,
)

# (table_class, table_id) -> (bits, values); class 0 = DC, 1 = AC.
DEFAULT_HUFFMAN_TABLES = {
    (0, 0): (DC_LUMA_BITS, DC_LUMA_VALUES),
    (1, 0): (AC_LUMA_BITS, AC_LUMA_VALUES),
    (0, 1): (DC_CHROMA_BITS, DC_CHROMA_VALUES),
    (1, 1): (AC_CHROMA_BITS, AC_CHROMA_VALUES),
}
