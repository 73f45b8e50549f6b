"""End-to-end baseline codec: sample arrays in, JFIF bytes out, and back."""

from __future__ import annotations

import numpy as np

from ..tensor import LabeledTensor
from .blocks import dequantize, forward_blocks, inverse_blocks, quantize
from .color import (
    PlanarImage,
    gray_to_planar,
    pad_and_subsample,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)
from .jfif import JfifImage, jfif_parse, jfif_serialize
from .tables import quality_to_matrix

__all__ = [
    "encode",
    "decode",
    "encode_planar",
    "decode_planar",
    "planar_to_ycbcr",
    "planar_to_samples",
    "psnr",
]

_PLANE_KINDS = {"y": "luma", "cb": "chroma", "cr": "chroma"}


def encode_planar(image: PlanarImage, quality: int) -> bytes:
    """Transform, quantize, and serialize an already padded/subsampled image."""
    grids = []
    tables = [quality_to_matrix(quality, "luma")]
    if image.mode != "gray":
        tables.append(quality_to_matrix(quality, "chroma"))
    names = ["y"] if image.mode == "gray" else ["y", "cb", "cr"]
    for plane, name in zip(image.planes, names):
        grid = forward_blocks(plane, name)
        q = tables[0] if _PLANE_KINDS[name] == "luma" else tables[1]
        grids.append(quantize(grid, q))
    return jfif_serialize(grids, tables, (image.height, image.width), image.mode)


def encode(image, quality: int = 75, subsampling: str = "444") -> bytes:
    """Compress an (h, w) grayscale or (h, w, 3) RGB sample array.

    ``subsampling`` is ``"444"`` or ``"420"`` and is ignored for grayscale.
    """
    array = np.asarray(image, dtype=np.float64)
    if array.ndim == 2:
        planar = pad_and_subsample(gray_to_planar(array), "gray")
    elif array.ndim == 3 and array.shape[2] == 3:
        if subsampling not in ("444", "420"):
            raise ValueError(f"unknown subsampling {subsampling!r}")
        planar = pad_and_subsample(rgb_to_ycbcr(array), subsampling)
    else:
        raise ValueError(f"expected (h, w) or (h, w, 3) samples, got {array.shape}")
    return encode_planar(planar, quality)


def decode_planar(parsed: JfifImage, chroma_upsampling: str = "bilinear") -> PlanarImage:
    """Dequantize and inverse-transform a parse result; chroma stays at the
    coded resolution for 4:2:0 until :func:`upsample_chroma`."""
    planes = []
    for grid, q in zip(parsed.grids, parsed.quantization):
        plane = inverse_blocks(dequantize(grid, q))
        planes.append(plane)
    return PlanarImage(tuple(planes), parsed.height, parsed.width, parsed.mode)


def planar_to_ycbcr(planar: PlanarImage, chroma_upsampling: str = "bilinear") -> np.ndarray:
    """Crop padding and bring chroma to full resolution -> (h, w, 3) YCbCr.

    Subsampled chroma is cropped to the active half-dimensions before
    upsampling, so the true image edge (not the encoder's padding) acts as
    the filter boundary.
    """
    from .color import _upsample2_axis

    h, w = planar.height, planar.width
    y = planar.planes[0].data[:h, :w]
    channels = [y]
    for plane in planar.planes[1:]:
        if planar.mode == "420":
            ch, cw = -(-h // 2), -(-w // 2)
            cropped = plane.data[:ch, :cw]
            full = _upsample2_axis(
                _upsample2_axis(cropped, 0, chroma_upsampling), 1, chroma_upsampling
            )
            channels.append(full[:h, :w])
        else:
            channels.append(plane.data[:h, :w])
    return np.stack(channels, axis=-1)


def decode(stream: bytes, chroma_upsampling: str = "bilinear") -> np.ndarray:
    """Decode JFIF bytes to an (h, w) or (h, w, 3) float array in [0, 255]."""
    parsed = jfif_parse(stream)
    planar = decode_planar(parsed)
    return planar_to_samples(planar, chroma_upsampling)


def planar_to_samples(planar: PlanarImage, chroma_upsampling: str = "bilinear") -> np.ndarray:
    """Finish a decoded planar image: crop, upsample, and convert to RGB
    (or a clipped grayscale plane)."""
    if planar.mode == "gray":
        out = np.clip(planar.planes[0].data, 0.0, 255.0)
        return out[: planar.height, : planar.width]
    ycbcr = planar_to_ycbcr(planar, chroma_upsampling)
    h, w = planar.height, planar.width
    planes = tuple(
        LabeledTensor.from_array(ycbcr[..., i], ["h", "w"]) for i in range(3)
    )
    return ycbcr_to_rgb(PlanarImage(planes, h, w, "444"))


def psnr(reference, decoded, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    reference = np.asarray(reference, dtype=np.float64)
    decoded = np.asarray(decoded, dtype=np.float64)
    mse = float(np.mean((reference - decoded) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)
