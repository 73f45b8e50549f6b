"""Color conversion, padding, and chroma resampling for the codec pipeline.

Conversion uses full-range YCbCr (all channels span [0, 255], not the BT.601
studio range): ``Y = 0.299 R + 0.587 G + 0.114 B`` with Cb/Cr centered on 128.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..tensor import LabeledTensor

__all__ = [
    "PlanarImage",
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "gray_to_planar",
    "pad_and_subsample",
    "upsample_chroma",
    "pad_plane",
]

_RGB_TO_YCC = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)


@dataclass(frozen=True)
class PlanarImage:
    """One or three sample planes plus the active (pre-padding) dimensions.

    ``mode`` is ``"gray"`` (one plane), ``"444"`` (three full-resolution
    planes), or ``"420"`` (chroma at half the padded luma resolution).
    Samples are stored as reals in [0, 255].
    """

    planes: tuple[LabeledTensor, ...]
    height: int
    width: int
    mode: str

    def __post_init__(self):
        if self.mode not in ("gray", "444", "420"):
            raise ValueError(f"unknown mode {self.mode!r}")
        expected = 1 if self.mode == "gray" else 3
        if len(self.planes) != expected:
            raise ValueError(f"mode {self.mode} needs {expected} planes")
        if self.mode == "420":
            luma_h, luma_w = self.planes[0].shape
            for chroma in self.planes[1:]:
                if chroma.shape != (luma_h // 2, luma_w // 2):
                    raise ValueError(
                        f"420 chroma shape {chroma.shape} does not match half "
                        f"of luma {self.planes[0].shape}"
                    )


def rgb_to_ycbcr(image) -> PlanarImage:
    """(h, w, 3) RGB samples -> full-resolution YCbCr planes, clamped to [0, 255]."""
    rgb = np.asarray(image, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) array, got {rgb.shape}")
    ycc = np.einsum("ck,hwk->hwc", _RGB_TO_YCC, rgb)
    ycc[..., 1] += 128.0
    ycc[..., 2] += 128.0
    ycc = np.clip(ycc, 0.0, 255.0)
    h, w = rgb.shape[:2]
    planes = tuple(LabeledTensor.from_array(ycc[..., i], ["h", "w"]) for i in range(3))
    return PlanarImage(planes, h, w, "444")


def ycbcr_to_rgb(image: PlanarImage) -> np.ndarray:
    """Full-resolution YCbCr planes -> (h, w, 3) RGB, clamped to [0, 255]."""
    if image.mode != "444":
        raise ValueError("chroma must be upsampled to full resolution first")
    y = image.planes[0].data
    cb = image.planes[1].data - 128.0
    cr = image.planes[2].data - 128.0
    rgb = np.stack(
        [
            y + 1.402 * cr,
            y - 0.344136 * cb - 0.714136 * cr,
            y + 1.772 * cb,
        ],
        axis=-1,
    )
    return np.clip(rgb, 0.0, 255.0)


def gray_to_planar(image) -> PlanarImage:
    plane = np.asarray(image, dtype=np.float64)
    if plane.ndim != 2:
        raise ValueError(f"expected (h, w) array, got {plane.shape}")
    h, w = plane.shape
    return PlanarImage((LabeledTensor.from_array(plane, ["h", "w"]),), h, w, "gray")


def pad_plane(plane: np.ndarray, multiple: int) -> np.ndarray:
    """Pad bottom/right to a multiple of ``multiple`` by repeating edge samples."""
    h, w = plane.shape
    pad_h = (-h) % multiple
    pad_w = (-w) % multiple
    if pad_h == 0 and pad_w == 0:
        return plane
    return np.pad(plane, ((0, pad_h), (0, pad_w)), mode="edge")


def pad_and_subsample(image: PlanarImage, mode: str) -> PlanarImage:
    """Pad planes to the MCU grid (8, or 16 when subsampled) and, for 4:2:0,
    replace chroma with the 2x2 box mean."""
    if image.mode == "gray":
        if mode not in ("gray", "444"):
            raise ValueError("grayscale images cannot be chroma subsampled")
        padded = pad_plane(image.planes[0].data, 8)
        return PlanarImage(
            (LabeledTensor.from_array(padded, ["h", "w"]),),
            image.height,
            image.width,
            "gray",
        )
    if image.mode != "444":
        raise ValueError("input must hold full-resolution planes")
    if mode == "444":
        planes = tuple(
            LabeledTensor.from_array(pad_plane(p.data, 8), ["h", "w"])
            for p in image.planes
        )
        return PlanarImage(planes, image.height, image.width, "444")
    if mode == "420":
        luma = pad_plane(image.planes[0].data, 16)
        chroma = []
        for p in image.planes[1:]:
            full = pad_plane(p.data, 16)
            boxed = (
                full[0::2, 0::2] + full[0::2, 1::2] + full[1::2, 0::2] + full[1::2, 1::2]
            ) / 4.0
            chroma.append(LabeledTensor.from_array(boxed, ["h", "w"]))
        return PlanarImage(
            (LabeledTensor.from_array(luma, ["h", "w"]), *chroma),
            image.height,
            image.width,
            "420",
        )
    raise ValueError(f"unknown subsampling mode {mode!r}")


def _upsample2_axis(plane: np.ndarray, axis: int, method: str) -> np.ndarray:
    plane = np.moveaxis(plane, axis, 0)
    n = plane.shape[0]
    out = np.empty((2 * n,) + plane.shape[1:], dtype=np.float64)
    if method == "nearest":
        out[0::2] = plane
        out[1::2] = plane
    else:
        # Triangle filter with half-sample phase; edges clamp.
        prev = np.concatenate([plane[:1], plane[:-1]], axis=0)
        nxt = np.concatenate([plane[1:], plane[-1:]], axis=0)
        out[0::2] = 0.75 * plane + 0.25 * prev
        out[1::2] = 0.75 * plane + 0.25 * nxt
    return np.moveaxis(out, 0, axis)


def upsample_chroma(image: PlanarImage, method: str = "bilinear") -> PlanarImage:
    """Bring 4:2:0 chroma planes back to the padded luma resolution."""
    if method not in ("bilinear", "nearest"):
        raise ValueError(f"unknown upsampling method {method!r}")
    if image.mode != "420":
        return image
    upsampled = [image.planes[0]]
    for p in image.planes[1:]:
        data = _upsample2_axis(_upsample2_axis(p.data, 0, method), 1, method)
        upsampled.append(LabeledTensor.from_array(data, ["h", "w"]))
    return PlanarImage(tuple(upsampled), image.height, image.width, "444")
