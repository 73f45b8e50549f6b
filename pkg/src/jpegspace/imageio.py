"""Binary PPM (P6) and PGM (P5) readers/writers, 8-bit maxval only."""

from __future__ import annotations

import numpy as np

__all__ = ["read_image", "write_image"]


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    while pos < len(data):
        if data[pos : pos + 1].isspace():
            pos += 1
        elif data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("unexpected end of PNM header")
    return data[start:pos], pos


def read_image(path) -> np.ndarray:
    """Load a P5 (-> (h, w)) or P6 (-> (h, w, 3)) file as float64 in [0, 255]."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, pos = _read_token(data, 0)
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported PNM magic {magic!r} (binary P5/P6 only)")
    fields = []
    for _ in range(3):
        token, pos = _read_token(data, pos)
        fields.append(int(token))
    width, height, maxval = fields
    if maxval != 255:
        raise ValueError(f"only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace after maxval
    channels = 1 if magic == b"P5" else 3
    count = width * height * channels
    pixels = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos)
    if magic == b"P5":
        return pixels.reshape(height, width).astype(np.float64)
    return pixels.reshape(height, width, 3).astype(np.float64)


def write_image(path, image) -> None:
    """Write (h, w) as P5 or (h, w, 3) as P6; values are rounded and clipped."""
    array = np.asarray(image, dtype=np.float64)
    samples = np.clip(np.round(array), 0, 255).astype(np.uint8)
    if samples.ndim == 2:
        magic, (h, w) = b"P5", samples.shape
    elif samples.ndim == 3 and samples.shape[2] == 3:
        magic, (h, w) = b"P6", samples.shape[:2]
    else:
        raise ValueError(f"expected (h, w) or (h, w, 3) image, got {array.shape}")
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(samples.tobytes())
