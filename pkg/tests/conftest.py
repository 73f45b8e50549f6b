import io

import numpy as np
import pytest


def smooth_gray(h, w):
    """Synthetic photo-like fixture: gradients plus low-frequency waves."""
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = (
        110.0
        + 70.0 * np.sin(2 * np.pi * xx / w) * np.cos(2 * np.pi * yy / h)
        + 50.0 * (xx / max(w - 1, 1))
        + 20.0 * np.cos(6 * np.pi * yy / h)
    )
    return np.clip(img, 0, 255)


def smooth_rgb(h, w):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    r = 128 + 90 * np.sin(2 * np.pi * xx / w) * np.cos(2 * np.pi * yy / h)
    g = 255 * (xx / max(w - 1, 1))
    b = 255 * (yy / max(h - 1, 1))
    return np.clip(np.stack([r, g, b], axis=-1), 0, 255)


def reference_jpeg_bytes(image, quality, subsampling=None):
    """Encode with Pillow (libjpeg), the reference implementation."""
    from PIL import Image

    array = np.asarray(np.round(image), dtype=np.uint8)
    mode = "L" if array.ndim == 2 else "RGB"
    buf = io.BytesIO()
    kwargs = {"quality": quality}
    if subsampling is not None:
        kwargs["subsampling"] = subsampling
    Image.fromarray(array, mode).save(buf, "JPEG", **kwargs)
    return buf.getvalue()


def reference_decode_gray(data):
    from PIL import Image

    return np.asarray(Image.open(io.BytesIO(data)).convert("L"), dtype=np.float64)


def reference_decode_ycbcr(data):
    """libjpeg's native YCbCr output (no extra color conversion)."""
    from PIL import Image

    image = Image.open(io.BytesIO(data))
    image.draft("YCbCr", image.size)
    return np.asarray(image, dtype=np.float64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
