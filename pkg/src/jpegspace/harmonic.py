"""Block transforms: DCT-II/DCT-III, Hadamard, and a single-level 2D Haar DWT.

The DCT here is the orthonormal variant: each 1D basis row is scaled by
``sqrt(2/N)`` with an extra ``1/sqrt(2)`` on the zero-frequency row, so the
transform matrix is its own inverse transpose. For 8x8 blocks this reproduces
the familiar ``1/4 * C(a) * C(b)`` two-dimensional scaling used by JPEG.

Axis label convention (shared with the rest of the package): block pixels are
``(m, n)``, block frequencies are ``(a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tensor import LabeledTensor, contract

__all__ = [
    "DctBasis",
    "dct_matrix",
    "dct_basis",
    "dct2_forward",
    "dct2_inverse",
    "dct_least_squares_check",
    "hadamard",
    "haar_dwt2",
    "haar_idwt2",
]


@lru_cache(maxsize=None)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal 1D DCT-II matrix ``d[a, x]`` for block size ``n``."""
    if n < 1:
        raise ValueError(f"block size must be >= 1, got {n}")
    a = np.arange(n)[:, None].astype(np.float64)
    x = np.arange(n)[None, :].astype(np.float64)
    d = np.sqrt(2.0 / n) * np.cos((2.0 * x + 1.0) * a * np.pi / (2.0 * n))
    d[0, :] *= 1.0 / np.sqrt(2.0)
    return d


@dataclass(frozen=True)
class DctBasis:
    """Materialized 2D DCT pair for ``n x n`` blocks.

    ``forward`` maps block pixels to frequencies (axes ``a, b, m, n``);
    ``inverse`` maps frequencies back (axes ``m, n, a, b``). The two compose
    to the identity because the 1D rows are orthonormal.
    """

    n: int
    forward: LabeledTensor
    inverse: LabeledTensor


@lru_cache(maxsize=None)
def dct_basis(n: int = 8) -> DctBasis:
    d = dct_matrix(n)
    forward = np.einsum("am,bn->abmn", d, d)
    inverse = np.einsum("am,bn->mnab", d, d)
    return DctBasis(
        n=n,
        forward=LabeledTensor.from_array(forward, ["a", "b", "m", "n"]),
        inverse=LabeledTensor.from_array(inverse, ["m", "n", "a", "b"]),
    )


def dct2_forward(block: LabeledTensor) -> LabeledTensor:
    """2D DCT-II of a square block with axes ``(m, n)`` -> axes ``(a, b)``."""
    m, n = block.shape
    if m != n:
        raise ValueError(f"block must be square, got {block.shape}")
    if block.labels != ("m", "n"):
        block = LabeledTensor.from_array(block.data, ["m", "n"])
    return contract(dct_basis(n).forward, block, ["a", "b"])


def dct2_inverse(coef: LabeledTensor) -> LabeledTensor:
    """2D DCT-III (inverse) of coefficients with axes ``(a, b)`` -> ``(m, n)``."""
    a, b = coef.shape
    if a != b:
        raise ValueError(f"coefficient block must be square, got {coef.shape}")
    if coef.labels != ("a", "b"):
        coef = LabeledTensor.from_array(coef.data, ["a", "b"])
    return contract(dct_basis(a).inverse, coef, ["m", "n"])


def truncated_reconstruction(samples: np.ndarray, m: int) -> np.ndarray:
    """Reconstruct a 1D signal from its first ``m`` DCT coefficients."""
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    d = dct_matrix(n)
    coef = d @ samples
    return d[:m].T @ coef[:m]


def dct_least_squares_check(
    samples,
    m: int,
    n_perturbations: int = 1000,
    seed: int = 0,
    scale: float = 0.1,
) -> dict:
    """Check that keeping the first ``m`` DCT coefficients is least-squares optimal.

    Reconstructs the signal from its first ``m`` coefficients and compares the
    squared error against (a) the exact normal-equations solution over the same
    m basis rows and (b) ``n_perturbations`` random perturbations of the kept
    coefficients. Returns ``approx_error``, ``is_minimal``, and the
    normal-equations optimum ``lstsq_error``.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}], got {m}")
    d = dct_matrix(n)
    coef = (d @ samples)[:m]
    recon = d[:m].T @ coef
    approx_error = float(np.sum((recon - samples) ** 2))

    # Exact optimum over span(d[:m]) by solving the normal equations.
    basis = d[:m].T
    solution, *_ = np.linalg.lstsq(basis, samples, rcond=None)
    lstsq_error = float(np.sum((basis @ solution - samples) ** 2))

    rng = np.random.default_rng(seed)
    is_minimal = abs(approx_error - lstsq_error) <= 1e-9 * max(1.0, approx_error)
    for _ in range(n_perturbations):
        perturbed = coef + rng.normal(scale=scale, size=m)
        err = float(np.sum((d[:m].T @ perturbed - samples) ** 2))
        if err < approx_error - 1e-12:
            is_minimal = False
            break
    return {
        "approx_error": approx_error,
        "lstsq_error": lstsq_error,
        "is_minimal": bool(is_minimal),
    }


def hadamard(n_power: int) -> LabeledTensor:
    """Hadamard matrix of size ``2**n_power`` built by the block recursion."""
    if n_power < 0:
        raise ValueError(f"n_power must be >= 0, got {n_power}")
    h = np.array([[1.0]])
    for _ in range(n_power):
        h = np.block([[h, h], [h, -h]])
    return LabeledTensor.from_array(h, ["i", "j"])


def haar_dwt2(image: LabeledTensor) -> dict[str, LabeledTensor]:
    """Single-level 2D Haar analysis with orthonormal (1/sqrt(2)) filters.

    Returns the four half-resolution bands ``LL``, ``LH``, ``HL``, ``HH``.
    For each 2x2 tile ``[[a, b], [c, d]]``:

        LL = (a + b + c + d) / 2      HL = (a + b - c - d) / 2
        LH = (a - b + c - d) / 2      HH = (a - b - c + d) / 2
    """
    h, w = image.shape
    if h % 2 or w % 2:
        raise ValueError(f"image extents must be even, got {image.shape}")
    x = image.data
    a = x[0::2, 0::2]
    b = x[0::2, 1::2]
    c = x[1::2, 0::2]
    d = x[1::2, 1::2]
    labels = ["h", "w"]
    return {
        "LL": LabeledTensor.from_array((a + b + c + d) / 2.0, labels),
        "LH": LabeledTensor.from_array((a - b + c - d) / 2.0, labels),
        "HL": LabeledTensor.from_array((a + b - c - d) / 2.0, labels),
        "HH": LabeledTensor.from_array((a - b - c + d) / 2.0, labels),
    }


def haar_idwt2(bands: dict[str, LabeledTensor]) -> LabeledTensor:
    """Exact inverse of :func:`haar_dwt2`."""
    ll = bands["LL"].data
    lh = bands["LH"].data
    hl = bands["HL"].data
    hh = bands["HH"].data
    h, w = ll.shape
    out = np.empty((2 * h, 2 * w), dtype=np.float64)
    out[0::2, 0::2] = (ll + lh + hl + hh) / 2.0
    out[0::2, 1::2] = (ll - lh + hl - hh) / 2.0
    out[1::2, 0::2] = (ll + lh - hl - hh) / 2.0
    out[1::2, 1::2] = (ll - lh - hl + hh) / 2.0
    return LabeledTensor.from_array(out, ["h", "w"])
