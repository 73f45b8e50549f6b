"""Residual-network operators that act directly on DCT coefficients.

Convolutions become ``Xi = J . C . J_tilde``: decode, convolve, re-encode,
composed into one map that goes coefficients-to-coefficients. Two builders
are provided: a naive one that materializes the full pixel-domain convolution
tensor and contracts it (slow, simple), and a fast one that convolves the
slices of ``J_tilde`` with the kernel and contracts the result with ``J``.

Batch normalization and global average pooling read block statistics straight
from the coefficients: the DC term of an 8x8 block is 8x the block mean, and
for zero-mean data the variance equals the mean of the squared coefficients
(the transform is orthonormal). ReLU is approximated by spatial masking: a
Heaviside mask is computed on a partial (low-frequency) reconstruction and
applied to the full-precision samples through the bilinear map ``Psi``.

Coefficient tensors here are dequantized, zig-zag ordered, with axes
``(x, y, k)`` or ``(p, x, y, k)`` for multi-channel feature maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import convolve2d

from .codec.tables import QuantizationMatrix, zigzag_flatten, zigzag_unflatten
from .harmonic import dct_matrix
from .linmaps import LinearJpegMap
from .tensor import LabeledTensor, contract

__all__ = [
    "CompressedConv",
    "MaskMap",
    "BnParams",
    "explode_conv_naive",
    "explode_conv_fast",
    "apply_conv_pixel",
    "build_mask_map",
    "bn_transform",
    "dct_statistics",
    "gap_transform",
    "asm_relu",
    "asm_relu_blocks",
    "frequency_mask",
    "relu_rmse_sweep",
]

_IN_AXES = ("p", "x", "y", "k")
_OUT_AXES = ("p2", "x2", "y2", "k2")
_RENAME_OUT = dict(zip(_IN_AXES, _OUT_AXES))
_RENAME_IN = dict(zip(_OUT_AXES, _IN_AXES))


def _as_kernel(kernel) -> np.ndarray:
    """Normalize to (p_out, p_in, kh, kw); 2D kernels become 1->1 channel."""
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim == 2:
        kernel = kernel[None, None]
    if kernel.ndim != 4:
        raise ValueError(f"kernel must be 2D or 4D, got shape {kernel.shape}")
    if kernel.shape[2] % 2 == 0 or kernel.shape[3] % 2 == 0:
        raise ValueError(f"kernel spatial extents must be odd, got {kernel.shape[2:]}")
    return kernel


@dataclass(frozen=True)
class CompressedConv:
    """A pixel convolution exploded into coefficient space.

    ``xi`` maps ``(p, x, y, k) -> (p2, x2, y2, k2)``. Applying it to
    coefficients equals compressing the convolution of the decompressed
    image: the defining identity ``Xi . J = J . C``.
    """

    xi: LabeledTensor
    kernel_shape: tuple[int, int, int, int]
    quantization: QuantizationMatrix
    built_by: str

    def apply(self, coef: LabeledTensor) -> LabeledTensor:
        single = coef.labels == ("x", "y", "k")
        if single:
            coef = LabeledTensor.from_array(coef.data[None], list(_IN_AXES))
        if coef.labels != _IN_AXES:
            raise ValueError(f"expected axes {_IN_AXES}, got {coef.labels}")
        out = contract(self.xi, coef, list(_OUT_AXES)).rename(_RENAME_IN)
        if single and out.extent("p") == 1:
            out = LabeledTensor.from_array(out.data[0], ["x", "y", "k"])
        return out


def _compose_xi(c_with_jtilde: np.ndarray, j_map: LinearJpegMap, kernel, built_by: str):
    """c_with_jtilde has axes (p, x, y, k, p2, h2, w2); contract with J."""
    h, w = j_map.image_dims
    p_in, n, p_out = c_with_jtilde.shape[0], c_with_jtilde.shape[1:4], c_with_jtilde.shape[4]
    j_mat = j_map.tensor.data.reshape(h * w, -1)
    flat = c_with_jtilde.reshape(-1, h * w)
    xi = (flat @ j_mat).reshape(p_in, n[0], n[1], n[2], p_out, n[0], n[1], n[2])
    tensor = LabeledTensor.from_array(
        xi, ["p", "x", "y", "k", "p2", "x2", "y2", "k2"]
    )
    return CompressedConv(
        xi=tensor,
        kernel_shape=tuple(kernel.shape),
        quantization=j_map.quantization,
        built_by=built_by,
    )


def explode_conv_naive(kernel, h: int, w: int, j_map, jtilde_map) -> CompressedConv:
    """Materialize the full (2,2)-convolution tensor entry by entry, then
    contract it between ``J_tilde`` and ``J``.

    Deliberately straightforward: the whole (h, w, h, w) index space is
    walked in Python and the contractions run with default (unoptimized)
    einsum evaluation. The fast builder computes the identical map.
    """
    kernel = _as_kernel(kernel)
    p_out, p_in, kh, kw = kernel.shape
    s0, s1 = kh // 2, kw // 2
    big = np.zeros((p_in, h, w, p_out, h, w))
    for i in range(h):
        for j in range(w):
            for u in range(h):
                for v in range(w):
                    hrange = (u - s0, u + s0)
                    vrange = (v - s1, v + s1)
                    if hrange[0] <= i <= hrange[1] and vrange[0] <= j <= vrange[1]:
                        for p2 in range(p_out):
                            for p in range(p_in):
                                big[p, i, j, p2, u, v] = kernel[
                                    p2, p, u - i + s0, v - j + s1
                                ]
    jt = jtilde_map.tensor.data  # (x, y, k, h, w)
    c_jt = np.einsum("xykhw,phwquv->pxykquv", jt, big)
    j_full = j_map.tensor.data  # (h, w, x, y, k)
    xi = np.einsum("pxykquv,uvXYK->pxykqXYK", c_jt, j_full)
    tensor = LabeledTensor.from_array(xi, ["p", "x", "y", "k", "p2", "x2", "y2", "k2"])
    return CompressedConv(
        xi=tensor,
        kernel_shape=tuple(kernel.shape),
        quantization=j_map.quantization,
        built_by="naive",
    )


def explode_conv_fast(kernel, j_map, jtilde_map) -> CompressedConv:
    """Convolve the image-shaped slices of ``J_tilde`` with the kernel, then
    contract with ``J``: the same map as the naive builder, without the big
    intermediate tensor."""
    kernel = _as_kernel(kernel)
    p_out, p_in, _, _ = kernel.shape
    jt = jtilde_map.tensor.data  # (x, y, k, h, w)
    bx, by, nk, h, w = jt.shape
    slices = jt.reshape(-1, h, w)
    c_jt = np.empty((p_in, bx, by, nk, p_out, h, w))
    for p2 in range(p_out):
        for p in range(p_in):
            convolved = np.stack(
                [convolve2d(s, kernel[p2, p], mode="same", boundary="fill") for s in slices]
            )
            c_jt[p, :, :, :, p2] = convolved.reshape(bx, by, nk, h, w)
    return _compose_xi(c_jt, j_map, kernel, "fast")


def apply_conv_pixel(kernel, planes: np.ndarray) -> np.ndarray:
    """Pixel-domain oracle: 'same' zero-padded convolution, channels mixed.

    ``planes`` is (p_in, h, w); returns (p_out, h, w).
    """
    kernel = _as_kernel(kernel)
    p_out, p_in = kernel.shape[:2]
    planes = np.asarray(planes, dtype=np.float64)
    if planes.ndim == 2:
        planes = planes[None]
    if planes.shape[0] != p_in:
        raise ValueError(f"kernel expects {p_in} input channels, got {planes.shape[0]}")
    out = np.zeros((p_out,) + planes.shape[1:])
    for p2 in range(p_out):
        for p in range(p_in):
            out[p2] += convolve2d(planes[p], kernel[p2, p], mode="same", boundary="fill")
    return out


@dataclass(frozen=True)
class MaskMap:
    """Bilinear map applying a spatial 0/1 mask to a block's coefficients.

    ``psi`` has axes ``(a, b, m, n, a2, b2)``: coefficient (a, b) and mask
    sample (m, n) in, masked coefficient (a2, b2) out. Masking with all ones
    is the identity.
    """

    psi: LabeledTensor

    def apply(self, mask: LabeledTensor, coef: LabeledTensor) -> LabeledTensor:
        product = contract(mask, coef, ["m", "n", "a", "b"])
        out = contract(self.psi, product, ["a2", "b2"])
        return out.rename({"a2": "a", "b2": "b"})


@lru_cache(maxsize=None)
def build_mask_map(n: int = 8) -> MaskMap:
    d = dct_matrix(n)
    psi = np.einsum("am,bn,Am,Bn->abmnAB", d, d, d, d, optimize=True)
    return MaskMap(LabeledTensor.from_array(psi, ["a", "b", "m", "n", "a2", "b2"]))


@dataclass(frozen=True)
class BnParams:
    """Per-channel batch-norm parameters; arrays are indexed by channel."""

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    epsilon: float = 1e-5

    def __post_init__(self):
        for name in ("gamma", "beta", "running_mean", "running_var"):
            object.__setattr__(
                self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64))
            )
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if np.any(self.running_var < 0):
            raise ValueError("running variance must be non-negative")

    @classmethod
    def identity(cls, channels: int) -> "BnParams":
        return cls(
            gamma=np.ones(channels),
            beta=np.zeros(channels),
            running_mean=np.zeros(channels),
            running_var=np.ones(channels),
        )


def _with_channel_axis(coef: LabeledTensor) -> tuple[LabeledTensor, bool]:
    if coef.labels == ("x", "y", "k"):
        return LabeledTensor.from_array(coef.data[None], list(_IN_AXES)), True
    if coef.labels != _IN_AXES:
        raise ValueError(f"expected axes (x, y, k) or {_IN_AXES}, got {coef.labels}")
    return coef, False


def dct_statistics(coef: LabeledTensor, bessel: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel pixel mean and variance read from DCT coefficients.

    The mean comes from the DC terms (DC/8 per block); the variance is the
    mean of the squared coefficients after the channel mean is removed from
    the DC terms.
    """
    coef, _ = _with_channel_axis(coef)
    data = coef.data
    mean = data[..., 0].mean(axis=(1, 2)) / 8.0
    adjusted = data.copy()
    adjusted[..., 0] -= 8.0 * mean[:, None, None]
    var = (adjusted**2).mean(axis=(1, 2, 3))
    if bessel:
        n = data.shape[1] * data.shape[2] * 64
        var = var * n / (n - 1)
    return mean, var


def bn_transform(
    coef: LabeledTensor,
    params: BnParams,
    mode: str = "train-stats",
    bessel: bool = False,
) -> LabeledTensor:
    """Batch normalization on coefficients: statistics from the DC terms and
    squared coefficients, gamma scaling everywhere, beta carried on the DC.

    ``train-stats`` normalizes by the sample statistics of ``coef``;
    ``inference`` uses the running statistics in ``params``.
    """
    coef, single = _with_channel_axis(coef)
    if mode == "train-stats":
        mean, var = dct_statistics(coef, bessel=bessel)
    elif mode == "inference":
        mean, var = params.running_mean, params.running_var
    else:
        raise ValueError(f"unknown mode {mode!r}")
    data = coef.data.copy()
    data[..., 0] -= 8.0 * mean[:, None, None]
    scale = params.gamma / np.sqrt(var + params.epsilon)
    data *= scale[:, None, None, None]
    data[..., 0] += 8.0 * params.beta[:, None, None]
    out = LabeledTensor.from_array(data, list(_IN_AXES))
    if single:
        out = LabeledTensor.from_array(out.data[0], ["x", "y", "k"])
    return out


def gap_transform(coef: LabeledTensor) -> np.ndarray:
    """Global average pooling: the per-channel mean of DC/8 over all blocks,
    bit-identical to averaging the decoded pixels."""
    coef, single = _with_channel_axis(coef)
    pooled = coef.data[..., 0].mean(axis=(1, 2)) / 8.0
    return pooled if not single else pooled[:1]


@lru_cache(maxsize=None)
def frequency_mask(m: int) -> np.ndarray:
    """8x8 mask keeping frequencies (i, j) with i + j <= m."""
    if not 0 <= m <= 14:
        raise ValueError(f"m must be in [0, 14], got {m}")
    i = np.arange(8)
    mask = (i[:, None] + i[None, :]) <= m
    return mask.astype(np.float64)


def asm_relu_blocks(coef_blocks: np.ndarray, m: int, variant: str = "asm") -> np.ndarray:
    """ReLU approximation on a batch of (…, 8, 8) frequency-domain blocks.

    ``asm``: Heaviside mask from the partial reconstruction, applied to the
    full-precision samples through the mask map. ``naive``: ReLU of the
    partial reconstruction itself, re-transformed.
    """
    if variant not in ("asm", "naive"):
        raise ValueError(f"unknown variant {variant!r}")
    fmask = frequency_mask(m)
    d = dct_matrix(8)
    coef_blocks = np.asarray(coef_blocks, dtype=np.float64)
    partial = np.einsum("am,bn,...ab->...mn", d, d, coef_blocks * fmask, optimize=True)
    if variant == "asm":
        # Psi factored as IDCT -> mask -> DCT; identical to contracting psi.
        full = np.einsum("am,bn,...ab->...mn", d, d, coef_blocks, optimize=True)
        masked = np.where(partial >= 0.0, full, 0.0)
    else:
        masked = np.maximum(partial, 0.0)
    return np.einsum("am,bn,...mn->...ab", d, d, masked, optimize=True)


def asm_relu(
    coef: LabeledTensor,
    m: int,
    psi: MaskMap | None = None,
    variant: str = "asm",
) -> LabeledTensor:
    """ReLU approximation on zig-zag coefficient grids (axes (x, y, k) or
    (p, x, y, k)); ``m = 14`` keeps the full basis and is exact.

    When ``psi`` is given the mask is applied by contracting the dense mask
    map; otherwise the factored (transform, mask, transform) form is used.
    The two agree to float precision.
    """
    grid, single = _with_channel_axis(coef)
    blocks = zigzag_unflatten(grid.data)
    if variant == "asm" and psi is not None:
        fmask = frequency_mask(m)
        d = dct_matrix(8)
        flat = blocks.reshape(-1, 8, 8)
        partial = np.einsum("am,bn,Lab->Lmn", d, d, flat * fmask, optimize=True)
        heaviside = (partial >= 0.0).astype(np.float64)
        out_flat = np.einsum(
            "abmnAB,Lmn,Lab->LAB", psi.psi.data, heaviside, flat, optimize=True
        )
        out_blocks = out_flat.reshape(blocks.shape)
    else:
        out_blocks = asm_relu_blocks(blocks, m, variant)
    out = zigzag_flatten(out_blocks)
    if single:
        return LabeledTensor.from_array(out[0], ["x", "y", "k"])
    return LabeledTensor.from_array(out, list(_IN_AXES))


def upsampled_random_blocks(count: int, seed: int = 0) -> np.ndarray:
    """(count, 8, 8) test blocks: random 4x4 samples in [-1, 1], upsampled 2x
    nearest-neighbor. Band-limited inputs make partial reconstruction fair."""
    rng = np.random.default_rng(seed)
    small = rng.uniform(-1.0, 1.0, size=(count, 4, 4))
    return np.repeat(np.repeat(small, 2, axis=1), 2, axis=2)


def relu_rmse_sweep(block_count: int, seed: int = 0, ms=range(1, 15)) -> list[dict]:
    """RMSE of both ReLU approximations against the true ReLU, per threshold."""
    blocks = upsampled_random_blocks(block_count, seed)
    d = dct_matrix(8)
    coef = np.einsum("am,bn,Lmn->Lab", d, d, blocks, optimize=True)
    truth = np.maximum(blocks, 0.0)
    rows = []
    for m in ms:
        out = {}
        for variant in ("asm", "naive"):
            approx_coef = asm_relu_blocks(coef, m, variant)
            approx = np.einsum("am,bn,Lab->Lmn", d, d, approx_coef, optimize=True)
            out[variant] = float(np.sqrt(np.mean((approx - truth) ** 2)))
        rows.append({"m": m, "rmse_asm": out["asm"], "rmse_naive": out["naive"]})
    return rows
