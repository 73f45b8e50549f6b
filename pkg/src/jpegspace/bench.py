"""Wall-clock micro-benchmarks comparing pixel- and coefficient-space paths.

Rows report blocks (or builds, or images) per second from the median over
``reps`` runs. Structure is deterministic; the timings of course are not.
"""

from __future__ import annotations

import statistics
import time

import numpy as np

from .codec.tables import QuantizationMatrix
from .jdr import explode_conv_fast, explode_conv_naive, gap_transform
from .linmaps import apply_jpeg, compose_jpeg
from .network import DomainMode, convert_weights, forward, random_toy_network
from .tensor import LabeledTensor

__all__ = ["run_benchmarks"]


def _median_time(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def _bench_gap(rng, reps: int, plane_size: int = 256) -> list[dict]:
    q = QuantizationMatrix.ones()
    planes = rng.uniform(-64, 64, size=(2, plane_size, plane_size))
    coef = LabeledTensor.from_array(
        np.stack([apply_jpeg(p, q) for p in planes]), ["p", "x", "y", "k"]
    )
    n_blocks = 2 * (plane_size // 8) ** 2
    t_pixel = _median_time(lambda: planes.mean(axis=(1, 2)), reps)
    t_jpeg = _median_time(lambda: gap_transform(coef), reps)
    return [
        {"operation": "gap", "domain": "pixel", "throughput": n_blocks / t_pixel},
        {"operation": "gap", "domain": "jpeg", "throughput": n_blocks / t_jpeg},
    ]


def _bench_conv_build(rng, reps: int, size: int = 16) -> list[dict]:
    q = QuantizationMatrix.ones()
    maps = compose_jpeg(size, size, q)
    kernel = rng.normal(size=(2, 2, 3, 3))
    t_naive = _median_time(
        lambda: explode_conv_naive(kernel, size, size, maps["J"], maps["J_tilde"]),
        max(1, reps // 3),
    )
    t_fast = _median_time(
        lambda: explode_conv_fast(kernel, maps["J"], maps["J_tilde"]), reps
    )
    return [
        {"operation": "conv_build", "domain": "naive", "throughput": 1.0 / t_naive},
        {"operation": "conv_build", "domain": "fast", "throughput": 1.0 / t_fast},
    ]


def _bench_forward(rng, reps: int, size: int = 16) -> list[dict]:
    spec = random_toy_network(seed=0, channels=2, input_dims=(size, size))
    net = convert_weights(spec)
    image = rng.uniform(-1, 1, size=(size, size))
    pixel_mode = DomainMode("pixel")
    jpeg_mode = DomainMode("jpeg")
    n_blocks = (size // 8) ** 2
    t_pixel = _median_time(lambda: forward(spec, image, pixel_mode), reps)
    t_jpeg = _median_time(lambda: forward(net, image, jpeg_mode), reps)
    return [
        {"operation": "forward", "domain": "pixel", "throughput": n_blocks / t_pixel},
        {"operation": "forward", "domain": "jpeg", "throughput": n_blocks / t_jpeg},
    ]


def run_benchmarks(seed: int = 0, reps: int = 9, size: int = 16) -> list[dict]:
    """All benchmark rows: GAP pixel/jpeg, conv build naive/fast, forward
    pixel/jpeg. Row order is fixed."""
    rng = np.random.default_rng(seed)
    rows = []
    rows += _bench_gap(rng, reps)
    rows += _bench_conv_build(rng, reps, size)
    rows += _bench_forward(rng, reps, size)
    return rows
