"""Command-line surface: codec runs, equivalence verification, the ReLU
approximation sweep, and throughput benchmarks.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 IO/parse
error. Set ``JPEGSPACE_THREADS`` to cap BLAS parallelism; it is applied
before numerical modules load.
"""

from __future__ import annotations

import argparse
import os
import sys


def _apply_thread_cap():
    threads = os.environ.get("JPEGSPACE_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _write_rows(rows, columns, fmt: str, out_path, schema: str):
    lines = []
    if fmt == "csv":
        lines.append(f"# jpegspace {schema} csv v1")
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(str(row[c]) for c in columns))
    else:
        widths = [max(len(c), 14) for c in columns]
        lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
        for row in rows:
            lines.append("  ".join(str(row[c]).ljust(w) for c, w in zip(columns, widths)))
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_encode(args) -> int:
    from . import imageio
    from .codec import encode, jfif_parse, quality_to_matrix
    from .sidecar import write_coefficients

    try:
        image = imageio.read_image(args.input)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 3
    subsampling = {"444": "444", "420": "420"}[args.subsample]
    stream = encode(image, quality=args.quality, subsampling=subsampling)
    if args.out.endswith(".jpsc"):
        parsed = jfif_parse(stream)
        write_coefficients(
            args.out,
            parsed.grids,
            parsed.quantization,
            (parsed.height, parsed.width),
            parsed.mode,
        )
    else:
        with open(args.out, "wb") as fh:
            fh.write(stream)
    print(f"wrote {args.out} ({os.path.getsize(args.out)} bytes, quality {args.quality})")
    return 0


def cmd_decode(args) -> int:
    from . import imageio
    from .codec import (
        JfifError,
        TruncatedStreamError,
        decode,
        dequantize,
        inverse_blocks,
        planar_to_samples,
        psnr,
    )
    from .codec.color import PlanarImage

    try:
        with open(args.input, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 3

    try:
        if data[:8] == b"JPSCOF1\n":
            from .sidecar import read_coefficients

            side = read_coefficients(args.input)
            planes = tuple(
                inverse_blocks(dequantize(g, side["quantization"][ti]))
                for g, ti in zip(side["grids"], side["table_index"])
            )
            planar = PlanarImage(planes, *side["dims"], side["mode"])
            image = planar_to_samples(planar)
        else:
            image = decode(data)
    except TruncatedStreamError as exc:
        print(f"error: truncated stream: {exc}", file=sys.stderr)
        return 3
    except (JfifError, ValueError) as exc:
        print(f"error: cannot parse {args.input}: {exc}", file=sys.stderr)
        return 3

    imageio.write_image(args.out, image)
    print(f"wrote {args.out}")
    if args.reference:
        try:
            reference = imageio.read_image(args.reference)
        except (OSError, ValueError) as exc:
            print(f"error: cannot read {args.reference}: {exc}", file=sys.stderr)
            return 3
        import numpy as np

        value = psnr(reference, np.clip(np.round(image), 0, 255))
        print(f"PSNR vs {args.reference}: {value:.2f} dB")
    return 0


def cmd_verify(args) -> int:
    from .verify import run_checks

    sizes = tuple(int(s) for s in args.sizes.split(","))
    results = run_checks(seed=args.seed, sizes=sizes, inject_fault=args.inject_fault)
    failed = False
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(
            f"{status}  {result.name:24s} max deviation {result.deviation:.3e}"
            f" (tolerance {result.tolerance:.0e})"
        )
        failed = failed or not result.passed
    return 1 if failed else 0


def cmd_relu_sweep(args) -> int:
    from .jdr import relu_rmse_sweep

    if args.blocks < 1:
        print("error: --blocks must be >= 1", file=sys.stderr)
        return 2
    rows = relu_rmse_sweep(args.blocks, seed=args.seed)
    _write_rows(rows, ["m", "rmse_asm", "rmse_naive"], args.format, args.out, "relu-sweep")
    return 0


def cmd_bench(args) -> int:
    from .bench import run_benchmarks

    rows = run_benchmarks(seed=args.seed, reps=args.reps, size=args.size)
    for row in rows:
        row["throughput"] = f"{row['throughput']:.1f}"
    _write_rows(rows, ["operation", "domain", "throughput"], args.format, args.out, "bench")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jpegspace",
        description="JPEG codec, linear-map verification, and coefficient-space operators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="compress a PGM/PPM file to JFIF or a .jpsc sidecar")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--quality", type=int, default=75, choices=range(1, 101), metavar="1..100")
    p.add_argument("--subsample", choices=["444", "420"], default="444")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decompress JFIF or a .jpsc sidecar to PGM/PPM")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--reference", help="original image; prints PSNR when given")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("verify", help="run the equivalence and theorem checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", default="8,16,24,32", help="comma-separated square sizes")
    p.add_argument("--inject-fault", action="store_true",
                   help="perturb the exploded convolution to prove checks catch errors")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("relu-sweep", help="RMSE of masked vs naive ReLU per threshold")
    p.add_argument("--blocks", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_relu_sweep)

    p = sub.add_parser("bench", help="pixel vs coefficient-space throughput")
    p.add_argument("--reps", type=int, default=9)
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
