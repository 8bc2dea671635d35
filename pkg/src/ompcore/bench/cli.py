"""Command-line entry point for the benchmark harness."""

from __future__ import annotations

import argparse
import sys

from ..directives import parse_schedule
from .harness import BENCH_NAMES, BenchConfig, ChecksumError, sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Run a benchmark kernel over a sweep of thread counts "
                    "and write per-run timings as CSV.",
    )
    parser.add_argument("--bench", required=True, choices=BENCH_NAMES,
                        help="kernel to run")
    parser.add_argument("--size", type=int, default=None,
                        help="problem size: intervals (pi/quad), matrix "
                             "dimension (jacobi), n (fib), characters (wordcount)")
    parser.add_argument("--threads", default="1",
                        help="comma-separated thread counts, e.g. 1,2,4")
    parser.add_argument("--repeats", type=int, default=10,
                        help="timed runs per thread count (default 10)")
    parser.add_argument("--schedule", default="static",
                        help="loop schedule kind[,chunk] (default static)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for input generation")
    parser.add_argument("--out", default="-",
                        help="CSV output path, '-' for stdout (default)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = [int(t) for t in args.threads.split(",") if t.strip()]
        config = BenchConfig(
            bench=args.bench,
            size=args.size,
            threads=threads,
            repeats=args.repeats,
            schedule=parse_schedule(args.schedule),
            seed=args.seed,
            out=args.out,
        )
    except ValueError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2
    try:
        results = sweep(config)
    except ChecksumError as exc:
        print(f"bench: checksum mismatch: {exc}", file=sys.stderr)
        return 1
    for result in results:
        print(f"# {result.bench} threads={result.threads} "
              f"mean={result.mean_seconds:.6f}s stddev={result.stddev_seconds:.6f}s "
              f"checksum={result.checksum}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
