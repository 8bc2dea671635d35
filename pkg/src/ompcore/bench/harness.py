"""Benchmark harness: thread sweeps with per-run validation and CSV output.

Every timed run's result is checked against the kernel's sequential oracle
before its row is recorded; a mismatch aborts the sweep. Timings are wall
clock and never asserted against - only correctness gates the CSV.
"""

from __future__ import annotations

import hashlib
import math
import statistics
import sys
import time
from dataclasses import dataclass, field

from ..directives import ScheduleSpec
from . import kernels

__all__ = [
    "BENCH_NAMES",
    "DEFAULT_SIZES",
    "CSV_HEADER",
    "ChecksumError",
    "BenchConfig",
    "BenchResult",
    "run_once",
    "checksum_of",
    "sweep",
]

BENCH_NAMES = ("pi", "quad", "jacobi", "fib", "wordcount")

DEFAULT_SIZES = {
    "pi": 10_000_000,
    "quad": 10_000_000,
    "jacobi": 512,
    "fib": 25,
    "wordcount": 1_000_000,
}

CSV_HEADER = "bench,threads,run,seconds,checksum"


class ChecksumError(RuntimeError):
    """A benchmark run disagreed with its sequential oracle."""


@dataclass
class BenchConfig:
    bench: str
    size: int | None = None
    threads: list[int] = field(default_factory=lambda: [1])
    repeats: int = 10
    schedule: ScheduleSpec = field(default_factory=lambda: ScheduleSpec("static"))
    seed: int = 0
    out: str = "-"

    def __post_init__(self):
        if self.bench not in BENCH_NAMES:
            raise ValueError(f"unknown benchmark {self.bench!r}")
        if self.size is None:
            self.size = DEFAULT_SIZES[self.bench]
        if self.size < 1:
            raise ValueError("size must be positive")
        if not self.threads or any(t < 1 for t in self.threads):
            raise ValueError("threads must be a non-empty list of positive integers")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")


@dataclass
class BenchResult:
    bench: str
    threads: int
    mean_seconds: float
    stddev_seconds: float
    checksum: str


def checksum_of(bench: str, value) -> str:
    """Stable textual checksum of a kernel result."""
    if bench == "wordcount":
        digest = hashlib.sha1()
        for word in sorted(value):
            digest.update(f"{word}:{value[word]}\n".encode())
        return digest.hexdigest()
    if bench == "jacobi":
        return repr(value.error)
    if bench == "fib":
        return str(value)
    return repr(value)


def _oracle(config: BenchConfig):
    if config.bench == "pi":
        return kernels.pi_sequential(config.size)
    if config.bench == "quad":
        return kernels.quad_sequential(config.size)
    if config.bench == "jacobi":
        return kernels.jacobi_sequential(config.size, seed=config.seed)
    if config.bench == "fib":
        return kernels.fib_sequential(config.size)
    return kernels.wordcount_sequential(
        kernels.generate_text(config.size, config.seed))


def run_once(config: BenchConfig, threads: int, text: str | None = None):
    if config.bench == "pi":
        return kernels.run_pi(config.size, threads=threads, schedule=config.schedule)
    if config.bench == "quad":
        return kernels.run_quad(config.size, threads=threads, schedule=config.schedule)
    if config.bench == "jacobi":
        return kernels.run_jacobi(config.size, seed=config.seed, threads=threads,
                                  schedule=config.schedule)
    if config.bench == "fib":
        return kernels.run_fib(config.size, threads=threads)
    return kernels.run_wordcount(text, threads=threads, schedule=config.schedule)


def _validate(config: BenchConfig, value, expected) -> None:
    bench = config.bench
    if bench in ("pi", "quad"):
        ok = math.isclose(value, expected, rel_tol=1e-12)
    elif bench == "jacobi":
        ok = (value.iterations == expected.iterations
              and math.isclose(value.error, expected.error, rel_tol=1e-12, abs_tol=1e-300))
    else:
        ok = value == expected
    if not ok:
        raise ChecksumError(
            f"{bench}: run result {checksum_of(bench, value)} does not match "
            f"oracle {checksum_of(bench, expected)}"
        )


def sweep(config: BenchConfig) -> list[BenchResult]:
    """Run the configured benchmark over every thread count.

    Each thread count gets one unrecorded warm-up run plus ``repeats`` timed
    runs; every run is validated against the sequential oracle. CSV rows
    (``bench,threads,run,seconds,checksum``) go to ``config.out`` ('-' for
    stdout). Returns one aggregate per thread count.
    """
    text = None
    if config.bench == "wordcount":
        text = kernels.generate_text(config.size, config.seed)
    expected = _oracle(config)

    rows: list[str] = [CSV_HEADER]
    results: list[BenchResult] = []
    for threads in config.threads:
        value = run_once(config, threads, text)   # warm-up
        _validate(config, value, expected)
        seconds: list[float] = []
        for run in range(config.repeats):
            start = time.perf_counter()
            value = run_once(config, threads, text)
            elapsed = time.perf_counter() - start
            _validate(config, value, expected)
            seconds.append(elapsed)
            rows.append(f"{config.bench},{threads},{run},{elapsed!r},"
                        f"{checksum_of(config.bench, value)}")
        results.append(BenchResult(
            bench=config.bench,
            threads=threads,
            mean_seconds=statistics.fmean(seconds),
            stddev_seconds=statistics.stdev(seconds) if len(seconds) > 1 else 0.0,
            checksum=checksum_of(config.bench, value),
        ))

    payload = "\n".join(rows) + "\n"
    if config.out == "-":
        sys.stdout.write(payload)
    else:
        with open(config.out, "w") as handle:
            handle.write(payload)
    return results
