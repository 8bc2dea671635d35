"""Benchmark kernels and the `bench` command-line harness."""

from .harness import (
    BENCH_NAMES,
    CSV_HEADER,
    DEFAULT_SIZES,
    BenchConfig,
    BenchResult,
    ChecksumError,
    checksum_of,
    run_once,
    sweep,
)
from .kernels import (
    JacobiResult,
    fib_sequential,
    generate_system,
    generate_text,
    jacobi_sequential,
    jacobi_solve,
    pi_sequential,
    quad_sequential,
    run_fib,
    run_jacobi,
    run_pi,
    run_quad,
    run_wordcount,
    wordcount_sequential,
)

__all__ = [
    "BENCH_NAMES",
    "CSV_HEADER",
    "DEFAULT_SIZES",
    "BenchConfig",
    "BenchResult",
    "ChecksumError",
    "checksum_of",
    "run_once",
    "sweep",
    "JacobiResult",
    "fib_sequential",
    "generate_system",
    "generate_text",
    "jacobi_sequential",
    "jacobi_solve",
    "pi_sequential",
    "quad_sequential",
    "run_fib",
    "run_jacobi",
    "run_pi",
    "run_quad",
    "run_wordcount",
    "wordcount_sequential",
]
