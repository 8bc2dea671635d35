"""Benchmark kernels: pi, quad, jacobi, fib, and wordcount.

Numeric kernels iterate over fixed-size blocks and vectorize each block with
numpy, so the heavy work releases the GIL and the block partition (hence the
floating-point result) does not depend on the thread count. Each kernel has
an independent sequential oracle used by the harness to validate results
before timings are reported.
"""

from __future__ import annotations

import math
import random
import sys
from dataclasses import dataclass

import numpy as np

from ..data_env import Var, reduction_begin, reduction_end
from ..directives import ScheduleSpec
from ..runtime import _start_thread, ensure_context, omp_get_thread_num, parallel_run
from ..tasking import task_submit, taskwait
from ..worksharing import barrier, critical_section, scheduled_range, single_begin

__all__ = [
    "run_pi",
    "pi_sequential",
    "run_quad",
    "quad_sequential",
    "JacobiResult",
    "generate_system",
    "run_jacobi",
    "jacobi_solve",
    "jacobi_sequential",
    "run_fib",
    "fib_sequential",
    "generate_text",
    "run_wordcount",
    "wordcount_sequential",
]

_BLOCK = 1 << 16       # elements per vectorized block (pi/quad)
_ROW_BLOCK = 64        # matrix rows per block (jacobi)


def _blocks(n: int, block: int) -> int:
    return -(-n // block)


# -- pi: midpoint rule for the integral of 4/(1+x^2) over [0, 1] ------------

def _pi_block(k: int, n: int, w: float) -> float:
    lo = k * _BLOCK
    idx = np.arange(lo, min(n, lo + _BLOCK), dtype=np.float64)
    x = (idx + 0.5) * w
    return float(np.sum(4.0 / (1.0 + x * x)))


def run_pi(n: int, threads: int | None = None,
           schedule: ScheduleSpec | None = None) -> float:
    """Midpoint-rule estimate of pi over ``n`` intervals, computed by a
    parallel loop with a ``+`` reduction."""
    if n < 1:
        raise ValueError("n must be >= 1")
    w = 1.0 / n
    total = Var(0.0)
    nblocks = _blocks(n, _BLOCK)

    def region():
        slot = reduction_begin("+", total)
        for k in scheduled_range((0, nblocks, 1), schedule):
            slot.local += _pi_block(k, n, w)
        reduction_end(slot)

    parallel_run(region, num_threads=threads).raise_if_errors()
    return total.value * w


def pi_sequential(n: int) -> float:
    w = 1.0 / n
    return sum(_pi_block(k, n, w) for k in range(_blocks(n, _BLOCK))) * w


# -- quad: averaged sampling of 50/(pi*(2500*x^2+1)) over [0, 10] ------------

_QUAD_A, _QUAD_B = 0.0, 10.0


def _quad_block(k: int, n: int, h: float) -> float:
    lo = k * _BLOCK
    idx = np.arange(lo, min(n, lo + _BLOCK), dtype=np.float64)
    x = _QUAD_A + (idx + 0.5) * h
    return float(np.sum(50.0 / (math.pi * (2500.0 * x * x + 1.0))))


def run_quad(n: int, threads: int | None = None,
             schedule: ScheduleSpec | None = None) -> float:
    """Average-value estimate of the integral over ``n`` midpoint samples.

    The exact value is atan(500)/pi (about 0.4993634).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    h = (_QUAD_B - _QUAD_A) / n
    total = Var(0.0)
    nblocks = _blocks(n, _BLOCK)

    def region():
        slot = reduction_begin("+", total)
        for k in scheduled_range((0, nblocks, 1), schedule):
            slot.local += _quad_block(k, n, h)
        reduction_end(slot)

    parallel_run(region, num_threads=threads).raise_if_errors()
    return total.value * h


def quad_sequential(n: int) -> float:
    h = (_QUAD_B - _QUAD_A) / n
    return sum(_quad_block(k, n, h) for k in range(_blocks(n, _BLOCK))) * h


# -- jacobi: iterative solve of A x = b for a diagonally dominant A ----------

@dataclass
class JacobiResult:
    x: np.ndarray
    error: float        # max-norm of the last update
    iterations: int


def generate_system(dim: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Random system with guaranteed convergence: off-diagonal entries are
    uniform in [0, 1) and each diagonal is the row's off-diagonal sum + 1."""
    rng = np.random.default_rng(seed)
    a = rng.random((dim, dim))
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, a.sum(axis=1) + 1.0)
    b = rng.random(dim)
    return a, b


def run_jacobi(dim: int, max_iters: int = 1000, tol: float = 1e-6,
               seed: int = 0, threads: int | None = None,
               schedule: ScheduleSpec | None = None) -> JacobiResult:
    """Jacobi iteration on a generated system until the max-norm update
    drops below ``tol`` or ``max_iters`` is reached."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    a, b = generate_system(dim, seed)
    return jacobi_solve(a, b, max_iters=max_iters, tol=tol, threads=threads,
                        schedule=schedule)


def jacobi_solve(a: np.ndarray, b: np.ndarray, max_iters: int = 1000,
                 tol: float = 1e-6, threads: int | None = None,
                 schedule: ScheduleSpec | None = None) -> JacobiResult:
    """Solve ``a @ x = b`` by Jacobi iteration; row blocks are updated by a
    parallel loop.

    The update uses only previous-iteration values and the row blocks are
    fixed-size, so the iterate sequence is identical for every thread count.
    """
    dim = len(b)
    diag = np.diag(a).copy()
    nblocks = _blocks(dim, _ROW_BLOCK)
    team = threads if threads is not None else ensure_context().icv.requested_num_threads

    buffers = [np.zeros(dim), np.zeros(dim)]
    deltas = np.zeros(team)
    state = {"error": math.inf, "iterations": 0}

    def region():
        tid = omp_get_thread_num()
        for it in range(max_iters):
            src = buffers[it % 2]
            dst = buffers[1 - it % 2]
            local_delta = 0.0
            for k in scheduled_range((0, nblocks, 1), schedule, nowait=True):
                rows = slice(k * _ROW_BLOCK, min(dim, (k + 1) * _ROW_BLOCK))
                dst[rows] = (b[rows] - (a[rows] @ src - diag[rows] * src[rows])) / diag[rows]
                local_delta = max(local_delta, float(np.max(np.abs(dst[rows] - src[rows]))))
            deltas[tid] = local_delta
            barrier()                      # all deltas written
            delta = float(deltas.max())
            if tid == 0:
                state["error"] = delta
                state["iterations"] = it + 1
            barrier()                      # all members read before reuse
            if delta < tol:
                break

    parallel_run(region, num_threads=team).raise_if_errors()
    return JacobiResult(x=buffers[state["iterations"] % 2].copy(),
                        error=state["error"], iterations=state["iterations"])


def jacobi_sequential(dim: int, max_iters: int = 1000, tol: float = 1e-6,
                      seed: int = 0) -> JacobiResult:
    """Plain single-threaded Jacobi with the same blocking, for validation."""
    a, b = generate_system(dim, seed)
    diag = np.diag(a).copy()
    x = np.zeros(dim)
    error, iterations = math.inf, 0
    for it in range(max_iters):
        x_new = (b - (a @ x - diag * x)) / diag
        error = float(np.max(np.abs(x_new - x)))
        x = x_new
        iterations = it + 1
        if error < tol:
            break
    return JacobiResult(x=x, error=error, iterations=iterations)


# -- fib: recursive task-based Fibonacci -------------------------------------

def fib_sequential(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def _fib_tasked(n: int) -> int:
    if n < 2:
        return n
    out = {}

    def left():
        out["a"] = _fib_tasked(n - 1)

    def right():
        out["b"] = _fib_tasked(n - 2)

    task_submit(left)
    task_submit(right)
    taskwait()
    return out["a"] + out["b"]


def run_fib(n: int, threads: int | None = None) -> int:
    """Fibonacci via two recursive tasks per call, wrapped in a parallel
    region whose single construct issues the root call.

    Draining the task queue nests one Python frame set per outstanding task,
    so the computation runs on a dedicated thread with a stack sized to the
    task-tree and a raised recursion limit (the OMP_STACKSIZE idea).
    """
    if not 0 <= n <= 30:
        raise ValueError("n must be in 0..30")
    internal = max(fib_sequential(n + 1) - 1, 1)
    stack_bytes = min(1 << 30, max(32 << 20, internal * 8192))
    limit = internal * 6 + 10000
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)

    result = Var(0)
    outcome: list = []

    def main():
        ensure_context().icv.stack_size = stack_bytes

        def region():
            with single_begin() as first:
                if first:
                    result.value = _fib_tasked(n)

        outcome.append(parallel_run(region, num_threads=threads))

    runner = _start_thread(main, "ompcore-fib", stack_bytes)
    runner.join()
    if not outcome:
        raise RuntimeError("fib runner thread died before completing the region")
    outcome[0].raise_if_errors()
    return result.value


# -- wordcount ---------------------------------------------------------------

def generate_text(n_chars: int, seed: int = 0) -> str:
    """Random text of at least ``n_chars`` characters: words of 3..10
    lowercase letters, each followed by a newline with 10% probability."""
    rng = random.Random(seed)
    letters = "abcdefghijklmnopqrstuvwxyz"
    parts: list[str] = []
    size = 0
    while size < n_chars:
        word = "".join(rng.choice(letters) for _ in range(rng.randint(3, 10)))
        sep = "\n" if rng.random() < 0.1 else " "
        parts.append(word)
        parts.append(sep)
        size += len(word) + 1
    return "".join(parts)


def run_wordcount(text: str, threads: int | None = None,
                  schedule: ScheduleSpec | None = None) -> dict[str, int]:
    """Count word occurrences: each thread counts its share of the lines
    into a local table, then folds it into the shared table under a
    critical region."""
    lines = text.split("\n")
    counts: dict[str, int] = {}

    def region():
        local: dict[str, int] = {}
        for i in scheduled_range((0, len(lines), 1), schedule):
            for word in lines[i].split():
                local[word] = local.get(word, 0) + 1
        with critical_section():
            for word, c in local.items():
                counts[word] = counts.get(word, 0) + c

    parallel_run(region, num_threads=threads).raise_if_errors()
    return counts


def wordcount_sequential(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for word in text.split():
        counts[word] = counts.get(word, 0) + 1
    return counts
