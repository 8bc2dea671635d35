"""Thread teams, per-thread context stacks, and the public API functions.

Every thread that touches the runtime owns a :class:`TeamContext`: a stack of
:class:`TeamRecord` region entries whose bottom record is an implicit
single-thread region, so the query functions work anywhere in a program.
Threads created outside the runtime get a fresh context on first use and act
as independent initial threads.

Configuration is read from the environment once per context:

* ``OMP_NUM_THREADS`` - default team size (default: logical CPU count)
* ``OMP_NESTED`` - ``true``/``false`` (default false)
* ``OMP_SCHEDULE`` - ``kind[,chunk]`` used by ``schedule(runtime)`` loops
* ``OMP_STACKSIZE`` - worker stack size, e.g. ``512k``, ``64m``, ``1g``
"""

from __future__ import annotations

import os
import sys
import threading
import time
from collections import deque
from dataclasses import dataclass, field, replace

from .directives import ScheduleSpec, parse_schedule

__all__ = [
    "ControlVars",
    "TeamRecord",
    "TeamContext",
    "RegionOutcome",
    "ensure_context",
    "current_record",
    "parallel_run",
    "omp_set_num_threads",
    "omp_get_max_threads",
    "omp_get_thread_num",
    "omp_get_num_threads",
    "omp_in_parallel",
    "omp_set_nested",
    "omp_get_nested",
    "omp_get_wtime",
]

_TLS = threading.local()
_SPAWN_LOCK = threading.Lock()  # threading.stack_size() is process-global


@dataclass
class ControlVars:
    """Per-context control variables."""

    requested_num_threads: int
    nested_enabled: bool = False
    runtime_schedule: ScheduleSpec = field(default_factory=lambda: ScheduleSpec("static"))
    stack_size: int | None = None


def _warn(message: str) -> None:
    print(f"ompcore: warning: {message}", file=sys.stderr)


def _parse_stack_size(value: str) -> int:
    value = value.strip().lower()
    scale = 1
    suffixes = {"b": 1, "k": 1024, "m": 1024 ** 2, "g": 1024 ** 3}
    if value and value[-1] in suffixes:
        scale = suffixes[value[-1]]
        value = value[:-1]
    size = int(value) * scale
    if size <= 0:
        raise ValueError("stack size must be positive")
    return size


def _control_vars_from_env() -> ControlVars:
    cv = ControlVars(requested_num_threads=os.cpu_count() or 1)

    raw = os.environ.get("OMP_NUM_THREADS")
    if raw is not None:
        try:
            n = int(raw)
            if n < 1:
                raise ValueError
            cv.requested_num_threads = n
        except ValueError:
            _warn(f"ignoring malformed OMP_NUM_THREADS={raw!r}")

    raw = os.environ.get("OMP_NESTED")
    if raw is not None:
        if raw.lower() in ("true", "false"):
            cv.nested_enabled = raw.lower() == "true"
        else:
            _warn(f"ignoring malformed OMP_NESTED={raw!r}")

    raw = os.environ.get("OMP_SCHEDULE")
    if raw is not None:
        try:
            cv.runtime_schedule = parse_schedule(raw)
        except ValueError:
            _warn(f"ignoring malformed OMP_SCHEDULE={raw!r}")

    raw = os.environ.get("OMP_STACKSIZE")
    if raw is not None:
        try:
            cv.stack_size = _parse_stack_size(raw)
        except ValueError:
            _warn(f"ignoring malformed OMP_STACKSIZE={raw!r}")

    return cv


class TeamRecord:
    """One team member's view of a parallel region.

    All members of a team share the same lock, barrier, task queue, shared
    table, and error list; ``thread_index`` distinguishes the members.
    """

    __slots__ = (
        "thread_index",
        "team_size",
        "team_lock",
        "team_barrier",
        "task_queue",
        "shared_table",
        "errors",
        "construct_seq",
        "last_single_seq",
    )

    def __init__(self, thread_index, team_size, team_lock, team_barrier,
                 task_queue, shared_table, errors):
        self.thread_index = thread_index
        self.team_size = team_size
        self.team_lock = team_lock
        self.team_barrier = team_barrier
        self.task_queue = task_queue
        self.shared_table = shared_table
        self.errors = errors
        # Per-member worksharing construct counter; members of a team reach
        # the same constructs in the same order, so equal counts identify
        # the same construct instance in the shared table.
        self.construct_seq = 0
        self.last_single_seq = None


def _make_team_records(team_size: int) -> list[TeamRecord]:
    lock = threading.Lock()
    barrier = threading.Barrier(team_size)
    queue: deque = deque()
    table: dict = {}
    errors: list = []
    return [
        TeamRecord(i, team_size, lock, barrier, queue, table, errors)
        for i in range(team_size)
    ]


@dataclass
class TeamContext:
    """Thread-local stack of region records plus control variables."""

    stack: list[TeamRecord]
    icv: ControlVars

    @property
    def record(self) -> TeamRecord:
        return self.stack[-1]


@dataclass
class RegionOutcome:
    """Result of a parallel region: per-member failures, if any."""

    caught_errors: list[tuple[int, str]] = field(default_factory=list)

    def raise_if_errors(self) -> None:
        if self.caught_errors:
            details = "; ".join(f"thread {i}: {msg}" for i, msg in self.caught_errors)
            raise RuntimeError(f"parallel region failed: {details}")


def ensure_context() -> TeamContext:
    """Return the calling thread's context, creating it on first use.

    The fresh context contains a single implicit one-thread region, so the
    API functions behave sensibly outside any explicit parallel region.
    """
    ctx = getattr(_TLS, "context", None)
    if ctx is None:
        ctx = TeamContext(stack=_make_team_records(1), icv=_control_vars_from_env())
        _TLS.context = ctx
    return ctx


def current_record() -> TeamRecord:
    """The innermost region record of the calling thread."""
    return ensure_context().record


def _start_thread(target, name: str, stack_size: int | None) -> threading.Thread:
    # stack_size() is process-global and takes effect at start(): serialize
    # set/start/restore so concurrent spawns cannot observe each other's size.
    with _SPAWN_LOCK:
        old = None
        if stack_size is not None:
            old = threading.stack_size()
            threading.stack_size(stack_size)
        try:
            thread = threading.Thread(target=target, name=name, daemon=True)
            thread.start()
        finally:
            if stack_size is not None:
                threading.stack_size(old)
    return thread


def _run_member(record: TeamRecord, block) -> None:
    from .tasking import drain_at_region_end

    try:
        block()
    except BaseException as exc:  # contain member failures inside the region
        record.errors.append((record.thread_index, f"{type(exc).__name__}: {exc}"))
        # A member that died may never reach barriers its teammates wait on;
        # breaking the barrier turns a silent deadlock into contained errors.
        record.team_barrier.abort()
    finally:
        drain_at_region_end(record)


def parallel_run(block, num_threads: int | None = None,
                 if_value: bool | None = None) -> RegionOutcome:
    """Execute ``block`` once per member of a new thread team.

    Team size is 1 when ``if_value`` is false or when nesting inside an
    active team with nesting disabled; otherwise ``num_threads`` or the
    context's requested thread count. The caller participates as thread 0
    and only ``team_size - 1`` worker threads are created. Member failures
    are contained and reported through :class:`RegionOutcome`; pending tasks
    are drained before the region ends.
    """
    if num_threads is not None and num_threads < 1:
        raise ValueError("num_threads must be >= 1")
    ctx = ensure_context()

    if if_value is not None and not if_value:
        team_size = 1
    elif any(r.team_size > 1 for r in ctx.stack) and not ctx.icv.nested_enabled:
        team_size = 1
    else:
        team_size = num_threads if num_threads is not None else ctx.icv.requested_num_threads

    records = _make_team_records(team_size)
    errors = records[0].errors

    workers = []
    for index in range(1, team_size):
        worker_ctx = TeamContext(stack=[*ctx.stack, records[index]], icv=replace(ctx.icv))
        record = records[index]

        def worker_main(worker_ctx=worker_ctx, record=record):
            _TLS.context = worker_ctx
            _run_member(record, block)

        workers.append(
            _start_thread(worker_main, f"ompcore-worker-{index}", ctx.icv.stack_size)
        )

    ctx.stack.append(records[0])
    try:
        _run_member(records[0], block)
    finally:
        for worker in workers:
            worker.join()
        ctx.stack.pop()

    return RegionOutcome(sorted(errors))


def omp_set_num_threads(n: int) -> None:
    """Set the team size used by subsequent parallel regions."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("number of threads must be a positive integer")
    ensure_context().icv.requested_num_threads = n


def omp_get_max_threads() -> int:
    return ensure_context().icv.requested_num_threads


def omp_get_thread_num() -> int:
    """This thread's index within the innermost team (0 outside regions)."""
    return current_record().thread_index


def omp_get_num_threads() -> int:
    """Size of the innermost team (1 outside regions)."""
    return current_record().team_size


def omp_in_parallel() -> bool:
    return any(r.team_size > 1 for r in ensure_context().stack)


def omp_set_nested(flag: bool) -> None:
    ensure_context().icv.nested_enabled = bool(flag)


def omp_get_nested() -> bool:
    return ensure_context().icv.nested_enabled


def omp_get_wtime() -> float:
    """Monotonic wall-clock time in seconds."""
    return time.perf_counter()
