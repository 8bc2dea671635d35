"""Explicit tasks: deferred execution through the team's shared queue.

Submitted tasks go into a FIFO queue shared by the whole team; any member
may execute them. ``taskwait`` drains the queue until it is observed empty,
and every member drains it again when its region block finishes, so no task
survives its region.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .runtime import TeamRecord, ensure_context

__all__ = ["Task", "task_submit", "taskwait", "drain_at_region_end"]


@dataclass
class Task:
    """A unit of deferred work; the body closes over its data environment."""

    body: Callable[[], object]


def _execute(task: Task, record: TeamRecord) -> None:
    try:
        task.body()
    except BaseException as exc:  # task failures are contained like region failures
        record.errors.append((record.thread_index, f"{type(exc).__name__}: {exc}"))


def task_submit(body: Callable[[], object], if_value: bool | None = None) -> None:
    """Enqueue ``body`` for deferred execution by the current team.

    With a false ``if_value`` the body runs synchronously on the caller
    instead of being enqueued.
    """
    record = ensure_context().record
    if if_value is not None and not if_value:
        _execute(Task(body), record)
        return
    with record.team_lock:
        record.task_queue.append(Task(body))


def _drain(record: TeamRecord) -> None:
    while True:
        with record.team_lock:
            if not record.task_queue:
                return
            task = record.task_queue.popleft()
        _execute(task, record)


def taskwait() -> None:
    """Execute queued tasks until the queue is observed empty.

    Tasks spawned while draining are drained too. Note that the whole shared
    queue is consumed, not only this task's children.
    """
    _drain(ensure_context().record)


def drain_at_region_end(record: TeamRecord) -> None:
    """Drain the team queue; run by every member after its region block."""
    _drain(record)
