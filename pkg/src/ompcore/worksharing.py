"""Worksharing constructs: loop distribution, sections, single, barrier,
and critical regions.

All constructs must be reached by every member of the innermost team, in the
same order, with the same arguments; shared bookkeeping lives in the team's
shared table keyed by a per-member construct counter that advances
identically on every member.

Unless ``nowait`` is requested, each construct ends at the team barrier: an
exhausted loop iterator blocks until all members finished iterating, and the
sections/single scopes block on exit.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass

from .directives import ScheduleSpec
from .runtime import TeamRecord, ensure_context

__all__ = [
    "LoopBounds",
    "ScheduledRange",
    "scheduled_range",
    "guided_chunk_size",
    "SectionsState",
    "sections_begin",
    "section_try",
    "SingleScope",
    "single_begin",
    "barrier",
    "critical_enter",
    "critical_exit",
    "critical_section",
]

_UNSET = object()


@dataclass(frozen=True)
class LoopBounds:
    """One ``(start, stop, step)`` triple per collapsed loop level.

    Iteration counts follow host range semantics, including negative steps;
    a zero step is rejected.
    """

    levels: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if not self.levels:
            raise ValueError("loop bounds need at least one level")
        for start, stop, step in self.levels:
            if step == 0:
                raise ValueError("loop step must not be zero")

    @classmethod
    def of(cls, bounds) -> "LoopBounds":
        """Accept ``(start, stop, step)`` or a tuple of such triples."""
        if isinstance(bounds, LoopBounds):
            return bounds
        bounds = tuple(bounds)
        if bounds and isinstance(bounds[0], int):
            bounds = (bounds,)
        return cls(tuple((int(s), int(e), int(st)) for s, e, st in bounds))

    @property
    def depth(self) -> int:
        return len(self.levels)

    def ranges(self) -> tuple[range, ...]:
        return tuple(range(s, e, st) for s, e, st in self.levels)

    def total(self) -> int:
        n = 1
        for r in self.ranges():
            n *= len(r)
        return n

    def decode(self, ordinal: int):
        """Map a flattened ordinal to the loop-variable value(s).

        Mixed-radix decomposition: the innermost level varies fastest.
        Returns a scalar for depth 1, a tuple otherwise.
        """
        ranges = self.ranges()
        digits = []
        for r in reversed(ranges):
            ordinal, digit = divmod(ordinal, len(r))
            digits.append(r[digit])
        digits.reverse()
        if len(digits) == 1:
            return digits[0]
        return tuple(digits)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def guided_chunk_size(remaining: int, team_size: int, chunk_min: int = 1) -> int:
    """Size of the next guided-schedule claim: max(ceil(remaining/T), min)."""
    return max(_ceil_div(remaining, team_size), chunk_min)


class ScheduledRange:
    """Iterator over one thread's share of a (possibly collapsed) loop.

    Yields loop-variable values (scalars for a single level, tuples under
    collapse). Each global iteration is yielded by exactly one team member;
    the union over the team is the full iteration space. Unless ``nowait``,
    the exhausted iterator waits at the team barrier before finishing.
    """

    def __init__(self, bounds, spec: ScheduleSpec | None = None, nowait: bool = False):
        ctx = ensure_context()
        record = ctx.record
        self.bounds = LoopBounds.of(bounds)
        self.nowait = nowait
        self.team = record
        self.last_yielded = _UNSET

        spec = spec or ScheduleSpec("static")
        if spec.kind == "runtime":
            spec = ctx.icv.runtime_schedule
        if spec.kind in ("auto", "runtime"):
            spec = ScheduleSpec("static", spec.chunk)
        self.spec = spec

        seq = record.construct_seq
        record.construct_seq += 1

        total = self.bounds.total()
        if spec.kind == "static":
            self._gen = self._static_gen(record, total, spec.chunk)
        elif spec.kind == "dynamic":
            self._gen = self._claim_gen(record, ("loop", seq), total,
                                        lambda remaining: spec.chunk or 1)
        elif spec.kind == "guided":
            chunk_min = spec.chunk or 1
            team = record.team_size
            self._gen = self._claim_gen(
                record, ("loop", seq), total,
                lambda remaining: guided_chunk_size(remaining, team, chunk_min))
        else:  # pragma: no cover - ScheduleSpec validates kinds
            raise ValueError(f"unsupported schedule {spec.kind!r}")

    def __iter__(self) -> "ScheduledRange":
        return self

    def __next__(self):
        value = next(self._gen)
        self.last_yielded = value
        return value

    def _finish(self):
        if not self.nowait:
            self.team.team_barrier.wait()

    def _static_gen(self, record: TeamRecord, total: int, chunk: int | None):
        # Default chunk gives each thread one contiguous block; explicit
        # chunks are dealt round-robin by thread index.
        team = record.team_size
        chunk = chunk or max(1, _ceil_div(total, team))
        block = record.thread_index
        while True:
            lo = block * chunk
            if lo >= total:
                break
            for ordinal in range(lo, min(lo + chunk, total)):
                yield self.bounds.decode(ordinal)
            block += team
        self._finish()

    def _claim_gen(self, record: TeamRecord, key, total: int, next_size):
        # Chunks are claimed from a shared counter under the team lock; the
        # last member to finish removes the counter from the shared table.
        with record.team_lock:
            state = record.shared_table.get(key)
            if state is None:
                state = {"next": 0, "done": 0}
                record.shared_table[key] = state
        while True:
            with record.team_lock:
                lo = state["next"]
                if lo >= total:
                    state["done"] += 1
                    if state["done"] == record.team_size:
                        record.shared_table.pop(key, None)
                    break
                size = next_size(total - lo)
                state["next"] = lo + size
            for ordinal in range(lo, min(lo + size, total)):
                yield self.bounds.decode(ordinal)
        self._finish()

    def is_last_iteration(self, last=_UNSET) -> bool:
        """True iff ``last`` (default: the last value this iterator yielded)
        is the sequentially-last iteration of the whole space."""
        if last is _UNSET:
            last = self.last_yielded
        total = self.bounds.total()
        if total == 0 or last is _UNSET or last is None:
            return False
        return last == self.bounds.decode(total - 1)


def scheduled_range(bounds, spec: ScheduleSpec | None = None,
                    nowait: bool = False) -> ScheduledRange:
    """Distribute a loop's iterations over the innermost team.

    ``bounds`` is a ``(start, stop, step)`` triple, or a tuple of triples for
    collapsed loop nests. Must be called by every team member with identical
    arguments.
    """
    return ScheduledRange(bounds, spec, nowait)


class SectionsState:
    """Tracks which section blocks have run; a scope with an exit barrier."""

    def __init__(self, total: int, nowait: bool):
        if total < 0:
            raise ValueError("section count must be >= 0")
        record = ensure_context().record
        self.total = total
        self.nowait = nowait
        self.team = record
        key = ("sections", record.construct_seq)
        record.construct_seq += 1
        with record.team_lock:
            state = record.shared_table.get(key)
            if state is None:
                state = {"executed": set(), "exited": 0}
                record.shared_table[key] = state
        self._key = key
        self._state = state

    def __enter__(self) -> "SectionsState":
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        record = self.team
        with record.team_lock:
            self._state["exited"] += 1
            if self._state["exited"] == record.team_size:
                record.shared_table.pop(self._key, None)
        if exc_type is None and not self.nowait:
            record.team_barrier.wait()
        return False


def sections_begin(total: int, nowait: bool = False) -> SectionsState:
    """Open a sections construct with ``total`` section blocks.

    Use as a context manager; leaving the scope waits at the team barrier
    unless ``nowait``.
    """
    return SectionsState(total, nowait)


def section_try(state: SectionsState, section_id: int) -> bool:
    """Claim section ``section_id``; true for exactly one caller per id."""
    if not 0 <= section_id < state.total:
        raise ValueError(f"section id {section_id} outside 0..{state.total - 1}")
    with state.team.team_lock:
        if section_id in state._state["executed"]:
            return False
        state._state["executed"].add(section_id)
        return True


class SingleScope:
    """Scope for a single construct; entering reports first arrival."""

    def __init__(self, nowait: bool):
        record = ensure_context().record
        self.nowait = nowait
        self.team = record
        seq = record.construct_seq
        record.construct_seq += 1
        record.last_single_seq = seq  # pairs copyprivate with this construct
        key = ("single", seq)
        with record.team_lock:
            state = record.shared_table.get(key)
            if state is None:
                state = {"claimed": False, "exited": 0}
                record.shared_table[key] = state
        self._key = key
        self._state = state

    def __enter__(self) -> bool:
        with self.team.team_lock:
            if self._state["claimed"]:
                return False
            self._state["claimed"] = True
            return True

    def __exit__(self, exc_type, exc, tb) -> bool:
        record = self.team
        with record.team_lock:
            self._state["exited"] += 1
            if self._state["exited"] == record.team_size:
                record.shared_table.pop(self._key, None)
        if exc_type is None and not self.nowait:
            record.team_barrier.wait()
        return False


def single_begin(nowait: bool = False) -> SingleScope:
    """Open a single construct: ``with single_begin() as first:``.

    ``first`` is true for exactly the first arriving member. Leaving the
    scope waits at the team barrier unless ``nowait``.
    """
    return SingleScope(nowait)


def barrier() -> None:
    """Wait until every member of the innermost team arrives."""
    current = ensure_context().record
    current.team_barrier.wait()


# Critical sections use one process-wide lock per name, so mutual exclusion
# holds across teams as well as within one. The locks are not reentrant;
# re-entering a held name from the same thread deadlocks.
_critical_registry: dict[str, threading.Lock] = {}
_critical_owner: dict[str, int] = {}
_registry_lock = threading.Lock()


def _critical_lock(name: str | None) -> tuple[str, threading.Lock]:
    key = name if name is not None else ""
    with _registry_lock:
        lock = _critical_registry.get(key)
        if lock is None:
            lock = threading.Lock()
            _critical_registry[key] = lock
        return key, lock


def critical_enter(name: str | None = None) -> None:
    """Enter the named critical region (unnamed regions share one name)."""
    key, lock = _critical_lock(name)
    lock.acquire()
    _critical_owner[key] = threading.get_ident()


def critical_exit(name: str | None = None) -> None:
    """Leave the named critical region; raises if not held by this thread."""
    key, lock = _critical_lock(name)
    if _critical_owner.get(key) != threading.get_ident():
        raise RuntimeError(f"critical_exit({name!r}) without matching critical_enter")
    del _critical_owner[key]
    lock.release()


@contextmanager
def critical_section(name: str | None = None):
    """``with critical_section():`` form of critical_enter/critical_exit."""
    critical_enter(name)
    try:
        yield
    finally:
        critical_exit(name)
