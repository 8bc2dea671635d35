"""Data-sharing helpers: private copies, last-iteration write-back,
reductions, and copyprivate broadcast."""

from __future__ import annotations

import copy
import math
import threading
from dataclasses import dataclass
from typing import Any, Callable

from .runtime import ensure_context
from .worksharing import critical_section

__all__ = [
    "Var",
    "PrivateCell",
    "UninitializedPrivateError",
    "make_private",
    "make_firstprivate",
    "lastprivate_writeback",
    "ReductionSlot",
    "reduction_identity",
    "reduction_begin",
    "reduction_combine",
    "reduction_end",
    "copyprivate_publish",
    "copyprivate_collect",
]

_UNSET = object()


class Var:
    """A one-slot shared box, used as the target of reductions and
    lastprivate write-backs."""

    __slots__ = ("value",)

    def __init__(self, value: Any = None):
        self.value = value

    def __repr__(self) -> str:
        return f"Var({self.value!r})"


class UninitializedPrivateError(RuntimeError):
    """Strict-mode read of a private binding before any assignment."""


class PrivateCell:
    """A per-thread binding that starts uninitialized.

    Reading before the first assignment raises in strict mode; otherwise it
    returns the declared type's default value (or None).
    """

    __slots__ = ("_value", "_var_type", "_strict")

    def __init__(self, var_type: type | None = None, strict: bool = False):
        self._value = _UNSET
        self._var_type = var_type
        self._strict = strict

    def get(self):
        if self._value is _UNSET:
            if self._strict:
                raise UninitializedPrivateError("private variable read before assignment")
            return self._var_type() if self._var_type is not None else None
        return self._value

    def set(self, value) -> None:
        self._value = value

    @property
    def assigned(self) -> bool:
        return self._value is not _UNSET


def make_private(var_type: type | None = None, strict: bool = False) -> PrivateCell:
    """A fresh per-thread binding in the uninitialized state."""
    return PrivateCell(var_type, strict)


def make_firstprivate(value):
    """A per-thread shallow copy of ``value``.

    Containers get a new top-level identity; nested elements stay shared.
    """
    try:
        return copy.copy(value)
    except Exception as exc:
        raise TypeError(f"firstprivate value is not copyable: {exc}") from exc


def lastprivate_writeback(is_last: bool, local_value, target: Var) -> None:
    """Assign ``local_value`` to ``target`` iff this member ran the
    sequentially-last iteration."""
    if is_last:
        target.value = local_value


def _logical_and(a, b):
    return a and b


def _logical_or(a, b):
    return a or b


# op -> (identity, accumulate(local, contribution), combine(target, local)).
# Subtraction accumulates with '-' but combines with '+': contributions are
# summed, matching the sequential left fold init - a - b - ...
_REDUCTIONS: dict[str, tuple[Any, Callable, Callable]] = {
    "+": (0, lambda a, b: a + b, lambda a, b: a + b),
    "-": (0, lambda a, b: a - b, lambda a, b: a + b),
    "*": (1, lambda a, b: a * b, lambda a, b: a * b),
    "min": (math.inf, min, min),
    "max": (-math.inf, max, max),
    "&": (-1, lambda a, b: a & b, lambda a, b: a & b),
    "|": (0, lambda a, b: a | b, lambda a, b: a | b),
    "^": (0, lambda a, b: a ^ b, lambda a, b: a ^ b),
    "&&": (True, _logical_and, _logical_and),
    "||": (False, _logical_or, _logical_or),
}


def reduction_identity(op: str):
    """The identity value for a reduction operator."""
    try:
        return _REDUCTIONS[op][0]
    except KeyError:
        raise ValueError(f"unsupported reduction operator {op!r}") from None


@dataclass
class ReductionSlot:
    """Per-thread accumulator for one reduction variable."""

    op: str
    identity: Any
    local: Any
    target: Var | None = None

    def accumulate(self, contribution) -> None:
        self.local = _REDUCTIONS[self.op][1](self.local, contribution)


def reduction_begin(op: str, target: Var | None = None) -> ReductionSlot:
    """Open a reduction: the slot's ``local`` starts at the identity."""
    identity = reduction_identity(op)
    return ReductionSlot(op=op, identity=identity, local=identity, target=target)


def reduction_combine(slot: ReductionSlot, current):
    """Pure combine step: ``current op slot.local``.

    Callers are responsible for mutual exclusion around the read-combine-
    write of the shared result (see :func:`reduction_end`).
    """
    return _REDUCTIONS[slot.op][2](current, slot.local)


def reduction_end(slot: ReductionSlot) -> None:
    """Fold this member's accumulator into ``slot.target`` under a critical
    region. Call exactly once per team member."""
    if slot.target is None:
        raise ValueError("reduction_end requires a slot with a target Var")
    with critical_section("__ompcore_reduction"):
        slot.target.value = reduction_combine(slot, slot.target.value)


def _copy_channel(record, create: bool):
    seq = record.last_single_seq
    if seq is None:
        raise RuntimeError("copyprivate used outside a single construct")
    key = ("copyprivate", seq)
    with record.team_lock:
        channel = record.shared_table.get(key)
        if channel is None:
            channel = {
                "cond": threading.Condition(record.team_lock),
                "ready": False,
                "value": None,
                "collected": 0,
            }
            record.shared_table[key] = channel
    return key, channel


def copyprivate_publish(values) -> None:
    """Broadcast the single-executing member's values to the team.

    Must be called inside the single block, by the member that was granted
    it, at most once per construct.
    """
    record = ensure_context().record
    key, channel = _copy_channel(record, create=True)
    with channel["cond"]:
        if channel["ready"]:
            raise RuntimeError("copyprivate_publish called twice in one single construct")
        channel["value"] = values
        channel["ready"] = True
        channel["cond"].notify_all()


def copyprivate_collect():
    """Return the values published in the current single construct.

    Called by every team member after the single scope (including the
    publisher); blocks until publication has happened.
    """
    record = ensure_context().record
    key, channel = _copy_channel(record, create=False)
    with channel["cond"]:
        channel["cond"].wait_for(lambda: channel["ready"])
        channel["collected"] += 1
        if channel["collected"] == record.team_size:
            record.shared_table.pop(key, None)
        return channel["value"]
