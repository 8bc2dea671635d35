import math
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import run_team
from ompcore.data_env import (
    UninitializedPrivateError,
    Var,
    copyprivate_collect,
    copyprivate_publish,
    lastprivate_writeback,
    make_firstprivate,
    make_private,
    reduction_begin,
    reduction_combine,
    reduction_end,
    reduction_identity,
)
from ompcore.directives import ScheduleSpec
from ompcore.runtime import omp_get_thread_num
from ompcore.worksharing import scheduled_range, single_begin

# -- private ------------------------------------------------------------------

def test_private_is_per_thread_and_outer_unaffected():
    outer = 7
    locals_seen = []
    lock = threading.Lock()

    def block():
        cell = make_private()
        cell.set(omp_get_thread_num())
        with lock:
            locals_seen.append(cell.get())

    run_team(block, 4)
    assert sorted(locals_seen) == [0, 1, 2, 3]
    assert outer == 7


def test_private_strict_read_before_write():
    cell = make_private(strict=True)
    with pytest.raises(UninitializedPrivateError):
        cell.get()
    cell.set(3)
    assert cell.get() == 3


def test_private_permissive_default_value():
    assert make_private().get() is None
    assert make_private(int).get() == 0
    assert make_private(list).get() == []
    assert make_private(int).assigned is False


# -- firstprivate ---------------------------------------------------------------

def test_firstprivate_copies_are_independent():
    outer = [1, 2]
    lengths = []
    lock = threading.Lock()

    def block():
        mine = make_firstprivate(outer)
        mine.append(3)
        with lock:
            lengths.append(len(mine))

    run_team(block, 4)
    assert lengths == [3, 3, 3, 3]
    assert outer == [1, 2]


def test_firstprivate_of_scalar():
    assert make_firstprivate(5) == 5


def test_firstprivate_is_shallow():
    nested = {"inner": []}
    copy1 = make_firstprivate(nested)
    copy2 = make_firstprivate(nested)
    assert copy1 is not nested
    copy1["inner"].append("x")  # nested element is shared between copies
    assert copy2["inner"] == ["x"]
    assert nested["inner"] == ["x"]


def test_firstprivate_uncopyable_value():
    class Stubborn:
        def __copy__(self):
            raise RuntimeError("no copies")

    with pytest.raises(TypeError):
        make_firstprivate(Stubborn())


# -- lastprivate ----------------------------------------------------------------

def test_lastprivate_writeback_cases():
    target = Var(99)
    lastprivate_writeback(False, 1, target)
    assert target.value == 99  # empty loop leaves the target unchanged
    lastprivate_writeback(True, 42, target)
    assert target.value == 42


def test_lastprivate_through_loop_single_thread():
    target = Var(None)

    def block():
        rng = scheduled_range((0, 8, 1))
        local = None
        for i in rng:
            local = i * i
        lastprivate_writeback(rng.is_last_iteration(), local, target)

    run_team(block, 1)
    assert target.value == 49


def test_lastprivate_through_loop_team():
    target = Var(None)

    def block():
        rng = scheduled_range((0, 20, 1), ScheduleSpec("static", 2), nowait=True)
        local = None
        for i in rng:
            local = (omp_get_thread_num(), i)
        lastprivate_writeback(rng.is_last_iteration(), local, target)

    run_team(block, 4)
    assert target.value == (1, 19)  # thread 1 owns iteration 19


# -- reductions -----------------------------------------------------------------

def test_identities():
    assert reduction_identity("+") == 0
    assert reduction_identity("-") == 0
    assert reduction_identity("*") == 1
    assert reduction_identity("min") == math.inf
    assert reduction_identity("max") == -math.inf
    assert reduction_identity("&") == -1
    assert reduction_identity("|") == 0
    assert reduction_identity("^") == 0
    assert reduction_identity("&&") is True
    assert reduction_identity("||") is False
    with pytest.raises(ValueError):
        reduction_identity("%")


def sequential_fold(op, initial, contributions):
    ops = {
        "+": lambda a, b: a + b,
        "-": lambda a, b: a - b,
        "*": lambda a, b: a * b,
        "min": min,
        "max": max,
        "&": lambda a, b: a & b,
        "|": lambda a, b: a | b,
        "^": lambda a, b: a ^ b,
        "&&": lambda a, b: a and b,
        "||": lambda a, b: a or b,
    }
    value = initial
    for c in contributions:
        value = ops[op](value, c)
    return value


def parallel_reduce(op, initial, contributions, threads):
    target = Var(initial)

    def block():
        slot = reduction_begin(op, target)
        for i in scheduled_range((0, len(contributions), 1), ScheduleSpec("dynamic")):
            slot.accumulate(contributions[i])
        reduction_end(slot)

    run_team(block, threads)
    return target.value


def test_reduction_max_small_case():
    assert parallel_reduce("max", -math.inf, [3, 9, 2], 2) == 9


def test_reduction_empty_contributions_keep_target():
    assert parallel_reduce("+", 17, [], 4) == 17
    assert parallel_reduce("*", 3.5, [], 2) == 3.5


def test_reduction_subtraction_matches_sequential():
    values = [5, 1, 7, 2, 9, 4]
    assert parallel_reduce("-", 100, values, 3) == sequential_fold("-", 100, values)


@pytest.mark.parametrize("op", ["+", "-", "*", "min", "max", "&", "|", "^"])
@pytest.mark.parametrize("threads", [1, 2, 8])
def test_reduction_integer_ops_exact(op, threads):
    values = [((7 * k) % 23) - 11 for k in range(50)]
    initial = 13 if op not in ("*",) else 1
    assert parallel_reduce(op, initial, values, threads) == sequential_fold(
        op, initial, values)


@pytest.mark.parametrize("op", ["&&", "||"])
def test_reduction_boolean_ops_exact(op):
    for pattern in ([True] * 10, [False] * 10, [True, False] * 5, []):
        initial = op == "&&"
        assert parallel_reduce(op, initial, list(pattern), 4) == sequential_fold(
            op, initial, list(pattern))


@pytest.mark.parametrize("threads", [1, 2, 8])
def test_reduction_float_sum_tolerance(threads):
    values = [((k * 0.37) % 5.0) - 2.0 for k in range(200)]
    expected = sequential_fold("+", 0.0, values)
    got = parallel_reduce("+", 0.0, values, threads)
    assert got == pytest.approx(expected, rel=1e-12)


def test_pi_style_reduction_thread_independent():
    n = 10_000
    w = 1.0 / n

    def estimate(threads):
        target = Var(0.0)

        def block():
            slot = reduction_begin("+", target)
            for i in scheduled_range((0, n, 1)):
                x = (i + 0.5) * w
                slot.local += 4.0 / (1.0 + x * x)
            reduction_end(slot)

        run_team(block, threads)
        return target.value * w

    results = [estimate(t) for t in (1, 2, 8)]
    for r in results[1:]:
        assert r == pytest.approx(results[0], rel=1e-12)
    assert results[0] == pytest.approx(math.pi, abs=1e-6)


@given(
    op=st.sampled_from(["+", "-", "*", "min", "max"]),
    values=st.lists(st.integers(min_value=-50, max_value=50), max_size=40),
    threads=st.sampled_from([1, 2, 4]),
)
@settings(max_examples=60, deadline=None)
def test_reduction_equivalence_property(op, values, threads):
    initial = 1 if op == "*" else 0
    assert parallel_reduce(op, initial, values, threads) == sequential_fold(
        op, initial, values)


def test_reduction_end_requires_target():
    with pytest.raises(ValueError):
        reduction_end(reduction_begin("+"))


def test_reduction_combine_is_pure():
    slot = reduction_begin("+")
    slot.accumulate(5)
    assert reduction_combine(slot, 10) == 15
    assert reduction_combine(slot, 10) == 15


# -- copyprivate ----------------------------------------------------------------

def test_copyprivate_broadcast_to_team():
    seen = []
    lock = threading.Lock()

    def block():
        mine = make_firstprivate(0)
        with single_begin() as first:
            if first:
                mine += 1
                copyprivate_publish(mine)
        mine = copyprivate_collect()
        with lock:
            seen.append(mine)

    run_team(block, 4)
    assert seen == [1, 1, 1, 1]


def test_copyprivate_single_thread():
    def block():
        with single_begin() as first:
            assert first
            copyprivate_publish(("payload", 42))
        assert copyprivate_collect() == ("payload", 42)

    run_team(block, 1)


def test_copyprivate_many_rounds_no_stale_values():
    failures = []
    lock = threading.Lock()

    def block():
        for round_no in range(100):
            with single_begin() as first:
                if first:
                    copyprivate_publish((round_no, omp_get_thread_num()))
            got_round, _ = copyprivate_collect()
            if got_round != round_no:
                with lock:
                    failures.append((round_no, got_round))

    run_team(block, 4)
    assert failures == []


def test_copyprivate_double_publish_rejected():
    def block():
        with single_begin() as first:
            if first:
                copyprivate_publish(1)
                with pytest.raises(RuntimeError):
                    copyprivate_publish(2)
        copyprivate_collect()

    run_team(block, 2)


def test_copyprivate_outside_single_rejected():
    def block():
        with pytest.raises(RuntimeError):
            copyprivate_publish(1)

    run_team(block, 1)
