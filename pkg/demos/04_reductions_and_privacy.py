"""Data sharing: private and firstprivate copies, reductions, lastprivate.

A reduction gives every thread a local accumulator starting at the
operator's identity; at the end each accumulator is folded into the shared
target under a critical region. The combine order varies between runs, so
floating-point results agree to rounding, not bit-for-bit with one order.
"""

import math

from ompcore import (
    ScheduleSpec,
    Var,
    lastprivate_writeback,
    make_firstprivate,
    make_private,
    omp_get_thread_num,
    parallel_run,
    reduction_begin,
    reduction_end,
    scheduled_range,
)

# private: fresh uninitialized binding per thread; the outer value is
# untouched. firstprivate: starts as a shallow copy of the outer value.
outer_list = [1, 2]


def privacy_block():
    mine = make_private(int)        # permissive default: int() == 0
    mine.set(mine.get() + omp_get_thread_num())
    copy = make_firstprivate(outer_list)
    copy.append(omp_get_thread_num())
    assert len(copy) == 3


parallel_run(privacy_block, num_threads=4).raise_if_errors()
print("outer list after the region (unchanged):", outer_list)

# The classic reduction: estimate pi by integrating 4/(1+x^2) over [0,1].
n = 1_000_000
w = 1.0 / n
estimate = Var(0.0)


def pi_block():
    slot = reduction_begin("+", estimate)
    for i in scheduled_range((0, n, 1), ScheduleSpec("static")):
        x = (i + 0.5) * w
        slot.local += 4.0 / (1.0 + x * x)
    reduction_end(slot)


parallel_run(pi_block, num_threads=4).raise_if_errors()
print(f"pi by midpoint rule: {estimate.value * w:.12f} "
      f"(error {abs(estimate.value * w - math.pi):.2e})")

# min/max reductions work the same way; identities are +/- infinity.
smallest = Var(math.inf)


def min_block():
    slot = reduction_begin("min", smallest)
    for i in scheduled_range((0, 1000, 1), ScheduleSpec("dynamic", 7)):
        slot.accumulate((i - 400) ** 2)
    reduction_end(slot)


parallel_run(min_block, num_threads=3).raise_if_errors()
print("min of (i-400)^2 over 0..999:", smallest.value)

# lastprivate: the value from the sequentially-last iteration wins,
# regardless of which thread happened to execute it.
last = Var(None)


def lastprivate_block():
    rng = scheduled_range((0, 16, 1), ScheduleSpec("static", 2), nowait=True)
    local = None
    for i in rng:
        local = i * i
    lastprivate_writeback(rng.is_last_iteration(), local, last)


parallel_run(lastprivate_block, num_threads=4).raise_if_errors()
print("lastprivate result (15*15):", last.value)
