"""Thread teams and the fork-join lifecycle.

A parallel region runs its block once per team member. The caller becomes
thread 0; the other members are fresh worker threads that join before the
region returns. Everything defined before the block is shared unless you
privatize it yourself (demo 04 covers that).
"""

import threading

from ompcore import (
    omp_get_num_threads,
    omp_get_thread_num,
    omp_in_parallel,
    omp_set_nested,
    parallel_run,
)

print("outside any region:",
      f"thread={omp_get_thread_num()} team={omp_get_num_threads()} "
      f"in_parallel={omp_in_parallel()}")

# Four members, each reporting its index. The order is whatever the
# scheduler gives us; the set of indices is always {0, 1, 2, 3}.
lock = threading.Lock()


def hello():
    with lock:
        print(f"  hello from thread {omp_get_thread_num()} "
              f"of {omp_get_num_threads()}")


print("\na team of 4:")
parallel_run(hello, num_threads=4)

# An if-value of False collapses the region to the caller alone.
print("\nwith if_value=False the block runs once, sequentially:")
parallel_run(hello, num_threads=4, if_value=False)

# Nested regions serialize unless nesting is enabled.
def inner():
    with lock:
        print(f"    inner team size: {omp_get_num_threads()}")


def outer():
    parallel_run(inner, num_threads=3)


print("\nnested region, nesting disabled (inner teams have 1 thread):")
parallel_run(outer, num_threads=2)

print("\nnested region, nesting enabled (inner teams have 3 threads):")
omp_set_nested(True)
parallel_run(outer, num_threads=2)
omp_set_nested(False)

# A failing member doesn't take the program down: the error is contained
# and reported in the region outcome.
def flaky():
    if omp_get_thread_num() == 1:
        raise ValueError("thread 1 always fails")


print("\ncontained failure:")
outcome = parallel_run(flaky, num_threads=3)
print("  caught:", outcome.caught_errors)
