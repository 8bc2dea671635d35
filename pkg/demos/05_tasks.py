"""Explicit tasks: deferred work in a shared queue.

task_submit wraps a callable and its captured data into the team's queue;
any member may execute it. taskwait drains the queue until it is observed
empty, and whatever is still queued when a region ends is drained before
the region returns.
"""

import sys
import threading

from ompcore import (
    omp_get_thread_num,
    parallel_run,
    single_begin,
    task_submit,
    taskwait,
)

lock = threading.Lock()


# Tasks submitted by one thread can run on any member of the team.
def spread_block():
    if omp_get_thread_num() == 0:
        for k in range(8):
            def body(k=k):
                with lock:
                    print(f"  task {k} executed by thread {omp_get_thread_num()}")
            task_submit(body)
    taskwait()


print("eight tasks, four threads:")
parallel_run(spread_block, num_threads=4).raise_if_errors()

# A false if-value runs the body immediately instead of queueing it.
order = []
task_submit(lambda: order.append("ran-now"), if_value=False)
order.append("after-submit")
print("\nif_value=False is synchronous:", order)

# The classic recursive pattern: every call spawns two child tasks and
# waits. Draining nests one frame set per outstanding task, so deep runs
# need a raised recursion limit (ompcore.bench.run_fib sizes a dedicated
# thread stack for exactly this reason).
sys.setrecursionlimit(50_000)


def fib(n):
    if n < 2:
        return n
    out = {}

    def left():
        out["a"] = fib(n - 1)

    def right():
        out["b"] = fib(n - 2)

    task_submit(left)
    task_submit(right)
    taskwait()
    return out["a"] + out["b"]


result = {}


def fib_block():
    with single_begin() as first:
        if first:
            result["fib(16)"] = fib(16)


parallel_run(fib_block, num_threads=2).raise_if_errors()
print("\nrecursive tasked fib:", result)
