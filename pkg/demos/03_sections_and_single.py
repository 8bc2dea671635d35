"""Sections, single, barriers, and critical regions.

Sections hand each block to exactly one thread. Single picks the first
thread to arrive. Both end at the team barrier unless nowait is requested,
and copyprivate broadcasts the single thread's values to everyone else.
"""

import threading

from ompcore import (
    barrier,
    copyprivate_collect,
    copyprivate_publish,
    critical_section,
    make_firstprivate,
    omp_get_thread_num,
    parallel_run,
    section_try,
    sections_begin,
    single_begin,
)

lock = threading.Lock()


# Three section blocks, four threads: each block runs exactly once, on
# whichever thread claims it first.
def sections_block():
    with sections_begin(3) as state:
        for sid in range(3):
            if section_try(state, sid):
                with lock:
                    print(f"  section {sid} ran on thread {omp_get_thread_num()}")


print("sections:")
parallel_run(sections_block, num_threads=4).raise_if_errors()


# single + copyprivate: one thread computes, everyone receives.
def single_block():
    x = make_firstprivate(100)
    with single_begin() as first:
        if first:
            x += 1
            print(f"  thread {omp_get_thread_num()} computed x = {x}")
            copyprivate_publish(x)
    x = copyprivate_collect()
    with lock:
        print(f"  thread {omp_get_thread_num()} received x = {x}")


print("\nsingle with copyprivate broadcast:")
parallel_run(single_block, num_threads=4).raise_if_errors()


# A barrier is a meeting point: writes before it are visible after it.
def barrier_block():
    slots[omp_get_thread_num()] = omp_get_thread_num() * 11
    barrier()
    # every member sees all four writes now
    assert slots == [0, 11, 22, 33]


slots = [None] * 4
parallel_run(barrier_block, num_threads=4).raise_if_errors()
print("\nbarrier: all members observed", slots)


# critical regions serialize access to shared state; unnamed regions share
# one lock, named regions get independent ones.
counter = {"value": 0}


def critical_block():
    for _ in range(25_000):
        with critical_section():
            counter["value"] += 1


parallel_run(critical_block, num_threads=4).raise_if_errors()
print("\ncritical-protected counter:", counter["value"], "(expected 100000)")
