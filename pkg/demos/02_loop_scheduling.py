"""Loop distribution: static, dynamic, and guided schedules, plus collapse.

Every member of the team calls scheduled_range with the same bounds; each
gets an iterator over its own share of the iterations. The union of the
shares is always the full iteration space, each index exactly once.
"""

from ompcore import ScheduleSpec, omp_get_thread_num, parallel_run, scheduled_range


def show_assignment(title, bounds, spec, threads):
    per_thread = {}

    def block():
        per_thread[omp_get_thread_num()] = list(scheduled_range(bounds, spec))

    parallel_run(block, num_threads=threads).raise_if_errors()
    print(title)
    for tid in sorted(per_thread):
        print(f"  thread {tid}: {per_thread[tid]}")


# Static chunks are dealt round-robin: with N=20, chunk=2, T=4 the chunk
# owners repeat 0,1,2,3, 0,1,2,3, ...
show_assignment("static, chunk 2 (deterministic round-robin):",
                (0, 20, 1), ScheduleSpec("static", 2), threads=4)

# Without a chunk, static gives each thread one contiguous block.
show_assignment("\nstatic, default chunk (one block per thread):",
                (0, 20, 1), ScheduleSpec("static"), threads=4)

# Dynamic chunks go to whichever thread asks first; run this twice and the
# ownership will usually differ. The union is still exactly 0..19.
show_assignment("\ndynamic, chunk 3 (first come, first served):",
                (0, 20, 1), ScheduleSpec("dynamic", 3), threads=4)

# Guided starts with big chunks (remaining/T) and shrinks toward 1.
show_assignment("\nguided (shrinking chunks):",
                (0, 40, 1), ScheduleSpec("guided"), threads=4)

# collapse flattens a loop nest into one space: pass one (start, stop, step)
# triple per level and the iterator yields index tuples.
show_assignment("\ncollapsed 3x4 nest, static chunk 2:",
                ((0, 3, 1), (0, 4, 1)), ScheduleSpec("static", 2), threads=3)

# The sequentially-last iteration is what lastprivate uses (demo 04).
def last_owner():
    rng = scheduled_range((0, 20, 1), ScheduleSpec("static", 2))
    for _ in rng:
        pass
    if rng.is_last_iteration():
        print(f"\nthread {omp_get_thread_num()} ran the sequentially-last "
              f"iteration ({rng.last_yielded})")


parallel_run(last_owner, num_threads=4).raise_if_errors()
