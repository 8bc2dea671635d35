"""The six canonical lowering programs used by the golden and soundness
tests: one per core construct (parallel data clauses, static loop, collapsed
loop with lastprivate, sections, single with copyprivate, recursive tasks).
"""

from ompcore.transform import BlockDescriptor, LoopLevel, NestedDirective, plan, plan_sequence


def parallel_data_clauses():
    return plan(
        "parallel shared(b) private(c) firstprivate(d) num_threads(4)",
        BlockDescriptor(
            kind="plain",
            body=[
                "f = omp_get_thread_num()",
                "a = 1",
                "c = f",
                "d.append(3)",
                "print(b, c, d, f)",
            ],
            reads={"b", "d"},
            writes={"a", "c", "d"},
            locals={"f"},
        ),
    )


def for_static_chunk():
    return plan(
        "parallel",
        BlockDescriptor(
            kind="plain",
            body=[NestedDirective(
                "for schedule(static, 2)",
                BlockDescriptor(
                    kind="loop",
                    levels=[LoopLevel("i", "0", "len(xs)", "1")],
                    body=["xs[i] = i"],
                    reads={"xs"},
                    writes={"xs"},
                ),
            )],
            reads={"xs"},
            writes={"xs"},
        ),
    )


def for_collapse_lastprivate():
    return plan(
        "parallel",
        BlockDescriptor(
            kind="plain",
            body=[NestedDirective(
                "for schedule(static, 2) collapse(2) lastprivate(x)",
                BlockDescriptor(
                    kind="loop",
                    levels=[LoopLevel("i", "0", "len(xs)", "1"),
                            LoopLevel("j", "0", "4", "1")],
                    body=["x = j", "xs[i] += x"],
                    reads={"xs"},
                    writes={"x", "xs"},
                ),
            )],
            reads={"xs"},
            writes={"x", "xs"},
        ),
    )


def sections_three():
    return plan(
        "parallel",
        BlockDescriptor(
            kind="plain",
            body=[NestedDirective(
                "sections",
                BlockDescriptor(
                    kind="sections",
                    section_bodies=[["print(1)"], ["print(2)"], ["print(3)"]],
                ),
            )],
        ),
    )


def single_copyprivate():
    return plan(
        "parallel firstprivate(x)",
        BlockDescriptor(
            kind="plain",
            body=[
                NestedDirective(
                    "single copyprivate(x)",
                    BlockDescriptor(kind="plain", body=["x += 1"],
                                    reads={"x"}, writes={"x"}),
                ),
                "print(x)",
            ],
            reads={"x"},
            writes={"x"},
        ),
    )


def task_fib_body():
    """The body of a recursive fib function: two tasks plus a taskwait."""
    return plan_sequence([
        ("task", BlockDescriptor(kind="plain", body=["i = fib(n - 1)"],
                                 reads={"n"}, writes={"i"})),
        ("task", BlockDescriptor(kind="plain", body=["j = fib(n - 2)"],
                                 reads={"n"}, writes={"j"})),
        ("taskwait", None),
    ])


def task_fib_wrapper():
    """The parallel+single region that issues the root fib call."""
    return plan(
        "parallel",
        BlockDescriptor(
            kind="plain",
            body=[NestedDirective(
                "single",
                BlockDescriptor(kind="plain", body=["x = fib(n)"],
                                reads={"n"}, writes={"x"}),
            )],
            reads={"n"},
            writes={"x"},
        ),
    )


def task_fib():
    """Full lowering text of the tasked-fib program."""
    body = task_fib_body()
    wrapper = task_fib_wrapper()
    lines = ["def fib(n):", "    i = 0", "    j = 0", "    if n < 2:",
             "        return n"]
    lines.extend("    " + line for line in body.lines)
    lines.append("    return i + j")
    lines.append("")
    lines.extend(wrapper.lines)
    return "\n".join(lines) + "\n"


GOLDEN_PLANS = {
    "parallel_data_clauses": lambda: parallel_data_clauses().render(),
    "for_static_chunk": lambda: for_static_chunk().render(),
    "for_collapse_lastprivate": lambda: for_collapse_lastprivate().render(),
    "sections_three": lambda: sections_three().render(),
    "single_copyprivate": lambda: single_copyprivate().render(),
    "task_fib": task_fib,
}
