import textwrap
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ompcore
import lowering_programs
from ompcore.directives import parse
from ompcore.transform import (
    BlockDescriptor,
    Capture,
    LoopLevel,
    NestedDirective,
    PlanError,
    classify_variables,
    plan,
    render_plan,
)

GOLDEN_DIR = Path(__file__).parent / "golden"

EXEC_NAMESPACE = {name: getattr(ompcore, name) for name in ompcore.__all__}


def run_lowering(text, params, returns, extra_lines=()):
    """exec a lowering inside a driver function and return the named values."""
    body = textwrap.indent(text, "    ")
    for line in extra_lines:
        body += f"    {line}\n"
    src = (f"def _driver({', '.join(params)}):\n"
           + body
           + f"    return ({', '.join(returns)},)\n")
    namespace = dict(EXEC_NAMESPACE)
    exec(src, namespace)
    return namespace["_driver"]


# -- classification -----------------------------------------------------------

def test_classification_with_mixed_clauses():
    block = BlockDescriptor(
        kind="plain",
        body=["..."],
        reads={"b", "d"},
        writes={"a", "c", "d"},
        locals={"f"},
    )
    directive = parse("parallel shared(b) private(c) firstprivate(d)")
    captures = classify_variables(directive, block)
    assert captures == {
        "a": Capture("shared"),
        "b": Capture("shared"),
        "c": Capture("private"),
        "d": Capture("firstprivate"),
    }
    assert "e" not in captures  # unused stays uncaptured
    assert "f" not in captures  # block-local stays uncaptured


def test_classification_defaults_to_shared():
    captures = classify_variables(parse("parallel"),
                                  BlockDescriptor(reads={"p", "q"}, writes={"q"}))
    assert captures == {"p": Capture("shared"), "q": Capture("shared")}


def test_classification_reduction_takes_clause_class():
    captures = classify_variables(parse("parallel reduction(+:acc)"),
                                  BlockDescriptor(reads={"acc"}, writes={"acc"}))
    assert captures["acc"] == Capture("reduction", "+")


def test_classification_default_none_requires_listing():
    directive = parse("parallel default(none) private(x)")
    block = BlockDescriptor(reads={"x", "y"}, writes={"y"})
    with pytest.raises(PlanError):
        classify_variables(directive, block)
    ok = classify_variables(directive, BlockDescriptor(reads={"x"}, writes={"x"}))
    assert ok == {"x": Capture("private")}


def test_classification_task_reads_default_to_firstprivate():
    captures = classify_variables(parse("task"),
                                  BlockDescriptor(reads={"n"}, writes={"i"}))
    assert captures == {"i": Capture("shared"), "n": Capture("firstprivate")}


def test_classification_rejects_clause_on_block_local():
    with pytest.raises(PlanError):
        classify_variables(parse("parallel private(f)"),
                           BlockDescriptor(reads=set(), writes=set(), locals={"f"}))


@given(
    reads=st.sets(st.sampled_from("abcdefgh"), max_size=6),
    writes=st.sets(st.sampled_from("abcdefgh"), max_size=6),
    local_names=st.sets(st.sampled_from("xyz"), max_size=2),
    privates=st.sets(st.sampled_from("abcd"), max_size=3),
)
@settings(max_examples=120, deadline=None)
def test_classification_totality(reads, writes, local_names, privates):
    directive_text = "parallel"
    if privates:
        directive_text += f" private({', '.join(sorted(privates))})"
    block = BlockDescriptor(reads=reads, writes=writes, locals=local_names)
    captures = classify_variables(parse(directive_text), block)
    for var in (reads | writes) - local_names:
        assert var in captures
    for var in local_names:
        assert var not in captures
    for var in privates:
        assert captures[var] == Capture("private")


# -- plan validation ------------------------------------------------------------

def test_for_requires_loop_block():
    with pytest.raises(PlanError):
        plan("for", BlockDescriptor(kind="plain", body=["x = 1"], writes={"x"}))


def test_sections_requires_sections_block():
    with pytest.raises(PlanError):
        plan("sections", BlockDescriptor(kind="plain", body=["x = 1"], writes={"x"}))


def test_prelude_statements_rejected_in_for():
    block = BlockDescriptor(
        kind="loop",
        levels=[LoopLevel("i", "0", "10")],
        body=["total += i"],
        prelude=["setup()"],
        reads={"total"},
        writes={"total"},
    )
    with pytest.raises(PlanError):
        plan("for", block)


def test_collapse_deeper_than_nest_rejected():
    block = BlockDescriptor(kind="loop", levels=[LoopLevel("i", "0", "10")],
                            body=["pass"])
    with pytest.raises(PlanError):
        plan("for collapse(2)", block)


def test_imperfect_nesting_under_collapse_rejected():
    block = BlockDescriptor(
        kind="loop",
        levels=[LoopLevel("i", "0", "10", "1", pre_body=("between()",)),
                LoopLevel("j", "0", "4")],
        body=["pass"],
    )
    with pytest.raises(PlanError):
        plan("for collapse(2)", block)
    # without collapse the same nest is fine: only the outer level distributes
    plan("for", block)


def test_collapsed_inner_bounds_must_not_depend_on_outer_index():
    block = BlockDescriptor(
        kind="loop",
        levels=[LoopLevel("i", "0", "10"), LoopLevel("j", "0", "i")],
        body=["pass"],
    )
    with pytest.raises(PlanError):
        plan("for collapse(2)", block)


def test_bare_directives_take_no_block():
    with pytest.raises(PlanError):
        plan("barrier", BlockDescriptor(kind="plain", body=["x = 1"], writes={"x"}))
    assert render_plan(plan("barrier")) == "barrier()\n"
    assert render_plan(plan("taskwait")) == "taskwait()\n"


def test_section_alone_cannot_be_planned():
    with pytest.raises(PlanError):
        plan("section", BlockDescriptor(kind="plain", body=["pass"]))


def test_call_sequence_for_combined_reduction_loop():
    block = BlockDescriptor(
        kind="loop",
        levels=[LoopLevel("i", "0", "n")],
        body=["PI += 4.0 / (1.0 + ((i + 0.5) / n) ** 2)"],
        reads={"PI", "n"},
        writes={"PI"},
    )
    rewrite = plan("parallel for reduction(+:PI)", block)
    ops = [c[0] for c in rewrite.calls]
    assert ops.index("reduction_begin") < ops.index("scheduled_range")
    assert ops.index("scheduled_range") < ops.index("reduction_end")
    assert ops[-1] == "parallel_run"
    assert rewrite.captures["PI"] == Capture("reduction", "+")


def test_named_critical_plan():
    rewrite = plan("critical(tally)",
                   BlockDescriptor(kind="plain", body=["count += 1"],
                                   reads={"count"}, writes={"count"}))
    assert "with critical_section('tally'):" in rewrite.render()


def test_task_if_clause_is_forwarded():
    rewrite = plan("task if(n > 5)",
                   BlockDescriptor(kind="plain", body=["work(n)"], reads={"n"}))
    assert "task_submit(_omp_task_1, if_value=(n > 5))" in rewrite.render()


def test_render_is_deterministic():
    first = lowering_programs.for_collapse_lastprivate().render()
    second = lowering_programs.for_collapse_lastprivate().render()
    assert first == second


# -- golden lowerings -----------------------------------------------------------

@pytest.mark.parametrize("name", sorted(lowering_programs.GOLDEN_PLANS))
def test_golden_lowerings(name):
    expected = (GOLDEN_DIR / f"{name}.txt").read_text()
    assert lowering_programs.GOLDEN_PLANS[name]() == expected


# -- plan soundness: execution matches sequential behavior -----------------------

def test_executed_parallel_data_clauses_semantics():
    rewrite = plan(
        "parallel shared(b) private(c) firstprivate(d) num_threads(4)",
        BlockDescriptor(
            kind="plain",
            body=["f = omp_get_thread_num()", "a = 1", "c = f",
                  "d.append(3)", "out.append((b, c, d, f))"],
            reads={"b", "d", "out"},
            writes={"a", "c", "d", "out"},
            locals={"f"},
        ),
    )
    driver = run_lowering(rewrite.render(), ["a", "b", "c", "d", "out"],
                          ["a", "c", "d", "out"])
    a, c, d, out = driver(0, "1", -1, [1, 2], [])
    assert a == 1          # shared write is visible outside
    assert c == -1         # private copy never leaks
    assert d == [1, 2]     # firstprivate copy never leaks
    assert len(out) == 4
    assert sorted(row[3] for row in out) == [0, 1, 2, 3]
    assert all(row[0] == "1" and row[1] == row[3] and row[2] == [1, 2, 3]
               for row in out)


def test_executed_loop_matches_sequential():
    rewrite = lowering_programs.for_static_chunk()
    driver = run_lowering(rewrite.render(), ["xs"], ["xs"])
    xs, = driver([0] * 20)
    assert xs == list(range(20))


def test_executed_collapse_lastprivate_matches_sequential():
    rewrite = lowering_programs.for_collapse_lastprivate()
    driver = run_lowering(rewrite.render(), ["xs", "x"], ["x", "xs"])
    x, xs = driver([0] * 20, 0)

    xs_seq, x_seq = [0] * 20, 0
    for i in range(len(xs_seq)):
        for j in range(4):
            x_seq = j
            xs_seq[i] += x_seq
    assert (x, xs) == (x_seq, xs_seq)


def test_executed_sections_run_each_block_once():
    rewrite = plan(
        "parallel",
        BlockDescriptor(
            kind="plain",
            body=[NestedDirective(
                "sections",
                BlockDescriptor(
                    kind="sections",
                    section_bodies=[["out.append(1)"], ["out.append(2)"],
                                    ["out.append(3)"]],
                    reads={"out"},
                    writes={"out"},
                ),
            )],
            reads={"out"},
            writes={"out"},
        ),
    )
    driver = run_lowering(rewrite.render(), ["out"], ["out"])
    out, = driver([])
    assert sorted(out) == [1, 2, 3]


def test_executed_single_copyprivate_broadcasts():
    rewrite = plan(
        "parallel firstprivate(x)",
        BlockDescriptor(
            kind="plain",
            body=[
                NestedDirective(
                    "single copyprivate(x)",
                    BlockDescriptor(kind="plain", body=["x += 1"],
                                    reads={"x"}, writes={"x"}),
                ),
                "seen.append(x)",
            ],
            reads={"x", "seen"},
            writes={"x", "seen"},
        ),
    )
    driver = run_lowering(rewrite.render(), ["x", "seen"], ["x", "seen"])
    x, seen = driver(0, [])
    assert x == 0
    assert seen == [1, 1, 1, 1] or len(set(seen)) == 1  # everyone saw the broadcast


def test_executed_reduction_pi_program():
    block = BlockDescriptor(
        kind="loop",
        levels=[LoopLevel("i", "0", "n")],
        body=["local = (i + 0.5) * w", "PI += 4.0 / (1.0 + local * local)"],
        reads={"n", "w", "PI"},
        writes={"PI"},
        locals={"local"},
    )
    rewrite = plan("parallel for reduction(+:PI) num_threads(4)", block)
    driver = run_lowering(rewrite.render(), ["n", "w", "PI"], ["PI"])
    n = 5000
    pi, = driver(n, 1.0 / n, 0.0)
    pi *= 1.0 / n

    pi_seq = 0.0
    for i in range(n):
        local = (i + 0.5) / n
        pi_seq += 4.0 / (1.0 + local * local)
    pi_seq /= n
    assert pi == pytest.approx(pi_seq, rel=1e-12)


def test_executed_task_fib_program():
    import sys

    # draining tasks nests one frame set per outstanding task
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    text = lowering_programs.task_fib()
    driver = run_lowering(text, ["n", "x"], ["x"])
    x, = driver(12, 0)
    assert x == 144


def test_executed_nested_loop_with_partial_collapse():
    # three-level nest, only the outer two levels are collapsed
    block = BlockDescriptor(
        kind="loop",
        levels=[LoopLevel("i", "0", "3"), LoopLevel("j", "0", "4"),
                LoopLevel("k", "0", "2")],
        body=["out.append((i, j, k))"],
        reads={"out"},
        writes={"out"},
    )
    rewrite = plan("parallel for collapse(2) num_threads(3)", block)
    driver = run_lowering(rewrite.render(), ["out"], ["out"])
    out, = driver([])
    assert sorted(out) == [(i, j, k) for i in range(3) for j in range(4)
                           for k in range(2)]


def test_combined_parallel_sections_plan_and_execution():
    rewrite = plan(
        "parallel sections num_threads(3)",
        BlockDescriptor(
            kind="sections",
            section_bodies=[["out.append('a')"], ["out.append('b')"]],
            reads={"out"},
            writes={"out"},
        ),
    )
    text = rewrite.render()
    assert "sections_begin(2" in text
    assert "parallel_run" in text
    driver = run_lowering(text, ["out"], ["out"])
    out, = driver([])
    assert sorted(out) == ["a", "b"]


def test_standalone_for_reduction_combines_before_barrier():
    rewrite = plan(
        "for reduction(+:acc)",
        BlockDescriptor(
            kind="loop",
            levels=[LoopLevel("i", "0", "10")],
            body=["acc += i"],
            reads={"acc"},
            writes={"acc"},
        ),
    )
    text = rewrite.render()
    # combine precedes the construct's closing barrier
    assert text.index("reduction_combine") < text.index("barrier()")
    assert "nowait=True" in text
    driver = run_lowering(text, ["acc"], ["acc"])
    acc, = driver(0)
    assert acc == 45


def test_for_nowait_leaves_no_trailing_barrier():
    rewrite = plan(
        "for nowait",
        BlockDescriptor(kind="loop", levels=[LoopLevel("i", "0", "4")],
                        body=["out.append(i)"], reads={"out"}, writes={"out"}),
    )
    text = rewrite.render()
    assert "nowait=True" in text
    assert "barrier()" not in text


def test_parallel_requires_plain_block():
    with pytest.raises(PlanError):
        plan("parallel", BlockDescriptor(kind="loop",
                                         levels=[LoopLevel("i", "0", "4")],
                                         body=["pass"]))


def test_single_with_two_copyprivate_vars():
    rewrite = plan(
        "parallel private(a) private(b)",
        BlockDescriptor(
            kind="plain",
            body=[
                NestedDirective(
                    "single copyprivate(a, b)",
                    BlockDescriptor(kind="plain", body=["a = 1", "b = 2"],
                                    reads=set(), writes={"a", "b"}),
                ),
                "out.append((a, b))",
            ],
            reads={"a", "b", "out"},
            writes={"a", "b", "out"},
        ),
    )
    text = rewrite.render()
    assert "copyprivate_publish((" in text
    driver = run_lowering(text, ["a", "b", "out"], ["out"])
    out, = driver(None, None, [])
    assert len(out) == 1  # default team size is 1 here
    assert out[0] == (1, 2)


def test_single_with_own_private_clause():
    rewrite = plan(
        "single private(t)",
        BlockDescriptor(kind="plain", body=["t = 5", "use(t)"],
                        reads={"t"}, writes={"t"}),
    )
    text = rewrite.render()
    assert "_omp_t_1 = None" in text
    assert "use(_omp_t_1)" in text
