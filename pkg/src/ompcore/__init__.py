"""ompcore: a fork-join parallel runtime with OpenMP 3.0 common-core
semantics.

The pieces fit together like an OpenMP implementation:

* :mod:`ompcore.directives` parses directive strings such as
  ``"parallel for reduction(+:count) schedule(static, 2)"``.
* :mod:`ompcore.runtime` runs thread teams (``parallel_run``) and provides
  the ``omp_*`` query functions.
* :mod:`ompcore.worksharing` distributes loops, sections, and single blocks
  over the current team.
* :mod:`ompcore.data_env` implements private/firstprivate copies,
  reductions, lastprivate write-back, and copyprivate broadcast.
* :mod:`ompcore.tasking` provides deferred tasks and ``taskwait``.
* :mod:`ompcore.transform` plans the lowering of a directive plus a block
  description into runtime calls.
* :mod:`ompcore.bench` reproduces the classic kernels (pi, quad, jacobi,
  fib, wordcount) behind the ``bench`` command.
"""

from .data_env import (
    PrivateCell,
    ReductionSlot,
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
from .directives import (
    Clause,
    Directive,
    DirectiveSyntaxError,
    ScheduleSpec,
    parse,
    parse_schedule,
    validity_table,
)
from .runtime import (
    ControlVars,
    RegionOutcome,
    TeamContext,
    TeamRecord,
    ensure_context,
    omp_get_max_threads,
    omp_get_nested,
    omp_get_num_threads,
    omp_get_thread_num,
    omp_get_wtime,
    omp_in_parallel,
    omp_set_nested,
    omp_set_num_threads,
    parallel_run,
)
from .tasking import Task, drain_at_region_end, task_submit, taskwait
from .transform import (
    BlockDescriptor,
    Capture,
    LoopLevel,
    NestedDirective,
    PlanError,
    RewritePlan,
    classify_variables,
    plan,
    plan_sequence,
    render_plan,
)
from .worksharing import (
    LoopBounds,
    ScheduledRange,
    SectionsState,
    SingleScope,
    barrier,
    critical_enter,
    critical_exit,
    critical_section,
    scheduled_range,
    section_try,
    sections_begin,
    single_begin,
)

__version__ = "0.1.0"

__all__ = [
    "Clause",
    "Directive",
    "DirectiveSyntaxError",
    "ScheduleSpec",
    "parse",
    "parse_schedule",
    "validity_table",
    "ControlVars",
    "RegionOutcome",
    "TeamContext",
    "TeamRecord",
    "ensure_context",
    "parallel_run",
    "omp_set_num_threads",
    "omp_get_max_threads",
    "omp_get_thread_num",
    "omp_get_num_threads",
    "omp_get_wtime",
    "omp_in_parallel",
    "omp_set_nested",
    "omp_get_nested",
    "LoopBounds",
    "ScheduledRange",
    "scheduled_range",
    "SectionsState",
    "sections_begin",
    "section_try",
    "SingleScope",
    "single_begin",
    "barrier",
    "critical_enter",
    "critical_exit",
    "critical_section",
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
    "Task",
    "task_submit",
    "taskwait",
    "drain_at_region_end",
    "BlockDescriptor",
    "LoopLevel",
    "NestedDirective",
    "Capture",
    "PlanError",
    "RewritePlan",
    "classify_variables",
    "plan",
    "plan_sequence",
    "render_plan",
]
