"""Rewrite planning: lower a parsed directive plus a structured block
description into runtime calls and capture classifications.

The planner never parses host source. A :class:`BlockDescriptor` carries the
block's shape (plain statements, a counted loop nest, or a section list),
its body as opaque lines, and the sets of variable names it reads, writes,
and defines locally. A host binding that extracts descriptors from real code
is a thin adapter over this module.

``plan`` classifies every used non-local variable, validates the block shape
against the directive, and produces a :class:`RewritePlan` whose rendering
is deterministic, executable lowering text: nested functions for parallel
regions and tasks, ``scheduled_range`` substituted for loop headers, guarded
section and single scopes, and reduction combines under a critical region.
Temporaries use the reserved ``_omp_`` prefix with increasing suffixes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .directives import Directive, parse

__all__ = [
    "PlanError",
    "LoopLevel",
    "NestedDirective",
    "BlockDescriptor",
    "Capture",
    "RewritePlan",
    "classify_variables",
    "plan",
    "plan_sequence",
    "render_plan",
]


class PlanError(ValueError):
    """A block description is incompatible with its directive."""


@dataclass(frozen=True)
class LoopLevel:
    """One level of a counted loop nest; bounds are opaque expressions.

    ``pre_body`` holds statements inside this level before the next-inner
    loop header; such statements make the nest imperfect at this level.
    """

    var: str
    start: str
    stop: str
    step: str = "1"
    pre_body: tuple[str, ...] = ()


@dataclass(frozen=True)
class NestedDirective:
    """A directive nested inside another block's body."""

    text: str
    block: "BlockDescriptor"


@dataclass(frozen=True)
class BlockDescriptor:
    """Shape and variable usage of one directive's block.

    ``kind`` is ``plain`` (statements), ``loop`` (a counted loop nest with
    ``levels``), or ``sections`` (one body per section block). ``body`` items
    are raw statement lines or nested directives. ``prelude`` lines sit in
    the construct scope before a loop; they are rejected for ``for``.
    """

    kind: str = "plain"
    body: tuple = ()
    levels: tuple[LoopLevel, ...] = ()
    section_bodies: tuple = ()
    prelude: tuple[str, ...] = ()
    reads: frozenset[str] = frozenset()
    writes: frozenset[str] = frozenset()
    locals: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.kind not in ("plain", "loop", "sections"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "section_bodies",
                           tuple(tuple(b) for b in self.section_bodies))
        object.__setattr__(self, "prelude", tuple(self.prelude))
        object.__setattr__(self, "reads", frozenset(self.reads))
        object.__setattr__(self, "writes", frozenset(self.writes))
        object.__setattr__(self, "locals", frozenset(self.locals))

    @property
    def used(self) -> frozenset[str]:
        return (self.reads | self.writes) - self.locals


@dataclass(frozen=True)
class Capture:
    """Data-sharing classification of one captured variable."""

    kind: str  # shared | private | firstprivate | lastprivate | reduction
    op: str | None = None

    def __repr__(self) -> str:
        if self.kind == "reduction":
            return f"Capture(reduction {self.op})"
        return f"Capture({self.kind})"


_CAPTURE_CLAUSES = ("shared", "private", "firstprivate", "lastprivate")


def classify_variables(directive: Directive, block: BlockDescriptor) -> dict[str, Capture]:
    """Classify every captured variable of ``block`` under ``directive``.

    Clause-listed variables take their clause's class; remaining used
    non-locals default to shared (task blocks default read-only variables to
    firstprivate). Block locals are never captured. Under ``default(none)``
    every used non-local must be listed explicitly.
    """
    captures: dict[str, Capture] = {}
    for clause in directive.clauses:
        if clause.kind in _CAPTURE_CLAUSES:
            for var in clause.vars:
                _add_capture(captures, block, var, Capture(clause.kind))
        elif clause.kind == "reduction":
            for var in clause.vars:
                _add_capture(captures, block, var, Capture("reduction", clause.op))

    default_clause = directive.get("default")
    default_none = default_clause is not None and default_clause.text == "none"
    is_task = "task" in directive.names

    for var in sorted(block.used):
        if var in captures:
            continue
        if default_none:
            raise PlanError(
                f"variable {var!r} is not classified and default(none) is in effect"
            )
        if is_task and var in block.reads and var not in block.writes:
            captures[var] = Capture("firstprivate")
        else:
            captures[var] = Capture("shared")
    return captures


def _add_capture(captures, block, var, capture) -> None:
    if var in block.locals:
        raise PlanError(f"variable {var!r} is local to the block but listed in a clause")
    if var in captures:
        raise PlanError(f"variable {var!r} classified twice")
    captures[var] = capture


@dataclass
class RewritePlan:
    """Capture map plus the ordered runtime-call plan and its rendering."""

    directive: Directive
    captures: dict[str, Capture]
    calls: list[tuple] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"


def render_plan(rewrite_plan: RewritePlan) -> str:
    """Deterministic textual form of a plan, stable for golden tests."""
    return rewrite_plan.render()


def _substitute(line: str, env: dict[str, str]) -> str:
    if not env:
        return line
    for name in sorted(env, key=len, reverse=True):
        # whole identifiers only; leave attribute accesses alone
        line = re.sub(rf"(?<![\w.]){re.escape(name)}\b", lambda m: env[name], line)
    return line


class _Planner:
    def __init__(self):
        self.counter = 0
        self.calls: list[tuple] = []
        self.lines: list[str] = []

    def temp(self, base: str) -> str:
        self.counter += 1
        return f"_omp_{base}_{self.counter}"

    def emit(self, indent: int, text: str) -> None:
        self.lines.append("    " * indent + text)

    # -- directive dispatch -------------------------------------------------

    def lower(self, directive: Directive, block: BlockDescriptor,
              env: dict[str, str], indent: int) -> None:
        names = directive.names
        if "parallel" in names:
            self.lower_parallel(directive, block, env, indent)
        elif names == ("for",):
            self.lower_for(directive, block, env, indent, standalone=True)
        elif names == ("sections",):
            self.lower_sections(directive, block, env, indent, standalone=True)
        elif names == ("single",):
            self.lower_single(directive, block, env, indent)
        elif names == ("task",):
            self.lower_task(directive, block, env, indent)
        elif names == ("critical",):
            self.lower_critical(directive, block, env, indent)
        elif names == ("taskwait",):
            self.require_no_block(directive, block)
            self.calls.append(("taskwait",))
            self.emit(indent, "taskwait()")
        elif names == ("barrier",):
            self.require_no_block(directive, block)
            self.calls.append(("barrier",))
            self.emit(indent, "barrier()")
        elif names == ("section",):
            raise PlanError("'section' is only valid inside a 'sections' block")
        else:  # pragma: no cover - parser limits combinations
            raise PlanError(f"cannot plan directive {' '.join(names)!r}")

    def require_no_block(self, directive: Directive, block: BlockDescriptor) -> None:
        if block.kind != "plain" or block.body or block.prelude:
            raise PlanError(
                f"directive {' '.join(directive.names)!r} does not take a block"
            )

    def require_kind(self, directive: Directive, block: BlockDescriptor, kind: str) -> None:
        if block.kind != kind:
            raise PlanError(
                f"directive {' '.join(directive.names)!r} requires a {kind} block, "
                f"got {block.kind}"
            )

    # -- captures -----------------------------------------------------------

    def open_captures(self, captures: dict[str, Capture], env: dict[str, str],
                      indent: int) -> tuple[dict[str, str], list[tuple[str, str]]]:
        """Emit privatization temps; return the extended env and the list of
        (var, slot) reduction pairs awaiting their combine."""
        inner_env = dict(env)
        reductions: list[tuple[str, str]] = []
        for var, capture in captures.items():
            if capture.kind == "shared":
                continue
            temp = self.temp(var)
            if capture.kind == "firstprivate":
                source = _substitute(var, env)
                self.calls.append(("make_firstprivate", var))
                self.emit(indent, f"{temp} = make_firstprivate({source})")
            elif capture.kind == "reduction":
                self.calls.append(("reduction_begin", capture.op, var))
                self.emit(indent, f"{temp} = reduction_begin({capture.op!r})")
                inner_env[var] = f"{temp}.local"
                reductions.append((var, temp))
                continue
            else:  # private / lastprivate start uninitialized
                self.calls.append(("make_private", var))
                self.emit(indent, f"{temp} = None")
            inner_env[var] = temp
        return inner_env, reductions

    def close_reductions(self, reductions: list[tuple[str, str]],
                         env: dict[str, str], indent: int) -> None:
        for var, slot in reductions:
            target = _substitute(var, env)
            self.calls.append(("reduction_end", var))
            self.emit(indent, "with critical_section():")
            self.emit(indent + 1, f"{target} = reduction_combine({slot}, {target})")

    def emit_body(self, body, env: dict[str, str], indent: int) -> None:
        if not body:
            self.emit(indent, "pass")
            return
        for item in body:
            if isinstance(item, NestedDirective):
                self.lower(parse(item.text), item.block, env, indent)
            else:
                self.emit(indent, _substitute(item, env))

    # -- parallel -----------------------------------------------------------

    def lower_parallel(self, directive: Directive, block: BlockDescriptor,
                       env: dict[str, str], indent: int) -> None:
        captures = classify_variables(directive, block)
        fn = self.temp("fn")

        worksharing = None
        if directive.names == ("parallel", "for"):
            self.require_kind(directive, block, "loop")
            worksharing = "for"
        elif directive.names == ("parallel", "sections"):
            self.require_kind(directive, block, "sections")
            worksharing = "sections"
        else:
            self.require_kind(directive, block, "plain")

        self.emit(indent, f"def {fn}():")
        inner = indent + 1

        nonlocal_vars = [
            var for var, capture in captures.items()
            if capture.kind in ("shared", "reduction", "lastprivate")
        ]
        if nonlocal_vars:
            self.emit(inner, f"nonlocal {', '.join(nonlocal_vars)}")

        inner_env, reductions = self.open_captures(captures, env, inner)

        if worksharing == "for":
            self.lower_for(directive, block, inner_env, inner, standalone=False)
        elif worksharing == "sections":
            self.lower_sections(directive, block, inner_env, inner, standalone=False)
        else:
            self.emit_body(block.body, inner_env, inner)

        self.close_reductions(reductions, env, inner)

        args = [fn]
        clause = directive.get("num_threads")
        if clause is not None:
            args.append(f"num_threads={clause.text}")
        clause = directive.get("if")
        if clause is not None:
            args.append(f"if_value=({clause.text})")
        self.calls.append(("parallel_run",
                           {"num_threads": directive.get("num_threads") is not None,
                            "if": directive.get("if") is not None}))
        self.emit(indent, f"parallel_run({', '.join(args)})")

    # -- for ----------------------------------------------------------------

    def lower_for(self, directive: Directive, block: BlockDescriptor,
                  env: dict[str, str], indent: int, standalone: bool) -> None:
        self.require_kind(directive, block, "loop")
        if block.prelude:
            raise PlanError("statements are not allowed before the loop in a "
                            "'for' construct")

        collapse_clause = directive.get("collapse")
        depth = collapse_clause.number if collapse_clause is not None else 1
        if depth > len(block.levels):
            raise PlanError(
                f"collapse({depth}) exceeds the loop nest depth {len(block.levels)}"
            )
        for level in block.levels[: depth - 1]:
            if level.pre_body:
                raise PlanError(
                    f"loop nest is not perfectly nested at level {level.var!r} "
                    f"under collapse({depth})"
                )
        outer_vars: list[str] = []
        for level in block.levels[:depth]:
            for outer in outer_vars:
                pattern = rf"(?<![\w.]){re.escape(outer)}\b"
                if any(re.search(pattern, expr) for expr in (level.start, level.stop, level.step)):
                    raise PlanError(
                        f"collapsed bounds of {level.var!r} depend on outer index {outer!r}"
                    )
            outer_vars.append(level.var)

        reductions: list[tuple[str, str]] = []
        lastprivates: list[str] = []
        outer_env = env
        if standalone:
            captures = classify_variables(directive, block)
            env, reductions = self.open_captures(captures, outer_env, indent)
        lp_clause = directive.get("lastprivate")
        if lp_clause is not None:
            lastprivates = list(lp_clause.vars)

        nowait = directive.has("nowait")
        schedule = directive.get("schedule")
        spec = schedule.schedule if schedule is not None else None
        # write-backs and combines must land before the construct's closing
        # barrier, so the iterator defers it and we emit it explicitly
        defer_barrier = standalone and not nowait and bool(lastprivates or reductions)

        collapsed = block.levels[:depth]
        bounds = ", ".join(f"({lv.start}, {lv.stop}, {lv.step})" for lv in collapsed)
        if depth == 1:
            bounds_expr = f"({bounds},)"
        else:
            bounds_expr = f"({bounds})"
        spec_expr = (f"ScheduleSpec({spec.kind!r}, {spec.chunk!r})"
                     if spec is not None else "None")
        rng = self.temp("rng")
        self.calls.append(("scheduled_range", {
            "schedule": spec.kind if spec is not None else None,
            "chunk": spec.chunk if spec is not None else None,
            "collapse": depth,
            "nowait": nowait or defer_barrier,
        }))
        self.emit(indent, f"{rng} = scheduled_range({bounds_expr}, {spec_expr}, "
                          f"nowait={nowait or defer_barrier})")
        loop_vars = ", ".join(lv.var for lv in collapsed)
        self.emit(indent, f"for {loop_vars} in {rng}:")

        body_indent = indent + 1
        if depth < len(block.levels):
            for line in block.levels[depth - 1].pre_body:
                self.emit(body_indent, _substitute(line, env))
        for level in block.levels[depth:]:
            self.emit(body_indent, f"for {level.var} in range({level.start}, "
                                   f"{level.stop}, {level.step}):")
            body_indent += 1
            for line in level.pre_body:
                self.emit(body_indent, _substitute(line, env))
        self.emit_body(block.body, env, body_indent)

        if lastprivates:
            self.calls.append(("is_last_iteration",))
            self.emit(indent, f"if {rng}.is_last_iteration():")
            for var in lastprivates:
                self.calls.append(("lastprivate_writeback", var))
                self.emit(indent + 1, f"{var} = {env.get(var, var)}")

        self.close_reductions(reductions, outer_env, indent)
        if defer_barrier:
            self.calls.append(("barrier",))
            self.emit(indent, "barrier()")

    # -- sections -----------------------------------------------------------

    def lower_sections(self, directive: Directive, block: BlockDescriptor,
                       env: dict[str, str], indent: int, standalone: bool) -> None:
        self.require_kind(directive, block, "sections")
        reductions: list[tuple[str, str]] = []
        outer_env = env
        if standalone:
            captures = classify_variables(directive, block)
            env, reductions = self.open_captures(captures, outer_env, indent)
        lp_clause = directive.get("lastprivate")
        lastprivates = list(lp_clause.vars) if lp_clause is not None else []

        nowait = directive.has("nowait")
        total = len(block.section_bodies)
        state = self.temp("sec")
        self.calls.append(("sections_begin", total))
        self.emit(indent, f"with sections_begin({total}, nowait={nowait}) as {state}:")
        inner = indent + 1
        last_guard = None
        for section_id, body in enumerate(block.section_bodies):
            self.calls.append(("section_try", section_id))
            is_last = section_id == total - 1
            if is_last and lastprivates:
                last_guard = self.temp("last")
                self.emit(inner, f"{last_guard} = section_try({state}, {section_id})")
                self.emit(inner, f"if {last_guard}:")
            else:
                self.emit(inner, f"if section_try({state}, {section_id}):")
            self.emit_body(body, env, inner + 1)
        if lastprivates:
            self.calls.append(("is_last_iteration",))
            self.emit(inner, f"if {last_guard}:")
            for var in lastprivates:
                self.calls.append(("lastprivate_writeback", var))
                self.emit(inner + 1, f"{var} = {env.get(var, var)}")
        # combines happen inside the scope, before the exit barrier
        self.close_reductions(reductions, outer_env, inner)
        if not lastprivates and not reductions and total == 0:
            self.emit(inner, "pass")

    # -- single -------------------------------------------------------------

    def lower_single(self, directive: Directive, block: BlockDescriptor,
                     env: dict[str, str], indent: int) -> None:
        self.require_kind(directive, block, "plain")
        captures = classify_variables(directive, block)
        env, _ = self.open_captures(
            {v: c for v, c in captures.items() if c.kind != "shared"}, env, indent)

        cp_clause = directive.get("copyprivate")
        nowait = directive.has("nowait")
        flag = self.temp("one")
        self.calls.append(("single_begin",))
        self.emit(indent, f"with single_begin(nowait={nowait}) as {flag}:")
        self.emit(indent + 1, f"if {flag}:")
        self.emit_body(block.body, env, indent + 2)
        if cp_clause is not None:
            names = [env.get(v, v) for v in cp_clause.vars]
            payload = names[0] if len(names) == 1 else f"({', '.join(names)})"
            self.calls.append(("copyprivate_publish", cp_clause.vars))
            self.emit(indent + 2, f"copyprivate_publish({payload})")
            self.calls.append(("copyprivate_collect", cp_clause.vars))
            targets = ", ".join(names)
            self.emit(indent, f"{targets} = copyprivate_collect()")

    # -- task ---------------------------------------------------------------

    def lower_task(self, directive: Directive, block: BlockDescriptor,
                   env: dict[str, str], indent: int) -> None:
        self.require_kind(directive, block, "plain")
        captures = classify_variables(directive, block)
        fn = self.temp("task")

        # firstprivate snapshots are taken at submit time, outside the body
        inner_env = dict(env)
        private_inits: list[str] = []
        for var, capture in captures.items():
            if capture.kind == "firstprivate":
                temp = self.temp(var)
                self.calls.append(("make_firstprivate", var))
                self.emit(indent, f"{temp} = make_firstprivate({_substitute(var, env)})")
                inner_env[var] = temp
            elif capture.kind == "private":
                temp = self.temp(var)
                self.calls.append(("make_private", var))
                private_inits.append(f"{temp} = None")
                inner_env[var] = temp

        self.emit(indent, f"def {fn}():")
        nonlocal_vars = [v for v, c in captures.items() if c.kind == "shared"]
        if nonlocal_vars:
            self.emit(indent + 1, f"nonlocal {', '.join(nonlocal_vars)}")
        for line in private_inits:
            self.emit(indent + 1, line)
        self.emit_body(block.body, inner_env, indent + 1)

        if_clause = directive.get("if")
        self.calls.append(("task_submit", {"if": if_clause is not None}))
        if if_clause is not None:
            self.emit(indent, f"task_submit({fn}, if_value=({if_clause.text}))")
        else:
            self.emit(indent, f"task_submit({fn})")

    # -- critical -----------------------------------------------------------

    def lower_critical(self, directive: Directive, block: BlockDescriptor,
                       env: dict[str, str], indent: int) -> None:
        self.require_kind(directive, block, "plain")
        name_clause = directive.get("name")
        self.calls.append(("critical", name_clause.text if name_clause else None))
        if name_clause is not None:
            self.emit(indent, f"with critical_section({name_clause.text!r}):")
        else:
            self.emit(indent, "with critical_section():")
        self.emit_body(block.body, env, indent + 1)


def plan(directive: Directive | str, block: BlockDescriptor | None = None) -> RewritePlan:
    """Build the rewrite plan for one directive applied to ``block``.

    ``directive`` may be a directive string or an already-parsed
    :class:`Directive`. Clauseless directives (barrier, taskwait) take no
    block. Raises :class:`PlanError` when the block's shape does not fit the
    directive (wrong kind, imperfect nesting under collapse, statements
    outside a for loop).
    """
    if isinstance(directive, str):
        directive = parse(directive)
    if block is None:
        block = BlockDescriptor()
    planner = _Planner()
    planner.lower(directive, block, {}, 0)
    captures = classify_variables(directive, block)
    return RewritePlan(directive=directive, captures=captures,
                       calls=planner.calls, lines=planner.lines)


def plan_sequence(items) -> RewritePlan:
    """Plan consecutive sibling directives into one scope.

    ``items`` is a sequence of ``(directive, block)`` pairs (block may be
    None). Temporaries share one counter, so lowerings of siblings can be
    emitted into the same scope without name collisions.
    """
    planner = _Planner()
    captures: dict[str, Capture] = {}
    last_directive = None
    for directive, block in items:
        if isinstance(directive, str):
            directive = parse(directive)
        if block is None:
            block = BlockDescriptor()
        planner.lower(directive, block, {}, 0)
        for var, capture in classify_variables(directive, block).items():
            captures.setdefault(var, capture)
        last_directive = directive
    return RewritePlan(directive=last_directive, captures=captures,
                       calls=planner.calls, lines=planner.lines)
