"""Directive-string parsing and validation.

Directives are plain strings such as ``"parallel for reduction(+:count)
schedule(static, 2)"``: one or two directive keywords followed by clauses.
Whitespace between tokens is insignificant; keywords are lowercase only.
The only combined directives are ``parallel for`` and ``parallel sections``.

``parse`` either returns a validated :class:`Directive` or raises
:class:`DirectiveSyntaxError` carrying the 0-based character offset of the
offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

__all__ = [
    "DirectiveSyntaxError",
    "ScheduleSpec",
    "Clause",
    "Directive",
    "parse",
    "parse_schedule",
    "validity_table",
    "DIRECTIVE_NAMES",
    "CLAUSE_KINDS",
    "REDUCTION_OPS",
    "SCHEDULE_KINDS",
]

DIRECTIVE_NAMES = frozenset(
    ["parallel", "for", "sections", "section", "single", "task",
     "taskwait", "barrier", "critical"]
)

# Clauses carrying a list of variable names.
_LIST_CLAUSES = frozenset(
    ["private", "firstprivate", "lastprivate", "shared", "copyprivate"]
)
# Clauses that may appear at most once per directive.
_SCALAR_CLAUSES = frozenset(
    ["num_threads", "if", "default", "schedule", "collapse", "name"]
)
# Variables may appear in at most one of these across a whole directive.
_DATA_SHARING = frozenset(
    ["private", "firstprivate", "lastprivate", "shared", "reduction"]
)

CLAUSE_KINDS = _LIST_CLAUSES | _SCALAR_CLAUSES | {"reduction", "nowait"}

REDUCTION_OPS = frozenset(["+", "*", "-", "min", "max", "&", "|", "^", "&&", "||"])

SCHEDULE_KINDS = frozenset(["static", "dynamic", "guided", "auto", "runtime"])

_VALIDITY = {
    "parallel": frozenset(
        ["num_threads", "if", "private", "firstprivate", "shared", "default", "reduction"]
    ),
    "for": frozenset(
        ["private", "firstprivate", "lastprivate", "reduction", "schedule", "collapse", "nowait"]
    ),
    "sections": frozenset(
        ["private", "firstprivate", "lastprivate", "reduction", "nowait"]
    ),
    "single": frozenset(["private", "firstprivate", "copyprivate", "nowait"]),
    "task": frozenset(["if", "default", "private", "firstprivate", "shared"]),
    "critical": frozenset(["name"]),
    "section": frozenset(),
    "taskwait": frozenset(),
    "barrier": frozenset(),
}


class DirectiveSyntaxError(SyntaxError):
    """Raised for any malformed or invalid directive string.

    ``offset`` is the 0-based character position of the problem.
    """

    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.text = text
        self.offset = offset


def validity_table() -> dict[str, frozenset[str]]:
    """Map each directive name to the clause kinds it accepts."""
    return dict(_VALIDITY)


@dataclass(frozen=True)
class ScheduleSpec:
    """A loop schedule: policy kind plus optional chunk size."""

    kind: str
    chunk: int | None = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.chunk is not None and self.chunk < 1:
            raise ValueError("schedule chunk must be >= 1")

    def render(self) -> str:
        if self.chunk is None:
            return self.kind
        return f"{self.kind}, {self.chunk}"


@dataclass(frozen=True)
class Clause:
    """One validated clause. ``kind`` selects which payload fields are set."""

    kind: str
    vars: tuple[str, ...] = ()
    op: str | None = None          # reduction operator
    schedule: ScheduleSpec | None = None
    number: int | None = None      # collapse argument
    text: str | None = None        # raw expression (num_threads/if), default mode, critical name

    def render(self) -> str:
        if self.kind == "nowait":
            return "nowait"
        if self.kind in _LIST_CLAUSES:
            return f"{self.kind}({', '.join(self.vars)})"
        if self.kind == "reduction":
            return f"reduction({self.op}:{', '.join(self.vars)})"
        if self.kind == "schedule":
            return f"schedule({self.schedule.render()})"
        if self.kind == "collapse":
            return f"collapse({self.number})"
        if self.kind == "name":
            return f"({self.text})"
        # num_threads / if / default
        return f"{self.kind}({self.text})"


@dataclass(frozen=True)
class Directive:
    names: tuple[str, ...]
    clauses: tuple[Clause, ...] = ()

    def has(self, kind: str) -> bool:
        return any(c.kind == kind for c in self.clauses)

    def get(self, kind: str) -> Clause | None:
        for c in self.clauses:
            if c.kind == kind:
                return c
        return None

    def get_all(self, kind: str) -> tuple[Clause, ...]:
        return tuple(c for c in self.clauses if c.kind == kind)

    def render(self) -> str:
        """Canonical text form; ``parse(d.render()) == d``."""
        parts = [" ".join(self.names)]
        parts.extend(c.render() for c in self.clauses)
        return " ".join(parts)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<op>&&|\|\||[+*\-&|^])
  | (?P<punct>[(),:])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str  # ident | int | op | punct | end
    text: str
    pos: int


class _Scanner:
    """Tokenizer with a raw balanced-parenthesis capture mode.

    Raw capture is needed because num_threads/if payloads are arbitrary
    host expressions whose characters need not be valid directive tokens.
    """

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self._peeked: _Token | None = None

    def error(self, message: str, pos: int | None = None):
        raise DirectiveSyntaxError(message, self.text, self.pos if pos is None else pos)

    def peek(self) -> _Token:
        if self._peeked is None:
            self._peeked = self._scan()
        return self._peeked

    def next(self) -> _Token:
        tok = self.peek()
        self._peeked = None
        self.pos = tok.pos + len(tok.text)
        return tok

    def _scan(self) -> _Token:
        pos = self.pos
        text = self.text
        while True:
            if pos >= len(text):
                return _Token("end", "", pos)
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise DirectiveSyntaxError(
                    f"unexpected character {text[pos]!r}", text, pos
                )
            if m.lastgroup == "ws":
                pos = m.end()
                continue
            return _Token(m.lastgroup, m.group(), pos)

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.next()
        want = text if text is not None else kind
        if tok.kind != kind or (text is not None and tok.text != text):
            got = tok.text if tok.kind != "end" else "end of directive"
            self.error(f"expected {want!r}, found {got!r}", tok.pos)
        return tok

    def capture_balanced(self) -> str:
        """Consume raw characters after '(' up to its matching ')'.

        Nested parentheses are balanced; the closing ')' is consumed.
        """
        assert self._peeked is None
        start = self.pos
        depth = 1
        i = start
        text = self.text
        while i < len(text):
            ch = text[i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    self.pos = i + 1
                    return text[start:i]
            i += 1
        self.error("unbalanced '(' in expression", start - 1)


def _parse_var_list(sc: _Scanner, kind: str) -> tuple[str, ...]:
    sc.expect("punct", "(")
    names: list[str] = []
    while True:
        tok = sc.next()
        if tok.kind != "ident":
            sc.error(f"expected variable name in {kind!r} clause", tok.pos)
        if tok.text in names:
            sc.error(f"duplicate variable {tok.text!r} in {kind!r} clause", tok.pos)
        names.append(tok.text)
        tok = sc.next()
        if tok.kind == "punct" and tok.text == ",":
            continue
        if tok.kind == "punct" and tok.text == ")":
            return tuple(names)
        sc.error("expected ',' or ')' in variable list", tok.pos)


def _parse_clause(sc: _Scanner, tok: _Token) -> Clause:
    kind = tok.text
    if kind == "nowait":
        return Clause("nowait")
    if kind in _LIST_CLAUSES:
        return Clause(kind, vars=_parse_var_list(sc, kind))
    if kind == "reduction":
        sc.expect("punct", "(")
        op_tok = sc.next()
        if op_tok.kind == "op" or (op_tok.kind == "ident" and op_tok.text in ("min", "max")):
            op = op_tok.text
        else:
            sc.error("expected reduction operator", op_tok.pos)
        if op not in REDUCTION_OPS:
            sc.error(f"unknown reduction operator {op!r}", op_tok.pos)
        sc.expect("punct", ":")
        names: list[str] = []
        while True:
            name_tok = sc.next()
            if name_tok.kind != "ident":
                sc.error("expected variable name in reduction clause", name_tok.pos)
            if name_tok.text in names:
                sc.error(f"duplicate variable {name_tok.text!r} in reduction clause",
                         name_tok.pos)
            names.append(name_tok.text)
            sep = sc.next()
            if sep.kind == "punct" and sep.text == ",":
                continue
            if sep.kind == "punct" and sep.text == ")":
                break
            sc.error("expected ',' or ')' in reduction clause", sep.pos)
        return Clause("reduction", vars=tuple(names), op=op)
    if kind == "schedule":
        sc.expect("punct", "(")
        kind_tok = sc.next()
        if kind_tok.kind != "ident" or kind_tok.text not in SCHEDULE_KINDS:
            sc.error("expected schedule kind (static, dynamic, guided, auto, runtime)",
                     kind_tok.pos)
        chunk = None
        tok2 = sc.next()
        if tok2.kind == "punct" and tok2.text == ",":
            num = sc.next()
            if num.kind != "int":
                sc.error("expected integer chunk size", num.pos)
            chunk = int(num.text)
            if chunk < 1:
                sc.error("chunk size must be a positive integer", num.pos)
            tok2 = sc.next()
        if not (tok2.kind == "punct" and tok2.text == ")"):
            sc.error("expected ')' after schedule", tok2.pos)
        return Clause("schedule", schedule=ScheduleSpec(kind_tok.text, chunk))
    if kind == "collapse":
        sc.expect("punct", "(")
        num = sc.next()
        if num.kind != "int":
            sc.error("expected integer collapse depth", num.pos)
        n = int(num.text)
        if n < 2:
            sc.error("collapse depth must be >= 2", num.pos)
        sc.expect("punct", ")")
        return Clause("collapse", number=n)
    if kind == "default":
        sc.expect("punct", "(")
        mode = sc.next()
        if mode.kind != "ident" or mode.text not in ("shared", "none"):
            sc.error("default mode must be 'shared' or 'none'", mode.pos)
        sc.expect("punct", ")")
        return Clause("default", text=mode.text)
    if kind in ("num_threads", "if"):
        sc.expect("punct", "(")
        raw = sc.capture_balanced().strip()
        if not raw:
            sc.error(f"empty expression in {kind!r} clause", tok.pos)
        return Clause(kind, text=raw)
    raise AssertionError(kind)


def _merge_clauses(sc: _Scanner, parsed: list[tuple[Clause, int]]) -> tuple[Clause, ...]:
    """Merge duplicate list clauses; reject conflicting duplicates."""
    merged: list[Clause] = []
    index: dict[tuple, int] = {}       # merge key -> position in merged
    seen_vars: dict[str, str] = {}     # variable -> data-sharing kind
    for clause, pos in parsed:
        if clause.kind in _DATA_SHARING:
            for v in clause.vars or ():
                prev = seen_vars.get(v)
                if prev is not None:
                    sc.error(
                        f"variable {v!r} appears in both {prev!r} and {clause.kind!r} clauses",
                        pos,
                    )
                seen_vars[v] = clause.kind
        if clause.kind in _SCALAR_CLAUSES:
            if ("scalar", clause.kind) in index:
                sc.error(f"duplicate {clause.kind!r} clause", pos)
            index[("scalar", clause.kind)] = len(merged)
            merged.append(clause)
        elif clause.kind == "nowait":
            if ("nowait",) not in index:
                index[("nowait",)] = len(merged)
                merged.append(clause)
        elif clause.kind == "reduction":
            key = ("reduction", clause.op)
            if key in index:
                old = merged[index[key]]
                merged[index[key]] = Clause("reduction", vars=old.vars + clause.vars,
                                            op=clause.op)
            else:
                index[key] = len(merged)
                merged.append(clause)
        else:  # variable-list clauses
            key = ("list", clause.kind)
            if key in index:
                old = merged[index[key]]
                merged[index[key]] = Clause(clause.kind, vars=old.vars + clause.vars)
            else:
                index[key] = len(merged)
                merged.append(clause)
    return tuple(merged)


def parse(text: str) -> Directive:
    """Parse and validate a directive string.

    Raises :class:`DirectiveSyntaxError` for unknown keywords or clauses,
    malformed argument lists, clauses invalid for the directive, duplicate
    conflicting clauses, and ``copyprivate`` combined with ``nowait`` on
    ``single``.
    """
    sc = _Scanner(text)
    first = sc.next()
    if first.kind != "ident" or first.text not in DIRECTIVE_NAMES:
        got = first.text if first.kind != "end" else "end of directive"
        sc.error(f"expected a directive keyword, found {got!r}", first.pos)
    names = [first.text]
    if first.text == "parallel":
        tok = sc.peek()
        if tok.kind == "ident" and tok.text in ("for", "sections"):
            names.append(sc.next().text)
        elif tok.kind == "ident" and tok.text in DIRECTIVE_NAMES:
            sc.error(f"'parallel' cannot be combined with {tok.text!r}", tok.pos)

    allowed: frozenset[str] = frozenset().union(*(_VALIDITY[n] for n in names))

    parsed: list[tuple[Clause, int]] = []
    while True:
        tok = sc.next()
        if tok.kind == "end":
            break
        if names == ["critical"] and tok.kind == "punct" and tok.text == "(":
            # critical accepts an optional lock name: critical(name)
            name_tok = sc.next()
            if name_tok.kind != "ident":
                sc.error("expected a name after 'critical('", name_tok.pos)
            sc.expect("punct", ")")
            parsed.append((Clause("name", text=name_tok.text), tok.pos))
            continue
        if tok.kind != "ident":
            sc.error(f"expected a clause keyword, found {tok.text!r}", tok.pos)
        if tok.text in DIRECTIVE_NAMES:
            sc.error(f"directive {tok.text!r} cannot be combined with "
                     f"{' '.join(names)!r}", tok.pos)
        if tok.text not in CLAUSE_KINDS:
            sc.error(f"unknown clause {tok.text!r}", tok.pos)
        if tok.text not in allowed:
            sc.error(f"clause {tok.text!r} is not valid for directive "
                     f"{' '.join(names)!r}", tok.pos)
        parsed.append((_parse_clause(sc, tok), tok.pos))

    clauses = _merge_clauses(sc, parsed)

    if "single" in names and any(c.kind == "copyprivate" for c in clauses) and any(
        c.kind == "nowait" for c in clauses
    ):
        sc.error("'copyprivate' and 'nowait' cannot be combined on 'single'", 0)

    return Directive(tuple(names), clauses)


def parse_schedule(text: str) -> ScheduleSpec:
    """Parse a ``kind[,chunk]`` schedule string (as in OMP_SCHEDULE)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (1, 2) or not parts[0]:
        raise ValueError(f"malformed schedule {text!r}")
    kind = parts[0]
    if kind not in SCHEDULE_KINDS:
        raise ValueError(f"unknown schedule kind {kind!r}")
    chunk = None
    if len(parts) == 2:
        if not parts[1].isdigit() or int(parts[1]) < 1:
            raise ValueError(f"malformed schedule chunk {parts[1]!r}")
        chunk = int(parts[1])
    return ScheduleSpec(kind, chunk)
