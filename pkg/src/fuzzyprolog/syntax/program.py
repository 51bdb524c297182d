"""Program model: clause kinds, classification of parsed statements, validation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..aggregators import DEFAULT_REGISTRY, Registry
from ..truthlattice import UNIT, BorelSet, DomainError, format_number, from_interval, from_point, union
from ..terms import Atom, Num, Struct, Term, Var, indicator, list_items, render
from .lexer import FplSyntaxError
from .parser import Statement, parse_statements

Key = tuple[str, int]

DEFAULT_AGGREGATOR = "min"

CRISP_BUILTINS: set[Key] = {
    ("true", 0), ("fail", 0), ("false", 0),
    ("=", 2), ("\\=", 2), ("==", 2), ("\\==", 2), ("is", 2),
    ("<", 2), (">", 2), ("=<", 2), (">=", 2), ("=:=", 2), ("=\\=", 2),
}
TRUTH_BOUNDS = {".<.": "<", ".=<.": "=<", ".<=.": "=<", ".>.": ">", ".>=.": ">=", ".=.": "="}
UNSUPPORTED = {("!", 0): "cut", (";", 2): "disjunction", ("->", 2): "if-then-else",
               ("\\+", 1): "negation as failure"}


@dataclass(frozen=True)
class CrispClause:
    head: Term
    body: tuple[Term, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FuzzyFact:
    """``head :~ truth``.  A non-empty ``guard`` is a crisp condition that must
    succeed for the fact to apply (the ``f_p(X,1) :- p(X)`` idiom)."""

    head: Term
    truth: BorelSet
    guard: tuple[Term, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class FuzzyClause:
    head: Term
    aggregator: str
    body: tuple[Term, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PiecewiseDecl:
    name: str
    points: tuple[tuple[float, float], ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DefaultDecl:
    name: str
    arity: int
    value: BorelSet
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.severity}: {self.message}"


class ProgramError(Exception):
    """Raised when a program fails to parse or validate."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


Clause = CrispClause | FuzzyFact | FuzzyClause


@dataclass
class Program:
    clauses: dict[Key, list] = field(default_factory=dict)
    piecewise: dict[str, PiecewiseDecl] = field(default_factory=dict)
    # resolved to source arity (no truth argument)
    defaults: dict[Key, BorelSet] = field(default_factory=dict)
    # declarations for predicates with no clauses; arity as written
    open_defaults: dict[Key, BorelSet] = field(default_factory=dict)
    declarations: list[DefaultDecl] = field(default_factory=list)
    registry: Registry = field(default=DEFAULT_REGISTRY, compare=False, repr=False)
    warnings: list[Diagnostic] = field(default_factory=list, compare=False)

    # -- classification --------------------------------------------------------
    def is_fuzzy(self, key: Key) -> bool:
        cl = self.clauses.get(key)
        if cl and not isinstance(cl[0], CrispClause):
            return True
        if key[1] == 1 and key[0] in self.piecewise:
            return True
        return key in self.defaults

    def is_crisp(self, key: Key) -> bool:
        cl = self.clauses.get(key)
        return bool(cl) and isinstance(cl[0], CrispClause)

    def default_for(self, key: Key) -> BorelSet | None:
        """Declared default for a fuzzy predicate given its source arity."""
        if key in self.defaults:
            return self.defaults[key]
        name, n = key
        for k in (n + 1, n):
            if (name, k) in self.open_defaults:
                return self.open_defaults[(name, k)]
        return None

    def has_default(self, key: Key) -> bool:
        return self.default_for(key) is not None

    def fuzzy_keys(self) -> list[Key]:
        keys = [k for k in self.clauses if self.is_fuzzy(k)]
        keys += [(n, 1) for n in self.piecewise if (n, 1) not in keys]
        keys += [k for k in self.defaults if k not in keys]
        return keys

    def referenced_keys(self) -> set[Key]:
        """Predicates called from fuzzy clause bodies (these are fuzzy even if undefined)."""
        out = set()
        for clauses in self.clauses.values():
            for c in clauses:
                if isinstance(c, FuzzyClause):
                    out.update(indicator(g) for g in c.body)
        return out

    def crisp_keys(self) -> list[Key]:
        return [k for k in self.clauses if self.is_crisp(k)]

    # -- rendering ---------------------------------------------------------------
    def render(self) -> str:
        lines = []
        for d in self.declarations:
            lines.append(f":- default({render(Atom(d.name))}/{d.arity}, {d.value}).")
        for p in self.piecewise.values():
            pts = ",".join(f"({format_number(x)},{format_number(m)})" for x, m in p.points)
            lines.append(f"{render(Atom(p.name))} :# fuzzy_predicate([{pts}]).")
        for clauses in self.clauses.values():
            for c in clauses:
                lines.append(render_clause(c))
        return "\n".join(lines) + ("\n" if lines else "")


def render_truth_arg(truth: BorelSet) -> str:
    if len(truth) == 1 and truth.intervals[0].is_point:
        return format_number(truth.lo)
    parts = [f"[{format_number(iv.lo)},{format_number(iv.hi)}]" for iv in truth]
    return "v".join(parts)


def render_clause(c: Clause) -> str:
    if isinstance(c, CrispClause):
        if not c.body:
            return render(c.head, 1199) + "."
        return render(c.head, 1199) + " :- " + ", ".join(render(g, 999) for g in c.body) + "."
    if isinstance(c, FuzzyFact):
        if c.guard:
            head = c.head
            args = head.args if isinstance(head, Struct) else ()
            inner = ",".join(render(a, 999) for a in args)
            name = render(Atom(indicator(head)[0]))
            text = f"{name}({inner + ',' if inner else ''}{render_truth_arg(c.truth)})"
            return text + " :- " + ", ".join(render(g, 999) for g in c.guard) + "."
        return f"{render(c.head, 1199)} :~ {render_truth_arg(c.truth)}."
    return (f"{render(c.head, 1199)} :~ {c.aggregator} "
            + ", ".join(render(g, 999) for g in c.body) + ".")


# -- statement classification ----------------------------------------------------

def conjuncts(term: Term) -> list[Term]:
    out = []
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Struct) and t.functor == "," and t.arity == 2:
            stack.append(t.args[1])
            stack.append(t.args[0])
        else:
            out.append(t)
    return out


def truth_from_term(term: Term) -> BorelSet:
    """Truth literal: number, ``[lo,hi]`` or unions of those joined by ``v``."""
    if isinstance(term, Num):
        return from_point(float(term.value))
    if isinstance(term, Struct) and term.functor == "v" and term.arity == 2:
        return union(truth_from_term(term.args[0]), truth_from_term(term.args[1]))
    items = list_items(term)
    if items is not None and len(items) == 2 and all(isinstance(x, Num) for x in items):
        return from_interval(float(items[0].value), float(items[1].value))
    raise ValueError(f"{render(term)} is not a truth value")


def is_truth_literal(term: Term) -> bool:
    try:
        truth_from_term(term)
    except (ValueError, DomainError):
        return False
    return True


def strip_last(term: Term) -> Term:
    name, n = indicator(term)
    if n == 1:
        return Atom(name)
    return Struct(name, term.args[:-1])


def _singleton(t: Term, counts: dict[str, int]) -> bool:
    return isinstance(t, Var) and (t.name == "_" or counts.get(t.name, 0) == 1)


def explicit_truth_form(head: Term, goals: list[Term], counts: dict[str, int]) -> bool:
    """Clause written with truth variables as last arguments, e.g.
    ``t(X,V) :~ f(X,V1), g(X,V2)``: each truth slot is a singleton variable."""
    if not goals or not isinstance(head, Struct) or not _singleton(head.args[-1], counts):
        return False
    return all(isinstance(g, Struct) and _singleton(g.args[-1], counts) for g in goals)


class _Builder:
    def __init__(self, registry: Registry):
        self.registry = registry
        self.errors: list[Diagnostic] = []
        self.warnings: list[Diagnostic] = []
        self.decls: list[DefaultDecl] = []
        self.piecewise: dict[str, PiecewiseDecl] = {}
        self.fuzzy: list[tuple[Key, Clause]] = []
        self.crisp: list[tuple[Statement, Term, tuple[Term, ...]]] = []
        self.order: list[tuple[str, int]] = []

    def err(self, msg: str, st: Statement | None = None) -> None:
        self.errors.append(Diagnostic("error", msg, st.line if st else 0, st.col if st else 0))

    def add(self, st: Statement) -> None:
        try:
            if st.kind == "directive":
                self.directive(st)
            elif st.kind == "declare":
                self.declare(st)
            elif st.kind == "fuzzy":
                self.fuzzy_statement(st)
            else:
                self.crisp_statement(st)
        except (ValueError, DomainError, TypeError) as e:
            self.err(str(e), st)

    def directive(self, st: Statement) -> None:
        g = st.head
        if not (isinstance(g, Struct) and g.functor == "default" and g.arity == 2):
            raise ValueError(f"unsupported directive {render(g)}")
        spec, lit = g.args
        if not (isinstance(spec, Struct) and spec.functor == "/" and spec.arity == 2
                and isinstance(spec.args[0], Atom) and isinstance(spec.args[1], Num)
                and isinstance(spec.args[1].value, int)):
            raise ValueError(f"default expects name/arity, got {render(spec)}")
        value = truth_from_term(lit)
        self.decls.append(DefaultDecl(spec.args[0].name, spec.args[1].value, value, st.line))

    def declare(self, st: Statement) -> None:
        if not isinstance(st.head, Atom):
            raise ValueError(f"':#' expects a predicate name, got {render(st.head)}")
        body = st.body
        if not (isinstance(body, Struct) and body.functor == "fuzzy_predicate" and body.arity == 1):
            raise ValueError("':#' expects fuzzy_predicate([(x,mu),...])")
        items = list_items(body.args[0])
        if items is None:
            raise ValueError("fuzzy_predicate expects a list of (x,mu) pairs")
        points = []
        for it in items:
            if not (isinstance(it, Struct) and it.functor == "," and it.arity == 2
                    and all(isinstance(a, Num) for a in it.args)):
                raise ValueError(f"bad membership point {render(it)}")
            points.append((float(it.args[0].value), float(it.args[1].value)))
        name = st.head.name
        if name in self.piecewise:
            raise ValueError(f"{name} declared twice with fuzzy_predicate")
        if len(points) < 2:
            raise ValueError(f"{name}: fuzzy_predicate needs at least 2 points")
        for (x0, _), (x1, _) in zip(points, points[1:]):
            if not x1 > x0:
                raise ValueError(f"{name}: x not strictly increasing at {format_number(x1)}")
        for x, mu in points:
            if not 0.0 <= mu <= 1.0:
                raise ValueError(f"{name}: membership {format_number(mu)} outside [0,1]")
        self.piecewise[name] = PiecewiseDecl(name, tuple(points), st.line)

    def check_body(self, goals: Iterable[Term]) -> None:
        for g in goals:
            if isinstance(g, (Var, Num)):
                raise ValueError(f"{render(g)} is not a callable goal")
            key = indicator(g)
            if key in UNSUPPORTED:
                raise ValueError(f"{UNSUPPORTED[key]} ({key[0]}) is not supported")
            if key[1] == 2 and key[0] in TRUTH_BOUNDS:
                raise ValueError(f"truth bound {key[0]} is only allowed in queries")

    def fuzzy_statement(self, st: Statement) -> None:
        head = st.head
        if isinstance(head, (Var, Num)):
            raise ValueError(f"{render(head)} cannot be a clause head")
        if st.empty_fuzzy:
            if not isinstance(head, Struct):
                raise ValueError(f"'{render(head)} :~ .' needs the truth value as last argument")
            truth = truth_from_term(head.args[-1])
            h = strip_last(head)
            self.fuzzy.append((indicator(h), FuzzyFact(h, truth, line=st.line)))
            return
        if st.truth_term is not None:
            truth = truth_from_term(st.truth_term)
            self.fuzzy.append((indicator(head), FuzzyFact(head, truth, line=st.line)))
            return
        goals = conjuncts(st.body)
        self.check_body(goals)
        if explicit_truth_form(head, goals, st.var_counts):
            head = strip_last(head)
            goals = [strip_last(g) for g in goals]
        agg = st.aggregator or DEFAULT_AGGREGATOR
        if agg not in self.registry:
            raise ValueError(f"unknown aggregator {agg!r}")
        self.fuzzy.append((indicator(head), FuzzyClause(head, agg, tuple(goals), st.line)))

    def crisp_statement(self, st: Statement) -> None:
        head = st.head
        if isinstance(head, (Var, Num)):
            raise ValueError(f"{render(head)} cannot be a clause head")
        goals = tuple(conjuncts(st.body)) if st.body is not None else ()
        self.check_body(goals)
        self.crisp.append((st, head, goals))

    def build(self) -> Program:
        fuzzy_keys = {k for k, _ in self.fuzzy} | {(n, 1) for n in self.piecewise}
        declared: dict[Key, DefaultDecl] = {}
        for d in self.decls:
            key = (d.name, d.arity)
            if key in declared:
                self.errors.append(Diagnostic("error", f"duplicate default for {d.name}/{d.arity}", d.line))
            declared[key] = d

        clauses: dict[Key, list] = {}
        for key, c in self.fuzzy:
            clauses.setdefault(key, []).append(c)
        crisp_keys: set[Key] = set()
        for st, head, goals in self.crisp:
            name, k = indicator(head)
            truth_headed = k >= 1 and ((name, k) in declared or (name, k - 1) in fuzzy_keys)
            if truth_headed:
                last = head.args[-1]
                if not is_truth_literal(last):
                    if (name, k - 1) in fuzzy_keys:
                        self.err(f"{name}/{k} clashes with the query form of fuzzy {name}/{k - 1}", st)
                    else:
                        self.err(f"default declared for crisp predicate {name}/{k}", st)
                    continue
                h = strip_last(head)
                clauses.setdefault((name, k - 1), []).append(
                    FuzzyFact(h, truth_from_term(last), goals, st.line))
                fuzzy_keys.add((name, k - 1))
            else:
                clauses.setdefault((name, k), []).append(CrispClause(head, goals, st.line))
                crisp_keys.add((name, k))

        for key in crisp_keys & fuzzy_keys:
            self.errors.append(Diagnostic("error", f"{key[0]}/{key[1]} both crisp and fuzzy"))
        for name in self.piecewise:
            if any(not isinstance(c, CrispClause) for c in clauses.get((name, 1), ())):
                self.errors.append(Diagnostic(
                    "error", f"{name}/1 has both fuzzy_predicate and fuzzy clauses",
                    self.piecewise[name].line))

        defaults: dict[Key, BorelSet] = {}
        open_defaults: dict[Key, BorelSet] = {}
        owner: dict[Key, DefaultDecl] = {}
        for (name, k), d in declared.items():
            if (name, k - 1) in fuzzy_keys:
                target = (name, k - 1)
            elif (name, k) in fuzzy_keys:
                target = (name, k)
            elif (name, k) in crisp_keys:
                self.errors.append(Diagnostic(
                    "error", f"default declared for crisp predicate {name}/{k}", d.line))
                continue
            else:
                open_defaults[(name, k)] = d.value
                continue
            if target in owner:
                self.errors.append(Diagnostic(
                    "error", f"duplicate default for {target[0]}/{target[1] + 1}", d.line))
                continue
            owner[target] = d
            defaults[target] = d.value

        for key in sorted(fuzzy_keys):
            if key not in defaults and not (key[1] == 1 and key[0] in self.piecewise):
                first = clauses.get(key, [None])[0]
                self.warnings.append(Diagnostic(
                    "warning",
                    f"{key[0]}/{key[1] + 1} has no default declaration; using {UNIT}",
                    first.line if first is not None else 0, 1))

        # keep clause groups in first-appearance order of their keys
        return Program(clauses=clauses, piecewise=dict(self.piecewise), defaults=defaults,
                       open_defaults=open_defaults, declarations=list(self.decls),
                       registry=self.registry, warnings=self.warnings)


def build_program(statements: list[Statement], registry: Registry = DEFAULT_REGISTRY
                  ) -> tuple[Program, list[Diagnostic]]:
    b = _Builder(registry)
    for st in statements:
        b.add(st)
    program = b.build()
    return program, b.errors + b.warnings


def parse_program(source: str, registry: Registry = DEFAULT_REGISTRY) -> Program:
    """Parse and validate; raises :class:`ProgramError` listing every error."""
    try:
        statements = parse_statements(source)
    except FplSyntaxError as e:
        raise ProgramError([Diagnostic("error", e.message, e.line, e.col)]) from e
    program, diags = build_program(statements, registry)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ProgramError(errors)
    return program


def validate(program: Program) -> list[Diagnostic]:
    """Re-check an already built program's invariants.

    Programs assembled by hand (not through :func:`parse_program`) go through
    the same checks by rendering and rebuilding.
    """
    try:
        statements = parse_statements(program.render())
    except FplSyntaxError as e:
        return [Diagnostic("error", e.message, e.line, e.col)]
    _, diags = build_program(statements, program.registry)
    return diags
