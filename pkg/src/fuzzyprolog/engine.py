"""Top-down evaluation: SLD resolution for crisp goals plus the three fuzzy
transitions (fact, clause, default) with Borel truth values bound directly.

A state is ``(goals, bindings, truths)``.  ``truths`` maps a goal occurrence
(slot) to the BorelSet its atom received.  Clause bodies are followed by an
``Aggregate`` marker that combines the body slots once they are all bound.
"""
from __future__ import annotations

import bisect
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

from .aggregators import Aggregator, union_aggregate
from .syntax.parser import parse_term
from .syntax.program import (
    CRISP_BUILTINS,
    TRUTH_BOUNDS,
    CrispClause,
    FuzzyFact,
    PiecewiseDecl,
    Program,
    conjuncts,
)
from .terms import (
    Atom,
    Bindings,
    Num,
    Struct,
    Term,
    Var,
    indicator,
    mgu,
    render,
    rename,
    resolve,
    term_vars,
    undo,
    unify,
    walk,
)
from .truthlattice import FALSE, TRUE, UNIT, BorelSet, from_point, restrict

__all__ = [
    "Answer", "EngineError", "EvaluationError", "ExistenceError", "Options",
    "ResourceError", "Solver", "eval_piecewise", "fuzzify", "mgu", "solve",
    "solve_crisp", "success_set",
]

DEFAULT_DEPTH = 100_000


class EngineError(Exception):
    pass


class ExistenceError(EngineError):
    pass


class ResourceError(EngineError):
    pass


class EvaluationError(EngineError):
    """Type or instantiation error raised by a built-in or a piecewise predicate."""


@dataclass
class Options:
    strategy: str = "df"
    depth_limit: int = DEFAULT_DEPTH
    # truth of fuzzy atoms without declared default when no rule applies
    global_default: BorelSet = UNIT
    trace: Callable[[str], None] | None = None

    def __post_init__(self):
        if self.strategy not in ("df", "bf"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.depth_limit <= 0:
            raise ValueError("depth limit must be positive")


@dataclass(frozen=True)
class Answer:
    """One answer: bindings of the query variables and the truth value."""

    subst: dict[str, Term]
    truth: BorelSet
    truths: dict[str, BorelSet] = field(default_factory=dict)

    def key(self) -> tuple:
        return tuple(self.subst.items())


# -- goal items ------------------------------------------------------------------

@dataclass(frozen=True)
class Call:
    term: Term


@dataclass(frozen=True)
class Fuzzy:
    atom: Term
    slot: int


@dataclass(frozen=True)
class Aggregate:
    slot: int
    aggregator: Aggregator
    body_slots: tuple[int, ...]


@dataclass(frozen=True)
class Bound:
    slot: int
    op: str
    value: float


Goal = Union[Call, Fuzzy, Aggregate, Bound]


def cons_all(items, rest):
    for g in reversed(items):
        rest = (g, rest)
    return rest


def cons_items(goals) -> list:
    out = []
    while goals is not None:
        out.append(goals[0])
        goals = goals[1]
    return out


class State:
    __slots__ = ("goals", "b", "truths", "depth", "note")

    def __init__(self, goals, b: Bindings, truths: dict, depth: int, note: str | None = None):
        self.goals = goals
        self.b = b
        self.truths = truths
        self.depth = depth
        self.note = note


# -- piecewise membership ------------------------------------------------------------

def eval_piecewise(decl: PiecewiseDecl, x) -> float:
    """Linear interpolation between the declared points, clamped outside them."""
    if isinstance(x, Num):
        x = x.value
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise EvaluationError(f"type error: {decl.name} expects a number, got {x}")
    xs = [p[0] for p in decl.points]
    if x <= xs[0]:
        return decl.points[0][1]
    if x >= xs[-1]:
        return decl.points[-1][1]
    i = bisect.bisect_right(xs, x)
    (x0, m0), (x1, m1) = decl.points[i - 1], decl.points[i]
    return m0 + (m1 - m0) * (x - x0) / (x1 - x0)


# -- arithmetic ----------------------------------------------------------------------

def evaluate(term: Term, b: Bindings):
    t = walk(term, b)
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Var):
        raise EvaluationError("instantiation error in arithmetic")
    if isinstance(t, Struct):
        args = [evaluate(a, b) for a in t.args]
        op = t.functor
        try:
            if len(args) == 2:
                x, y = args
                if op == "+":
                    return x + y
                if op == "-":
                    return x - y
                if op == "*":
                    return x * y
                if op == "/":
                    if isinstance(x, int) and isinstance(y, int) and y != 0 and x % y == 0:
                        return x // y
                    return x / y
                if op == "//":
                    return int(x // y)
                if op == "mod":
                    return x % y
                if op == "min":
                    return min(x, y)
                if op == "max":
                    return max(x, y)
                if op == "**":
                    return x ** y
            if len(args) == 1:
                (x,) = args
                if op == "-":
                    return -x
                if op == "+":
                    return x
                if op == "abs":
                    return abs(x)
        except ZeroDivisionError:
            raise EvaluationError("evaluation error: division by zero") from None
    raise EvaluationError(f"type error: {render(resolve(t, b))} is not evaluable")


_COMPARE = {
    "<": lambda x, y: x < y, ">": lambda x, y: x > y, "=<": lambda x, y: x <= y,
    ">=": lambda x, y: x >= y, "=:=": lambda x, y: x == y, "=\\=": lambda x, y: x != y,
}


def call_builtin(term: Term, b: Bindings) -> bool:
    """Run a crisp built-in, extending ``b`` on success."""
    name, n = indicator(term)
    if name == "true":
        return True
    if name in ("fail", "false"):
        return False
    x, y = term.args
    if name == "=":
        trail: list = []
        if unify(x, y, b, trail):
            return True
        undo(b, trail)
        return False
    if name == "\\=":
        trail = []
        ok = unify(x, y, b, trail)
        undo(b, trail)
        return not ok
    if name == "==":
        return resolve(x, b) == resolve(y, b)
    if name == "\\==":
        return resolve(x, b) != resolve(y, b)
    if name == "is":
        value = Num(evaluate(y, b))
        trail = []
        if unify(x, value, b, trail):
            return True
        undo(b, trail)
        return False
    return _COMPARE[name](evaluate(x, b), evaluate(y, b))


# -- the solver ----------------------------------------------------------------------

class Solver:
    def __init__(self, program: Program, options: Options | None = None):
        self.program = program
        self.opts = options or Options()
        self._ids = itertools.count(1)
        self.referenced = program.referenced_keys()

    def fresh(self) -> int:
        return next(self._ids)

    # classification of atoms in fuzzy position (source arity)
    def fuzzy_kind(self, key: tuple[str, int]) -> str:
        p = self.program
        name, n = key
        cl = p.clauses.get(key)
        if cl and not isinstance(cl[0], CrispClause):
            return "clauses"
        if n == 1 and name in p.piecewise:
            return "piecewise"
        if p.is_crisp(key) or key in CRISP_BUILTINS:
            return "crisp"
        base = (name[2:], n)
        if name.startswith("f_") and (p.is_crisp(base) or base in CRISP_BUILTINS):
            return "fuzzify"
        return "clauses"

    def default_of(self, key: tuple[str, int], kind: str) -> BorelSet:
        declared = self.program.default_for(key)
        if declared is not None:
            return declared
        if kind in ("crisp", "fuzzify"):
            return FALSE
        return self.opts.global_default

    def is_fuzzy_query(self, term: Term) -> bool:
        name, k = indicator(term)
        p = self.program
        if k >= 1:
            key = (name, k - 1)
            if p.is_fuzzy(key) or p.has_default(key):
                return True
            if key in self.referenced and not p.is_crisp(key) and key not in CRISP_BUILTINS:
                return True
        if p.is_crisp((name, k)) or (name, k) in CRISP_BUILTINS:
            return False
        if k >= 1 and name.startswith("f_"):
            base = (name[2:], k - 1)
            if p.is_crisp(base) or base in CRISP_BUILTINS:
                return True
        raise ExistenceError(f"existence error: unknown procedure {name}/{k}")

    # -- state construction helpers --
    def _child(self, parent: State, goals, b: Bindings, truths: dict, note=None) -> State:
        depth = parent.depth + 1
        if depth > self.opts.depth_limit:
            goal = parent.goals[0] if parent.goals else None
            what = ""
            if isinstance(goal, (Call, Fuzzy)):
                t = goal.term if isinstance(goal, Call) else goal.atom
                what = f" while solving {render(resolve(t, parent.b))}"
            raise ResourceError(f"depth limit {self.opts.depth_limit} exceeded{what}")
        return State(goals, b, truths, depth, note)

    def _note(self, rule: int, atom: Term, before: Term, b: Bindings, truth: str) -> str | None:
        if self.opts.trace is None:
            return None
        delta = []
        for v in term_vars(before):
            val = resolve(v, b)
            if val != v:
                delta.append(f"{v}={render(val, 699)}")
        return f"rule{rule} {render(before)} {{{','.join(delta)}}} {truth}"

    # -- reductions: each returns [(bindings, truths, replacement goals, note)] --
    def reduce_fuzzy(self, goal: Fuzzy, b: Bindings, truths: dict, depth: int) -> list:
        atom = walk(goal.atom, b)
        if isinstance(atom, (Var, Num)):
            raise EvaluationError(f"instantiation error: {render(atom)} is not a fuzzy goal")
        key = indicator(atom)
        kind = self.fuzzy_kind(key)
        before = resolve(atom, b) if self.opts.trace else atom
        slot = goal.slot

        if kind == "piecewise":
            decl = self.program.piecewise[key[0]]
            x = walk(atom.args[0], b)
            if isinstance(x, Var):
                raise EvaluationError(f"instantiation error: {decl.name} needs a bound argument")
            mu = from_point(eval_piecewise(decl, x))
            return [(b, {**truths, slot: mu}, (), self._note(1, atom, before, b, str(mu)))]

        if kind in ("crisp", "fuzzify"):
            target = atom
            if kind == "fuzzify":
                base = key[0][2:]
                target = Struct(base, atom.args) if key[1] else Atom(base)
            sols = self.all_solutions(target, b, depth)
            if sols:
                return [(s, {**truths, slot: TRUE}, (), self._note(1, atom, before, s, str(TRUE)))
                        for s in sols]
            d = self.default_of(key, kind)
            return [(b, {**truths, slot: d}, (), self._note(3, atom, before, b, str(d)))]

        alts = []
        for clause in self.program.clauses.get(key, ()):
            mapping: dict = {}
            head = rename(clause.head, mapping, self.fresh)
            trail: list = []
            if not unify(atom, head, b, trail):
                undo(b, trail)
                continue
            delta = [(v, b[v]) for v in trail]
            if isinstance(clause, FuzzyFact):
                if clause.guard:
                    guard = [rename(g, mapping, self.fresh) for g in clause.guard]
                    conj = guard[0]
                    for g in guard[1:]:
                        conj = Struct(",", (conj, g))
                    for s in self.all_solutions(conj, b, depth):
                        alts.append(("fact", s, None, clause))
                else:
                    alts.append(("fact", None, delta, clause))
            else:
                body = [rename(g, mapping, self.fresh) for g in clause.body]
                alts.append(("clause", None, delta, (clause, body)))
            undo(b, trail)

        if not alts:
            d = self.default_of(key, kind)
            return [(b, {**truths, slot: d}, (), self._note(3, atom, before, b, str(d)))]

        out = []
        last = len(alts) - 1
        for i, (what, full, delta, data) in enumerate(alts):
            if full is not None:
                nb = full
            else:
                nb = b if i == last else dict(b)
                nb.update(delta)
            if what == "fact":
                t = data.truth
                out.append((nb, {**truths, slot: t}, (), self._note(1, atom, before, nb, str(t))))
            else:
                clause, body = data
                agg = self.program.registry.resolve(clause.aggregator)
                slots = tuple(self.fresh() for _ in body)
                goals = [Fuzzy(g, s) for g, s in zip(body, slots)]
                goals.append(Aggregate(slot, agg, slots))
                note = self._note(2, atom, before, nb, f"{agg.name}/{len(body)}")
                out.append((nb, truths, tuple(goals), note))
        return out

    def reduce_crisp(self, goal: Call, b: Bindings) -> list:
        term = walk(goal.term, b)
        if isinstance(term, Var):
            raise EvaluationError("instantiation error: unbound goal")
        if isinstance(term, Num):
            raise EvaluationError(f"type error: {render(term)} is not callable")
        key = indicator(term)
        if key == (",", 2):
            return [(b, None, (Call(term.args[0]), Call(term.args[1])), None)]
        if key in CRISP_BUILTINS:
            return [(b, None, (), None)] if call_builtin(term, b) else []
        p = self.program
        if not p.is_crisp(key):
            if p.is_fuzzy(key) or (key[1] >= 1 and p.is_fuzzy((key[0], key[1] - 1))):
                raise EngineError(f"{key[0]}/{key[1]} is fuzzy and cannot be called as a crisp goal")
            raise ExistenceError(f"existence error: unknown procedure {key[0]}/{key[1]}")
        alts = []
        for clause in p.clauses[key]:
            mapping: dict = {}
            head = rename(clause.head, mapping, self.fresh)
            trail: list = []
            if unify(term, head, b, trail):
                body = tuple(Call(rename(g, mapping, self.fresh)) for g in clause.body)
                alts.append(([(v, b[v]) for v in trail], body))
            undo(b, trail)
        out = []
        for i, (delta, body) in enumerate(alts):
            nb = b if i == len(alts) - 1 else dict(b)
            nb.update(delta)
            out.append((nb, None, body, None))
        return out

    # -- depth-first --
    def expand(self, st: State) -> list[State]:
        goal, rest = st.goals
        if isinstance(goal, Call):
            return [self._child(st, cons_all(body, rest), nb, st.truths)
                    for nb, _, body, _ in self.reduce_crisp(goal, st.b)]
        if isinstance(goal, Fuzzy):
            return [self._child(st, cons_all(body, rest), nb, nt, note)
                    for nb, nt, body, note in self.reduce_fuzzy(goal, st.b, st.truths, st.depth)]
        if isinstance(goal, Aggregate):
            value = union_aggregate(goal.aggregator, [st.truths[s] for s in goal.body_slots])
            if value.is_empty:
                return []
            return [self._child(st, rest, st.b, {**st.truths, goal.slot: value})]
        value = restrict(st.truths[goal.slot], goal.op, goal.value)
        if value.is_empty:
            return []
        return [self._child(st, rest, st.b, {**st.truths, goal.slot: value})]

    def run_df(self, init: State) -> Iterator[State]:
        stack = [init]
        trace = self.opts.trace
        while stack:
            st = stack.pop()
            if trace is not None and st.note is not None:
                trace(st.note)
            if st.goals is None:
                yield st
                continue
            stack.extend(reversed(self.expand(st)))

    def all_solutions(self, term: Term, b: Bindings, depth: int) -> list[Bindings]:
        """Every crisp solution of ``term`` (exhaustive, depth-first)."""
        sub = Solver.__new__(Solver)
        sub.program, sub._ids, sub.referenced = self.program, self._ids, self.referenced
        sub.opts = Options(strategy="df", depth_limit=self.opts.depth_limit,
                           global_default=self.opts.global_default, trace=None)
        init = State((Call(term), None), dict(b), {}, depth)
        return [st.b for st in sub.run_df(init)]

    # -- breadth-first: every literal of the goal list is reduced in one step --
    def bf_step(self, st: State) -> list[State]:
        partial = [(st.b, st.truths, [], None)]
        notes_on = self.opts.trace is not None
        for goal in cons_items(st.goals):
            nxt = []
            for b, truths, goals, notes in partial:
                if isinstance(goal, Aggregate):
                    if all(s in truths for s in goal.body_slots):
                        value = union_aggregate(goal.aggregator,
                                                [truths[s] for s in goal.body_slots])
                        if not value.is_empty:
                            nxt.append((b, {**truths, goal.slot: value}, goals, notes))
                    else:
                        nxt.append((b, truths, goals + [goal], notes))
                elif isinstance(goal, Bound):
                    if goal.slot in truths:
                        value = restrict(truths[goal.slot], goal.op, goal.value)
                        if not value.is_empty:
                            nxt.append((b, {**truths, goal.slot: value}, goals, notes))
                    else:
                        nxt.append((b, truths, goals + [goal], notes))
                elif isinstance(goal, Call):
                    for s in self.all_solutions(goal.term, b, st.depth):
                        nxt.append((s, truths, goals, notes))
                else:
                    alts = self.reduce_fuzzy(goal, b if len(partial) == 1 else dict(b),
                                             truths, st.depth)
                    for nb, nt, body, note in alts:
                        ns = (notes or []) + [note] if notes_on and note else notes
                        nxt.append((nb, nt, goals + list(body), ns))
            partial = nxt
        out = []
        for b, truths, goals, notes in partial:
            note = "\n".join(notes) if notes else None
            out.append(self._child(st, cons_all(goals, None), b, truths, note))
        return out

    def run_bf(self, init: State) -> Iterator[State]:
        queue = deque([init])
        trace = self.opts.trace
        while queue:
            st = queue.popleft()
            if trace is not None and st.note is not None:
                for line in st.note.split("\n"):
                    trace(line)
            if st.goals is None:
                yield st
                continue
            before = st.goals
            children = self.bf_step(st)
            for ch in children:
                if ch.goals is not None and ch.goals == before and ch.truths == st.truths:
                    raise EngineError("breadth-first step made no progress")
            queue.extend(children)

    # -- queries --
    def prepare(self, goal: Term, varmap: dict[str, Var]):
        goals: list[Goal] = []
        truth_vars: dict[str, int] = {}
        for g in conjuncts(goal):
            if isinstance(g, Var):
                raise EvaluationError("instantiation error: unbound query goal")
            if isinstance(g, Num):
                raise EvaluationError(f"type error: {render(g)} is not callable")
            name, k = indicator(g)
            if k == 2 and name in TRUTH_BOUNDS:
                goals.append(self._bound(g, truth_vars))
                continue
            if self.is_fuzzy_query(g):
                last = g.args[-1]
                source = Atom(name) if k == 1 else Struct(name, g.args[:-1])
                slot = self.fresh()
                goals.append(Fuzzy(source, slot))
                if isinstance(last, Var):
                    if last.name == "_":
                        continue
                    if last.name in truth_vars:
                        raise EngineError(f"truth variable {last.name} used twice")
                    truth_vars[last.name] = slot
                elif isinstance(last, Num):
                    goals.append(Bound(slot, "=", float(last.value)))
                else:
                    raise EngineError(f"truth argument {render(last)} must be a variable or number")
            else:
                goals.append(Call(g))
        names = [n for n in varmap if n not in truth_vars and not n.startswith("_")]
        first = next((g.slot for g in goals if isinstance(g, Fuzzy)), None)
        primary = next(iter(truth_vars.values()), first)
        return goals, truth_vars, names, primary

    def _bound(self, g: Struct, truth_vars: dict[str, int]) -> Bound:
        op = TRUTH_BOUNDS[g.functor]
        lhs, rhs = g.args
        flip = {"<": ">", ">": "<", "=<": ">=", ">=": "=<", "=": "="}
        if isinstance(lhs, Num) and isinstance(rhs, Var):
            lhs, rhs, op = rhs, lhs, flip[op]
        if not (isinstance(lhs, Var) and lhs.name in truth_vars and isinstance(rhs, Num)):
            raise EngineError(f"truth bound {render(g)} must compare a truth variable "
                              "of an earlier fuzzy goal with a number")
        return Bound(truth_vars[lhs.name], op, float(rhs.value))

    def solve(self, goal: Term | str) -> Iterator[Answer]:
        if isinstance(goal, str):
            goal, varmap = parse_term(goal)
        else:
            varmap = {v.name: v for v in term_vars(goal)}
        goals, truth_vars, names, primary = self.prepare(goal, varmap)
        init = State(cons_all(goals, None), {}, {}, 0)
        run = self.run_bf if self.opts.strategy == "bf" else self.run_df
        for st in run(init):
            yield make_answer(st, varmap, names, truth_vars, primary)


def _canonical(terms: list[Term]) -> list[Term]:
    """Rename unbound variables to _G1, _G2, ... in order of appearance."""
    mapping: dict[Var, Term] = {}
    for t in terms:
        for v in term_vars(t):
            if v not in mapping:
                mapping[v] = Var("G", len(mapping) + 1)
    return [resolve(t, mapping) for t in terms]


def make_answer(st: State, varmap, names, truth_vars, primary=None) -> Answer:
    values = _canonical([resolve(varmap[n], st.b) for n in names])
    truths = {n: st.truths[s] for n, s in truth_vars.items()}
    truth = st.truths[primary] if primary is not None else TRUE
    return Answer(dict(zip(names, values)), truth, truths)


# -- module-level API --------------------------------------------------------------

def solve(program: Program, goal: Term | str, options: Options | None = None) -> Iterator[Answer]:
    """Lazily enumerate one answer per successful derivation."""
    return Solver(program, options).solve(goal)


def success_set(program: Program, goal: Term | str, options: Options | None = None) -> list[Answer]:
    """Answers grouped by substitution, truth values united across derivations."""
    groups: dict[tuple, Answer] = {}
    for ans in solve(program, goal, options):
        k = ans.key()
        prev = groups.get(k)
        if prev is None:
            groups[k] = ans
            continue
        truths = {n: prev.truths[n] | t for n, t in ans.truths.items()}
        groups[k] = Answer(prev.subst, prev.truth | ans.truth, truths)
    return list(groups.values())


def solve_crisp(program: Program, goal: Term | str, options: Options | None = None
                ) -> Iterator[dict[str, Term]]:
    """Plain Prolog resolution; closed world (no answers means false)."""
    solver = Solver(program, options)
    if isinstance(goal, str):
        goal, varmap = parse_term(goal)
    else:
        varmap = {v.name: v for v in term_vars(goal)}
    for g in conjuncts(goal):
        key = indicator(g) if not isinstance(g, (Var, Num)) else None
        if key is not None and key not in CRISP_BUILTINS and not program.is_crisp(key):
            if program.is_fuzzy(key) or solver.fuzzy_kind(key) != "clauses" or \
                    (key[1] >= 1 and program.is_fuzzy((key[0], key[1] - 1))):
                raise EngineError(f"{key[0]}/{key[1]} is not a crisp predicate")
    names = [n for n in varmap if not n.startswith("_")]
    init = State((Call(goal), None), {}, {}, 0)
    for st in solver.run_df(init):
        yield make_answer(st, varmap, names, {}).subst


@dataclass(frozen=True)
class FuzzifiedPredicate:
    name: str
    arity: int
    source: tuple[str, int]


def fuzzify(program: Program, name: str, arity: int) -> FuzzifiedPredicate:
    """The ``f_<name>`` wrapper: truth 1 per crisp solution, default 0 otherwise.

    Wrappers are resolved automatically when ``f_<name>`` is used; this
    function checks that the wrapped predicate is crisp and describes it.
    """
    key = (name, arity)
    if program.is_fuzzy(key):
        raise EngineError(f"cannot fuzzify {name}/{arity}: it is a fuzzy predicate")
    if not program.is_crisp(key) and key not in CRISP_BUILTINS:
        # an empty crisp definition is allowed; every query then takes the default
        pass
    return FuzzifiedPredicate(f"f_{name}", arity + 1, key)
