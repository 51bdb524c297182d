"""Bottom-up semantics over ground programs: T_P, its least fixpoint and
models.  Used both as a second engine and as the oracle the top-down
engine is checked against."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .aggregators import Aggregator, union_aggregate
from .engine import EngineError, Options, Solver, solve_crisp
from .engine import eval_piecewise
from .syntax.program import CrispClause, FuzzyClause, FuzzyFact, Key, Program
from .terms import Atom, Num, Struct, Term, indicator, is_ground, render, resolve, term_vars
from .truthlattice import (
    EMPTY,
    UNIT,
    BorelSet,
    borel_included,
    from_point,
    hausdorff,
    intersect,
)

__all__ = [
    "DefaultFn", "GroundClause", "GroundProgram", "GroundingError", "Interpretation",
    "NonConvergence", "bottom", "ground", "interp_included", "is_model", "lfp",
    "materialize", "meet", "tp_step",
]

MAX_INSTANCES = 1_000_000


class GroundingError(EngineError):
    pass


@dataclass(frozen=True)
class DefaultFn:
    """Predicate (name, source arity) -> default truth, with a global fallback."""

    table: tuple[tuple[Key, BorelSet], ...] = ()
    fallback: BorelSet = UNIT

    def __call__(self, atom: Term) -> BorelSet:
        key = indicator(atom)
        for k, v in self.table:
            if k == key:
                return v
        return self.fallback

    def __eq__(self, other) -> bool:
        if not isinstance(other, DefaultFn):
            return NotImplemented
        return dict(self.table) == dict(other.table) and self.fallback == other.fallback

    __hash__ = None  # BorelSet equality is tolerant, so no hash


@dataclass(frozen=True)
class GroundClause:
    head: Term
    aggregator: Aggregator
    body: tuple[Term, ...]


@dataclass
class GroundProgram:
    facts: list[tuple[Term, BorelSet]] = field(default_factory=list)
    clauses: list[GroundClause] = field(default_factory=list)
    default_fn: DefaultFn = field(default_factory=DefaultFn)

    @property
    def atoms(self) -> frozenset:
        out = {a for a, _ in self.facts}
        for c in self.clauses:
            out.add(c.head)
            out.update(c.body)
        return frozenset(out)

    @property
    def heads(self) -> frozenset:
        return frozenset([a for a, _ in self.facts] + [c.head for c in self.clauses])


@dataclass(frozen=True)
class Interpretation:
    values: Mapping[Term, BorelSet]
    default_fn: DefaultFn = field(default_factory=DefaultFn)

    @property
    def explicit(self) -> frozenset:
        return frozenset(self.values)

    def value(self, atom: Term) -> BorelSet:
        v = self.values.get(atom)
        return v if v is not None else self.default_fn(atom)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interpretation):
            return NotImplemented
        return (self.explicit == other.explicit and self.default_fn == other.default_fn
                and all(self.values[a] == other.values[a] for a in self.values))

    __hash__ = None

    def render(self) -> list[str]:
        return sorted(f"{render(a)} = {v}" for a, v in self.values.items())


class NonConvergence(Exception):
    def __init__(self, previous: Interpretation, last: Interpretation, discrepancy: float,
                 iterations: int):
        self.previous = previous
        self.last = last
        self.discrepancy = discrepancy
        self.iterations = iterations
        super().__init__(f"no fixpoint after {iterations} iterations; "
                         f"max discrepancy {discrepancy:.3g}")


def bottom(gp: GroundProgram) -> Interpretation:
    return Interpretation({}, gp.default_fn)


# -- grounding -----------------------------------------------------------------------

def _constants(term: Term, out: dict) -> None:
    if isinstance(term, (Atom, Num)):
        out.setdefault(term, None)
    elif isinstance(term, Struct):
        for a in term.args:
            _constants(a, out)


def _clause_terms(c) -> list[Term]:
    if isinstance(c, CrispClause):
        return [c.head, *c.body]
    if isinstance(c, FuzzyFact):
        return [c.head, *c.guard]
    return [c.head, *c.body]


def herbrand_universe(program: Program) -> list[Term]:
    """Constants occurring as arguments anywhere in the program."""
    found: dict = {}
    for clauses in program.clauses.values():
        for c in clauses:
            for t in _clause_terms(c):
                if isinstance(t, Struct):
                    for a in t.args:
                        _constants(a, found)
    return list(found)


def ground(program: Program, universe: Iterable[Term] | None = None,
           global_default: BorelSet = UNIT) -> GroundProgram:
    """Instantiate every fuzzy fact and clause over the Herbrand universe.

    Crisp atoms (and ``f_`` wrappers) in fuzzy bodies become ``{1}`` facts
    where provable; piecewise atoms are evaluated at numeric arguments.
    Atoms left without support take their predicate's default.
    """
    solver = Solver(program, Options(global_default=global_default))
    if universe is None:
        for key, clauses in program.clauses.items():
            for c in clauses:
                if isinstance(c, CrispClause):
                    continue
                terms = [c.head, *(c.body if isinstance(c, FuzzyClause) else ())]
                for t in terms:
                    if isinstance(t, Struct) and any(isinstance(a, Struct) for a in t.args):
                        raise GroundingError(
                            f"compound argument in {render(t)}: the Herbrand universe is "
                            "infinite; pass an explicit universe")
        consts = herbrand_universe(program)
    else:
        consts = list(universe)

    facts: list[tuple[Term, BorelSet]] = []
    clauses: list[GroundClause] = []
    derived: dict[Term, BorelSet | None] = {}
    table: dict[Key, BorelSet] = {}

    def body_atom(atom: Term) -> Term:
        key = indicator(atom)
        kind = solver.fuzzy_kind(key)
        table.setdefault(key, solver.default_of(key, kind))
        if kind == "clauses" or atom in derived:
            return atom
        value = None
        if kind == "piecewise":
            x = atom.args[0]
            if isinstance(x, Num):
                value = from_point(eval_piecewise(program.piecewise[key[0]], x))
        else:
            target = atom
            if kind == "fuzzify":
                base = key[0][2:]
                target = Struct(base, atom.args) if key[1] else Atom(base)
            if next(solve_crisp(program, target), None) is not None:
                value = from_point(1.0)
        derived[atom] = value
        if value is not None:
            facts.append((atom, value))
        return atom

    for key, group in program.clauses.items():
        if group and isinstance(group[0], CrispClause):
            continue
        table.setdefault(key, solver.default_of(key, "clauses"))
        for c in group:
            vs = []
            for t in _clause_terms(c):
                for v in term_vars(t):
                    if v not in vs:
                        vs.append(v)
            if vs and not consts:
                continue
            if len(consts) ** len(vs) > MAX_INSTANCES:
                raise GroundingError(f"too many ground instances of {render(c.head)}")
            for combo in itertools.product(consts, repeat=len(vs)):
                sub = dict(zip(vs, combo))
                head = resolve(c.head, sub)
                if isinstance(c, FuzzyFact):
                    if c.guard:
                        goal = resolve(c.guard[0], sub)
                        for g in c.guard[1:]:
                            goal = Struct(",", (goal, resolve(g, sub)))
                        if next(solve_crisp(program, goal), None) is None:
                            continue
                    facts.append((head, c.truth))
                else:
                    body = tuple(body_atom(resolve(g, sub)) for g in c.body)
                    agg = program.registry.resolve(c.aggregator)
                    clauses.append(GroundClause(head, agg, body))

    for name, decl in program.piecewise.items():
        table.setdefault((name, 1), solver.default_of((name, 1), "clauses"))
        for x in consts:
            if isinstance(x, Num):
                atom = Struct(name, (x,))
                if atom not in derived:
                    derived[atom] = from_point(eval_piecewise(decl, x))
                    facts.append((atom, derived[atom]))

    for key in program.defaults:
        table.setdefault(key, program.defaults[key])
    return GroundProgram(facts, clauses, DefaultFn(tuple(table.items()), global_default))


# -- T_P and friends -------------------------------------------------------------------

def support(c: GroundClause, i: Interpretation) -> BorelSet:
    return union_aggregate(c.aggregator, [i.value(b) for b in c.body])


def tp_step(gp: GroundProgram, i: Interpretation) -> Interpretation:
    """One application of T_P, recomputed from scratch."""
    out: dict[Term, BorelSet] = {}
    for atom, v in gp.facts:
        out[atom] = out.get(atom, EMPTY) | v
    for c in gp.clauses:
        v = support(c, i)
        if not v.is_empty:
            out[c.head] = out.get(c.head, EMPTY) | v
    return Interpretation(out, gp.default_fn)


def discrepancy(a: Interpretation, b: Interpretation) -> float:
    atoms = a.explicit | b.explicit
    return max((hausdorff(a.value(x), b.value(x)) for x in atoms), default=0.0)


def close(a: Interpretation, b: Interpretation, eps: float) -> bool:
    return a.explicit == b.explicit and discrepancy(a, b) <= eps


def lfp(gp: GroundProgram, eps: float = 1e-9, max_iters: int = 1000
        ) -> tuple[Interpretation, int]:
    """Iterate T_P from bottom; returns the fixpoint and the number of steps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    prev = bottom(gp)
    for n in range(1, max_iters + 1):
        cur = tp_step(gp, prev)
        if close(prev, cur, eps):
            return cur, n
        if n == max_iters:
            raise NonConvergence(prev, cur, discrepancy(prev, cur), n)
        prev = cur
    raise NonConvergence(prev, prev, 0.0, max_iters)


def is_model(gp: GroundProgram, i: Interpretation) -> bool:
    for atom, v in gp.facts:
        if atom not in i.values or not borel_included(v, i.values[atom]):
            return False
    for c in gp.clauses:
        if c.head not in i.values or not borel_included(support(c, i), i.values[c.head]):
            return False
    return True


def _same_defaults(a: Interpretation, b: Interpretation) -> None:
    if a.default_fn != b.default_fn:
        raise ValueError("interpretations have different default functions")


def meet(a: Interpretation, b: Interpretation) -> Interpretation:
    """Pointwise intersection; atoms whose values are disjoint fall back to default."""
    _same_defaults(a, b)
    out = {}
    for atom in a.explicit & b.explicit:
        v = intersect(a.values[atom], b.values[atom])
        if not v.is_empty:
            out[atom] = v
    return Interpretation(out, a.default_fn)


def interp_included(a: Interpretation, b: Interpretation) -> bool:
    _same_defaults(a, b)
    return all(atom in b.values and borel_included(v, b.values[atom])
               for atom, v in a.values.items())


def materialize(program: Program, interp: Interpretation) -> Program:
    """A program whose fuzzy part is the interpretation's explicit atoms as facts.

    Crisp clauses, declared defaults and the global default carry over, so
    the top-down engine can answer queries against a computed fixpoint.
    """
    clauses: dict[Key, list] = {k: list(v) for k, v in program.clauses.items()
                                if v and isinstance(v[0], CrispClause)}
    for atom, v in interp.values.items():
        key = indicator(atom)
        if not is_ground(atom) or program.is_crisp(key) or (
                key[1] == 1 and key[0] in program.piecewise):
            continue
        clauses.setdefault(key, []).append(FuzzyFact(atom, v))
    defaults = dict(interp.default_fn.table)
    for key in list(defaults):
        if key in clauses and isinstance(clauses[key][0], CrispClause):
            del defaults[key]
    return Program(clauses=clauses, piecewise=dict(program.piecewise), defaults=defaults,
                   registry=program.registry)
