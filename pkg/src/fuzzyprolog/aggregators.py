"""Aggregation operators and their lifts to intervals and unions of intervals."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterator, Sequence

from .truthlattice import EMPTY, BorelSet, Interval, _merge

PointFn = Callable[[Sequence[float]], float]

AXIOM_TOL = 1e-12


class RegistrationError(ValueError):
    pass


class AggregatorValidationError(RegistrationError):
    def __init__(self, message: str, counterexample: tuple[float, ...]):
        super().__init__(f"{message}; counterexample {counterexample}")
        self.counterexample = counterexample


class UnknownAggregator(LookupError):
    pass


@dataclass(frozen=True)
class Aggregator:
    """A named aggregation ``f: [0,1]^n -> [0,1]`` defined for every n >= 1."""

    name: str
    point_fn: PointFn

    def __call__(self, *xs: float) -> float:
        return self.point_fn(xs)


def fold(binary: Callable[[float, float], float]) -> PointFn:
    """n-ary operator from a binary one by left fold."""
    return lambda xs: reduce(binary, xs)


def _luka(x: float, y: float) -> float:
    return max(0.0, x + y - 1.0)


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


BUILTINS = (
    Aggregator("min", fold(min)),
    Aggregator("max", fold(max)),
    Aggregator("prod", fold(lambda x, y: x * y)),
    Aggregator("luka", fold(_luka)),
    Aggregator("mean", _mean),
)


def check_axioms(agg: Aggregator, samples: int = 200, seed: int = 0) -> None:
    """Boundary conditions exactly and monotonicity by random spot checks.

    Raises :class:`AggregatorValidationError` carrying the failing tuple.
    """
    rng = random.Random(seed)
    for n in range(1, 5):
        for v in (0.0, 1.0):
            args = (v,) * n
            got = agg.point_fn(args)
            if abs(got - v) > AXIOM_TOL:
                raise AggregatorValidationError(
                    f"{agg.name}: f{args} = {got}, expected {v}", args
                )
        for _ in range(samples):
            xs = [rng.random() for _ in range(n)]
            k = rng.randrange(n)
            ys = list(xs)
            ys[k] = xs[k] + (1.0 - xs[k]) * rng.random()
            fx, fy = agg.point_fn(xs), agg.point_fn(ys)
            if not (0.0 - AXIOM_TOL <= fx <= 1.0 + AXIOM_TOL):
                raise AggregatorValidationError(f"{agg.name} leaves [0,1]", tuple(xs))
            if fy < fx - AXIOM_TOL:
                raise AggregatorValidationError(
                    f"{agg.name} is not monotone in argument {k + 1}", tuple(ys)
                )


class Registry:
    """Name -> aggregator table consulted when clauses are validated."""

    def __init__(self, aggregators: Sequence[Aggregator] = BUILTINS):
        self._table: dict[str, Aggregator] = {}
        for agg in aggregators:
            self.register(agg)

    def register(self, agg: Aggregator, check: bool = True) -> None:
        if agg.name in self._table:
            raise RegistrationError(f"aggregator {agg.name!r} is already registered")
        if check:
            check_axioms(agg)
        self._table[agg.name] = agg

    def resolve(self, name: str) -> Aggregator:
        try:
            return self._table[name]
        except KeyError:
            raise UnknownAggregator(f"unknown aggregator {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._table

    def names(self) -> list[str]:
        return sorted(self._table)


DEFAULT_REGISTRY = Registry()


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def interval_aggregate(agg: Aggregator, args: Sequence[Interval]) -> Interval:
    """Apply ``agg`` to the lower endpoints and to the upper endpoints."""
    if not args:
        raise ValueError("interval_aggregate needs at least one argument")
    lo = _clamp(agg.point_fn([iv.lo for iv in args]))
    hi = _clamp(agg.point_fn([iv.hi for iv in args]))
    return Interval(lo, hi)


def _products(args: Sequence[BorelSet]) -> Iterator[tuple[Interval, ...]]:
    return itertools.product(*(a.intervals for a in args))


def union_aggregate(agg: Aggregator, args: Sequence[BorelSet]) -> BorelSet:
    """Union of interval aggregates over every choice of one component per argument."""
    if not args:
        raise ValueError("union_aggregate needs at least one argument")
    if any(a.is_empty for a in args):
        return EMPTY
    return BorelSet._trusted(_merge(interval_aggregate(agg, combo) for combo in _products(args)))
