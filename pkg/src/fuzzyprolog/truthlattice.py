"""Truth values: finite unions of closed subintervals of [0, 1].

A :class:`BorelSet` is always kept in canonical form: intervals sorted by
lower bound, pairwise disjoint and non-touching.  Two sets denote the same
points iff their canonical forms agree endpoint-by-endpoint within ``EPS``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

EPS = 1e-9


class DomainError(ValueError):
    """A truth value endpoint lies outside [0, 1] or an interval is reversed."""


def _snap(x: float) -> float:
    # absorb float noise at the lattice boundaries
    if -EPS <= x < 0.0:
        return 0.0
    if 1.0 < x <= 1.0 + EPS:
        return 1.0
    return x


def format_number(x: float) -> str:
    text = f"{x:.12g}"
    if text == "-0":
        text = "0"
    return text


@dataclass(frozen=True)
class Interval:
    """A closed interval [lo, hi] inside [0, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise DomainError(f"interval [{self.lo},{self.hi}] has a NaN endpoint")
        if lo < -EPS or hi > 1.0 + EPS or lo > hi + EPS:
            raise DomainError(
                f"interval [{format_number(lo)},{format_number(hi)}] is not inside [0,1]"
            )
        lo, hi = _snap(lo), _snap(hi)
        if lo > hi:
            lo = hi = (lo + hi) / 2.0
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def is_point(self) -> bool:
        return abs(self.hi - self.lo) <= EPS

    def contains(self, x: float) -> bool:
        return self.lo - EPS <= x <= self.hi + EPS

    def __str__(self) -> str:
        if self.is_point:
            return format_number(self.lo)
        return f"[{format_number(self.lo)},{format_number(self.hi)}]"


class BorelSet:
    """Canonical finite union of closed intervals.

    Build instances with :func:`canonicalize`, :func:`from_point` or the
    constructor (which canonicalizes).  Equality is structural within ``EPS``,
    so instances are deliberately unhashable.
    """

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] = ()):
        object.__setattr__(self, "intervals", _merge(intervals))

    @classmethod
    def _trusted(cls, intervals: tuple[Interval, ...]) -> "BorelSet":
        obj = object.__new__(cls)
        object.__setattr__(obj, "intervals", intervals)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("BorelSet is immutable")

    __hash__ = None  # type: ignore[assignment]

    def __eq__(self, other) -> bool:
        if not isinstance(other, BorelSet):
            return NotImplemented
        if len(self.intervals) != len(other.intervals):
            return False
        return all(
            abs(a.lo - b.lo) <= EPS and abs(a.hi - b.hi) <= EPS
            for a, b in zip(self.intervals, other.intervals)
        )

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __or__(self, other: "BorelSet") -> "BorelSet":
        return union(self, other)

    def __and__(self, other: "BorelSet") -> "BorelSet":
        return intersect(self, other)

    def __le__(self, other: "BorelSet") -> bool:
        return borel_included(self, other)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def lo(self) -> float:
        return self.intervals[0].lo

    @property
    def hi(self) -> float:
        return self.intervals[-1].hi

    def contains(self, x: float) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def pairs(self) -> list[tuple[float, float]]:
        return [(iv.lo, iv.hi) for iv in self.intervals]

    def __str__(self) -> str:
        if not self.intervals:
            return "empty"
        return "v".join(str(iv) for iv in self.intervals)

    def __repr__(self) -> str:
        return f"BorelSet({self})"


def _merge(raw: Iterable[Interval]) -> tuple[Interval, ...]:
    items = sorted(raw, key=lambda iv: (iv.lo, iv.hi))
    out: list[Interval] = []
    for iv in items:
        if not isinstance(iv, Interval):
            raise TypeError(f"expected Interval, got {iv!r}")
        if out and iv.lo <= out[-1].hi + EPS:
            last = out[-1]
            if iv.hi > last.hi:
                out[-1] = Interval(last.lo, iv.hi)
        else:
            out.append(iv)
    return tuple(out)


def canonicalize(raw: Iterable[Interval | tuple[float, float]]) -> BorelSet:
    """Sort and coalesce overlapping or touching intervals.

    Plain ``(lo, hi)`` pairs are accepted and validated like intervals.
    """
    return BorelSet(iv if isinstance(iv, Interval) else Interval(*iv) for iv in raw)


EMPTY = BorelSet._trusted(())
UNIT = BorelSet._trusted((Interval(0.0, 1.0),))
FALSE = BorelSet._trusted((Interval(0.0, 0.0),))
TRUE = BorelSet._trusted((Interval(1.0, 1.0),))


def from_point(x: float) -> BorelSet:
    """The degenerate truth value {[x, x]}."""
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise DomainError(f"truth value {x!r} is not a number")
    if not (-EPS <= x <= 1.0 + EPS):
        raise DomainError(f"truth value {format_number(x)} is outside [0,1]")
    return BorelSet._trusted((Interval(x, x),))


def from_interval(lo: float, hi: float) -> BorelSet:
    return BorelSet._trusted((Interval(lo, hi),))


def union(a: BorelSet, b: BorelSet) -> BorelSet:
    if not a.intervals:
        return b
    if not b.intervals:
        return a
    return BorelSet._trusted(_merge(a.intervals + b.intervals))


def union_all(sets: Iterable[BorelSet]) -> BorelSet:
    parts: list[Interval] = []
    for s in sets:
        parts.extend(s.intervals)
    return BorelSet._trusted(_merge(parts))


def intersect(a: BorelSet, b: BorelSet) -> BorelSet:
    out: list[Interval] = []
    i = j = 0
    xs, ys = a.intervals, b.intervals
    while i < len(xs) and j < len(ys):
        x, y = xs[i], ys[j]
        lo, hi = max(x.lo, y.lo), min(x.hi, y.hi)
        if lo <= hi + EPS:
            out.append(Interval(lo, max(lo, hi)))
        if x.hi < y.hi:
            i += 1
        else:
            j += 1
    return BorelSet._trusted(_merge(out))


def interval_included(a: Interval, b: Interval) -> bool:
    """[a.lo, a.hi] is nested in [b.lo, b.hi]."""
    return b.lo <= a.lo + EPS and a.hi <= b.hi + EPS


def borel_included(u: BorelSet, v: BorelSet) -> bool:
    """Every interval of ``u`` lies inside a single interval of ``v``.

    Canonical ``v`` has no touching intervals, so this coincides with
    point-set containment.
    """
    j = 0
    ys = v.intervals
    for iv in u.intervals:
        while j < len(ys) and ys[j].hi + EPS < iv.lo:
            j += 1
        if j == len(ys) or not interval_included(iv, ys[j]):
            return False
    return True


def restrict(s: BorelSet, op: str, bound: float) -> BorelSet:
    """Points of ``s`` satisfying ``x op bound``; strict bounds keep the closure."""
    if op == "=":
        return from_point(bound) if s.contains(bound) else EMPTY
    out: list[Interval] = []
    for iv in s.intervals:
        if op in (">", ">="):
            ok = iv.hi > bound + EPS if op == ">" else iv.hi >= bound - EPS
            if ok:
                out.append(Interval(min(max(iv.lo, bound), iv.hi), iv.hi))
        elif op in ("<", "=<"):
            ok = iv.lo < bound - EPS if op == "<" else iv.lo <= bound + EPS
            if ok:
                out.append(Interval(iv.lo, max(min(iv.hi, bound), iv.lo)))
        else:
            raise ValueError(f"unknown truth bound operator {op!r}")
    return BorelSet._trusted(_merge(out))


def hausdorff(a: BorelSet, b: BorelSet) -> float:
    """Hausdorff distance between two point sets; ``inf`` if exactly one is empty."""
    if not a.intervals and not b.intervals:
        return 0.0
    if not a.intervals or not b.intervals:
        return math.inf
    return max(_directed(a, b), _directed(b, a))


def _dist(x: float, s: BorelSet) -> float:
    best = math.inf
    for iv in s.intervals:
        if iv.lo <= x <= iv.hi:
            return 0.0
        best = min(best, abs(x - iv.lo), abs(x - iv.hi))
    return best


def _directed(a: BorelSet, b: BorelSet) -> float:
    # the distance to b peaks at a's endpoints or at midpoints of b's gaps
    candidates = [p for iv in a.intervals for p in (iv.lo, iv.hi)]
    gaps = [(x.hi + y.lo) / 2.0 for x, y in zip(b.intervals, b.intervals[1:])]
    for m in gaps:
        if a.contains(m):
            candidates.append(m)
    return max(_dist(x, b) for x in candidates)

