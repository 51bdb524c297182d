"""Prolog terms, substitutions and unification."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .truthlattice import format_number


@dataclass(frozen=True)
class Var:
    name: str
    # 0 for variables written in source; renamed copies get a fresh id
    id: int = 0

    def __str__(self) -> str:
        return self.name if self.id == 0 else f"_{self.name}{self.id}"


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Num:
    value: Union[int, float]

    def __eq__(self, other) -> bool:
        return isinstance(other, Num) and self.value == other.value

    def __hash__(self) -> int:
        return hash(("num", self.value))

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Struct:
    functor: str
    args: tuple["Term", ...]

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return render(self)


Term = Union[Var, Atom, Num, Struct]
Bindings = dict  # Var -> Term, triangular (values may mention bound variables)

NIL = Atom("[]")


def mklist(items, tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = Struct(".", (item, out))
    return out


def list_items(term: Term) -> list[Term] | None:
    """Elements of a proper list, or None."""
    items = []
    while isinstance(term, Struct) and term.functor == "." and term.arity == 2:
        items.append(term.args[0])
        term = term.args[1]
    return items if term == NIL else None


def indicator(term: Term) -> tuple[str, int]:
    if isinstance(term, Atom):
        return term.name, 0
    if isinstance(term, Struct):
        return term.functor, len(term.args)
    raise TypeError(f"{render(term)} is not callable")


def is_callable(term: Term) -> bool:
    return isinstance(term, (Atom, Struct))


def walk(term: Term, b: Mapping) -> Term:
    while isinstance(term, Var) and term in b:
        term = b[term]
    return term


def resolve(term: Term, b: Mapping) -> Term:
    """Apply the substitution fully."""
    term = walk(term, b)
    if isinstance(term, Struct):
        return Struct(term.functor, tuple(resolve(a, b) for a in term.args))
    return term


def variables(term: Term) -> Iterator[Var]:
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            yield t
        elif isinstance(t, Struct):
            stack.extend(reversed(t.args))


def term_vars(term: Term) -> list[Var]:
    """Distinct variables in left-to-right order."""
    seen: dict[Var, None] = {}
    for v in variables(term):
        seen.setdefault(v, None)
    return list(seen)


def is_ground(term: Term) -> bool:
    return next(variables(term), None) is None


def _occurs(v: Var, term: Term, b: Mapping) -> bool:
    stack = [term]
    while stack:
        t = walk(stack.pop(), b)
        if t == v:
            return True
        if isinstance(t, Struct):
            stack.extend(t.args)
    return False


def unify(x: Term, y: Term, b: Bindings, trail: list | None = None) -> bool:
    """Unify in place, extending ``b``.  Occurs check is always on.

    On failure ``b`` may hold partial bindings; callers pass a ``trail`` list
    (every new binding is appended) when they need to undo them.
    """
    stack = [(x, y)]
    while stack:
        s, t = stack.pop()
        s, t = walk(s, b), walk(t, b)
        if s is t or s == t:
            continue
        if isinstance(s, Var) and isinstance(t, Var) and s.id < t.id:
            # bind the fresher variable so answers and traces keep source names
            s, t = t, s
        if isinstance(s, Var):
            if _occurs(s, t, b):
                return False
            b[s] = t
            if trail is not None:
                trail.append(s)
        elif isinstance(t, Var):
            if _occurs(t, s, b):
                return False
            b[t] = s
            if trail is not None:
                trail.append(t)
        elif isinstance(s, Struct) and isinstance(t, Struct):
            if s.functor != t.functor or len(s.args) != len(t.args):
                return False
            stack.extend(zip(s.args, t.args))
        else:
            return False
    return True


def undo(b: Bindings, trail: list, mark: int = 0) -> None:
    while len(trail) > mark:
        del b[trail.pop()]


def mgu(t1: Term, t2: Term) -> dict[Var, Term] | None:
    """Idempotent most general unifier, or None when the terms clash."""
    b: Bindings = {}
    if not unify(t1, t2, b):
        return None
    return {v: resolve(v, b) for v in b}


def rename(term: Term, mapping: dict[Var, Var], fresh) -> Term:
    if isinstance(term, Var):
        if term.name == "_":
            return Var("_", fresh())
        v = mapping.get(term)
        if v is None:
            v = mapping[term] = Var(term.name, fresh())
        return v
    if isinstance(term, Struct):
        return Struct(term.functor, tuple(rename(a, mapping, fresh) for a in term.args))
    return term


# -- rendering ---------------------------------------------------------------

INFIX = {
    ":-": (1200, "xfx"), ":~": (1200, "xfx"), ":#": (1200, "xfx"),
    ";": (1100, "xfy"), "->": (1050, "xfy"), ",": (1000, "xfy"),
    "=": (700, "xfx"), "\\=": (700, "xfx"), "==": (700, "xfx"), "\\==": (700, "xfx"),
    "is": (700, "xfx"), "<": (700, "xfx"), ">": (700, "xfx"), "=<": (700, "xfx"),
    ">=": (700, "xfx"), "=:=": (700, "xfx"), "=\\=": (700, "xfx"),
    ".<.": (700, "xfx"), ".>.": (700, "xfx"), ".=<.": (700, "xfx"), ".<=.": (700, "xfx"),
    ".>=.": (700, "xfx"), ".=.": (700, "xfx"),
    "+": (500, "yfx"), "-": (500, "yfx"),
    "*": (400, "yfx"), "/": (400, "yfx"), "//": (400, "yfx"), "mod": (400, "yfx"),
    "**": (200, "xfx"), "v": (100, "yfx"),
}
PREFIX = {":-": (1200, "fx"), "?-": (1200, "fx"), "\\+": (900, "fy"), "-": (200, "fy"),
          "+": (200, "fy")}

_PLAIN_ATOM = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_SYMBOL_ATOM = re.compile(r"^[+\-*/\\^<>=~:.?@#&$]+$")


def quote_atom(name: str) -> str:
    if _PLAIN_ATOM.match(name) or _SYMBOL_ATOM.match(name) or name in ("[]", "!", ";", "{}"):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def render(term: Term, prec: int = 1200) -> str:
    if isinstance(term, Var):
        return str(term)
    if isinstance(term, Num):
        v = term.value
        text = str(v) if isinstance(v, int) else format_number(v)
        if isinstance(v, float) and "." not in text and "e" not in text and "inf" not in text:
            text += ".0"
        return text
    if isinstance(term, Atom):
        text = quote_atom(term.name)
        if term.name in INFIX or term.name in PREFIX:
            return f"({text})" if prec < 1200 else text
        return text
    items = list_items(term)
    if items is not None:
        return "[" + ",".join(render(a, 999) for a in items) + "]"
    if term.functor == "." and term.arity == 2:
        head, tail = [], term
        while isinstance(tail, Struct) and tail.functor == "." and tail.arity == 2:
            head.append(render(tail.args[0], 999))
            tail = tail.args[1]
        return "[" + ",".join(head) + "|" + render(tail, 999) + "]"
    if term.functor == "{}" and term.arity == 1:
        return "{" + render(term.args[0], 1200) + "}"
    if term.functor == "," and term.arity == 2 and prec < 1000:
        return "(" + render(term, 1200) + ")"
    if term.arity == 2 and term.functor in INFIX:
        p, kind = INFIX[term.functor]
        lp = p - 1 if kind[0] == "x" else p
        rp = p - 1 if kind[2] == "x" else p
        op = term.functor
        sep = op if op in (",",) else (f" {op} " if op.isalpha() or op in (":-", ":~", ":#") else op)
        text = render(term.args[0], lp) + sep + render(term.args[1], rp)
        return f"({text})" if p > prec else text
    if term.arity == 1 and term.functor in PREFIX and term.functor != "+":
        p, kind = PREFIX[term.functor]
        arg = term.args[0]
        inner = render(arg, p if kind == "fy" else p - 1)
        # keep "- 1" distinct from the number -1
        text = f"{term.functor} {inner}" if isinstance(arg, Num) or inner[:1] in "-+" else term.functor + inner
        return f"({text})" if p > prec else text
    return quote_atom(term.functor) + "(" + ",".join(render(a, 999) for a in term.args) + ")"
