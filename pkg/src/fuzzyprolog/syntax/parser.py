"""Operator-precedence parser producing raw statements.

The parser knows nothing about fuzzy semantics beyond the shape of the
``:~`` right-hand side (optional aggregator name, truth literal or body).
Classification into facts/clauses happens in :mod:`.program`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..terms import INFIX, NIL, PREFIX, Atom, Num, Struct, Term, Var, mklist
from .lexer import FplSyntaxError, Token, tokenize

TERM_START = {"name", "var", "num"}


@dataclass
class Statement:
    kind: str  # fact, rule, fuzzy, declare, directive
    head: Term | None
    body: Term | None = None
    aggregator: str | None = None
    truth_term: Term | None = None
    # "p :~ ." (truth value carried in the head's last argument)
    empty_fuzzy: bool = False
    line: int = 0
    col: int = 0
    var_counts: dict = field(default_factory=dict)


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0
        self.varmap: dict[str, Var] = {}
        self.var_counts: dict[str, int] = {}

    # -- token helpers -----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None) -> FplSyntaxError:
        tok = tok or self.tok
        return FplSyntaxError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or ("." if kind == "end" else kind)
            got = t.text or ("end of input" if t.kind == "eof" else t.kind)
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    def is_punct(self, text: str, tok: Token | None = None) -> bool:
        tok = tok or self.tok
        return tok.kind == "punct" and tok.text == text

    def starts_term(self, tok: Token) -> bool:
        if tok.kind in TERM_START:
            return True
        return tok.kind == "punct" and tok.text in "([{"

    # -- terms ---------------------------------------------------------------
    def make_var(self, name: str) -> Var:
        if name == "_":
            return Var("_")
        self.var_counts[name] = self.var_counts.get(name, 0) + 1
        v = self.varmap.get(name)
        if v is None:
            v = self.varmap[name] = Var(name)
        return v

    def parse(self, max_prec: int) -> Term:
        left, left_prec = self.parse_primary(max_prec)
        return self.parse_infix(left, left_prec, max_prec)

    def parse_infix(self, left: Term, left_prec: int, max_prec: int) -> Term:
        while True:
            t = self.tok
            if t.kind == "punct" and t.text == ",":
                name = ","
            elif t.kind == "punct" and t.text == "|":
                name = ";"
            elif t.kind == "name" and not t.functional and t.value in INFIX:
                name = t.value
            elif t.kind == "name" and t.functional and t.value in INFIX and t.value != "v":
                name = t.value
            else:
                return left
            prec, kind = INFIX[name]
            if prec > max_prec:
                return left
            la = prec - 1 if kind[0] == "x" else prec
            ra = prec - 1 if kind[2] == "x" else prec
            if left_prec > la:
                return left
            nxt = self.peek()
            if not self.starts_term(nxt) and not (nxt.kind == "name"):
                return left
            self.advance()
            right = self.parse(ra)
            left, left_prec = Struct(name, (left, right)), prec

    def parse_arglist(self) -> list[Term]:
        args = [self.parse(999)]
        while self.is_punct(","):
            self.advance()
            args.append(self.parse(999))
        return args

    def parse_primary(self, max_prec: int) -> tuple[Term, int]:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(t.value), 0
        if t.kind == "var":
            self.advance()
            return self.make_var(t.value), 0
        if t.kind == "punct":
            if t.text == "(":
                self.advance()
                inner = self.parse(1200)
                self.expect("punct", ")")
                return inner, 0
            if t.text == "[":
                self.advance()
                items = self.parse_arglist()
                tail: Term = NIL
                if self.is_punct("|"):
                    self.advance()
                    tail = self.parse(999)
                self.expect("punct", "]")
                return mklist(items, tail), 0
            if t.text == "{":
                self.advance()
                inner = self.parse(1200)
                self.expect("punct", "}")
                return Struct("{}", (inner,)), 0
            raise self.error(f"unexpected {t.text!r}")
        if t.kind == "name":
            self.advance()
            name = t.value
            if t.functional:
                self.expect("punct", "(")
                args = self.parse_arglist()
                self.expect("punct", ")")
                return Struct(name, tuple(args)), 0
            nxt = self.tok
            if name == "-" and nxt.kind == "num" and nxt.glued:
                self.advance()
                return Num(-nxt.value), 0
            if name in PREFIX and self.starts_term(nxt) and not (
                nxt.kind == "name" and nxt.value in INFIX and not nxt.functional
                and not self.starts_term(self.peek())
            ):
                prec, kind = PREFIX[name]
                arg = self.parse(prec if kind == "fy" else prec - 1)
                return Struct(name, (arg,)), prec
            return Atom(name), 0
        if t.kind == "end":
            raise self.error("unexpected end of clause")
        raise self.error("unexpected end of input")

    # -- statements ----------------------------------------------------------
    def reset_vars(self) -> None:
        self.varmap = {}
        self.var_counts = {}

    def parse_statement(self) -> Statement:
        self.reset_vars()
        start = self.tok
        line, col = start.line, start.col
        if start.kind == "name" and start.value in (":-", "?-") and not start.functional:
            self.advance()
            goal = self.parse(1199)
            self.expect("end")
            return Statement("directive", goal, line=line, col=col)
        head = self.parse(1199)
        t = self.tok
        if t.kind == "end":
            self.advance()
            return Statement("fact", head, line=line, col=col, var_counts=self.var_counts)
        if t.kind != "name":
            raise self.error(f"expected '.', ':-', ':~' or ':#', found {t.text or t.kind!r}")
        op = t.value
        self.advance()
        if op == ":-":
            body = self.parse(1199)
            self.expect("end")
            return Statement("rule", head, body, line=line, col=col, var_counts=self.var_counts)
        if op == ":#":
            body = self.parse(1199)
            self.expect("end")
            return Statement("declare", head, body, line=line, col=col)
        if op == ":~":
            return self.parse_fuzzy_rhs(head, line, col)
        raise self.error(f"expected '.', ':-', ':~' or ':#', found {op!r}", t)

    def parse_fuzzy_rhs(self, head: Term, line: int, col: int) -> Statement:
        t = self.tok
        if t.kind == "end":
            self.advance()
            return Statement("fuzzy", head, empty_fuzzy=True, line=line, col=col,
                             var_counts=self.var_counts)
        if t.kind == "num" or (t.kind == "name" and t.value == "-" and self.peek().kind == "num") \
                or (self.is_punct("[") and self.peek().kind in ("num", "name")):
            lit = self.parse(1199)
            self.expect("end")
            return Statement("fuzzy", head, truth_term=lit, line=line, col=col,
                             var_counts=self.var_counts)
        aggregator = None
        nxt = self.peek()
        if t.kind == "name" and not t.functional and t.value not in INFIX \
                and self.starts_term(nxt) and not self.is_punct("(", nxt):
            aggregator = t.value
            self.advance()
        body = self.parse(1199)
        self.expect("end")
        return Statement("fuzzy", head, body, aggregator=aggregator, line=line, col=col,
                         var_counts=self.var_counts)

    def statements(self) -> list[Statement]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.parse_statement())
        return out


def parse_statements(src: str) -> list[Statement]:
    return Parser(src).statements()


def parse_term(src: str) -> tuple[Term, dict[str, Var]]:
    """Parse a single term terminated by an optional '.'; returns the variable map."""
    p = Parser(src)
    if p.tok.kind == "name" and p.tok.value == "?-" and not p.tok.functional:
        p.advance()
    term = p.parse(1200)
    if p.tok.kind == "end":
        p.advance()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after query")
    return term, dict(p.varmap)
