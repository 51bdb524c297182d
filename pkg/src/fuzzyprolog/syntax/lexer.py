"""Tokenizer for Fuzzy Prolog source text."""
from __future__ import annotations

from dataclasses import dataclass

SYMBOL_CHARS = set("+-*/\\^<>=~:.?@#&$")
SOLO = set("!;")
PUNCT = set("()[]{},|")


class FplSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # name, var, num, str, punct, end, eof
    text: str
    value: object
    line: int
    col: int
    start: int
    end: int
    # name immediately followed by "(" (functional notation)
    functional: bool = False
    # no whitespace between this token and the previous one
    glued: bool = False


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i, n = 0, len(src)
    line, line_start = 1, 0
    last_end = -1

    def pos(k: int) -> tuple[int, int]:
        return line, k - line_start + 1

    def emit(kind: str, text: str, value, start: int) -> None:
        ln, col = pos(start)
        functional = kind == "name" and i < n and src[i] == "("
        toks.append(Token(kind, text, value, ln, col, start, i, functional, start == last_end))

    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line, line_start = line + 1, i
            continue
        if c.isspace():
            i += 1
            continue
        if c == "%":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c == "/" and src.startswith("/*", i):
            j = src.find("*/", i + 2)
            if j < 0:
                raise FplSyntaxError("unterminated block comment", *pos(i))
            for k in range(i, j):
                if src[k] == "\n":
                    line, line_start = line + 1, k + 1
            i = j + 2
            continue
        start = i
        if c.isdigit():
            while i < n and src[i].isdigit():
                i += 1
            is_float = False
            if i + 1 < n and src[i] == "." and src[i + 1].isdigit():
                is_float = True
                i += 1
                while i < n and src[i].isdigit():
                    i += 1
            if i < n and src[i] in "eE":
                j = i + 1
                if j < n and src[j] in "+-":
                    j += 1
                if j < n and src[j].isdigit():
                    is_float = True
                    i = j
                    while i < n and src[i].isdigit():
                        i += 1
            text = src[start:i]
            emit("num", text, float(text) if is_float else int(text), start)
        elif c.isalpha() or c == "_":
            while i < n and (src[i].isalnum() or src[i] == "_"):
                i += 1
            text = src[start:i]
            kind = "var" if c.isupper() or c == "_" else "name"
            emit(kind, text, text, start)
        elif c == "'" or c == '"':
            quote = c
            i += 1
            buf = []
            while True:
                if i >= n:
                    raise FplSyntaxError("unterminated quoted atom", *pos(start))
                ch = src[i]
                if ch == "\\" and i + 1 < n:
                    buf.append(src[i + 1])
                    i += 2
                    continue
                if ch == quote:
                    if i + 1 < n and src[i + 1] == quote:
                        buf.append(quote)
                        i += 2
                        continue
                    i += 1
                    break
                if ch == "\n":
                    raise FplSyntaxError("newline inside quoted atom", *pos(i))
                buf.append(ch)
                i += 1
            emit("name", src[start:i], "".join(buf), start)
        elif c == "." and (i + 1 >= n or src[i + 1].isspace() or src[i + 1] == "%"):
            i += 1
            emit("end", ".", ".", start)
        elif c in SYMBOL_CHARS:
            while i < n and src[i] in SYMBOL_CHARS:
                i += 1
            text = src[start:i]
            # a run ending in the clause terminator, e.g. "p :~ 0.7 ." written "X .<. 1."
            if text.endswith(".") and len(text) > 1 and (i >= n or src[i].isspace() or src[i] == "%") \
                    and text[:-1] not in ("", ) and not text.startswith("."):
                i -= 1
                text = text[:-1]
            emit("name", text, text, start)
        elif c in SOLO:
            i += 1
            emit("name", c, c, start)
        elif c in PUNCT:
            i += 1
            if c == "[" and i < n and src[i] == "]":
                i += 1
                emit("name", "[]", "[]", start)
            else:
                emit("punct", c, c, start)
        else:
            raise FplSyntaxError(f"unexpected character {c!r}", *pos(i))
        last_end = i
    ln, col = pos(n)
    toks.append(Token("eof", "", None, ln, col, n, n))
    return toks
