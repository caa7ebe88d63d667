"""Lisp-style s-expression reader with source positions.

Comments (``;`` to end of line) are kept in a side table keyed by line
number so the domain/problem parsers can attach them as descriptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import PddlError


@dataclass(frozen=True)
class SToken:
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class SList:
    items: tuple["SExpr", ...]
    line: int
    col: int
    end_line: int = 0


SExpr = SToken | SList


@dataclass
class SourceUnit:
    exprs: list[SExpr] = field(default_factory=list)
    comments: dict[int, str] = field(default_factory=dict)

    def comment_at(self, line: int) -> str:
        return self.comments.get(line, "")

    def comment_block_before(self, line: int) -> str:
        """Comment lines immediately preceding ``line``, joined into one."""
        parts: list[str] = []
        cur = line - 1
        while cur in self.comments:
            parts.append(self.comments[cur])
            cur -= 1
        return " ".join(reversed(parts))


def read_source(text: str) -> SourceUnit:
    """Tokenize and read all top-level s-expressions in ``text``."""
    unit = SourceUnit()
    tokens = list(_tokenize(text, unit.comments))
    pos = 0
    while pos < len(tokens):
        expr, pos = _read_expr(tokens, pos)
        unit.exprs.append(expr)
    return unit


def _tokenize(text: str, comments: dict[int, str]):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            i += 1
            col += 1
        elif c == ";":
            j = text.find("\n", i)
            j = n if j < 0 else j
            body = text[i + 1 : j].strip()
            if body:
                existing = comments.get(line, "")
                comments[line] = f"{existing} {body}".strip() if existing else body
            col += j - i
            i = j
        elif c in "()":
            yield SToken(c, line, col)
            i += 1
            col += 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            yield SToken(text[i:j].lower(), line, col)
            col += j - i
            i = j


def _read_expr(tokens: list[SToken], pos: int) -> tuple[SExpr, int]:
    tok = tokens[pos]
    if tok.text == "(":
        items: list[SExpr] = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise PddlError(
                    "unexpected end of input", tok.line, tok.col,
                    hint="a '(' is never closed",
                )
            if tokens[pos].text == ")":
                end_line = tokens[pos].line
                return SList(tuple(items), tok.line, tok.col, end_line), pos + 1
            item, pos = _read_expr(tokens, pos)
            items.append(item)
    if tok.text == ")":
        raise PddlError("unmatched ')'", tok.line, tok.col,
                        hint="remove it or add the missing '('")
    return tok, pos + 1


def head_of(expr: SExpr) -> str:
    """Lowercased head token of a compound expression, or '' otherwise."""
    if isinstance(expr, SList) and expr.items and isinstance(expr.items[0], SToken):
        return expr.items[0].text
    return ""


def to_text(expr: SExpr) -> str:
    """Render an s-expression back to compact single-line source."""
    if isinstance(expr, SToken):
        return expr.text
    return "(" + " ".join(to_text(item) for item in expr.items) + ")"
