"""Concrete ASCII syntax: recursive-descent parser and canonical printer.

Grammar::

    formula := ("forall" | "exists" | "existsu") var+ ":" formula | iff
    iff     := imp ("<->" imp)*
    imp     := or ("->" imp)?
    or      := and ("|" and)*
    and     := neg ("&" neg)*
    neg     := "!" neg | "(" formula ")" | atom
    atom    := var "~" var | var "=" var | NAME "(" var ("," var)* ")"

Binary connectives other than ``->`` associate to the left.  A quantifier's
scope runs as far right as possible, so a quantified formula used as an
operand must be parenthesised.
"""
from __future__ import annotations

import re
from typing import NamedTuple

from ..errors import FormulaSyntaxError
from .syntax import (
    KEYWORDS,
    Adj,
    And,
    Eq,
    Exists,
    ExistsUnique,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Rel,
)

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<op><->|->|[~=!&|(),:])"
    r"|(?P<var>[a-z][a-z0-9_]*)|(?P<name>[A-Z][A-Za-z0-9_]*)"
)
_QUANT = {"forall": Forall, "exists": Exists, "existsu": ExistsUnique}


class Token(NamedTuple):
    kind: str  # "op", "var", "kw", "name", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            word = m.group()
            if kind == "var" and word in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, word, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise FormulaSyntaxError(f"{msg}, found {found}", tok.line, tok.col)

    def expect_op(self, op: str) -> Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            self.error(f"expected {op!r}")
        return self.take()

    def at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == op

    def var(self) -> str:
        tok = self.peek()
        if tok.kind != "var":
            self.error("expected a variable")
        return self.take().text

    def formula(self) -> Formula:
        tok = self.peek()
        if tok.kind == "kw":
            self.take()
            names = [self.var()]
            while self.peek().kind == "var":
                extra = self.take()
                if tok.text == "existsu":
                    raise FormulaSyntaxError("existsu binds exactly one variable", extra.line, extra.col)
                names.append(extra.text)
            self.expect_op(":")
            body = self.formula()
            for name in reversed(names):
                body = _QUANT[tok.text](name, body)
            return body
        return self.iff()

    def iff(self) -> Formula:
        left = self.imp()
        while self.at_op("<->"):
            self.take()
            left = Iff(left, self.imp())
        return left

    def imp(self) -> Formula:
        left = self.or_()
        if self.at_op("->"):
            self.take()
            return Implies(left, self.imp())
        return left

    def or_(self) -> Formula:
        left = self.and_()
        while self.at_op("|"):
            self.take()
            left = Or(left, self.and_())
        return left

    def and_(self) -> Formula:
        left = self.neg()
        while self.at_op("&"):
            self.take()
            left = And(left, self.neg())
        return left

    def neg(self) -> Formula:
        if self.at_op("!"):
            self.take()
            return Not(self.neg())
        if self.at_op("("):
            self.take()
            inner = self.formula()
            self.expect_op(")")
            return inner
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "name":
            self.take()
            self.expect_op("(")
            args = [self.var()]
            while self.at_op(","):
                self.take()
                args.append(self.var())
            self.expect_op(")")
            return Rel(tok.text, tuple(args))
        if tok.kind == "var":
            a = self.take().text
            op = self.peek()
            if op.kind == "op" and op.text in ("~", "="):
                self.take()
                b = self.var()
                return Adj(a, b) if op.text == "~" else Eq(a, b)
            self.error("expected '~' or '=' after variable")
        self.error("expected an atom, '!' or '('")


def parse(text: str) -> Formula:
    """Parse one formula; raises :class:`FormulaSyntaxError` with line and column."""
    p = _Parser(text)
    f = p.formula()
    if p.peek().kind != "eof":
        p.error("unexpected trailing input")
    return f


# printing -------------------------------------------------------------------

# precedence levels: quantifier 0 < iff 1 < imp 2 < or 3 < and 4 < unary/atom 5
_LEVEL = {Iff: 1, Implies: 2, Or: 3, And: 4}
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&"}
_KW = {Forall: "forall", Exists: "exists", ExistsUnique: "existsu"}


def _level(f: Formula) -> int:
    if isinstance(f, (Forall, Exists, ExistsUnique)):
        return 0
    return _LEVEL.get(type(f), 5)


def _fmt(f: Formula, min_level: int) -> str:
    text = _fmt_bare(f)
    return f"({text})" if _level(f) < min_level else text


def _fmt_bare(f: Formula) -> str:
    if isinstance(f, Adj):
        return f"{f.a} ~ {f.b}"
    if isinstance(f, Eq):
        return f"{f.a} = {f.b}"
    if isinstance(f, Rel):
        return f"{f.name}({', '.join(f.args)})"
    if isinstance(f, Not):
        if isinstance(f.body, (Not, Rel)):
            return "!" + _fmt_bare(f.body)
        return f"!({_fmt_bare(f.body)})"
    t = type(f)
    if t in _LEVEL:
        lvl = _LEVEL[t]
        if t is Implies:
            left, right = _fmt(f.left, lvl + 1), _fmt(f.right, lvl)
        else:
            left, right = _fmt(f.left, lvl), _fmt(f.right, lvl + 1)
        return f"{left} {_SYMBOL[t]} {right}"
    names = [f.var]
    body = f.body
    if t is not ExistsUnique:
        while type(body) is t:
            names.append(body.var)
            body = body.body
    return f"{_KW[t]} {' '.join(names)} : {_fmt(body, 0)}"


def format_formula(f: Formula) -> str:
    """Canonical text; ``parse(format_formula(f)) == f`` for every AST."""
    return _fmt_bare(f)
