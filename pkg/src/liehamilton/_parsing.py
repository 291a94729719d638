"""Tokenizer and recursive-descent parser for the expression grammar.

The parser only builds a small tuple-based syntax tree; turning it into an
exact :class:`~liehamilton.symexpr.Expr` or a numeric time coefficient is the
job of the callers.

Grammar::

    expr     := ['-'] term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := base ('^' rational)?
    base     := number | identifier | identifier '(' expr ')' | '(' expr ')'
    rational := integer | integer '/' positive_integer
              | '(' ['-'] integer ('/' positive_integer)? ')'
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import NamedTuple

from .errors import ExprSyntaxError


class Token(NamedTuple):
    kind: str  # "num", "id", "op", "end"
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str) -> Token:
        if self.tok.kind != "op" or self.tok.text != op:
            raise ExprSyntaxError(f"unexpected {self._describe()}", self.tok.pos, (repr(op),))
        return self.advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else repr(self.tok.text)

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(
                f"unexpected {self._describe()}", self.tok.pos, ("'+'", "'-'", "'*'", "'/'", "end")
            )
        return node

    def expr(self):
        if self.at_op("-"):
            self.advance()
            node = ("neg", self.term())
        else:
            node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.at_op("*", "/"):
            t = self.advance()
            rhs = self.factor()
            node = ("mul", node, rhs) if t.text == "*" else ("div", node, rhs, t.pos)
        return node

    def factor(self):
        node = self.base()
        if self.at_op("^"):
            self.advance()
            node = ("pow", node, self.rational())
        return node

    def base(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return ("num", Fraction(t.text))
        if t.kind == "id":
            self.advance()
            if self.at_op("("):
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return ("call", t.text, arg, t.pos)
            return ("var", t.text, t.pos)
        if self.at_op("("):
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            f"unexpected {self._describe()}", t.pos, ("number", "identifier", "'('")
        )

    def _integer(self) -> int:
        t = self.tok
        if t.kind != "num" or "." in t.text:
            raise ExprSyntaxError(f"unexpected {self._describe()}", t.pos, ("integer",))
        self.advance()
        return int(t.text)

    def _denominator(self) -> int:
        pos = self.tok.pos
        d = self._integer()
        if d == 0:
            raise ExprSyntaxError("zero denominator in exponent", pos, ("positive integer",))
        return d

    def rational(self) -> Fraction:
        if self.at_op("("):
            self.advance()
            sign = 1
            if self.at_op("-"):
                self.advance()
                sign = -1
            value = Fraction(self._integer())
            if self.at_op("/"):
                self.advance()
                value /= self._denominator()
            self.expect_op(")")
            return sign * value
        value = Fraction(self._integer())
        # Unparenthesised "n/m" directly after '^' is part of the exponent.
        if self.at_op("/") and self.tokens[self.i + 1].kind == "num":
            self.advance()
            value /= self._denominator()
        return value


def parse(text: str):
    """Parse ``text`` into a syntax tree of nested tuples."""
    return _Parser(text).parse()
