"""Recursive-descent parser for differential-polynomial expressions.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := ('+' | '-') factor | power
    power   := atom ('^' INT)?
    atom    := NUMBER | IDENT | '(' expr ')'

Identifiers are declared independent names or a dependent name with an
optional derivative suffix (``u``, ``u_x``, ``u_xxt``).  Division is only
allowed by a nonzero constant.  Implicit multiplication is rejected.

Horizontal forms extend a term with trailing wedge atoms ``d<name>``, e.g.
``u dx + (1/2*u^2 + u_xx) dt``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .diffpoly import DiffPoly, JetSpace

__all__ = ["ParseError", "UnknownIdentifier", "parse_expr", "parse_form", "tokenize"]


class ParseError(ValueError):
    """Syntax error; ``pos`` is a 0-based character offset into the input."""

    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class UnknownIdentifier(ParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, ID, OP, END
    value: str
    pos: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)?)|(\S))")


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN_RE.match(text, pos)
        num, ident, op = mt.groups()
        start = mt.start(mt.lastindex)
        if num is not None:
            tokens.append(Token("NUM", num, start))
        elif ident is not None:
            tokens.append(Token("ID", ident, start))
        else:
            if op not in "+-*/^()":
                raise ParseError(f"unexpected character {op!r}", start, text)
            tokens.append(Token("OP", op, start))
        pos = mt.end()
    tokens.append(Token("END", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, space: JetSpace, forms: bool = False):
        self.text = text
        self.space = space
        self.forms = forms
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        return ParseError(message, (tok or self.tok).pos, self.text)

    def at_op(self, ops: str) -> bool:
        return self.tok.kind == "OP" and self.tok.value in ops

    def expect_end(self) -> None:
        if self.tok.kind != "END":
            if self.tok.kind in ("ID", "NUM") or self.at_op("("):
                raise self.error("implicit multiplication is not allowed")
            raise self.error(f"unexpected {self.tok.value!r}")

    # -- expressions -------------------------------------------------------
    def expr(self) -> DiffPoly:
        acc = self.term()
        while self.at_op("+-"):
            op = self.advance().value
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> DiffPoly:
        acc = self.factor()
        while self.at_op("*/"):
            op = self.advance()
            rhs_tok = self.tok
            rhs = self.factor()
            if op.value == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant() or rhs.is_zero():
                    raise self.error("division only by a nonzero constant", rhs_tok)
                acc = acc / rhs.constant_term()
        return acc

    def factor(self) -> DiffPoly:
        if self.at_op("+-"):
            op = self.advance().value
            f = self.factor()
            return f if op == "+" else -f
        return self.power()

    def power(self) -> DiffPoly:
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            t = self.tok
            if self.at_op("-"):
                raise self.error("negative exponent")
            if t.kind != "NUM":
                raise self.error("exponent must be a nonnegative integer literal")
            if "." in t.value:
                raise self.error("non-integer exponent")
            self.advance()
            return base ** int(t.value)
        return base

    def atom(self) -> DiffPoly:
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return DiffPoly.const(Fraction(t.value))
        if t.kind == "ID":
            if self.forms and self.is_wedge(t):
                raise self.error("wedge factor in coefficient position")
            self.advance()
            return self.identifier(t)
        if self.at_op("("):
            self.advance()
            inner = self.expr()
            if not self.at_op(")"):
                raise self.error("expected ')'")
            self.advance()
            return inner
        if t.kind == "END":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {t.value!r}")

    def identifier(self, t: Token) -> DiffPoly:
        name = t.value
        sp = self.space
        if name in sp.independents:
            return sp.x(name)
        base, _, suffix = name.partition("_")
        if base in sp.dependents:
            try:
                multi = sp.parse_suffix(suffix)
            except KeyError:
                raise UnknownIdentifier(f"unknown derivative suffix in {name!r}", t.pos, self.text) from None
            return sp.u(base, multi.letters)
        raise UnknownIdentifier(f"unknown identifier {name!r}", t.pos, self.text)

    # -- forms -------------------------------------------------------------
    def is_wedge(self, t: Token) -> bool:
        return (
            t.kind == "ID"
            and t.value.startswith("d")
            and t.value[1:] in self.space.independents
            and t.value not in self.space.dependents
            and t.value not in self.space.independents
        )

    def form(self) -> tuple[int | None, dict[tuple[int, ...], DiffPoly]]:
        comps: dict[tuple[int, ...], DiffPoly] = {}
        degree = None
        sign = 1
        if self.at_op("+-"):
            sign = -1 if self.advance().value == "-" else 1
        while True:
            start = self.tok
            if self.is_wedge(self.tok):
                coef = DiffPoly.const(1)
            else:
                coef = self.term()
            legs = []
            while self.is_wedge(self.tok):
                legs.append(self.space.independents.index(self.advance().value[1:]))
            if degree is None:
                degree = len(legs)
            elif len(legs) != degree:
                raise self.error("all terms of a form must have the same degree", start)
            if len(set(legs)) != len(legs):
                key, s = (), 0
            else:
                key, s = _sort_sign(legs)
            if s:
                comps[key] = comps.get(key, DiffPoly()) + coef * (sign * s)
            if self.at_op("+-"):
                sign = -1 if self.advance().value == "-" else 1
                continue
            break
        return degree, {k: v for k, v in comps.items() if v}


def _sort_sign(legs: list[int]) -> tuple[tuple[int, ...], int]:
    legs = list(legs)
    sign = 1
    for a in range(len(legs)):
        for b in range(len(legs) - 1 - a):
            if legs[b] > legs[b + 1]:
                legs[b], legs[b + 1] = legs[b + 1], legs[b]
                sign = -sign
    return tuple(legs), sign


def parse_expr(text: str, space: JetSpace) -> DiffPoly:
    """Parse ``text`` into a canonical :class:`DiffPoly` over ``space``."""
    p = _Parser(text, space)
    if p.tok.kind == "END":
        raise p.error("empty expression")
    result = p.expr()
    p.expect_end()
    return result


def parse_form(text: str, space: JetSpace) -> tuple[int, dict[tuple[int, ...], DiffPoly]]:
    """Parse a horizontal form; returns ``(degree, {sorted legs: coefficient})``."""
    p = _Parser(text, space, forms=True)
    if p.tok.kind == "END":
        raise p.error("empty form")
    degree, comps = p.form()
    p.expect_end()
    return degree or 0, comps
