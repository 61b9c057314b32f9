"""Differential polynomials in a fixed jet chart.

A jet chart has independent coordinates ``x^0 .. x^{n-1}`` and jet
coordinates ``u^a_I`` for every dependent index ``a`` and multi-index ``I``.
Polynomials over these variables carry exact rational coefficients and are
immutable once built.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "MultiIndex",
    "JetVariable",
    "Independent",
    "Derivative",
    "JetSpace",
    "DiffPoly",
    "partial",
    "total_derivative",
    "total_derivative_multi",
    "substitute",
]


@dataclass(frozen=True, order=True, slots=True)
class MultiIndex:
    """An order-insensitive word in independent indices (a multiset)."""

    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "letters", tuple(sorted(self.letters)))

    @classmethod
    def of(cls, *letters: int) -> MultiIndex:
        return cls(tuple(letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __add__(self, other: MultiIndex | int) -> MultiIndex:
        if isinstance(other, int):
            return MultiIndex(self.letters + (other,))
        return MultiIndex(self.letters + other.letters)

    def counts(self, n: int) -> tuple[int, ...]:
        c = [0] * n
        for i in self.letters:
            c[i] += 1
        return tuple(c)

    def contains(self, other: MultiIndex) -> bool:
        """True when ``other`` is a sub-multiset of ``self``."""
        mine = Counter(self.letters)
        return all(mine[i] >= k for i, k in Counter(other.letters).items())

    def __sub__(self, other: MultiIndex) -> MultiIndex:
        if not self.contains(other):
            raise ValueError(f"{other} is not contained in {self}")
        rest = Counter(self.letters)
        rest.subtract(other.letters)
        return MultiIndex(tuple(rest.elements()))


@dataclass(frozen=True, slots=True)
class JetVariable:
    """Either an independent coordinate or a jet coordinate ``u^alpha_I``.

    ``kind`` is 0 for independents and 1 for derivatives; for independents
    ``index`` is the coordinate index and ``multi`` is empty.
    """

    kind: int
    index: int
    multi: MultiIndex = MultiIndex()

    def __hash__(self) -> int:
        return hash((self.kind, self.index, self.multi.letters))

    @property
    def is_independent(self) -> bool:
        return self.kind == 0

    @property
    def order(self) -> int:
        return len(self.multi)

    @property
    def key(self) -> tuple:
        return (self.kind, self.index, len(self.multi), self.multi.letters)

    def __lt__(self, other: JetVariable) -> bool:
        return self.key < other.key

    def shifted(self, i: int) -> JetVariable:
        """The jet variable one letter deeper: ``u^a_I -> u^a_{Ii}``."""
        return JetVariable(1, self.index, self.multi + i)


def Independent(i: int) -> JetVariable:
    return JetVariable(0, i)


def Derivative(alpha: int, multi: MultiIndex | Sequence[int] = ()) -> JetVariable:
    if not isinstance(multi, MultiIndex):
        multi = MultiIndex(tuple(multi))
    return JetVariable(1, alpha, multi)


# A monomial is a tuple of (variable, exponent) pairs sorted by variable key.
Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    powers = dict(a)
    for v, e in b:
        powers[v] = powers.get(v, 0) + e
    return tuple(sorted(powers.items(), key=lambda ve: ve[0].key))


def _mono_key(m: Monomial) -> tuple:
    degree = sum(e for _, e in m)
    expanded = []
    for v, e in m:
        expanded.extend([v.key] * e)
    return (degree, tuple(sorted(expanded, reverse=True)))


def _coerce(c) -> int | Fraction:
    # integral coefficients are kept as int for speed; both are exact
    if isinstance(c, int) and not isinstance(c, bool):
        return c
    if isinstance(c, str):
        c = Fraction(c)
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    raise TypeError(f"unsupported coefficient {c!r}")


class DiffPoly:
    """Sparse polynomial in jet variables with exact rational coefficients.

    >>> u = DiffPoly.var(Derivative(0))
    >>> (u * u).degree()
    2
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = _coerce(c)
        self._terms = clean
        self._hash = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def const(cls, c) -> DiffPoly:
        return cls({(): _coerce(c)})

    @classmethod
    def var(cls, v: JetVariable, exponent: int = 1) -> DiffPoly:
        if exponent == 0:
            return cls.const(1)
        return cls({((v, exponent),): 1})

    @classmethod
    def _raw(cls, terms: dict) -> DiffPoly:
        # terms already clean (no zeros, exact coefficients)
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    # -- inspection --------------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or set(self._terms) == {()}

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def variables(self) -> set[JetVariable]:
        return {v for m in self._terms for v, _ in m}

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self._terms), default=0)

    def jet_order(self) -> int:
        return max((v.order for v in self.variables() if not v.is_independent), default=0)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in canonical (graded, then lexicographic) descending order."""
        return sorted(self._terms.items(), key=lambda mc: _mono_key(mc[0]), reverse=True)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"DiffPoly({self.format()})"

    def format(self, space: JetSpace | None = None) -> str:
        return (space or JetSpace.generic()).format(self)

    # -- ring operations ---------------------------------------------------
    def __add__(self, other) -> DiffPoly:
        if not isinstance(other, DiffPoly):
            other = DiffPoly.const(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return DiffPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> DiffPoly:
        return DiffPoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> DiffPoly:
        if not isinstance(other, DiffPoly):
            other = DiffPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> DiffPoly:
        return (-self) + other

    def __mul__(self, other) -> DiffPoly:
        if not isinstance(other, DiffPoly):
            c = _coerce(other)
            if not c:
                return DiffPoly()
            return DiffPoly._raw({m: k * c for m, k in self._terms.items()})
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return DiffPoly._raw(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> DiffPoly:
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = DiffPoly.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __truediv__(self, other) -> DiffPoly:
        if isinstance(other, DiffPoly):
            if not other.is_constant() or other.is_zero():
                raise ZeroDivisionError("can only divide by a nonzero constant")
            other = other.constant_term()
        c = _coerce(other)
        if not c:
            raise ZeroDivisionError("division by zero")
        return self * (Fraction(1) / c)


ZERO = DiffPoly()
ONE = DiffPoly.const(1)


class JetSpace:
    """Names of the chart: ``n`` independents and ``m`` dependents."""

    def __init__(self, independents: Sequence[str], dependents: Sequence[str]):
        self.independents = tuple(independents)
        self.dependents = tuple(dependents)
        names = self.independents + self.dependents
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")

    @classmethod
    def generic(cls) -> JetSpace:
        # fallback names for printing polynomials without a declared chart
        return cls(("x", "t", "y", "z", "s", "r"), ("u", "v", "w", "p", "q"))

    @property
    def n(self) -> int:
        return len(self.independents)

    @property
    def m(self) -> int:
        return len(self.dependents)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JetSpace)
            and self.independents == other.independents
            and self.dependents == other.dependents
        )

    def __hash__(self) -> int:
        return hash((self.independents, self.dependents))

    def __repr__(self) -> str:
        return f"JetSpace({list(self.independents)}, {list(self.dependents)})"

    # -- variables ---------------------------------------------------------
    def x(self, name_or_index: str | int) -> DiffPoly:
        i = self.independent_index(name_or_index)
        return DiffPoly.var(Independent(i))

    def u(self, name_or_index: str | int = 0, suffix: str | Sequence[int] = "") -> DiffPoly:
        alpha = name_or_index if isinstance(name_or_index, int) else self.dependents.index(name_or_index)
        if isinstance(suffix, str):
            multi = self.parse_suffix(suffix)
        else:
            multi = MultiIndex(tuple(suffix))
        return DiffPoly.var(Derivative(alpha, multi))

    def independent_index(self, name_or_index: str | int) -> int:
        if isinstance(name_or_index, int):
            if not 0 <= name_or_index < self.n:
                raise IndexError(f"independent index {name_or_index} out of range 0..{self.n - 1}")
            return name_or_index
        return self.independents.index(name_or_index)

    def parse_suffix(self, suffix: str) -> MultiIndex:
        """Split a derivative suffix like ``xxt`` into independent indices.

        Longest names win, so multi-letter independent names are allowed.
        """
        letters = []
        pos = 0
        by_len = sorted(self.independents, key=len, reverse=True)
        while pos < len(suffix):
            for name in by_len:
                if suffix.startswith(name, pos):
                    letters.append(self.independents.index(name))
                    pos += len(name)
                    break
            else:
                raise KeyError(suffix[pos:])
        return MultiIndex(tuple(letters))

    def multi_index(self, spec: str | Sequence[int] | MultiIndex) -> MultiIndex:
        if isinstance(spec, MultiIndex):
            return spec
        if isinstance(spec, str):
            return self.parse_suffix(spec)
        return MultiIndex(tuple(spec))

    # -- printing ----------------------------------------------------------
    def var_name(self, v: JetVariable) -> str:
        if v.is_independent:
            return self.independents[v.index]
        name = self.dependents[v.index]
        if v.multi.letters:
            name += "_" + "".join(self.independents[i] for i in v.multi.letters)
        return name

    def format_monomial(self, m: Monomial) -> str:
        parts = []
        for v, e in m:
            s = self.var_name(v)
            parts.append(s if e == 1 else f"{s}^{e}")
        return "*".join(parts)

    def format(self, p: DiffPoly) -> str:
        if p.is_zero():
            return "0"
        out = []
        for i, (m, c) in enumerate(p.sorted_terms()):
            neg = c < 0
            a = -c if neg else c
            if not m:
                body = str(a)
            elif a == 1:
                body = self.format_monomial(m)
            else:
                body = f"{a}*{self.format_monomial(m)}"
            if i == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)


# -- calculus -------------------------------------------------------------

def partial(p: DiffPoly, v: JetVariable) -> DiffPoly:
    """Formal partial derivative, all jet variables treated as independent."""
    out: dict = {}
    for m, c in p.terms.items():
        for k, (w, e) in enumerate(m):
            if w == v:
                if e == 1:
                    rest = m[:k] + m[k + 1:]
                else:
                    rest = m[:k] + ((w, e - 1),) + m[k + 1:]
                s = out.get(rest, 0) + c * e
                if s:
                    out[rest] = s
                else:
                    out.pop(rest, None)
                break
    return DiffPoly._raw(out)


def _d_var(v: JetVariable, i: int) -> DiffPoly:
    if v.is_independent:
        return ONE if v.index == i else ZERO
    return DiffPoly.var(v.shifted(i))


def total_derivative(p: DiffPoly, i: int, n: int | None = None) -> DiffPoly:
    """``D_i p = dp/dx^i + sum u^a_{Ii} dp/du^a_I``.

    ``n`` (when given) bounds the admissible indices ``0 <= i < n``.
    """
    if i < 0 or (n is not None and i >= n):
        raise IndexError(f"independent index {i} out of range")
    out: dict = {}
    for m, c in p.terms.items():
        for k, (w, e) in enumerate(m):
            if w.is_independent:
                if w.index != i:
                    continue
                if e == 1:
                    new = m[:k] + m[k + 1:]
                else:
                    new = m[:k] + ((w, e - 1),) + m[k + 1:]
            else:
                if e == 1:
                    rest = m[:k] + m[k + 1:]
                else:
                    rest = m[:k] + ((w, e - 1),) + m[k + 1:]
                new = _mono_mul(rest, ((w.shifted(i), 1),))
            s = out.get(new, 0) + c * e
            if s:
                out[new] = s
            else:
                out.pop(new, None)
    return DiffPoly._raw(out)


def total_derivative_multi(p: DiffPoly, J: MultiIndex | Iterable[int], n: int | None = None) -> DiffPoly:
    """Iterated total derivative ``D_J``; the empty word is the identity."""
    letters = J.letters if isinstance(J, MultiIndex) else tuple(J)
    for i in letters:
        p = total_derivative(p, i, n)
    return p


def substitute(p: DiffPoly, sigma: Mapping[JetVariable, DiffPoly]) -> DiffPoly:
    """Simultaneous substitution of variables by polynomials."""
    if not sigma:
        return p
    powers: dict = {}

    def power(v: JetVariable, e: int) -> DiffPoly:
        key = (v, e)
        if key not in powers:
            powers[key] = sigma[v] ** e
        return powers[key]

    out = ZERO
    for m, c in p.terms.items():
        kept = tuple((v, e) for v, e in m if v not in sigma)
        term = DiffPoly._raw({kept: c})
        for v, e in m:
            if v in sigma:
                term = term * power(v, e)
        out = out + term
    return out
