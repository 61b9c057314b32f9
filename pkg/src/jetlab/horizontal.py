"""Horizontal forms, the horizontal differential, Euler-Lagrange and Helmholtz.

Horizontal ``q``-forms are stored against strictly increasing tuples of
independent indices, ``f dx^{i1} ^ ... ^ dx^{iq}`` with ``i1 < ... < iq``.
Linear differential operators are stored coefficients-left, i.e. as
``sum_I c_I D_I`` per matrix entry.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping, Sequence

from .diffpoly import (
    DiffPoly,
    JetSpace,
    MultiIndex,
    partial,
    total_derivative,
    total_derivative_multi,
)
from .equation import PdeSystem, _Reducer

__all__ = [
    "HorizontalForm",
    "SourceForm",
    "LinearDiffOperatorMatrix",
    "hdiff",
    "wedge",
    "conservation_check",
    "euler_lagrange",
    "linearization_operator",
    "formal_adjoint",
    "helmholtz_check",
]


def _merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[tuple[int, ...] | None, int]:
    """Sign of ``dx^a ^ dx^b`` relative to the sorted concatenation."""
    if set(a) & set(b):
        return None, 0
    inversions = sum(1 for i in a for j in b if i > j)
    return tuple(sorted(a + b)), (-1) ** inversions


@dataclass(frozen=True)
class HorizontalForm:
    n: int
    degree: int
    components: Mapping[tuple[int, ...], DiffPoly]

    def __init__(self, n: int, degree: int, components: Mapping[Sequence[int], DiffPoly] | None = None):
        if not 0 <= degree <= n:
            raise ValueError(f"horizontal {degree}-forms do not exist for n = {n}")
        clean: dict[tuple[int, ...], DiffPoly] = {}
        for legs, coef in (components or {}).items():
            legs = tuple(legs)
            if len(legs) != degree or any(not 0 <= i < n for i in legs):
                raise ValueError(f"bad legs {legs} for a {degree}-form in n = {n}")
            if len(set(legs)) != len(legs):
                continue
            perm = sorted(range(degree), key=lambda k: legs[k])
            key, sign = tuple(sorted(legs)), _perm_sign(perm)
            clean[key] = clean.get(key, DiffPoly()) + coef * sign
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "components", {k: v for k, v in sorted(clean.items()) if v})

    @classmethod
    def function(cls, n: int, f: DiffPoly) -> HorizontalForm:
        return cls(n, 0, {(): f})

    @classmethod
    def top(cls, n: int, density: DiffPoly) -> HorizontalForm:
        return cls(n, n, {tuple(range(n)): density})

    @classmethod
    def current(cls, n: int, J: Sequence[DiffPoly]) -> HorizontalForm:
        """``sum_i J^i dx^1 ^ .. (omit i) .. ^ dx^n`` with sign ``(-1)^i``."""
        comps = {}
        for i, Ji in enumerate(J):
            legs = tuple(k for k in range(n) if k != i)
            comps[legs] = Ji * (-1) ** i
        return cls(n, n - 1, comps)

    def __getitem__(self, legs: Sequence[int]) -> DiffPoly:
        return self.components.get(tuple(legs), DiffPoly())

    def is_zero(self) -> bool:
        return not self.components

    def __add__(self, other: HorizontalForm) -> HorizontalForm:
        self._compatible(other)
        comps = dict(self.components)
        for k, v in other.components.items():
            comps[k] = comps.get(k, DiffPoly()) + v
        return HorizontalForm(self.n, self.degree, comps)

    def __neg__(self) -> HorizontalForm:
        return HorizontalForm(self.n, self.degree, {k: -v for k, v in self.components.items()})

    def __sub__(self, other: HorizontalForm) -> HorizontalForm:
        return self + (-other)

    def scale(self, f: DiffPoly) -> HorizontalForm:
        return HorizontalForm(self.n, self.degree, {k: v * f for k, v in self.components.items()})

    def _compatible(self, other: HorizontalForm) -> None:
        if (self.n, self.degree) != (other.n, other.degree):
            raise ValueError("forms of different degree or dimension")

    def format(self, space: JetSpace) -> str:
        if not self.components:
            return "0"
        out = ""
        for legs, coef in self.components.items():
            wedge_ = " ".join("d" + space.independents[i] for i in legs)
            c = space.format(coef)
            if legs and len(coef.terms) > 1:
                c = f"({c})"
            term = f"{c} {wedge_}" if legs else c
            if not out:
                out = term
            elif term.startswith("-"):
                out += " - " + term[1:]
            else:
                out += " + " + term
        return out


def _perm_sign(perm: Sequence[int]) -> int:
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def wedge(a: HorizontalForm, b: HorizontalForm) -> HorizontalForm:
    if a.n != b.n:
        raise ValueError("forms over different charts")
    comps: dict = {}
    if a.degree + b.degree > a.n:
        # nothing lives above the top degree; report it as the zero top form
        return HorizontalForm(a.n, a.n, {})
    for la, ca in a.components.items():
        for lb, cb in b.components.items():
            key, sign = _merge_sign(la, lb)
            if sign:
                comps[key] = comps.get(key, DiffPoly()) + ca * cb * sign
    return HorizontalForm(a.n, a.degree + b.degree, comps)


def hdiff(omega: HorizontalForm, sys: PdeSystem | None = None) -> HorizontalForm:
    """Horizontal differential ``d(f dx^I) = sum_i D_i f dx^i ^ dx^I``.

    The differential of a top form is the zero top form.  With ``sys`` the
    coefficients are reduced on shell.
    """
    n = omega.n
    if omega.degree == n:
        return HorizontalForm(n, n, {})
    comps: dict = {}
    for legs, f in omega.components.items():
        for i in range(n):
            key, sign = _merge_sign((i,), legs)
            if sign:
                comps[key] = comps.get(key, DiffPoly()) + total_derivative(f, i) * sign
    if sys is not None:
        red = _Reducer(sys)
        comps = {k: red.reduce(v) for k, v in comps.items()}
    return HorizontalForm(n, omega.degree + 1, comps)


def conservation_check(sys: PdeSystem, J: HorizontalForm) -> tuple[bool, DiffPoly]:
    """``J`` is a conserved current iff ``dJ`` vanishes on shell.

    Returns the on-shell coefficient of ``dx^1 ^ ... ^ dx^n`` as residual.
    """
    if J.n != sys.n or J.degree != sys.n - 1:
        raise ValueError(f"a current is a horizontal {sys.n - 1}-form")
    residual = hdiff(J, sys)[tuple(range(sys.n))]
    return residual.is_zero(), residual


@dataclass(frozen=True)
class SourceForm:
    """Components ``E_a`` of ``E_a v^a (x) d^n x``."""

    components: tuple[DiffPoly, ...]

    def __init__(self, components: Iterable[DiffPoly]):
        object.__setattr__(self, "components", tuple(components))

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, a: int) -> DiffPoly:
        return self.components[a]

    def __iter__(self):
        return iter(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)


def _dependents_used(p: DiffPoly, alpha: int) -> list:
    return sorted(v for v in p.variables() if not v.is_independent and v.index == alpha)


def euler_lagrange(L: HorizontalForm, m: int) -> SourceForm:
    """``E_a[L] = sum_I (-1)^|I| D_I (dL/du^a_I)`` for a top-degree ``L``."""
    if L.degree != L.n:
        raise ValueError(f"Lagrangian must be a top form (degree {L.n}), got degree {L.degree}")
    density = L[tuple(range(L.n))]
    comps = []
    for alpha in range(m):
        e = DiffPoly()
        for v in _dependents_used(density, alpha):
            e = e + total_derivative_multi(partial(density, v), v.multi) * (-1) ** v.order
        comps.append(e)
    if any(v.index >= m for v in density.variables() if not v.is_independent):
        raise ValueError("Lagrangian uses more dependent variables than declared")
    return SourceForm(comps)


class LinearDiffOperatorMatrix:
    """``r x m`` matrix of total differential operators ``sum_I c_I D_I``."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Mapping[tuple[int, int], Mapping[MultiIndex, DiffPoly]] | None = None):
        self.rows = rows
        self.cols = cols
        clean: dict = {}
        for (a, b), ops in (entries or {}).items():
            if not (0 <= a < rows and 0 <= b < cols):
                raise IndexError(f"entry ({a}, {b}) outside a {rows}x{cols} matrix")
            ops = {I: c for I, c in ops.items() if c}
            if ops:
                clean[a, b] = dict(sorted(ops.items()))
        self.entries = dict(sorted(clean.items()))

    def entry(self, a: int, b: int) -> dict[MultiIndex, DiffPoly]:
        return self.entries.get((a, b), {})

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearDiffOperatorMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def __sub__(self, other: LinearDiffOperatorMatrix) -> LinearDiffOperatorMatrix:
        entries: dict = {}
        for key in set(self.entries) | set(other.entries):
            ops = dict(self.entry(*key))
            for I, c in other.entry(*key).items():
                ops[I] = ops.get(I, DiffPoly()) - c
            entries[key] = ops
        return LinearDiffOperatorMatrix(self.rows, self.cols, entries)

    def is_zero(self) -> bool:
        return not self.entries

    def apply(self, chi: Sequence[DiffPoly]) -> list[DiffPoly]:
        out = []
        for a in range(self.rows):
            acc = DiffPoly()
            for b in range(self.cols):
                for I, c in self.entry(a, b).items():
                    acc = acc + c * total_derivative_multi(chi[b], I)
            out.append(acc)
        return out

    def format_entry(self, a: int, b: int, space: JetSpace) -> str:
        ops = self.entry(a, b)
        if not ops:
            return "0"
        parts = []
        for I, c in sorted(ops.items(), key=lambda kv: (len(kv[0]), kv[0].letters), reverse=True):
            cs = space.format(c)
            if not I.letters:
                parts.append(f"({cs})" if len(c.terms) > 1 else cs)
                continue
            d = "D_" + "".join(space.independents[i] for i in I.letters)
            if cs == "1":
                parts.append(d)
            elif cs == "-1":
                parts.append("-" + d)
            elif len(c.terms) > 1:
                parts.append(f"({cs})*{d}")
            else:
                parts.append(f"{cs}*{d}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"LinearDiffOperatorMatrix({self.rows}x{self.cols}, {self.entries})"


def linearization_operator(E: SourceForm, m: int | None = None) -> LinearDiffOperatorMatrix:
    """Entries ``sum_I dE_a/du^b_I D_I``."""
    m = len(E) if m is None else m
    entries: dict = {}
    for a, Ea in enumerate(E):
        for v in sorted(Ea.variables()):
            if v.is_independent:
                continue
            ops = entries.setdefault((a, v.index), {})
            ops[v.multi] = ops.get(v.multi, DiffPoly()) + partial(Ea, v)
    return LinearDiffOperatorMatrix(len(E), m, entries)


def _sub_multi_indices(I: MultiIndex) -> Iterable[tuple[MultiIndex, int]]:
    """Sub-multisets ``J`` of ``I`` with the multinomial weight ``prod C(I_i, J_i)``."""
    counts: dict[int, int] = {}
    for i in I.letters:
        counts[i] = counts.get(i, 0) + 1
    keys = sorted(counts)

    def rec(k: int, letters: tuple, weight: int):
        if k == len(keys):
            yield MultiIndex(letters), weight
            return
        i = keys[k]
        for j in range(counts[i] + 1):
            yield from rec(k + 1, letters + (i,) * j, weight * comb(counts[i], j))

    yield from rec(0, (), 1)


def formal_adjoint(op: LinearDiffOperatorMatrix) -> LinearDiffOperatorMatrix:
    """Entry ``(a, b)`` of the adjoint is ``sum_I (-1)^|I| D_I o c_{b,a,I}``,
    expanded by Leibniz into coefficients-left form."""
    if op.rows != op.cols:
        raise ValueError("formal adjoint requires a square operator matrix")
    entries: dict = {}
    for (b, a), ops in op.entries.items():
        target = entries.setdefault((a, b), {})
        for I, c in ops.items():
            sign = (-1) ** len(I)
            # D_I (c f) = sum_{J <= I} C(I, J) D_{I-J}(c) D_J f
            for J, weight in _sub_multi_indices(I):
                coef = total_derivative_multi(c, I - J) * (sign * weight)
                target[J] = target.get(J, DiffPoly()) + coef
    return LinearDiffOperatorMatrix(op.cols, op.rows, entries)


def helmholtz_check(E: SourceForm) -> tuple[bool, LinearDiffOperatorMatrix]:
    """A source form is variational iff its linearization is self-adjoint.

    Returns the verdict and ``l - l*`` (zero exactly when it passes).
    """
    ell = linearization_operator(E)
    diff = ell - formal_adjoint(ell)
    return diff.is_zero(), diff
