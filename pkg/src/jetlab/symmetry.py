"""Evolutionary vector fields, the higher Jacobi bracket and symmetries.

Symmetries are represented by their generating sections ``chi = (chi^a)``.
The evolutionary field of ``chi`` acts on differential polynomials by
``E_chi = sum_I D_I chi^a d/du^a_I``; ``chi`` is a symmetry of a system
exactly when the universal linearization ``E_chi F`` vanishes on shell.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .diffpoly import (
    DiffPoly,
    Derivative,
    Independent,
    JetVariable,
    MultiIndex,
    partial,
    total_derivative,
    _mono_key,
)
from .equation import PdeSystem, _Reducer
from .linalg import nullspace

__all__ = [
    "GeneratingSection",
    "AnsatzTooLarge",
    "evolutionary_apply",
    "jacobi_bracket",
    "linearization",
    "symmetry_check",
    "find_symmetries",
    "ansatz_monomials",
]

DEFAULT_ANSATZ_CAP = 4000


class AnsatzTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GeneratingSection:
    components: tuple[DiffPoly, ...]

    def __init__(self, components: Iterable[DiffPoly]):
        object.__setattr__(self, "components", tuple(components))

    @classmethod
    def zero(cls, m: int) -> GeneratingSection:
        return cls([DiffPoly()] * m)

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, a: int) -> DiffPoly:
        return self.components[a]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: GeneratingSection) -> GeneratingSection:
        _same_length(self, other)
        return GeneratingSection(a + b for a, b in zip(self, other))

    def __sub__(self, other: GeneratingSection) -> GeneratingSection:
        _same_length(self, other)
        return GeneratingSection(a - b for a, b in zip(self, other))

    def __mul__(self, c) -> GeneratingSection:
        return GeneratingSection(a * c for a in self)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def format(self, space) -> str:
        return ", ".join(space.format(c) for c in self.components)


def _same_length(a: GeneratingSection, b: GeneratingSection) -> None:
    if len(a) != len(b):
        raise ValueError(f"sections have {len(a)} and {len(b)} components")


class _Prolonged:
    """Caches ``D_I chi^a`` while an evolutionary field is applied."""

    def __init__(self, chi: GeneratingSection):
        self.chi = chi
        self.cache: dict[tuple[int, MultiIndex], DiffPoly] = {}

    def __call__(self, alpha: int, multi: MultiIndex) -> DiffPoly:
        key = (alpha, multi)
        if key not in self.cache:
            if not multi.letters:
                val = self.chi[alpha]
            else:
                *rest, last = multi.letters
                val = total_derivative(self(alpha, MultiIndex(tuple(rest))), last)
            self.cache[key] = val
        return self.cache[key]


def _apply(prolonged: _Prolonged, p: DiffPoly) -> DiffPoly:
    m = len(prolonged.chi)
    out = DiffPoly()
    for v in sorted(p.variables()):
        if v.is_independent:
            continue
        if v.index >= m:
            raise ValueError(f"variable with dependent index {v.index} but section has {m} components")
        out = out + prolonged(v.index, v.multi) * partial(p, v)
    return out


def evolutionary_apply(chi: GeneratingSection, p: DiffPoly) -> DiffPoly:
    """Apply ``E_chi`` to ``p``; only jet variables present in ``p`` contribute."""
    return _apply(_Prolonged(chi), p)


def jacobi_bracket(chi: GeneratingSection, psi: GeneratingSection) -> GeneratingSection:
    """``{chi, psi}^a = E_chi psi^a - E_psi chi^a``."""
    _same_length(chi, psi)
    pc, pp = _Prolonged(chi), _Prolonged(psi)
    return GeneratingSection(_apply(pc, b) - _apply(pp, a) for a, b in zip(chi, psi))


def linearization(sys: PdeSystem, chi: GeneratingSection, reducer: _Reducer | None = None) -> list[DiffPoly]:
    """Universal linearization ``(E_chi F_a)`` restricted to the equation."""
    if len(chi) != sys.m:
        raise ValueError(f"section has {len(chi)} components, system has {sys.m} dependents")
    red = reducer or _Reducer(sys)
    pc = _Prolonged(chi)
    return [red.reduce(_apply(pc, sys.residual(a))) for a in range(len(sys.equations))]


def symmetry_check(sys: PdeSystem, chi: GeneratingSection) -> tuple[bool, list[DiffPoly]]:
    residuals = linearization(sys, chi)
    return all(r.is_zero() for r in residuals), residuals


def ansatz_monomials(sys: PdeSystem, jet_order: int, poly_degree: int) -> list[tuple]:
    """Monomials of degree <= ``poly_degree`` in coordinates and parametric
    jet variables of order <= ``jet_order``, in descending canonical order."""
    vars_: list[JetVariable] = [Independent(i) for i in range(sys.n)]
    for alpha in range(sys.m):
        for k in range(jet_order + 1):
            for letters in itertools.combinations_with_replacement(range(sys.n), k):
                v = Derivative(alpha, letters)
                if not sys.is_principal(v):
                    vars_.append(v)
    monos = []
    for d in range(poly_degree + 1):
        for combo in itertools.combinations_with_replacement(vars_, d):
            powers: dict = {}
            for v in combo:
                powers[v] = powers.get(v, 0) + 1
            monos.append(tuple(sorted(powers.items(), key=lambda ve: ve[0].key)))
    return sorted(monos, key=_mono_key, reverse=True)


def find_symmetries(
    sys: PdeSystem,
    jet_order: int,
    poly_degree: int,
    max_unknowns: int = DEFAULT_ANSATZ_CAP,
) -> list[GeneratingSection]:
    """Basis of all polynomial symmetries within the given ansatz bounds.

    The ansatz uses only parametric jet variables, so sections are
    determined uniquely on shell.  The basis is in reduced row-echelon form
    over the unknowns ordered by (component, descending monomial).
    """
    if jet_order < 0 or poly_degree < 0:
        raise ValueError("bounds must be nonnegative")
    monos = ansatz_monomials(sys, jet_order, poly_degree)
    unknowns = [(alpha, mono) for alpha in range(sys.m) for mono in monos]
    if len(unknowns) > max_unknowns:
        raise AnsatzTooLarge(f"ansatz has {len(unknowns)} unknowns (cap {max_unknowns})")
    red = _Reducer(sys)
    columns = []
    for alpha, mono in unknowns:
        comps = [DiffPoly()] * sys.m
        comps[alpha] = DiffPoly({mono: 1})
        columns.append(linearization(sys, GeneratingSection(comps), red))
    row_index: dict[tuple[int, tuple], int] = {}
    entries: dict[tuple[int, int], Fraction] = {}
    for j, col in enumerate(columns):
        for a, res in enumerate(col):
            for mono, c in res.terms.items():
                r = row_index.setdefault((a, mono), len(row_index))
                entries[r, j] = c
    rows = [[entries.get((r, j), 0) for j in range(len(unknowns))] for r in range(len(row_index))]
    basis = nullspace(rows, len(unknowns))
    sections = []
    for vec in basis:
        comps = [DiffPoly()] * sys.m
        for c, (alpha, mono) in zip(vec, unknowns):
            if c:
                comps[alpha] = comps[alpha] + DiffPoly({mono: c})
        sections.append(GeneratingSection(comps))
    return sections
