"""PDE systems in solved form, prolongation and on-shell reduction.

A system is a list of equations ``u^a_{I_a} = rhs_a``.  Every jet variable
``u^a_K`` with ``I_a`` contained in ``K`` is *principal*; it is rewritten as
``D_{K - I_a} rhs_a``.  Termination is guaranteed by a ranking on jet
variables under which every right-hand side is strictly below its principal
derivative; the ranking is a monomial order on derivative counts, so the
inequality survives total differentiation.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .diffpoly import (
    DiffPoly,
    JetSpace,
    JetVariable,
    MultiIndex,
    Derivative,
    substitute,
    total_derivative,
    total_derivative_multi,
)

__all__ = [
    "IllPosedSystem",
    "Ranking",
    "PdeSystem",
    "PassivityReport",
    "prolong_equation",
    "reduce",
    "is_zero_on_shell",
    "check_passivity",
]

log = logging.getLogger(__name__)

DEFAULT_REWRITE_CAP = 10000


class IllPosedSystem(ValueError):
    """No admissible ranking exists, or reduction exceeded its rewrite cap."""


@dataclass(frozen=True)
class Ranking:
    """Ranking of jet variables by derivative counts.

    ``priority`` lists independent indices from most to least significant.
    With ``graded`` the total order ``|I|`` is compared first.  Ties are
    broken by the dependent index.
    """

    priority: tuple[int, ...]
    graded: bool = True

    def key(self, v: JetVariable) -> tuple:
        counts = v.multi.counts(len(self.priority))
        ordered = tuple(counts[i] for i in self.priority)
        if self.graded:
            return (len(v.multi),) + ordered + (v.index,)
        return ordered + (v.index,)

    def describe(self, space: JetSpace) -> str:
        names = " > ".join(space.independents[i] for i in self.priority)
        return ("graded " if self.graded else "lex ") + names


def _candidate_rankings(n: int) -> Iterable[Ranking]:
    for graded in (True, False):
        for perm in itertools.permutations(range(n)):
            yield Ranking(perm, graded)


@dataclass(frozen=True)
class PdeSystem:
    """Orthonomic system ``principal_a = rhs_a`` over a :class:`JetSpace`."""

    space: JetSpace
    equations: tuple[tuple[JetVariable, DiffPoly], ...]
    ranking: Ranking | None = None
    rewrite_cap: int = DEFAULT_REWRITE_CAP

    def __post_init__(self) -> None:
        principals = [p for p, _ in self.equations]
        for p in principals:
            if p.is_independent:
                raise IllPosedSystem("left-hand side must be a derivative of a dependent variable")
        if len(set(principals)) != len(principals):
            raise IllPosedSystem("principal derivatives must be pairwise distinct")
        if self.ranking is None:
            object.__setattr__(self, "ranking", self._find_ranking())
        else:
            bad = self._ranking_violations(self.ranking)
            if bad:
                raise IllPosedSystem(f"ranking {self.ranking} does not order equation(s) {bad}")

    @classmethod
    def build(cls, space: JetSpace, equations: Sequence[tuple[JetVariable | DiffPoly, DiffPoly]], **kw) -> PdeSystem:
        eqs = []
        for lhs, rhs in equations:
            if isinstance(lhs, DiffPoly):
                items = list(lhs.terms.items())
                if len(items) != 1:
                    raise IllPosedSystem("left-hand side must be a bare derivative")
                (mono, c), = items
                if c != 1 or len(mono) != 1 or mono[0][1] != 1:
                    raise IllPosedSystem("left-hand side must be a bare derivative")
                lhs = mono[0][0]
            eqs.append((lhs, rhs))
        return cls(space, tuple(eqs), **kw)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def m(self) -> int:
        return self.space.m

    def residual(self, a: int) -> DiffPoly:
        """``F_a = principal_a - rhs_a``."""
        p, rhs = self.equations[a]
        return DiffPoly.var(p) - rhs

    def _ranking_violations(self, ranking: Ranking) -> list[int]:
        bad = []
        for a, (p, rhs) in enumerate(self.equations):
            top = ranking.key(p)
            for v in rhs.variables():
                if not v.is_independent and ranking.key(v) >= top:
                    bad.append(a)
                    break
        return bad

    def _find_ranking(self) -> Ranking:
        for r in _candidate_rankings(self.n):
            if not self._ranking_violations(r):
                return r
        raise IllPosedSystem("no derivative ranking makes every right-hand side lower than its principal derivative")

    def principal_equation(self, v: JetVariable) -> int | None:
        """Index of the first equation whose principal derivative divides ``v``."""
        if v.is_independent:
            return None
        for a, (p, _) in enumerate(self.equations):
            if p.index == v.index and v.multi.contains(p.multi):
                return a
        return None

    def is_principal(self, v: JetVariable) -> bool:
        return self.principal_equation(v) is not None

    def format_equation(self, a: int) -> str:
        p, rhs = self.equations[a]
        return f"{self.space.var_name(p)} = {self.space.format(rhs)}"


class _Reducer:
    """Memoized on-shell normal forms of principal jet variables (per call)."""

    def __init__(self, sys: PdeSystem, cap: int | None = None):
        self.sys = sys
        self.cap = sys.rewrite_cap if cap is None else cap
        self.rewrites = 0
        self.memo: dict[JetVariable, DiffPoly] = {}

    def tick(self) -> None:
        self.rewrites += 1
        if self.rewrites > self.cap:
            raise IllPosedSystem(f"reduction exceeded the rewrite cap of {self.cap}")

    def normal_form(self, v: JetVariable) -> DiffPoly:
        if v in self.memo:
            return self.memo[v]
        a = self.sys.principal_equation(v)
        p, rhs = self.sys.equations[a]
        self.tick()
        if v.multi == p.multi:
            nf = self.reduce(rhs)
        else:
            # peel the largest extra letter, differentiate the lower normal form
            extra = v.multi - p.multi
            j = extra.letters[-1]
            lower = Derivative(v.index, v.multi - MultiIndex((j,)))
            nf = self.reduce(total_derivative(self.normal_form(lower), j))
        self.memo[v] = nf
        return nf

    def reduce(self, q: DiffPoly) -> DiffPoly:
        while True:
            sigma = {v: self.normal_form(v) for v in q.variables() if self.sys.is_principal(v)}
            if not sigma:
                return q
            q = substitute(q, sigma)


def reduce(p: DiffPoly, sys: PdeSystem, rewrite_cap: int | None = None) -> DiffPoly:
    """On-shell normal form: no principal derivative survives."""
    return _Reducer(sys, rewrite_cap).reduce(p)


def is_zero_on_shell(p: DiffPoly, sys: PdeSystem, rewrite_cap: int | None = None) -> bool:
    return reduce(p, sys, rewrite_cap).is_zero()


def prolong_equation(sys: PdeSystem, a: int, J: MultiIndex | Sequence[int]) -> tuple[JetVariable, DiffPoly]:
    """The prolonged equation ``u^a_{I_a J} = reduce(D_J rhs_a)``."""
    if not 0 <= a < len(sys.equations):
        raise IndexError(f"equation index {a} out of range")
    if not isinstance(J, MultiIndex):
        J = MultiIndex(tuple(J))
    for i in J:
        if not 0 <= i < sys.n:
            raise IndexError(f"independent index {i} out of range")
    p, rhs = sys.equations[a]
    return Derivative(p.index, p.multi + J), reduce(total_derivative_multi(rhs, J), sys)


@dataclass
class PassivityReport:
    checked: list[tuple[int, int, JetVariable]] = field(default_factory=list)
    failures: list[tuple[int, int, JetVariable, DiffPoly, DiffPoly]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _words(n: int, length: int) -> Iterable[MultiIndex]:
    for letters in itertools.combinations_with_replacement(range(n), length):
        yield MultiIndex(letters)


def check_passivity(sys: PdeSystem, up_to_order: int) -> PassivityReport:
    """Compare the two reductions of every overlap of principal derivatives.

    For equations ``a < b`` on the same dependent variable the overlap is
    ``K = lcm(I_a, I_b)``; every ``K L`` with ``|L| <= up_to_order`` is
    checked.
    """
    if up_to_order < 0:
        raise ValueError("up_to_order must be nonnegative")
    report = PassivityReport()
    n = sys.n
    for a, b in itertools.combinations(range(len(sys.equations)), 2):
        pa, ra = sys.equations[a]
        pb, rb = sys.equations[b]
        if pa.index != pb.index:
            continue
        ca, cb = pa.multi.counts(n), pb.multi.counts(n)
        lcm = MultiIndex(tuple(i for i in range(n) for _ in range(max(ca[i], cb[i]))))
        for k in range(up_to_order + 1):
            for L in _words(n, k):
                K = lcm + L
                target = Derivative(pa.index, K)
                left = reduce(total_derivative_multi(ra, K - pa.multi), sys)
                right = reduce(total_derivative_multi(rb, K - pb.multi), sys)
                report.checked.append((a, b, target))
                if left != right:
                    report.failures.append((a, b, target, left, right))
    return report
