"""Exact checks of homotopy-algebra identities (L-infinity, A-infinity,
LR-infinity and Chevalley-Eilenberg derivation relations).

All operations use the degree +1 convention: a k-ary operation raises the
total degree of its inputs by one.

The checkers come in two layers.  The generic layer works on any element
type supporting ``+``, ``-``, unary ``-``, multiplication by an integer and
truthiness (nonzero test); callers hand in a finite list of :class:`Sample`
test elements together with the operations as callables.  The table layer
(:class:`GradedSpace`, :class:`Vec`, :class:`MultiBracket`) wraps finite
dimensional structure-constant tables and runs the generic checks on every
basis tuple, which makes a pass a proof over the given basis.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

__all__ = [
    "GradedSpace",
    "Vec",
    "MultiBracket",
    "LrData",
    "GradedAlgebra",
    "Sample",
    "Failure",
    "Report",
    "TableError",
    "koszul_sign",
    "unshuffles",
    "linf_report",
    "ainf_report",
    "lr_report",
    "ce_report",
    "check_l_infinity",
    "check_a_infinity",
    "check_lr_infinity",
    "check_ce_relations",
    "parse_tables",
]


class TableError(ValueError):
    """Malformed structure table (degree rule, symmetry clash, bad name)."""


# -- signs and permutations -------------------------------------------------

def koszul_sign(sigma: Sequence[int], degrees: Sequence[int]) -> int:
    """Koszul sign of reordering ``(v_0, .., v_{k-1})`` into
    ``(v_sigma[0], .., v_sigma[k-1])``.

    Every inversion of ``sigma`` swaps a pair of elements once, contributing
    ``(-1)^(p*q)`` for their degrees ``p, q``.
    """
    k = len(degrees)
    if len(sigma) != k or sorted(sigma) != list(range(k)):
        raise ValueError(f"{tuple(sigma)} is not a permutation of 0..{k - 1}")
    odd = 0
    for i in range(k):
        for j in range(i + 1, k):
            if sigma[i] > sigma[j]:
                odd += degrees[sigma[i]] * degrees[sigma[j]]
    return -1 if odd % 2 else 1


def unshuffles(r: int, s: int) -> list[tuple[int, ...]]:
    """All permutations increasing on the first ``r`` and the last ``s`` slots."""
    if r < 0 or s < 0:
        raise ValueError("r and s must be nonnegative")
    n = r + s
    out = []
    for head in itertools.combinations(range(n), r):
        rest = tuple(i for i in range(n) if i not in head)
        out.append(head + rest)
    return out


# -- reports ----------------------------------------------------------------

@dataclass(frozen=True)
class Failure:
    identity: str
    k: int
    inputs: tuple[str, ...]
    residual: str

    def describe(self) -> str:
        return f"{self.identity} k={self.k} ({', '.join(self.inputs)}): residual {self.residual}"


@dataclass
class Report:
    checked: int = 0
    failures: list[Failure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def first_failure(self) -> Failure | None:
        return self.failures[0] if self.failures else None

    def record(self, identity: str, k: int, inputs: Sequence[str], residual) -> None:
        self.checked += 1
        if residual:
            self.failures.append(Failure(identity, k, tuple(inputs), str(residual)))

    def extend(self, other: Report) -> None:
        self.checked += other.checked
        self.failures.extend(other.failures)

    def failed_identities(self) -> list[str]:
        return sorted({f.identity for f in self.failures})


@dataclass(frozen=True)
class Sample:
    """A homogeneous test element with a display label."""

    label: str
    value: object
    degree: int


def _acc(total, term, sign: int = 1):
    if term is None or not term:
        return total
    term = term if sign == 1 else -term
    return term if total is None else total + term


# -- generic identity engine ------------------------------------------------

@dataclass(frozen=True)
class _Item:
    tag: str  # "L" (algebra) or "A" (module)
    value: object
    degree: int
    key: object = None


Bracket = Callable[[Sequence[_Item]], "_Item | None"]


def _cached(bracket: Bracket) -> Bracket:
    memo: dict = {}

    def call(items: Sequence[_Item]):
        keys = tuple(it.key for it in items)
        if any(k is None for k in keys):
            return bracket(items)
        if keys not in memo:
            memo[keys] = bracket(items)
        return memo[keys]

    return call


def _jacobi(items: Sequence[_Item], bracket: Bracket):
    """``sum_{r+s=k} sum_sigma eps l_{s+1}(l_r(..), ..)`` for ``items``."""
    k = len(items)
    degs = [it.degree for it in items]
    total = None
    for r in range(1, k + 1):
        for sigma in unshuffles(r, k - r):
            inner = bracket([items[i] for i in sigma[:r]])
            if inner is None:
                continue
            outer = bracket([inner] + [items[i] for i in sigma[r:]])
            if outer is None:
                continue
            total = _acc(total, outer.value, koszul_sign(sigma, degs))
    return total


def _op_bracket(ops: Mapping[int, Callable], tag: str = "L") -> Bracket:
    def call(items: Sequence[_Item]):
        f = ops.get(len(items))
        if f is None:
            return None
        v = f(*(it.value for it in items))
        if v is None or not v:
            return None
        return _Item(tag, v, sum(it.degree for it in items) + 1)

    return call


def _semidirect_bracket(l_ops: Mapping[int, Callable], m_ops: Mapping[int, Callable]) -> Bracket:
    """Brackets on ``L + A``: ``l_k`` on pure L-inputs, ``m_k(v..|a)`` with one
    A-input moved last (Koszul sign), zero with two or more A-inputs."""
    lb = _op_bracket(l_ops, "L")
    mb = _op_bracket(m_ops, "A")

    def call(items: Sequence[_Item]):
        where = [i for i, it in enumerate(items) if it.tag == "A"]
        if not where:
            return lb(items)
        if len(where) > 1:
            return None
        p = where[0]
        moved = list(items[:p]) + list(items[p + 1:]) + [items[p]]
        out = mb(moved)
        if out is None:
            return None
        passed = sum(it.degree for it in items[p + 1:])
        if (items[p].degree * passed) % 2:
            return _Item("A", -out.value, out.degree)
        return out

    return call


def _items(samples: Sequence[Sample], tag: str, offset: int = 0) -> list[_Item]:
    return [_Item(tag, s.value, s.degree, (tag, offset + i)) for i, s in enumerate(samples)]


def linf_report(samples: Sequence[Sample], ops: Mapping[int, Callable], max_k: int) -> Report:
    """Higher Jacobi identities on every multiset of ``samples`` of size <= max_k.

    ``ops[k]`` evaluates the k-ary bracket; missing arities are zero.  The
    identity is graded symmetric in its inputs, so multisets suffice.
    """
    report = Report()
    items = _items(samples, "L")
    bracket = _cached(_op_bracket(ops))
    for k in range(1, max_k + 1):
        for idx in itertools.combinations_with_replacement(range(len(items)), k):
            res = _jacobi([items[i] for i in idx], bracket)
            report.record("jacobi", k, [samples[i].label for i in idx], res)
    return report


def ainf_report(samples: Sequence[Sample], ops: Mapping[int, Callable], max_k: int) -> Report:
    """Higher associativity on every ordered tuple of ``samples`` up to max_k:
    ``sum_{r, j} (-1)^(|u_1|+..+|u_j|) a_{k-r+1}(u_1..u_j, a_r(u_{j+1}..u_{j+r}), ..)``."""
    report = Report()
    memo: dict = {}

    def inner(idx: tuple[int, ...]):
        if idx not in memo:
            f = ops.get(len(idx))
            memo[idx] = f(*(samples[i].value for i in idx)) if f else None
        return memo[idx]

    for k in range(1, max_k + 1):
        for idx in itertools.product(range(len(samples)), repeat=k):
            total = None
            for r in range(1, k + 1):
                outer = ops.get(k - r + 1)
                if outer is None:
                    continue
                for j in range(k - r + 1):
                    v = inner(idx[j:j + r])
                    if v is None or not v:
                        continue
                    args = [samples[i].value for i in idx[:j]] + [v] + [samples[i].value for i in idx[j + r:]]
                    out = outer(*args)
                    sign = -1 if sum(samples[i].degree for i in idx[:j]) % 2 else 1
                    total = _acc(total, out, sign)
            report.record("associativity", k, [samples[i].label for i in idx], total)
    return report


def lr_report(
    l_samples: Sequence[Sample],
    a_samples: Sequence[Sample],
    l_ops: Mapping[int, Callable],
    m_ops: Mapping[int, Callable],
    product: Callable,
    action: Callable,
    max_k: int,
    a_differential: Callable | None = None,
) -> Report:
    """All LR-infinity conditions on the given test elements.

    ``product(a, b)`` is the commutative product on A and ``action(a, v)``
    the A-module structure on L.  Identity names in the report:
    ``jacobi`` (L-infinity identities of l), ``module`` (L-infinity-module
    identities of m), ``commutative``, ``associative``, ``action``,
    ``differential``, ``multilinear``, ``derivation`` and ``leibniz``.
    """
    report = Report()
    report.extend(linf_report(l_samples, l_ops, max_k))
    li = _items(l_samples, "L")
    ai = _items(a_samples, "A", len(l_samples))
    semi = _cached(_semidirect_bracket(l_ops, m_ops))
    for k in range(1, max_k + 1):
        for idx in itertools.combinations_with_replacement(range(len(li)), k - 1):
            for j, w in enumerate(ai):
                res = _jacobi([li[i] for i in idx] + [w], semi)
                report.record("module", k, [l_samples[i].label for i in idx] + [a_samples[j].label], res)

    def m(k: int, vs: Sequence, a):
        f = m_ops.get(k)
        return f(*vs, a) if f else None

    def l(k: int, vs: Sequence):
        f = l_ops.get(k)
        return f(*vs) if f else None

    av, aa = a_samples, [a.value for a in a_samples]
    lv = [v.value for v in l_samples]
    prod_memo = {(i, j): product(aa[i], aa[j]) for i in range(len(aa)) for j in range(len(aa))}
    act_memo = {(i, j): action(aa[i], lv[j]) for i in range(len(aa)) for j in range(len(lv))}

    for (i, j), ab in prod_memo.items():
        sign = -1 if (av[i].degree * av[j].degree) % 2 else 1
        report.record("commutative", 2, [av[i].label, av[j].label], _acc(ab, prod_memo[j, i], -sign))
    for i, j, t in itertools.product(range(len(aa)), repeat=3):
        lhs = product(prod_memo[i, j], aa[t])
        rhs = product(aa[i], prod_memo[j, t])
        report.record("associative", 3, [av[i].label, av[j].label, av[t].label], _acc(lhs, rhs, -1))
    for i, j, t in itertools.product(range(len(aa)), range(len(aa)), range(len(lv))):
        lhs = action(prod_memo[i, j], lv[t])
        rhs = action(aa[i], act_memo[j, t])
        report.record("action", 3, [av[i].label, av[j].label, l_samples[t].label], _acc(lhs, rhs, -1))
    if a_differential is not None:
        for a in a_samples:
            report.record("differential", 1, [a.label], _acc(m(1, [], a.value), a_differential(a.value), -1))

    for k in range(1, max_k + 1):
        has_m, has_l = k in m_ops, k in l_ops
        if not (has_m or has_l):
            continue
        for idx in itertools.combinations_with_replacement(range(len(l_samples)), k - 1):
            vs = [l_samples[i] for i in idx]
            vvals = [v.value for v in vs]
            vdeg = sum(v.degree for v in vs)
            labels = [v.label for v in vs]
            mv = [m(k, vvals, a) for a in aa]
            outer = -1 if (vdeg + 1) % 2 else 1  # (-1)^(|a|(sum|v|+1)) for odd a
            if has_m:
                for i, j in itertools.product(range(len(aa)), repeat=2):
                    lhs = m(k, vvals, prod_memo[i, j])
                    t1 = product(mv[i], aa[j]) if mv[i] else None
                    t2 = product(aa[i], mv[j]) if mv[j] else None
                    sign = outer if av[i].degree % 2 else 1
                    res = _acc(_acc(lhs, t1, -1), t2, -sign)
                    report.record("derivation", k, labels + [f"{av[i].label}*{av[j].label}"], res)
                for i in range(len(aa)):
                    for slot in range(k - 1):
                        pre = sum(v.degree for v in vs[:slot])
                        sign = -1 if (av[i].degree * (1 + pre)) % 2 else 1
                        moved = list(vvals)
                        moved[slot] = act_memo[i, idx[slot]]
                        for j in range(len(aa)):
                            lhs = m(k, moved, aa[j])
                            rhs = product(aa[i], mv[j]) if mv[j] else None
                            shown = labels[:slot] + [f"{av[i].label}*{labels[slot]}"] + labels[slot + 1:] + [av[j].label]
                            report.record("multilinear", k, shown, _acc(lhs, rhs, -sign))
            lk = [l(k, vvals + [x]) for x in lv]
            for i in range(len(aa)):
                sign = outer if av[i].degree % 2 else 1
                for t in range(len(lv)):
                    lhs = l(k, vvals + [act_memo[i, t]])
                    t1 = action(mv[i], lv[t]) if mv[i] else None
                    t2 = action(aa[i], lk[t]) if lk[t] else None
                    res = _acc(_acc(lhs, t1, -1), t2, -sign)
                    report.record("leibniz", k, labels + [f"{av[i].label}*{l_samples[t].label}"], res)
    return report


def ce_report(
    samples: Sequence[Sample],
    derivations: Sequence[Callable],
    product: Callable | None = None,
) -> Report:
    """Relations among degree-one derivations ``d_1 .. d_K``.

    First every ``d_k`` is tested as a derivation of ``product`` on all pairs
    of samples (identity ``not-derivation``).  Then for every weight
    ``k = 2 .. 2K`` the sum ``sum_{r+s=k} d_r d_s`` (identity ``ce``) and the
    square of the total derivation (identity ``total``) must vanish on every
    sample.  Because all ``d_k`` are odd, ``sum_{r+s=k} [d_r, d_s]`` is twice
    the ordered sum, so the two vanish together.
    """
    report = Report()
    K = len(derivations)
    if product is not None:
        for r, d in enumerate(derivations, start=1):
            for a, b in itertools.product(samples, repeat=2):
                lhs = d(product(a.value, b.value))
                da, db = d(a.value), d(b.value)
                t1 = product(da, b.value) if da else None
                t2 = product(a.value, db) if db else None
                res = _acc(_acc(lhs, t1, -1), t2, 1 if a.degree % 2 else -1)
                report.record("not-derivation", r, [f"d{r}", a.label, b.label], res)
    memo: dict = {}

    def apply(r: int, i: int):
        if (r, i) not in memo:
            memo[r, i] = derivations[r - 1](samples[i].value)
        return memo[r, i]

    for k in range(2, 2 * K + 1):
        for i, x in enumerate(samples):
            total = None
            for r in range(1, K + 1):
                s = k - r
                if not 1 <= s <= K:
                    continue
                inner = apply(s, i)
                if inner:
                    total = _acc(total, derivations[r - 1](inner))
            report.record("ce", k, [x.label], total)
    for i, x in enumerate(samples):
        total = None
        for r in range(1, K + 1):
            inner = apply(r, i)
            if not inner:
                continue
            for d in derivations:
                total = _acc(total, d(inner))
        report.record("total", 2, [x.label], total)
    return report


# -- finite-dimensional tables ----------------------------------------------

def _fmt_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class GradedSpace:
    """Finite graded vector space with a named homogeneous basis."""

    def __init__(self, basis: Iterable[tuple[str, int]]):
        self.basis = tuple((str(n), int(d)) for n, d in basis)
        names = [n for n, _ in self.basis]
        if len(set(names)) != len(names):
            raise TableError("basis names must be unique")
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self) -> int:
        return len(self.basis)

    def __repr__(self) -> str:
        return "GradedSpace(" + ", ".join(f"{n}:{d}" for n, d in self.basis) + ")"

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.basis]

    def index(self, name: str | int) -> int:
        if isinstance(name, int):
            if not 0 <= name < len(self.basis):
                raise TableError(f"basis index {name} out of range")
            return name
        try:
            return self._index[name]
        except KeyError:
            raise TableError(f"unknown basis element {name!r}") from None

    def degree(self, i: int) -> int:
        return self.basis[i][1]

    def vec(self, name: str | int, coef=1) -> Vec:
        return Vec(self, {self.index(name): Fraction(coef)})

    def zero(self) -> Vec:
        return Vec(self, {})

    def samples(self) -> list[Sample]:
        return [Sample(n, self.vec(i), d) for i, (n, d) in enumerate(self.basis)]


class Vec:
    """Vector with rational coordinates in a :class:`GradedSpace` basis."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: GradedSpace, coeffs: Mapping[int, Fraction] | None = None):
        self.space = space
        self.coeffs = {i: Fraction(c) for i, c in (coeffs or {}).items() if c}

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Vec):
            return self.space is other.space and self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return NotImplemented

    __hash__ = None

    def _check(self, other: Vec) -> None:
        if other.space is not self.space:
            raise TableError("vectors live in different spaces")

    def __add__(self, other: Vec) -> Vec:
        self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, 0) + c
        return Vec(self.space, out)

    def __neg__(self) -> Vec:
        return Vec(self.space, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other: Vec) -> Vec:
        return self + (-other)

    def __mul__(self, c) -> Vec:
        return Vec(self.space, {i: x * c for i, x in self.coeffs.items()})

    __rmul__ = __mul__

    def degree(self) -> int | None:
        degs = {self.space.degree(i) for i in self.coeffs}
        return degs.pop() if len(degs) == 1 else None

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in sorted(self.coeffs):
            c = self.coeffs[i]
            name = self.space.basis[i][0]
            mag = abs(c)
            body = name if mag == 1 else f"{_fmt_coef(mag)}*{name}"
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    __repr__ = __str__


class MultiBracket:
    """A k-ary degree +1 operation given by a structure table.

    ``inputs`` lists the space of each slot; the first ``sym_slots`` slots
    are graded symmetric (all slots for a symmetric bracket).  Entries may be
    given on any ordering of the symmetric slots; they are stored on sorted
    representatives and looked up with the Koszul sign.
    """

    def __init__(
        self,
        arity: int,
        entries: Mapping[tuple, Vec],
        inputs: GradedSpace | Sequence[GradedSpace],
        output: GradedSpace | None = None,
        symmetric: bool = True,
        sym_slots: int | None = None,
        shift: int = 1,
    ):
        if arity < 1:
            raise TableError("arity must be at least 1")
        if isinstance(inputs, GradedSpace):
            inputs = [inputs] * arity
        if len(inputs) != arity:
            raise TableError(f"{arity}-ary bracket needs {arity} input spaces")
        self.arity = arity
        self.inputs = tuple(inputs)
        self.output = output or self.inputs[0]
        self.symmetric = symmetric
        self.sym_slots = (arity if symmetric else 0) if sym_slots is None else sym_slots
        if any(sp is not self.inputs[0] for sp in self.inputs[: self.sym_slots]):
            raise TableError("symmetric slots must share one space")
        self.shift = shift
        self.table: dict[tuple[int, ...], Vec] = {}
        for key, val in entries.items():
            self._store(key, val)

    def _canonical(self, idx: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
        p = self.sym_slots
        if p < 2:
            return idx, 1
        head = idx[:p]
        order = sorted(range(p), key=lambda i: head[i])
        degs = [self.inputs[0].degree(i) for i in head]
        sign = koszul_sign(order, degs)
        return tuple(head[i] for i in order) + idx[p:], sign

    def _store(self, key: tuple, val: Vec) -> None:
        if len(key) != self.arity:
            raise TableError(f"entry {key} has wrong arity for a {self.arity}-ary bracket")
        idx = tuple(sp.index(n) for sp, n in zip(self.inputs, key))
        if val.space is not self.output:
            raise TableError(f"entry {key} has a value outside the output space")
        want = sum(sp.degree(i) for sp, i in zip(self.inputs, idx)) + self.shift
        for j in val.coeffs:
            if self.output.degree(j) != want:
                raise TableError(
                    f"entry {key} -> {val} violates the degree rule (expected degree {want})"
                )
        canon, sign = self._canonical(idx)
        val = val if sign == 1 else -val
        if self._self_sign(canon) == -1 and val:
            raise TableError(f"entry {key} must vanish by graded symmetry")
        old = self.table.get(canon)
        if old is not None and old != val:
            raise TableError(f"entry {key} conflicts with an earlier entry")
        if val:
            self.table[canon] = val

    def _self_sign(self, canon: tuple[int, ...]) -> int:
        """-1 when two equal odd inputs sit in symmetric slots."""
        head = canon[: self.sym_slots]
        for a, b in zip(head, head[1:]):
            if a == b and self.inputs[0].degree(a) % 2:
                return -1
        return 1

    def lookup(self, idx: tuple[int, ...]) -> Vec | None:
        canon, sign = self._canonical(idx)
        if self._self_sign(canon) == -1:
            return None
        val = self.table.get(canon)
        if val is None:
            return None
        return val if sign == 1 else -val

    def __call__(self, *args: Vec) -> Vec:
        if len(args) != self.arity:
            raise TableError(f"{self.arity}-ary bracket called with {len(args)} arguments")
        out = self.output.zero()
        for combo in itertools.product(*(sorted(a.coeffs.items()) for a in args)):
            c = Fraction(1)
            for _, x in combo:
                c *= x
            val = self.lookup(tuple(i for i, _ in combo))
            if val is not None:
                out = out + val * c
        return out


def _ops(brackets: Iterable[MultiBracket]) -> dict[int, MultiBracket]:
    ops: dict[int, MultiBracket] = {}
    for b in brackets:
        if b.arity in ops:
            raise TableError(f"two brackets of arity {b.arity}")
        ops[b.arity] = b
    return ops


def check_l_infinity(space: GradedSpace, brackets: Sequence[MultiBracket], max_k: int) -> Report:
    for b in brackets:
        if not b.symmetric:
            raise TableError("L-infinity brackets must be symmetric")
    return linf_report(space.samples(), _ops(brackets), max_k)


def check_a_infinity(space: GradedSpace, ops: Sequence[MultiBracket], max_k: int) -> Report:
    for b in ops:
        if b.symmetric:
            raise TableError("A-infinity operations carry no symmetry")
    return ainf_report(space.samples(), _ops(ops), max_k)


@dataclass
class LrData:
    """Finite LR-infinity data.

    ``product`` is a bilinear table on ``A`` (degree 0), ``action`` maps
    ``(a, v)`` into ``L``.  ``l`` and ``m`` are the structure brackets;
    ``m[k]`` has ``k - 1`` symmetric L-slots followed by one A-slot.  The
    differential of A is ``m[1]``.
    """

    A: GradedSpace
    L: GradedSpace
    product: Mapping[tuple[int, int], Vec]
    action: Mapping[tuple[int, int], Vec]
    l: Sequence[MultiBracket] = ()
    m: Sequence[MultiBracket] = ()

    def __post_init__(self) -> None:
        self.product = _bilinear_table(self.A, self.A, self.A, self.product, "product")
        self.action = _bilinear_table(self.A, self.L, self.L, self.action, "action")
        for b in self.l:
            if any(sp is not self.L for sp in b.inputs) or b.output is not self.L:
                raise TableError("l-brackets must map L-tuples to L")
        for b in self.m:
            if b.inputs[-1] is not self.A or b.output is not self.A or any(sp is not self.L for sp in b.inputs[:-1]):
                raise TableError("m-brackets must map (L.., A) to A")

    def multiply(self, a: Vec, b: Vec) -> Vec:
        return _bilinear(self.product, self.A, a, b)

    def act(self, a: Vec, v: Vec) -> Vec:
        return _bilinear(self.action, self.L, a, v)


def _bilinear_table(left, right, out, table, what) -> dict[tuple[int, int], Vec]:
    stored = {}
    for (p, q), val in table.items():
        i, j = left.index(p), right.index(q)
        want = left.degree(i) + right.degree(j)
        if val.space is not out or any(out.degree(t) != want for t in val.coeffs):
            raise TableError(f"{what} entry ({p},{q}) -> {val} is not of degree {want}")
        if val:
            stored[i, j] = val
    return stored


def _bilinear(table, out: GradedSpace, a: Vec, b: Vec) -> Vec:
    res = out.zero()
    for i, x in a.coeffs.items():
        for j, y in b.coeffs.items():
            v = table.get((i, j))
            if v is not None:
                res = res + v * (x * y)
    return res


def check_lr_infinity(data: LrData, max_k: int) -> Report:
    return lr_report(
        data.L.samples(),
        data.A.samples(),
        _ops(data.l),
        _ops(data.m),
        data.multiply,
        data.act,
        max_k,
    )


@dataclass
class GradedAlgebra:
    """Graded algebra given by a product table on a :class:`GradedSpace`."""

    space: GradedSpace
    product: Mapping[tuple, Vec]

    def __post_init__(self) -> None:
        self.product = _bilinear_table(self.space, self.space, self.space, self.product, "product")

    def multiply(self, a: Vec, b: Vec) -> Vec:
        return _bilinear(self.product, self.space, a, b)

    def linear_map(self, images: Mapping, degree: int = 1) -> Callable[[Vec], Vec]:
        """Linear map from basis images, checked to have the given degree."""
        table = {}
        for name, val in images.items():
            i = self.space.index(name)
            want = self.space.degree(i) + degree
            if any(self.space.degree(t) != want for t in val.coeffs):
                raise TableError(f"image of {name} is not of degree {want}")
            table[i] = val

        def apply(v: Vec) -> Vec:
            out = self.space.zero()
            for i, c in v.coeffs.items():
                if i in table:
                    out = out + table[i] * c
            return out

        return apply


def check_ce_relations(algebra: GradedAlgebra, derivations: Sequence[Callable[[Vec], Vec]]) -> Report:
    return ce_report(algebra.space.samples(), derivations, algebra.multiply)


# -- text tables --------------------------------------------------------------

_ENTRY_RE = re.compile(r"^\(([^)]*)\)\s*->\s*(.+)$")
_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9]*$")


@dataclass
class TableFile:
    spaces: dict[str, GradedSpace]
    entries: dict[str, list[tuple[int, tuple[str, ...], tuple[str, ...], str]]]

    def space(self, key: str) -> GradedSpace:
        if key not in self.spaces:
            raise TableError(f"missing '{key}:' declaration")
        return self.spaces[key]


def _parse_basis(text: str, lineno: int) -> GradedSpace:
    basis = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, deg = part.partition(":")
        name = name.strip()
        if not sep or not _NAME_RE.match(name):
            raise TableError(f"line {lineno}: bad basis entry {part!r}")
        try:
            basis.append((name, int(deg)))
        except ValueError:
            raise TableError(f"line {lineno}: bad degree in {part!r}") from None
    return GradedSpace(basis)


def parse_tables(text: str) -> TableFile:
    """Parse the line-oriented table format.

    Space declarations ``basis:``, ``A:`` or ``L:`` take ``name:degree``
    lists; every other key takes one entry ``(args) -> combination``, where
    ``m``-entries separate the module argument by ``|``.  Blank lines and
    ``#`` comments are ignored.
    """
    spaces: dict[str, GradedSpace] = {}
    entries: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise TableError(f"line {lineno}: expected 'key: value'")
        if key in ("basis", "A", "L"):
            if key in spaces:
                raise TableError(f"line {lineno}: duplicate '{key}:' declaration")
            spaces[key] = _parse_basis(rest, lineno)
            continue
        mt = _ENTRY_RE.match(rest.strip())
        if not mt:
            raise TableError(f"line {lineno}: expected '(args) -> value'")
        args, value = mt.groups()
        head, bar, tail = args.partition("|")
        names = tuple(a.strip() for a in head.split(",") if a.strip())
        extra = tuple(a.strip() for a in tail.split(",") if a.strip()) if bar else ()
        entries.setdefault(key, []).append((lineno, names, extra, value.strip()))
    return TableFile(spaces, entries)


def parse_combination(text: str, space: GradedSpace, lineno: int = 0) -> Vec:
    """Rational linear combination of basis names, e.g. ``3*e2 - 1/2*e1``."""
    from .diffpoly import JetSpace
    from .parser import ParseError, parse_expr

    js = JetSpace(space.names, [])
    try:
        p = parse_expr(text, js)
    except ParseError as exc:
        raise TableError(f"line {lineno}: {exc}") from None
    out = space.zero()
    for mono, c in p.terms.items():
        if not mono:
            raise TableError(f"line {lineno}: constant term in {text!r}")
        if len(mono) != 1 or mono[0][1] != 1:
            raise TableError(f"line {lineno}: {text!r} is not linear")
        out = out + space.vec(mono[0][0].index, c)
    return out


_ARITY_RE = re.compile(r"^([a-z])(\d+)$")


def brackets_from(tf: TableFile, letter: str, inputs_for, output: GradedSpace, symmetric: bool) -> list[MultiBracket]:
    """Collect ``<letter><k>`` entries into brackets."""
    grouped: dict[int, dict] = {}
    for key, rows in tf.entries.items():
        mt = _ARITY_RE.match(key)
        if not mt or mt.group(1) != letter:
            continue
        k = int(mt.group(2))
        for lineno, names, extra, value in rows:
            args = names + extra
            if len(args) != k:
                raise TableError(f"line {lineno}: {key} needs {k} arguments, got {len(args)}")
            table = grouped.setdefault(k, {})
            if args in table:
                raise TableError(f"line {lineno}: duplicate entry for {key}{args}")
            table[args] = (lineno, parse_combination(value, output, lineno))
    out = []
    for k in sorted(grouped):
        if k < 1:
            raise TableError(f"arity must be at least 1 for '{letter}{k}'")
        entries = {args: v for args, (_, v) in grouped[k].items()}
        sym_slots = None if letter != "m" else k - 1
        out.append(MultiBracket(k, entries, inputs_for(k), output, symmetric=symmetric, sym_slots=sym_slots))
    return out


def lr_data_from(tf: TableFile) -> LrData:
    A, L = tf.space("A"), tf.space("L")

    def bilinear(key, out):
        table = {}
        for lineno, names, extra, value in tf.entries.get(key, []):
            if len(names) != 2 or extra:
                raise TableError(f"line {lineno}: '{key}' entries take two arguments")
            table[names] = parse_combination(value, out, lineno)
        return table

    known = {"prod", "act"}
    for key in tf.entries:
        mt = _ARITY_RE.match(key)
        if key not in known and not (mt and mt.group(1) in "lm"):
            raise TableError(f"unknown table key '{key}'")
    l = brackets_from(tf, "l", lambda k: [L] * k, L, True)
    m = brackets_from(tf, "m", lambda k: [L] * (k - 1) + [A], A, True)
    return LrData(A, L, bilinear("prod", A), bilinear("act", L), l, m)
