"""Polynomial models of a split tangent bundle ``TM = C + V``.

A model is a chart ``y^0 .. y^{N-1}`` with a frame ``e_0 .. e_{N-1}`` of
polynomial vector fields; the first ``c`` span the involutive distribution
C, the remaining ``v`` span the chosen complement V.  The frame must have a
constant nonzero determinant so that the dual coframe ``theta`` is again
polynomial.  All forms are stored in the coframe basis.

Bidegree ``(q, p)`` counts C-legs and V-legs.  Horizontal forms are those
of bidegree ``(q, 0)``; V-valued horizontal forms carry only C-legs and
take values in V.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .diffpoly import DiffPoly, Independent, JetSpace, partial
from .homotopy import Sample
from .parser import ParseError, parse_expr

__all__ = [
    "FoliationError",
    "FoliationSyntaxError",
    "VectorField",
    "FoliationModel",
    "Form",
    "BigradedForm",
    "VectorValuedForm",
    "build_model",
    "parse_model",
    "exterior_derivative",
    "exterior_derivative_coordinates",
    "bott_connection",
    "curvature",
    "insertion",
    "nr_bracket",
    "lie_derivative",
    "fn_bracket",
    "dbar",
    "dbar_valued",
    "LrMaps",
    "lr_structure_maps",
    "ce_derivations",
    "iota_R",
    "monomials",
    "form_samples",
    "lr_samples",
]


class FoliationError(ValueError):
    """Rejected model: non-unimodular frame, non-involutive C, bad input."""


class FoliationSyntaxError(FoliationError, ParseError):
    """Malformed model text."""

    def __init__(self, message: str):
        ValueError.__init__(self, message)
        self.pos, self.text = -1, ""


def _sort_legs(legs: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign and sorted tuple of a wedge of coframe legs (sign 0 on repeats)."""
    if len(set(legs)) != len(legs):
        return 0, ()
    legs = list(legs)
    sign = 1
    for i in range(len(legs)):
        for j in range(len(legs) - 1 - i):
            if legs[j] > legs[j + 1]:
                legs[j], legs[j + 1] = legs[j + 1], legs[j]
                sign = -sign
    return sign, tuple(legs)


def _add_into(out: dict, key, val: DiffPoly) -> None:
    if not val:
        return
    new = out.get(key, DiffPoly()) + val
    if new:
        out[key] = new
    else:
        out.pop(key, None)


@dataclass(frozen=True)
class VectorField:
    comps: tuple[DiffPoly, ...]

    def apply(self, f: DiffPoly) -> DiffPoly:
        out = DiffPoly()
        for j, c in enumerate(self.comps):
            if c:
                out = out + c * partial(f, Independent(j))
        return out

    def bracket(self, other: VectorField) -> VectorField:
        return VectorField(tuple(self.apply(b) - other.apply(a) for a, b in zip(self.comps, other.comps)))


def _det(m: list[list[DiffPoly]]) -> DiffPoly:
    n = len(m)
    if n == 0:
        return DiffPoly.const(1)
    out = DiffPoly()
    for j in range(n):
        if not m[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        out = out + term if j % 2 == 0 else out - term
    return out


class FoliationModel:
    """Chart, frame ``e = (X_1..X_c, Y_1..Y_v)``, coframe and structure functions."""

    def __init__(self, coords: Sequence[str], c_frame: Sequence[VectorField], v_frame: Sequence[VectorField]):
        self.space = JetSpace(list(coords), [])
        self.N = len(coords)
        self.c = len(c_frame)
        self.v = len(v_frame)
        self.frame = list(c_frame) + list(v_frame)
        if self.c + self.v != self.N:
            raise FoliationError(f"frame has {self.c + self.v} fields for {self.N} coordinates")
        for f in self.frame:
            if len(f.comps) != self.N:
                raise FoliationError("vector field with the wrong number of components")
        # E[j][k] = j-th component of e_k
        E = [[self.frame[k].comps[j] for k in range(self.N)] for j in range(self.N)]
        det = _det(E)
        if not det.is_constant() or det.is_zero():
            raise FoliationError(f"frame is not unimodular (determinant {self.space.format(det)})")
        inv = Fraction(1) / det.constant_term()
        # coframe[k][j]: theta^k = sum_j coframe[k][j] dy^j, the adjugate over det
        self.E = E
        self.coframe = [
            [
                _det([row[:k] + row[k + 1:] for i, row in enumerate(E) if i != j]) * (inv if (j + k) % 2 == 0 else -inv)
                for j in range(self.N)
            ]
            for k in range(self.N)
        ]
        self.structure = [[[DiffPoly()] * self.N for _ in range(self.N)] for _ in range(self.N)]
        for i, j in itertools.combinations(range(self.N), 2):
            br = self.frame[i].bracket(self.frame[j])
            for k in range(self.N):
                val = DiffPoly()
                for m, comp in enumerate(br.comps):
                    if comp:
                        val = val + self.coframe[k][m] * comp
                self.structure[k][i][j] = val
                self.structure[k][j][i] = -val
        for a, b in itertools.combinations(range(self.c), 2):
            for k in range(self.c, self.N):
                if self.structure[k][a][b]:
                    raise FoliationError(
                        f"C is not involutive: [{self.frame_name(a)}, {self.frame_name(b)}] leaves C"
                    )
        self._dtheta = [self._dtheta_k(k) for k in range(self.N)]
        self._curvature = None

    # -- naming and evaluation ------------------------------------------------
    def is_c(self, i: int) -> bool:
        return i < self.c

    def frame_name(self, i: int) -> str:
        return f"X{i + 1}" if i < self.c else f"Y{i - self.c + 1}"

    def theta_name(self, k: int) -> str:
        return f"thC{k + 1}" if k < self.c else f"thV{k - self.c + 1}"

    def e(self, i: int, f: DiffPoly) -> DiffPoly:
        return self.frame[i].apply(f)

    def poly(self, text: str) -> DiffPoly:
        return parse_expr(text, self.space)

    def c_indices(self) -> range:
        return range(self.c)

    def v_indices(self) -> range:
        return range(self.c, self.N)

    def _dtheta_k(self, k: int) -> Form:
        comps: dict = {}
        for i, j in itertools.combinations(range(self.N), 2):
            _add_into(comps, (i, j), -self.structure[k][i][j])
        return Form(self, comps)

    def dtheta(self, k: int) -> Form:
        return self._dtheta[k]

    # -- element constructors -------------------------------------------------
    def function(self, f: DiffPoly | str) -> Form:
        return Form.of(self, (), f)

    def theta(self, k: int) -> Form:
        return Form.of(self, (k,), DiffPoly.const(1))

    def field(self, i: int, form: Form | None = None) -> VectorValuedForm:
        form = form if form is not None else self.function(DiffPoly.const(1))
        return VectorValuedForm(self, {(legs, i): f for legs, f in form.comps.items()})


class Form:
    """Polynomial-coefficient differential form in the coframe basis."""

    __slots__ = ("model", "comps")

    def __init__(self, model: FoliationModel, comps: Mapping[tuple[int, ...], DiffPoly] | None = None):
        self.model = model
        self.comps = {k: v for k, v in (comps or {}).items() if v}

    @classmethod
    def of(cls, model: FoliationModel, legs: Sequence[int], f: DiffPoly | str | int = 1) -> Form:
        if isinstance(f, str):
            f = model.poly(f)
        elif not isinstance(f, DiffPoly):
            f = DiffPoly.const(f)
        sign, key = _sort_legs(legs)
        return cls(model, {key: f * sign} if sign else {})

    def __bool__(self) -> bool:
        return bool(self.comps)

    def __eq__(self, other) -> bool:
        if isinstance(other, Form):
            return self.comps == other.comps
        if other == 0:
            return not self.comps
        return NotImplemented

    __hash__ = None

    def __add__(self, other: Form) -> Form:
        out = dict(self.comps)
        for k, v in other.comps.items():
            _add_into(out, k, v)
        return Form(self.model, out)

    def __neg__(self) -> Form:
        return Form(self.model, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other: Form) -> Form:
        return self + (-other)

    def __mul__(self, c) -> Form:
        if isinstance(c, Form):
            return self.wedge(c)
        return Form(self.model, {k: v * c for k, v in self.comps.items()})

    __rmul__ = __mul__

    def wedge(self, other: Form) -> Form:
        out: dict = {}
        for a, f in self.comps.items():
            for b, g in other.comps.items():
                sign, key = _sort_legs(a + b)
                if sign:
                    _add_into(out, key, f * g * sign)
        return Form(self.model, out)

    def degrees(self) -> set[int]:
        return {len(k) for k in self.comps}

    def degree(self) -> int | None:
        d = self.degrees()
        return d.pop() if len(d) == 1 else (0 if not d else None)

    def bidegree_of(self, legs: tuple[int, ...]) -> tuple[int, int]:
        q = sum(1 for i in legs if i < self.model.c)
        return q, len(legs) - q

    def bidegrees(self) -> set[tuple[int, int]]:
        return {self.bidegree_of(k) for k in self.comps}

    def part(self, q: int, p: int) -> Form:
        return Form(self.model, {k: v for k, v in self.comps.items() if self.bidegree_of(k) == (q, p)})

    def of_degree(self, r: int) -> Form:
        return Form(self.model, {k: v for k, v in self.comps.items() if len(k) == r})

    def is_horizontal(self) -> bool:
        return all(self.bidegree_of(k)[1] == 0 for k in self.comps)

    def format(self) -> str:
        if not self.comps:
            return "0"
        m = self.model
        parts = []
        for legs in sorted(self.comps, key=lambda k: (len(k), k)):
            parts.append(_term(m.space.format(self.comps[legs]), "^".join(m.theta_name(i) for i in legs)))
        return _join(parts)

    __str__ = format

    def __repr__(self) -> str:
        return f"Form({self.format()})"


BigradedForm = Form


def _term(coef: str, body: str) -> str:
    if not body:
        return coef
    if coef == "1":
        return body
    if coef == "-1":
        return "-" + body
    if " " in coef:
        return f"({coef})*{body}"
    return f"{coef}*{body}"


def _join(parts: list[str]) -> str:
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


class VectorValuedForm:
    """Form with values in the frame: components ``(legs, k) -> coefficient``."""

    __slots__ = ("model", "comps")

    def __init__(self, model: FoliationModel, comps: Mapping[tuple[tuple[int, ...], int], DiffPoly] | None = None):
        self.model = model
        self.comps = {k: v for k, v in (comps or {}).items() if v}

    @classmethod
    def of(cls, model: FoliationModel, legs: Sequence[int], k: int, f: DiffPoly | str | int = 1) -> VectorValuedForm:
        form = Form.of(model, legs, f)
        return cls(model, {(legs_, k): g for legs_, g in form.comps.items()})

    @classmethod
    def tensor(cls, form: Form, k: int) -> VectorValuedForm:
        return cls(form.model, {(legs, k): f for legs, f in form.comps.items()})

    def __bool__(self) -> bool:
        return bool(self.comps)

    def __eq__(self, other) -> bool:
        if isinstance(other, VectorValuedForm):
            return self.comps == other.comps
        if other == 0:
            return not self.comps
        return NotImplemented

    __hash__ = None

    def __add__(self, other: VectorValuedForm) -> VectorValuedForm:
        out = dict(self.comps)
        for k, v in other.comps.items():
            _add_into(out, k, v)
        return VectorValuedForm(self.model, out)

    def __neg__(self) -> VectorValuedForm:
        return VectorValuedForm(self.model, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other: VectorValuedForm) -> VectorValuedForm:
        return self + (-other)

    def __mul__(self, c) -> VectorValuedForm:
        return VectorValuedForm(self.model, {k: v * c for k, v in self.comps.items()})

    __rmul__ = __mul__

    def decomposed(self) -> Iterable[tuple[Form, int]]:
        """``(form, k)`` pairs with ``self = sum form (x) e_k``."""
        grouped: dict[int, dict] = {}
        for (legs, k), f in sorted(self.comps.items()):
            grouped.setdefault(k, {})[legs] = f
        for k, comps in grouped.items():
            yield Form(self.model, comps), k

    def terms(self) -> Iterable[tuple[Form, int]]:
        """Monomial pieces ``(f theta^I, k)``."""
        for (legs, k), f in sorted(self.comps.items()):
            yield Form(self.model, {legs: f}), k

    def degrees(self) -> set[int]:
        return {len(legs) for legs, _ in self.comps}

    def degree(self) -> int | None:
        d = self.degrees()
        return d.pop() if len(d) == 1 else (0 if not d else None)

    def of_degree(self, r: int) -> VectorValuedForm:
        return VectorValuedForm(self.model, {k: v for k, v in self.comps.items() if len(k[0]) == r})

    def is_v_horizontal(self) -> bool:
        m = self.model
        return all(k >= m.c and all(i < m.c for i in legs) for legs, k in self.comps)

    def format(self) -> str:
        if not self.comps:
            return "0"
        m = self.model
        parts = []
        for legs, k in sorted(self.comps, key=lambda lk: (lk[1], len(lk[0]), lk[0])):
            body = "^".join(m.theta_name(i) for i in legs)
            coef = m.space.format(self.comps[legs, k])
            head = _term(coef, body) if body else (coef if " " not in coef else f"({coef})")
            parts.append(f"{head} (x) {m.frame_name(k)}")
        return _join(parts)

    __str__ = format

    def __repr__(self) -> str:
        return f"VectorValuedForm({self.format()})"


# -- model construction ------------------------------------------------------

def build_model(coords: Sequence[str], c_frame: Sequence, v_frame: Sequence) -> FoliationModel:
    """Build a model; frames may be :class:`VectorField` or ``d/d<name>`` strings."""
    space = JetSpace(list(coords), [])
    to_field = lambda f: f if isinstance(f, VectorField) else parse_vector_field(f, space)
    return FoliationModel(coords, [to_field(f) for f in c_frame], [to_field(f) for f in v_frame])


_DD_RE = re.compile(r"d/d([A-Za-z][A-Za-z0-9]*)")


def parse_vector_field(text: str, space: JetSpace) -> VectorField:
    """Parse ``d/dz + y*d/dx`` style vector fields over the coordinates of ``space``."""
    coords = space.independents
    markers = [f"zzdd{i}" for i in range(len(coords))]

    def repl(mt: re.Match) -> str:
        name = mt.group(1)
        if name not in coords:
            raise FoliationError(f"unknown coordinate {name!r} in {text!r}")
        return markers[coords.index(name)]

    body = _DD_RE.sub(repl, text)
    ext = JetSpace(list(coords) + markers, [])
    try:
        p = parse_expr(body, ext)
    except ParseError as exc:
        raise FoliationSyntaxError(f"cannot parse vector field {text!r}: {exc}") from None
    n = len(coords)
    comps = [DiffPoly()] * n
    for mono, c in p.terms.items():
        marks = [(v, e) for v, e in mono if v.index >= n]
        if len(marks) != 1 or marks[0][1] != 1:
            raise FoliationSyntaxError(f"{text!r} is not linear in the d/d symbols")
        rest = tuple((v, e) for v, e in mono if v.index < n)
        j = marks[0][0].index - n
        comps[j] = comps[j] + DiffPoly({rest: c})
    return VectorField(tuple(comps))


def parse_model(text: str) -> FoliationModel:
    """Model file with ``coords:``, ``cframe:`` and ``vframe:`` lines."""
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep or key not in ("coords", "cframe", "vframe"):
            raise FoliationSyntaxError(f"line {lineno}: expected coords:, cframe: or vframe:")
        if key in fields:
            raise FoliationSyntaxError(f"line {lineno}: duplicate '{key}:'")
        fields[key] = rest.strip()
    if "coords" not in fields:
        raise FoliationSyntaxError("missing 'coords:' line")
    coords = [c.strip() for c in fields["coords"].split(",") if c.strip()]
    split = lambda s: [f.strip() for f in s.split(",") if f.strip()]
    return build_model(coords, split(fields.get("cframe", "")), split(fields.get("vframe", "")))


# -- exterior calculus -------------------------------------------------------

def exterior_derivative(w: Form) -> Form:
    """``d`` in the coframe: ``df = e_i(f) theta^i`` and
    ``d theta^k = -sum_{i<j} c^k_ij theta^i theta^j``."""
    m = w.model
    out = Form(m)
    for legs, f in w.comps.items():
        rest = Form(m, {legs: DiffPoly.const(1)})
        for i in range(m.N):
            g = m.e(i, f)
            if g:
                out = out + Form.of(m, (i,), g).wedge(rest)
        for s, k in enumerate(legs):
            dk = m.dtheta(k)
            if not dk:
                continue
            before = Form(m, {legs[:s]: f * (-1 if s % 2 else 1)})
            after = Form(m, {legs[s + 1:]: DiffPoly.const(1)})
            out = out + before.wedge(dk).wedge(after)
    return out


def _rebase(comps: Mapping[tuple[int, ...], DiffPoly], images: list[dict[int, DiffPoly]]) -> dict[tuple[int, ...], DiffPoly]:
    """Rewrite a form given on basis 1-forms ``b_k`` with ``b_k = sum_j images[k][j] c_j``."""
    out: dict = {}
    for legs, f in comps.items():
        acc = {(): f}
        for k in legs:
            nxt: dict = {}
            for key, g in acc.items():
                for j, h in images[k].items():
                    sign, merged = _sort_legs(key + (j,))
                    if sign:
                        _add_into(nxt, merged, g * h * sign)
            acc = nxt
        for key, g in acc.items():
            _add_into(out, key, g)
    return out


def exterior_derivative_coordinates(w: Form) -> Form:
    """Independent route for ``d``: convert to ``dy``, differentiate, convert back."""
    m = w.model
    to_dy = [{j: c for j, c in enumerate(m.coframe[k]) if c} for k in range(m.N)]
    to_theta = [{k: c for k, c in enumerate(m.E[j]) if c} for j in range(m.N)]
    dy = _rebase(w.comps, to_dy)
    ddy: dict = {}
    for legs, f in dy.items():
        for j in range(m.N):
            g = partial(f, Independent(j))
            sign, key = _sort_legs((j,) + legs)
            if g and sign:
                _add_into(ddy, key, g * sign)
    return Form(m, _rebase(ddy, to_theta))


def _contract(k: int, w: Form) -> Form:
    """``i_{e_k} w``."""
    out: dict = {}
    for legs, f in w.comps.items():
        if k in legs:
            s = legs.index(k)
            _add_into(out, legs[:s] + legs[s + 1:], f * (-1 if s % 2 else 1))
    return Form(w.model, out)


def insertion(K: VectorValuedForm, w):
    """``i_K`` on forms and vector-valued forms: ``i_{phi (x) e_k} w = phi ^ i_{e_k} w``."""
    if isinstance(w, VectorValuedForm):
        out = VectorValuedForm(w.model)
        for form, b in w.decomposed():
            out = out + VectorValuedForm.tensor(insertion(K, form), b)
        return out
    out = Form(w.model)
    for phi, k in K.decomposed():
        inner = _contract(k, w)
        if inner:
            out = out + phi.wedge(inner)
    return out


def _homogeneous(K: VectorValuedForm) -> list[tuple[int, VectorValuedForm]]:
    return [(r, K.of_degree(r)) for r in sorted(K.degrees())]


def nr_bracket(K: VectorValuedForm, L: VectorValuedForm) -> VectorValuedForm:
    """``[K, L]^nr = i_K L - (-1)^((k-1)(l-1)) i_L K``, bilinear over degrees."""
    out = VectorValuedForm(K.model)
    for k, Kk in _homogeneous(K):
        for l, Ll in _homogeneous(L):
            a = insertion(Kk, Ll)
            b = insertion(Ll, Kk)
            out = out + a - b if ((k - 1) * (l - 1)) % 2 == 0 else out + a + b
    return out


def lie_derivative(K: VectorValuedForm, w: Form) -> Form:
    """``L_K = i_K d - (-1)^(k-1) d i_K``."""
    out = Form(w.model)
    for k, Kk in _homogeneous(K):
        a = insertion(Kk, exterior_derivative(w))
        b = exterior_derivative(insertion(Kk, w))
        out = out + a + b if (k - 1) % 2 else out + a - b
    return out


def _frame_bracket(m: FoliationModel, a: int, b: int) -> dict[int, DiffPoly]:
    return {k: m.structure[k][a][b] for k in range(m.N) if m.structure[k][a][b]}


def fn_bracket(K: VectorValuedForm, L: VectorValuedForm) -> VectorValuedForm:
    """Froelicher-Nijenhuis bracket from its value on decomposables
    ``phi (x) X`` and ``psi (x) Y``."""
    m = K.model
    out = VectorValuedForm(m)
    for phi, a in K.terms():
        k = phi.degree()
        ea = m.field(a)
        dphi = exterior_derivative(phi)
        for psi, b in L.terms():
            eb = m.field(b)
            pp = phi.wedge(psi)
            for t, c in _frame_bracket(m, a, b).items():
                out = out + VectorValuedForm.tensor(pp * c, t)
            out = out + VectorValuedForm.tensor(phi.wedge(lie_derivative(ea, psi)), b)
            out = out - VectorValuedForm.tensor(lie_derivative(eb, phi).wedge(psi), a)
            extra = VectorValuedForm.tensor(dphi.wedge(_contract(a, psi)), b) + VectorValuedForm.tensor(
                _contract(b, phi).wedge(exterior_derivative(psi)), a
            )
            out = out - extra if k % 2 else out + extra
    return out


def bott_connection(model: FoliationModel, a: int, b: int) -> list[DiffPoly]:
    """V-frame coefficients of ``[X_a, Y_b]``; ``b`` indexes the V-frame from 0."""
    if not 0 <= a < model.c or not 0 <= b < model.v:
        raise IndexError("frame index out of range")
    bb = model.c + b
    return [model.structure[k][a][bb] for k in model.v_indices()]


def curvature(model: FoliationModel) -> VectorValuedForm:
    """``R = sum_{b<b'} sum_a c^a_{bb'} theta^b ^ theta^b' (x) X_a``."""
    if model._curvature is not None:
        return model._curvature
    comps: dict = {}
    for b, b2 in itertools.combinations(model.v_indices(), 2):
        for a in model.c_indices():
            _add_into(comps, ((b, b2), a), model.structure[a][b][b2])
    model._curvature = VectorValuedForm(model, comps)
    return model._curvature


def iota_R(w: Form) -> Form:
    return insertion(curvature(w.model), w)


def dbar(w: Form) -> Form:
    """Bidegree ``(1, 0)`` part of ``d``."""
    m = w.model
    out = Form(m)
    for (q, p) in sorted(w.bidegrees()):
        out = out + exterior_derivative(w.part(q, p)).part(q + 1, p)
    return out


def dbar_valued(W: VectorValuedForm) -> VectorValuedForm:
    """Horizontal differential of V-valued forms through the Bott connection:
    ``dbar(w (x) Y_b) = dbar w (x) Y_b + (-1)^|w| w ^ theta^a (x) nabla_{X_a} Y_b``."""
    m = W.model
    out = VectorValuedForm(m)
    for form, b in W.decomposed():
        out = out + VectorValuedForm.tensor(dbar(form), b)
        for r in sorted(form.degrees()):
            piece = form.of_degree(r)
            sign = -1 if r % 2 else 1
            for a in m.c_indices():
                wa = piece.wedge(m.theta(a))
                for t in m.v_indices():
                    c = m.structure[t][a][b]
                    if c:
                        out = out + VectorValuedForm.tensor(wa * (c * sign), t)
    return out


# -- LR-infinity structure and CE derivations --------------------------------

def _shifted(W: VectorValuedForm) -> int:
    d = W.degree()
    if d is None:
        raise FoliationError("structure maps need homogeneous arguments")
    return d - 1


def _sgn(W: VectorValuedForm) -> int:
    return -1 if _shifted(W) % 2 else 1


@dataclass(frozen=True)
class LrMaps:
    """The six structure maps on horizontal forms ``A`` and V-valued
    horizontal forms ``L`` (graded by form degree minus one)."""

    model: FoliationModel
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def R(self) -> VectorValuedForm:
        return curvature(self.model)

    def _rw(self, *args: VectorValuedForm) -> VectorValuedForm:
        """``[..[[R, W]^nr, U]^nr ..]``, memoized on argument contents."""
        key = tuple(_key(a) for a in args)
        if key not in self._memo:
            prev = self._rw(*args[:-1]) if len(args) > 1 else self.R
            self._memo[key] = nr_bracket(prev, args[-1])
        return self._memo[key]

    def l1(self, W: VectorValuedForm) -> VectorValuedForm:
        return dbar_valued(W)

    def l2(self, W: VectorValuedForm, U: VectorValuedForm) -> VectorValuedForm:
        fn = fn_bracket(W, U)
        lead = fn if _sgn(W) == -1 else -fn
        return lead + self._rw(W, U)

    def l3(self, W: VectorValuedForm, U: VectorValuedForm, Z: VectorValuedForm) -> VectorValuedForm:
        return -nr_bracket(self._rw(W, U), Z)

    def m1(self, w: Form) -> Form:
        return dbar(w)

    def m2(self, W: VectorValuedForm, w: Form) -> Form:
        lie = lie_derivative(W, w)
        lead = lie if _sgn(W) == -1 else -lie
        return lead + insertion(self._rw(W), w)

    def m3(self, W: VectorValuedForm, U: VectorValuedForm, w: Form) -> Form:
        return -insertion(self._rw(W, U), w)

    def product(self, a: Form, b: Form) -> Form:
        return a.wedge(b)

    def action(self, a: Form, W: VectorValuedForm) -> VectorValuedForm:
        out = VectorValuedForm(W.model)
        for form, k in W.decomposed():
            out = out + VectorValuedForm.tensor(a.wedge(form), k)
        return out

    def l_ops(self) -> dict[int, Callable]:
        return {1: self.l1, 2: self.l2, 3: self.l3}

    def m_ops(self) -> dict[int, Callable]:
        return {1: self.m1, 2: self.m2, 3: self.m3}


def _key(W: VectorValuedForm) -> tuple:
    return tuple(sorted(W.comps.items(), key=lambda kv: kv[0]))


def lr_structure_maps(model: FoliationModel) -> LrMaps:
    return LrMaps(model)


def ce_derivations(model: FoliationModel, w: Form) -> tuple[Form, Form, Form]:
    """``(d1 w, d2 w, d3 w)`` with ``d1 = dbar``, ``d2 = d - dbar + iota_R``,
    ``d3 = -iota_R``."""
    d1 = dbar(w)
    ir = iota_R(w)
    d2 = exterior_derivative(w) - d1 + ir
    return d1, d2, -ir


def monomials(model: FoliationModel, max_degree: int) -> list[DiffPoly]:
    """Coordinate monomials of degree <= ``max_degree``, ascending."""
    out = []
    for deg in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(model.N), deg):
            p = DiffPoly.const(1)
            for j in combo:
                p = p * model.space.x(j)
            out.append(p)
    return out


def form_samples(model: FoliationModel, max_degree: int, max_form_degree: int | None = None) -> list[Sample]:
    """Monomial forms ``f theta^I`` with ``deg f <= max_degree``."""
    top = model.N if max_form_degree is None else max_form_degree
    out = []
    for r in range(top + 1):
        for legs in itertools.combinations(range(model.N), r):
            for f in monomials(model, max_degree):
                w = Form(model, {legs: f})
                out.append(Sample(w.format(), w, r))
    return out


def lr_samples(model: FoliationModel, max_degree: int) -> tuple[list[Sample], list[Sample]]:
    """Monomial samples ``(L, A)``: V-valued horizontal forms graded by form
    degree minus one, and horizontal forms."""
    A, L = [], []
    for r in range(model.c + 1):
        for legs in itertools.combinations(model.c_indices(), r):
            for f in monomials(model, max_degree):
                w = Form(model, {legs: f})
                A.append(Sample(w.format(), w, r))
                for b in model.v_indices():
                    W = VectorValuedForm(model, {(legs, b): f})
                    L.append(Sample(W.format(), W, r - 1))
    return L, A
