import itertools

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES
from jetlab.homotopy import ce_report, lr_report
from jetlab.diffpoly import DiffPoly
from jetlab.foliation import (
    FoliationError,
    FoliationSyntaxError,
    Form,
    VectorField,
    VectorValuedForm,
    bott_connection,
    build_model,
    ce_derivations,
    curvature,
    dbar,
    exterior_derivative,
    exterior_derivative_coordinates,
    fn_bracket,
    form_samples,
    insertion,
    lr_samples,
    lr_structure_maps,
    nr_bracket,
    parse_model,
)


def model(name):
    return parse_model((FIXTURES / f"{name}.fol").read_text())


FLAT, CURVED, BOTT = model("flat"), model("curved"), model("bott")


@st.composite
def polys(draw, m, max_degree=2):
    p = DiffPoly()
    for _ in range(draw(st.integers(0, 3))):
        term = DiffPoly.const(draw(st.integers(-3, 3)))
        for j in draw(st.lists(st.integers(0, m.N - 1), max_size=max_degree)):
            term = term * m.space.x(j)
        p = p + term
    return p


@st.composite
def forms(draw, m, degree=None, horizontal=False):
    slots = range(m.c) if horizontal else range(m.N)
    r = draw(st.integers(0, len(slots))) if degree is None else degree
    comps = {legs: draw(polys(m)) for legs in itertools.combinations(slots, r)}
    return Form(m, comps)


@st.composite
def valued(draw, m, degree=None, horizontal=False):
    r = draw(st.integers(0, m.c if horizontal else m.N)) if degree is None else degree
    targets = m.v_indices() if horizontal else range(m.N)
    out = VectorValuedForm(m)
    for k in draw(st.lists(st.sampled_from(list(targets)), min_size=1, max_size=2)):
        out = out + VectorValuedForm.tensor(draw(forms(m, r, horizontal)), k)
    return out


models = st.sampled_from([FLAT, CURVED, BOTT])


class TestBuildModel:
    def test_curved_structure(self):
        m = CURVED
        y1, y2 = m.v_indices()
        assert m.structure[0][y1][y2] == DiffPoly.const(1)
        assert all(not m.structure[k][i][j] for k in range(3) for i in range(3) for j in range(3)
                   if (k, i, j) not in {(0, y1, y2), (0, y2, y1)})

    def test_flat_structure(self):
        assert all(not f for plane in FLAT.structure for row in plane for f in row)

    def test_coframe_is_dual(self):
        for m in (FLAT, CURVED, BOTT):
            for k, i in itertools.product(range(m.N), repeat=2):
                pairing = sum((m.coframe[k][j] * m.E[j][i] for j in range(m.N)), DiffPoly())
                assert pairing == DiffPoly.const(1 if k == i else 0)

    @pytest.mark.parametrize(
        "coords, c_frame, v_frame, det",
        [
            (["x"], ["d/dx", "x*d/dx"], [], None),
            (["x", "y"], ["d/dx", "x*d/dx"], [], "0"),
            (["x", "y"], ["d/dx"], ["x*d/dy"], "x"),
        ],
    )
    def test_rejects_non_unimodular(self, coords, c_frame, v_frame, det):
        with pytest.raises(FoliationError) as info:
            build_model(coords, c_frame, v_frame)
        if det is not None:
            assert f"determinant {det}" in str(info.value)

    def test_rejects_non_involutive(self):
        with pytest.raises(FoliationError, match="not involutive"):
            build_model(["x", "y", "z"], ["d/dx", "d/dy + x*d/dz"], ["d/dz"])

    @pytest.mark.parametrize("text", ["coords x", "coords: x\ncframe: d/dx *", "cframe: d/dx"])
    def test_syntax(self, text):
        with pytest.raises(FoliationSyntaxError):
            parse_model(text)


class TestConnectionAndCurvature:
    def test_flat_bott(self):
        assert bott_connection(FLAT, 0, 0) == [DiffPoly()]

    def test_curved_bott(self):
        # V-part of [d/dx, d/dz + y d/dx]
        assert bott_connection(CURVED, 0, 1) == [DiffPoly(), DiffPoly()]

    def test_nonzero_bott(self):
        # [d/dx, d/dy + x d/dz] = d/dz = Y2
        assert bott_connection(BOTT, 0, 0) == [DiffPoly(), DiffPoly.const(1)]

    def test_curvatures(self):
        assert not curvature(FLAT)
        assert not curvature(BOTT)
        assert curvature(CURVED).format() == "thV1^thV2 (x) X1"
        line = build_model(["x", "y"], ["d/dx"], ["d/dy + x*d/dx"])
        assert not curvature(line)


class TestExteriorCalculus:
    @given(models.flatmap(forms))
    def test_matches_coordinates(self, w):
        assert exterior_derivative(w) == exterior_derivative_coordinates(w)

    @given(models.flatmap(forms))
    def test_square_zero(self, w):
        assert not exterior_derivative(exterior_derivative(w))

    @given(st.data())
    def test_leibniz(self, data):
        m = data.draw(models)
        a, b = data.draw(forms(m)), data.draw(forms(m))
        d = exterior_derivative
        sign = -1 if a.degree() % 2 else 1
        assert d(a.wedge(b)) == d(a).wedge(b) + a.wedge(d(b)) * sign

    def test_curved_theta_c(self):
        assert exterior_derivative(CURVED.theta(0)).format() == "-thV1^thV2"


class TestBrackets:
    def test_nr_on_vector_fields(self):
        assert not nr_bracket(CURVED.field(1), CURVED.field(2))

    def test_nr_example(self):
        K = VectorValuedForm.tensor(FLAT.theta(0), 0)
        # i_K K = theta^0 (x) e_0 on both summands, which cancel
        assert insertion(K, K) == K
        assert not nr_bracket(K, K)

    @given(st.data())
    def test_nr_degree(self, data):
        m = data.draw(models)
        K, L = data.draw(valued(m)), data.draw(valued(m))
        out = nr_bracket(K, L)
        assert not out or out.degree() == K.degree() + L.degree() - 1

    @given(st.data())
    def test_fn_on_vector_fields_is_lie_bracket(self, data):
        m = data.draw(models)
        f, g = data.draw(polys(m)), data.draw(polys(m))
        a, b = data.draw(st.integers(0, m.N - 1)), data.draw(st.integers(0, m.N - 1))
        V1 = VectorField(tuple(f * c for c in m.frame[a].comps))
        V2 = VectorField(tuple(g * c for c in m.frame[b].comps))
        br = V1.bracket(V2)
        expected = VectorValuedForm(m)
        for k in range(m.N):
            coef = sum((m.coframe[k][j] * br.comps[j] for j in range(m.N)), DiffPoly())
            expected = expected + VectorValuedForm.tensor(m.function(coef), k)
        K = VectorValuedForm.tensor(m.function(f), a)
        L = VectorValuedForm.tensor(m.function(g), b)
        assert fn_bracket(K, L) == expected

    def test_fn_identity_flat(self):
        ident = VectorValuedForm.tensor(FLAT.theta(0), 0) + VectorValuedForm.tensor(FLAT.theta(1), 1)
        assert not fn_bracket(ident, ident)

    @given(st.data())
    def test_fn_graded_antisymmetry(self, data):
        m = data.draw(models)
        K, L = data.draw(valued(m, horizontal=False)), data.draw(valued(m))
        k, l = K.degree(), L.degree()
        sign = -1 if (k * l) % 2 else 1
        assert fn_bracket(K, L) == fn_bracket(L, K) * (-sign)


class TestStructureMaps:
    def test_flat_higher_maps_vanish(self):
        maps = lr_structure_maps(FLAT)
        W = VectorValuedForm.tensor(FLAT.theta(0), 1)
        U = FLAT.field(1, FLAT.function("x*y"))
        a = FLAT.function("y^2")
        assert not maps.l3(W, U, W)
        assert not maps.m3(W, U, a)
        assert maps.l2(W, U) in (fn_bracket(W, U), -fn_bracket(W, U))

    def test_curved_l3_triple(self):
        # [[[R, Y1], Y2], thC (x) Y1] = -Y1, expanded by hand
        maps = lr_structure_maps(CURVED)
        Y1, Y2 = CURVED.field(1), CURVED.field(2)
        Z = VectorValuedForm.tensor(CURVED.theta(0), 1)
        assert maps.l3(Y1, Y2, Z) == Y1

    def test_m1_on_function(self):
        maps = lr_structure_maps(CURVED)
        assert maps.m1(CURVED.function("x^2*y + z")).format() == "2*x*y*thC1"

    def test_dbar_keeps_horizontal(self):
        w = CURVED.function("x*y*z")
        assert dbar(w).is_horizontal()


class TestChevalleyEilenberg:
    @given(models.flatmap(forms))
    def test_sum_is_d(self, w):
        d1, d2, d3 = ce_derivations(w.model, w)
        assert d1 + d2 + d3 == exterior_derivative(w)

    @given(forms(FLAT))
    def test_flat_split(self, w):
        d1, d2, d3 = ce_derivations(FLAT, w)
        assert not d3
        assert d2 == exterior_derivative(w) - dbar(w)

    def test_curved_theta_c(self):
        d1, d2, d3 = ce_derivations(CURVED, CURVED.theta(0))
        assert not d1 and not d2
        assert d3.format() == "-thV1^thV2"

    @given(polys(CURVED, max_degree=3))
    def test_functions_have_no_d3(self, f):
        assert not ce_derivations(CURVED, CURVED.function(f))[2]

    @given(forms(CURVED))
    def test_bidegrees(self, w):
        for (q, p) in w.bidegrees():
            part = w.part(q, p)
            for shift, piece in zip([(1, 0), (0, 1), (-1, 2)], ce_derivations(CURVED, part)):
                assert piece.bidegrees() <= {(q + shift[0], p + shift[1])}


class TestCrossModule:
    def test_flat_lr_infinity(self):
        maps = lr_structure_maps(FLAT)
        L, A = lr_samples(FLAT, 1)
        report = lr_report(L, A, maps.l_ops(), maps.m_ops(), maps.product, maps.action, 3, a_differential=dbar)
        assert report.passed and report.checked > 0

    def test_curved_ce_relations(self):
        samples = form_samples(CURVED, 1)
        derivs = [lambda w, i=i: ce_derivations(CURVED, w)[i] for i in range(3)]
        assert ce_report(samples, derivs, lambda a, b: a.wedge(b)).passed
