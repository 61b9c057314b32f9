import pytest
from hypothesis import given, strategies as st

from conftest import diffpolys
from jetlab.diffpoly import JetSpace, MultiIndex, total_derivative
from jetlab.equation import (
    IllPosedSystem,
    PdeSystem,
    check_passivity,
    is_zero_on_shell,
    prolong_equation,
    reduce,
)
from jetlab.parser import parse_expr

S = JetSpace(["x", "t"], ["u"])
S2 = JetSpace(["x", "t"], ["u", "v"])


def P(text, space=S):
    return parse_expr(text, space)


def system(space, *eqs, **kw):
    return PdeSystem.build(space, [(P(l, space), P(r, space)) for l, r in eqs], **kw)


KDV = system(S, ("u_t", "u*u_x + u_xxx"))
HEAT = system(S, ("u_t", "u_xx"))


class TestProlong:
    def test_empty_word(self):
        v, rhs = prolong_equation(KDV, 0, ())
        assert S.var_name(v) == "u_t"
        assert rhs == P("u*u_x + u_xxx")

    def test_kdv_by_x(self):
        v, rhs = prolong_equation(KDV, 0, MultiIndex.of(0))
        assert S.var_name(v) == "u_xt"
        assert rhs == P("u_x^2 + u*u_xx + u_xxxx")

    def test_heat_by_t(self):
        v, rhs = prolong_equation(HEAT, 0, MultiIndex.of(1))
        assert S.var_name(v) == "u_tt"
        assert rhs == P("u_xxxx")


class TestReduce:
    def test_one_substitution(self):
        assert reduce(P("u_t"), KDV) == P("u*u_x + u_xxx")

    def test_parametric_untouched(self):
        assert reduce(P("u_xx"), KDV) == P("u_xx")

    def test_consistent_with_prolongation(self):
        assert reduce(P("u_xt - u_x^2 - u*u_xx - u_xxxx"), KDV).is_zero()

    def test_on_shell(self):
        assert is_zero_on_shell(P("u_t - u*u_x - u_xxx"), KDV)
        assert not is_zero_on_shell(P("u_x"), KDV)

    def test_second_time_derivative(self):
        p = P("u_tt - 2*u*u_x^2 - u^2*u_xx - 5*u_x*u_xxx - 3*u_xx^2 - 2*u*u_xxxx - u_xxxxxx")
        assert is_zero_on_shell(p, KDV)

    def test_rewrite_cap(self):
        with pytest.raises(IllPosedSystem):
            reduce(P("u_tttttt"), KDV, rewrite_cap=3)

    @given(diffpolys(n=2, m=1, max_order=3), diffpolys(n=2, m=1, max_order=2))
    def test_algebra_map(self, p, q):
        assert reduce(p + q, KDV) == reduce(p, KDV) + reduce(q, KDV)
        assert reduce(p * q, KDV) == reduce(reduce(p, KDV) * reduce(q, KDV), KDV)

    @given(diffpolys(n=2, m=1, max_order=3))
    def test_idempotent(self, p):
        r = reduce(p, KDV)
        assert reduce(r, KDV) == r

    @given(diffpolys(n=2, m=1, max_order=2), st.integers(0, 1))
    def test_total_derivatives_descend(self, p, i):
        assert reduce(total_derivative(p, i), HEAT) == reduce(total_derivative(reduce(p, HEAT), i), HEAT)


class TestNormalForm:
    @given(diffpolys(n=2, m=1, max_order=3))
    def test_no_time_derivatives_survive(self, p):
        # for an evolution equation in t the normal form is free of t-derivatives
        r = reduce(p, KDV)
        assert all(v.is_independent or 1 not in v.multi.letters for v in r.variables())


class TestWellPosedness:
    def test_bare_derivative_required(self):
        with pytest.raises(IllPosedSystem):
            PdeSystem.build(S, [(P("u_t + 1"), P("0"))])

    def test_coordinate_lhs_rejected(self):
        with pytest.raises(IllPosedSystem):
            PdeSystem.build(S, [(P("x"), P("u"))])

    def test_duplicate_principal(self):
        with pytest.raises(IllPosedSystem):
            system(S, ("u_t", "u"), ("u_t", "u_x"))

    def test_no_terminating_ranking(self):
        with pytest.raises(IllPosedSystem):
            system(S, ("u_x", "u_xx"))


class TestPassivity:
    def test_single_equation(self):
        assert check_passivity(KDV, 2).passed

    def test_conflicting_overlap(self):
        report = check_passivity(system(S, ("u_t", "u_x"), ("u_tt", "u")), 0)
        assert not report.passed
        _, _, v, left, right = report.failures[0]
        assert S.var_name(v) == "u_tt"
        assert {S.format(left), S.format(right)} == {"u_xx", "u"}

    def test_two_component_system(self):
        sys2 = system(S2, ("u_t", "v_x"), ("v_t", "u_x"))
        assert check_passivity(sys2, 3).passed
