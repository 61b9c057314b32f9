from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import diffpolys
from jetlab.diffpoly import (
    Derivative,
    DiffPoly,
    Independent,
    JetSpace,
    MultiIndex,
    partial,
    substitute,
    total_derivative,
    total_derivative_multi,
)
from jetlab.parser import ParseError, UnknownIdentifier, parse_expr

S = JetSpace(["x", "t"], ["u"])


def P(text):
    return parse_expr(text, S)


def var(text):
    (mono, _), = P(text).terms.items()
    return mono[0][0]


class TestParser:
    def test_kdv_residual_has_three_terms(self):
        assert len(P("u_t - u*u_x - u_xxx").terms) == 3

    def test_zero_is_empty(self):
        assert P("0").terms == {}
        assert P("0").is_zero()

    def test_halved_square(self):
        expected = DiffPoly.const(Fraction(1, 2)) * DiffPoly.var(Derivative(0, MultiIndex.of(0))) ** 2
        assert P("(u_x)^2/2") == expected

    def test_suffix_is_order_insensitive(self):
        assert P("u_xt") == P("u_tx")
        assert S.format(P("u_tx")) == "u_xt"

    def test_round_trip(self):
        p = P("(u_x)^2/2 + 3*u - 1/3")
        assert S.format(p) == "1/2*u_x^2 + 3*u - 1/3"
        assert P(S.format(p)) == p

    @pytest.mark.parametrize("text", ["u_x +", "2 u", "u^-1", "(u", "u^x", ""])
    def test_syntax_errors(self, text):
        with pytest.raises(ParseError):
            P(text)

    @pytest.mark.parametrize("text", ["v", "u_y", "y"])
    def test_unknown_identifiers(self, text):
        with pytest.raises(UnknownIdentifier):
            P(text)

    @given(diffpolys(n=2, m=1))
    def test_print_parse_round_trip(self, p):
        assert P(S.format(p)) == p


class TestPartial:
    def test_power_rule(self):
        assert partial(P("u_x^2"), var("u_x")) == P("2*u_x")

    def test_product(self):
        assert partial(P("u*u_x"), var("u")) == P("u_x")

    def test_absent_variable(self):
        assert partial(P("x*u_xx + u"), var("u_t")).is_zero()


class TestTotalDerivative:
    def test_of_dependent(self):
        assert total_derivative(P("u"), 0) == P("u_x")

    def test_of_constant(self):
        assert total_derivative(P("7/3"), 0).is_zero()

    def test_product_rule_example(self):
        assert total_derivative(P("u*u_x"), 0) == P("u_x^2 + u*u_xx")

    def test_of_coordinate(self):
        assert total_derivative(P("x^2*t"), 0) == P("2*x*t")
        assert total_derivative(P("x^2*t"), 1) == P("x^2")

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            total_derivative(P("u"), 2, n=S.n)
        with pytest.raises(IndexError):
            total_derivative_multi(P("u"), (0, 5), n=S.n)

    def test_multi(self):
        assert total_derivative_multi(P("u*u_x"), ()) == P("u*u_x")
        assert total_derivative_multi(P("u"), (0, 0)) == P("u_xx")
        assert total_derivative_multi(P("u^2"), (0, 1)) == P("2*u_t*u_x + 2*u*u_xt")

    @given(diffpolys(), st.integers(0, 1), st.integers(0, 1))
    def test_commute(self, p, i, j):
        assert total_derivative(total_derivative(p, i), j) == total_derivative(total_derivative(p, j), i)

    @given(diffpolys(), diffpolys(), st.integers(0, 1))
    def test_leibniz(self, p, q, i):
        D = lambda f: total_derivative(f, i)
        assert D(p * q) == D(p) * q + p * D(q)

    @given(diffpolys(), diffpolys(), st.fractions(max_denominator=5), st.integers(0, 1))
    def test_linearity(self, p, q, c, i):
        assert total_derivative(p * c + q, i) == total_derivative(p, i) * c + total_derivative(q, i)
        v = Derivative(0, MultiIndex.of(i))
        assert partial(p * c + q, v) == partial(p, v) * c + partial(q, v)

    @given(diffpolys())
    def test_order_grows_by_at_most_one(self, p):
        assert total_derivative(p, 0).jet_order() <= p.jet_order() + 1


class TestSubstitute:
    def test_single(self):
        assert substitute(P("u_t"), {var("u_t"): P("u*u_x")}) == P("u*u_x")

    def test_to_zero(self):
        assert substitute(P("u_t^2"), {var("u_t"): DiffPoly()}).is_zero()

    def test_simultaneous(self):
        sigma = {var("u_t"): P("u_xx"), var("u_x"): P("u")}
        assert substitute(P("u_t + u_x"), sigma) == P("u_xx + u")

    def test_coordinates(self):
        assert substitute(P("x*u"), {Independent(0): P("2")}) == P("2*u")


class TestArithmetic:
    def test_exact_rationals(self):
        assert P("1/3 + 1/6") == P("1/2")
        assert P("u/2 + u/2") == P("u")

    def test_zero_coefficients_vanish(self):
        assert (P("u*u_x") - P("u_x*u")).terms == {}

    @given(diffpolys(), diffpolys(), diffpolys())
    def test_ring_axioms(self, p, q, r):
        assert (p + q) * r == p * r + q * r
        assert p * q == q * p
        assert (p * q) * r == p * (q * r)
