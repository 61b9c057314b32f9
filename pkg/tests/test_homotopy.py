from math import comb

import pytest
from hypothesis import given, strategies as st

from conftest import FIXTURES
from jetlab.homotopy import (
    GradedAlgebra,
    GradedSpace,
    LrData,
    MultiBracket,
    TableError,
    brackets_from,
    check_a_infinity,
    check_ce_relations,
    check_l_infinity,
    check_lr_infinity,
    koszul_sign,
    lr_data_from,
    parse_tables,
    unshuffles,
)


def sl2(constant=2):
    V = GradedSpace([("h", -1), ("e", -1), ("f", -1)])
    l2 = MultiBracket(2, {("h", "e"): V.vec("e", constant), ("h", "f"): V.vec("f", -2), ("e", "f"): V.vec("h")}, V)
    return V, l2


class TestKoszul:
    def test_identity(self):
        assert koszul_sign((0, 1, 2), (1, 1, 1)) == 1

    def test_odd_swap(self):
        assert koszul_sign((1, 0), (1, 1)) == -1
        assert koszul_sign((1, 0), (1, 2)) == 1

    def test_three_cycle_two_ways(self):
        degs = (1, 1, 0)
        direct = koszul_sign((1, 2, 0), degs)
        # (1,2,0) = swap positions 0,1 then swap positions 1,2
        first = koszul_sign((1, 0, 2), degs)
        second = koszul_sign((0, 2, 1), [degs[i] for i in (1, 0, 2)])
        assert direct == first * second == -1

    @given(st.data(), st.integers(1, 6))
    def test_multiplicative(self, data, n):
        degs = data.draw(st.lists(st.integers(-2, 2), min_size=n, max_size=n))
        sigma = data.draw(st.permutations(range(n)))
        tau = data.draw(st.permutations(range(n)))
        rho = [sigma[t] for t in tau]
        moved = [degs[s] for s in sigma]
        assert koszul_sign(rho, degs) == koszul_sign(sigma, degs) * koszul_sign(tau, moved)


class TestUnshuffles:
    def test_counts(self):
        assert len(unshuffles(1, 1)) == 2
        assert len(unshuffles(2, 1)) == 3
        assert unshuffles(0, 3) == [(0, 1, 2)]

    @given(st.integers(0, 5), st.integers(0, 5))
    def test_shape(self, r, s):
        perms = unshuffles(r, s)
        assert len(perms) == comb(r + s, r) == len(set(perms))
        for p in perms:
            assert sorted(p) == list(range(r + s))
            assert list(p[:r]) == sorted(p[:r]) and list(p[r:]) == sorted(p[r:])


class TestLInfinity:
    def test_zero_brackets(self):
        V = GradedSpace([("a", 0), ("b", 1)])
        assert check_l_infinity(V, [], 4).passed

    def test_sl2(self):
        V, l2 = sl2()
        report = check_l_infinity(V, [l2], 5)
        assert report.passed and report.checked > 0

    def test_perturbed_sl2_fails_at_three(self):
        V, l2 = sl2(constant=3)
        report = check_l_infinity(V, [l2], 5)
        assert not report.passed
        first = report.first_failure
        assert first.k == 3
        assert sorted(first.inputs) == ["e", "f", "h"]
        assert str(first.residual) == "h"

    def test_shifted_dgla(self):
        # sl2 tensor A, A = k[x, dx]/(x^2, x dx), d x = dx, after the degree shift
        lie = {("h", "e"): {"e": 2}, ("h", "f"): {"f": -2}, ("e", "f"): {"h": 1}}
        forms = {"1": 0, "x": 0, "dx": 1}
        mult = {("1", w): w for w in forms} | {(w, "1"): w for w in forms}
        basis = [(f"{a}.{w}", forms[w] - 1) for w in forms for a in "hef"]
        V = GradedSpace(basis)
        l1 = {(f"{a}.x",): V.vec(f"{a}.dx", -1) for a in "hef"}
        l2 = {}
        for (a, b), out in lie.items():
            for (w1, w2), w in mult.items():
                sign = -1 if forms[w1] % 2 else 1
                val = V.zero()
                for c, coef in out.items():
                    val = val + V.vec(f"{c}.{w}", sign * coef)
                l2[(f"{a}.{w1}", f"{b}.{w2}")] = val
        brackets = [MultiBracket(1, l1, V), MultiBracket(2, l2, V)]
        assert check_l_infinity(V, brackets, 4).passed

    def test_degree_rule_enforced(self):
        V = GradedSpace([("a", 0), ("b", 1)])
        with pytest.raises(TableError):
            MultiBracket(2, {("a", "a"): V.vec("a")}, V)

    def test_conflicting_entries(self):
        V = GradedSpace([("a", 0), ("b", 0), ("c", 1)])
        with pytest.raises(TableError):
            MultiBracket(2, {("a", "b"): V.vec("c"), ("b", "a"): V.vec("c", 2)}, V)

    def test_odd_square_must_vanish(self):
        V = GradedSpace([("a", -1), ("c", -1)])
        with pytest.raises(TableError):
            MultiBracket(2, {("a", "a"): V.vec("c")}, V)

    @given(st.permutations(range(3)))
    def test_symmetric_lookup(self, perm):
        V = GradedSpace([("a", 1), ("b", 0), ("c", 1), ("z", 3)])
        br = MultiBracket(3, {("a", "b", "c"): V.vec("z", 5)}, V)
        canon = (0, 1, 2)
        permuted = tuple(canon[i] for i in perm)
        sign = koszul_sign(perm, [V.degree(i) for i in canon])
        assert br.lookup(permuted) == br.lookup(canon) * sign


class TestAInfinity:
    def test_zero_ops(self):
        U = GradedSpace([("a", 0)])
        assert check_a_infinity(U, [], 4).passed

    def test_upper_triangular(self):
        tf = parse_tables((FIXTURES / "upper.tbl").read_text())
        U = tf.space("basis")
        ops = brackets_from(tf, "a", lambda k: [U] * k, U, False)
        assert check_a_infinity(U, ops, 5).passed

    def test_non_associative_fails_at_three(self):
        tf = parse_tables((FIXTURES / "nonassoc.tbl").read_text())
        U = tf.space("basis")
        ops = brackets_from(tf, "a", lambda k: [U] * k, U, False)
        report = check_a_infinity(U, ops, 4)
        assert not report.passed
        assert report.first_failure.k == 3
        assert report.first_failure.inputs == ("e", "e", "e")


def witt(corrupt=False):
    text = (FIXTURES / ("witt_bad_action.tbl" if corrupt else "witt.tbl")).read_text()
    return lr_data_from(parse_tables(text))


class TestLrInfinity:
    def test_ground_field_and_lie_algebra(self):
        A = GradedSpace([("one", 0)])
        V, l2 = sl2()
        data = LrData(A, V, {("one", "one"): A.vec("one")}, {("one", n): V.vec(n) for n in "hef"}, [l2], [])
        assert check_lr_infinity(data, 4).passed

    def test_polynomial_vector_fields(self):
        assert check_lr_infinity(witt(), 4).passed

    def test_corrupted_action(self):
        report = check_lr_infinity(witt(corrupt=True), 4)
        assert not report.passed
        assert {"multilinear", "leibniz"} <= set(report.failed_identities())
        assert all(f.inputs for f in report.failures)


class TestChevalleyEilenberg:
    @pytest.fixture
    def algebra(self):
        S = GradedSpace([("one", 0), ("a", -1), ("xi", 1), ("axi", 0)])
        pr = {("one", n): S.vec(n) for n in S.names} | {(n, "one"): S.vec(n) for n in S.names}
        pr[("a", "xi")] = S.vec("axi")
        pr[("xi", "a")] = S.vec("axi", -1)
        return S, GradedAlgebra(S, pr)

    def test_single_differential(self, algebra):
        S, alg = algebra
        d1 = alg.linear_map({"a": S.vec("one"), "axi": S.vec("xi")})
        assert check_ce_relations(alg, [d1]).passed

    def test_anticommutator_failure(self, algebra):
        S, alg = algebra
        d1 = alg.linear_map({"a": S.vec("one"), "axi": S.vec("xi")})
        d2 = alg.linear_map({"a": S.vec("axi")})
        report = check_ce_relations(alg, [d1, d2])
        assert not report.passed
        assert report.first_failure.k == 3

    def test_non_derivation(self, algebra):
        S, alg = algebra
        bad = alg.linear_map({"a": S.vec("one")})
        assert "not-derivation" in check_ce_relations(alg, [bad]).failed_identities()


class TestTableFormat:
    def test_sl2_fixture_matches_hand_table(self):
        tf = parse_tables((FIXTURES / "sl2.tbl").read_text())
        V = tf.space("basis")
        (l2,) = brackets_from(tf, "l", lambda k: [V] * k, V, True)
        _, hand = sl2()
        assert {k: str(v) for k, v in l2.table.items()} == {k: str(v) for k, v in hand.table.items()}

    @pytest.mark.parametrize("text", ["basis e:0", "basis: e:0\nl2: e,e -> e", "basis: e:0\nbasis: f:1"])
    def test_malformed(self, text):
        with pytest.raises(TableError):
            parse_tables(text)

    def test_unknown_name(self):
        tf = parse_tables("basis: e:-1\nl2: (e,e) -> q")
        V = tf.space("basis")
        with pytest.raises(TableError):
            brackets_from(tf, "l", lambda k: [V] * k, V, True)
