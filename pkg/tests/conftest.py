from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings, strategies as st

from jetlab.diffpoly import Derivative, DiffPoly, Independent, JetSpace, MultiIndex

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def jet_variables(n: int, m: int, max_order: int, with_coordinates: bool = True):
    words = st.lists(st.integers(0, n - 1), max_size=max_order).map(lambda ls: MultiIndex(tuple(ls)))
    dep = st.builds(Derivative, st.integers(0, m - 1), words)
    if with_coordinates:
        return st.one_of(dep, st.integers(0, n - 1).map(Independent))
    return dep


coefficients = st.one_of(
    st.integers(-5, 5),
    st.fractions(min_value=-3, max_value=3, max_denominator=4),
).filter(bool)


@st.composite
def diffpolys(draw, n=2, m=2, max_order=3, max_degree=3, max_terms=4, with_coordinates=True):
    variables = jet_variables(n, m, max_order, with_coordinates)
    p = DiffPoly()
    for _ in range(draw(st.integers(0, max_terms))):
        term = DiffPoly.const(draw(coefficients))
        for v in draw(st.lists(variables, max_size=max_degree)):
            term = term * DiffPoly.var(v)
        p = p + term
    return p


def frac(s: str) -> Fraction:
    return Fraction(s)


KDV_SPACE = JetSpace(["x", "t"], ["u"])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
