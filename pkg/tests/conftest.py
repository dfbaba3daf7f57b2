import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


def monomials(dim, max_degree):
    """Strategy for a monomial string such as ``2.5*x1^2*x3``."""
    # a monomial is a multiset of variable indices; its size is the degree
    powers = st.lists(st.integers(0, dim - 1), max_size=max_degree).map(
        lambda idx: [idx.count(i) for i in range(dim)])
    coef = st.floats(-3, 3, allow_nan=False).map(lambda c: round(c, 3))

    def build(args):
        c, ps = args
        factors = [f"x{i + 1}^{p}" if p > 1 else f"x{i + 1}" for i, p in enumerate(ps) if p]
        return "*".join([f"({c})"] + factors)
    return st.tuples(coef, powers).map(build)


def polynomials(dim, max_degree=4, max_terms=5):
    return st.lists(monomials(dim, max_degree), min_size=1, max_size=max_terms).map(" + ".join)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
