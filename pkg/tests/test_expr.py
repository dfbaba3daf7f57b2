import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from eulerlike.errors import DomainGuardError, ParseError
from eulerlike.expr import derivative, eval_jet, evaluate, parse, to_source, variables
from eulerlike.jet import Jet

from conftest import polynomials


def test_parse_and_evaluate_simple():
    e = parse("x1*x1 + sin(x2)", 2)
    assert e([0.0, 0.0])[0] == 0.0
    assert e([2.0, 0.5])[0] == pytest.approx(4 + np.sin(0.5))


def test_variable_out_of_range():
    with pytest.raises(ParseError, match="out of range"):
        parse("x3", 2)


def test_commutator_identity_is_zero():
    e = parse("x1*x2 - x2*x1", 2)
    pts = np.random.default_rng(0).normal(size=(20, 2))
    assert np.all(e(pts) == 0.0)


@pytest.mark.parametrize("src, msg", [
    ("x1 +", "syntax error"),
    ("foo(x1)", "unknown identifier"),
    ("(x1", "syntax error"),
    ("x1 ^ 2 ^ 2", "syntax error"),
    ("x1 ^ 0.5", "syntax error"),
    ("I*x1", "unknown identifier"),
])
def test_parse_errors(src, msg):
    with pytest.raises(ParseError, match=msg):
        parse(src, 2)


def test_parse_error_reports_line_and_column():
    with pytest.raises(ParseError) as info:
        parse("x1 +\n  * x2", 2)
    assert info.value.line == 2
    assert info.value.column == 3


def test_jet_of_square():
    jv = eval_jet(parse("x1*x1", 1), [3.0], [[1.0]])
    assert jv.value == 9 and jv.grad[0] == 6 and jv.hess[0, 0] == 2


def test_jet_of_exp():
    jv = eval_jet(parse("exp(x1)", 1), [0.0], [[1.0]])
    assert (jv.value, jv.grad[0], jv.hess[0, 0]) == (1.0, 1.0, 1.0)


def test_jet_of_bilinear():
    jv = eval_jet(parse("x1*x2", 2), [1.0, 2.0], [[1, 0], [0, 1]])
    np.testing.assert_array_equal(jv.grad, [2.0, 1.0])
    assert jv.hess[0, 1] == 1.0 and jv.hess[1, 0] == 1.0


def test_hessian_is_exactly_symmetric():
    jv = eval_jet(parse("sin(x1*x2) * exp(x3) / (2 + x1^2)", 3), [0.3, -0.7, 0.2])
    assert np.array_equal(jv.hess, jv.hess.T)


def test_more_than_three_directions():
    e = parse("x1*x2*x3*x4", 4)
    jv = eval_jet(e, [1.0, 2.0, 3.0, 4.0], np.eye(4))
    np.testing.assert_allclose(jv.grad, [24, 12, 8, 6])


@pytest.mark.parametrize("src, point", [
    ("1/x1", [0.0]),
    ("log(x1)", [-1.0]),
    ("log(x1)", [0.0]),
    ("sqrt(x1)", [-0.5]),
    ("x1^-2", [0.0]),
])
def test_domain_guards(src, point):
    with pytest.raises(DomainGuardError):
        eval_jet(parse(src, 1), point)


def test_sqrt_derivative_at_zero_is_guarded():
    e = parse("sqrt(x1)", 1)
    assert e([0.0])[0] == 0.0
    with pytest.raises(DomainGuardError):
        eval_jet(e, [0.0])


def test_complex_mode():
    e = parse("exp(I*x1)", 1, complex_mode=True)
    jv = eval_jet(e, [np.pi / 3])
    assert jv.value == pytest.approx(np.exp(1j * np.pi / 3))
    assert jv.grad[0] == pytest.approx(1j * np.exp(1j * np.pi / 3))
    assert jv.hess[0, 0] == pytest.approx(-np.exp(1j * np.pi / 3))


def test_complex_log_allows_negative_arguments():
    e = parse("log(x1)", 1, complex_mode=True)
    assert e([-1.0])[0] == pytest.approx(1j * np.pi)


def test_round_trip_through_source():
    e = parse("-(x1 + 2)*x2^3 / cos(x1)", 2)
    e2 = parse(to_source(e.root), 2)
    pts = np.random.default_rng(1).uniform(-1, 1, (10, 2))
    np.testing.assert_allclose(e(pts), e2(pts), rtol=1e-15)
    assert variables(e.root) == (0, 1)


def _sympy_grad(src, dim, point):
    xs = sympy.symbols(f"x1:{dim + 1}")
    f = sympy.sympify(src.replace("^", "**"), locals={f"x{i + 1}": x for i, x in enumerate(xs)})
    sub = dict(zip(xs, point))
    return np.array([float(sympy.diff(f, x).evalf(subs=sub)) for x in xs]), \
        np.array([[float(sympy.diff(f, a, b).evalf(subs=sub)) for b in xs] for a in xs])


@given(polynomials(3), st.lists(st.floats(-1.5, 1.5), min_size=3, max_size=3))
def test_polynomial_gradient_matches_structural_oracle(src, point):
    e = parse(src, 3)
    jv = eval_jet(e, point)
    oracle = np.array([derivative(e, i)(point)[0] for i in range(3)])
    scale = max(1.0, np.abs(oracle).max())
    assert np.abs(jv.grad - oracle).max() <= 1e-12 * scale


@pytest.mark.parametrize("src", [
    "x1^4 - 3*x1^2*x2 + x2*x3^3",
    "exp(x1*x2) * sin(x3) + log(2 + x1^2)",
    "sqrt(1 + x1^2 + x2^2) / (3 + cos(x3))",
])
def test_jets_match_sympy(src):
    point = [0.4, -0.3, 0.8]
    grad, hess = _sympy_grad(src, 3, point)
    jv = eval_jet(parse(src, 3), point)
    np.testing.assert_allclose(jv.grad, grad, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(jv.hess, hess, rtol=1e-12, atol=1e-14)


@given(polynomials(2, 3, 2), polynomials(2, 3, 2), polynomials(2, 3, 2),
       st.lists(st.floats(-1, 1), min_size=2, max_size=2))
def test_addition_associativity(a, b, c, point):
    j1 = eval_jet(parse(f"({a}) + (({b}) + ({c}))", 2), point)
    j2 = eval_jet(parse(f"(({a}) + ({b})) + ({c})", 2), point)
    for u, v in ((j1.value, j2.value), (j1.grad, j2.grad), (j1.hess, j2.hess)):
        scale = max(1.0, float(np.max(np.abs(u))))
        assert np.max(np.abs(np.asarray(u) - np.asarray(v))) <= 1e-14 * scale


def test_batched_evaluation_matches_pointwise():
    e = parse("x1*exp(x2) - x2^3", 2)
    pts = np.random.default_rng(2).uniform(-1, 1, (7, 2))
    j = evaluate(e, Jet.coordinates(pts, 2))
    for k, p in enumerate(pts):
        jv = eval_jet(e, p)
        assert j.val[k] == pytest.approx(jv.value)
        np.testing.assert_allclose(j.d1[k], jv.grad)
