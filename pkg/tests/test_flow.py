import numpy as np
import pytest
from hypothesis import given, strategies as st

from eulerlike.chart import Chart, Transversal, VectorField
from eulerlike.errors import FlowError
from eulerlike.euler import ZtFamily
from eulerlike.flow import FieldFamily, FlowConfig, flow, lambda_t, timedep_flow
from eulerlike.jet import Jet


def test_euler_field_flow_is_scaling():
    E = VectorField(["x1", "x2", "x3"], 3)
    m = np.array([0.3, -0.2, 1.0])
    np.testing.assert_allclose(flow(E, m, 0.7).endpoint, np.exp(0.7) * m, rtol=1e-9)


def test_rotation_and_its_jacobian():
    R = VectorField(["-x2", "x1"], 2)
    res = flow(R, [1.0, 0.0], np.pi / 2, jacobian=True)
    np.testing.assert_allclose(res.endpoint, [0, 1], atol=1e-9)
    np.testing.assert_allclose(res.jacobian, [[0, -1], [1, 0]], atol=1e-9)


@pytest.mark.parametrize("x0, s", [(0.5, 1.0), (-1.0, 2.0), (0.9, 1.0)])
def test_quadratic_blowup_closed_form(x0, s):
    X = VectorField(["x1^2"], 1)
    assert flow(X, [x0], s).endpoint[0] == pytest.approx(x0 / (1 - s * x0), rel=1e-8)


def test_escape_raises():
    X = VectorField(["x1^2"], 1)
    with pytest.raises(FlowError):
        flow(X, [1.0], 0.9, chart=Chart(1, box=[[-5, 5]]))


def test_lambda_t():
    E = VectorField(["x1", "x2"], 2)
    m = np.array([0.4, -0.8])
    np.testing.assert_allclose(lambda_t(E, m, 0.3), 0.3 * m, rtol=1e-9)
    assert np.array_equal(lambda_t(E, m, 1.0), m)
    with pytest.raises(ValueError):
        lambda_t(E, m, 0.0)


def _cubic_euler_like(coeffs):
    a, b, c, d = coeffs
    return VectorField([f"x1 + ({a})*x1^3 + ({b})*x1*x2^2", f"x2 + ({c})*x2^3 + ({d})*x1^2*x2"], 2)


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_lambda_semigroup(coeffs):
    X = _cubic_euler_like(coeffs)
    m = np.array([0.2, -0.15])
    a = lambda_t(X, lambda_t(X, m, 0.5), 0.5)
    b = lambda_t(X, m, 0.25)
    assert np.linalg.norm(a - b) < 1e-8


@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_flow_group_property(s1, s2):
    X = VectorField(["x2 + 0.3*x1^2", "-x1 + 0.2*x1*x2"], 2)
    m = np.array([0.3, 0.1])
    cfg = FlowConfig()
    a = flow(X, flow(X, m, s1).endpoint, s2).endpoint
    b = flow(X, m, s1 + s2).endpoint
    assert np.linalg.norm(a - b) < 10 * cfg.rel_tol


def test_variational_jacobian_against_finite_differences():
    X = VectorField(["x2 + x1*x3", "-x1 + x3^2", "sin(x1)"], 3)
    m = np.array([0.2, 0.1, -0.3])
    res = flow(X, m, 0.8, jacobian=True)
    h = 1e-5
    fd = np.empty((3, 3))
    for a in range(3):
        e = np.zeros(3); e[a] = h
        fd[:, a] = (flow(X, m + e, 0.8).endpoint - flow(X, m - e, 0.8).endpoint) / (2 * h)
    assert np.abs(res.jacobian - fd).max() < 1e-5
    assert np.linalg.det(res.jacobian) > 0


def test_jacobian_determinant_positive_along_trajectory():
    X = VectorField(["x2", "-x1 - 0.5*x2 + x1^3"], 2)
    for s in (0.5, 1.0, 2.0, 4.0):
        assert np.linalg.det(flow(X, [0.3, 0.2], s, jacobian=True).jacobian) > 0


def test_timedep_flow_examples():
    zero = FieldFamily(1, lambda t, x: x * 0.0)
    assert timedep_flow(zero, [0.3]) == pytest.approx([0.3])
    lin = FieldFamily(1, lambda t, x: Jet.constant(np.full((x.batch, 1), t), x.ndir, x.order))
    assert timedep_flow(lin, [0.0])[0] == pytest.approx(0.5, abs=1e-12)


def test_timedep_flow_of_rescaled_family():
    # X = E + x^2 d/dx, Z = E - X = -x^2 d/dx; flowing +Z_t gives v/(1+v)
    Z = VectorField(["-x1^2"], 1)
    fam = ZtFamily(Z, Transversal(1, 0), sign=1.0)
    v = np.array([[0.3], [-0.2], [0.5]])
    np.testing.assert_allclose(timedep_flow(fam, v)[:, 0], v[:, 0] / (1 + v[:, 0]), rtol=1e-9)
