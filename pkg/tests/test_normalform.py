import numpy as np
import pytest

from eulerlike.chart import (Bivector, MatrixField, OneForm, ThreeForm, Transversal,
                             TwoForm, VectorField, sharp)
from eulerlike.dirac import CourantSection, GCSData, graph_of_bivector
from eulerlike.errors import PreconditionError
from eulerlike.euler import linearize
from eulerlike.normalform import (QuadratureConfig, alpha_for_cosymplectic, closedness_residual,
                                  cosymplectic_check, dirac_normal_form, gcs_normal_form, gcs_section,
                                  omega_quadrature, symplectic_gram_schmidt, transverse_poisson,
                                  weinstein_split)

PI0 = Bivector({(0, 2): "-1", (1, 3): "-1"}, 4)
PI0_PLANE = Bivector({(0, 1): "-1"}, 2)
SO3 = Bivector({(0, 2): "-x2", (0, 1): "x3", (1, 2): "x1"}, 3)   # w = (z, x, y)
AXIS = Transversal(3, 1, center=[1.0, 0.0, 0.0])


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(nodes=0)


def test_cosymplectic_examples():
    assert cosymplectic_check(PI0, Transversal(4, 0))
    assert not cosymplectic_check(SO3, Transversal(3, 2))
    assert cosymplectic_check(SO3, AXIS, points=[[0.1, 0, 0], [-0.5, 0, 0], [2.0, 0, 0]])
    at_zero = cosymplectic_check(SO3, AXIS, points=[[0.0, 0, 0]])
    assert not at_zero and at_zero.max_condition == np.inf


def test_alpha_canonical():
    alpha = alpha_for_cosymplectic(PI0, Transversal(4, 0))
    w = np.array([[0.3, -0.2, 0.5, 0.7]])
    q, p = w[0, :2], w[0, 2:]
    np.testing.assert_allclose(alpha(w)[0], np.concatenate([-p, q]), atol=1e-15)
    X = sharp(PI0, alpha)
    np.testing.assert_allclose(X(w), w, atol=1e-15)


def test_alpha_product_supported_on_normal_factor():
    # pi_N = y2 d/dy1^d/dy2 on the leaf factor, pi0 on (x1, x2)
    pi = Bivector({(0, 1): "x2", (2, 3): "-1"}, 4)
    N = Transversal(4, 2)
    alpha = alpha_for_cosymplectic(pi, N)
    w = np.random.default_rng(0).normal(size=(5, 4))
    a = alpha(w)
    assert not np.any(a[:, :2])
    np.testing.assert_allclose(a[:, 2:], np.column_stack([-w[:, 3], w[:, 2]]), atol=1e-15)


def test_alpha_so3():
    alpha = alpha_for_cosymplectic(SO3, AXIS)
    w = np.array([[1.3, 0.1, -0.2]])
    z, x, y = w[0]
    np.testing.assert_allclose(alpha(w)[0], [0, y / z, -x / z], atol=1e-15)


def test_alpha_requires_cosymplectic():
    with pytest.raises(PreconditionError):
        alpha_for_cosymplectic(SO3, Transversal(3, 2))


def test_omega_half_area_form():
    N = Transversal(2, 0)
    E = VectorField(["x1", "x2"], 2)
    emb = linearize(E, N)
    alpha = OneForm(["-0.5*x2", "0.5*x1"], 2)       # d alpha = dx^dy
    om = omega_quadrature(alpha, E, None, emb)
    pts = np.random.default_rng(1).uniform(-0.2, 0.2, (5, 2))
    np.testing.assert_allclose(om(pts)[:, 0, 1], 0.5, atol=1e-12)


def test_eta_with_zero_coefficients_contributes_nothing():
    N = Transversal(3, 0)
    E = VectorField(["x1", "x2", "x3"], 3)
    emb = linearize(E, N)
    alpha = OneForm(["-x2", "x1", "0"], 3)
    pts = np.random.default_rng(2).uniform(-0.2, 0.2, (4, 3))
    a = omega_quadrature(alpha, E, None, emb)(pts)
    b = omega_quadrature(alpha, E, ThreeForm({(0, 1, 2): "0"}, 3), emb)(pts)
    np.testing.assert_allclose(a, b, atol=1e-15)


def test_omega_canonical_is_omega0():
    N = Transversal(4, 0)
    alpha = OneForm(["-x3", "-x4", "x1", "x2"], 4)
    X = sharp(PI0, alpha)
    emb = linearize(X, N)
    om = omega_quadrature(alpha, X, None, emb)
    pts = N.sample_ball(5, np.random.default_rng(3), 0.3)
    W0 = np.zeros((4, 4))
    W0[0, 2] = W0[1, 3] = 1
    W0 -= W0.T
    assert np.abs(om(pts) - W0).max() < 1e-8
    assert closedness_residual(om, emb, None, pts).max() < 1e-7


def test_dirac_normal_form_already_split():
    N = Transversal(2, 0)
    alpha = OneForm(["-x2", "x1"], 2)
    eps = CourantSection(sharp(PI0_PLANE, alpha), alpha)
    rep = dirac_normal_form(graph_of_bivector(PI0_PLANE), N, eps, samples=10)
    assert rep.passed, rep.summary()
    assert rep["dirac_normal_form_angle"].max_residual < 1e-10


def test_dirac_normal_form_rejects_bad_section():
    N = Transversal(2, 0)
    alpha = OneForm(["-x2", "x1"], 2)
    not_in_E = CourantSection(VectorField(["x1", "x2"], 2), OneForm(["x2", "-x1"], 2))
    with pytest.raises(PreconditionError):
        dirac_normal_form(graph_of_bivector(PI0_PLANE), N, not_in_E, samples=5)
    shifted = CourantSection(VectorField(["x1 + 1", "x2"], 2), alpha)
    with pytest.raises(PreconditionError):
        dirac_normal_form(graph_of_bivector(PI0_PLANE), N, shifted, samples=5)


def test_symplectic_gram_schmidt(rng):
    A = rng.normal(size=(4, 4))
    W = A - A.T
    T = symplectic_gram_schmidt(W)
    J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    np.testing.assert_allclose(T.T @ W @ T, J, atol=1e-10)
    with pytest.raises(PreconditionError):
        symplectic_gram_schmidt(np.zeros((2, 2)))


def test_transverse_poisson_of_product():
    pi = Bivector({(0, 1): "x2 + 1", (2, 3): "-1"}, 4)
    y = np.array([[0.3, 0.4, 0, 0]])
    P = transverse_poisson(pi, Transversal(4, 2), y)
    np.testing.assert_allclose(P[0], [[0, 1.4], [-1.4, 0]], atol=1e-14)


def test_weinstein_heisenberg():
    # pi = x d/dy ^ d/dz, N = x-axis near (1, 0, 0)
    pi = Bivector({(1, 2): "x1"}, 3)
    N = Transversal(3, 1, center=[1.0, 0, 0])
    rep = weinstein_split(pi, N, samples=10)
    assert rep.passed, rep.summary()
    np.testing.assert_allclose(rep.extras["model_bivector"][:, 0, :], 0, atol=1e-12)


def test_weinstein_rejects_odd_codimension():
    with pytest.raises(PreconditionError):
        weinstein_split(SO3, Transversal(3, 2), samples=5)


def test_gcs_symplectic_type_has_no_gauge():
    J = GCSData.symplectic(TwoForm({(0, 1): "1"}, 2))
    N = Transversal(2, 0)
    rep = gcs_normal_form(J, N, samples=8)
    assert rep.passed, rep.summary()
    assert rep.extras["gamma_norm"] < 1e-12
    X, beta = gcs_section(J, rep.extras["alpha"])
    assert not np.any(beta([[0.1, 0.2]]))


def test_gcs_requires_cosymplectic():
    Jc = GCSData.complex(MatrixField([["0", "-1"], ["1", "0"]], 2))
    with pytest.raises(PreconditionError):
        gcs_normal_form(Jc, Transversal(2, 0), samples=4)
