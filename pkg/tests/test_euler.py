import numpy as np
import pytest

from eulerlike.chart import OneForm, Bivector, Section, Transversal, VectorField, sharp
from eulerlike.errors import NotEulerLikeError, PreconditionError
from eulerlike.euler import (T_MIN, evaluate_Zt, is_euler_like, linearize, normal_derivative,
                             psi_direct, psi_inverse_flow, tangent_lift)


def test_normal_derivative_linear_section():
    N = Transversal(3, 1)
    sigma = Section(["x2*cos(x1) + x3*x1", "x3*exp(x1)"], 3)
    y = np.array([[0.4, 0, 0], [-0.3, 0, 0]])
    D = normal_derivative(sigma, N, y)
    for k, yy in enumerate(y[:, 0]):
        np.testing.assert_allclose(D[k], [[np.cos(yy), yy], [0, np.exp(yy)]])


def test_normal_derivative_examples():
    N1 = Transversal(1, 0)
    assert normal_derivative(VectorField(["x1^2"], 1), N1, [[0.0]])[0, 0, 0] == 0.0
    E = VectorField(["x1", "x2"], 2)
    np.testing.assert_array_equal(normal_derivative(E, Transversal(2, 0), [[0.0, 0.0]])[0], np.eye(2))


def test_normal_derivative_requires_vanishing():
    with pytest.raises(PreconditionError):
        normal_derivative(VectorField(["1 + x1"], 1), Transversal(1, 0), [[0.0]])


def test_is_euler_like_examples():
    E3 = VectorField(["x1", "x2", "x3"], 3)
    assert is_euler_like(E3, Transversal(3, 0))
    axis = Transversal(3, 1)
    assert not is_euler_like(E3, axis)
    assert is_euler_like(VectorField(["0", "x2", "x3"], 3), axis)


def test_liouville_field_is_euler_like():
    pi0 = Bivector({(0, 2): "-1", (1, 3): "-1"}, 4)
    alpha = OneForm(["-x3", "-x4", "x1", "x2"], 4)
    assert is_euler_like(sharp(pi0, alpha), Transversal(4, 0))


def test_evaluate_Zt_examples():
    N = Transversal(1, 0)
    pts = np.array([[0.3], [-0.7]])
    sq, cube = VectorField(["x1^2"], 1), VectorField(["x1^3"], 1)
    for t in (0.0, 1e-5, 0.1, 0.5, 1.0):
        np.testing.assert_allclose(evaluate_Zt(sq, N, t, pts), pts ** 2, rtol=1e-12)
        # below T_MIN the t -> 0 limit is returned, which differs by O(t)
        exact = t * pts ** 3 if t >= T_MIN else 0 * pts
        np.testing.assert_allclose(evaluate_Zt(cube, N, t, pts), exact, atol=1e-15)
    assert not np.any(evaluate_Zt(VectorField(["0"], 1), N, 0.3, pts))
    assert T_MIN == 1e-4


def test_evaluate_Zt_precondition():
    with pytest.raises(PreconditionError):
        evaluate_Zt(VectorField(["x1"], 1), Transversal(1, 0), 0.5, [[0.1]])


@pytest.fixture(scope="module")
def emb1d():
    return linearize(VectorField(["x1 + x1^2"], 1), Transversal(1, 0))


def test_identity_embedding():
    emb = linearize(VectorField(["x1", "x2"], 2), Transversal(2, 0))
    w = np.array([[0.1, 0.2], [-0.2, 0.05]])
    np.testing.assert_allclose(emb(w), w, atol=1e-14)
    np.testing.assert_allclose(emb.inverse(w), w, atol=1e-14)


def test_quadratic_embedding_closed_form(emb1d):
    v = np.linspace(-0.3, 0.3, 7)[:, None]
    np.testing.assert_allclose(emb1d(v)[:, 0], v[:, 0] / (1 - v[:, 0]), atol=1e-9)
    m = np.array([[0.2], [-0.25]])
    np.testing.assert_allclose(emb1d.inverse(m)[:, 0], m[:, 0] / (1 + m[:, 0]), atol=1e-10)
    np.testing.assert_allclose(psi_inverse_flow(emb1d, m)[:, 0], m[:, 0] / (1 + m[:, 0]), atol=1e-4)


def test_embedding_invariants(emb1d):
    v = np.array([[0.2], [-0.1]])
    assert emb1d.pushforward_residual(v).max() < 1e-6
    for t in (0.25, 0.5, 0.75):
        assert emb1d.commutation_residual(v, t).max() < 1e-6
    r0, r1 = emb1d.zero_section_residual(np.zeros((1, 1)))
    assert r0.max() == 0 and r1.max() < 1e-8


def test_pushforward_residual_two_dimensional():
    X = VectorField(["x1 + x1^2 - x1*x2", "x2"], 2)
    N = Transversal(2, 0)
    emb = linearize(X, N)
    w = N.sample_ball(100, np.random.default_rng(0), 0.3)
    assert emb.pushforward_residual(w).max() < 1e-6


def test_linearize_rejects_non_euler_like():
    with pytest.raises(NotEulerLikeError):
        linearize(VectorField(["2*x1"], 1), Transversal(1, 0))


def test_uniqueness_two_constructions():
    X = VectorField(["0.3*x2^2 + x1*x2", "x2 + x1*x2^2 + x2^2"], 2)
    N = Transversal(2, 1)
    emb = linearize(X, N)
    w = np.array([[0.1, 0.2], [-0.2, -0.15], [0.05, 0.1]])
    assert np.abs(emb(w) - psi_direct(X, N, w)).max() < 1e-5


def test_functoriality_under_projection():
    Xp = VectorField(["x1 + x1^2", "x2", "x3 + x3^2"], 3)
    X = VectorField(["x1 + x1^2", "x2"], 2)
    emb_p = linearize(Xp, Transversal(3, 0))
    emb = linearize(X, Transversal(2, 0))
    w = np.array([[0.1, -0.2, 0.15], [-0.2, 0.1, 0.05]])
    assert np.abs(emb(w[:, :2]) - emb_p(w)[:, :2]).max() < 1e-5


def test_tangent_lift_coherence():
    X = VectorField(["x1 + x1^2 + x1*x2", "x2 - x1^2"], 2)
    emb = linearize(X, Transversal(2, 0))
    XT = tangent_lift(X)
    embT = linearize(XT, Transversal(4, 0), validate=False)
    rng = np.random.default_rng(3)
    w = rng.uniform(-0.15, 0.15, (4, 2))
    u = rng.uniform(-0.2, 0.2, (4, 2))
    out = embT(np.hstack([w, u]))
    np.testing.assert_allclose(out[:, :2], emb(w), atol=1e-8)
    assert np.abs(out[:, 2:] - np.einsum("zij,zj->zi", emb.jacobian(w), u)).max() < 1e-5
