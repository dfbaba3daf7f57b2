import numpy as np
import pytest
import sympy

from eulerlike.algebroid import (AnchoredBundle, BracketLift, LieAlgebroid, PullbackBundle,
                                 algebroid_normal_form, anchor_lift_connection, bracket_lift,
                                 check_transversal, euler_section, lift_contracts)
from eulerlike.chart import Bivector, ScalarField, Section, Transversal, VectorField, lie_bracket
from eulerlike.errors import PreconditionError, TransversalityError

# so(3)* in adapted coordinates w = (z, x, y), N = z-axis
SO3 = Bivector({(0, 2): "-x2", (0, 1): "x3", (1, 2): "x1"}, 3)
AXIS = Transversal(3, 1, center=[1.0, 0.0, 0.0])


@pytest.fixture(scope="module")
def so3():
    return LieAlgebroid.cotangent(SO3)


def test_lie_algebroid_validation(so3, rng):
    pts = AXIS.sample_ball(10, rng, 0.3)
    res = so3.validate(pts)
    assert max(np.max(v) for v in res.values()) < 1e-12
    bad = LieAlgebroid.cotangent(Bivector({(0, 1): "1", (1, 2): "x2"}, 3))
    with pytest.raises(PreconditionError):
        bad.validate(pts)


def test_check_transversal_examples(so3):
    N = Transversal(2, 1)
    assert check_transversal(LieAlgebroid.tangent(2), N)
    assert not check_transversal(AnchoredBundle([["0"], ["0"]], 2), N)
    assert check_transversal(so3, AXIS)
    with pytest.raises(TransversalityError):
        euler_section(AnchoredBundle([["0"], ["0"]], 2), N)


def test_euler_section_tangent():
    N = Transversal(3, 1)
    eps = euler_section(LieAlgebroid.tangent(3), N)
    w = np.array([[0.4, 0.2, -0.3]])
    np.testing.assert_allclose(eps(w), [[0, 0.2, -0.3]], atol=1e-15)


def test_euler_section_so3(so3):
    eps = euler_section(so3, AXIS)
    w = np.array([[1.2, 0.1, -0.2], [0.8, -0.05, 0.1]])
    z, x, y = w.T
    # alpha = (y dx - x dy)/z in the frame (dz, dx, dy), extended linearly in (x, y)
    np.testing.assert_allclose(eps(w), np.column_stack([0 * z, y / z, -x / z]), atol=1e-14)


def test_euler_section_canonical_plane():
    pi0 = Bivector({(0, 1): "-1"}, 2)
    E = LieAlgebroid.cotangent(pi0)
    eps = euler_section(E, Transversal(2, 0))
    w = np.array([[0.3, -0.7]])
    # dual of q dp - p dq
    np.testing.assert_allclose(eps(w), [[0.7, 0.3]], atol=1e-15)


def test_bracket_lift_examples(so3):
    T = LieAlgebroid.tangent(2)
    zero = Section(["0", "0"], 2)
    assert not np.any(bracket_lift(T, zero)([[0.1, 0.2]]))
    E = Section(["x1", "x2"], 2)
    np.testing.assert_allclose(bracket_lift(T, E)([[0.1, 0.2]])[0], -np.eye(2))


def test_bracket_lift_so3_against_sympy(so3):
    eps = euler_section(so3, AXIS)
    # symbolic oracle in the original coordinates (x, y, z)
    x, y, z = sympy.symbols("x y z")
    coords = (z, x, y)
    pi = sympy.zeros(3, 3)
    pi[0, 2], pi[0, 1], pi[1, 2] = -x, y, z
    pi = pi - pi.T
    f = [sympy.Integer(0), y / z, -x / z]
    C = sympy.zeros(3, 3)
    for k in range(3):
        for i in range(3):
            c_term = sum(f[j] * sympy.diff(pi[j, i], coords[k]) for j in range(3))
            a_term = sum(pi[i, l] * sympy.diff(f[k], coords[l]) for l in range(3))
            C[k, i] = c_term - a_term
    for w in ([1.0, 0.0, 0.0], [1.2, 0.1, -0.2]):
        ref = np.array(C.subs({z: w[0], x: w[1], y: w[2]}), dtype=float)
        np.testing.assert_allclose(bracket_lift(so3, eps)([w])[0], ref, atol=1e-14)


def _contracts(E, D, rng, n):
    pts = rng.uniform(-0.3, 0.3, (100, n))
    if n == 3:
        pts[:, 0] += 1.0
    sig = Section([f"x{(i % n) + 1}^2 + 0.5" for i in range(E.rank)], n)
    tau = Section([f"sin(x{((i + 1) % n) + 1})" for i in range(E.rank)], n)
    f = ScalarField(" + ".join(f"x{i + 1}*x{(i + 1) % n + 1}" for i in range(n)) + " + 1", n)
    return lift_contracts(E, D, sig, tau, f, pts)


def test_tangent_anchor_lift_is_lie_bracket(rng):
    T = AnchoredBundle([["1", "0"], ["0", "1"]], 2)
    lift = anchor_lift_connection(T)
    s = Section(["x1*x2", "x2^2"], 2)
    t = Section(["sin(x1)", "1"], 2)
    pts = rng.normal(size=(10, 2))
    X = VectorField(["x1*x2", "x2^2"], 2)
    Y = VectorField(["sin(x1)", "1"], 2)
    np.testing.assert_allclose(lift.D(s, t)(pts), lie_bracket(X, Y)(pts), atol=1e-13)


@pytest.mark.parametrize("which", ["rank1", "tangent", "so3_anchor", "so3_bracket"])
def test_lift_contracts(which, so3, rng):
    if which == "rank1":
        E = AnchoredBundle([["0"], ["x1"]], 2)
        D = anchor_lift_connection(E).D
    elif which == "tangent":
        E = AnchoredBundle([["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]], 3)
        D = anchor_lift_connection(E).D
    elif which == "so3_anchor":
        E = so3
        D = anchor_lift_connection(so3, center=[1.0, 0, 0]).D
    else:
        E, D = so3, BracketLift(so3).D
    res = _contracts(E, D, rng, E.dim)
    for name, r in res.items():
        assert np.max(r) < 1e-8, name


def test_anchor_lift_rejects_non_involutive():
    # the contact distribution spanned by d/dx and d/dy + x d/dz
    E = AnchoredBundle([["1", "0"], ["0", "1"], ["0", "x1"]], 3)
    with pytest.raises(PreconditionError):
        anchor_lift_connection(E)


def test_pullback_bundle_dimensions(so3):
    pb = PullbackBundle(so3, AXIS)
    w = np.array([[1.1, 0.1, 0.2]])
    F = pb.frame(w)
    assert F.shape == (1, 6, 3)
    assert np.linalg.matrix_rank(F[0]) == pb.fiber_dim + AXIS.k


def test_tangent_normal_form_is_differential():
    T = LieAlgebroid.tangent(2)
    N = Transversal(2, 1)
    eps = Section(["x2^2", "x2 + x1*x2^2"], 2)
    nf = algebroid_normal_form(T, N, eps=eps)
    w = N.sample_ball(5, np.random.default_rng(0), 0.2)
    assert nf.tangent_residual(w).max() < 1e-6
    assert nf.image_residual(w).max() < 1e-6


def test_product_normal_form_is_identity():
    # zero-anchor line bundle over the y-line times the tangent bundle of the x-line
    E = LieAlgebroid([["0", "0"], ["0", "1"]], np.zeros((2, 2, 2), dtype=object).tolist(), 2)
    N = Transversal(2, 1)
    nf = algebroid_normal_form(E, N)
    w = np.array([[0.1, 0.2], [-0.2, 0.1]])
    np.testing.assert_allclose(nf.emb(w), w, atol=1e-12)
    F = nf.pull.frame(w)
    image = np.einsum("zia,zab->zib", nf.psi_tilde(w), F)
    np.testing.assert_allclose(np.abs(image), np.broadcast_to(np.eye(2), (2, 2, 2)), atol=1e-9)


@pytest.fixture(scope="module")
def so3_nf(so3):
    return algebroid_normal_form(so3, AXIS, radius=0.2)


def test_so3_normal_form_image_and_anchor(so3_nf):
    w = AXIS.sample_ball(4, np.random.default_rng(1), 0.15)
    assert so3_nf.image_residual(w).max() < 1e-6
    assert so3_nf.anchor_residual(so3_nf.emb(w)).max() < 1e-6


def test_so3_normal_form_preserves_brackets(so3_nf):
    w = AXIS.sample_ball(3, np.random.default_rng(2), 0.15)
    assert so3_nf.bracket_residual(w).max() < 1e-5
