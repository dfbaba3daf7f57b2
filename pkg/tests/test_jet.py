import numpy as np
import pytest
from hypothesis import given, strategies as st

from eulerlike.errors import JetOrderError
from eulerlike.jet import Jet, contract



def test_coordinates_have_identity_derivative():
    j = Jet.coordinates([[1.0, 2.0, 3.0]], 2)
    np.testing.assert_array_equal(j.d1[0], np.eye(3))
    assert not np.any(j.d2)


def test_product_rule():
    x = Jet.coordinates([[0.7]], 2)[0]
    y = x * x * x
    assert y.val[0] == pytest.approx(0.343)
    assert y.d1[0, 0] == pytest.approx(3 * 0.49)
    assert y.d2[0, 0, 0] == pytest.approx(6 * 0.7)


def test_quotient_rule():
    x = Jet.coordinates([[2.0]], 2)[0]
    y = 1.0 / (1.0 + x * x)
    np.testing.assert_allclose(y.d1[0, 0], -2 * 2 / 25)
    np.testing.assert_allclose(y.d2[0, 0, 0], (6 * 4 - 2) / 125)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_compose_chain_rule(a, b):
    # outer f(u) = u^2, inner g(x) = a x + b x^2 at x = 0.5
    x0 = 0.5
    g = Jet(np.array([[a * x0 + b * x0 ** 2]]), np.array([[[a + 2 * b * x0]]]), np.array([[[[2 * b]]]]))
    u = g.val[:, 0]
    f = Jet(u ** 2, (2 * u)[:, None], np.full((1, 1, 1), 2.0))
    h = f.compose(g)
    gv, g1, g2 = g.val[0, 0], g.d1[0, 0, 0], g.d2[0, 0, 0, 0]
    assert h.val[0] == pytest.approx(gv ** 2)
    assert h.d1[0, 0] == pytest.approx(2 * gv * g1, abs=1e-12)
    assert h.d2[0, 0, 0] == pytest.approx(2 * g1 ** 2 + 2 * gv * g2, abs=1e-12)


def test_hessian_symmetry_is_exact(rng):
    pts = rng.normal(size=(5, 3))
    x = Jet.coordinates(pts, 2)
    f = (x[0] * x[1]).reciprocal() * x[2] + x[0] * x[2] * x[1]
    assert np.array_equal(f.d2, np.swapaxes(f.d2, -1, -2))


def test_truncate_and_order():
    j = Jet.coordinates([[1.0, 2.0]], 2)
    assert j.order == 2
    assert j.truncate(1).order == 1
    assert j.truncate(0).order == 0


def test_deriv_of_order_zero_raises():
    with pytest.raises(JetOrderError):
        Jet.coordinates([[1.0]], 0).deriv()


def test_contract_matches_einsum(rng):
    A = Jet(rng.normal(size=(4, 3, 3)), rng.normal(size=(4, 3, 3, 2)), None)
    v = Jet(rng.normal(size=(4, 3)), rng.normal(size=(4, 3, 2)), None)
    out = contract("ij,j->i", A, v)
    np.testing.assert_allclose(out.val, np.einsum("bij,bj->bi", A.val, v.val))
    ref = np.einsum("bijk,bj->bik", A.d1, v.val) + np.einsum("bij,bjk->bik", A.val, v.d1)
    np.testing.assert_allclose(out.d1, ref)


def test_contract_second_order_against_finite_differences():
    def f(p):
        x = Jet.coordinates(p, 2)
        M = Jet.stack([Jet.stack([x[0] * x[1], x[1]]), Jet.stack([x[0], x[0] * x[0]])])
        return contract("ij,j->i", M, x)

    p0 = np.array([[0.3, -0.4]])
    j = f(p0)
    h = 1e-4
    for a in range(2):
        e = np.zeros((1, 2)); e[0, a] = h
        fd = (f(p0 + e).d1 - f(p0 - e).d1) / (2 * h)
        np.testing.assert_allclose(j.d2[..., a], fd, atol=1e-7)


def test_matrix_inverse_jet(rng):
    base = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    def mat(p):
        x = Jet.coordinates(p, 2)
        rows = [Jet.stack([x[0] * base[i, 0] + base[i, j] * (1 + x[1] * x[1]) if j == 1 else x[0] * 0 + base[i, j]
                           for j in range(3)]) for i in range(3)]
        return Jet.stack(rows)
    M = mat(np.array([[0.2, 0.1]]))
    Mi = M.inv()
    I = contract("ij,jk->ik", M, Mi)
    np.testing.assert_allclose(I.val[0], np.eye(3), atol=1e-13)
    assert np.abs(I.d1).max() < 1e-12
    assert np.abs(I.d2).max() < 1e-12
