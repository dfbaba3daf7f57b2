"""Twisted Courant algebra on ``TM + T*M``, Dirac structures and GCS data.

Sections are pairs ``v + mu`` of a vector field and a 1-form.  The bracket is
the (non-skew) Dorfman expression

    [[X1 + a1, X2 + a2]] = [X1, X2] + L_X1 a2 - i_X2 d a1 + i_X1 i_X2 eta

with the slot convention ``i_X1 i_X2 eta = eta(X2, X1, .)``.  The pairing is
``<v1 + mu1, v2 + mu2> = mu1(v2) + mu2(v1)`` (bilinear, also in complex mode).

Dirac structures are handled in two ways: as generating sections (for
involutivity checks) and as pointwise frames ``F`` of shape ``(B, 2n, n)``
whose top half holds vectors and bottom half covectors.  Equality of Dirac
structures is always measured by the largest principal angle.
"""

import numpy as np
import scipy.linalg

from .chart import (Bivector, Field, OneForm, VectorField, constant_field,
                    exterior_derivative, interior_product, jacobiator,
                    lie_bracket, lie_derivative, zero_field)
from .errors import PreconditionError, TransversalityError
from .flow import DEFAULT, integrate_state
from .jet import Jet, contract

# -- pointwise linear algebra -----------------------------------------------------


def orth(F, tol=1e-10):
    """Orthonormal basis of the column span for a single matrix."""
    u, s, _ = np.linalg.svd(F, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return u[:, :rank]


def nullspace(A, tol=1e-10):
    _, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return np.conj(vh[rank:].T)


def _orth_batch(F):
    q, _ = np.linalg.qr(F)
    return q


def subspace_distance(A, B):
    """Sine of the largest principal angle between column spans (batched).

    Both inputs are ``(..., N, k)`` frames of full column rank; for equal
    dimensions the quantity is symmetric.  Computed as
    ``|| (I - Q_A Q_A^H) Q_B ||_2``, accurate for small angles.
    """
    A, B = np.asarray(A), np.asarray(B)
    QA, QB = _orth_batch(A), _orth_batch(B)
    R = QB - QA @ (np.conj(np.swapaxes(QA, -1, -2)) @ QB)
    d1 = np.linalg.norm(R, ord=2, axis=(-2, -1))
    if A.shape[-1] == B.shape[-1]:
        return d1
    R2 = QA - QB @ (np.conj(np.swapaxes(QB, -1, -2)) @ QA)
    return np.maximum(d1, np.linalg.norm(R2, ord=2, axis=(-2, -1)))


def pairing_matrix(n, dtype=float):
    """Matrix ``G`` with ``<u, v> = u^T G v``."""
    G = np.zeros((2 * n, 2 * n), dtype=dtype)
    G[:n, n:] = np.eye(n)
    G[n:, :n] = np.eye(n)
    return G


def frame_bfield(F, omega):
    """``R_omega`` on frames: covector part ``M + Omega^T V``."""
    n = F.shape[-2] // 2
    V, M = F[..., :n, :], F[..., n:, :]
    return np.concatenate([V, M + np.swapaxes(omega, -1, -2) @ V], axis=-2)


def frame_pullback(J, F, tol=1e-8):
    """Pointwise ``phi^! E`` for a map with Jacobian ``J`` (``(B, n, m)``).

    Solves ``J v' = V c`` and returns the frame ``(v', J^T M c)``.  Raises
    :class:`TransversalityError` when ``rank [J, V] < n``.
    """
    J = np.atleast_3d(J) if J.ndim == 2 else J
    B, n, m = J.shape
    out = np.zeros((B, 2 * m, m), dtype=np.result_type(J, F))
    for z in range(B):
        V, M = F[z, :n, :], F[z, n:, :]
        K = np.concatenate([J[z], -V], axis=1)
        sv = np.linalg.svd(K, compute_uv=False)
        if sv[n - 1] < tol * max(1.0, sv[0]):
            raise TransversalityError(f"map not transverse to the anchor at sample {z} "
                                      f"(singular value {sv[n - 1]:.2e})")
        ker = nullspace(K, tol)
        vp, c = ker[:m], ker[m:]
        G = np.concatenate([vp, J[z].T @ (M @ c)], axis=0)
        Q = orth(G, tol)
        if Q.shape[1] != m:
            raise TransversalityError(f"pullback has rank {Q.shape[1]} instead of {m} at sample {z}")
        out[z] = Q
    return out


def frame_diffeo_pullback(J, F):
    """``psi^! E`` for a local diffeomorphism: ``(J^{-1} V, J^T M)``."""
    n = J.shape[-1]
    V, M = F[..., :n, :], F[..., n:, :]
    return np.concatenate([np.linalg.solve(J, V), np.swapaxes(J, -1, -2) @ M], axis=-2)


# -- sections and the bracket -------------------------------------------------------


class CourantSection:
    """A section ``X + alpha`` of ``TM + T*M``."""

    def __init__(self, X, alpha):
        if X.dim != alpha.dim:
            raise ValueError("vector and form parts live on different charts")
        self.X = X
        self.alpha = alpha
        self.dim = X.dim

    @property
    def complex_mode(self):
        return self.X.complex_mode or self.alpha.complex_mode

    @property
    def max_order(self):
        return min(self.X.max_order, self.alpha.max_order)

    @classmethod
    def vector(cls, X):
        return cls(X, zero_field(OneForm, X.dim))

    @classmethod
    def form(cls, alpha):
        return cls(zero_field(VectorField, alpha.dim), alpha)

    def __call__(self, points):
        """Stacked values ``(B, 2n)``."""
        pts = np.atleast_2d(points)
        return np.concatenate([self.X(pts), self.alpha(pts)], axis=-1)

    def __add__(self, other):
        return CourantSection(self.X + other.X, self.alpha + other.alpha)

    def __sub__(self, other):
        return CourantSection(self.X - other.X, self.alpha - other.alpha)

    def __mul__(self, f):
        return CourantSection(self.X * f, self.alpha * f)

    __rmul__ = __mul__


class TwistedCourant:
    """Background ``(chart, eta)`` with ``eta`` a closed 3-form (``None`` means 0)."""

    def __init__(self, dim, eta=None, validate_points=None, tol=1e-10):
        self.dim = dim
        self.eta = eta
        if eta is not None and validate_points is not None:
            r = self.closedness(validate_points)
            if np.max(r) > tol:
                raise PreconditionError(f"eta is not closed (|d eta| = {np.max(r):.2e})")

    def closedness(self, points):
        eta = self.eta
        if eta is None:
            return np.zeros(len(np.atleast_2d(points)))
        D = eta.taylor(np.atleast_2d(points), 1).d1        # [i,j,k,l] = d_l eta_ijk
        # (d eta)_{lijk} = d_l eta_ijk - d_i eta_ljk + d_j eta_lik - d_k eta_lij
        d = (np.einsum("zijkl->zlijk", D) - np.einsum("zljki->zlijk", D)
             + np.einsum("zlikj->zlijk", D) - np.einsum("zlijk->zlijk", D))
        return np.abs(d).reshape(len(d), -1).max(axis=1)

    def shifted(self, omega):
        """Background for ``R_omega``: ``eta + d omega``."""
        d = exterior_derivative(omega)
        return TwistedCourant(self.dim, d if self.eta is None else self.eta + d)


def courant_bracket(s1, s2, bg=None):
    X1, a1, X2, a2 = s1.X, s1.alpha, s2.X, s2.alpha
    vec = lie_bracket(X1, X2)
    form = lie_derivative(X1, a2) - interior_product(X2, exterior_derivative(a1))
    if bg is not None and bg.eta is not None:
        form = form + interior_product(X1, interior_product(X2, bg.eta))
    return CourantSection(vec, form)


def pairing(s1, s2):
    return interior_product(s2.X, s1.alpha) + interior_product(s1.X, s2.alpha)


def bfield(omega, arg):
    """B-field transform ``R_omega`` of a section or a :class:`DiracFrame`."""
    if isinstance(arg, CourantSection):
        return CourantSection(arg.X, arg.alpha + interior_product(arg.X, omega))
    if isinstance(arg, DiracFrame):
        bg = (arg.bg or TwistedCourant(arg.dim)).shifted(omega)
        return DiracFrame([bfield(omega, s) for s in arg.sections], bg, arg.complex_mode, arg.gcs)
    raise TypeError(f"cannot apply a B-field to {type(arg).__name__}")


# -- Dirac structures -------------------------------------------------------------


class DiracFrame:
    """A (twisted, possibly complex) Dirac structure given by n generating sections."""

    def __init__(self, sections, bg=None, complex_mode=False, gcs=False):
        self.sections = list(sections)
        self.dim = self.sections[0].dim
        if len(self.sections) != self.dim:
            raise ValueError(f"need {self.dim} generating sections, got {len(self.sections)}")
        self.bg = bg
        self.complex_mode = complex_mode or any(s.complex_mode for s in self.sections)
        self.gcs = gcs

    def frames(self, points):
        pts = np.atleast_2d(points)
        return np.stack([s(pts) for s in self.sections], axis=-1)

    def validate(self, points, tol=1e-8, strict=True):
        pts = np.atleast_2d(points)
        n = self.dim
        F = self.frames(pts)
        G = pairing_matrix(n)
        iso = np.abs(np.swapaxes(F, 1, 2) @ G @ F).max(axis=(1, 2))
        sv = np.linalg.svd(F, compute_uv=False)
        rank_res = np.where(sv[:, -1] > tol, 0.0, 1.0)
        Q = _orth_batch(F)
        inv = np.zeros(len(pts))
        for i in range(n):
            for j in range(n):
                b = courant_bracket(self.sections[i], self.sections[j], self.bg)(pts)
                r = b - np.einsum("zab,zb->za", Q, np.einsum("zba,zb->za", np.conj(Q), b))
                inv = np.maximum(inv, np.linalg.norm(r, axis=1))
        res = {"isotropy": iso, "rank": rank_res, "involutivity": inv}
        if self.gcs:
            FF = np.concatenate([F, np.conj(F)], axis=2)
            smin = np.linalg.svd(FF, compute_uv=False)[:, -1]
            res["real_index"] = np.where(smin > tol, 0.0, 1.0)
            res["min_singular_value_E_plus_Ebar"] = smin
        if strict:
            for k in ("isotropy", "rank", "involutivity", "real_index"):
                if k in res and np.max(res[k]) > tol:
                    raise PreconditionError(f"Dirac frame fails {k} (residual {np.max(res[k]):.2e})")
        return res


def graph_of_bivector(pi, check_points=None, tol=1e-8):
    """``Gr(pi)`` with generators ``pi^sharp(dx^i) + dx^i``."""
    n = pi.dim
    if check_points is not None:
        J = np.abs(jacobiator(pi)(np.atleast_2d(check_points))).max()
        if J > tol:
            raise PreconditionError(f"bivector is not Poisson (|Jacobiator| = {J:.2e})")
    secs = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        dx = constant_field(OneForm, e, n)
        X = VectorField.derived(n, lambda p, o, i=i: pi.taylor(p, o)[i], pi.max_order, (n,))
        secs.append(CourantSection(X, dx))
    return DiracFrame(secs, TwistedCourant(n), pi.complex_mode)


def graph_of_twoform(omega, eta=None, check_points=None, tol=1e-8):
    """``Gr(omega)`` with generators ``d_i + i_{d_i} omega``; Dirac relative to ``eta = d omega``."""
    n = omega.dim
    if check_points is not None:
        pts = np.atleast_2d(check_points)
        d = exterior_derivative(omega)(pts)
        e = 0 if eta is None else eta(pts)
        r = np.abs(d - e).max()
        if r > tol:
            raise PreconditionError(f"d omega does not match the twist (residual {r:.2e})")
    secs = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        X = constant_field(VectorField, e, n)
        a = OneForm.derived(n, lambda p, o, i=i: omega.taylor(p, o)[i], omega.max_order, (n,))
        secs.append(CourantSection(X, a))
    return DiracFrame(secs, TwistedCourant(n, eta), omega.complex_mode)


def tangent_dirac(n):
    return DiracFrame([CourantSection.vector(constant_field(VectorField, np.eye(n)[i], n)) for i in range(n)],
                      TwistedCourant(n))


def cotangent_dirac(n):
    return DiracFrame([CourantSection.form(constant_field(OneForm, np.eye(n)[i], n)) for i in range(n)],
                      TwistedCourant(n))


def dirac_poisson_bivector(F, tol=1e-10):
    """Bivector ``pi`` with ``F = Gr(pi)`` pointwise, from frames ``(B, 2n, n)``.

    Requires the covector block to be invertible; then ``pi^{ij}`` is read off
    from ``V M^{-1}`` (``V = Pi^T M``).
    """
    n = F.shape[-1]
    V, M = F[..., :n, :], F[..., n:, :]
    if np.min(np.linalg.svd(M, compute_uv=False)[..., -1]) < tol:
        raise PreconditionError("Dirac structure is not the graph of a bivector")
    return np.swapaxes(V @ np.linalg.inv(M), -1, -2)


def dirac_two_form(F, tol=1e-10):
    """Two-form ``omega`` with ``F = Gr(omega)`` pointwise (``M = Omega^T V``)."""
    n = F.shape[-1]
    V, M = F[..., :n, :], F[..., n:, :]
    if np.min(np.linalg.svd(V, compute_uv=False)[..., -1]) < tol:
        raise PreconditionError("Dirac structure is not the graph of a 2-form")
    return np.swapaxes(M @ np.linalg.inv(V), -1, -2)


def pullback_dirac(phi, E, points, tol=1e-8):
    """Pointwise frames of ``phi^! E`` at source ``points``."""
    pts = np.atleast_2d(points)
    J = phi.jacobian(pts)
    return frame_pullback(J if J.ndim == 3 else J[None], E.frames(phi(pts)), tol)


# -- generalized complex structures ----------------------------------------------------


class GCSData:
    """A generalized complex structure given by a ``2n x 2n`` matrix field acting on ``(v; mu)``."""

    def __init__(self, J):
        self.J = J.cached() if isinstance(J, Field) else J
        self.dim = J.tensor_shape()[0] // 2

    @classmethod
    def symplectic(cls, omega):
        """``[[0, pi^sharp], [-omega^flat, 0]]`` with ``pi = omega^{-1}``."""
        n = omega.dim

        def fn(p, o):
            W = omega.taylor(p, o)
            Pi = W.inv()
            Z = Jet.constant(np.zeros(W.val.shape), n, o)
            top = Jet.concatenate([Z, Pi.transpose()], axis=1)
            bot = Jet.concatenate([-W.transpose(), Z], axis=1)
            return Jet.concatenate([top, bot], axis=0)
        return cls(Field.derived(n, fn, omega.max_order, (2 * n, 2 * n)))

    @classmethod
    def complex(cls, Jm):
        """``J + (J^{-1})^*`` for an (integrable) almost complex structure matrix field."""
        n = Jm.tensor_shape()[0]

        def fn(p, o):
            A = Jm.taylor(p, o)
            Z = Jet.constant(np.zeros(A.val.shape), n, o)
            top = Jet.concatenate([A, Z], axis=1)
            bot = Jet.concatenate([Z, -A.transpose()], axis=1)
            return Jet.concatenate([top, bot], axis=0)
        return cls(Field.derived(n, fn, Jm.max_order, (2 * n, 2 * n)))

    @classmethod
    def product(cls, first, second):
        """Structure on the product chart (coordinates of ``first`` then ``second``)."""
        n1, n2 = first.dim, second.dim
        n = n1 + n2

        def fn(p, o):
            A = first.J.taylor(p[:, :n1], o)
            B = second.J.taylor(p[:, n1:], o)
            parts = []
            for q in range(o + 1):
                pa, pb = A.parts()[q], B.parts()[q]
                shp = (p.shape[0], 2 * n, 2 * n) + (n,) * q
                out = np.zeros(shp)
                # embed derivative axes: first block depends on the first n1 coordinates
                ia = np.r_[0:n1, n:n + n1]
                ib = np.r_[n1:n, n + n1:2 * n]
                sel_a = (slice(None), ia[:, None], ia[None, :])
                sel_b = (slice(None), ib[:, None], ib[None, :])
                if q == 0:
                    out[sel_a] = pa
                    out[sel_b] = pb
                elif q == 1:
                    tmp = np.zeros((p.shape[0], 2 * n1, 2 * n1, n))
                    tmp[..., :n1] = pa
                    out[sel_a] = tmp
                    tmp = np.zeros((p.shape[0], 2 * n2, 2 * n2, n))
                    tmp[..., n1:] = pb
                    out[sel_b] = tmp
                else:
                    tmp = np.zeros((p.shape[0], 2 * n1, 2 * n1, n, n))
                    tmp[..., :n1, :n1] = pa
                    out[sel_a] = tmp
                    tmp = np.zeros((p.shape[0], 2 * n2, 2 * n2, n, n))
                    tmp[..., n1:, n1:] = pb
                    out[sel_b] = tmp
                parts.append(out)
            return Jet(*parts)
        return cls(Field.derived(n, fn, min(first.J.max_order, second.J.max_order), (2 * n, 2 * n)))

    def conjugate(self, B):
        """``R_B J R_{-B}`` for a closed 2-form ``B``."""
        n = self.dim

        def fn(p, o):
            Bj = B.taylor(p, o)
            I = Jet.constant(np.broadcast_to(np.eye(n), (p.shape[0], n, n)).copy(), n, o)
            Z = Jet.constant(np.zeros((p.shape[0], n, n)), n, o)
            R = Jet.concatenate([Jet.concatenate([I, Z], 1), Jet.concatenate([Bj.transpose(), I], 1)], 0)
            Rm = Jet.concatenate([Jet.concatenate([I, Z], 1), Jet.concatenate([-Bj.transpose(), I], 1)], 0)
            return contract("ab,bc->ac", contract("ab,bc->ac", R, self.J.taylor(p, o)), Rm)
        return GCSData(Field.derived(n, fn, min(self.J.max_order, B.max_order), (2 * n, 2 * n)))

    def __call__(self, points):
        return self.J(points)

    def validate(self, points, tol=1e-8, strict=True):
        pts = np.atleast_2d(points)
        Jv = self.J(pts)
        n2 = Jv.shape[-1]
        sq = np.abs(Jv @ Jv + np.eye(n2)).max(axis=(1, 2))
        G = pairing_matrix(self.dim)
        orth_res = np.abs(np.swapaxes(Jv, 1, 2) @ G @ Jv - G).max(axis=(1, 2))
        res = {"square": sq, "orthogonal": orth_res}
        E = gcs_eigenbundle(self, pts)
        res.update(E.validate(pts, tol, strict=False))
        if strict:
            for k, v in res.items():
                if k.startswith("min_singular"):
                    continue
                if np.max(v) > tol:
                    raise PreconditionError(f"GCS fails {k} (residual {np.max(v):.2e})")
        return res


def gcs_eigenbundle(J, reference_points=None):
    """Complex Dirac frame of the ``+i`` eigenbundle.

    Generators are ``P e_c`` with ``P = (1 - i J)/2`` and columns ``c``
    chosen by pivoted QR at a reference point, which keeps them smooth.
    """
    n = J.dim
    ref = np.zeros((1, n)) if reference_points is None else np.atleast_2d(reference_points)[:1]
    P0 = 0.5 * (np.eye(2 * n) - 1j * J(ref)[0])
    _, _, piv = scipy.linalg.qr(P0, pivoting=True)
    cols = piv[:n]

    def make(c, part):
        def fn(p, o):
            Jj = J.J.taylor(p, o)
            col = Jj[:, c] * (-0.5j)
            e = np.zeros(2 * n)
            e[c] = 0.5
            col = col + e
            return col[:n] if part == 0 else col[n:]
        return fn
    secs = []
    for c in cols:
        X = VectorField.derived(n, make(c, 0), J.J.max_order, (n,), complex_mode=True)
        a = OneForm.derived(n, make(c, 1), J.J.max_order, (n,), complex_mode=True)
        secs.append(CourantSection(X, a))
    return DiracFrame(secs, TwistedCourant(n), True, gcs=True)


def gcs_induced_poisson(J):
    """Bivector with ``pi^sharp(mu) = a(J mu)``: ``pi^{ij} = J_{TV}[j, i]``."""
    n = J.dim

    def fn(p, o):
        return J.J.taylor(p, o)[:n, n:].transpose()
    return Bivector.derived(n, fn, J.J.max_order, (n, n))


# -- gauge transformations along flows ---------------------------------------------


def gauge_form(sigma, bg=None):
    """``theta = d alpha + i_X eta`` for ``sigma = X + alpha``."""
    th = exterior_derivative(sigma.alpha)
    if bg is not None and bg.eta is not None:
        th = th + interior_product(sigma.X, bg.eta)
    return th


def gamma_along_flow(X, theta, points, s, cfg=DEFAULT, chart=None):
    """``(Phi_s(m), D Phi_s(m), gamma_s(m))`` with ``gamma_s = int_0^s Phi_u^* theta du``."""
    pts = np.atleast_2d(points)
    B, n = pts.shape

    def rhs(u, state):
        m, J, _ = state
        Xj = X.taylor(m, 1)
        th = theta(m)
        return (Xj.val, np.einsum("zij,zjk->zik", Xj.d1, J),
                np.einsum("zia,zij,zjb->zab", J, th, J))
    state = (pts.copy(), np.broadcast_to(np.eye(n), (B, n, n)).copy(), np.zeros((B, n, n)))
    out, _ = integrate_state(rhs, state, 0.0, s, cfg, chart)
    return out


def gauge_flow_check(sigma, s, E, bg=None, points=None, cfg=DEFAULT, tol=1e-8, chart=None):
    """Distance between the flowed Dirac structure and its gauge transform.

    Compares ``[J^{-1} V; J^T M]`` built from ``E`` at ``Phi_s(m)``
    (``J = D Phi_s(m)``) with ``R_{gamma_s}(E_m)``.
    """
    pts = np.atleast_2d(points)
    F0 = E.frames(pts)
    val = sigma(pts)[:, :, None]
    Q = _orth_batch(F0)
    memb = np.linalg.norm(val - Q @ (np.conj(np.swapaxes(Q, 1, 2)) @ val), axis=(1, 2))
    if np.max(memb) > tol:
        raise PreconditionError(f"sigma is not a section of E (residual {np.max(memb):.2e})")
    theta = gauge_form(sigma, bg)
    m, J, gamma = gamma_along_flow(sigma.X, theta, pts, s, cfg, chart)
    lhs = frame_diffeo_pullback(J, E.frames(m))
    rhs = frame_bfield(F0, gamma)
    return subspace_distance(lhs, rhs)


def is_poisson(pi, points, tol=1e-8):
    return float(np.abs(jacobiator(pi)(np.atleast_2d(points))).max()) < tol


__all__ = [
    "CourantSection", "TwistedCourant", "DiracFrame", "GCSData", "courant_bracket", "pairing",
    "bfield", "pullback_dirac", "graph_of_bivector", "graph_of_twoform", "gcs_eigenbundle",
    "gcs_induced_poisson", "gauge_flow_check", "subspace_distance", "frame_pullback",
    "frame_bfield", "frame_diffeo_pullback", "orth", "nullspace", "tangent_dirac",
    "cotangent_dirac", "dirac_poisson_bivector", "dirac_two_form", "is_poisson",
]
