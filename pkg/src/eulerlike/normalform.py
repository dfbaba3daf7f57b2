"""Normal forms: the homotopy 2-form, Dirac, Poisson and generalized complex splittings.

For a Dirac structure E with a section ``eps = X + alpha`` vanishing on N and
``X`` Euler-like, the embedding ``psi`` of ``X`` carries E to the gauge
transform of ``p^!i^!E`` by

    omega = int_0^1 (1/tau) kappa_tau^* psi^* (d alpha + i_X eta) dtau.

The integral is computed by Gauss-Legendre quadrature on (0, 1) (the nodes
never touch ``tau = 0``) with node doubling until the result settles.  Each
``*_normal_form`` function returns a :class:`SplittingReport` of residuals.
"""

from dataclasses import dataclass

import numpy as np

from .chart import OneForm, TwoForm, VectorField, exterior_derivative, interior_product, pullback_form, sharp
from .dirac import (dirac_poisson_bivector, frame_bfield,
                    frame_diffeo_pullback, frame_pullback, gcs_eigenbundle, gcs_induced_poisson,
                    graph_of_bivector, subspace_distance)
from .errors import ConvergenceError, PreconditionError
from .euler import is_euler_like, linearize
from .flow import DEFAULT
from .jet import Jet, contract
from .report import SplittingReport


@dataclass(frozen=True)
class QuadratureConfig:
    nodes: int = 8
    tol: float = 1e-9
    max_nodes: int = 192

    def __post_init__(self):
        if self.nodes < 1 or self.tol <= 0:
            raise ValueError("need nodes >= 1 and tol > 0")


# -- cosymplectic transversals ------------------------------------------------------


@dataclass
class CosymplecticCheck:
    cosymplectic: bool
    max_condition: float
    min_singular_value: float

    def __bool__(self):
        return self.cosymplectic


def cosymplectic_check(pi, N, tol=1e-10, samples=20, radius=0.3, rng=None, points=None,
                       max_condition=1e8):
    """Invertibility of ``P_ab = pi(dx^a, dx^b)`` (normal indices) at points of N."""
    if N.k == 0:
        return CosymplecticCheck(True, 1.0, np.inf)
    if N.k % 2:
        return CosymplecticCheck(False, np.inf, 0.0)
    rng = np.random.default_rng(0) if rng is None else rng
    pts = N.sample_N(samples, rng, radius) if points is None else np.atleast_2d(points)
    P = pi(pts)[:, N.p:, N.p:]
    sv = np.linalg.svd(P, compute_uv=False)
    smin = float(np.min(sv[:, -1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = float(np.max(np.where(sv[:, -1] > 0, sv[:, 0] / sv[:, -1], np.inf)))
    return CosymplecticCheck(bool(smin > tol and cond < max_condition), cond, smin)


def _normal_block_inverse_jet(pi, N, w):
    p = N.p
    base = w * np.array([1.0] * p + [0.0] * N.k)
    return pi.jet(base)[p:, p:].inv()


def alpha_for_cosymplectic(pi, N, check=True):
    """``alpha = sum_{j,a} x^j (P^{-1})_{ja} dx^a`` with ``P`` the normal block of pi on N.

    Then ``pi^sharp(alpha)`` has normal components ``x + O(|x|^2)``.
    """
    if check and not cosymplectic_check(pi, N):
        raise PreconditionError("N is not a cosymplectic transversal")
    p, n = N.p, N.dim

    def fn(pts, o):
        w = Jet.coordinates(pts, o)
        Pinv = _normal_block_inverse_jet(pi, N, w)
        a = contract("j,ja->a", w[p:], Pinv)
        if p == 0:
            return a
        zero = Jet.constant(np.zeros((len(pts), p)), n, o)
        return Jet.concatenate([zero, a], axis=0)
    return OneForm.derived(n, fn, pi.max_order, (n,))


# -- the homotopy 2-form ----------------------------------------------------------------


class HomotopyForm(TwoForm):
    """``int_t0^1 (1/tau) kappa_tau^* psi^* theta dtau`` as a 2-form field (order <= 1)."""

    @classmethod
    def build(cls, theta, emb, qcfg=None, t0=0.0):
        qcfg = qcfg or QuadratureConfig()
        obj = cls.derived(emb.N.dim, None, min(1, emb.max_order - 1, theta.max_order),
                          (emb.N.dim, emb.N.dim), theta.complex_mode)
        obj.theta, obj.emb, obj.qcfg, obj.t0 = theta, emb, qcfg, t0
        obj.nodes_used = None
        obj._fn = obj._evaluate
        return obj

    def _rule(self, q):
        x, wts = np.polynomial.legendre.leggauss(q)
        a, b = self.t0, 1.0
        return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * wts

    def _psi(self, pts, order, taus):
        # the same embedding jets serve every form built on this embedding
        cache = self.emb.__dict__.setdefault("_quadrature_cache", {})
        key = (pts.tobytes(), pts.shape, order, taus.tobytes())
        if key not in cache:
            if len(cache) > 16:
                cache.clear()
            u = np.concatenate([self.emb.N.kappa(t, pts) for t in taus])
            cache[key] = self.emb.taylor(u, order)
        return cache[key]

    def _integrate(self, pts, o, q):
        N = self.emb.N
        n, p = N.dim, N.p
        taus, wts = self._rule(q)
        B = len(pts)
        psi = self._psi(pts, o + 1, taus)
        D = psi.deriv()                                             # Dpsi as a jet in u
        th = self.theta.jet(psi.truncate(o)) if o else Jet(self.theta.taylor(psi.val, 0).val)
        f = contract("ia,ab->ib", D.transpose(), contract("ij,jb->ib", th, D))
        total = 0
        for iq, (t, wq) in enumerate(zip(taus, wts)):
            K = np.array([1.0] * p + [t] * (n - p))
            part = f.take_batch(slice(iq * B, (iq + 1) * B))
            scaled = part * (np.outer(K, K) / t)
            if o:
                # derivatives in w pick up a factor K along each derivative axis
                scaled = Jet(scaled.val, scaled.d1 * K)
            total = scaled * wq + total
        return total

    def _evaluate(self, pts, o):
        q = self.qcfg.nodes
        prev = self._integrate(pts, o, q)
        while True:
            q2 = 2 * q
            cur = self._integrate(pts, o, q2)
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(cur.parts(), prev.parts()))
            if diff < self.qcfg.tol:
                self.nodes_used = q2
                return cur
            if q2 >= self.qcfg.max_nodes:
                raise ConvergenceError(f"quadrature change {diff:.2e} with {q2} nodes exceeds {self.qcfg.tol}")
            q, prev = q2, cur


def gauge_theta(alpha, X=None, eta=None):
    """``d alpha + i_X eta``."""
    th = exterior_derivative(alpha)
    if eta is not None:
        th = th + interior_product(X, eta)
    return th


def omega_quadrature(alpha, X, eta, emb, qcfg=None, t0=0.0):
    return HomotopyForm.build(gauge_theta(alpha, X, eta), emb, qcfg, t0)


def closedness_residual(omega, emb, eta, points):
    """``|d omega - (psi^* eta - (i o p)^* eta)|`` at points (zero target when ``eta`` is None)."""
    pts = np.atleast_2d(points)
    d = exterior_derivative(omega)(pts)
    if eta is not None:
        d = d - pullback_form(emb.map, eta)(pts) + pullback_form(emb.N.projection_map(), eta)(pts)
    return np.abs(d).reshape(len(pts), -1).max(axis=1)


# -- Dirac normal form -------------------------------------------------------------------


def psi_pullback_frames(E, emb, w, t=1.0):
    """Frames of ``(psi o kappa_t)^! E`` at ``w``."""
    u = emb.N.kappa(t, w)
    j = emb.taylor(u, 1)
    K = np.diag([1.0] * emb.N.p + [t] * emb.N.k)
    return frame_diffeo_pullback(j.d1 @ K, E.frames(j.val))


def pip_frames(E, N, w):
    """Frames of ``p^! i^! E`` at ``w``: pullback along ``(y, x) -> (y, 0)``."""
    w = np.atleast_2d(w)
    J = np.broadcast_to(np.diag([1.0] * N.p + [0.0] * N.k), (len(w), N.dim, N.dim))
    return frame_pullback(J, E.frames(N.projection(w)))


def _sample(N, samples, radius, rng):
    return N.sample_ball(samples, rng, radius)


def dirac_normal_form(E, N, eps, bg=None, samples=50, radius=None, tol=1e-6, qcfg=None,
                      cfg=DEFAULT, seed=0, family_ts=(1.0, 0.5, 0.25), emb=None, name="dirac"):
    """Verify ``psi^! E = (p^! i^! E)^omega`` at sampled points around N."""
    rng = np.random.default_rng(seed)
    report = SplittingReport(name, seed)
    eta = None if bg is None else bg.eta
    # preconditions
    npts = N.sample_N(10, rng, 0.3)
    van = float(np.abs(eps(npts)).max())
    if van > 1e-10:
        raise PreconditionError(f"eps does not vanish on N ({van:.2e})")
    check = is_euler_like(eps.X, N)
    if not check:
        raise PreconditionError("vector part of eps is not Euler-like along N")
    bpts = N.sample_ball(10, rng, 0.2)
    F = E.frames(bpts)
    Q = np.linalg.qr(F)[0]
    v = eps(bpts)[:, :, None]
    memb = np.linalg.norm(v - Q @ (np.conj(np.swapaxes(Q, 1, 2)) @ v), axis=(1, 2))
    if memb.max() > 1e-8:
        raise PreconditionError(f"eps is not a section of E (residual {memb.max():.2e})")
    if emb is None:
        emb = linearize(eps.X, N, cfg, radius=0.3 if radius is None else radius)
    r = emb.domain_radius if radius is None else min(radius, emb.domain_radius or radius)
    omega = omega_quadrature(eps.alpha, eps.X, eta, emb, qcfg)
    w = _sample(N, samples, r, rng)
    lhs = psi_pullback_frames(E, emb, w)
    rhs = frame_bfield(pip_frames(E, N, w), omega(w))
    report.add("dirac_normal_form_angle", "dirac normal form", subspace_distance(lhs, rhs), tol, w)
    wc = w[: min(len(w), 20)]
    report.add("omega_closedness", "homotopy 2-form closedness", closedness_residual(omega, emb, eta, wc), 1e-7, wc)
    # t-family invariance
    fam = []
    for t in family_ts:
        om_t = omega_quadrature(eps.alpha, eps.X, eta, emb, qcfg, t0=t) if t < 1 else None
        Ft = psi_pullback_frames(E, emb, wc, t)
        if om_t is not None:
            Ft = frame_bfield(Ft, om_t(wc))
        fam.append(Ft)
    res = np.zeros(len(wc))
    for i in range(len(fam)):
        for j in range(i + 1, len(fam)):
            res = np.maximum(res, subspace_distance(fam[i], fam[j]))
    report.add("t_family_invariance", "dirac normal form: t-family", res, tol, wc)
    report.extras.update({"embedding": emb, "omega": omega, "radius": r, "points": w})
    return report


# -- Poisson: Weinstein splitting ------------------------------------------------------


def transverse_poisson(pi, N, y_points):
    """``pi_N`` on N from the Dirac pullback ``i^! Gr(pi)`` (matrices ``(B, p, p)``)."""
    E = graph_of_bivector(pi)
    y = np.atleast_2d(y_points)
    pts = np.zeros((len(y), N.dim))
    pts[:, :N.p] = y[:, :N.p]
    J = np.broadcast_to(np.eye(N.dim)[:, :N.p], (len(y), N.dim, N.p))
    if N.p == 0:
        return np.zeros((len(y), 0, 0))
    return dirac_poisson_bivector(frame_pullback(J, E.frames(pts)))


def symplectic_gram_schmidt(W, tol=1e-10):
    """Basis ``T`` (columns) with ``T^T W T = [[0, I], [-I, 0]]`` for a nondegenerate 2-form."""
    k = W.shape[0]
    basis = list(np.eye(k))
    es, fs = [], []
    while basis:
        e = basis.pop(0)
        partner = None
        for i, b in enumerate(basis):
            if abs(e @ W @ b) > tol:
                partner = basis.pop(i)
                break
        if partner is None:
            raise PreconditionError("2-form is degenerate; no Darboux frame")
        f = partner / (e @ W @ partner)
        es.append(e)
        fs.append(f)

        def proj(v):
            return v - (v @ W @ f) * e + (v @ W @ e) * f
        basis = [proj(v) for v in basis]
    T = np.column_stack(es + fs)
    return T


def weinstein_split(pi, N, samples=100, radius=None, tol=1e-6, qcfg=None, cfg=DEFAULT, seed=0,
                    casimir=None, name="weinstein"):
    """Weinstein splitting around a cosymplectic transversal.

    The model bivector is the Poisson structure of ``(p^! Gr(pi_N))^omega``;
    checked are ``T psi(pi_model) = pi o psi``, vanishing of the mixed
    (leaf/normal) blocks of ``pi_model`` and, if a Casimir is supplied, its
    constancy along the model's Hamiltonian directions.
    """
    v = cosymplectic_check(pi, N)
    if not v:
        raise PreconditionError(f"N is not cosymplectic (min singular value {v.min_singular_value:.2e})")
    if N.k % 2:
        raise PreconditionError("codimension must be even")
    rng = np.random.default_rng(seed)
    alpha = alpha_for_cosymplectic(pi, N, check=False)
    X = sharp(pi, alpha)
    emb = linearize(X, N, cfg, radius=0.3 if radius is None else radius)
    r = emb.domain_radius if radius is None else min(radius, emb.domain_radius)
    omega = omega_quadrature(alpha, X, None, emb, qcfg)
    report = SplittingReport(name, seed)
    w = _sample(N, samples, r, rng)
    E = graph_of_bivector(pi)
    model = frame_bfield(pip_frames(E, N, w), omega(w))
    pim = dirac_poisson_bivector(model)
    j = emb.taylor(w, 1)
    D = j.d1
    push = D @ pim @ np.swapaxes(D, 1, 2)
    report.add("pushforward", "weinstein splitting", np.abs(push - pi(j.val)).max(axis=(1, 2)), tol, w)
    p = N.p
    report.add("mixed_block", "weinstein splitting", np.abs(pim[:, :p, p:]).max(axis=(1, 2)) if p else
               np.zeros(len(w)), tol, w)
    # leaf block of the model is pi_N pulled back along p
    piN = transverse_poisson(pi, N, w)
    report.add("leaf_block", "transverse poisson structure",
               np.abs(pim[:, :p, :p] - piN).max(axis=(1, 2)) if p else np.zeros(len(w)), tol, w)
    # boundary behaviour of omega along N
    y = N.sample_N(20, rng, r)
    om = omega(y)
    P = pi(y)[:, p:, p:]
    report.add("omega_boundary_leaf", "transverse poisson structure",
               np.abs(om[:, :p, :]).max(axis=(1, 2)) if p else np.zeros(len(y)), 1e-8, y)
    report.add("omega_boundary_normal", "transverse poisson structure",
               np.abs(om[:, p:, p:] - np.linalg.inv(P)).max(axis=(1, 2)), tol, y)
    wc = w[:20]
    report.add("omega_closedness", "homotopy 2-form closedness", closedness_residual(omega, emb, None, wc), 1e-7, wc)
    if casimir is not None:
        cj = casimir.taylor(j.val, 1).d1
        grad = np.einsum("zia,zi->za", D, cj)
        report.add("casimir_constancy", "weinstein splitting",
                   np.abs(np.einsum("zab,zb->za", pim, grad)).max(axis=1), tol, w)
    # Darboux data of the transverse symplectic block (reported, not asserted)
    W0 = om[:, p:, p:]
    frames = [symplectic_gram_schmidt(Wz) for Wz in W0]
    dev = np.abs(omega(w)[:, p:, p:] - np.linalg.inv(pi(N.projection(w))[:, p:, p:])).max(axis=(1, 2))
    report.extras.update({"embedding": emb, "omega": omega, "alpha": alpha, "model_bivector": pim,
                          "darboux_frames": frames, "darboux_deviation": float(dev.max()),
                          "radius": r, "points": w})
    return report


# -- generalized complex structures -------------------------------------------------------


def gcs_section(J, alpha):
    """``eps = (J + i) alpha = X + beta + i alpha``; returns ``(X, beta)`` as real fields."""
    n = J.dim

    def part(lo, hi, cls):
        def fn(p, o):
            return contract("ab,b->a", J.J.taylor(p, o)[lo:hi, n:], alpha.taylor(p, o))
        return cls.derived(n, fn, min(J.J.max_order, alpha.max_order), (n,))
    return part(0, n, VectorField), part(n, 2 * n, OneForm)


def gcs_normal_form(J, N, samples=50, radius=None, tol=1e-6, qcfg=None, cfg=DEFAULT, seed=0,
                    name="gcs"):
    """Verify ``psi^! E = (p^! i^! E)^{gamma + i omega}`` for the +i eigenbundle E of J."""
    pi = gcs_induced_poisson(J)
    if not cosymplectic_check(pi, N):
        raise PreconditionError("N is not cosymplectic for the induced Poisson structure")
    rng = np.random.default_rng(seed)
    alpha = alpha_for_cosymplectic(pi, N, check=False)
    X, beta = gcs_section(J, alpha)
    emb = linearize(X, N, cfg, radius=0.3 if radius is None else radius)
    r = emb.domain_radius if radius is None else min(radius, emb.domain_radius)
    omega = omega_quadrature(alpha, X, None, emb, qcfg)
    gamma = omega_quadrature(beta, X, None, emb, qcfg)
    E = gcs_eigenbundle(J, N.center)
    report = SplittingReport(name, seed)
    w = _sample(N, samples, r, rng)
    # J eps = i eps
    Jv = J(w)
    eps = np.concatenate([X(w) + 0j, beta(w) + 1j * alpha(w)], axis=1)
    report.add("eigen_section", "gcs splitting", np.abs(np.einsum("zab,zb->za", Jv, eps) - 1j * eps).max(axis=1),
               1e-8, w)
    F = E.frames(w)
    Q = np.linalg.qr(F)[0]
    memb = np.linalg.norm(eps[:, :, None] - Q @ (np.conj(np.swapaxes(Q, 1, 2)) @ eps[:, :, None]), axis=(1, 2))
    report.add("eps_in_E", "gcs splitting", memb, 1e-8, w)
    lhs = psi_pullback_frames(E, emb, w)
    rhs = frame_bfield(pip_frames(E, N, w), gamma(w) + 1j * omega(w))
    report.add("gcs_normal_form_angle", "gcs splitting", subspace_distance(lhs, rhs), tol, w)
    report.extras.update({"embedding": emb, "omega": omega, "gamma": gamma, "alpha": alpha,
                          "beta": beta, "radius": r, "points": w,
                          "gamma_norm": float(np.abs(gamma(w)).max())})
    return report


__all__ = [
    "QuadratureConfig", "CosymplecticCheck", "cosymplectic_check", "alpha_for_cosymplectic",
    "HomotopyForm", "omega_quadrature", "closedness_residual", "dirac_normal_form",
    "weinstein_split", "gcs_normal_form", "transverse_poisson", "symplectic_gram_schmidt",
    "gcs_section", "psi_pullback_frames", "pip_frames",
]
