"""Euler-like vector fields and the tubular neighbourhood embeddings they define.

Everything is expressed in an adapted chart ``w = (y, x)`` with ``N = {x = 0}``
(see :class:`eulerlike.chart.Transversal`), where the normal bundle is the
trivial bundle and the scalar multiplication ``kappa_t`` is ``(y, x) -> (y, t x)``.

Given ``X`` Euler-like along N, put ``Z = E - X`` (``E`` the Euler field) and
``Z_t = (1/t) kappa_t^* Z``.  The map ``psi`` is the time-one map of the
non-autonomous field ``-Z_t`` started at ``t = 0``; it satisfies
``T psi(E) = X o psi``, fixes N and has identity normal derivative.
"""

from dataclasses import dataclass, field

import numpy as np

from .chart import SmoothMap, VectorField
from .errors import (ConvergenceError, FlowError, JetOrderError,
                     NotEulerLikeError, PreconditionError)
from .flow import DEFAULT, FieldFamily, flow_jet, timedep_flow_jet
from .jet import Jet

T_MIN = 1e-4


# -- normal derivative ----------------------------------------------------------


def normal_derivative(sigma, N, points, tol=1e-10):
    """Normal derivative of a section vanishing along N.

    ``points`` lie on N.  Returns an array ``(B, *shape, k)`` whose last axis
    runs over the normal directions.
    """
    points = np.atleast_2d(points)
    if np.any(points[:, N.p:] != 0):
        raise PreconditionError("normal_derivative needs points on N")
    j = sigma.taylor(points, 1)
    vmax = float(np.max(np.abs(j.val))) if j.val.size else 0.0
    if vmax > tol:
        raise PreconditionError(f"section does not vanish on N (max |sigma| = {vmax:.3e})")
    return j.d1[..., N.p:]


@dataclass
class EulerCheck:
    euler_like: bool
    vanishing_residual: float
    linear_residual: float
    tol: float
    points: np.ndarray = field(repr=False, default=None)

    def __bool__(self):
        return self.euler_like


def is_euler_like(X, N, tol=1e-8, samples=20, radius=0.3, rng=None):
    """Check ``X|_N = 0`` and ``proj o d^N X = id`` at sampled points of N."""
    rng = np.random.default_rng(0) if rng is None else rng
    pts = N.sample_N(samples, rng, radius)
    j = X.taylor(pts, 1)
    van = float(np.max(np.abs(j.val)))
    block = j.d1[:, N.p:, N.p:]
    lin = float(np.max(np.abs(block - np.eye(N.k)))) if N.k else 0.0
    return EulerCheck(van < tol and lin < tol, van, lin, tol, pts)


# -- the rescaled family Z_t ------------------------------------------------------


class ZtFamily(FieldFamily):
    """``Z_t = (1/t) K_t^{-1} Z(kappa_t w)`` with its jet limit at ``t = 0``.

    Normal components are ``g(y, t x) / t^2`` and leaf components
    ``h(y, t x) / t``.  Below ``t_min`` the value is replaced by the limit
    ``(d_x h(y,0) x, 1/2 x^T d_xx g(y,0) x)``; derivatives there come from the
    evaluation at ``t_min`` (the family is smooth in t, so the induced error
    is of order ``t_min`` over an interval of length ``t_min``).
    """

    def __init__(self, Z, N, t_min=T_MIN, sign=1.0, check=True, tol=1e-10):
        self.Z = Z
        self.N = N
        self.t_min = t_min
        self.sign = sign
        self.exact_limit = Z.max_order >= 2
        if check:
            self.validate(tol)
        super().__init__(N.dim, self._jet, Z.max_order)

    def validate(self, tol=1e-10, samples=8):
        N = self.N
        pts = N.sample_N(samples, np.random.default_rng(1))
        j = self.Z.taylor(pts, 1)
        r0 = float(np.max(np.abs(j.val)))
        r1 = float(np.max(np.abs(j.d1[:, N.p:, N.p:]))) if N.k else 0.0
        if max(r0, r1) > tol:
            raise PreconditionError(
                f"Z must vanish on N (residual {r0:.2e}) with vanishing normal-normal "
                f"derivative (residual {r1:.2e})")

    def _scales(self, t):
        p, k = self.N.p, self.N.k
        return np.array([1.0 / t] * p + [1.0 / t ** 2] * k)

    def _direct(self, t, w):
        p, k = self.N.p, self.N.k
        kw = w * np.array([1.0] * p + [t] * k)
        z = self.Z.jet(kw)
        return z * (self.sign * self._scales(t))

    def limit(self, w):
        """Value of ``Z_0`` at a batch of points."""
        N = self.N
        p = N.p
        base = w.copy()
        base[:, p:] = 0.0
        j = self.Z.taylor(base, 2)
        x = w[:, p:]
        out = np.empty_like(w)
        out[:, :p] = np.einsum("zia,za->zi", j.d1[:, :p, p:], x)
        out[:, p:] = 0.5 * np.einsum("ziab,za,zb->zi", j.d2[:, p:, p:, p:], x, x)
        return self.sign * out

    def _jet(self, t, w):
        if t >= self.t_min:
            return self._direct(t, w)
        z = self._direct(self.t_min, w)
        if self.exact_limit:
            z = Jet(self.limit(w.val), *z.parts()[1:])
        return z

    def at(self, t, points):
        """``Z_t`` at a batch of points (value only)."""
        return self(t, points)


def evaluate_Zt(Z, N, t, points, t_min=T_MIN):
    """``Z_t`` for a field vanishing to the required orders along N."""
    fam = ZtFamily(Z, N, t_min)
    if t < t_min:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = fam.limit(pts)
        return out[0] if np.ndim(points) == 1 else out
    return fam(t, points)


# -- tubular embedding ------------------------------------------------------------


class TubularEmbedding:
    """The embedding ``psi`` built from an Euler-like field ``X``."""

    def __init__(self, X, N, cfg=DEFAULT, chart=None, t_min=T_MIN):
        self.X = X
        self.N = N
        self.cfg = cfg
        self.chart = chart
        self.Z = N.euler_field() - X
        # psi is the time-one map of -Z_t
        self.family = ZtFamily(self.Z, N, t_min, sign=-1.0)
        self.max_order = min(2, X.max_order)
        self.domain_radius = None
        self.validation = {}

    # evaluation ---------------------------------------------------------------

    def taylor(self, points, order=0):
        if order > self.max_order:
            raise JetOrderError(f"embedding supports order {self.max_order}")
        return timedep_flow_jet(self.family, np.atleast_2d(points), 0.0, 1.0, order, self.cfg, self.chart)

    def jet(self, w):
        return timedep_flow_jet(self.family, w, 0.0, 1.0, w.order, self.cfg, self.chart)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        out = self.taylor(np.atleast_2d(w), 0).val
        return out[0] if w.ndim == 1 else out

    def jacobian(self, w):
        w = np.asarray(w, dtype=float)
        out = self.taylor(np.atleast_2d(w), 1).d1
        return out[0] if w.ndim == 1 else out

    @property
    def map(self):
        return SmoothMap(self.N.dim, self.N.dim, self.taylor, self.max_order)

    # invariants -----------------------------------------------------------------

    def pushforward_residual(self, w):
        """``|T psi(E) - X o psi|`` at each point."""
        w = np.atleast_2d(w)
        j = self.taylor(w, 1)
        E = self.N.kappa(1.0, w)
        E[:, :self.N.p] = 0.0
        lhs = np.einsum("zij,zj->zi", j.d1, E)
        rhs = self.X(j.val)
        return np.linalg.norm(lhs - rhs, axis=1)

    def commutation_residual(self, w, t):
        """``|psi(kappa_t w) - lambda_t(psi(w))|``."""
        w = np.atleast_2d(w)
        lhs = self(self.N.kappa(t, w))
        rhs = flow_jet(self.X, self(w), np.log(t), 0, self.cfg, self.chart).val
        return np.linalg.norm(lhs - rhs, axis=1)

    def zero_section_residual(self, y_points):
        pts = np.atleast_2d(y_points).copy()
        pts[:, self.N.p:] = 0.0
        j = self.taylor(pts, 1)
        r0 = np.max(np.abs(j.val - pts), axis=1)
        p = self.N.p
        r1 = np.max(np.abs(j.d1[:, p:, p:] - np.eye(self.N.k)), axis=(1, 2)) if self.N.k else 0 * r0
        return r0, r1

    def validate(self, radius=0.3, samples=20, tol=1e-6, rng=None, min_radius=0.01):
        """Record the largest tried ball (radius halved on failure) where checks pass."""
        rng = np.random.default_rng(7) if rng is None else rng
        r = radius
        while r >= min_radius:
            w = self.N.sample_ball(samples, rng, r)
            try:
                res = float(np.max(self.pushforward_residual(w)))
            except FlowError:
                res = np.inf
            if res < tol:
                self.domain_radius = r
                self.validation = {"radius": r, "pushforward": res, "samples": samples}
                return r
            r /= 2
        raise ConvergenceError(f"no ball of radius >= {min_radius} passes the embedding checks")

    # inverses --------------------------------------------------------------------

    def inverse(self, m, tol=1e-12, max_iter=50):
        return psi_inverse(self, m, tol, max_iter)

    def inverse_flow(self, m):
        return psi_inverse_flow(self, m)


def linearize(X, N, cfg=DEFAULT, chart=None, tol=1e-8, validate=True, radius=0.3):
    """Tubular embedding ``psi`` with ``E ~_psi X``.

    Raises :class:`NotEulerLikeError` before any integration if ``X`` is not
    Euler-like along N.
    """
    check = is_euler_like(X, N, tol)
    if not check:
        raise NotEulerLikeError(
            f"X is not Euler-like along N (|X|_N = {check.vanishing_residual:.2e}, "
            f"|d^N X - id| = {check.linear_residual:.2e})")
    emb = TubularEmbedding(X, N, cfg, chart)
    if validate:
        emb.validate(radius)
    return emb


def psi_inverse(emb, m, tol=1e-12, max_iter=50):
    """Damped Newton inversion of ``psi`` (start at ``m``, since ``T psi = id`` on N)."""
    m = np.asarray(m, dtype=float)
    single = m.ndim == 1
    target = np.atleast_2d(m)
    w = target.copy()
    j = emb.taylor(w, 1)
    r = j.val - target
    for _ in range(max_iter):
        nr = np.linalg.norm(r, axis=1)
        if np.all(nr < tol):
            break
        step = np.linalg.solve(j.d1, r[..., None])[..., 0]
        lam = np.ones(len(w))
        for _ in range(30):
            cand = w - lam[:, None] * step
            try:
                jc = emb.taylor(cand, 1)
            except FlowError:
                lam *= 0.5
                continue
            rc = jc.val - target
            worse = np.linalg.norm(rc, axis=1) > nr * (1 - 1e-4 * lam) + tol
            if not np.any(worse):
                break
            lam = np.where(worse, lam * 0.5, lam)
        w, j, r = cand, jc, rc
    else:
        raise ConvergenceError("Newton inversion of psi did not converge")
    return w[0] if single else w


def _richardson(ts, vals, rate=1):
    """Polynomial extrapolation to t = 0 of ``vals[j]`` sampled at ``ts[j]`` (ratio 2)."""
    T = [np.asarray(v, dtype=float) for v in vals]
    for level in range(1, len(T)):
        f = 2.0 ** (rate * level)
        T = [(f * T[i + 1] - T[i]) / (f - 1) for i in range(len(T) - 1)]
    return T[0]


def psi_inverse_flow(emb, m, t0=0.05, levels=5):
    """Inverse of ``psi`` from the limit of ``lambda_t(m)`` as ``t -> 0``.

    The base point is ``lim y(lambda_t m)`` and the fibre coordinate is
    ``lim x(lambda_t m) / t``; both limits use Richardson extrapolation.
    """
    m = np.asarray(m, dtype=float)
    single = m.ndim == 1
    pts = np.atleast_2d(m)
    p = emb.N.p
    ts = [t0 * 2.0 ** (-j) for j in range(levels)]
    ys, xs = [], []
    for t in ts:
        lt = flow_jet(emb.X, pts, np.log(t), 0, emb.cfg, emb.chart).val
        ys.append(lt[:, :p])
        xs.append(lt[:, p:] / t)
    out = np.concatenate([_richardson(ts, ys), _richardson(ts, xs)], axis=1)
    lim_y = ys[-1]
    if p and np.max(np.abs(lim_y - out[:, :p])) > 1e-2:
        raise ConvergenceError("lambda_t(m) does not settle on N; m lies outside the embedding's image")
    return out[0] if single else out


def psi_direct(X, N, w, cfg=DEFAULT, t0=0.02, levels=5, chart=None):
    """Independent construction of ``psi`` from ``psi = lambda_t^{-1} o psi o kappa_t``.

    Since ``psi(kappa_t w) = kappa_t w + O(t)`` relative to the scale ``t``,
    ``Phi_{-log t}(kappa_t w)`` converges to ``psi(w)`` at rate ``O(t)``;
    the limit is taken by Richardson extrapolation.
    """
    w = np.atleast_2d(w)
    ts = [t0 * 2.0 ** (-j) for j in range(levels)]
    vals = [flow_jet(X, N.kappa(t, w), -np.log(t), 0, cfg, chart).val for t in ts]
    return _richardson(ts, vals)


# -- tangent lifts -------------------------------------------------------------------


def tangent_lift(X):
    """Tangent lift ``X_T(m, v) = (X(m), DX(m) v)`` on the doubled chart."""
    n = X.dim

    def fn(p, o):
        m, v = p[:, :n], p[:, n:]
        j = X.taylor(m, o + 1)
        DX = j.deriv()                      # DX[i, a] = d_a X^i
        head = j.truncate(o)
        body_val = np.einsum("zia,za->zi", DX.val, v)
        if o == 0:
            return Jet(np.concatenate([head.val, body_val], axis=1))
        B = p.shape[0]
        # derivatives in (m, v) directions
        d1 = np.zeros((B, 2 * n, 2 * n))
        d1[:, :n, :n] = head.d1
        d1[:, n:, :n] = np.einsum("ziab,za->zib", DX.d1, v)
        d1[:, n:, n:] = DX.val
        if o == 1:
            return Jet(np.concatenate([head.val, body_val], axis=1), d1)
        raise JetOrderError("tangent lift supports first derivatives only")
    return VectorField.derived(2 * n, fn, min(1, X.max_order - 1), (2 * n,))
