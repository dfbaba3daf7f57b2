"""Anchored bundles and Lie algebroids on trivial bundles ``chart x R^r``.

A bundle is given by its anchor matrix ``A`` (``A[j, i]`` is the j-th
component of ``a(e_i)``) and, for Lie algebroids, by structure functions
``c[k, i, j] = c^k_{ij}`` with ``[e_i, e_j] = c^k_{ij} e_k``.

The normal form machinery follows the Euler-like recipe: pick a section
``eps`` with ``a(eps)`` Euler-like, lift the derivation ``D_eps`` to a
linear vector field on E, and read off the bundle map from the limit of its
flow together with the tubular embedding of ``a(eps)``.
"""

from dataclasses import dataclass

import numpy as np

from .chart import Field, MatrixField, Section, VectorField, lie_bracket
from .errors import ConvergenceError, PreconditionError, TransversalityError
from .euler import linearize
from .flow import DEFAULT, integrate_state
from .jet import Jet, contract


def _field_of_shape(data, dim, shape=None):
    if isinstance(data, Field):
        return data
    return MatrixField(data, dim)


class AnchoredBundle:
    """Trivial bundle of rank r with an anchor given by an ``n x r`` matrix field."""

    def __init__(self, anchor, dim=None):
        if not isinstance(anchor, Field):
            rows = np.array(anchor, dtype=object)
            dim = dim or rows.shape[0]
            anchor = MatrixField(rows, dim)
        self.A = anchor
        self.dim, self.rank = anchor.tensor_shape()

    def anchor_of(self, sigma):
        """``a(sigma)`` as a vector field."""
        A = self.A
        return VectorField.derived(self.dim, lambda p, o: contract("ji,i->j", A.taylor(p, o), sigma.taylor(p, o)),
                                   min(A.max_order, sigma.max_order), (self.dim,))

    def frame_section(self, i):
        comps = ["0"] * self.rank
        comps[i] = "1"
        return Section(comps, self.dim)

    def anchor_matrix(self, points):
        return self.A(np.atleast_2d(points))

    def anchor_field(self, i):
        return self.anchor_of(self.frame_section(i))


class LieAlgebroid(AnchoredBundle):
    """Anchored bundle with structure functions ``c[k, i, j]``."""

    def __init__(self, anchor, structure, dim=None):
        super().__init__(anchor, dim)
        if not isinstance(structure, Field):
            structure = MatrixField(np.array(structure, dtype=object), self.dim)
        self.c = structure

    @classmethod
    def tangent(cls, n):
        A = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
        zero = Field.derived(n, lambda p, o: Jet.constant(np.zeros((p.shape[0], n, n, n)), n, o), 10, (n, n, n))
        return cls(A, zero, n)

    @classmethod
    def cotangent(cls, pi):
        """Cotangent algebroid of a Poisson bivector, frame ``dx^1..dx^n``.

        ``a(dx^i) = pi^sharp(dx^i)``, so ``A[j, i] = pi^{ij}``, and
        ``[dx^i, dx^j] = d pi^{ij}``, so ``c^k_{ij} = d_k pi^{ij}``.
        """
        n = pi.dim
        A = Field.derived(n, lambda p, o: pi.taylor(p, o).transpose(), pi.max_order, (n, n))

        def c(p, o):
            D = pi.taylor(p, o + 1).deriv()                 # D[i,j,k] = d_k pi^{ij}
            return D._map(lambda t: np.moveaxis(t, 3, 1))  # [k,i,j]
        C = Field.derived(n, c, pi.max_order - 1, (n, n, n))
        out = cls(A, C, n)
        out.pi = pi
        return out

    def bracket(self, sigma, tau):
        """``[sigma, tau]^k = sigma^i tau^j c^k_ij + a(sigma) tau^k - a(tau) sigma^k``."""
        A, c = self.A, self.c

        def fn(p, o):
            s, t = sigma.taylor(p, o + 1), tau.taylor(p, o + 1)
            Ao = A.taylor(p, o)
            so, to = s.truncate(o), t.truncate(o)
            out = contract("kj,j->k", contract("kij,i->kj", c.taylor(p, o), so), to)
            out = out + contract("l,kl->k", contract("li,i->l", Ao, so), t.deriv())
            out = out - contract("l,kl->k", contract("li,i->l", Ao, to), s.deriv())
            return out
        mo = min(sigma.max_order - 1, tau.max_order - 1, A.max_order, c.max_order)
        return Section.derived(self.dim, fn, mo, (self.rank,))

    def validate(self, points, tol=1e-8, strict=True):
        """Anchor morphism and Jacobi identity on frame sections at ``points``."""
        points = np.atleast_2d(points)
        r = self.rank
        Aj = self.A.taylor(points, 1)
        A, dA = Aj.val, Aj.d1                       # dA[z,l,i,m] = d_m A[l,i]
        cj = self.c.taylor(points, 1)
        c, dc = cj.val, cj.d1
        # [a(e_i), a(e_j)]^l = A[m,i] d_m A[l,j] - A[m,j] d_m A[l,i]
        br = np.einsum("zmi,zljm->zlij", A, dA) - np.einsum("zmj,zlim->zlij", A, dA)
        anchor_res = np.abs(np.einsum("zlk,zkij->zlij", A, c) - br).max(axis=(1, 2, 3))
        # Jacobi on frames: [e_i,[e_j,e_l]] = c^k_jl c^m_ik e_m + a(e_i)(c^m_jl) e_m
        t = np.einsum("zkjl,zmik->zmijl", c, c) + np.einsum("zsi,zmjls->zmijl", A, dc)
        jac = t + np.transpose(t, (0, 1, 3, 4, 2)) + np.transpose(t, (0, 1, 4, 2, 3))
        jac_res = np.abs(jac).max(axis=(1, 2, 3, 4))
        anti = np.abs(c + np.swapaxes(c, 2, 3)).max(axis=(1, 2, 3))
        res = {"anchor": anchor_res, "jacobi": jac_res, "antisymmetry": anti}
        if strict:
            for k, v in res.items():
                if np.max(v) > tol:
                    raise PreconditionError(f"Lie algebroid {k} check fails (residual {np.max(v):.2e})")
        del r
        return res


# -- transversality and pullbacks --------------------------------------------------


@dataclass
class TransversalCheck:
    transversal: bool
    min_singular_value: float
    tol: float

    def __bool__(self):
        return self.transversal


def check_transversal(E, N, tol=1e-8, samples=20, radius=0.3, rng=None, points=None):
    """``span a(E) + TN = TM`` at sampled points of N (rank of the normal rows of A)."""
    if N.k == 0:
        return TransversalCheck(True, np.inf, tol)
    rng = np.random.default_rng(0) if rng is None else rng
    pts = N.sample_N(samples, rng, radius) if points is None else np.atleast_2d(points)
    Ax = E.A(pts)[:, N.p:, :]
    sv = np.linalg.svd(Ax, compute_uv=False)
    smin = float(np.min(sv[:, N.k - 1])) if sv.shape[1] >= N.k else 0.0
    return TransversalCheck(smin > tol, smin, tol)


def _normal_solve_jet(E, N, w):
    """Jet (in w) of ``Xi(y) = A_x^T (A_x A_x^T)^{-1}`` evaluated at ``(y, 0)``."""
    p = N.p
    base = w * np.array([1.0] * p + [0.0] * N.k)
    A = E.A.jet(base)
    Ax = A[p:, :]                                       # (k, r)
    M = contract("ai,bi->ab", Ax, Ax)
    return contract("ai,ab->ib", Ax, M.inv())           # (r, k)


def euler_section(E, N, check=True):
    """``eps(y, x) = sum_j x^j xi_j(y)`` with ``xi_j`` the minimum-norm solution of ``A_x xi_j = e_j``."""
    if check:
        v = check_transversal(E, N)
        if not v:
            raise TransversalityError(f"N is not transverse to the anchor (min singular value "
                                      f"{v.min_singular_value:.2e})")
    p = N.p

    def fn(pts, o):
        w = Jet.coordinates(pts, o)
        Xi = _normal_solve_jet(E, N, w)
        return contract("ib,b->i", Xi, w[p:])
    return Section.derived(E.dim, fn, E.A.max_order, (E.rank,))


class PullbackBundle:
    """Frames of ``i^!E = a^{-1}(TN)`` over N and of ``p^!i^!E`` over the normal bundle."""

    def __init__(self, E, N, tol=1e-10):
        self.E = E
        self.N = N
        self.tol = tol
        self.fiber_dim = E.rank - N.k

    def iE_frame(self, points):
        """Orthonormal frame ``(B, r, r-k)`` of ``ker A_x`` at points of N."""
        pts = self.N.projection(np.atleast_2d(points))
        Ax = self.E.A(pts)[:, self.N.p:, :]
        _, s, vh = np.linalg.svd(Ax)
        rank = (s > self.tol * max(1.0, float(np.max(s, initial=0.0)))).sum(axis=1)
        if np.any(rank != self.N.k):
            raise TransversalityError("rank of the normal anchor block drops along N")
        return np.conj(np.swapaxes(vh[:, self.N.k:, :], 1, 2))

    def projector_jet(self, w):
        """Jet of the orthogonal projector onto ``ker A_x(y, 0)`` (smooth in y)."""
        p = self.N.p
        base = w * np.array([1.0] * p + [0.0] * self.N.k)
        Ax = self.E.A.jet(base)[p:, :]
        Xi = _normal_solve_jet(self.E, self.N, w)
        r = self.E.rank
        return Jet.constant(np.broadcast_to(np.eye(r), (w.batch, r, r)).copy(), w.ndir or 0, w.order) \
            - contract("ib,bj->ij", Xi, Ax)

    def frame(self, points):
        """Frame ``(B, r + n, r)`` of ``p^!i^!E`` at points ``w`` of the normal bundle.

        Columns are pairs ``(eta, u)`` with ``eta`` in ``i^!E`` at ``(y, 0)``
        and ``u`` tangent to the normal bundle with ``u_y = (A eta)_y``.
        """
        pts = np.atleast_2d(points)
        B = len(pts)
        E, N = self.E, self.N
        n, r, p = E.dim, E.rank, N.p
        eta = self.iE_frame(pts)
        A0 = E.A(N.projection(pts))
        out = np.zeros((B, r + n, r))
        out[:, :r, :r - N.k] = eta
        out[:, r:r + p, :r - N.k] = np.einsum("zyi,zia->zya", A0[:, :p, :], eta)
        for j in range(N.k):
            out[:, r + p + j, r - N.k + j] = 1.0
        return out


# -- lifts of the Euler-like section ---------------------------------------------------


class BracketLift:
    """``D_sigma = [sigma, .]`` for a Lie algebroid."""

    def __init__(self, L):
        self.E = L
        self.L = L

    def D(self, sigma, tau):
        return self.L.bracket(sigma, tau)

    def matrix(self, eps):
        return bracket_lift(self.L, eps)


class AnchorLift:
    """Torsion-free anchor lift ``D_sigma tau = a(sigma)tau - a(tau)sigma - S(sigma, tau)``.

    ``S(e_i, e_j)`` is the minimum-norm pointwise solution of
    ``a(S_ij) = T(e_i, e_j) = -[a(e_i), a(e_j)]`` (torsion of the trivial
    connection).  Solvability is checked; it fails for non-involutive anchors.
    """

    def __init__(self, E, tol=1e-8):
        self.E = E
        self.tol = tol

    def torsion(self, points):
        Aj = self.E.A.taylor(np.atleast_2d(points), 1)
        A, dA = Aj.val, Aj.d1
        br = np.einsum("zmi,zljm->zlij", A, dA) - np.einsum("zmj,zlim->zlij", A, dA)
        return -br, A

    def S(self, points):
        T, A = self.torsion(points)
        pinv = np.linalg.pinv(A)
        S = np.einsum("zkl,zlij->zkij", pinv, T)
        res = np.abs(np.einsum("zlk,zkij->zlij", A, S) - T).max(axis=(1, 2, 3))
        if np.max(res, initial=0.0) > self.tol:
            raise PreconditionError(f"torsion admits no lift (residual {np.max(res):.2e}); "
                                    "the anchor image is not involutive")
        return S

    def S_field(self):
        r = self.E.rank

        def fn(p, o):
            if o:
                raise PreconditionError("torsion lift is evaluated pointwise only")
            return Jet(self.S(p))
        return Field.derived(self.E.dim, fn, 0, (r, r, r))

    def D(self, sigma, tau):
        A = self.E.A
        Sf = self.S_field()

        def fn(p, o):
            s, t = sigma.taylor(p, 1), tau.taylor(p, 1)
            Ao = A(p)
            S = Sf(p)
            a_s = np.einsum("zli,zi->zl", Ao, s.val)
            a_t = np.einsum("zli,zi->zl", Ao, t.val)
            val = (np.einsum("zl,zkl->zk", a_s, t.d1) - np.einsum("zl,zkl->zk", a_t, s.d1)
                   - np.einsum("zkij,zi,zj->zk", S, s.val, t.val))
            return Jet(val)
        return Section.derived(self.E.dim, fn, 0, (self.E.rank,))

    def matrix(self, eps):
        """``C[k, i] = -(a(e_i) eps^k) - eps^j S^k_{ji}``."""
        A = self.E.A
        Sf = self.S_field()

        def fn(p, o):
            e = eps.taylor(p, 1)
            Ao = A(p)
            val = -np.einsum("zli,zkl->zki", Ao, e.d1) - np.einsum("zkji,zj->zki", Sf(p), e.val)
            return Jet(val)
        return Field.derived(self.E.dim, fn, 0, (self.E.rank, self.E.rank))


def anchor_lift_connection(E, tol=1e-8, samples=20, rng=None, radius=0.3, center=None):
    lift = AnchorLift(E, tol)
    rng = np.random.default_rng(0) if rng is None else rng
    c = np.zeros(E.dim) if center is None else np.asarray(center, dtype=float)
    pts = c + radius * rng.uniform(-1, 1, size=(samples, E.dim))
    lift.S(pts)  # raises if not involutive
    return lift


def bracket_lift(L, eps):
    """Matrix field ``C[k, i] = eps^j c^k_{ji} - a(e_i)(eps^k)`` of ``D_eps e_i``."""
    A, c = L.A, L.c

    def fn(p, o):
        e = eps.taylor(p, o + 1)
        eo = e.truncate(o)
        out = contract("kji,j->ki", c.taylor(p, o), eo)
        return out - contract("li,kl->ki", A.taylor(p, o), e.deriv())
    return Field.derived(L.dim, fn, min(eps.max_order - 1, c.max_order, A.max_order), (L.rank, L.rank))


def lift_contracts(E, D, sigma, tau, f, points):
    """Residuals of the derivation, anchor and ``f sigma`` rules of a lift ``D``."""
    points = np.atleast_2d(points)
    Ds = D(sigma, tau)(points)
    # derivation: D_sigma(f tau) = f D_sigma tau + (a(sigma) f) tau
    X = E.anchor_of(sigma)
    fv = f(points)
    df = f.taylor(points, 1).d1
    Xf = np.einsum("zl,zl->z", X(points), df)
    lhs = D(sigma, tau * f)(points)
    der = np.abs(lhs - fv[:, None] * Ds - Xf[:, None] * tau(points)).max(axis=1)
    # anchor: a(D_sigma tau) = [a(sigma), a(tau)]
    aD = np.einsum("zli,zi->zl", E.A(points), Ds)
    br = lie_bracket(X, E.anchor_of(tau))(points)
    anc = np.abs(aD - br).max(axis=1)
    # D_{f sigma} tau = f D_sigma tau - (a(tau) f) sigma
    Yf = np.einsum("zl,zl->z", E.anchor_of(tau)(points), df)
    lhs = D(sigma * f, tau)(points)
    fs = np.abs(lhs - fv[:, None] * Ds + Yf[:, None] * sigma(points)).max(axis=1)
    return {"derivation": der, "anchor": anc, "f_sigma": fs}


# -- normal form ------------------------------------------------------------------------


class AlgebroidNormalForm:
    """The bundle map ``psi_tilde: p^!i^!E -> E`` over the tubular embedding ``psi``."""

    def __init__(self, E, N, lift=None, eps=None, cfg=DEFAULT, s_max=40.0, radius=0.3, chart=None):
        self.E, self.N, self.cfg, self.s_max, self.chart = E, N, cfg, s_max, chart
        if lift is None:
            lift = BracketLift(E) if isinstance(E, LieAlgebroid) else anchor_lift_connection(E)
        self.lift = lift
        self.eps = euler_section(E, N) if eps is None else eps
        self.X = E.anchor_of(self.eps)
        self.emb = linearize(self.X, N, cfg, chart, radius=radius)
        self.C = lift.matrix(self.eps)
        self.pull = PullbackBundle(E, N)

    # transport of the linear lift -------------------------------------------------------

    def _rhs(self, s, state):
        m, J, Lam = state
        Xj = self.X.taylor(m, 1)
        C = self.C(m)
        return (Xj.val, np.einsum("zij,zjk->zik", Xj.d1, J), -np.einsum("zij,zjk->zik", C, Lam))

    def transport(self, m, s):
        """``(Phi_s(m), T Phi_s, Lambda_s)`` for ``s <= 0`` (``s = log t``)."""
        m = np.atleast_2d(m)
        B, n, r = len(m), self.E.dim, self.E.rank
        state = (m.copy(), np.broadcast_to(np.eye(n), (B, n, n)).copy(),
                 np.broadcast_to(np.eye(r), (B, r, r)).copy())
        out, _ = integrate_state(self._rhs, state, 0.0, s, self.cfg, self.chart)
        return out

    def transport_limit(self, m, tol=1e-9):
        """``t -> 0`` limit, integrating in unit chunks until the frame settles."""
        m = np.atleast_2d(m)
        B, n, r = len(m), self.E.dim, self.E.rank
        state = (m.copy(), np.broadcast_to(np.eye(n), (B, n, n)).copy(),
                 np.broadcast_to(np.eye(r), (B, r, r)).copy())
        s = 0.0
        while s > -self.s_max:
            new, _ = integrate_state(self._rhs, state, s, s - 1.0, self.cfg, self.chart)
            dL = np.max(np.abs(new[2] - state[2]))
            dJ = np.max(np.abs(new[1] - state[1]))
            state, s = new, s - 1.0
            if not np.all(np.isfinite(dL)) or np.max(np.abs(state[2])) > 1e8:
                raise ConvergenceError("lifted transport diverges; the lift is not Euler-like along i^!E")
            if dL < tol and dJ < tol:
                return state
        raise ConvergenceError(f"lifted transport did not settle by s = -{self.s_max}")

    # the bundle maps ---------------------------------------------------------------------

    def direct_map(self, w):
        """Matrices ``(B, r + n, r)`` of ``xi -> (lambda_0(xi), T psi^{-1} a(xi))`` at ``m = psi(w)``."""
        w = np.atleast_2d(w)
        j = self.emb.taylor(w, 1)
        m = j.val
        base, _, Lam0 = self.transport_limit(m)
        u = np.linalg.solve(j.d1, self.E.A(m))
        self._last = {"m": m, "base": base, "Dpsi": j.d1}
        return np.concatenate([Lam0, u], axis=1)

    def psi_tilde(self, w):
        """``psi_tilde`` at ``w`` as the pseudo-inverse of the direct map, ``(B, r, r + n)``."""
        return np.linalg.pinv(self.direct_map(w))

    # checks ------------------------------------------------------------------------------

    def image_residual(self, w):
        """Distance of the direct map's image from ``p^!i^!E`` (and of its base point from ``p(w)``)."""
        from .dirac import subspace_distance
        w = np.atleast_2d(w)
        M = self.direct_map(w)
        base_res = np.abs(self._last["base"] - self.N.projection(w)).max(axis=1)
        F = self.pull.frame(w)
        return np.maximum(subspace_distance(M, F), base_res)

    def anchor_residual(self, m, ts=(1.0, 0.5, 0.25)):
        """``|a(lambda_t xi) - T lambda_t a(xi)|`` for the listed t and the limit t -> 0."""
        m = np.atleast_2d(m)
        A0 = self.E.A(m)
        res = np.zeros(len(m))
        states = [self.transport(m, np.log(t)) for t in ts] + [self.transport_limit(m)]
        for base, J, Lam in states:
            lhs = np.einsum("zij,zjk->zik", self.E.A(base), Lam)
            rhs = np.einsum("zij,zjk->zik", J, A0)
            res = np.maximum(res, np.abs(lhs - rhs).max(axis=(1, 2)))
        return res

    def tangent_residual(self, w):
        """For ``E = TM``: ``|psi_tilde(eta, u) - T psi(u)|`` on a frame of ``p^!i^!E``."""
        w = np.atleast_2d(w)
        F = self.pull.frame(w)
        pt = self.psi_tilde(w)
        lhs = np.einsum("zia,zab->zib", pt, F)
        r = self.E.rank
        rhs = np.einsum("zij,zjb->zib", self._last["Dpsi"], F[:, r:, :])
        return np.abs(lhs - rhs).max(axis=(1, 2))

    def bracket_residual(self, w, h=1e-3):
        """``|[psi_tilde s_a, psi_tilde s_b]_E - psi_tilde [s_a, s_b]|`` on a frame of ``p^!i^!E``.

        The frame is ``s_alpha = (P v_alpha, horizontal lift)`` and
        ``s_j = (0, d/dx^j)``; derivatives of the transported sections are
        taken by fourth-order central differences in w.
        """
        L = self.E
        if not isinstance(L, LieAlgebroid):
            raise PreconditionError("bracket preservation needs a Lie algebroid")
        w = np.atleast_2d(w)
        B = len(w)
        n, r, p, k = L.dim, L.rank, self.N.p, self.N.k
        q = r - k
        # fixed vectors spanning ker A_x at the centre
        v = self.pull.iE_frame(self.N.center[None, :])[0]          # (r, q)

        def frame_sections(pts, order):
            wj = Jet.coordinates(pts, order)
            P = self.pull.projector_jet(wj)
            eta = contract("ij,ja->ia", P, v)                        # (r, q)
            base = wj * np.array([1.0] * p + [0.0] * k)
            A0 = L.A.jet(base)
            u = contract("yi,ia->ya", A0[:p, :], eta)                # (p, q)
            return eta, u

        def sections(pts):
            eta, u = frame_sections(pts, 0)
            S = np.zeros((len(pts), r + n, r))
            S[:, :r, :q] = eta.val
            S[:, r:r + p, :q] = u.val
            for j in range(k):
                S[:, r + p + j, q + j] = 1.0
            return S

        # stencil evaluation of E-sections psi_tilde s_a as functions of w
        offs = [(-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)]
        stencil = [w]
        for l in range(n):
            for o, _ in offs:
                e = np.zeros(n)
                e[l] = o * h
                stencil.append(w + e)
        allw = np.concatenate(stencil)
        pt = self.psi_tilde(allw)
        vals = np.einsum("zia,zab->zib", pt, sections(allw))       # (.., r, r)
        vals = vals.reshape(len(stencil), B, r, r)
        S0 = vals[0]
        m = self._last["m"][:B]
        Dpsi = self._last["Dpsi"][:B]
        dS = np.zeros((B, r, r, n))                                  # d_w S[i, a] / d w_l
        idx = 1
        for l in range(n):
            for o, c in offs:
                dS[..., l] += c * vals[idx] / h
                idx += 1
        # gradients in m: grad_m f = Dpsi^{-T} grad_w f
        dSm = np.einsum("ziaw,zwl->zial", dS, np.linalg.inv(Dpsi))
        A = L.A(m)
        c = L.c(m)
        aS = np.einsum("zli,zia->zla", A, S0)                         # anchors of the sections
        lhs = (np.einsum("zkij,zia,zjb->zkab", c, S0, S0)
               + np.einsum("zla,zkbl->zkab", aS, dSm) - np.einsum("zlb,zkal->zkab", aS, dSm))
        # brackets in p^!i^!E: only the (alpha, beta) block is nonzero
        eta, u = frame_sections(w, 1)
        base = w * np.array([1.0] * p + [0.0] * k)
        A0 = L.A(base)
        c0 = L.c(base)
        aeta = np.einsum("zli,zia->zla", A0, eta.val)
        deta = eta.d1                                                # (B, r, q, n)
        br_eta = (np.einsum("zkij,zia,zjb->zkab", c0, eta.val, eta.val)
                  + np.einsum("zla,zkbl->zkab", aeta, deta) - np.einsum("zlb,zkal->zkab", aeta, deta))
        du = u.d1[..., :p]                                           # y-derivatives
        br_u = np.einsum("zla,zkbl->zkab", u.val, du) - np.einsum("zlb,zkal->zkab", u.val, du)
        rhs_sec = np.zeros((B, r + n, r, r))
        rhs_sec[:, :r, :q, :q] = br_eta
        rhs_sec[:, r:r + p, :q, :q] = br_u
        rhs = np.einsum("zic,zcab->ziab", pt[:B], rhs_sec)
        return np.abs(lhs - rhs).max(axis=(1, 2, 3))


def algebroid_normal_form(E, N, eps=None, lift=None, cfg=DEFAULT, radius=0.3, chart=None):
    """Build the normal-form bundle map (see :class:`AlgebroidNormalForm`)."""
    if isinstance(E, LieAlgebroid) and lift is None:
        E.validate(N.sample_ball(10, np.random.default_rng(3), radius))
    return AlgebroidNormalForm(E, N, lift, eps, cfg, radius=radius, chart=chart)
