"""Coordinate tensor calculus on an open subset of R^n.

Every field exposes ``taylor(points, order)``: a :class:`Jet` holding its
components at a batch of points together with coordinate derivatives up to
``order``.  Fields built from expressions support order 2; fields derived by
differentiation lose one order per derivative taken, which is tracked in
``max_order``.

Index conventions (fixed throughout the package):

* forms are stored by full antisymmetric component arrays,
  ``omega[i, j] = omega(d_i, d_j)``;
* ``sharp(pi, mu)^j = mu_i pi^{ij}``, i.e. ``pi^sharp(mu) = pi(mu, .)``;
* ``interior_product(X, eta)`` contracts the first slot, so that
  ``i_X1 i_X2 eta = eta(X2, X1, .)``.
"""

import itertools

import numpy as np

from . import expr as _expr
from .errors import JetOrderError
from .jet import Jet, contract

# -- field base -------------------------------------------------------------


class Field:
    """Smooth tensor field on a chart, evaluated through jets."""

    kind = "field"

    def __init__(self, dim, fn, max_order=2, shape=None, complex_mode=False):
        self.dim = dim
        self._fn = fn
        self.max_order = max_order
        self._shape = shape
        self.complex_mode = complex_mode
        self._exprs = None

    @classmethod
    def derived(cls, dim, fn, max_order, shape=None, complex_mode=False):
        obj = cls.__new__(cls)
        Field.__init__(obj, dim, fn, max_order, shape, complex_mode)
        return obj

    def tensor_shape(self):
        return self._shape

    def taylor(self, points, order=0):
        if order > self.max_order:
            raise JetOrderError(f"{self.kind} supports derivatives up to order {self.max_order}, "
                                f"{order} requested")
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self._fn(points, order)

    def cached(self, size=4):
        """Same field, remembering the last few ``taylor`` results."""
        memo = {}

        def fn(p, o):
            key = (p.tobytes(), p.shape, o)
            if key not in memo:
                if len(memo) >= size:
                    memo.pop(next(iter(memo)))
                memo[key] = self.taylor(p, o)
            return memo[key]
        return type(self).derived(self.dim, fn, self.max_order, self._shape, self.complex_mode)

    def jet(self, x):
        """Evaluate on a coordinate jet ``x`` (chain rule applied)."""
        if self._exprs is not None:
            return _eval_exprs(self._exprs, self._shape, x, self.complex_mode)
        return self.taylor(x.val, x.order).compose(x)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        out = self.taylor(np.atleast_2d(pts), 0).val
        return out[0] if pts.ndim == 1 else out

    # arithmetic ------------------------------------------------------------

    def _combine(self, other, op):
        if isinstance(other, Field):
            mo = min(self.max_order, other.max_order)
            cm = self.complex_mode or other.complex_mode
            return type(self).derived(self.dim, lambda p, o: op(self.taylor(p, o), other.taylor(p, o)),
                                      mo, self._shape, cm)
        return type(self).derived(self.dim, lambda p, o: op(self.taylor(p, o), other),
                                  self.max_order, self._shape, self.complex_mode)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self):
        return type(self).derived(self.dim, lambda p, o: -self.taylor(p, o), self.max_order,
                                  self._shape, self.complex_mode)

    def __mul__(self, c):
        if isinstance(c, ScalarField):
            r = len(self._shape or ())

            def fn(p, o):
                f = c.taylor(p, o)
                t = self.taylor(p, o)
                return contract(f"z,z{_letters(r)}->z{_letters(r)}".replace("z", ""), f, t)
            return type(self).derived(self.dim, fn, min(self.max_order, c.max_order), self._shape,
                                      self.complex_mode or c.complex_mode)
        cm = self.complex_mode or np.iscomplexobj(c)
        return type(self).derived(self.dim, lambda p, o: self.taylor(p, o) * c, self.max_order,
                                  self._shape, cm)

    __rmul__ = __mul__

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, max_order={self.max_order})"


def _letters(r):
    return "abcdefgh"[:r]


def _as_expr(e, dim, complex_mode):
    if e is None:
        return None
    if isinstance(e, _expr.Expr):
        return e
    if isinstance(e, (int, float)) and e == 0:
        return None
    if isinstance(e, str) and e.strip() in ("0", "0.0"):
        return None
    if isinstance(e, complex):
        return _expr.constant(e, dim)
    return _expr.parse(str(e), dim, complex_mode)


def _eval_exprs(exprs, shape, x, complex_mode):
    """Evaluate an object array of expressions (``None`` = 0) on a jet."""
    B = x.batch
    comps = {}
    dtype = float
    for idx in np.ndindex(*shape):
        e = exprs[idx]
        if e is None:
            continue
        j = _expr.evaluate(e, x, x.order, complex_mode or e.complex_mode)
        comps[idx] = j
        if np.iscomplexobj(j.val):
            dtype = complex
    k = x.ndir or 0
    parts = [np.zeros((B,) + tuple(shape), dtype)]
    if x.order >= 1:
        parts.append(np.zeros((B,) + tuple(shape) + (k,), dtype))
    if x.order >= 2:
        parts.append(np.zeros((B,) + tuple(shape) + (k, k), dtype))
    for idx, j in comps.items():
        for p, arr in enumerate(j.parts()):
            parts[p][(slice(None),) + idx] = arr
    return Jet(*parts)


class ExprField(Field):
    """A field whose components are expressions in the chart coordinates."""

    def _init_exprs(self, dim, exprs, shape, complex_mode):
        Field.__init__(self, dim, None, 2, shape, complex_mode)
        self._exprs = exprs
        self._fn = lambda p, o: _eval_exprs(exprs, shape, Jet.coordinates(p, o), complex_mode)

    @property
    def exprs(self):
        return self._exprs


def _vector_exprs(components, dim, complex_mode):
    components = list(components)
    if len(components) != dim:
        raise ValueError(f"expected {dim} components, got {len(components)}")
    arr = np.empty((dim,), dtype=object)
    for i, c in enumerate(components):
        arr[i] = _as_expr(c, dim, complex_mode)
    return arr


def _antisym_exprs(components, dim, rank, complex_mode):
    """Build a full antisymmetric object array from independent components.

    ``components`` is either a dict keyed by strictly increasing index tuples
    (0-based) or a nested list holding the full array (only the strictly
    increasing entries are read).
    """
    shape = (dim,) * rank
    arr = np.empty(shape, dtype=object)
    if isinstance(components, dict):
        items = components.items()
    else:
        full = np.array(components, dtype=object)
        if full.shape != shape:
            raise ValueError(f"expected component array of shape {shape}")
        items = ((idx, full[idx]) for idx in itertools.combinations(range(dim), rank))
    for idx, c in items:
        idx = tuple(int(i) for i in idx)
        if list(idx) != sorted(set(idx)):
            raise ValueError(f"component index {idx} must be strictly increasing")
        e = _as_expr(c, dim, complex_mode)
        if e is None:
            continue
        neg = _expr.Expr(_expr.Neg(e.root), dim, "", e.complex_mode)
        for perm in itertools.permutations(range(rank)):
            sign = _perm_sign(perm)
            arr[tuple(idx[q] for q in perm)] = e if sign > 0 else neg
    return arr


def _perm_sign(perm):
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


class ScalarField(ExprField):
    kind = "scalar"

    def __init__(self, expression, dim, complex_mode=False):
        arr = np.empty((), dtype=object)
        arr[()] = _as_expr(expression, dim, complex_mode)
        self._init_exprs(dim, arr, (), complex_mode)

    def tensor_shape(self):
        return ()


class VectorField(ExprField):
    kind = "vector"

    def __init__(self, components, dim=None, complex_mode=False):
        components = list(components)
        dim = dim or len(components)
        self._init_exprs(dim, _vector_exprs(components, dim, complex_mode), (dim,), complex_mode)

    def tensor_shape(self):
        return (self.dim,)


class OneForm(VectorField):
    kind = "oneform"


class Section(ExprField):
    """Section of a trivial bundle ``chart x R^r`` in the standard frame."""

    kind = "section"

    def __init__(self, components, dim, complex_mode=False):
        components = list(components)
        arr = np.empty((len(components),), dtype=object)
        for i, c in enumerate(components):
            arr[i] = _as_expr(c, dim, complex_mode)
        self._init_exprs(dim, arr, (len(components),), complex_mode)


class MatrixField(ExprField):
    kind = "matrix"

    def __init__(self, rows, dim, complex_mode=False):
        full = np.array(rows, dtype=object)
        arr = np.empty(full.shape, dtype=object)
        for idx in np.ndindex(*full.shape):
            arr[idx] = _as_expr(full[idx], dim, complex_mode)
        self._init_exprs(dim, arr, full.shape, complex_mode)


class TwoForm(ExprField):
    kind = "twoform"

    def __init__(self, components, dim, complex_mode=False):
        self._init_exprs(dim, _antisym_exprs(components, dim, 2, complex_mode), (dim, dim), complex_mode)

    def tensor_shape(self):
        return (self.dim, self.dim)


class Bivector(TwoForm):
    kind = "bivector"


class ThreeForm(ExprField):
    kind = "threeform"

    def __init__(self, components, dim, complex_mode=False):
        self._init_exprs(dim, _antisym_exprs(components, dim, 3, complex_mode), (dim,) * 3, complex_mode)

    def tensor_shape(self):
        return (self.dim,) * 3


_KIND_SHAPES = {
    ScalarField: lambda n: (),
    VectorField: lambda n: (n,),
    OneForm: lambda n: (n,),
    TwoForm: lambda n: (n, n),
    Bivector: lambda n: (n, n),
    ThreeForm: lambda n: (n, n, n),
}


def derived(cls, dim, fn, max_order, complex_mode=False):
    return cls.derived(dim, fn, max_order, _KIND_SHAPES[cls](dim), complex_mode)


def zero_field(cls, dim):
    shape = _KIND_SHAPES[cls](dim)

    def fn(p, o):
        return Jet.constant(np.zeros((p.shape[0],) + shape), dim, o)
    return cls.derived(dim, fn, 10, shape)


def constant_field(cls, value, dim):
    value = np.asarray(value)
    shape = value.shape

    def fn(p, o):
        return Jet.constant(np.broadcast_to(value, (p.shape[0],) + shape).copy(), p.shape[1], o)
    return cls.derived(dim, fn, 10, shape, np.iscomplexobj(value))


def _field_cls(f):
    for cls in (ScalarField, Bivector, OneForm, ThreeForm, TwoForm, VectorField):
        if isinstance(f, cls):
            return cls
    return type(f)


def _cm(*fields):
    return any(getattr(f, "complex_mode", False) for f in fields)


# -- calculus ---------------------------------------------------------------


def exterior_derivative(form):
    """Exterior derivative of a scalar, 1-form or 2-form."""
    n = form.dim
    mo = form.max_order - 1
    if isinstance(form, ScalarField):
        return derived(OneForm, n, lambda p, o: form.taylor(p, o + 1).deriv(), mo, form.complex_mode)
    if isinstance(form, TwoForm) and not isinstance(form, Bivector):
        def fn(p, o):
            D = form.taylor(p, o + 1).deriv()   # D[i,j,l] = d_l w_ij
            # (dw)_{ijk} = d_k w_ij + d_i w_jk + d_j w_ki
            return (D + D._map(lambda t: np.moveaxis(t, 3, 1))
                    + D._map(lambda t: np.moveaxis(t, 1, 3)))
        return derived(ThreeForm, n, fn, mo, form.complex_mode)
    if isinstance(form, OneForm):
        def fn(p, o):
            D = form.taylor(p, o + 1).deriv()  # D[j,i] = d_i a_j
            return D.transpose() - D            # [i,j] = d_i a_j - d_j a_i
        return derived(TwoForm, n, fn, mo, form.complex_mode)
    raise TypeError(f"exterior derivative not defined for {type(form).__name__}")


def interior_product(X, form):
    """Contraction of ``X`` into the first slot of ``form``."""
    n = X.dim
    mo = min(X.max_order, form.max_order)
    cm = _cm(X, form)
    if isinstance(form, ThreeForm):
        return derived(TwoForm, n, lambda p, o: contract("i,ijk->jk", X.taylor(p, o), form.taylor(p, o)), mo, cm)
    if isinstance(form, TwoForm) and not isinstance(form, Bivector):
        return derived(OneForm, n, lambda p, o: contract("i,ij->j", X.taylor(p, o), form.taylor(p, o)), mo, cm)
    if isinstance(form, OneForm):
        return derived(ScalarField, n, lambda p, o: contract("i,i->", X.taylor(p, o), form.taylor(p, o)), mo, cm)
    raise TypeError(f"interior product not defined for {type(form).__name__}")


def directional(X, f):
    """Derivative of a scalar (or any tensor, componentwise) along ``X``."""
    shape = f.tensor_shape() if f.tensor_shape() is not None else ()
    r = len(shape)
    L = _letters(r)

    def fn(p, o):
        return contract(f"i,{L}i->{L}", X.taylor(p, o), f.taylor(p, o + 1).deriv())
    return type(f).derived(f.dim, fn, min(X.max_order, f.max_order - 1), shape, _cm(X, f))


def lie_bracket(X, Y):
    """``[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i``."""
    def fn(p, o):
        Xt, Yt = X.taylor(p, o + 1), Y.taylor(p, o + 1)
        return (contract("j,ij->i", Xt.truncate(o), Yt.deriv())
                - contract("j,ij->i", Yt.truncate(o), Xt.deriv()))
    return derived(VectorField, X.dim, fn, min(X.max_order, Y.max_order) - 1, _cm(X, Y))


def lie_derivative(X, T):
    """Lie derivative of a scalar, vector field or form (Cartan formula for forms)."""
    if isinstance(T, ScalarField):
        return directional(X, T)
    if isinstance(T, (OneForm,)):
        return exterior_derivative(interior_product(X, T)) + interior_product(X, exterior_derivative(T))
    if isinstance(T, TwoForm) and not isinstance(T, Bivector):
        return exterior_derivative(interior_product(X, T)) + interior_product(X, exterior_derivative(T))
    if isinstance(T, VectorField):
        return lie_bracket(X, T)
    raise TypeError(f"Lie derivative not implemented for {type(T).__name__}")


def lie_derivative_flow(X, T, points, h=1e-3):
    """Lie derivative of a form from its definition ``d/ds|0 Phi_s^* T``.

    Uses the standard flow of ``X`` (module :mod:`eulerlike.flow`) with a
    fourth-order central difference in ``s``.  Only meant as a cross-check.
    """
    from .flow import FlowConfig, flow_map

    cfg = FlowConfig()
    points = np.atleast_2d(points)
    vals = []
    for s in (-2 * h, -h, h, 2 * h):
        phi = flow_map(X, s, cfg)
        vals.append(pullback_form(phi, T)(points))
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


def sharp(pi, mu):
    """``pi^sharp(mu)^j = mu_i pi^{ij}``."""
    return derived(VectorField, pi.dim, lambda p, o: contract("i,ij->j", mu.taylor(p, o), pi.taylor(p, o)),
                   min(pi.max_order, mu.max_order), _cm(pi, mu))


def flat(omega, X):
    """``omega^flat(X) = i_X omega``."""
    return interior_product(X, omega)


def jacobiator(pi):
    """Evaluator of ``J^{ijk} = sum_l pi^{li} d_l pi^{jk} + cyclic``.

    The result is a field of 3-tensors (order ``pi.max_order - 1``); it
    vanishes identically iff ``pi`` is Poisson.
    """
    def fn(p, o):
        P = pi.taylor(p, o + 1)
        D = P.deriv()                                   # D[j,k,l] = d_l pi^{jk}
        t = contract("li,jkl->ijk", P.truncate(o), D)   # pi^{li} d_l pi^{jk}
        t1 = t
        t2 = t._map(lambda a: np.moveaxis(a, 1, 3))     # [i,j,k] <- t[j,k,i]
        t3 = t._map(lambda a: np.moveaxis(a, 3, 1))     # [i,j,k] <- t[k,i,j]
        return t1 + t2 + t3
    return derived(ThreeForm, pi.dim, fn, pi.max_order - 1, pi.complex_mode)


def schouten_norm(pi, points):
    """Max absolute jacobiator entry over ``points``."""
    return float(np.max(np.abs(jacobiator(pi)(np.atleast_2d(points)))))


# -- maps ---------------------------------------------------------------------


class SmoothMap:
    """Smooth map between coordinate charts, evaluated through jets.

    ``taylor(points, order)`` returns a jet of shape ``(target_dim,)`` in the
    coordinate directions of the source.  ``jacobian_taylor(points, order)``
    returns the jet of the Jacobian matrix ``J[i, a] = d_a phi^i``.
    """

    def __init__(self, source_dim, target_dim, fn, max_order=2, jac_fn=None):
        self.source_dim = source_dim
        self.target_dim = target_dim
        self._fn = fn
        self._jac_fn = jac_fn
        self.max_order = max_order

    def taylor(self, points, order=0):
        if order > self.max_order:
            raise JetOrderError(f"map supports order {self.max_order}, {order} requested")
        return self._fn(np.atleast_2d(np.asarray(points, dtype=float)), order)

    @property
    def jacobian_order(self):
        return self.max_order - 1 if self._jac_fn is None else self.max_order

    def jacobian_taylor(self, points, order=0):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self._jac_fn is not None:
            return self._jac_fn(points, order)
        return self.taylor(points, order + 1).deriv()

    def jet(self, x):
        return self.taylor(x.val, x.order).compose(x)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        out = self.taylor(np.atleast_2d(pts), 0).val
        return out[0] if pts.ndim == 1 else out

    def jacobian(self, points):
        pts = np.asarray(points, dtype=float)
        out = self.jacobian_taylor(np.atleast_2d(pts), 0).val
        return out[0] if pts.ndim == 1 else out

    @classmethod
    def from_exprs(cls, components, source_dim):
        components = list(components)
        exprs = np.empty((len(components),), dtype=object)
        for i, c in enumerate(components):
            exprs[i] = _as_expr(c, source_dim, False)
        return cls(source_dim, len(components),
                   lambda p, o: _eval_exprs(exprs, (len(components),), Jet.coordinates(p, o), False))

    @classmethod
    def affine(cls, matrix, offset=None):
        A = np.atleast_2d(np.asarray(matrix, dtype=float))
        m, n = A.shape
        b = np.zeros(m) if offset is None else np.asarray(offset, dtype=float)

        def fn(p, o):
            val = p @ A.T + b
            if o == 0:
                return Jet(val)
            d1 = np.broadcast_to(A, (p.shape[0], m, n)).copy()
            if o == 1:
                return Jet(val, d1)
            return Jet(val, d1, np.zeros((p.shape[0], m, n, n)))

        def jac(p, o):
            return Jet.constant(np.broadcast_to(A, (p.shape[0], m, n)).copy(), n, o)
        return cls(n, m, fn, 2, jac)

    @classmethod
    def identity(cls, n):
        return cls.affine(np.eye(n))

    def __matmul__(self, inner):
        """Composition ``self o inner``."""
        outer = self

        def fn(p, o):
            return outer.taylor(inner.taylor(p, 0).val, o).compose(inner.taylor(p, o)) if o else \
                outer.taylor(inner.taylor(p, 0).val, 0)
        return SmoothMap(inner.source_dim, outer.target_dim, fn, min(self.max_order, inner.max_order))


def pullback_form(phi, form):
    """Pullback of a scalar, 1-, 2- or 3-form along ``phi``."""
    n = phi.source_dim
    cm = form.complex_mode

    def at_phi(p, o):
        y = phi.taylor(p, o)
        return form.jet(y) if o else form.taylor(y.val, 0)

    mo = min(form.max_order, phi.max_order, phi.jacobian_order)
    if isinstance(form, ScalarField):
        return derived(ScalarField, n, at_phi, mo, cm)
    if isinstance(form, ThreeForm):
        def fn(p, o):
            J = phi.jacobian_taylor(p, o)
            t = contract("ijk,ia->ajk", at_phi(p, o), J)
            t = contract("ajk,jb->abk", t, J)
            return contract("abk,kc->abc", t, J)
        return derived(ThreeForm, n, fn, mo, cm)
    if isinstance(form, TwoForm) and not isinstance(form, Bivector):
        def fn(p, o):
            J = phi.jacobian_taylor(p, o)
            return contract("aj,jb->ab", contract("ij,ia->aj", at_phi(p, o), J), J)
        return derived(TwoForm, n, fn, mo, cm)
    if isinstance(form, OneForm):
        def fn(p, o):
            return contract("i,ia->a", at_phi(p, o), phi.jacobian_taylor(p, o))
        return derived(OneForm, n, fn, mo, cm)
    raise TypeError(f"cannot pull back a {type(form).__name__}")


# -- charts, transversals ------------------------------------------------------


class Chart:
    """An open subset of R^n given by an optional box or ball guard."""

    def __init__(self, dim, box=None, ball=None):
        if dim < 1:
            raise ValueError("chart dimension must be at least 1")
        self.dim = dim
        self.box = None if box is None else np.asarray(box, dtype=float)
        self.ball = None
        if ball is not None:
            c, r = ball
            self.ball = (np.asarray(c, dtype=float), float(r))

    def contains(self, points):
        pts = np.atleast_2d(points)
        ok = np.all(np.isfinite(pts), axis=1)
        if self.box is not None:
            ok &= np.all((pts >= self.box[:, 0]) & (pts <= self.box[:, 1]), axis=1)
        if self.ball is not None:
            c, r = self.ball
            ok &= np.linalg.norm(pts - c, axis=1) < r
        return ok


class Transversal:
    """Adapted chart ``w = (y^1..y^p, x^1..x^k)`` with ``N = {x = 0}``.

    ``center`` is a point of N around which samples are drawn.
    """

    def __init__(self, dim, p, center=None, chart=None):
        if not 0 <= p <= dim:
            raise ValueError("need 0 <= p <= dim")
        self.dim = dim
        self.p = p
        self.k = dim - p
        self.chart = chart or Chart(dim)
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float).copy()
        if np.any(c[p:] != 0):
            raise ValueError("center must lie on N (normal coordinates zero)")
        self.center = c

    def kappa(self, t, w):
        w = np.array(w, dtype=float, copy=True)
        w[..., self.p:] *= t
        return w

    def kappa_map(self, t):
        return SmoothMap.affine(np.diag([1.0] * self.p + [t] * self.k))

    def projection(self, w):
        """``i o p``: ``(y, x) -> (y, 0)``."""
        return self.kappa(0.0, w)

    def projection_map(self):
        return self.kappa_map(0.0)

    def euler_field(self):
        comps = ["0"] * self.p + [f"x{self.p + j + 1}" for j in range(self.k)]
        return VectorField(comps, self.dim)

    def sample_N(self, count, rng, radius=0.3):
        pts = np.tile(self.center, (count, 1))
        if self.p:
            pts[:, :self.p] += _ball(rng, count, self.p, radius)
        return pts

    def sample_ball(self, count, rng, radius=0.3):
        return self.center + _ball(rng, count, self.dim, radius)


def _ball(rng, count, d, radius):
    u = rng.normal(size=(count, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / d)
    return u * r[:, None]


class AffineChart:
    """Affine change of coordinates ``m = origin + F w``.

    ``pull`` expresses a field given in m-coordinates in w-coordinates; used
    to present a submanifold that is an affine subspace as ``{x = 0}``.
    """

    def __init__(self, F, origin=None):
        self.F = np.asarray(F, dtype=float)
        n = self.F.shape[0]
        self.origin = np.zeros(n) if origin is None else np.asarray(origin, dtype=float)
        self.Finv = np.linalg.inv(self.F)
        self.map = SmoothMap.affine(self.F, self.origin)

    def to_m(self, w):
        return np.asarray(w) @ self.F.T + self.origin

    def to_w(self, m):
        return (np.asarray(m) - self.origin) @ self.Finv.T

    def pull(self, field):
        n = self.F.shape[0]
        Fi = self.Finv
        cls = _field_cls(field)
        cm = field.complex_mode

        def at(p, o):
            y = self.map.taylor(p, o)
            return field.jet(y) if o else field.taylor(y.val, 0)

        if cls is VectorField:
            return derived(VectorField, n, lambda p, o: contract("ai,i->a", Fi, at(p, o)), field.max_order, cm)
        if cls is Bivector:
            return derived(Bivector, n, lambda p, o: contract("ai,ib->ab", Fi, contract("ij,bj->ib", at(p, o), Fi)),
                           field.max_order, cm)
        if cls is ScalarField:
            return derived(ScalarField, n, at, field.max_order, cm)
        return pullback_form(self.map, field)
