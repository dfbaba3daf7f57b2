"""Second-order forward-mode jets over batches of base points.

A :class:`Jet` stores the value of a tensor-valued function at ``B`` base
points together with its first and second derivatives along ``k`` seeded
directions::

    val : (B, *S)
    d1  : (B, *S, k)         d1[..., a]    = D_a f
    d2  : (B, *S, k, k)      d2[..., a, b] = D_a D_b f

``S`` is the tensor shape.  Derivative axes always trail the tensor axes so
that indexing the tensor part never disturbs them.  A jet of order 0 only
carries ``val``; order 1 adds ``d1``.  Second derivatives are kept exactly
symmetric: every product term that could break the symmetry in floating
point is explicitly symmetrised.
"""

from dataclasses import dataclass

import numpy as np

from .errors import JetOrderError

_INF_ORDER = 99


def _symmetrize(t):
    return 0.5 * (t + np.swapaxes(t, -1, -2))


class Jet:
    __slots__ = ("val", "d1", "d2")

    def __init__(self, val, d1=None, d2=None):
        self.val = np.asarray(val)
        self.d1 = None if d1 is None else np.asarray(d1)
        self.d2 = None if (d2 is None or d1 is None) else np.asarray(d2)

    # -- construction ----------------------------------------------------

    @classmethod
    def coordinates(cls, points, order=2, directions=None):
        """Jet of the identity map at ``points`` (shape ``(B, n)``).

        ``directions`` (``(k, n)``) seeds the derivative directions; by
        default the coordinate basis is used.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        B, n = points.shape
        if order == 0:
            return cls(points)
        if directions is None:
            directions = np.eye(n)
        directions = np.asarray(directions, dtype=float)
        if directions.ndim == 2:
            d1 = np.broadcast_to(directions.T, (B, n, directions.shape[0])).copy()
        else:
            d1 = np.swapaxes(directions, 1, 2).copy()
        if order == 1:
            return cls(points, d1)
        k = d1.shape[-1]
        return cls(points, d1, np.zeros((B, n, k, k)))

    @classmethod
    def constant(cls, val, ndir, order=2):
        val = np.asarray(val)
        if order == 0:
            return cls(val)
        d1 = np.zeros(val.shape + (ndir,), dtype=val.dtype)
        if order == 1:
            return cls(val, d1)
        return cls(val, d1, np.zeros(val.shape + (ndir, ndir), dtype=val.dtype))

    # -- basic properties ------------------------------------------------

    @property
    def order(self):
        if self.d1 is None:
            return 0
        return 1 if self.d2 is None else 2

    @property
    def batch(self):
        return self.val.shape[0]

    @property
    def shape(self):
        return self.val.shape[1:]

    @property
    def ndir(self):
        return None if self.d1 is None else self.d1.shape[-1]

    @property
    def dtype(self):
        return self.val.dtype

    def truncate(self, order):
        if order > self.order:
            raise JetOrderError(f"jet has order {self.order}, {order} requested")
        if order == 0:
            return Jet(self.val)
        if order == 1:
            return Jet(self.val, self.d1)
        return self

    def parts(self):
        return [a for a in (self.val, self.d1, self.d2) if a is not None]

    def _map(self, fn):
        """Apply a function acting on axes ``0..len(S)`` to every part."""
        return Jet(*[fn(a) for a in self.parts()])

    def __repr__(self):
        return f"Jet(shape={self.shape}, batch={self.batch}, order={self.order}, ndir={self.ndir})"

    # -- linear structure ------------------------------------------------

    def __neg__(self):
        return self._map(np.negative)

    def __add__(self, other):
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            a, b = self.truncate(order), other.truncate(order)
            return Jet(*[x + y for x, y in zip(a.parts(), b.parts())])
        other = np.asarray(other)
        return Jet(self.val + other, self.d1, self.d2)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return _product(self, other)
        c = np.asarray(other)
        if c.ndim == 0:
            return self._map(lambda a: a * c)
        # constant array over the tensor shape
        return Jet(*[a * c.reshape(c.shape + (1,) * (a.ndim - 1 - c.ndim)) for a in self.parts()])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    # -- tensor-axis manipulation ----------------------------------------

    def __getitem__(self, idx):
        """Index the tensor axes (never the batch or derivative axes)."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        full = (slice(None),) + idx
        return self._map(lambda a: a[full])

    def swap(self, i, j):
        return self._map(lambda a: np.swapaxes(a, 1 + i, 1 + j))

    def transpose(self):
        """Swap the last two tensor axes."""
        r = len(self.shape)
        return self.swap(r - 2, r - 1)

    def sum(self, axis):
        return self._map(lambda a: a.sum(axis=1 + axis))

    def reshape(self, shape):
        B = self.batch
        r = len(self.shape)
        return self._map(lambda a: a.reshape((B,) + tuple(shape) + a.shape[1 + r:]))

    def conj(self):
        return self._map(np.conj)

    @property
    def real(self):
        return self._map(np.real)

    @property
    def imag(self):
        return self._map(np.imag)

    def take_batch(self, idx):
        return Jet(*[a[idx] for a in self.parts()])

    @staticmethod
    def stack(jets, axis=0):
        order = min(j.order for j in jets)
        jets = [j.truncate(order) for j in jets]
        n_parts = len(jets[0].parts())
        return Jet(*[np.stack([j.parts()[p] for j in jets], axis=1 + axis) for p in range(n_parts)])

    @staticmethod
    def concatenate(jets, axis=0):
        order = min(j.order for j in jets)
        jets = [j.truncate(order) for j in jets]
        n_parts = len(jets[0].parts())
        return Jet(*[np.concatenate([j.parts()[p] for j in jets], axis=1 + axis) for p in range(n_parts)])

    # -- nonlinear operations --------------------------------------------

    def unary(self, f0, f1=None, f2=None):
        """Chain rule for an elementwise function given its value and derivatives."""
        if self.order == 0:
            return Jet(f0)
        g = self.d1
        d1 = f1[..., None] * g
        if self.order == 1:
            return Jet(f0, d1)
        gg = g[..., :, None] * g[..., None, :]
        d2 = f2[..., None, None] * gg + f1[..., None, None] * self.d2
        return Jet(f0, d1, d2)

    def reciprocal(self):
        v = self.val
        r = 1.0 / v
        return self.unary(r, -r * r, 2.0 * r * r * r)

    def deriv(self):
        """Jet of the derivative; the new tensor axis is the derivative index."""
        if self.order == 0:
            raise JetOrderError("cannot differentiate an order-0 jet")
        return Jet(self.d1, self.d2)

    def compose(self, inner):
        """Chain rule: ``self`` holds x-derivatives at ``x = inner.val``.

        ``inner`` is the jet of a map ``w -> x`` (shape ``(n,)``); the result
        carries derivatives in the directions of ``inner``.
        """
        order = min(self.order, inner.order)
        if order == 0:
            return Jet(self.val)
        J = inner.d1
        d1 = np.einsum("z...a,zam->z...m", self.d1, J)
        if order == 1:
            return Jet(self.val, d1)
        t = np.einsum("z...ab,zam,zbl->z...ml", self.d2, J, J)
        d2 = _symmetrize(t) + np.einsum("z...a,zaml->z...ml", self.d1, inner.d2)
        return Jet(self.val, d1, d2)

    def inv(self):
        """Matrix inverse over the last two tensor axes."""
        Y = np.linalg.inv(self.val)
        if self.order == 0:
            return Jet(Y)
        d1 = -np.einsum("z...ij,z...jka,z...kl->z...ila", Y, self.d1, Y)
        if self.order == 1:
            return Jet(Y, d1)
        # d2Y_ab = Y (dA_a Y dA_b + dA_b Y dA_a - d2A_ab) Y
        YdA = np.einsum("z...ij,z...jka->z...ika", Y, self.d1)
        t = np.einsum("z...ija,z...jlb->z...ilab", YdA, YdA)
        t = t + np.swapaxes(t, -1, -2)
        t = t - np.einsum("z...ij,z...jkab->z...ikab", Y, self.d2)
        d2 = np.einsum("z...ikab,z...kl->z...ilab", t, Y)
        return Jet(Y, d1, _symmetrize(d2))


def _expand(c, ndim):
    return c.reshape(c.shape + (1,) * (ndim - c.ndim))


def _product(a, b):
    """Elementwise (broadcast over equal tensor shapes) Leibniz product."""
    order = min(a.order, b.order)
    val = a.val * b.val
    if order == 0:
        return Jet(val)
    d1 = a.val[..., None] * b.d1 + a.d1 * b.val[..., None]
    if order == 1:
        return Jet(val, d1)
    t = a.d1[..., :, None] * b.d1[..., None, :]
    d2 = a.val[..., None, None] * b.d2 + a.d2 * b.val[..., None, None] + t + np.swapaxes(t, -1, -2)
    return Jet(val, d1, d2)


def _split(spec):
    ins, out = spec.replace(" ", "").split("->")
    a, b = ins.split(",")
    return a, b, out


def _einsum2(spec, x, y):
    """Two-operand ``einsum`` routed through batched ``matmul`` when possible."""
    ins, out = spec.split("->")
    a, b = ins.split(",")
    if len(set(a)) < len(a) or len(set(b)) < len(b) or any(c not in b and c not in out for c in a) \
            or any(c not in a and c not in out for c in b):
        return np.einsum(spec, x, y)
    batch = [c for c in out if c in a and c in b]
    left = [c for c in out if c in a and c not in b]
    right = [c for c in out if c in b and c not in a]
    summed = [c for c in a if c in b and c not in out]
    dims = dict(zip(a, x.shape))
    dims.update(zip(b, y.shape))
    xt = np.transpose(x, [a.index(c) for c in batch + left + summed])
    yt = np.transpose(y, [b.index(c) for c in batch + summed + right])
    size = lambda cs: int(np.prod([dims[c] for c in cs]))
    nb = [dims[c] for c in batch]
    r = np.matmul(xt.reshape(nb + [size(left), size(summed)]),
                  yt.reshape(nb + [size(summed), size(right)]))
    r = r.reshape(nb + [dims[c] for c in left] + [dims[c] for c in right])
    order = batch + left + right
    return np.transpose(r, [order.index(c) for c in out])


def contract(spec, a, b):
    """Bilinear ``einsum`` over tensor axes with the Leibniz rule.

    ``spec`` uses lowercase letters for tensor axes only, e.g. ``"ij,j->i"``.
    Either operand may be a constant ``ndarray`` of the bare tensor shape.
    """
    sa, sb, so = _split(spec)
    ja, jb = isinstance(a, Jet), isinstance(b, Jet)
    if not (ja or jb):
        raise TypeError("contract needs at least one Jet operand")
    oa = a.order if ja else _INF_ORDER
    ob = b.order if jb else _INF_ORDER
    order = min(oa, ob)
    A = a if ja else None
    Bj = b if jb else None
    av = a.val if ja else np.asarray(a)
    bv = b.val if jb else np.asarray(b)
    za = "z" if ja else ""
    zb = "z" if jb else ""
    sa, sb, so = sa.replace("z", "Q"), sb.replace("z", "Q"), so.replace("z", "Q")
    val = _einsum2(f"{za}{sa},{zb}{sb}->z{so}", av, bv)
    if order == 0:
        return Jet(val)
    d1 = 0
    if ja:
        d1 = d1 + _einsum2(f"z{sa}Y,{zb}{sb}->z{so}Y", A.d1, bv)
    if jb:
        d1 = d1 + _einsum2(f"{za}{sa},z{sb}Y->z{so}Y", av, Bj.d1)
    if order == 1:
        return Jet(val, d1)
    d2 = 0
    if ja:
        d2 = d2 + _einsum2(f"z{sa}YX,{zb}{sb}->z{so}YX", A.d2, bv)
    if jb:
        d2 = d2 + _einsum2(f"{za}{sa},z{sb}YX->z{so}YX", av, Bj.d2)
    if ja and jb:
        t = _einsum2(f"z{sa}Y,z{sb}X->z{so}YX", A.d1, Bj.d1)
        d2 = d2 + t + np.swapaxes(t, -1, -2)
    return Jet(val, d1, d2)


def linear(fn, jet):
    """Apply a constant linear map given as a function on ``val``-shaped arrays.

    ``fn`` must act on the tensor axes ``1..len(S)`` and broadcast over any
    trailing axes; derivative axes are moved out of the way first.
    """
    r = len(jet.shape)
    out = []
    for p, arr in enumerate(jet.parts()):
        if p == 0:
            out.append(fn(arr))
            continue
        # move derivative axes next to the batch axis, apply, move back
        moved = np.moveaxis(arr, list(range(1 + r, arr.ndim)), list(range(1, 1 + p)))
        B = arr.shape[0]
        dshape = moved.shape[1:1 + p]
        flat = moved.reshape((B * int(np.prod(dshape)),) + moved.shape[1 + p:])
        res = fn(flat)
        res = res.reshape((B,) + dshape + res.shape[1:])
        rr = res.ndim - 1 - p
        out.append(np.moveaxis(res, list(range(1, 1 + p)), list(range(1 + rr, 1 + rr + p))))
    return Jet(*out)


@dataclass(frozen=True)
class JetValue:
    """Value with first and second directional derivatives at one point."""

    value: complex
    grad: np.ndarray
    hess: np.ndarray
