"""Flows of vector fields with first- and second-order variational transport.

Conventions: :func:`flow` is the standard flow ``Phi_s`` with
``d/ds Phi_s(m) = X(Phi_s(m))``.  Inverse-convention flows used elsewhere
are always obtained as ``Phi_{-s}``; in particular ``lambda_t = Phi_{log t}``
so that for the Euler field ``lambda_t(m) = t m``.

All routines integrate a whole batch of trajectories as one system.  The
state carries the jet of the endpoint with respect to the initial point, so
the variational equations come for free from the jet chain rule.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import DOP853, RK45

from .chart import SmoothMap
from .errors import FlowEscapeError, JetOrderError, StepUnderflowError
from .jet import Jet

_SCHEMES = {"RK45": RK45, "DOP853": DOP853}


@dataclass(frozen=True)
class FlowConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = np.inf
    max_time: float = 1e3
    scheme: str = "DOP853"

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(_SCHEMES)}")


DEFAULT = FlowConfig()


@dataclass
class FlowResult:
    endpoint: np.ndarray
    jacobian: Optional[np.ndarray]
    steps: int
    escaped: bool = False


# -- packing jets into flat ODE states ------------------------------------------


class State(tuple):
    """Plain tuple of batched arrays, integrable like a jet."""

    def parts(self):
        return list(self)

    @property
    def batch(self):
        return self[0].shape[0]

    @property
    def val(self):
        return self[0]


class _Packer:
    def __init__(self, jet):
        self.kind = State if isinstance(jet, State) else Jet
        self.shapes = [a.shape for a in jet.parts()]
        self.sizes = [int(np.prod(s)) for s in self.shapes]
        self.dtype = np.result_type(*jet.parts())

    def pack(self, jet):
        return np.concatenate([np.asarray(a, dtype=self.dtype).ravel() for a in jet.parts()])

    def unpack(self, y):
        parts, i = [], 0
        for s, n in zip(self.shapes, self.sizes):
            parts.append(y[i:i + n].reshape(s))
            i += n
        return State(parts) if self.kind is State else Jet(*parts)


def _integrate(rhs, state, t0, t1, cfg, guard=None):
    """Integrate ``d state/dt = rhs(t, state)`` (a jet ODE) from t0 to t1."""
    if t1 == t0:
        return state, 0
    if abs(t1 - t0) > cfg.max_time:
        raise StepUnderflowError(f"integration span {abs(t1 - t0)} exceeds max_time {cfg.max_time}")
    pk = _Packer(state)
    # error norms are RMS over the whole batch; rescale so that each
    # trajectory is held to roughly the requested tolerance
    scale = 1.0 / np.sqrt(max(state.batch, 1))

    def f(t, y):
        return pk.pack(rhs(t, pk.unpack(y)))

    solver = _SCHEMES[cfg.scheme](f, t0, pk.pack(state), t1, rtol=cfg.rel_tol * scale,
                                  atol=cfg.abs_tol * scale, max_step=cfg.max_step)
    steps = 0
    while solver.status == "running":
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepUnderflowError(f"integrator failed at t={solver.t:.6g}: {msg}")
        if guard is not None:
            pts = pk.unpack(solver.y).val
            ok = guard(pts)
            if not np.all(ok):
                bad = np.flatnonzero(~ok)[0]
                raise FlowEscapeError(f"trajectory {bad} left the chart at t={solver.t:.6g} "
                                      f"(point {pts[bad]})")
    return pk.unpack(solver.y), steps


def integrate_state(rhs, arrays, t0, t1, cfg=DEFAULT, chart=None):
    """Integrate a tuple of batched arrays; ``rhs(t, state)`` returns a tuple.

    The first array holds the base points and is checked against the chart.
    """
    out, steps = _integrate(lambda t, s: State(rhs(t, s)), State(arrays), t0, t1, cfg, _guard_of(chart))
    return tuple(out), steps


def _as_batch(m):
    m = np.asarray(m, dtype=float)
    return np.atleast_2d(m), m.ndim == 1


def _guard_of(chart):
    if chart is None:
        return lambda pts: np.all(np.isfinite(pts), axis=1)
    return chart.contains


def flow_jet(X, start, s, order=1, cfg=DEFAULT, chart=None):
    """Jet of the standard flow map ``Phi_s`` at a batch of points.

    ``start`` is either an array of points or a :class:`Jet` (then the
    result carries derivatives in that jet's directions).
    """
    if not isinstance(start, Jet):
        start = Jet.coordinates(np.atleast_2d(np.asarray(start, dtype=float)), order)
    if start.order > X.max_order:
        raise JetOrderError(f"field supports order {X.max_order}, flow jet of order {start.order} requested")
    out, _ = _integrate(lambda t, x: X.jet(x), start, 0.0, float(s), cfg, _guard_of(chart))
    return out


def flow(X, m, s, cfg=DEFAULT, jacobian=False, chart=None):
    """Standard flow ``Phi_s(m)``; optionally the Jacobian via variational equations."""
    pts, single = _as_batch(m)
    start = Jet.coordinates(pts, 1 if jacobian else 0)
    out, steps = _integrate(lambda t, x: X.jet(x), start, 0.0, float(s), cfg, _guard_of(chart))
    end = out.val[0] if single else out.val
    jac = None
    if jacobian:
        jac = out.d1[0] if single else out.d1
    return FlowResult(end, jac, steps, False)


def flow_map(X, s, cfg=DEFAULT, chart=None):
    """``Phi_s`` as a :class:`SmoothMap` (order limited by the field)."""
    return SmoothMap(X.dim, X.dim, lambda p, o: flow_jet(X, p, s, o, cfg, chart) if o else
                     flow_jet(X, p, s, 0, cfg, chart), X.max_order)


def lambda_t(X, m, t, cfg=DEFAULT, chart=None):
    """``lambda_t(m) = Phi_{log t}(m)`` for ``t`` in (0, 1]."""
    if not 0 < t <= 1:
        raise ValueError("lambda_t needs 0 < t <= 1")
    if t == 1:
        return np.array(m, dtype=float, copy=True)
    return flow(X, m, np.log(t), cfg, chart=chart).endpoint


def lambda_t_jet(X, start, t, order=1, cfg=DEFAULT, chart=None):
    if t == 1:
        if isinstance(start, Jet):
            return start
        return Jet.coordinates(np.atleast_2d(start), order)
    return flow_jet(X, start, np.log(t), order, cfg, chart)


class FieldFamily:
    """Time-dependent vector field given by ``fn(t, x_jet) -> Jet``."""

    def __init__(self, dim, fn, max_order=2):
        self.dim = dim
        self.fn = fn
        self.max_order = max_order

    def jet(self, t, x):
        return self.fn(t, x)

    def __call__(self, t, points):
        pts, single = _as_batch(points)
        out = self.fn(t, Jet.coordinates(pts, 0)).val
        return out[0] if single else out

    @classmethod
    def from_fields(cls, fields_of_t, dim, max_order=2):
        return cls(dim, lambda t, x: fields_of_t(t).jet(x), max_order)


def timedep_flow_jet(Z, start, t0=0.0, t1=1.0, order=0, cfg=DEFAULT, chart=None):
    if not isinstance(start, Jet):
        start = Jet.coordinates(np.atleast_2d(np.asarray(start, dtype=float)), order)
    if start.order > Z.max_order:
        raise JetOrderError(f"family supports order {Z.max_order}, {start.order} requested")
    out, _ = _integrate(lambda t, x: Z.jet(t, x), start, float(t0), float(t1), cfg, _guard_of(chart))
    return out


def timedep_flow(Z, m, t0=0.0, t1=1.0, cfg=DEFAULT, chart=None):
    """Endpoint of ``dx/dt = Z_t(x)`` from ``t0`` to ``t1``."""
    pts, single = _as_batch(m)
    out = timedep_flow_jet(Z, pts, t0, t1, 0, cfg, chart).val
    return out[0] if single else out
