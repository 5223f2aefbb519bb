"""Mixed space-time norms over field histories and the eta norm system.

A mixed norm integrates in a fixed nesting order, e.g. L^inf_x L^2_{T,y} is
the sup over x of the L^2 norm in (t, y).  Evaluation is Riemann-sum
quadrature with cell weights dx*dy*dt; L^inf is realized as the max over
samples (a lower bound on the true sup, adequate for band-limited data).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .propagator import FieldHistory
from .spectral import (EnvelopeField, apply_multiplier, project,
                       sobolev_symbol)

__all__ = ["MixedNormSpec", "NormBundle", "mixed_norm", "eta_bundle",
           "weighted_history"]


@dataclass(frozen=True)
class MixedNormSpec:
    outer: str                   # 'x' | 'y' | 't'
    p: float                     # outer exponent, inf allowed
    q: float                     # joint inner exponent over the other two
    sobolev: float | None = None
    projections: tuple[str, ...] = ()
    t_window: float | None = None   # evaluate over [0, T]; None = full span

    def __post_init__(self):
        if self.outer not in ("x", "y", "t"):
            raise ValueError("outer variable must be x, y, or t")
        for e in (self.p, self.q):
            if not (e >= 1.0):
                raise ValueError("exponents must be >= 1")


@dataclass(frozen=True)
class NormBundle:
    eta: tuple[float, ...]       # eta_1 .. eta_6
    s: float
    t_window: float
    q: float
    r: float

    @property
    def lam(self) -> float:
        return max(self.eta)


def _window_slices(h: FieldHistory, T: float | None):
    times = h.times
    if T is None:
        sel = np.ones(len(times), dtype=bool)
    else:
        sel = (times >= -1e-12) & (times <= T + 1e-12)
    idx = np.nonzero(sel)[0]
    if len(idx) == 0:
        raise ValueError("empty time window")
    return idx


def weighted_history(h: FieldHistory, sobolev: float | None,
                     projections: tuple[str, ...]) -> list[EnvelopeField]:
    """Apply the Sobolev weight and projection list per time slice."""
    out = []
    for snap in h.snapshots:
        f = snap
        for pr in projections:
            f = project(f, pr)
        if sobolev is not None:
            f = apply_multiplier(f, sobolev_symbol(sobolev))
        out.append(f)
    return out


def _abs_cube(h: FieldHistory, spec: MixedNormSpec) -> np.ndarray:
    """(nt, nx, ny) array of |u| after weights, restricted to the window."""
    idx = _window_slices(h, spec.t_window)
    fields = weighted_history(h, spec.sobolev, spec.projections)
    return np.stack([np.abs(fields[i].physical_data()) for i in idx])


def _lp(vals: np.ndarray, p: float, weight, axis) -> np.ndarray:
    """Weighted discrete L^p; `weight` is a scalar or a broadcastable array."""
    if np.isinf(p):
        return np.max(vals, axis=axis)
    return np.sum(weight * vals ** p, axis=axis) ** (1.0 / p)


def _time_weights(n: int, dt: float) -> np.ndarray:
    # trapezoid in time so window integrals are exact for constants
    if n == 1:
        return np.array([dt])
    w = np.full(n, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def mixed_norm(h: FieldHistory, spec: MixedNormSpec) -> float:
    cube = _abs_cube(h, spec)           # axes (t, x, y)
    g = h.grid
    dx, dy = g.lx / g.nx, g.ly / g.ny
    wt = _time_weights(cube.shape[0], h.dt)
    if spec.outer == "x":
        inner = _lp(cube, spec.q, wt[:, None, None] * dy, axis=(0, 2))
        return float(_lp(inner, spec.p, dx, axis=0))
    if spec.outer == "y":
        inner = _lp(cube, spec.q, wt[:, None, None] * dx, axis=(0, 1))
        return float(_lp(inner, spec.p, dy, axis=0))
    inner = _lp(cube, spec.q, dx * dy, axis=(1, 2))       # per t
    return float(_lp(inner, spec.p, wt, axis=0))


def eta_bundle(h: FieldHistory, s: float, T: float,
               q: float = 20.0 / 9.0, r: float = 20.0) -> NormBundle:
    """The six-norm system; lam is their max."""

    def mn(outer, p, qq, sob=None, projs=()):
        return mixed_norm(h, MixedNormSpec(outer=outer, p=p, q=qq,
                                           sobolev=sob, projections=projs,
                                           t_window=T))

    inf = np.inf
    eta1 = (mn("x", inf, 2, s + 1, ("P1",))
            + mn("x", inf, 2, s + 1, ("P1", "P3")))
    eta2 = (mn("y", inf, 2, s + 1, ("P2",))
            + mn("y", inf, 2, s + 1, ("P2", "P3")))
    eta3 = mn("t", inf, 2, s)
    eta4 = sum(mn("x", 4, inf, 0.25, (f"P{i}",)) for i in range(3))
    eta5 = sum(mn("y", 4, inf, 0.25, (f"P{i}",)) for i in range(3))
    eta6 = sum(_strichartz_norm(h, s, T, q, r, f"P{i}") for i in (1, 2))
    return NormBundle(eta=(eta1, eta2, eta3, eta4, eta5, eta6),
                      s=s, t_window=T, q=q, r=r)


def _strichartz_norm(h: FieldHistory, s: float, T: float,
                     q: float, r: float, proj: str) -> float:
    """||<grad>^s P u||_{L^q_T L^r_{x,y}} (outer t, inner joint (x,y))."""
    spec = MixedNormSpec(outer="t", p=q, q=r, sobolev=s,
                         projections=(proj,), t_window=T)
    return mixed_norm(h, spec)
