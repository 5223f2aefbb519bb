"""Time integration and Picard iterates.

The full equation is integrated with an integrating-factor RK4: the linear
part is applied exactly through exp(i Phi dt) factors, so only the nonlinear
term is discretized in time (classical fourth order).

spectral_u3 evaluates the first nontrivial Picard term directly in frequency
space as a 4D convolution over the compact wavepacket supports, never
materializing a 2D grid; picard_u3 is the independent grid-based route.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nonlinearity import NonlinearityTermSelector, eval_nonlinearity
from .propagator import FieldHistory, duhamel, linear_flow
from .spectral import (EnvelopeField, GridFreeWavepacket, SpectralGrid,
                       WavepacketSpec, build_wavepacket, phi, _gauss_nodes)

__all__ = ["SolverConfig", "SolveResult", "ResonanceQuery", "solve",
           "picard_u3", "resonance_omega", "spectral_u3", "u3_table",
           "SpectralU3Result",
           "validity_window", "leading_order_fg", "oscillation_factor"]


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    snapshot_stride: int = 1
    selector: NonlinearityTermSelector = field(
        default_factory=NonlinearityTermSelector)
    drift_abort: float = 1e-4

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        nsteps = self.n_steps
        if nsteps < 2:
            raise ValueError("t_end/dt must be >= 2")
        if abs(nsteps * self.dt - self.t_end) > 1e-9 * self.t_end:
            raise ValueError("t_end must be an integer multiple of dt")
        if nsteps % self.snapshot_stride != 0:
            raise ValueError("snapshot stride must divide the step count")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class SolveResult:
    history: FieldHistory
    drift: tuple[tuple[int, float, float], ...]   # (step, t, l2 relative drift)


def solve(u0: EnvelopeField, cfg: SolverConfig) -> SolveResult:
    """Integrating-factor RK4 for du/dt = i Phi u + N(u) in spectral space."""
    grid = u0.grid
    xi, mu = grid.lattice()
    ph = phi(xi, mu)
    dt = cfg.dt
    E = np.exp(0.5j * dt * ph)
    E2 = E * E

    def nl(c):
        return eval_nonlinearity(
            EnvelopeField.from_spectral(grid, c), cfg.selector).data

    c = u0.spectral_data().copy()
    norm0 = u0.l2_norm()
    snaps = [EnvelopeField.from_spectral(grid, c.copy())]
    drift_rows = [(0, 0.0, 0.0)]
    for step in range(1, cfg.n_steps + 1):
        k1 = nl(c)
        k2 = nl(E * (c + 0.5 * dt * k1))
        k3 = nl(E * c + 0.5 * dt * k2)
        k4 = nl(E2 * c + dt * E * k3)
        c = E2 * c + (dt / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)
        if not np.all(np.isfinite(c)):
            raise FloatingPointError(f"non-finite value at step {step}")
        if step % cfg.snapshot_stride == 0:
            f = EnvelopeField.from_spectral(grid, c.copy())
            snaps.append(f)
            rel = abs(f.l2_norm() / norm0 - 1.0) if norm0 > 0 else 0.0
            drift_rows.append((step, step * dt, rel))
            if rel > cfg.drift_abort:
                raise FloatingPointError(
                    f"L2 drift {rel:.3e} exceeded the abort threshold at step {step}")
    hist = FieldHistory(t0=0.0, dt=dt * cfg.snapshot_stride,
                        snapshots=tuple(snaps))
    return SolveResult(hist, tuple(drift_rows))


def picard_u3(u0: EnvelopeField, t: float, cfg: SolverConfig,
              ) -> EnvelopeField:
    """int_0^t W(t-t') N(W(t') u0) dt' via Simpson on the solver lattice."""
    if t == 0.0:
        return EnvelopeField.zero(u0.grid)
    n = int(round(t / cfg.dt))
    if abs(n * cfg.dt - t) > 1e-9 * t or n < 2:
        raise ValueError("t must be a multiple of dt with at least 3 nodes")
    snaps = tuple(
        eval_nonlinearity(linear_flow(u0, j * cfg.dt), cfg.selector)
        for j in range(n + 1))
    forcing = FieldHistory(t0=0.0, dt=cfg.dt, snapshots=snaps)
    return duhamel(forcing, t)


# ---------------------------------------------------------------------------
# resonance function and the direct frequency-space Picard term

@dataclass(frozen=True)
class ResonanceQuery:
    xi: float
    mu: float
    xi1: float
    mu1: float
    xi2: float
    mu2: float


def resonance_omega(q: ResonanceQuery) -> float:
    """Phi(K - K1 + K2) - Phi(K) + Phi(K1) - Phi(K2)."""
    return float(phi(q.xi - q.xi1 + q.xi2, q.mu - q.mu1 + q.mu2)
                 - phi(q.xi, q.mu) + phi(q.xi1, q.mu1) - phi(q.xi2, q.mu2))


def oscillation_factor(z):
    """E(z) = (e^{iz} - 1)/(iz), the explicit t'-integral; series for small z."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    direct = (np.exp(1j * zs) - 1.0) / (1j * zs)
    series = 1.0 + 1j * z / 2.0 - z ** 2 / 6.0 - 1j * z ** 3 / 24.0
    return np.where(small, series, direct)


def validity_window(spec: WavepacketSpec, safety: float = 1.0 / 8.0) -> float:
    """Time below which |t Omega~| stays small over the supports."""
    n1, n2, e = spec.n1, spec.n2, spec.eps
    scale = max(n1 ** (2.0 + 2.0 * e), n2 ** 2 * n1 ** (2.0 * e),
                n1 * n2 ** (1.0 + 2.0 * e))
    return safety / scale


@dataclass(frozen=True)
class SpectralU3Result:
    spec: WavepacketSpec
    t: float
    xi_nodes: np.ndarray        # inner-box Gauss nodes
    mu_nodes: np.ndarray
    xi_weights: np.ndarray
    mu_weights: np.ndarray
    u3_hat: np.ndarray          # (len(xi_nodes), len(mu_nodes)) table
    h_s_norm: float             # H^s norm restricted to the inner box
    max_t_omega: float          # sampled max of |t Omega~| over the supports
    window_time: float

    @property
    def within_window(self) -> bool:
        return self.max_t_omega < 0.25


def _axis_nodes(intervals, n, split_plateau: bool = True):
    """Gauss nodes/weights over a union of support intervals.

    Each interval [c-w, c+w] is split at the plateau breakpoints c-w/2 and
    c+w/2 so the profile transitions are resolved by dedicated panels.
    """
    x, w = _gauss_nodes(n)
    nodes, weights = [], []
    for a, b in intervals:
        if split_plateau:
            q = 0.25 * (b - a)
            edges = [a, a + q, b - q, b]
        else:
            edges = [a, b]
        for pa, pb in zip(edges[:-1], edges[1:]):
            nodes.append(0.5 * (pa + pb) + 0.5 * (pb - pa) * x)
            weights.append(0.5 * (pb - pa) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def u3_table(spec: WavepacketSpec, t: float, xi_out, mu_out,
             n_quad: int = 6, coefficient: float | None = None):
    """u3_hat(t, xi, mu) on an arbitrary rectangular set of output points.

    Returns (table, max |t Omega~| sampled over the live support).
    """
    packet = build_wavepacket(spec, grid_free=True)
    c = packet.c if coefficient is None else coefficient
    xi_out = np.asarray(xi_out, dtype=float)
    mu_out = np.asarray(mu_out, dtype=float)

    xi1, wxi1 = _axis_nodes(packet.support_xi(), n_quad)
    mu1, wmu1 = _axis_nodes(packet.support_mu(), n_quad)
    f1 = spec.f_profile(xi1)
    g1 = spec.g_profile(mu1)

    # 4D broadcast axes: (xi1, mu1, xi2, mu2)
    X1 = xi1[:, None, None, None]
    M1 = mu1[None, :, None, None]
    X2 = xi1[None, None, :, None]
    M2 = mu1[None, None, None, :]
    W4 = (wxi1[:, None, None, None] * wmu1[None, :, None, None]
          * wxi1[None, None, :, None] * wmu1[None, None, None, :])
    amp12 = (f1[:, None, None, None] * g1[None, :, None, None]
             * f1[None, None, :, None] * g1[None, None, None, :])
    phi12 = phi(X1, M1) - phi(X2, M2)

    u3 = np.zeros((len(xi_out), len(mu_out)), dtype=np.complex128)
    max_tom = 0.0
    for a, xo_val in enumerate(xi_out):
        xi3 = xo_val - X1 + X2
        dx = xo_val - X1
        f3 = spec.f_profile(xi3)
        for b, mo_val in enumerate(mu_out):
            mu3 = mo_val - M1 + M2
            dy = mo_val - M1
            f3g3 = f3 * spec.g_profile(mu3)
            omega = phi(xi3, mu3) - phi(xo_val, mo_val) + phi12
            tom = t * omega
            live = f3g3 != 0.0
            if np.any(live):
                max_tom = max(max_tom, float(np.max(np.abs(tom[live]))))
            r = np.hypot(dx, dy)
            nonloc = np.where(r > 0, dx ** 2 / np.where(r > 0, r, 1.0), 0.0)
            mult = (-0.5j - 1.5j * xi3 + 0.25j * X2 - 0.5j * nonloc)
            u3[a, b] = np.sum(W4 * amp12 * f3g3 * oscillation_factor(tom) * mult)
    u3 *= t * c ** 3
    u3 *= np.exp(1j * t * phi(xi_out[:, None], mu_out[None, :]))
    return u3, max_tom


def spectral_u3(spec: WavepacketSpec, t: float, n_quad: int = 6,
                n_out: int = 6, coefficient: float | None = None,
                ) -> SpectralU3Result:
    """u3_hat(t, K) on the inner box by direct 4D quadrature.

    u3_hat(K) = e^{i t Phi(K)} * t * sum over terms of
        int int M_term * E(t Omega~) * c0(K1) conj(c0(K2)) c0(K3) dK1 dK2
    with K3 = K - K1 + K2 and the term multipliers
        cubic:     -i/2
        gradx:     -3/2 * (i xi3)
        conjgradx: -1/4 * (-i xi2)
        nonlocal:  -i/2 * (xi-xi1)^2 / |(xi-xi1, mu-mu1)|
    """
    # output lattice: Gauss nodes on the inner box (doubles as the norm rule)
    bx = 0.25 * spec.w1
    by = 0.25 * spec.w2
    xo, wo = _gauss_nodes(n_out)
    xi_out = spec.n1 + bx * xo
    mu_out = spec.n2 + by * xo
    wxi_out = bx * wo
    wmu_out = by * wo

    u3, max_tom = u3_table(spec, t, xi_out, mu_out, n_quad=n_quad,
                           coefficient=coefficient)

    wgt = (1.0 + np.abs(xi_out)[:, None] + np.abs(mu_out)[None, :]) ** spec.s
    nsq = (2.0 * np.pi) ** 2 * np.einsum(
        "i,j,ij->", wxi_out, wmu_out, (wgt * np.abs(u3)) ** 2)
    return SpectralU3Result(
        spec=spec, t=t, xi_nodes=xi_out, mu_nodes=mu_out,
        xi_weights=wxi_out, mu_weights=wmu_out, u3_hat=u3,
        h_s_norm=float(np.sqrt(nsq)), max_t_omega=max_tom,
        window_time=validity_window(spec))


def leading_order_fg(spec: WavepacketSpec, xi, mu, n_quad: int = 40):
    """The top-order profile pair (F, G).

    F(xi) = int int xi3 f(xi1) f(xi2) f(xi3) dxi1 dxi2,  xi3 = xi - xi1 + xi2;
    G(mu) = int int g(mu1) g(mu2) g(mu3) dmu1 dmu2.
    The leading order of u3_hat is -i (7/4) c^3 t e^{i t Phi} F(xi) G(mu).
    """
    packet = build_wavepacket(spec, grid_free=True)
    x1, w1 = _axis_nodes(packet.support_xi(), n_quad)
    m1, v1 = _axis_nodes(packet.support_mu(), n_quad)
    f1 = spec.f_profile(x1)
    g1 = spec.g_profile(m1)

    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    F = np.empty(xi.shape)
    for i, x in enumerate(xi):
        x3 = x - x1[:, None] + x1[None, :]
        F[i] = np.einsum("i,j,ij->", w1 * f1, w1 * f1,
                         x3 * spec.f_profile(x3))
    G = np.empty(mu.shape)
    for i, m in enumerate(mu):
        m3 = m - m1[:, None] + m1[None, :]
        G[i] = np.einsum("i,j,ij->", v1 * g1, v1 * g1, spec.g_profile(m3))
    return F, G
