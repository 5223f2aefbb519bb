"""Oscillatory kernels of the linear flow, evaluated by direct quadrature.

Covered kernels:

* dispersive kernels I0/I3 of the low/high-frequency propagators, with the
  inner Fresnel integral reduced in closed form;
* maximal-function kernels I_{k,j} (dyadic bump in both frequencies) and the
  low-frequency variant I_j, via an inner mu-integral and an outer
  xi-integral handled by the oscillatory engine;
* principal-value kernels K1/K2 with the epsilon-window regularization
  eps < |tau - Phi| < 1/eps, pole subtraction at the real roots of
  tau - Phi = 0, and extrapolation across a ladder of eps levels;
* the cubic root finder for tau - Phi(xi, mu) = 0 at fixed mu.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oscquad import QuadResult, adaptive_quad, osc_integral
from .spectral import bump_psi, chi, dyadic_bump, grad_phi, phi

__all__ = ["KernelQuery", "KernelResult", "CubicRoots",
           "stationary_point_mu0", "cubic_roots_in_xi",
           "eval_mu_inner", "eval_I_kj", "eval_I_j",
           "eval_K", "eval_dispersive_kernel", "eval_kernel",
           "parse_query_file"]

TWO_PI = 2.0 * np.pi


def _p(xi):
    return xi ** 3 / 16.0 - xi ** 2 / 8.0 + 0.5 * xi


def _dp(xi):
    return 3.0 * xi ** 2 / 16.0 - 0.25 * xi + 0.5


def _q(xi):
    return 0.25 - 0.375 * xi


# ---------------------------------------------------------------------------
# queries and results

_REQUIRED = {
    "I0": ("t", "x", "y"),
    "I3": ("t", "x", "y"),
    "Ikj": ("t", "x", "y", "k", "j"),
    "Ij": ("t", "x", "y", "j"),
    "K1": ("tau", "x", "mu"),
    "K2": ("tau", "xi", "y"),
    "MuInner": ("xi", "t", "y", "j"),
}


@dataclass(frozen=True)
class KernelQuery:
    kind: str
    t: float | None = None
    x: float | None = None
    y: float | None = None
    tau: float | None = None
    xi: float | None = None
    mu: float | None = None
    k: int | None = None
    j: int | None = None
    rel_tol: float = 1e-6
    max_depth: int = 14

    def __post_init__(self):
        if self.kind not in _REQUIRED:
            raise ValueError(f"unknown kernel id {self.kind!r}")
        needed = _REQUIRED[self.kind]
        for name in needed:
            if getattr(self, name) is None:
                raise ValueError(f"{self.kind} requires parameter {name!r}")
        for name in ("t", "x", "y", "tau", "xi", "mu", "k", "j"):
            if name not in needed and getattr(self, name) is not None:
                raise ValueError(
                    f"{self.kind} does not take parameter {name!r}")
        if not (1e-10 <= self.rel_tol <= 1e-2):
            raise ValueError("target relative error must be in [1e-10, 1e-2]")
        if self.max_depth < 1:
            raise ValueError("max refinement depth must be positive")


@dataclass(frozen=True)
class KernelResult:
    value: complex
    error: float          # absolute error estimate
    evaluations: int
    converged: bool
    tail: float = 0.0     # reported bound on truncated tails, if any


def _from_quad(r: QuadResult, tail: float = 0.0) -> KernelResult:
    return KernelResult(r.value, r.error + tail, r.evaluations,
                        r.converged, tail)


# ---------------------------------------------------------------------------
# stationary point of the inner mu-phase

def stationary_point_mu0(xi: float, t: float, y: float) -> float:
    """mu0 = -y / (t (1/4 - 3 xi/8)); rejects the degenerate phase."""
    if t == 0.0:
        raise ValueError("degenerate phase: t = 0")
    qv = _q(xi)
    if qv == 0.0:
        raise ValueError("degenerate phase: xi = 2/3")
    return -y / (t * qv)


# ---------------------------------------------------------------------------
# cubic roots of tau - Phi(., mu)

@dataclass(frozen=True)
class CubicRoots:
    roots: tuple[float, ...]       # real roots, ascending
    in_r1: tuple[bool, ...]        # |xi| > max(100, 200 |mu|)


def cubic_roots_in_xi(tau: float, mu: float) -> CubicRoots:
    """Real solutions of tau = Phi(xi, mu), with their region-1 membership.

    Newton-polished to a residual below 1e-12 relative to max(1, |tau|).
    """
    # tau - Phi = 0  <=>  xi^3 - 2 xi^2 + (8 - 6 mu^2) xi + (4 mu^2 - 16 tau) = 0
    coeffs = [1.0, -2.0, 8.0 - 6.0 * mu ** 2, 4.0 * mu ** 2 - 16.0 * tau]
    raw = np.roots(coeffs)
    scale = max(1.0, abs(tau))
    roots = []
    for z in raw:
        if abs(z.imag) > 1e-8 * max(1.0, abs(z.real)):
            continue
        xi = float(z.real)
        for _ in range(50):
            r = tau - float(phi(xi, mu))
            if abs(r) <= 1e-13 * scale:
                break
            d = -float(grad_phi(xi, mu)[0])
            if d == 0.0:
                break
            step = -r / d
            xi += step
            if abs(step) <= 1e-15 * max(1.0, abs(xi)):
                break
        if abs(tau - float(phi(xi, mu))) <= 1e-12 * scale:
            roots.append(xi)
    # dedupe (double root collapse)
    roots.sort()
    kept: list[float] = []
    for xi in roots:
        if not kept or abs(xi - kept[-1]) > 1e-9 * max(1.0, abs(xi)):
            kept.append(xi)
    a_mu = max(100.0, 200.0 * abs(mu))
    return CubicRoots(tuple(kept), tuple(abs(r) > a_mu for r in kept))


# ---------------------------------------------------------------------------
# generic "oscillatory or smooth" 1D integral

def _cycles(phase, a, b, n=512):
    xs = np.linspace(a, b, n)
    return float(np.sum(np.abs(np.diff(np.asarray(phase(xs)))))) / TWO_PI


def _osc_or_smooth(amp, phase, dphase, a, b, rel_tol,
                   max_depth=14, breakpoints=()) -> QuadResult:
    """Dispatch on the cycle count: direct adaptive Gauss for few cycles,
    the phase-variable oscillatory engine otherwise."""
    if b <= a:
        return QuadResult(0.0 + 0.0j, 0.0, 0, True)
    if _cycles(phase, a, b) < 16.0:
        def f(xs):
            return amp(xs) * np.exp(1j * np.asarray(phase(xs)))
        return adaptive_quad(f, a, b, rel_tol=rel_tol, max_depth=max_depth,
                             breakpoints=breakpoints)
    return osc_integral(amp, phase, dphase, a, b, rel_tol=rel_tol)


# ---------------------------------------------------------------------------
# inner mu-integral of I_{k,j} / I_j

def _bump_support(j: int) -> tuple[float, float]:
    if j == 1:
        return 0.0, 2.0
    return 2.0 ** (j - 1), 2.0 ** (j + 1)


def _bump_edges(j: int) -> tuple[float, ...]:
    if j == 1:
        return (0.0, 5.0 / 6.0, 7.0 / 6.0, 2.0)
    s = 2.0 ** j
    return (0.5 * s, 5.0 / 6.0 * s, 7.0 / 6.0 * s, 2.0 * s)


def eval_mu_inner(xi: float, t: float, y: float, j: int,
                  rel_tol: float = 1e-8) -> KernelResult:
    """f(xi; t, y) = int e^{i mu y + i t (1/4 - 3 xi/8) mu^2} alpha_j(mu) dmu."""
    a, b = _bump_support(j)
    qv = float(_q(xi))

    def amp(mu):
        return dyadic_bump(j, mu)

    def phase(mu):
        return mu * y + t * qv * mu ** 2

    def dphase(mu):
        return y + 2.0 * t * qv * mu

    r = _osc_or_smooth(amp, phase, dphase, a, b, rel_tol,
                       breakpoints=_bump_edges(j)[1:3])
    return _from_quad(r)


def _mu_inner_nodes(j: int, m: int):
    """Gauss nodes/weights on the alpha_j support, aligned to its plateau."""
    edges = _bump_edges(j)
    total = edges[-1] - edges[0]
    xs, ws = [], []
    for lo, hi in zip(edges, edges[1:]):
        n = max(24, int(np.ceil(m * (hi - lo) / total)))
        g, w = np.polynomial.legendre.leggauss(n)
        xs.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * g)
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _mu_inner_batch(xi_arr: np.ndarray, t: float, y: float, j: int):
    """Vectorized inner integral over an array of xi values.

    Uses a fixed panel-Gauss rule sized by the worst-case cycle count; the
    callers only reach this path when that count is moderate.
    """
    a, b = _bump_support(j)
    qmax = float(np.max(np.abs(_q(xi_arr))))
    cycles = (abs(y) * b + abs(t) * qmax * b ** 2) / TWO_PI
    if cycles > 600.0:
        out = np.empty(len(xi_arr), dtype=np.complex128)
        for i, xi in enumerate(np.asarray(xi_arr, dtype=float)):
            out[i] = eval_mu_inner(float(xi), t, y, j).value
        return out
    mu, w = _mu_inner_nodes(j, int(max(96, 14 * cycles)))
    wa = w * dyadic_bump(j, mu)
    ph = (y * mu)[None, :] + t * np.outer(_q(np.asarray(xi_arr)), mu ** 2)
    return np.exp(1j * ph) @ wa


# ---------------------------------------------------------------------------
# maximal-function kernels

def eval_I_kj(t: float, x: float, y: float, k: int, j: int,
              rel_tol: float = 1e-6) -> KernelResult:
    """I_{k,j} = int e^{i(xi x + mu y + t Phi)} alpha_k(xi) alpha_j(mu).

    Evaluated as an outer xi-integral of the inner mu-integral.  When the
    alpha_k support stays away from xi = 2/3 the stationary-phase (Fresnel)
    factor of the inner integral, e^{-i y^2/(4 t q)}, is pulled into the
    outer phase so the outer amplitude is slowly varying.
    """
    a, b = _bump_support(k)
    extract = t != 0.0 and y != 0.0 and a > 0.7

    if extract:
        def amp(xi):
            qv = _q(xi)
            f = _mu_inner_batch(xi, t, y, j)
            return dyadic_bump(k, xi) * f * np.exp(
                1j * y ** 2 / (4.0 * t * qv))

        def phase(xi):
            return x * xi + t * _p(xi) - y ** 2 / (4.0 * t * _q(xi))

        def dphase(xi):
            return x + t * _dp(xi) - (3.0 / 32.0) * y ** 2 / (t * _q(xi) ** 2)
    else:
        def amp(xi):
            return dyadic_bump(k, xi) * _mu_inner_batch(xi, t, y, j)

        def phase(xi):
            return x * xi + t * _p(xi)

        def dphase(xi):
            return x + t * _dp(xi)

    r = _osc_or_smooth(amp, phase, dphase, a, b, rel_tol,
                       breakpoints=_bump_edges(k)[1:3])
    return _from_quad(r)


def eval_I_j(t: float, x: float, y: float, j: int,
             rel_tol: float = 1e-6) -> KernelResult:
    """Low-frequency kernel: alpha_j in mu, chi_0 cutoff in xi."""

    def amp(xi):
        return bump_psi(xi) * _mu_inner_batch(xi, t, y, j)

    def phase(xi):
        return x * xi + t * _p(xi)

    def dphase(xi):
        return x + t * _dp(xi)

    r = _osc_or_smooth(amp, phase, dphase, -200.0, 200.0, rel_tol,
                       breakpoints=(-100.0, 2.0 / 3.0, 100.0))
    return _from_quad(r)


# ---------------------------------------------------------------------------
# dispersive kernels I0 / I3

def _fresnel_amp(t: float, xi):
    """|inner Fresnel integral| = sqrt(pi / |t q(xi)|)."""
    return np.sqrt(np.pi / np.abs(t * _q(xi)))


def _i_kernel_half(t, x, y, weight, lo, hi, rel_tol, substitute):
    """One xi-half of I0/I3 after the closed-form mu-integral.

    Phase: x xi - t P(xi) + y^2/(4 t q(xi)), amplitude sqrt(pi/|tq|) times
    the cutoff, plus the quadrant factor e^{i sign(-t q) pi/4}.  With
    `substitute`, the half is parametrized by v = sqrt(|q|) (xi = 2/3 -+
    8/3 v^2), which removes the |q|^{-1/2} amplitude singularity at
    xi = 2/3; the Fresnel phase blowup there is left to the oscillatory
    engine in the v variable.
    """
    if not substitute:
        qsign = float(np.sign(-t * _q(0.5 * (lo + hi))))

        def amp(xi):
            return weight(xi) * _fresnel_amp(t, xi)

        def phase(xi):
            return x * xi - t * _p(xi) + y ** 2 / (4.0 * t * _q(xi))

        def dphase(xi):
            return x - t * _dp(xi) + (3.0 / 32.0) * y ** 2 / (t * _q(xi) ** 2)

        r = _osc_or_smooth(amp, phase, dphase, lo, hi, rel_tol)
        return QuadResult(r.value * np.exp(1j * qsign * np.pi / 4.0),
                          r.error, r.evaluations, r.converged)

    # substituted half: side = +1 covers xi > 2/3 (q = -v^2), side = -1
    # covers xi < 2/3 (q = +v^2)
    side = 1.0 if hi > 2.0 / 3.0 else -1.0
    edge = hi if side > 0 else lo
    v_max = float(np.sqrt(abs(_q(edge))))
    v_min = 1e-9

    def xi_of(v):
        return 2.0 / 3.0 + side * (8.0 / 3.0) * v ** 2

    qsign = float(np.sign(side * t))     # sign(-t q) with q = -side v^2

    def amp(v):
        return weight(xi_of(v)) * np.sqrt(np.pi / np.abs(t)) * (16.0 / 3.0)

    def phase(v):
        xi = xi_of(v)
        return x * xi - t * _p(xi) - side * y ** 2 / (4.0 * t * v ** 2)

    def dphase(v):
        xi = xi_of(v)
        return ((x - t * _dp(xi)) * side * (16.0 / 3.0) * v
                + side * y ** 2 / (2.0 * t * v ** 3))

    if y == 0.0:
        r = _osc_or_smooth(amp, phase, dphase, v_min, v_max, rel_tol)
    else:
        r = osc_integral(amp, phase, dphase, v_min, v_max, rel_tol=rel_tol)
    # truncation below v_min: bounded amplitude times the cut length
    tail = float(np.abs(amp(np.asarray([v_min])))[0]) * v_min
    return QuadResult(r.value * np.exp(1j * qsign * np.pi / 4.0),
                      r.error + tail, r.evaluations, r.converged)


def eval_dispersive_kernel(which: str, t: float, x: float, y: float,
                           xi_max: float = 1e4,
                           rel_tol: float = 1e-6) -> KernelResult:
    """I0 or I3 at (t, x, y): int e^{i(x xi + y mu) - i t Phi} chi_w(xi).

    The mu-integral is a full Fresnel integral and is reduced in closed
    form; the remaining xi-integral is handled by the oscillatory engine.
    For I3 the unbounded range is truncated at |xi| = xi_max with a reported
    first-order integration-by-parts tail bound.
    """
    if which not in ("I0", "I3"):
        raise ValueError("kernel must be I0 or I3")
    if t == 0.0:
        raise ValueError("dispersive kernels require t != 0")

    if which == "I0":
        def weight(xi):
            return bump_psi(xi)
        left = _i_kernel_half(t, x, y, weight, -200.0, 2.0 / 3.0, rel_tol,
                              substitute=True)
        right = _i_kernel_half(t, x, y, weight, 2.0 / 3.0, 200.0, rel_tol,
                               substitute=True)
        value = left.value + right.value
        return KernelResult(value, left.error + right.error,
                            left.evaluations + right.evaluations,
                            left.converged and right.converged)

    def weight(xi):
        return 1.0 - bump_psi(xi)

    halves = [_i_kernel_half(t, x, y, weight, 100.0, xi_max, rel_tol,
                             substitute=False),
              _i_kernel_half(t, x, y, weight, -xi_max, -100.0, rel_tol,
                             substitute=False)]
    # first IBP term at the cut: amp/|phase'| per side
    tail = 0.0
    for cap in (xi_max, -xi_max):
        d = abs(x - t * float(_dp(cap))
                + (3.0 / 32.0) * y ** 2 / (t * float(_q(cap)) ** 2))
        tail += float(_fresnel_amp(t, cap)) / max(d, 1e-300)
    value = halves[0].value + halves[1].value
    return KernelResult(value, halves[0].error + halves[1].error + tail,
                        halves[0].evaluations + halves[1].evaluations,
                        halves[0].converged and halves[1].converged, tail)


# ---------------------------------------------------------------------------
# principal-value kernels K1 / K2

def _pv_eps_axis(dens_amp, denom, denom_prime, denom_second, freq, roots,
                 lo, hi, eps, rel_tol):
    """One connected component [lo, hi] of an eps-window PV integral.

    Integrand: dens_amp(s) e^{i freq s} / denom(s), with simple real zeros
    of `denom` listed in `roots`.  Around each root the pole is subtracted
    and the excluded eps-core |denom| < eps enters only through the exact
    logarithm of its (slightly asymmetric) endpoints, which are computed
    from the local quadratic model of `denom` (direct evaluation of denom
    at the core scale would be pure cancellation noise).
    """
    inside = sorted(r for r in roots if lo < r < hi)
    total = 0.0 + 0.0j
    err = 0.0
    evals = 0
    converged = True

    def dens(s):
        s = np.asarray(s, dtype=float)
        return dens_amp(s) * np.exp(1j * freq * s) / denom(s)

    # carve a subtraction window around each root
    cuts = [lo]
    windows = []
    for i, r0 in enumerate(inside):
        rad = 0.05 * max(1.0, abs(r0))
        wlo = max(lo, r0 - rad)
        whi = min(hi, r0 + rad)
        if i > 0:
            mid = 0.5 * (inside[i - 1] + r0)
            wlo = max(wlo, mid)
        if i + 1 < len(inside):
            mid = 0.5 * (r0 + inside[i + 1])
            whi = min(whi, mid)
        windows.append((wlo, whi, r0))
        cuts += [wlo, whi]
    cuts.append(hi)

    # smooth segments between windows
    for a, b in zip(cuts[::2], cuts[1::2]):
        if b <= a:
            continue
        r = _osc_or_smooth(lambda s: dens_amp(np.asarray(s, float))
                           / denom(np.asarray(s, float)),
                           lambda s: freq * np.asarray(s, float),
                           lambda s: freq * np.ones_like(np.asarray(s, float)),
                           a, b, rel_tol)
        total += r.value
        err += r.error
        evals += r.evaluations
        converged &= r.converged

    for wlo, whi, r0 in windows:
        dp0 = float(denom_prime(r0))
        d2 = float(denom_second(r0))
        c = complex(dens_amp(np.asarray([r0], float))[0]) \
            * np.exp(1j * freq * r0) / dp0
        # eps-core offsets from the quadratic model denom ~ dp0 d + d2 d^2/2,
        # via the cancellation-free quadratic-root form
        sg = 1.0 if dp0 > 0 else -1.0
        d_hi = 2.0 * (sg * eps) / (
            dp0 + sg * np.sqrt(dp0 ** 2 + 2.0 * d2 * sg * eps))
        d_lo = 2.0 * (-sg * eps) / (
            dp0 + sg * np.sqrt(dp0 ** 2 - 2.0 * d2 * sg * eps))
        core_lo, core_hi = r0 + d_lo, r0 + d_hi

        def regular(s, r0=r0, c=c):
            s = np.asarray(s, dtype=float)
            return dens(s) - c / (s - r0)

        r = adaptive_quad(regular, wlo, whi, rel_tol=rel_tol,
                          breakpoints=(r0,))
        total += r.value
        err += r.error
        evals += r.evaluations
        converged &= r.converged
        total += c * np.log((-d_lo) * (whi - r0) / ((r0 - wlo) * d_hi))
    return QuadResult(total, err, evals, converged)


def _ibp_tail(dens, dens_prime, freq, point, direction):
    """Two-term IBP value of int of dens * e^{i freq s} from `point` to
    +-infinity (direction = +1 / -1), for |freq * point| large."""
    ph = np.exp(1j * freq * point)
    return direction * ph * (-dens(point) / (1j * freq)
                             + dens_prime(point) / (1j * freq) ** 2)


def _k1_tails(tau, mu, x, big, rel_tol):
    """Tail completion of K1 beyond |xi| = big (where chi_1 = 1).

    The density A(xi) = xi^2/(tau - Phi) decays like -16/xi on the right
    and +16/xi on the left: each side converges conditionally for x != 0
    (two-term IBP), while for x = 0 only the pairing A(u) + A(-u) ~ -64/u^2
    converges (log-substituted quadrature).  Returns (value, error bound).
    """
    def A(xi):
        return xi ** 2 / (tau - np.asarray(phi(xi, mu)))

    def A_prime(xi):
        g = tau - float(phi(xi, mu))
        return 2.0 * xi / g + xi ** 2 * float(grad_phi(xi, mu)[0]) / g ** 2

    if x == 0.0:
        u_hi = 1e7

        def pair(s):
            u = np.exp(np.asarray(s, float))
            return (A(u) + A(-u)) * u

        r = adaptive_quad(pair, np.log(big), np.log(u_hi), rel_tol=rel_tol)
        return r.value, r.error + 70.0 / u_hi
    if abs(x) * big >= 8.0:
        val = (_ibp_tail(A, A_prime, x, big, +1.0)
               + _ibp_tail(A, A_prime, x, -big, -1.0))
        return val, 40.0 / (x * big) ** 2
    # too slowly oscillating to resolve and not exactly paired: report the
    # unresolved mass as error
    return 0.0 + 0.0j, 32.0 / max(abs(x) * big, 1.0)


def _k1_eps(tau, x, mu, eps, rel_tol):
    support_lo = max(100.0, 100.0 * abs(mu))

    def dens_amp(xi):
        return xi ** 2 * chi(1, xi, np.full_like(np.asarray(xi, float), mu))

    def denom(xi):
        return tau - np.asarray(phi(xi, mu))

    def denom_prime(xi):
        return -float(grad_phi(xi, mu)[0])

    def denom_second(xi):
        return -(0.375 * xi - 0.25)

    # window caps: |tau - Phi| = 1/eps
    hi_cap = max(cubic_roots_in_xi(tau + 1.0 / eps, mu).roots)
    lo_cap = min(cubic_roots_in_xi(tau - 1.0 / eps, mu).roots)
    roots = [r for r in cubic_roots_in_xi(tau, mu).roots
             if abs(r) > support_lo]

    # complete each eps level to the PV limit: numeric stretch out to where
    # chi_1 is identically 1, then analytic tails
    big = max(hi_cap, -lo_cap, 200.0, 200.0 * abs(mu)) + 60.0

    out = QuadResult(0.0 + 0.0j, 0.0, 0, True)
    for a, b in ((-big, -support_lo), (support_lo, big)):
        if b <= a:
            continue
        r = _pv_eps_axis(dens_amp, denom, denom_prime, denom_second, x,
                         roots, a, b, eps, rel_tol)
        out = QuadResult(out.value + r.value, out.error + r.error,
                         out.evaluations + r.evaluations,
                         out.converged and r.converged)
    tval, terr = _k1_tails(tau, mu, x, big, rel_tol)
    return QuadResult(out.value + tval, out.error + terr,
                      out.evaluations, out.converged)


def _k2_eps(tau, xi, y, eps, rel_tol):
    if abs(xi) <= 100.0:
        return QuadResult(0.0 + 0.0j, 0.0, 0, True)   # chi_2 vanishes
    A = tau - float(_p(xi))
    qv = float(_q(xi))
    support_lo = abs(xi) / 200.0

    def dens_amp(mu):
        mu = np.asarray(mu, dtype=float)
        return xi * mu * chi(2, np.full_like(mu, xi), mu)

    def denom(mu):
        return A - qv * np.asarray(mu, float) ** 2

    def denom_prime(mu):
        return -2.0 * qv * float(mu)

    def denom_second(mu):
        return -2.0 * qv

    cap = float(np.sqrt((abs(A) + 1.0 / eps) / abs(qv)))
    roots = []
    if A / qv > 0:
        m0 = float(np.sqrt(A / qv))
        roots = [m0, -m0]
    roots = [r for r in roots if abs(r) > support_lo]

    # numeric stretch out to where chi_2 is 1 in mu, then the paired
    # analytic tail (the density is odd in mu)
    big = max(cap, abs(xi) / 100.0 + 2.0)

    out = QuadResult(0.0 + 0.0j, 0.0, 0, True)
    for a, b in ((-big, -support_lo), (support_lo, big)):
        if b <= a:
            continue
        r = _pv_eps_axis(dens_amp, denom, denom_prime, denom_second, y,
                         roots, a, b, eps, rel_tol)
        out = QuadResult(out.value + r.value, out.error + r.error,
                         out.evaluations + r.evaluations,
                         out.converged and r.converged)

    # tails: density ~ -(xi/q) (1-psi(xi)) / mu out there; pairing gives
    # 2i c int_big^inf sin(y mu)/mu dmu = 2i c sgn(y) (pi/2 - Si(|y| big))
    if y != 0.0:
        from scipy.special import sici
        coeff = -(xi / qv) * (1.0 - float(bump_psi(xi)))
        si, _ = sici(abs(y) * big)
        tval = 2.0j * coeff * np.sign(y) * (np.pi / 2.0 - si)
        terr = 2.0 * abs(coeff) * abs(A / qv) / big ** 2
        out = QuadResult(out.value + tval, out.error + terr,
                         out.evaluations, out.converged)
    return out


def eval_K(kind: str, tau: float, *, x: float | None = None,
           mu: float | None = None, xi: float | None = None,
           y: float | None = None,
           eps_levels: tuple[float, ...] = (1e-5, 1e-6, 1e-7),
           rel_tol: float = 1e-6) -> KernelResult:
    """PV kernels K1(tau, x, mu) / K2(tau, xi, y).

    Each eps level evaluates the window eps < |tau - Phi| < 1/eps exactly
    (pole subtraction at the real roots, paired unbounded tails cut at the
    outer window edge); the returned error is the spread of the last two
    levels, which doubles as the extrapolation-stability measure.
    """
    if len(eps_levels) < 2:
        raise ValueError("need at least two eps levels for extrapolation")
    vals = []
    evals = 0
    converged = True
    qerr = 0.0
    for eps in eps_levels:
        if kind == "K1":
            if x is None or mu is None:
                raise ValueError("K1 requires x and mu")
            r = _k1_eps(tau, x, mu, eps, rel_tol)
        elif kind == "K2":
            if xi is None or y is None:
                raise ValueError("K2 requires xi and y")
            r = _k2_eps(tau, xi, y, eps, rel_tol)
        else:
            raise ValueError("kernel must be K1 or K2")
        vals.append(r.value)
        evals += r.evaluations
        converged &= r.converged
        qerr = max(qerr, r.error)
    spread = abs(vals[-1] - vals[-2])
    return KernelResult(vals[-1], spread + qerr, evals, converged)


# ---------------------------------------------------------------------------
# dispatch and batch-scan parsing

def eval_kernel(q: KernelQuery) -> KernelResult:
    if q.kind == "Ikj":
        return eval_I_kj(q.t, q.x, q.y, q.k, q.j, rel_tol=q.rel_tol)
    if q.kind == "Ij":
        return eval_I_j(q.t, q.x, q.y, q.j, rel_tol=q.rel_tol)
    if q.kind == "MuInner":
        return eval_mu_inner(q.xi, q.t, q.y, q.j, rel_tol=q.rel_tol)
    if q.kind in ("I0", "I3"):
        return eval_dispersive_kernel(q.kind, q.t, q.x, q.y,
                                      rel_tol=q.rel_tol)
    return eval_K(q.kind, q.tau, x=q.x, mu=q.mu, xi=q.xi, y=q.y,
                  rel_tol=q.rel_tol)


def parse_query_file(path) -> list[KernelQuery]:
    """One query per line: `kernel=Ikj t=1 x=3.5 y=2 k=8 j=2 [rel_tol=..]`."""
    queries = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            kw: dict = {}
            for tok in line.split():
                if "=" not in tok:
                    raise ValueError(f"line {ln}: expected key=value, "
                                     f"got {tok!r}")
                key, val = tok.split("=", 1)
                if key == "kernel":
                    kw["kind"] = val
                elif key in ("k", "j", "max_depth"):
                    kw[key] = int(val)
                else:
                    kw[key] = float(val)
            queries.append(KernelQuery(**kw))
    return queries
