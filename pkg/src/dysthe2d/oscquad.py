"""Oscillatory 1D quadrature toolkit.

Two engines:

* adaptive_quad: panel-bisection Gauss quadrature with an embedded error
  estimate, for smooth or mildly oscillatory complex integrands.

* osc_integral: for integrands amp(x) * exp(i*phase(x)) whose phase may run
  through millions of cycles.  Stationary points of the phase get dedicated
  windows (resolved by adaptive Gauss); on the monotone gaps the integral is
  computed in the phase variable, s = phase(x), where it becomes
  int g(s) e^{is} ds with g = amp/phase'.  Each s-panel fits g by a Chebyshev
  polynomial and integrates polynomial times e^{is} with exact moments, so
  the cost is set by the variation of g, not by the cycle count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

__all__ = ["QuadResult", "adaptive_quad", "osc_integral", "brute_osc_integral"]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float          # absolute error estimate
    evaluations: int
    converged: bool


@lru_cache(maxsize=16)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


# ---------------------------------------------------------------------------
# adaptive Gauss

def _panel(f, a, b, n):
    x, w = _gauss(n)
    xs = 0.5 * (a + b) + 0.5 * (b - a) * x
    return 0.5 * (b - a) * np.sum(w * f(xs))


def adaptive_quad(f, a: float, b: float, rel_tol: float = 1e-8,
                  max_depth: int = 14, breakpoints=(),
                  abs_tol: float | None = None) -> QuadResult:
    """Bisection-adaptive Gauss(16/32) quadrature of a complex integrand."""
    edges = sorted({float(a), float(b), *(p for p in breakpoints if a < p < b)})
    total = 0.0 + 0.0j
    err = 0.0
    evals = 0
    converged = True
    if abs_tol is None:
        # scale for the relative tolerance: first coarse pass
        coarse = sum(_panel(f, lo, hi, 16) for lo, hi in zip(edges, edges[1:]))
        abs_tol = rel_tol * max(abs(coarse), 1e-300)

    stack = [(lo, hi, 0) for lo, hi in zip(edges, edges[1:])]
    while stack:
        lo, hi, depth = stack.pop()
        c16 = _panel(f, lo, hi, 16)
        c32 = _panel(f, lo, hi, 32)
        evals += 48
        d = abs(c32 - c16)
        if d <= abs_tol / 4.0 or depth >= max_depth:
            total += c32
            err += d
            if depth >= max_depth and d > abs_tol:
                converged = False
            continue
        mid = 0.5 * (lo + hi)
        stack.append((lo, mid, depth + 1))
        stack.append((mid, hi, depth + 1))
    return QuadResult(total, err, evals, converged)


# ---------------------------------------------------------------------------
# exact moments int_{-1}^{1} u^k e^{i h u} du

def _moments(h: float, kmax: int) -> np.ndarray:
    m = np.empty(kmax + 1, dtype=np.complex128)
    if abs(h) < 10.0:
        # Taylor branch: 2 * sum_{m, k+m even} (ih)^m / (m! (k+m+1))
        terms = 60
        ih_pows = (1j * h) ** np.arange(terms)
        fact = np.cumprod(np.concatenate(([1.0], np.arange(1, terms))))
        for k in range(kmax + 1):
            ms = np.arange(k % 2, terms, 2)
            m[k] = 2.0 * np.sum(ih_pows[ms] / (fact[ms] * (k + ms + 1)))
        return m
    # forward recurrence, stable for |h| >> k
    eih = np.exp(1j * h)
    emih = np.exp(-1j * h)
    m[0] = (eih - emih) / (1j * h)
    for k in range(1, kmax + 1):
        m[k] = (eih - (-1) ** k * emih) / (1j * h) - k / (1j * h) * m[k - 1]
    return m


def _filon_panel(g, s0: float, s1: float, deg: int = 16):
    """int_{s0}^{s1} g(s) e^{is} ds with g interpolated by Chebyshev nodes."""
    mid = 0.5 * (s0 + s1)
    half = 0.5 * (s1 - s0)
    nodes = mid + half * np.cos(np.pi * np.arange(deg + 1) / deg)
    vals = g(nodes)
    cheb = np.polynomial.chebyshev.Chebyshev.fit(
        (nodes - mid) / half, vals, deg, domain=[-1, 1])
    coeffs = np.polynomial.chebyshev.cheb2poly(cheb.coef)
    mom = _moments(half, len(coeffs) - 1)
    val = half * np.exp(1j * mid) * np.sum(coeffs * mom)
    # embedded estimate: drop to half the degree
    cheb8 = np.polynomial.chebyshev.Chebyshev.fit(
        (nodes - mid) / half, vals, deg // 2, domain=[-1, 1])
    co8 = np.polynomial.chebyshev.cheb2poly(cheb8.coef)
    val8 = half * np.exp(1j * mid) * np.sum(co8 * mom[:len(co8)])
    return val, abs(val - val8), deg + 1


def _stationary_points(dphase, a, b, n_probe=4000):
    xs = np.linspace(a, b, n_probe)
    ds = np.asarray(dphase(xs))
    roots = []
    sign = np.sign(ds)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in flips:
        roots.append(brentq(lambda x: float(dphase(np.asarray([x]))[0]),
                            xs[i], xs[i + 1], xtol=1e-13 * max(1.0, abs(b))))
    # exact zeros on the probe grid
    for i in np.nonzero(ds == 0)[0]:
        roots.append(float(xs[i]))
    return sorted(set(roots))


def osc_integral(amp, phase, dphase, a: float, b: float,
                 rel_tol: float = 1e-7, window_cycles: float = 12.0,
                 max_panels: int = 4000) -> QuadResult:
    """int_a^b amp(x) e^{i phase(x)} dx for phases with many cycles.

    amp, phase, dphase must accept numpy arrays.  Stationary points of the
    phase get windows of +-window_cycles cycles handled by adaptive Gauss;
    the monotone remainder is integrated in the phase variable by Chebyshev
    Filon panels with exact moments.
    """
    stats = _stationary_points(dphase, a, b)

    # endpoint degeneracy: a phase whose derivative vanishes at (or just
    # outside) an endpoint has no interior sign flip but still needs a
    # stationary window, else the phase-variable substitution meets a
    # square-root singularity there
    for e in (a, b):
        if any(abs(r - e) < 1e-12 * max(1.0, abs(e)) for r in stats):
            continue
        h = 1e-5 * max(1.0, abs(b - a))
        d1 = float(dphase(np.asarray([e]))[0])
        lo_s = max(a, e - h)
        hi_s = min(b, e + h)
        d2 = (float(dphase(np.asarray([hi_s]))[0])
              - float(dphase(np.asarray([lo_s]))[0])) / (hi_s - lo_s)
        if d2 == 0.0:
            continue
        root = e - d1 / d2
        hw = np.sqrt(2.0 * window_cycles * TWO_PI / abs(d2))
        if abs(root - e) < hw:
            stats = sorted(set(stats + [e]))

    evals = 0
    total = 0.0 + 0.0j
    err = 0.0
    converged = True

    # magnitude scale for tolerances: an oscillatory integral with C cycles
    # of a bounded amplitude has size about max|amp| * (b-a) / sqrt(1+C)
    probe = np.linspace(a, b, 512)
    amp_max = float(np.max(np.abs(amp(probe))))
    if amp_max == 0.0:
        return QuadResult(0.0 + 0.0j, 0.0, 512, True)
    cycles = float(np.sum(np.abs(np.diff(np.asarray(phase(probe)))))) / TWO_PI
    scale = amp_max * (b - a) / np.sqrt(1.0 + cycles)
    abs_tol = rel_tol * scale

    # carve windows around stationary points
    segments = []      # (lo, hi, is_window)
    cursor = a

    def window_halfwidth(x0):
        # phase ~ phi0 + 0.5 phi''(x0) dx^2: reach window_cycles*2pi
        h = 1e-4 * max(1.0, abs(x0))
        d2 = (float(dphase(np.asarray([x0 + h]))[0])
              - float(dphase(np.asarray([x0 - h]))[0])) / (2 * h)
        if d2 == 0.0:
            hw = 0.05 * (b - a)
        else:
            hw = np.sqrt(2.0 * window_cycles * TWO_PI / abs(d2))
        # the quadratic model can badly overshoot when higher-order phase
        # terms dominate; shrink until the actual phase swing fits the budget
        budget = 2.0 * window_cycles * TWO_PI
        p0 = float(phase(np.asarray([x0]))[0])
        while hw > 1e-12 * max(1.0, b - a):
            ends = [e for e in (x0 - hw, x0 + hw) if a <= e <= b]
            swing = max((abs(float(phase(np.asarray([e]))[0]) - p0)
                         for e in ends), default=0.0)
            if swing <= budget:
                break
            hw *= 0.6
        return hw

    for x0 in stats:
        hw = window_halfwidth(x0)
        lo, hi = max(a, x0 - hw), min(b, x0 + hw)
        if lo > cursor:
            segments.append((cursor, lo, False))
        segments.append((max(cursor, lo), hi, True))
        cursor = hi
    if cursor < b:
        segments.append((cursor, b, False))

    def integrand(xs):
        return amp(xs) * np.exp(1j * phase(xs))

    for lo, hi, is_window in segments:
        if hi <= lo:
            continue
        if is_window:
            r = adaptive_quad(integrand, lo, hi, rel_tol=rel_tol,
                              abs_tol=abs_tol)
            total += r.value
            err += r.error
            evals += r.evaluations
            converged &= r.converged
            continue
        # monotone gap: integrate in the phase variable
        s_lo = float(phase(np.asarray([lo]))[0])
        s_hi = float(phase(np.asarray([hi]))[0])
        if s_hi == s_lo:
            continue
        direction = 1.0 if s_hi > s_lo else -1.0

        s_min, s_max = min(s_lo, s_hi), max(s_lo, s_hi)

        def x_of_s(s_vals, lo=lo, hi=hi, s_min=s_min, s_max=s_max):
            out = np.empty_like(s_vals)
            for i, s in enumerate(s_vals):
                s = min(max(s, s_min), s_max)
                if s == s_min or s == s_max:
                    out[i] = lo if (s == s_min) == (s_lo <= s_hi) else hi
                    continue
                out[i] = brentq(
                    lambda x: float(phase(np.asarray([x]))[0]) - s, lo, hi,
                    xtol=1e-14 * max(1.0, abs(hi)))
            return out

        def g(s_vals):
            xs = x_of_s(s_vals)
            return amp(xs) / dphase(xs)

        span = abs(s_hi - s_lo)
        # geometric panels growing away from the slow (small |phase'|) end,
        # where g = amp/phase' varies fastest
        d_lo = abs(float(dphase(np.asarray([lo]))[0]))
        d_hi = abs(float(dphase(np.asarray([hi]))[0]))
        n_seg = max(6, int(np.ceil(np.log2(span / TWO_PI + 2.0)) * 4))
        u = np.linspace(0.0, 1.0, n_seg + 1) ** 3
        if d_lo <= d_hi:
            edges = s_lo + direction * span * u
        else:
            edges = s_hi - direction * span * u[::-1]
        n_done = 0
        pending = list(zip(edges[:-1], edges[1:]))
        while pending:
            p0, p1 = pending.pop()
            half = 0.5 * abs(p1 - p0)
            if n_done > max_panels:
                converged = False
                break
            if 10.0 < half < 40.0:
                pm = 0.5 * (p0 + p1)
                pending += [(p0, pm), (pm, p1)]
                continue
            v, e, n = _filon_panel(g, min(p0, p1), max(p0, p1))
            v *= direction
            if e > 0.25 * abs_tol and half > 1e-6:
                pm = 0.5 * (p0 + p1)
                pending += [(p0, pm), (pm, p1)]
                continue
            total += v
            err += e
            evals += n
            n_done += 1
    return QuadResult(total, err, evals, converged)


def brute_osc_integral(amp, phase, a: float, b: float,
                       pts_per_cycle: int = 20, n_min: int = 2000) -> complex:
    """Oversampled trapezoid oracle; only viable for modest cycle counts."""
    probe = np.linspace(a, b, 512)
    ph = np.asarray(phase(probe))
    cycles = np.sum(np.abs(np.diff(ph))) / TWO_PI
    n = int(max(n_min, pts_per_cycle * cycles))
    xs = np.linspace(a, b, n)
    ys = amp(xs) * np.exp(1j * phase(xs))
    return complex(np.trapezoid(ys, xs))
