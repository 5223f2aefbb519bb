"""Grids, field representations, the dispersion symbol, cutoffs and multipliers.

The computational domain is a periodic box [0, lx) x [0, ly) standing in for
the plane.  Spectral data are Fourier-series coefficients in numpy FFT
ordering: ``c = fft2(u) / (nx*ny)``, so that ``u(x,y) = sum c_ab exp(i(xi_a x
+ mu_b y))`` with ``xi_a = 2*pi*a/lx``, ``mu_b = 2*pi*b/ly``.  With lx = ly =
2*pi the lattice frequencies are integers, which puts the cutoff thresholds
(100, 200) exactly on lattice points.

Discrete L2 norm convention: ``||u||_2^2 = dx*dy*sum|u|^2 = lx*ly*sum|c|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = [
    "SpectralGrid",
    "EnvelopeField",
    "MultiplierSymbol",
    "WavepacketSpec",
    "GridFreeWavepacket",
    "phi",
    "grad_phi",
    "hessian_phi",
    "hessian_det_phi",
    "smooth_step",
    "bump_psi",
    "chi",
    "dyadic_bump",
    "plateau_bump",
    "apply_multiplier",
    "project",
    "littlewood_paley",
    "sobolev_symbol",
    "p3_symbol",
    "dx_symbol",
    "h_s_norm",
    "build_wavepacket",
]


# ---------------------------------------------------------------------------
# dispersion symbol

def phi(xi, mu):
    """Dispersion symbol: xi^3/16 - 3/8 xi mu^2 - xi^2/8 + mu^2/4 + xi/2."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return (xi ** 3 / 16.0 - 0.375 * xi * mu ** 2 - xi ** 2 / 8.0
            + 0.25 * mu ** 2 + 0.5 * xi)


def grad_phi(xi, mu):
    """Gradient of the dispersion symbol; vanishes only at (2/3, +-sqrt(10)/3)."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    dxi = 3.0 * xi ** 2 / 16.0 - 0.375 * mu ** 2 - 0.25 * xi + 0.5
    dmu = -0.75 * xi * mu + 0.5 * mu
    return dxi, dmu


def hessian_phi(xi, mu):
    """Hessian entries (phi_xixi, phi_ximu, phi_mumu)."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return 0.375 * xi - 0.25, -0.75 * mu, 0.5 - 0.75 * xi


def hessian_det_phi(xi, mu):
    a, b, c = hessian_phi(xi, mu)
    return a * c - b * b


# ---------------------------------------------------------------------------
# smooth cutoffs

def _sigma(t):
    """exp(-1/t) for t > 0, else 0; the standard C-infinity mollifier seed."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity monotone step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a = _sigma(t)
    b = _sigma(1.0 - t)
    return a / (a + b + np.finfo(float).tiny)


def bump_psi(x):
    """Smooth even cutoff: 1 on |x| <= 100, 0 on |x| >= 200, monotone between."""
    x = np.abs(np.asarray(x, dtype=float))
    return 1.0 - smooth_step((x - 100.0) / 100.0)


def chi(k: int, xi, mu):
    """Region cutoffs chi_0..chi_3.

    chi0 = psi(xi), chi3 = 1 - psi(xi), chi1 = (1 - psi(xi/mu))*chi3,
    chi2 = psi(xi/mu)*chi3.  On the axis mu = 0 the quotient is taken as
    infinity with psi(inf) = 0, so chi1 = chi3 and chi2 = 0 there.
    """
    if k not in (0, 1, 2, 3):
        raise ValueError(f"region index must be 0..3, got {k}")
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if k == 0:
        return bump_psi(xi) * np.ones_like(mu)
    hi = 1.0 - bump_psi(xi)
    if k == 3:
        return hi * np.ones_like(mu)
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = np.where(mu == 0.0, np.inf, xi / np.where(mu == 0.0, 1.0, mu))
    psi_q = np.where(np.isinf(quot), 0.0, bump_psi(quot))
    if k == 1:
        return (1.0 - psi_q) * hi
    return psi_q * hi


def plateau_bump(x, a, b, c, d):
    """Smooth bump: 0 outside (a, d), 1 on [b, c], supported in [a, d]."""
    x = np.asarray(x, dtype=float)
    up = smooth_step((x - a) / (b - a))
    down = 1.0 - smooth_step((x - c) / (d - c))
    return up * down


def dyadic_bump(n: int, x):
    """Smooth bump at dyadic scale 2^n.

    Supported in [2^(n-1), 2^(n+1)], equal to 1 on the middle half
    [5/6*2^n, 7/6*2^n].  n = 1 is special-cased with support [0, 2] and
    plateau [5/6, 7/6].
    """
    if n < 0:
        raise ValueError("dyadic index must be nonnegative")
    if n == 1:
        return plateau_bump(x, 0.0, 5.0 / 6.0, 7.0 / 6.0, 2.0)
    s = 2.0 ** n
    return plateau_bump(x, 0.5 * s, 5.0 / 6.0 * s, 7.0 / 6.0 * s, 2.0 * s)


# ---------------------------------------------------------------------------
# grid and fields

@dataclass(frozen=True)
class SpectralGrid:
    """Periodic nx x ny grid on [0,lx) x [0,ly) with its frequency lattice."""

    nx: int
    ny: int
    lx: float = 2.0 * np.pi
    ly: float = 2.0 * np.pi

    def __post_init__(self):
        for n, name in ((self.nx, "nx"), (self.ny, "ny")):
            if n < 8 or n % 2 != 0:
                raise ValueError(f"{name} must be even and >= 8, got {n}")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError("box sides must be positive")

    @property
    def xi(self) -> np.ndarray:
        """1D xi lattice in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.nx, d=1.0 / self.nx) / self.lx

    @property
    def mu(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.ny, d=1.0 / self.ny) / self.ly

    def lattice(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable (XI, MU) meshes of shape (nx,1), (1,ny)."""
        return self.xi[:, None], self.mu[None, :]

    @property
    def xi_max(self) -> float:
        return float(np.pi * self.nx / self.lx)

    @property
    def mu_max(self) -> float:
        return float(np.pi * self.ny / self.ly)

    def x(self) -> np.ndarray:
        return np.arange(self.nx) * (self.lx / self.nx)

    def y(self) -> np.ndarray:
        return np.arange(self.ny) * (self.ly / self.ny)

    @property
    def cell_area(self) -> float:
        return (self.lx / self.nx) * (self.ly / self.ny)

    def nyquist_mask(self) -> np.ndarray:
        """Boolean (nx, ny) mask, False on the unpaired Nyquist row/column."""
        m = np.ones((self.nx, self.ny), dtype=bool)
        m[self.nx // 2, :] = False
        m[:, self.ny // 2] = False
        return m


PHYSICAL = "physical"
SPECTRAL = "spectral"


@dataclass(frozen=True)
class EnvelopeField:
    """Complex field on a grid, in physical or spectral representation.

    Treated as immutable: operations return new fields.
    """

    grid: SpectralGrid
    representation: str
    data: np.ndarray

    def __post_init__(self):
        if self.representation not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"bad representation {self.representation!r}")
        if self.data.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"data shape {self.data.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})")
        if self.data.dtype != np.complex128:
            object.__setattr__(self, "data",
                               np.ascontiguousarray(self.data, np.complex128))
        self.data.setflags(write=False)

    @classmethod
    def from_physical(cls, grid: SpectralGrid, u: np.ndarray) -> "EnvelopeField":
        return cls(grid, PHYSICAL, np.asarray(u, np.complex128))

    @classmethod
    def from_spectral(cls, grid: SpectralGrid, c: np.ndarray) -> "EnvelopeField":
        return cls(grid, SPECTRAL, np.asarray(c, np.complex128))

    @classmethod
    def zero(cls, grid: SpectralGrid) -> "EnvelopeField":
        return cls(grid, SPECTRAL, np.zeros((grid.nx, grid.ny), np.complex128))

    def to_spectral(self) -> "EnvelopeField":
        if self.representation == SPECTRAL:
            return self
        c = np.fft.fft2(self.data) / (self.grid.nx * self.grid.ny)
        return EnvelopeField(self.grid, SPECTRAL, c)

    def to_physical(self) -> "EnvelopeField":
        if self.representation == PHYSICAL:
            return self
        u = np.fft.ifft2(self.data * (self.grid.nx * self.grid.ny))
        return EnvelopeField(self.grid, PHYSICAL, u)

    def spectral_data(self) -> np.ndarray:
        return self.to_spectral().data

    def physical_data(self) -> np.ndarray:
        return self.to_physical().data

    def l2_norm(self) -> float:
        if self.representation == SPECTRAL:
            return float(np.sqrt(self.grid.lx * self.grid.ly
                                 * np.sum(np.abs(self.data) ** 2)))
        return float(np.sqrt(self.grid.cell_area
                             * np.sum(np.abs(self.data) ** 2)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.physical_data())))

    def __add__(self, other: "EnvelopeField") -> "EnvelopeField":
        a, b = _same_rep(self, other)
        return EnvelopeField(a.grid, a.representation, a.data + b.data)

    def __sub__(self, other: "EnvelopeField") -> "EnvelopeField":
        a, b = _same_rep(self, other)
        return EnvelopeField(a.grid, a.representation, a.data - b.data)

    def __mul__(self, scalar: complex) -> "EnvelopeField":
        return EnvelopeField(self.grid, self.representation, self.data * scalar)

    __rmul__ = __mul__


def _same_rep(a: EnvelopeField, b: EnvelopeField):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    if a.representation != b.representation:
        b = b.to_spectral() if a.representation == SPECTRAL else b.to_physical()
    return a, b


# ---------------------------------------------------------------------------
# multipliers

@dataclass(frozen=True)
class MultiplierSymbol:
    """A Fourier multiplier m(xi, mu), evaluable on any frequency lattice."""

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "symbol"
    sup_norm: float | None = None   # finite bound, when one is declared

    def __call__(self, xi, mu):
        return self.func(xi, mu)


def sobolev_symbol(s: float) -> MultiplierSymbol:
    """Bracket weight (1 + |xi| + |mu|)^s."""
    return MultiplierSymbol(
        lambda xi, mu: (1.0 + np.abs(xi) + np.abs(mu)) ** s,
        name=f"<grad>^{s}",
        sup_norm=1.0 if s <= 0 else None)


def dx_symbol(order: float = 1.0) -> MultiplierSymbol:
    """|xi|^order, the symbol of D_x^order."""
    return MultiplierSymbol(lambda xi, mu: np.abs(xi) ** order + 0.0 * mu,
                            name=f"Dx^{order}")


def p3_symbol() -> MultiplierSymbol:
    """xi / sqrt(xi^2 + mu^2), zero at the origin mode."""

    def f(xi, mu):
        r = np.hypot(xi, mu)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(r > 0, xi / np.where(r > 0, r, 1.0), 0.0)
        return out

    return MultiplierSymbol(f, name="P3", sup_norm=1.0)


def apply_multiplier(f: EnvelopeField, m: MultiplierSymbol) -> EnvelopeField:
    """Pointwise spectral multiplication; Nyquist row/column zero-masked."""
    fs = f.to_spectral()
    xi, mu = f.grid.lattice()
    vals = np.broadcast_to(np.asarray(m(xi, mu)),
                           (f.grid.nx, f.grid.ny))
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise ValueError(
            f"symbol {m.name} is not finite at lattice point "
            f"(xi={f.grid.xi[bad[0]]}, mu={f.grid.mu[bad[1]]})")
    out = fs.data * vals
    out = np.where(f.grid.nyquist_mask(), out, 0.0)
    return EnvelopeField(f.grid, SPECTRAL, out)


def project(f: EnvelopeField, which: str) -> EnvelopeField:
    """Frequency projections P0/P1/P2 (region cutoffs) and P3 = dx |grad|^-1."""
    which = which.upper()
    if which in ("P0", "P1", "P2"):
        k = int(which[1])
        return apply_multiplier(
            f, MultiplierSymbol(lambda xi, mu, k=k: chi(k, xi, mu),
                                name=which, sup_norm=1.0))
    if which == "P3":
        return apply_multiplier(f, p3_symbol())
    raise ValueError(f"unknown projection {which!r}")


def littlewood_paley(f: EnvelopeField, j: int) -> EnvelopeField:
    """Dyadic annulus multiplier Q_j: 1 on 2^j <= |(xi,mu)| <= 2^(j+1),
    supported in [2^(j-1), 2^(j+2)]."""
    if j < 0:
        raise ValueError("dyadic index must be nonnegative")
    rmax = float(np.hypot(f.grid.xi_max, f.grid.mu_max))
    if 2.0 ** (j + 2) > rmax:
        raise ValueError(
            f"annulus [2^{j - 1}, 2^{j + 2}] exceeds the lattice radius {rmax:.1f}")
    lo, hi = 2.0 ** j, 2.0 ** (j + 1)

    def m(xi, mu):
        r = np.hypot(xi, mu)
        return plateau_bump(r, lo / 2.0, lo, hi, 2.0 * hi)

    return apply_multiplier(f, MultiplierSymbol(m, name=f"Q_{j}", sup_norm=1.0))


def h_s_norm(f: EnvelopeField, s: float) -> float:
    """Discrete H^s norm with the bracket weight (1 + |xi| + |mu|)^s."""
    c = f.spectral_data()
    xi, mu = f.grid.lattice()
    w = (1.0 + np.abs(xi) + np.abs(mu)) ** s
    return float(np.sqrt(f.grid.lx * f.grid.ly * np.sum((w * np.abs(c)) ** 2)))


# ---------------------------------------------------------------------------
# ill-posedness wavepacket

@dataclass(frozen=True)
class WavepacketSpec:
    """Separable spectral wavepacket c(N) f(xi) g(mu).

    f is odd: plateau +1 on [n1 - W1/2, n1 + W1/2] (W1 = n1^(2 eps)),
    supported in [n1 - W1, n1 + W1], mirrored with value -1 on the negative
    axis.  g is even with +1 plateaus around +-n2.  c(N) is computed so the
    H^s norm is exactly 1.
    """

    n1: float
    n2: float
    eps: float
    s: float
    profile_resolution: int = 512   # 1D quadrature nodes per support interval

    def __post_init__(self):
        if not (0.0 < self.eps < 0.5):
            raise ValueError("eps must lie in (0, 1/2)")
        if self.n1 <= 0 or self.n2 <= 0:
            raise ValueError("center frequencies must be positive")
        if self.n1 ** (2 * self.eps) >= self.n1 / 2:
            raise ValueError("n1^(2 eps) < n1/2 violated: bump reaches the origin")
        if self.n2 ** (2 * self.eps) >= self.n2 / 2:
            raise ValueError("n2^(2 eps) < n2/2 violated: bump reaches the origin")
        if self.profile_resolution < 16:
            raise ValueError("profile resolution too small")

    @property
    def w1(self) -> float:
        return self.n1 ** (2.0 * self.eps)

    @property
    def w2(self) -> float:
        return self.n2 ** (2.0 * self.eps)

    def f_profile(self, xi):
        """Odd xi-profile before normalization."""
        xi = np.asarray(xi, dtype=float)
        pos = plateau_bump(np.abs(xi), self.n1 - self.w1, self.n1 - self.w1 / 2,
                           self.n1 + self.w1 / 2, self.n1 + self.w1)
        return np.sign(xi) * pos

    def g_profile(self, mu):
        """Even mu-profile before normalization."""
        mu = np.asarray(mu, dtype=float)
        return plateau_bump(np.abs(mu), self.n2 - self.w2, self.n2 - self.w2 / 2,
                            self.n2 + self.w2 / 2, self.n2 + self.w2)


@dataclass(frozen=True)
class GridFreeWavepacket:
    """Compact-support tabulation-free form: coefficient plus axis profiles."""

    spec: WavepacketSpec
    c: float

    def hat(self, xi, mu):
        """Spectral density c * f(xi) * g(mu) (continuum transform values)."""
        return self.c * self.spec.f_profile(xi) * self.spec.g_profile(mu)

    def support_xi(self) -> list[tuple[float, float]]:
        s = self.spec
        return [(-s.n1 - s.w1, -s.n1 + s.w1), (s.n1 - s.w1, s.n1 + s.w1)]

    def support_mu(self) -> list[tuple[float, float]]:
        s = self.spec
        return [(-s.n2 - s.w2, -s.n2 + s.w2), (s.n2 - s.w2, s.n2 + s.w2)]


@lru_cache(maxsize=64)
def _gauss_nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


def _hs_norm_sq_continuum(spec: WavepacketSpec, s: float) -> float:
    """(2 pi)^2 int (1+|xi|+|mu|)^(2s) f^2 g^2 dxi dmu over the support boxes."""
    n = spec.profile_resolution
    t, w = _gauss_nodes(min(n, 200))
    total = 0.0
    for a, b in [(spec.n1 - spec.w1, spec.n1 + spec.w1)]:
        for c, d in [(spec.n2 - spec.w2, spec.n2 + spec.w2)]:
            xi = 0.5 * (a + b) + 0.5 * (b - a) * t
            mu = 0.5 * (c + d) + 0.5 * (d - c) * t
            wxi = 0.5 * (b - a) * w
            wmu = 0.5 * (d - c) * w
            fx = spec.f_profile(xi) ** 2
            gy = spec.g_profile(mu) ** 2
            wt = (1.0 + np.abs(xi)[:, None] + np.abs(mu)[None, :]) ** (2 * s)
            total += np.einsum("i,j,ij->", wxi * fx, wmu * gy, wt)
    # four sign quadrants: |f|, |g| even in |.| so each quadrant contributes
    # the same weight integral with |xi|, |mu| unchanged
    return (2.0 * np.pi) ** 2 * 4.0 * total


def build_wavepacket(spec: WavepacketSpec,
                     grid: SpectralGrid | None = None,
                     grid_free: bool = False):
    """Construct the normalized wavepacket.

    grid_free=True returns a GridFreeWavepacket whose continuum H^s norm is 1;
    otherwise returns an EnvelopeField on `grid` whose discrete H^s norm is 1.
    """
    if grid_free:
        nsq = _hs_norm_sq_continuum(spec, spec.s)
        return GridFreeWavepacket(spec, 1.0 / np.sqrt(nsq))
    if grid is None:
        raise ValueError("grid required unless grid_free=True")
    if grid.xi_max < spec.n1 + spec.w1 or grid.mu_max < spec.n2 + spec.w2:
        raise ValueError("wavepacket support exceeds the frequency lattice")
    xi, mu = grid.lattice()
    c = spec.f_profile(xi) * spec.g_profile(mu)
    c = np.where(grid.nyquist_mask(), c, 0.0)
    f = EnvelopeField.from_spectral(grid, c)
    nrm = h_s_norm(f, spec.s)
    if nrm == 0.0:
        raise ValueError("wavepacket support does not meet the lattice")
    return EnvelopeField.from_spectral(grid, c / nrm)
