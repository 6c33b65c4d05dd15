"""Continuous apparatus (meter) wavefunctions on a uniform grid.

The meter is an infinite-mass pointer described by conjugate variables
(x, p) with [x, p] = i.  Wavefunctions are sampled on a uniform x grid;
the momentum representation lives on the reciprocal DFT grid with the
convention

    phi(p) = (2 pi)^(-1/2) * integral e^(-i p x) phi(x) dx.

Densities are normalized as sum |phi|^2 * step = 1 on whichever axis the
samples live.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GridCoverageError, RepresentationError, ResolutionError

EDGE_GUARD_SAMPLES = 3
EDGE_GUARD_MASS = 1e-8
HEAVY_TAIL_FRACTION = 0.025   # outer 5% of the grid, split across both ends
HEAVY_TAIL_MASS = 1e-6
DENSITY_FLOOR = 1e-14

POSITION = "position"
MOMENTUM = "momentum"


@dataclass(frozen=True)
class GridSpec:
    """Uniform position grid; the momentum axis is its DFT reciprocal."""

    x_min: float
    dx: float
    n: int

    def __post_init__(self):
        if self.n < 64 or (self.n & (self.n - 1)) != 0:
            raise ValueError("n must be a power of two, n >= 64")
        if self.dx <= 0:
            raise ValueError("dx must be positive")

    @property
    def span(self) -> float:
        return self.n * self.dx

    @property
    def dp(self) -> float:
        return 2 * np.pi / (self.n * self.dx)

    @property
    def p_min(self) -> float:
        return -(self.n // 2) * self.dp

    @property
    def p_max(self) -> float:
        return np.pi / self.dx

    def x_points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def p_points(self) -> np.ndarray:
        return self.p_min + self.dp * np.arange(self.n)

    @classmethod
    def centered(cls, half_span: float, n: int = 4096) -> "GridSpec":
        """Symmetric grid on [-half_span, half_span) with x = 0 on a node."""
        dx = 2 * half_span / n
        return cls(-half_span, dx, n)


def grid_for_feature(width: float, n: int = 4096, factor: float = 16.0) -> GridSpec:
    """Default auto-sized grid: span = `factor` times the widest feature."""
    return GridSpec.centered(factor * width / 2, n)


@dataclass(frozen=True)
class ApparatusWavefunction:
    """Meter wavefunction tagged by representation.

    `grid` is always the position grid; momentum-representation samples live
    on grid.p_points().
    """

    grid: GridSpec
    samples: np.ndarray
    rep: str = POSITION

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.size != self.grid.n:
            raise ValueError("sample count does not match the grid")
        object.__setattr__(self, "samples", s)
        if self.rep not in (POSITION, MOMENTUM):
            raise RepresentationError(f"unknown representation {self.rep!r}")
        if abs(np.sum(np.abs(s) ** 2) * self.measure - 1.0) > 1e-9:
            raise ValueError("wavefunction is not grid-normalized")

    @property
    def measure(self) -> float:
        return self.grid.dx if self.rep == POSITION else self.grid.dp

    def coordinates(self) -> np.ndarray:
        return self.grid.x_points() if self.rep == POSITION else self.grid.p_points()

    def density(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


def normalized_wavefunction(grid: GridSpec, samples, rep: str = POSITION,
                            guard_edges: bool = True) -> ApparatusWavefunction:
    """Normalize raw samples on the grid and optionally enforce the edge guard."""
    s = np.asarray(samples, dtype=complex)
    measure = grid.dx if rep == POSITION else grid.dp
    nrm2 = np.sum(np.abs(s) ** 2) * measure
    if nrm2 <= 0:
        raise ValueError("zero-norm samples")
    psi = ApparatusWavefunction(grid, s / np.sqrt(nrm2), rep)
    if guard_edges:
        check_coverage(psi)
    return psi


def _edge_mass(density: np.ndarray, measure: float) -> float:
    k = EDGE_GUARD_SAMPLES
    return float((density[:k].sum() + density[-k:].sum()) * measure)


def check_coverage(psi: ApparatusWavefunction):
    """Require < 1e-8 probability within 3 samples of each grid edge, both reps."""
    if _edge_mass(psi.density(), psi.measure) > EDGE_GUARD_MASS:
        raise GridCoverageError(f"edge mass in {psi.rep} rep exceeds {EDGE_GUARD_MASS}")
    other = to_momentum(psi) if psi.rep == POSITION else to_position(psi)
    if _edge_mass(other.density(), other.measure) > EDGE_GUARD_MASS:
        raise GridCoverageError(f"edge mass in {other.rep} rep exceeds {EDGE_GUARD_MASS}")


# ---------------------------------------------------------------------------
# Fourier transforms (unitary on the grid)
# ---------------------------------------------------------------------------

def to_momentum(psi: ApparatusWavefunction) -> ApparatusWavefunction:
    """Position -> momentum, phi(p_k) = (dx / sqrt(2 pi)) sum_j phi_j exp(-i p_k x_j)."""
    if psi.rep != POSITION:
        raise RepresentationError("to_momentum expects a position-representation state")
    g = psi.grid
    signs = np.where(np.arange(g.n) % 2 == 0, 1.0, -1.0)
    f = np.fft.fft(psi.samples * signs)
    out = f * np.exp(-1j * g.p_points() * g.x_min) * g.dx / np.sqrt(2 * np.pi)
    return ApparatusWavefunction(g, out, MOMENTUM)


def to_position(psi: ApparatusWavefunction) -> ApparatusWavefunction:
    """Momentum -> position, the inverse of to_momentum (unitary round trip)."""
    if psi.rep != MOMENTUM:
        raise RepresentationError("to_position expects a momentum-representation state")
    g = psi.grid
    pre = psi.samples * np.exp(1j * g.p_points() * g.x_min)
    f = np.fft.ifft(pre) * g.n
    signs = np.where(np.arange(g.n) % 2 == 0, 1.0, -1.0)
    out = f * signs * g.dp / np.sqrt(2 * np.pi)
    return ApparatusWavefunction(g, out, POSITION)


def fourier_at(p_targets: np.ndarray, x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Direct quadrature (2 pi)^(-1/2) integral e^(-ipx) f(x) dx at arbitrary p.

    Used when fringe structure must be sampled finer than the DFT spacing.
    `f` may be a stack of functions with shape (m, len(x)); the transforms
    share one kernel evaluation.
    """
    p_targets = np.atleast_1d(np.asarray(p_targets, dtype=float))
    f = np.asarray(f, dtype=complex)
    stacked = f.ndim == 2
    ft = f.T if stacked else f
    dx = x[1] - x[0]
    out = np.empty((p_targets.size, f.shape[0]) if stacked else p_targets.size,
                   dtype=complex)
    chunk = max(1, int(4e6 // max(x.size, 1)))
    for i in range(0, p_targets.size, chunk):
        kernel = np.exp(-1j * p_targets[i:i + chunk, None] * x[None, :])
        out[i:i + chunk] = kernel @ ft
    out *= dx / np.sqrt(2 * np.pi)
    return out.T if stacked else out


# ---------------------------------------------------------------------------
# state families
# ---------------------------------------------------------------------------

def gaussian_state(sigma_x: float, x0: float, p0: float, grid: GridSpec) -> ApparatusWavefunction:
    """Minimum-uncertainty packet, real envelope times exp(i p0 (x - x0))."""
    if sigma_x <= 0:
        raise ValueError("sigma_x must be positive")
    x = grid.x_points()
    if x0 - 8 * sigma_x < x[0] or x0 + 8 * sigma_x > x[-1]:
        raise GridCoverageError("grid does not span x0 +- 8 sigma_x")
    if abs(p0) + 4.0 / sigma_x > grid.p_max:
        raise GridCoverageError("Nyquist momentum does not cover p0 +- 8 sigma_p")
    env = np.exp(-((x - x0) ** 2) / (4 * sigma_x**2))
    return normalized_wavefunction(grid, env * np.exp(1j * p0 * (x - x0)), POSITION)


def window_state(x_tilde: float, epsilon: float, grid: GridSpec) -> ApparatusWavefunction:
    """Square pulse of half-width epsilon centered at x_tilde.

    Edges snap to the nearest half-sample boundary so the sinc transform is
    reproducible; the snapped center/half-width are recoverable from the
    support.
    """
    if epsilon < 4 * grid.dx:
        raise ResolutionError("window half-width below 4 grid steps")
    x = grid.x_points()
    # half-sample boundaries sit at x_j +- dx/2
    lo = grid.x_min + (np.floor((x_tilde - epsilon - grid.x_min) / grid.dx + 0.5) + 0.5) * grid.dx
    hi = grid.x_min + (np.floor((x_tilde + epsilon - grid.x_min) / grid.dx + 0.5) + 0.5) * grid.dx
    inside = (x > lo) & (x < hi)
    if not np.any(inside):
        raise ResolutionError("window does not cover any grid cell")
    samples = np.zeros(grid.n, dtype=complex)
    samples[inside] = 1.0
    return normalized_wavefunction(grid, samples, POSITION)


def window_support(psi: ApparatusWavefunction):
    """(center, half_width) of the snapped window support."""
    x = psi.grid.x_points()
    nz = np.nonzero(psi.density() > 0)[0]
    lo = x[nz[0]] - psi.grid.dx / 2
    hi = x[nz[-1]] + psi.grid.dx / 2
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def bump_state(p0: float, grid: GridSpec) -> ApparatusWavefunction:
    """Momentum-space bump exp(-1/(p0^2 - p^2)) supported strictly inside |p| < p0.

    Smooth with all derivatives but not analytic; every position moment is
    finite while the position tail still beats any power law.
    """
    if p0 <= 0:
        raise ValueError("p0 must be positive")
    if grid.p_max <= p0:
        raise GridCoverageError("Nyquist momentum does not exceed p0")
    p = grid.p_points()
    samples = np.zeros(grid.n, dtype=complex)
    inside = np.abs(p) < p0
    samples[inside] = np.exp(-1.0 / (p0**2 - p[inside] ** 2))
    return normalized_wavefunction(grid, samples, MOMENTUM)


# ---------------------------------------------------------------------------
# moments and quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    heavy_tail: bool


def moments(psi: ApparatusWavefunction) -> Moments:
    """First and second central moment in the current representation.

    A heavy-tail flag is raised (not an error) when more than 1e-6 of the
    probability sits in the outer 5% of the grid; the window state's momentum
    variance legitimately diverges and arrives here flagged.
    """
    c = psi.coordinates()
    dens = psi.density()
    w = dens * psi.measure
    k = max(1, int(np.ceil(HEAVY_TAIL_FRACTION * psi.grid.n)))
    heavy = float(w[:k].sum() + w[-k:].sum()) > HEAVY_TAIL_MASS
    mean = float(np.sum(c * w))
    var = float(np.sum((c - mean) ** 2 * w))
    return Moments(mean, var, heavy)


def quadrature_profile(psi: ApparatusWavefunction) -> np.ndarray:
    """Q(x) = -d^2/dx^2 log density by central differences; NaN where masked."""
    if psi.rep != POSITION:
        raise RepresentationError("quadrature profile is defined on the position density")
    dens = psi.density()
    ok = dens > DENSITY_FLOOR
    valid = ok.copy()
    valid[1:-1] &= ok[:-2] & ok[2:]
    valid[0] = valid[-1] = False
    q = np.full(psi.grid.n, np.nan)
    logd = np.where(ok, np.log(np.where(ok, dens, 1.0)), np.nan)
    idx = np.nonzero(valid)[0]
    q[idx] = -(logd[idx + 1] - 2 * logd[idx] + logd[idx - 1]) / psi.grid.dx**2
    return q


def quadrature_mean(psi: ApparatusWavefunction, q: Optional[np.ndarray] = None) -> float:
    """<Q> over the state's own density, masked points excluded."""
    if q is None:
        q = quadrature_profile(psi)
    dens = psi.density()
    ok = np.isfinite(q)
    w = dens[ok] * psi.measure
    return float(np.sum(q[ok] * w) / np.sum(w))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def write_wavefunction_csv(psi: ApparatusWavefunction, path):
    """CSV columns (coordinate, re, im, density) with a header row describing
    rep, grid, and the normalization convention."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# rep={psi.rep} x_min={psi.grid.x_min!r} dx={psi.grid.dx!r} "
                 f"n={psi.grid.n} normalization=sum(density)*step=1\n")
        writer = csv.writer(fh)
        writer.writerow(["coordinate", "re", "im", "density"])
        dens = psi.density()
        for c, s, d in zip(psi.coordinates(), psi.samples, dens):
            writer.writerow([repr(float(c)), repr(float(s.real)), repr(float(s.imag)), repr(float(d))])
