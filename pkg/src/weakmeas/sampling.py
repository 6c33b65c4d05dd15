"""Superposition-of-weak-measurements picture.

Chop the (relative initial) meter state into contiguous windows, shift each
window rigidly by its local weak value in a group-velocity approximation,
and reassemble.  The approximation error vanishes with the window width, and
for periodic local weak values the reassembly makes integer quantization
emerge as an interference effect with a squared-Bessel envelope.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from . import pointer
from .errors import LinearityWarning, PartitionError
from .pointer import ApparatusWavefunction, normalized_wavefunction, to_momentum
from .weakvalues import LocalWeakValueProfile

COVERAGE_TOL = 1e-8


@dataclass(frozen=True)
class WindowPartition:
    """Contiguous, non-overlapping windows given by centers and half-widths."""

    centers: np.ndarray
    half_widths: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, float)
        h = np.asarray(self.half_widths, float)
        if c.size != h.size or c.size == 0:
            raise PartitionError("centers and half-widths must align")
        edges_hi = c + h
        edges_lo = c - h
        if np.any(np.abs(edges_hi[:-1] - edges_lo[1:]) > 1e-9):
            raise PartitionError("windows must be contiguous and non-overlapping")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "half_widths", h)


def uniform_partition(x_lo: float, x_hi: float, count: int) -> WindowPartition:
    edges = np.linspace(x_lo, x_hi, count + 1)
    return WindowPartition(0.5 * (edges[1:] + edges[:-1]),
                           0.5 * (edges[1:] - edges[:-1]))


@dataclass(frozen=True)
class WindowedPiece:
    weight: float                      # P(n | phi)
    state: ApparatusWavefunction       # normalized windowed wavefunction
    center: float
    half_width: float


def chop(phi: ApparatusWavefunction, partition: WindowPartition):
    """Split phi into weighted, mutually orthogonal windowed pieces.

    Window edges snap to the grid-cell boundaries shared with window_state;
    the partition must cover at least 1 - 1e-8 of the probability.
    """
    if phi.rep != pointer.POSITION:
        raise PartitionError("chop acts on the position representation")
    x = phi.grid.x_points()
    dx = phi.grid.dx
    # each grid cell joins the window holding its center: windows snap to the
    # grid and boundary-cell probability goes to a neighbor, never lost
    inner_edges = partition.centers[:-1] + partition.half_widths[:-1]
    owner = np.searchsorted(inner_edges, x)
    in_range = (x >= partition.centers[0] - partition.half_widths[0] - dx / 2) & \
               (x <= partition.centers[-1] + partition.half_widths[-1] + dx / 2)
    pieces = []
    covered = 0.0
    dens = phi.density()
    for idx, (c, h) in enumerate(zip(partition.centers, partition.half_widths)):
        inside = in_range & (owner == idx)
        w = float(np.sum(dens[inside]) * dx)
        covered += w
        if w <= 0.0:
            continue
        samples = np.zeros(phi.grid.n, dtype=complex)
        samples[inside] = phi.samples[inside] / np.sqrt(w)
        pieces.append(WindowedPiece(w, ApparatusWavefunction(phi.grid, samples, pointer.POSITION),
                                    float(c), float(h)))
    if covered < 1.0 - COVERAGE_TOL:
        raise PartitionError(f"partition covers only {covered!r} of the probability")
    return pieces


def reassemble(pieces) -> ApparatusWavefunction:
    """Coherent sum sum_n sqrt(P_n) piece_n; inverse of chop up to coverage."""
    grid = pieces[0].state.grid
    total = np.zeros(grid.n, dtype=complex)
    for piece in pieces:
        total += np.sqrt(piece.weight) * piece.state.samples
    return normalized_wavefunction(grid, total, pointer.POSITION, guard_edges=False)


def _interp_profile(profile: LocalWeakValueProfile, x: float, field: np.ndarray) -> float:
    xs = profile.grid.x_points()
    ok = profile.mask & np.isfinite(field)
    return float(np.interp(x, xs[ok], field[ok]))


def group_velocity_shift(piece: WindowedPiece, profile: LocalWeakValueProfile) -> WindowedPiece:
    """Translate the piece in p by alpha(x~) with the matching phase offset.

    The shifted piece is exp(i [S(x~) + alpha(x~) (x - x~)]) times the window
    envelope; warns when the linearity condition alpha'(x~) eps^2 << 1 is not
    met (threshold 0.1).
    """
    x_t = piece.center
    alpha_t = _interp_profile(profile, x_t, profile.alpha)
    s_t = _interp_profile(profile, x_t, profile.action)
    alpha_prime = np.gradient(profile.alpha, profile.grid.dx)
    slope = _interp_profile(profile, x_t, alpha_prime)
    if abs(slope) * piece.half_width**2 > 0.1:
        warnings.warn(f"linearity condition violated at x~ = {x_t:.4g}: "
                      f"|alpha'| eps^2 = {abs(slope) * piece.half_width**2:.3g}",
                      LinearityWarning)
    x = piece.state.grid.x_points()
    phase = np.exp(1j * (s_t - alpha_t * x_t)) * np.exp(1j * alpha_t * x)
    shifted = ApparatusWavefunction(piece.state.grid, piece.state.samples * phase,
                                    pointer.POSITION)
    return WindowedPiece(piece.weight, shifted, piece.center, piece.half_width)


def superpose_weak_measurements(phi_i: ApparatusWavefunction, partition: WindowPartition,
                                profile: LocalWeakValueProfile):
    """Approximate relative final state as a superposition of shifted windows.

    The likelihood enters by windowing sqrt(L) phi_i (the relative initial
    state) before shifting, so pure-phase and general amplitudes share this
    path.  Returns (approx state in p, exact state in p, L2 error).
    """
    rel_init = normalized_wavefunction(phi_i.grid,
                                       np.sqrt(profile.likelihood) * phi_i.samples,
                                       pointer.POSITION, guard_edges=False)
    pieces = [group_velocity_shift(piece, profile) for piece in chop(rel_init, partition)]
    approx_x = reassemble(pieces)
    exact_x = normalized_wavefunction(phi_i.grid,
                                      np.exp(1j * profile.action) * rel_init.samples,
                                      pointer.POSITION, guard_edges=False)
    err = float(np.sqrt(np.sum(np.abs(approx_x.samples - exact_x.samples) ** 2) * phi_i.grid.dx))
    return to_momentum(approx_x), to_momentum(exact_x), err


# ---------------------------------------------------------------------------
# Bessel envelope of the strong-measurement reconstruction
# ---------------------------------------------------------------------------

def bessel_j(z: float, m_max: int) -> np.ndarray:
    """J_0..J_m_max by downward recurrence, normalized via J0 + 2 sum J_2k = 1.

    Stable for m up to a few times z; no external tables.
    """
    if z == 0.0:
        out = np.zeros(m_max + 1)
        out[0] = 1.0
        return out
    start = m_max + 20 + int(8 * np.sqrt(abs(z)))
    if start % 2:
        start += 1
    j = np.zeros(start + 2)
    j[start] = 1e-30
    for m in range(start, 0, -1):
        j[m - 1] = (2 * m / z) * j[m] - j[m + 1]
        if abs(j[m - 1]) > 1e250:
            j[:m + 2] /= 1e250
    norm = j[0] + 2 * np.sum(j[2::2])
    return j[:m_max + 1] / norm


def bloch_envelope_check(qk: float, p_values=None, n_theta: int = 2**16) -> dict:
    """Single-revolution window amplitude vs the Bessel closed form.

    (1/2pi) int_{-pi}^{pi} e^{-ipx - i qk sin x} dx equals (-1)^p J_p(qk) at
    integer p, and the squared orders resolve to the completeness and
    second-moment identities.
    """
    if p_values is None:
        p_values = np.arange(0, int(np.ceil(qk)) + 6)
    p_values = np.asarray(p_values)
    theta = -np.pi + 2 * np.pi * np.arange(n_theta) / n_theta
    m_tail = int(1.8 * abs(qk)) + 40   # orders beyond the turning region
    js = bessel_j(qk, max(int(np.max(np.abs(p_values))) + 1, m_tail))

    quad = np.array([np.mean(np.exp(-1j * p * theta - 1j * qk * np.sin(theta)))
                     for p in p_values])
    bessel_vals = np.array([(-1) ** abs(int(p)) * js[abs(int(p))] for p in p_values])
    max_err = float(np.max(np.abs(quad.real - bessel_vals)))

    m = np.arange(js.size)
    sum_sq = js[0] ** 2 + 2 * np.sum(js[1:] ** 2)
    sum_m2 = 2 * np.sum(m[1:] ** 2 * js[1:] ** 2)
    return {
        "max_integer_error": max_err,
        "sum_j_squared": float(sum_sq),
        "sum_m2_j_squared": float(sum_m2),
    }


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def windows_to_csv(pieces, profile: LocalWeakValueProfile, path):
    """Per-window table (x~, weight, alpha(x~), shift) for sampling-scan plots."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x_center", "weight", "alpha", "shift"])
        for piece in pieces:
            a = _interp_profile(profile, piece.center, profile.alpha)
            writer.writerow([repr(piece.center), repr(piece.weight), repr(a), repr(a)])
