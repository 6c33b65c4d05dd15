"""Classical Bayesian measurement with two boundary conditions.

A classical meter kicked by A(q) at an intermediate time, analyzed against
Dirichlet data (q1 at t1, q2 at t2), splits into a reversible part (the phase
flow generated by the extremal action) and an irreversible part (probability
re-assessment by a likelihood factor).  For the admitted free Lagrangians the
extremal action is closed form and the likelihood factor is the density of
paths |d2 S / dq1 dq2|; a windowed Monte Carlo sampler provides the
independent oracle, and a sharpness sweep exhibits the quantum-to-classical
correspondence of the local weak value and the likelihood factor.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import MultipleExtremals, StarvedSampler

FOCAL_GUARD = 0.9


@dataclass(frozen=True)
class Lagrangian1D:
    """Free or harmonic Lagrangian with a measured function of q.

    potential: ("free",) or ("harmonic", omega); measured: ("linear", a) for
    A(q) = a q or ("quadratic", c) for A(q) = c q^2.  Extremal actions are
    closed form only for the free case; the harmonic case is reached through
    the oscillator's quantum closed forms instead.
    """

    mass: float
    potential: tuple = ("free",)
    measured: tuple = ("linear", 1.0)

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.potential[0] not in ("free", "harmonic"):
            raise ValueError(f"unknown potential tag {self.potential[0]!r}")
        if self.measured[0] not in ("linear", "quadratic"):
            raise ValueError(f"unknown measured tag {self.measured[0]!r}")

    @property
    def closed_form_solvable(self) -> bool:
        return self.potential[0] == "free"

    def a_of_q(self, q):
        kind, coeff = self.measured
        return coeff * q if kind == "linear" else coeff * np.asarray(q) ** 2

    def a_prime(self, q):
        kind, coeff = self.measured
        return coeff * np.ones_like(np.asarray(q, float)) if kind == "linear" else 2 * coeff * np.asarray(q)


@dataclass(frozen=True)
class BoundaryProblem:
    """Dirichlet data q(t1) = q1, q(t2) = q2 with the impulse at t_i."""

    q1: float
    q2: float
    t1: float
    t_i: float
    t2: float
    x: float

    def __post_init__(self):
        if not (self.t1 < self.t_i < self.t2):
            raise ValueError("times must satisfy t1 < t_i < t2")


@dataclass(frozen=True)
class ExtremalAction:
    s12: float          # stationary action including the impulse term x A(q_i)
    alpha12: float      # A evaluated on the kicked trajectory at t_i (= dS/dx)
    vanvleck: float     # |d2 S12 / dq1 dq2|, the density of paths
    q_i: float
    k1: float           # -dS/dq1, momentum entering the impulse
    k2: float           # +dS/dq2, momentum leaving it


def _junction(lag: Lagrangian1D, bp: BoundaryProblem):
    """Intermediate point q_i and the denominator D of the matching condition."""
    m = lag.mass
    t_a = bp.t_i - bp.t1
    t_b = bp.t2 - bp.t_i
    kind, coeff = lag.measured
    if kind == "quadratic":
        if abs(coeff * bp.x) * (bp.t2 - bp.t1) / m >= FOCAL_GUARD:
            raise MultipleExtremals("quadratic coupling too close to the focal point")
        d = m / t_a + m / t_b + 2 * coeff * bp.x
        q_i = m * (bp.q1 / t_a + bp.q2 / t_b) / d
    else:
        d = m / t_a + m / t_b
        q_i = (m * (bp.q1 / t_a + bp.q2 / t_b) - bp.x * coeff) / d
    return q_i, d, t_a, t_b


def extremal_action(lag: Lagrangian1D, bp: BoundaryProblem) -> ExtremalAction:
    """Closed-form stationary action for the free Lagrangian with one impulse."""
    if not lag.closed_form_solvable:
        raise ValueError("extremal action is closed form only for the free Lagrangian")
    m = lag.mass
    q_i, d, t_a, t_b = _junction(lag, bp)
    s12 = (m * (q_i - bp.q1) ** 2 / (2 * t_a)
           + m * (bp.q2 - q_i) ** 2 / (2 * t_b)
           + bp.x * float(lag.a_of_q(q_i)))
    k1 = m * (q_i - bp.q1) / t_a
    k2 = m * (bp.q2 - q_i) / t_b
    vanvleck = m * m / (t_a * t_b * abs(d))
    return ExtremalAction(float(s12), float(lag.a_of_q(q_i)), float(vanvleck),
                          float(q_i), float(k1), float(k2))


# ---------------------------------------------------------------------------
# posterior densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseSpacePrior:
    """Factorable Gaussian prior over (x, p) -- the no-bias condition."""

    sigma_x: float
    sigma_p: float
    x0: float = 0.0
    p0: float = 0.0

    def density_x(self, x):
        return np.exp(-((x - self.x0) ** 2) / (2 * self.sigma_x**2)) / (self.sigma_x * np.sqrt(2 * np.pi))

    def density_p(self, p):
        return np.exp(-((p - self.p0) ** 2) / (2 * self.sigma_p**2)) / (self.sigma_p * np.sqrt(2 * np.pi))


@dataclass(frozen=True)
class ClassicalPosterior:
    x: np.ndarray
    posterior_x: np.ndarray
    likelihood: np.ndarray        # normalized against the prior: <L>_prior = 1
    p: np.ndarray
    posterior_p: np.ndarray
    alpha: np.ndarray             # alpha12(x) on the x grid


def classical_posterior(lag: Lagrangian1D, prior: PhaseSpacePrior, q1: float, q2: float,
                        times: tuple, x: np.ndarray, p: np.ndarray,
                        k_max: Optional[float] = None) -> ClassicalPosterior:
    """Posterior x and pointer densities from the Van Vleck likelihood.

    dP(p)_f = integral dP(x, p - alpha12(x)) L12(x) dx with
    L12 prop. |d1 d2 S12(x)|; a finite k_max imposes the bounded flat
    momentum prior (zero likelihood where the required k1 leaves the bound).
    """
    t1, t_i, t2 = times
    vv = np.empty_like(x)
    alpha = np.empty_like(x)
    k1 = np.empty_like(x)
    for i, xi in enumerate(x):
        ext = extremal_action(lag, BoundaryProblem(q1, q2, t1, t_i, t2, float(xi)))
        vv[i], alpha[i], k1[i] = ext.vanvleck, ext.alpha12, ext.k1
    if k_max is not None:
        vv = np.where(np.abs(k1) <= k_max, vv, 0.0)
    prior_x = prior.density_x(x)
    # normalize against the grid-restricted prior so <L>_prior = 1 exactly
    norm = np.trapezoid(vv * prior_x, x) / np.trapezoid(prior_x, x)
    like = vv / norm
    post_x = prior_x * like
    post_p = np.zeros_like(p)
    wx = post_x * (x[1] - x[0])
    for xi_w, a in zip(wx, alpha):
        if xi_w > 0:
            post_p += xi_w * prior.density_p(p - a)
    post_p /= np.trapezoid(post_p, p)
    return ClassicalPosterior(x, post_x, like, p, post_p, alpha)


# ---------------------------------------------------------------------------
# Monte Carlo oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloRun:
    x: np.ndarray            # accepted reaction values
    p_f: np.ndarray          # accepted pointer readings
    k1: np.ndarray           # accepted initial system momenta
    initial: tuple           # full accepted initial tuple (x, p, q, k)
    final: tuple             # corresponding final tuple (x, p_f, q_f, k_f)
    acceptance: float
    k_bound_ok: bool


def monte_carlo_oracle(lag: Lagrangian1D, prior: PhaseSpacePrior, q1: float, w1: float,
                       q2: float, w2: float, times: tuple, n_samples: int, seed,
                       k_max: float) -> MonteCarloRun:
    """Propagate sampled initial conditions and post-select on the q2 window.

    k is drawn flat on [-k_max, k_max] (equal a-priori weights); delta
    conditions are realized as finite windows of widths w1, w2.
    """
    t1, t_i, t2 = times
    t_a, t_b = t_i - t1, t2 - t_i
    rng = np.random.default_rng(seed)
    xs = rng.normal(prior.x0, prior.sigma_x, n_samples)
    ps = rng.normal(prior.p0, prior.sigma_p, n_samples)
    qs = q1 + w1 * (rng.random(n_samples) - 0.5)
    ks = k_max * (2 * rng.random(n_samples) - 1.0)

    q_i = qs + ks / lag.mass * t_a
    k_kicked = ks + xs * lag.a_prime(q_i)
    p_kicked = ps + lag.a_of_q(q_i)
    q_f = q_i + k_kicked / lag.mass * t_b
    accept = np.abs(q_f - q2) < w2 / 2
    rate = float(accept.mean())
    if rate < 1e-5:
        raise StarvedSampler(f"acceptance rate {rate:.2e} below 1e-5")
    k_ok = bool(np.max(np.abs(ks[accept])) < k_max / 2)
    if not k_ok:
        warnings.warn("accepted momenta reach beyond half the flat bound; enlarge k_max")
    initial = (xs[accept], ps[accept], qs[accept], ks[accept])
    final = (xs[accept], p_kicked[accept], q_f[accept], k_kicked[accept])
    return MonteCarloRun(xs[accept], p_kicked[accept], ks[accept], initial, final,
                         rate, k_ok)


def invert_flow(lag: Lagrangian1D, final: tuple, times: tuple) -> tuple:
    """Undo the deterministic flow (free legs and both kicks) on final samples."""
    t1, t_i, t2 = times
    t_a, t_b = t_i - t1, t2 - t_i
    xs, p_f, q_f, k_f = final
    q_i = q_f - k_f / lag.mass * t_b
    k0 = k_f - xs * lag.a_prime(q_i)
    p0 = p_f - lag.a_of_q(q_i)
    q0 = q_i - k0 / lag.mass * t_a
    return (xs, p0, q0, k0)


@dataclass(frozen=True)
class Histogram:
    centers: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    stderr: np.ndarray


def histogram(values: np.ndarray, bins: int, lo: float, hi: float) -> Histogram:
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    width = edges[1] - edges[0]
    n = values.size
    density = counts / (n * width)
    stderr = np.sqrt(np.maximum(counts, 1.0)) / (n * width)
    return Histogram(0.5 * (edges[1:] + edges[:-1]), counts, density, stderr)


def per_bin_deviation(hist: Histogram, model_density: np.ndarray, n: int) -> np.ndarray:
    """(count - N p) / sqrt(N p (1 - p)) per bin, binomial error from the model."""
    width = hist.centers[1] - hist.centers[0]
    p = np.clip(model_density * width, 1e-300, 1.0)
    return (hist.counts - n * p) / np.sqrt(n * p * (1 - p))


def write_histogram_csv(hist: Histogram, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_center", "count", "density", "stderr"])
        for c, n, d, s in zip(hist.centers, hist.counts, hist.density, hist.stderr):
            writer.writerow([repr(float(c)), int(n), repr(float(d)), repr(float(s))])


# ---------------------------------------------------------------------------
# discrete Bayes helpers
# ---------------------------------------------------------------------------

def discrete_posterior(prior: np.ndarray, likelihood: np.ndarray):
    """(posterior, evidence): P(X|YZ) = P(X|Y) P(Z|XY) / P(Z|Y)."""
    prior = np.asarray(prior, float)
    likelihood = np.asarray(likelihood, float)
    evidence = float(np.sum(prior * likelihood))
    return prior * likelihood / evidence, evidence


# ---------------------------------------------------------------------------
# quantum closed forms for the oscillator kinetic-energy measurement
# ---------------------------------------------------------------------------

def kinetic_local_weak_value(m: float, omega: float, q: float, x):
    """Local weak value of k^2/2m for a ground-state oscillator post-selected
    at q: a bound part with renormalized frequency plus a free part from the
    transferred momentum."""
    x = np.asarray(x, dtype=float)
    om_x = omega / (1 + x**2 * omega**2)
    kappa = de_broglie_momentum(m, omega, q, x)
    return om_x / 2 - m * om_x**2 * q**2 / 2 + kappa**2 / (2 * m)


def de_broglie_momentum(m: float, omega: float, q: float, x):
    x = np.asarray(x, dtype=float)
    return m * omega**2 * q * x / (1 + x**2 * omega**2)


def kinetic_likelihood(m: float, omega: float, q: float, x):
    """Unnormalized likelihood factor of the kinetic-energy measurement."""
    x = np.asarray(x, dtype=float)
    u = 1 + x**2 * omega**2
    return u**-0.5 * np.exp(-m * omega * q**2 / u)


def kinetic_action(m: float, omega: float, q: float, x):
    x = np.asarray(x, dtype=float)
    u = 1 + x**2 * omega**2
    return 0.5 * np.arctan(x * omega) - 0.5 * m * omega**2 * q**2 * x / u


# ---------------------------------------------------------------------------
# quantum-to-classical correspondence sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrespondenceReport:
    classicality: np.ndarray
    dev_alpha: np.ndarray
    dev_likelihood: np.ndarray
    monotone_decreasing: bool


def _quantum_boundary_profile(mass: float, width: float, coupling: float,
                              q1: float, q2: float, t_a: float, t_b: float,
                              xs: np.ndarray, span: float = 90.0, n: int = 2**14):
    """alpha(x) and L(x) for Gaussian boundary packets around (q1, q2).

    The quadratic coupling A(q) = c q^2 keeps all propagation exact on the
    grid (free evolution in k-space, impulse as a quadratic phase).
    """
    q = np.linspace(-span / 2, span / 2, n, endpoint=False)
    dq = q[1] - q[0]
    k = 2 * np.pi * np.fft.fftfreq(n, d=dq)
    chi1 = np.exp(-((q - q1) ** 2) / (4 * width**2)).astype(complex)
    chi2 = np.exp(-((q - q2) ** 2) / (4 * width**2)).astype(complex)
    fwd = np.fft.ifft(np.exp(-1j * k**2 * t_a / (2 * mass)) * np.fft.fft(chi1))
    bwd = np.fft.ifft(np.exp(+1j * k**2 * t_b / (2 * mass)) * np.fft.fft(chi2))
    a_of_q = coupling * q * q
    g = np.empty(xs.size, dtype=complex)
    num = np.empty(xs.size, dtype=complex)
    for i, xv in enumerate(xs):
        phase = np.exp(1j * a_of_q * xv)
        g[i] = np.vdot(bwd, phase * fwd) * dq
        num[i] = np.vdot(bwd, a_of_q * phase * fwd) * dq
    alpha = (num / g).real
    like = np.abs(g) ** 2
    like /= np.trapezoid(like, xs) / (xs[-1] - xs[0])
    return alpha, like


def semiclassical_correspondence(classicality: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
                                 coupling: float = 0.3, q1: float = 0.0, q2: float = 1.0,
                                 t_a: float = 1.0, t_b: float = 1.0,
                                 base_mass: float = 1.0, base_width: float = 0.12,
                                 x_window: tuple = (-0.5, 0.5), n_x: int = 41) -> CorrespondenceReport:
    """Sweep the classicality of the boundary data and compare with the
    Dirichlet closed forms.

    Each sweep point scales the mass up and the boundary-packet width down
    (mass = c * base_mass, width = base_width / c), the joint limit in which
    both the stationary-phase and the sharp-endpoint conditions improve; the
    max relative deviations of alpha(x) from alpha12(x) and of L(x) from the
    normalized Van Vleck factor must fall monotonically.
    """
    xs = np.linspace(x_window[0], x_window[1], n_x)
    dev_a, dev_l = [], []
    for c in classicality:
        mass = c * base_mass
        width = base_width / c
        qa, ql = _quantum_boundary_profile(mass, width, coupling, q1, q2, t_a, t_b, xs)
        lag = Lagrangian1D(mass, ("free",), ("quadratic", coupling))
        ca = np.empty_like(xs)
        cl = np.empty_like(xs)
        for i, xv in enumerate(xs):
            ext = extremal_action(lag, BoundaryProblem(q1, q2, 0.0, t_a, t_a + t_b, float(xv)))
            ca[i], cl[i] = ext.alpha12, ext.vanvleck
        cl /= np.trapezoid(cl, xs) / (xs[-1] - xs[0])
        dev_a.append(float(np.max(np.abs(qa - ca) / np.abs(ca))))
        dev_l.append(float(np.max(np.abs(ql - cl) / np.abs(cl))))
    dev_a = np.array(dev_a)
    dev_l = np.array(dev_l)
    mono = bool(np.all(np.diff(np.maximum(dev_a, dev_l)) < 0))
    return CorrespondenceReport(np.asarray(classicality, float), dev_a, dev_l, mono)


def write_correspondence_json(report: CorrespondenceReport, path):
    payload = {
        "classicality": [float(v) for v in report.classicality],
        "dev_alpha": [float(v) for v in report.dev_alpha],
        "dev_likelihood": [float(v) for v in report.dev_likelihood],
        "monotone_decreasing": report.monotone_decreasing,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
    return payload
