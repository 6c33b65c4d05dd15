"""Weak-value analytics.

The transition amplitude g(x) = <psi_mu| e^(iAx) |psi_1> decomposes into a
signed modulus and a phase, g = s(x) e^(iS(x)).  Its logarithmic derivative
is the complex local weak value

    A_w(x) = alpha(x) + i beta(x) = <psi_mu| A e^(iAx) |psi_1> / g(x),

with alpha = S'(x) acting as the local pointer kick while beta drives the
likelihood factor through d(log L)/dx = -2 beta.  Everything downstream
(sampling points, error laws, pooled identities, the basis-free weak-value
distribution) is built from these two real profiles.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from . import pointer
from .errors import (BiasWarning, DimError, EigenstateDegenerate,
                     GridCoverageError, MultimodalPosterior,
                     OrthogonalPostSelection, VarianceUndefined)
from .hilbert import HermitianObservable, KetVector, haar_random_batch, inner, spin_operators
from .pointer import ApparatusWavefunction, GridSpec, moments, to_momentum
from .vonneumann import spectral_coefficients

ORTHOGONAL_TOL = 1e-14
AMPLITUDE_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ComplexWeakValue:
    alpha: float   # real part: the pointer kick
    beta: float    # imaginary part: the likelihood gradient

    @property
    def value(self) -> complex:
        return complex(self.alpha, self.beta)


def weak_value(psi1: KetVector, A: HermitianObservable, psi2: KetVector) -> ComplexWeakValue:
    """<psi_2|A|psi_1> / <psi_2|psi_1>."""
    ov = inner(psi2, psi1)
    if abs(ov) <= ORTHOGONAL_TOL:
        raise OrthogonalPostSelection("pre- and post-selected states are orthogonal")
    num = complex(np.vdot(psi2.amplitudes, A.apply(psi1)))
    z = num / ov
    return ComplexWeakValue(z.real, z.imag)


def weak_spin_vector(psi1: KetVector, psi2: KetVector) -> np.ndarray:
    """Real weak values of (Sx, Sy, Sz) for a spin-1/2 pair.

    The vector projects to exactly 1/2 onto both selection axes, so it
    bisects the angle between them.
    """
    if psi1.dim != 2 or psi2.dim != 2:
        raise DimError("weak spin vector is defined for spin-1/2")
    ops = spin_operators(0.5)
    return np.array([weak_value(psi1, s, psi2).alpha for s in ops])


def weak_value_gradients(psi1: KetVector, A: HermitianObservable, psi_mu: KetVector,
                         x: float):
    """(alpha'(x), beta'(x)) from the variance-like ratio W2 - W1^2.

    W_k = <psi_mu| A^k e^(iAx) |psi_1> / <psi_mu| e^(iAx) |psi_1>;
    alpha' = -Im[W2 - W1^2], beta' = +Re[W2 - W1^2].
    """
    evals, coeffs = spectral_coefficients(psi1, A, psi_mu)
    phases = coeffs * np.exp(1j * evals * x)
    g = phases.sum()
    if abs(g) <= AMPLITUDE_ZERO_TOL:
        raise OrthogonalPostSelection(f"amplitude vanishes at x = {x}")
    w1 = (evals * phases).sum() / g
    w2 = (evals**2 * phases).sum() / g
    d = w2 - w1**2
    return float(-d.imag), float(d.real)


# ---------------------------------------------------------------------------
# local profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalWeakValueProfile:
    """Per-grid-point alpha, beta, action S, likelihood L for one transition.

    sqrt_like_signed is the signed square root of L carrying the sign flips
    at amplitude zeros that keep S continuous; mask is False at (and next to)
    amplitude zeros where alpha/beta are not reliable.  L is normalized so
    that its prior average is one.
    """

    grid: GridSpec
    alpha: np.ndarray
    beta: np.ndarray
    action: np.ndarray
    likelihood: np.ndarray
    sqrt_like_signed: np.ndarray
    mask: np.ndarray
    transition_prob: float
    reconstruction_error: float


def _interp_masked(x: np.ndarray, y: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fill masked samples by linear interpolation (integration bridge only)."""
    if mask.all():
        return y
    out = y.copy()
    out[~mask] = np.interp(x[~mask], x[mask], y[mask])
    return out


def _action_from_alpha(x: np.ndarray, alpha: np.ndarray, s0: float) -> np.ndarray:
    """S(x) = S(0) + integral of alpha from x = 0, composite Simpson."""
    cum = cumulative_simpson(alpha, dx=float(x[1] - x[0]), initial=0.0)
    i0 = int(np.argmin(np.abs(x)))
    return s0 + cum - cum[i0]


def local_profile(psi1: KetVector, A: HermitianObservable, psi_mu: KetVector,
                  grid: GridSpec, phi_i: ApparatusWavefunction) -> LocalWeakValueProfile:
    """Profile of the local weak value and likelihood factor on the grid."""
    evals, coeffs = spectral_coefficients(psi1, A, psi_mu)
    x = grid.x_points()
    phases = coeffs[:, None] * np.exp(1j * np.outer(evals, x))
    g = phases.sum(axis=0)
    n1 = (evals[:, None] * phases).sum(axis=0)
    mask = np.abs(g) > AMPLITUDE_ZERO_TOL
    # widen the mask by one sample on each side of a zero
    bad = ~mask
    bad[1:] |= ~mask[:-1]
    bad[:-1] |= ~mask[1:]
    mask = ~bad
    ratio = np.divide(n1, g, out=np.zeros_like(g), where=mask)
    alpha = np.where(mask, ratio.real, np.nan)
    beta = np.where(mask, ratio.imag, np.nan)

    prior = phi_i.density()
    pbar = float(np.sum(np.abs(g) ** 2 * prior) * grid.dx)
    if pbar < ORTHOGONAL_TOL:
        raise OrthogonalPostSelection("transition probability vanishes for this preparation")
    like = np.abs(g) ** 2 / pbar

    s0 = float(np.angle(g[int(np.argmin(np.abs(x)))]))
    action = _action_from_alpha(x, _interp_masked(x, alpha, mask), s0)
    ghat = g / np.sqrt(pbar)
    resid = ghat * np.exp(-1j * action)
    sign = np.where(resid.real >= 0, 1.0, -1.0)
    signed = sign * np.sqrt(like)
    recon = float(np.max(np.abs(signed * np.exp(1j * action) - ghat)))
    return LocalWeakValueProfile(grid, alpha, beta, action, like, signed, mask,
                                 pbar, recon)


def assemble_profile(grid: GridSpec, phi_i: ApparatusWavefunction, alpha: np.ndarray,
                     beta: np.ndarray, log_abs_g: np.ndarray, phase0: float) -> LocalWeakValueProfile:
    """Profile from closed-form ingredients (log|g| given for underflow safety).

    Intended for scenarios whose amplitude never vanishes, e.g. product
    amplitudes of many subsystems.
    """
    x = grid.x_points()
    prior = phi_i.density()
    two_log = 2 * (log_abs_g - log_abs_g.max())
    raw = np.exp(two_log)
    pbar_scaled = float(np.sum(raw * prior) * grid.dx)
    like = raw / pbar_scaled
    action = _action_from_alpha(x, alpha, phase0)
    mask = np.ones(grid.n, dtype=bool)
    return LocalWeakValueProfile(grid, np.asarray(alpha, float), np.asarray(beta, float),
                                 action, like, np.sqrt(like), mask, np.nan, 0.0)


def posterior_density(profile: LocalWeakValueProfile, phi_i: ApparatusWavefunction) -> np.ndarray:
    """Normalized posterior x-density dP(x|phi_i) L(x)."""
    dens = phi_i.density() * profile.likelihood
    return dens / (np.sum(dens) * profile.grid.dx)


def is_real_state(phi: ApparatusWavefunction, tol: float = 1e-9) -> bool:
    """Real envelope times exp(i p0 x), detected by fitting p0 and a global phase.

    p0 is the density-weighted local momentum Im(conj(phi) phi') / |phi|^2,
    which is exact for states of this form and robust against heavy momentum
    tails.
    """
    if phi.rep != pointer.POSITION:
        return False
    x = phi.grid.x_points()
    dens = phi.density()
    grad = np.gradient(phi.samples, phi.grid.dx)
    keep = dens > 1e-8 * dens.max()
    local_p = np.imag(np.conj(phi.samples[keep]) * grad[keep])
    p0 = float(np.sum(local_p) / np.sum(dens[keep]))
    stripped = phi.samples * np.exp(-1j * p0 * x)
    k = int(np.argmax(np.abs(stripped)))
    ph = stripped[k] / abs(stripped[k])
    return float(np.max(np.abs(np.imag(stripped * np.conj(ph))))) < tol


# ---------------------------------------------------------------------------
# error laws
# ---------------------------------------------------------------------------

def error_law_mean(profile: LocalWeakValueProfile, phi_i: ApparatusWavefunction) -> float:
    """Predicted conditional pointer mean: posterior average of alpha.

    Exact for real states with the momentum origin at p_i; other states get a
    BiasWarning since prior x-p correlations shift the reference origin.
    """
    if not is_real_state(phi_i):
        warnings.warn("phi_i is not a real state; pointer origin may be biased", BiasWarning)
    w = posterior_density(profile, phi_i) * profile.grid.dx
    ok = profile.mask & np.isfinite(profile.alpha)
    return float(np.sum(profile.alpha[ok] * w[ok]) / np.sum(w[ok]))


def error_law_variance(profile: LocalWeakValueProfile, phi_i: ApparatusWavefunction) -> float:
    """Predicted conditional pointer variance for a real Gaussian preparation.

    Delta p_f^2 = (1/4) <Q_i> + (1/2) <beta'> + Var(alpha), all averages over
    the posterior x-distribution; for a Gaussian the quadrature term is the
    prior momentum variance.
    """
    pmom = moments(to_momentum(phi_i))
    if pmom.heavy_tail:
        raise VarianceUndefined("momentum variance undefined for a heavy-tailed state")
    w = posterior_density(profile, phi_i) * profile.grid.dx
    qi = pointer.quadrature_profile(phi_i)
    beta_prime = np.gradient(profile.beta, profile.grid.dx)
    ok = profile.mask & np.isfinite(beta_prime) & np.isfinite(qi) & np.isfinite(profile.alpha)
    wn = w[ok] / np.sum(w[ok])
    mean_q = float(np.sum(qi[ok] * wn))
    mean_bp = float(np.sum(beta_prime[ok] * wn))
    mean_a = float(np.sum(profile.alpha[ok] * wn))
    var_a = float(np.sum((profile.alpha[ok] - mean_a) ** 2 * wn))
    return 0.25 * mean_q + 0.5 * mean_bp + var_a


# ---------------------------------------------------------------------------
# sampling point of the posterior
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingPoint:
    x_mode: float            # numeric argmax of L(x) |phi_i(x)|^2
    x_first_order: float     # x0 - 2 sigma^2 beta(x0)
    sigma_eff: float         # sigma / sqrt(1 + 2 sigma^2 beta'(x_mode)), nan if radicand <= 0


def sampling_point(profile: LocalWeakValueProfile, phi_i: ApparatusWavefunction) -> SamplingPoint:
    """Most likely reaction value and the effective posterior width.

    Raises MultimodalPosterior when the posterior has more than one
    significant mode (the transition regime).
    """
    x = profile.grid.x_points()
    post = posterior_density(profile, phi_i)
    edge = (post[:3].sum() + post[-3:].sum()) * profile.grid.dx
    if edge > 1e-6:
        raise GridCoverageError("posterior mass leaks off the grid")
    interior = (post[1:-1] > post[:-2]) & (post[1:-1] > post[2:])
    peaks = np.nonzero(interior)[0] + 1
    significant = peaks[post[peaks] > 1e-3 * post[peaks].max()]
    if len(significant) > 1:
        raise MultimodalPosterior(f"{len(significant)} posterior modes detected")

    prior_m = moments(phi_i)
    x0, sigma = prior_m.mean, np.sqrt(prior_m.variance)
    # golden-section refinement of the coarse argmax; ties break toward x0
    cands = significant if len(significant) else np.array([int(np.argmax(post))])
    j = min(cands, key=lambda k: abs(x[k] - x0))
    x_mode = _refine_mode(x, post, int(j))

    beta_x0 = float(np.interp(x0, x[profile.mask], profile.beta[profile.mask]))
    x_fo = x0 - 2 * sigma**2 * beta_x0
    beta_prime = np.gradient(profile.beta, profile.grid.dx)
    ok = profile.mask & np.isfinite(beta_prime)
    bp_mode = float(np.interp(x_mode, x[ok], beta_prime[ok]))
    radicand = 1 + 2 * sigma**2 * bp_mode
    sig_eff = sigma / np.sqrt(radicand) if radicand > 0 else float("nan")
    return SamplingPoint(x_mode, x_fo, sig_eff)


def _refine_mode(x: np.ndarray, post: np.ndarray, j: int) -> float:
    """Golden-section search on a local cubic interpolant of -log posterior."""
    from scipy.interpolate import CubicSpline
    from scipy.optimize import minimize_scalar
    lo, hi = max(j - 5, 0), min(j + 6, len(x))
    window = slice(lo, hi)
    if np.any(post[window] <= 0) or hi - lo < 4:
        return float(x[j])
    spline = CubicSpline(x[window], -np.log(post[window]))
    res = minimize_scalar(spline, bracket=None, bounds=(x[max(j - 1, 0)], x[min(j + 1, len(x) - 1)]),
                          method="bounded")
    return float(res.x)


# ---------------------------------------------------------------------------
# pooled identities over a complete post basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PooledIdentities:
    bar_alpha: float
    expectation: float
    var_alpha: float
    var_beta: float
    spectral_variance: float

    @property
    def variance_gap(self) -> float:
        return abs(self.spectral_variance - self.var_alpha - self.var_beta)


def pooled_identities(psi1: KetVector, A: HermitianObservable, post_basis) -> PooledIdentities:
    """Transition-weighted moments of the complex weak value.

    With unperturbed weights |<psi_mu|psi_1>|^2 the weak-value scatter obeys
    <DeltaA^2> = var(alpha) + var(beta) and bar(alpha) = <A>; branches with
    vanishing weight are dropped (their weights kill their contribution).
    """
    weights, alphas, betas = [], [], []
    for b in post_basis:
        ov = inner(b, psi1)
        w = abs(ov) ** 2
        if w <= ORTHOGONAL_TOL:
            continue
        z = complex(np.vdot(b.amplitudes, A.apply(psi1))) / ov
        weights.append(w)
        alphas.append(z.real)
        betas.append(z.imag)
    w = np.array(weights)
    a = np.array(alphas)
    bt = np.array(betas)
    bar_a = float(np.sum(w * a))
    bar_b = float(np.sum(w * bt))
    var_a = float(np.sum(w * a * a) - bar_a**2)
    var_b = float(np.sum(w * bt * bt) - bar_b**2)
    return PooledIdentities(bar_a, A.expectation(psi1), var_a, var_b, A.variance(psi1))


# ---------------------------------------------------------------------------
# the pair operator behind (alpha, L)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OmegaOperator:
    """Hermitian, unit-trace operator encoding a selection pair.

    Tr[A Omega] is the real weak value of A for the pair and
    (2 Tr[Omega^2] - 1)^(-1) recovers the pair's overlap weight; it is
    symmetric under time reversal of the two states.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("Omega must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-12:
            raise ValueError("Omega must have unit trace")
        object.__setattr__(self, "matrix", m)

    def real_weak_value(self, A: HermitianObservable) -> float:
        return float(np.real(np.trace(A.matrix @ self.matrix)))

    def pair_weight(self) -> float:
        purity = float(np.real(np.trace(self.matrix @ self.matrix)))
        return 1.0 / (2 * purity - 1.0)


def omega_operator(psi1: KetVector, psi2: KetVector) -> OmegaOperator:
    ov = inner(psi2, psi1)
    if abs(ov) <= ORTHOGONAL_TOL:
        raise OrthogonalPostSelection("orthogonal pair admits no Omega")
    outer = np.outer(psi1.amplitudes, psi2.amplitudes.conj()) / ov
    return OmegaOperator(0.5 * (outer + outer.conj().T))


# ---------------------------------------------------------------------------
# basis-free distribution of weak values
# ---------------------------------------------------------------------------

def overall_density(alpha, mean_a: float, delta_a: float):
    """Marginal density of the real weak value over all final states:
    (3/4) / dA * [1 + ((alpha - <A>)/dA)^2]^(-5/2)."""
    u = (np.asarray(alpha, float) - mean_a) / delta_a
    return 0.75 / delta_a * (1 + u * u) ** -2.5


def overall_density_2d(alpha, beta, mean_a: float, delta_a: float):
    """Joint density of the complex weak value, symmetric about beta = 0."""
    u = (np.asarray(alpha, float) - mean_a) / delta_a
    v = np.asarray(beta, float) / delta_a
    return 2 / np.pi / delta_a**2 * (1 + u * u + v * v) ** -3.0


def overall_cdf(alpha, mean_a: float, delta_a: float):
    u = (np.asarray(alpha, float) - mean_a) / delta_a
    with np.errstate(invalid="ignore"):
        f = np.where(np.isinf(u), np.sign(u) * 2 / 3,
                     u * (3 + 2 * u * u) / (3 * (1 + u * u) ** 1.5))
    return 0.5 + 0.75 * f


def eccentric_probability(a_max: float, mean_a: float, delta_a: float) -> float:
    """Closed-form probability that the real weak value leaves [-a_max, a_max]."""
    return float(1.0 - overall_cdf(a_max, mean_a, delta_a)
                 + overall_cdf(-a_max, mean_a, delta_a))


@dataclass(frozen=True)
class OverallSamples:
    z: np.ndarray          # complex weak values, one per accepted final state
    n_draws: int
    accept_rate: float


def overall_weak_value_samples(psi: KetVector, A: HermitianObservable, n_samples: int,
                               rng: np.random.Generator, batch: int = 200_000) -> OverallSamples:
    """Rejection sampler: final states from the invariant measure accepted with
    probability |<psi_mu|psi>|^2, returning their complex weak values."""
    if A.variance(psi) <= 1e-24:
        raise EigenstateDegenerate("psi is an eigenstate of A; no weak-value scatter")
    psi_a = psi.amplitudes
    a_psi = A.apply(psi)
    out = []
    got = 0
    drawn = 0
    while got < n_samples:
        v = haar_random_batch(psi.dim, batch, rng)
        ov = v.conj() @ psi_a
        accept = rng.random(batch) < np.abs(ov) ** 2
        drawn += batch
        z = (v[accept].conj() @ a_psi) / ov[accept]
        out.append(z)
        got += z.size
    z = np.concatenate(out)[:n_samples]
    return OverallSamples(z, drawn, got / drawn)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def profile_to_csv(profile: LocalWeakValueProfile, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "alpha", "beta", "S", "L", "mask"])
        for x, a, b, s, like, ok in zip(profile.grid.x_points(), profile.alpha,
                                        profile.beta, profile.action,
                                        profile.likelihood, profile.mask):
            writer.writerow([repr(float(x)), repr(float(a)), repr(float(b)),
                             repr(float(s)), repr(float(like)), int(ok)])


def samples_to_json(samples: OverallSamples, seed, path, extra: Optional[dict] = None):
    payload = {
        "seed": seed,
        "n_samples": int(samples.z.size),
        "n_draws": samples.n_draws,
        "accept_rate": samples.accept_rate,
        "alpha_mean": float(samples.z.real.mean()),
        "alpha_std": float(samples.z.real.std()),
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
    return payload
