"""Impulsive measurement engine.

The coupling exp(i A x) correlates the system with the meter.  Conditioning
on a final outcome |psi_mu> leaves the meter in the relative state

    phi_f(x) = g_mu(x) phi_i(x) / sqrt(P),   g_mu(x) = <psi_mu| e^(iAx) |psi_1>,

whose momentum density is the conditional distribution of the data.  Pooling
the branches of a complete post-selection basis must reproduce the
unconditional spectral convolution exactly (the sum rule).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import pointer
from .errors import (BasisError, DimError, FallOffViolation,
                     OrthogonalPostSelection, UndefinedABL)
from .hilbert import HermitianObservable, KetVector, inner, spectral
from .pointer import ApparatusWavefunction, GridSpec, normalized_wavefunction, to_momentum

ORTHOGONAL_TOL = 1e-14
NORMALIZER_AUDIT_TOL = 1e-9


def spectral_coefficients(psi1: KetVector, A: HermitianObservable, psi_mu: KetVector):
    """Eigenvalues a and transition coefficients <psi_mu| Pi(a) |psi_1>."""
    if psi1.dim != A.dim or psi_mu.dim != A.dim:
        raise DimError("state/operator dimensions differ")
    dec = spectral(A)
    coeffs = np.array([np.vdot(psi_mu.amplitudes, proj @ psi1.amplitudes)
                       for proj in dec.projectors])
    return dec.eigenvalues, coeffs


@dataclass(frozen=True)
class AmplitudeFunction:
    """g(x) = <psi_mu| e^(iAx) |psi_1> sampled on the grid."""

    grid: GridSpec
    g: np.ndarray

    def __post_init__(self):
        if np.max(np.abs(self.g)) > 1.0 + 1e-10:
            raise ValueError("|g| must not exceed 1 for unit vectors")


def amplitude_function(psi1: KetVector, A: HermitianObservable, psi_mu: KetVector,
                       grid: GridSpec) -> AmplitudeFunction:
    evals, coeffs = spectral_coefficients(psi1, A, psi_mu)
    x = grid.x_points()
    g = (coeffs[:, None] * np.exp(1j * np.outer(evals, x))).sum(axis=0)
    return AmplitudeFunction(grid, g)


@dataclass(frozen=True)
class MeasurementSetup:
    """Pre-selected system, measured observable, post basis, meter preparation."""

    psi1: KetVector
    A: HermitianObservable
    post_basis: list
    phi_i: ApparatusWavefunction

    def __post_init__(self):
        d = self.A.dim
        if self.psi1.dim != d or any(b.dim != d for b in self.post_basis):
            raise DimError("system dimensions are inconsistent")
        if len(self.post_basis) != d:
            raise BasisError("post-selection basis must be complete")
        gram = np.array([[inner(a, b) for b in self.post_basis] for a in self.post_basis])
        if np.max(np.abs(gram - np.eye(d))) > 1e-10:
            raise BasisError("post-selection basis is not orthonormal")
        if self.phi_i.rep != pointer.POSITION:
            raise ValueError("phi_i must be given in the position representation")


@dataclass(frozen=True)
class ConditionalEnsemble:
    """One post-selected branch: its probability and relative meter states."""

    mu: int
    transition_prob: float
    phi_f_rel: ApparatusWavefunction
    phi_i_rel: ApparatusWavefunction


def _transition_probability_audit(setup: MeasurementSetup, mu: int, p_grid: float):
    """Cross-check the grid normalizer against the coefficient-algebra form."""
    evals, coeffs = spectral_coefficients(setup.psi1, setup.A, setup.post_basis[mu])
    x = setup.phi_i.grid.x_points()
    dens = setup.phi_i.density()
    # characteristic function of the prior x-density at the eigenvalue gaps
    p_alg = 0.0
    for ia, a in enumerate(evals):
        for ib, b in enumerate(evals):
            char = np.sum(dens * np.exp(1j * (a - b) * x)) * setup.phi_i.grid.dx
            p_alg += np.conj(coeffs[ib]) * coeffs[ia] * char
    p_alg = float(np.real(p_alg))
    if abs(p_alg - p_grid) > NORMALIZER_AUDIT_TOL:
        raise ValueError(f"normalizer self-audit failed: grid {p_grid!r} vs algebraic {p_alg!r}")


def relative_final_state(setup: MeasurementSetup, mu: int, audit: bool = True) -> ConditionalEnsemble:
    """Relative final/initial meter states and the perturbed transition probability."""
    amp = amplitude_function(setup.psi1, setup.A, setup.post_basis[mu], setup.phi_i.grid)
    f = amp.g * setup.phi_i.samples
    prob = float(np.sum(np.abs(f) ** 2) * setup.phi_i.grid.dx)
    if prob < ORTHOGONAL_TOL:
        raise OrthogonalPostSelection(f"branch {mu} has vanishing transition probability")
    if audit:
        _transition_probability_audit(setup, mu, prob)
    phi_f = ApparatusWavefunction(setup.phi_i.grid, f / np.sqrt(prob), pointer.POSITION)
    phi_i_rel = ApparatusWavefunction(setup.phi_i.grid,
                                      np.abs(amp.g) * setup.phi_i.samples / np.sqrt(prob),
                                      pointer.POSITION)
    return ConditionalEnsemble(mu, prob, phi_f, phi_i_rel)


def conditional_ensembles(setup: MeasurementSetup, audit: bool = False):
    """All branches; vanishing branches are kept with phi_f = None.

    Probabilities over the complete basis must sum to one within 1e-10.
    """
    out = []
    total = 0.0
    for mu in range(len(setup.post_basis)):
        try:
            ens = relative_final_state(setup, mu, audit=audit)
        except OrthogonalPostSelection:
            ens = ConditionalEnsemble(mu, 0.0, None, None)
        total += ens.transition_prob
        out.append(ens)
    if abs(total - 1.0) > 1e-10:
        raise BasisError(f"branch probabilities sum to {total!r}, not 1")
    return out


def conditional_distribution(setup: MeasurementSetup, mu: int):
    """(p, density): normalized conditional momentum density of one branch."""
    ens = relative_final_state(setup, mu, audit=False)
    phi_p = to_momentum(ens.phi_f_rel)
    return setup.phi_i.grid.p_points(), phi_p.density()


def unconditional_distribution(setup: MeasurementSetup):
    """(p, density): spectral mixture sum_a P(a|psi1) dP(p - a | phi_i)."""
    dec = spectral(setup.A)
    x = setup.phi_i.grid.x_points()
    weights = [float(np.real(np.vdot(setup.psi1.amplitudes, proj @ setup.psi1.amplitudes)))
               for proj in dec.projectors]
    dens = np.zeros(setup.phi_i.grid.n)
    for a, w in zip(dec.eigenvalues, weights):
        if w <= 0:
            continue
        shifted = ApparatusWavefunction(setup.phi_i.grid,
                                        setup.phi_i.samples * np.exp(1j * a * x),
                                        pointer.POSITION)
        dens += w * to_momentum(shifted).density()
    return setup.phi_i.grid.p_points(), dens


def unconditional_density_matrix_route(setup: MeasurementSetup):
    """Same mixture via the meter's reduced density matrix (oracle route).

    rho_a = sum_a P(a) |e^(iax) phi_i><e^(iax) phi_i| evaluated on the
    momentum grid diagonal.
    """
    dec = spectral(setup.A)
    x = setup.phi_i.grid.x_points()
    n = setup.phi_i.grid.n
    rho_diag = np.zeros(n)
    for a, proj in zip(dec.eigenvalues, dec.projectors):
        w = float(np.real(np.vdot(setup.psi1.amplitudes, proj @ setup.psi1.amplitudes)))
        if w <= 0:
            continue
        shifted = to_momentum(ApparatusWavefunction(
            setup.phi_i.grid, setup.phi_i.samples * np.exp(1j * a * x), pointer.POSITION))
        rho_diag += w * np.abs(shifted.samples) ** 2
    return setup.phi_i.grid.p_points(), rho_diag


def verify_sum_rule(setup: MeasurementSetup) -> float:
    """max_p | sum_mu P_mu dP(p|phi_f_mu) - dP(p|Psi_f) |; exact up to rounding."""
    _, uncond = unconditional_distribution(setup)
    pooled = np.zeros_like(uncond)
    for ens in conditional_ensembles(setup):
        if ens.phi_f_rel is None:
            continue
        pooled += ens.transition_prob * to_momentum(ens.phi_f_rel).density()
    return float(np.max(np.abs(pooled - uncond)))


def spectral_shift_decomposition(setup: MeasurementSetup, mu: int):
    """[(coeff, shift)] with coeff = <psi_mu|Pi(a)|psi_1> and shift = a."""
    evals, coeffs = spectral_coefficients(setup.psi1, setup.A, setup.post_basis[mu])
    return [(complex(c), float(a)) for c, a in zip(coeffs, evals)]


def reassemble_relative_state(setup: MeasurementSetup, mu: int) -> ApparatusWavefunction:
    """Rebuild phi_f from the shift decomposition (summation oracle)."""
    terms = spectral_shift_decomposition(setup, mu)
    x = setup.phi_i.grid.x_points()
    f = np.zeros(setup.phi_i.grid.n, dtype=complex)
    for c, a in terms:
        f += c * np.exp(1j * a * x) * setup.phi_i.samples
    return normalized_wavefunction(setup.phi_i.grid, f, pointer.POSITION, guard_edges=False)


def conditioned_outcome_probabilities(psi1: KetVector, A: HermitianObservable,
                                      psi2: KetVector):
    """(eigenvalues, probabilities) of an ideal intermediate measurement of A
    given both boundary states:  P(a) prop. to |<psi_2|Pi(a)|psi_1>|^2."""
    evals, coeffs = spectral_coefficients(psi1, A, psi2)
    w = np.abs(coeffs) ** 2
    total = w.sum()
    if total < ORTHOGONAL_TOL:
        raise UndefinedABL("all intermediate amplitudes vanish")
    return evals, w / total


# ---------------------------------------------------------------------------
# first-order (complex shift) approximation of the relative state
# ---------------------------------------------------------------------------

def _falloff_check(phi_i: ApparatusWavefunction, beta: float):
    """phi_i(x) must fall off faster than exp(-|beta x|) over the grid."""
    x = phi_i.grid.x_points()
    w = np.abs(phi_i.samples) * np.exp(abs(beta) * np.abs(x))
    peak = w.max()
    k = phi_i.grid.n // 8
    outer = max(w[:k].max(), w[-k:].max())
    if outer > 1e-3 * peak:
        raise FallOffViolation("state does not decay faster than exp(-|Im A_w| |x|)")


def complex_shifted_state(phi_i: ApparatusWavefunction, weak_value: complex) -> ApparatusWavefunction:
    """phi_i shifted in p by a complex weak value: multiply by exp(i A_w x).

    The real part translates the momentum density; the imaginary part
    reweights x and is only admissible when phi_i out-decays it.
    """
    if phi_i.rep != pointer.POSITION:
        raise ValueError("complex shift acts on the position representation")
    w = complex(weak_value)
    _falloff_check(phi_i, w.imag)
    x = phi_i.grid.x_points()
    return normalized_wavefunction(phi_i.grid, np.exp(1j * w * x) * phi_i.samples,
                                   pointer.POSITION)


def relative_state_first_order(setup: MeasurementSetup, mu: int) -> ApparatusWavefunction:
    """Complex-shift approximation carrying the <psi_mu|psi_1> phase, so it is
    directly comparable (in L2) with the exact relative state."""
    ov = inner(setup.post_basis[mu], setup.psi1)
    if abs(ov) ** 2 < ORTHOGONAL_TOL:
        raise OrthogonalPostSelection(f"branch {mu} is orthogonal")
    num = complex(np.vdot(setup.post_basis[mu].amplitudes, setup.A.apply(setup.psi1)))
    shifted = complex_shifted_state(setup.phi_i, num / ov)
    return ApparatusWavefunction(shifted.grid, shifted.samples * ov / abs(ov), pointer.POSITION)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def branches_to_json(setup: MeasurementSetup, path):
    """Scenario JSON: per-branch probability and momentum moments + sum-rule audit."""
    branches = []
    for ens in conditional_ensembles(setup):
        if ens.phi_f_rel is None:
            branches.append({"mu": ens.mu, "P": 0.0, "mean_p": None, "var_p": None})
            continue
        mom = pointer.moments(to_momentum(ens.phi_f_rel))
        branches.append({"mu": ens.mu, "P": ens.transition_prob,
                         "mean_p": mom.mean, "var_p": mom.variance})
    payload = {
        "branches": branches,
        "sum_rule_dev": verify_sum_rule(setup),
        "grid": {"x_min": setup.phi_i.grid.x_min, "dx": setup.phi_i.grid.dx,
                 "n": setup.phi_i.grid.n},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
    return payload
