"""Canned, parameterized reproductions of the worked examples.

Each scenario returns a ScenarioResult carrying plot-ready datasets and a
list of quantitative checks; runners are deterministic given (parameters,
seed).  Closed-form amplitudes are used where the spectral sum would
catastrophically cancel in double precision (many-subsystem products, large
coherent amplitudes); everywhere else the generic operator machinery is
exercised directly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import classical, pointer, sampling, vonneumann, weakvalues
from .hilbert import (HermitianObservable, KetVector, spin_component,
                      spin_coherent_state, spin_operators)
from .pointer import ApparatusWavefunction, GridSpec, fourier_at, gaussian_state, to_momentum
from .weakvalues import assemble_profile, sampling_point, weak_value


@dataclass(frozen=True)
class Check:
    """One quantitative pass/fail item.

    kind records how the expected value is sourced: 'closed-form' for
    analytic values, 'identity' for exact structural identities, 'oracle'
    for independently computed numerical references, 'statistical' for
    Monte Carlo tolerances.
    """

    name: str
    expected: float
    got: float
    tolerance: float
    passed: bool
    kind: str


@dataclass
class ScenarioResult:
    name: str
    parameters: dict
    datasets: dict = field(default_factory=dict)   # name -> (columns, 2-d array)
    checks: list = field(default_factory=list)

    def add_dataset(self, name, columns, *arrays):
        self.datasets[name] = (list(columns), np.column_stack(arrays))

    def check_abs(self, name, expected, got, tol, kind):
        self.checks.append(Check(name, float(expected), float(got), float(tol),
                                 bool(abs(got - expected) <= tol), kind))

    def check_rel(self, name, expected, got, tol, kind):
        ok = abs(got - expected) <= tol * abs(expected)
        self.checks.append(Check(name, float(expected), float(got), float(tol), bool(ok), kind))

    def check_ge(self, name, threshold, got, kind):
        self.checks.append(Check(name, float(threshold), float(got), 0.0,
                                 bool(got >= threshold), kind))

    def check_true(self, name, got: bool, kind):
        self.checks.append(Check(name, 1.0, float(bool(got)), 0.0, bool(got), kind))

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _scale_checks(result: ScenarioResult, scale: float):
    """Re-evaluate pass/fail with scaled tolerances (CLI override hook)."""
    if scale == 1.0:
        return result
    rescored = []
    for c in result.checks:
        tol = c.tolerance * scale
        passed = abs(c.got - c.expected) <= tol if c.tolerance > 0 else c.passed
        rescored.append(Check(c.name, c.expected, c.got, tol, passed, c.kind))
    result.checks = rescored
    return result


def derive_rng(master_seed: int, scenario_name: str) -> np.random.Generator:
    """Per-scenario stream: hash of (scenario name, master seed), reproducible
    across machines via numpy's SeedSequence."""
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF] + list(scenario_name.encode())
    return np.random.default_rng(np.random.SeedSequence(entropy))


# ===========================================================================
# 1. spin-1 double Stern-Gerlach
# ===========================================================================

def run_spin1_stern_gerlach(params: dict, rng=None) -> ScenarioResult:
    sigmas = tuple(params["sigmas"])
    u_angle = params["u_angle"]
    v_angle = params["v_angle"]
    res = ScenarioResult("spin1-sg", dict(params))

    su = spin_component(1, (np.sin(u_angle), 0, np.cos(u_angle)))
    sv = spin_component(1, (np.sin(v_angle), 0, np.cos(v_angle)))
    psi1 = spin_coherent_state(1, 0.0, 0.0)            # |1, m=1> along z
    evv, vv = sv.eig()
    post = [KetVector(vv[:, j]) for j in range(3)]

    # spectral probabilities of the measured component (1/16, 3/8, 9/16)
    dec = vonneumann.spectral(su)
    probs = [float(np.real(np.vdot(psi1.amplitudes, proj @ psi1.amplitudes)))
             for proj in dec.projectors]
    for mvalue, prob, expected in zip(dec.eigenvalues, probs, (1 / 16, 3 / 8, 9 / 16)):
        res.check_abs(f"spectral_prob_m{mvalue:+.0f}", expected, prob, 1e-12, "closed-form")

    mean_expect = float(su.expectation(psi1))
    var_expect = float(su.variance(psi1))
    res.check_abs("spectral_mean", 0.5, mean_expect, 1e-12, "closed-form")
    res.check_abs("spectral_variance", 3 / 8, var_expect, 1e-12, "closed-form")

    p_dense = np.linspace(-5.0, 7.0, 1201)
    for sigma_p in sigmas:
        sigma_x = 1.0 / (2 * sigma_p)
        grid = GridSpec.centered(max(9 * sigma_x, 12.0), 4096)
        phi_i = gaussian_state(sigma_x, 0.0, 0.0, grid)
        setup = vonneumann.MeasurementSetup(psi1, su, post, phi_i)
        tag = f"sigma{sigma_p:g}"

        pfft, uncond = vonneumann.unconditional_distribution(setup)
        mom = _density_moments(pfft, uncond)
        res.check_abs(f"unconditional_mean_{tag}", 0.5, mom[0], 1e-6, "identity")
        res.check_abs(f"unconditional_var_{tag}", sigma_p**2 + 3 / 8, mom[1], 1e-6, "identity")
        res.check_abs(f"sum_rule_dev_{tag}", 0.0, vonneumann.verify_sum_rule(setup), 1e-9, "identity")

        branch_rows = []
        stacked = []
        for ens in vonneumann.conditional_ensembles(setup):
            bm = pointer.moments(to_momentum(ens.phi_f_rel))
            branch_rows.append((ens.mu, ens.transition_prob, bm.mean, bm.variance))
            stacked.append(ens.phi_f_rel.samples)
        x_pts = grid.x_points()
        for a in dec.eigenvalues:
            stacked.append(phi_i.samples * np.exp(1j * a * x_pts))
        amps = fourier_at(p_dense, x_pts, np.array(stacked))
        dens_cols = [np.abs(a) ** 2 for a in amps[:3]]
        dens_u = sum(w * np.abs(a) ** 2 for w, a in zip(probs, amps[3:]))
        res.add_dataset(f"branches_{tag}", ["mu", "P", "mean_p", "var_p"],
                        *np.array(branch_rows).T)
        res.add_dataset(f"conditional_{tag}", ["p", "mv_-1", "mv_0", "mv_+1"],
                        p_dense, *dens_cols)
        res.add_dataset(f"unconditional_{tag}", ["p", "density"], p_dense, dens_u)

        if abs(sigma_p - 0.1) < 1e-12:
            n_peaks = _count_peaks(dens_u, floor=dens_u.max() * 1e-4)
            res.check_abs("resolved_peaks_sigma0.1", 3, n_peaks, 0, "oracle")
        if abs(sigma_p - 0.75) < 1e-12:
            # branch with m_v = +1: its lower quartile sits beyond the spectrum
            j = int(np.argmin(np.abs(evv - 1.0)))
            dens = dens_cols[j] / np.trapezoid(dens_cols[j], p_dense)
            cdf = np.cumsum(dens) * (p_dense[1] - p_dense[0])
            quartile = float(np.interp(0.25, cdf, p_dense))
            res.check_ge("lower_quartile_mv1_sigma0.75", 1.0, quartile, "oracle")
    return res


def _density_moments(coord, dens):
    w = dens / np.sum(dens)
    mean = float(np.sum(coord * w))
    var = float(np.sum((coord - mean) ** 2 * w))
    return mean, var


def _count_peaks(dens, floor=0.0):
    inner = (dens[1:-1] > dens[:-2]) & (dens[1:-1] > dens[2:]) & (dens[1:-1] > floor)
    return int(np.count_nonzero(inner))


# ===========================================================================
# 2. planar angular momentum: sampling a rotating weak value
# ===========================================================================

def _rotor_profile(qk: float, theta0: float, grid: GridSpec, phi_i: ApparatusWavefunction):
    """Pure-phase profile for the planar-rotation transition.

    S(x) = qk cos(x + theta0), lambda(x) = S'(x) = -qk sin(x + theta0), and a
    flat likelihood (|g| constant), assembled in closed form.
    """
    x = grid.x_points()
    alpha = -qk * np.sin(x + theta0)
    beta = np.zeros_like(x)
    return assemble_profile(grid, phi_i, alpha, beta, np.zeros_like(x),
                            phase0=float(qk * np.cos(theta0)))


def run_orbital_angular_momentum(params: dict, rng=None) -> ScenarioResult:
    qk = params["qk"]
    theta0 = params["theta0"]
    sigma_x = params["sigma_x"]
    x_t, eps = params["window_center"], params["window_halfwidth"]
    res = ScenarioResult("orbital-angular-momentum", dict(params))

    # --- window case: a single narrow sample of the local weak value -------
    wgrid = GridSpec.centered(1.2 * np.pi, 2**18)
    win = pointer.window_state(x_t, eps, wgrid)
    xc, hw = pointer.window_support(win)
    profile_w = _rotor_profile(qk, theta0, wgrid, win)
    mean_shift = weakvalues.error_law_mean(profile_w, win)
    lam = lambda x: -qk * np.sin(x + theta0)
    predicted = lam(xc) * np.sin(hw) / hw
    res.check_abs("window_mean_sinc_factor", predicted, mean_shift, 1e-8, "closed-form")
    res.check_abs("window_sampled_weak_value", lam(xc), mean_shift, 0.25, "closed-form")

    win_p = to_momentum(win)
    p_axis = win_p.grid.p_points()
    lobe = np.abs(p_axis) <= 2 * np.pi / hw
    analytic = np.sqrt(hw / np.pi) * np.sinc(p_axis[lobe] * hw / np.pi) * np.exp(-1j * p_axis[lobe] * xc)
    res.check_abs("window_sinc_pointwise", 0.0,
                  float(np.max(np.abs(win_p.samples[lobe] - analytic))), 1e-6, "closed-form")
    res.check_abs("window_transform_at_zero", np.sqrt(hw / np.pi),
                  float(np.abs(fourier_at(np.array([0.0]), wgrid.x_points(), win.samples))[0]),
                  1e-10, "closed-form")
    sup = _window_support_arrays(win)
    p_lobe = np.linspace(-np.pi / hw, np.pi / hw, 4001)
    lobe_amp = fourier_at(p_lobe, *sup)
    lobe_mass = float(np.trapezoid(np.abs(lobe_amp) ** 2, p_lobe))
    res.check_abs("window_central_lobe_mass", 0.903, lobe_mass, 0.025, "oracle")
    # shifted-sinc dataset around the sampled weak value
    p_shift = np.linspace(lam(xc) - 6 / hw, lam(xc) + 6 / hw, 3001)
    rel_amp = fourier_at(p_shift, sup[0], np.exp(1j * qk * np.cos(sup[0] + theta0)) * sup[1])
    res.add_dataset("window_shifted_density", ["p", "density", "unshifted_sinc_sq"],
                    p_shift, np.abs(rel_amp) ** 2,
                    (hw / np.pi) * np.sinc((p_shift - lam(xc)) * hw / np.pi) ** 2)

    # --- Gaussian case: mean and variance of the sampled weak value --------
    ggrid = GridSpec.centered(8.5 * sigma_x, 4096)
    phi_g = gaussian_state(sigma_x, 0.0, 0.0, ggrid)
    profile_g = _rotor_profile(qk, theta0, ggrid, phi_g)
    mean_g = weakvalues.error_law_mean(profile_g, phi_g)
    expected_mean = lam(0.0) * np.exp(-sigma_x**2 / 2)
    res.check_abs("gaussian_mean_kick", expected_mean, mean_g, 1e-6, "closed-form")
    post = weakvalues.posterior_density(profile_g, phi_g)
    wts = post * ggrid.dx
    alpha_vals = profile_g.alpha
    m1 = float(np.sum(alpha_vals * wts))
    var_alpha = float(np.sum((alpha_vals - m1) ** 2 * wts))
    expected_var = qk**2 / 2 * (1 - np.exp(-sigma_x**2)) ** 2
    res.check_abs("gaussian_variance_kick", expected_var, var_alpha, 1e-6, "closed-form")

    env = sampling.bloch_envelope_check(qk)
    res.check_abs("bessel_sum_sq", 1.0, env["sum_j_squared"], 1e-8, "oracle")
    res.check_abs("bessel_m2_sum", qk**2 / 2, env["sum_m2_j_squared"], 1e-8, "oracle")
    res.check_abs("bessel_integer_amplitudes", 0.0, env["max_integer_error"], 1e-8, "oracle")

    # strong-measurement reconstruction and its squared-Bessel envelope
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        part = sampling.uniform_partition(-8 * sigma_x, 8 * sigma_x,
                                          int(round(16 * sigma_x / (np.pi / 4))))
        approx_p, exact_p, err = sampling.superpose_weak_measurements(phi_g, part, profile_g)
    pieces = sampling.chop(phi_g, part)
    res.add_dataset("window_samples", ["x_center", "weight", "alpha"],
                    np.array([w.center for w in pieces]),
                    np.array([w.weight for w in pieces]),
                    lam(np.array([w.center for w in pieces])))
    m_axis = np.arange(-int(qk) - 6, int(qk) + 7)
    exact_at_int = np.abs(fourier_at(m_axis.astype(float), ggrid.x_points(),
                                     np.exp(1j * profile_g.action) * phi_g.samples)) ** 2
    js = sampling.bessel_j(qk, int(np.max(np.abs(m_axis))))
    envelope = np.array([js[abs(m)] ** 2 for m in m_axis])
    exact_norm = exact_at_int / exact_at_int.sum()
    env_norm = envelope / envelope.sum()
    res.add_dataset("integer_peaks_vs_bessel", ["m", "exact_density", "bessel_sq"],
                    m_axis.astype(float), exact_norm, env_norm)
    res.check_abs("bessel_envelope_match", 0.0,
                  float(np.max(np.abs(exact_norm - env_norm)) / env_norm.max()),
                  1e-3, "oracle")
    res.add_dataset("superposition_error", ["n_windows", "l2_error"],
                    np.array([len(pieces)]), np.array([err]))

    # quantization emergence needs a pointer sharp enough to resolve unit gaps
    wide_sigma = params["quantization_sigma_x"]
    qgrid = GridSpec.centered(8.5 * wide_sigma, 2**13)
    phi_q = gaussian_state(wide_sigma, 0.0, 0.0, qgrid)
    prof_q = _rotor_profile(qk, theta0, qgrid, phi_q)
    f_q = np.exp(1j * prof_q.action) * phi_q.samples
    p_all = np.linspace(-qk - 3, qk + 3, 5601)
    dens_all = np.abs(fourier_at(p_all, qgrid.x_points(), f_q)) ** 2
    total = np.trapezoid(dens_all, p_all)
    near = 0.0
    for m in range(-int(qk) - 2, int(qk) + 3):
        p_loc = np.linspace(m - 0.1, m + 0.1, 41)
        dens_loc = np.abs(fourier_at(p_loc, qgrid.x_points(), f_q)) ** 2
        near += np.trapezoid(dens_loc, p_loc)
    res.check_ge("quantization_mass_near_integers", 0.90, near / total, "oracle")
    res.add_dataset("strong_measurement_density", ["p", "density"], p_all, dens_all / total)

    # interference comb: half-integer response suppressed against integers
    band = np.arange(-20, 21)
    dens_int = np.abs(fourier_at(band.astype(float), qgrid.x_points(), f_q)) ** 2
    dens_half = np.abs(fourier_at(band[:-1] + 0.5, qgrid.x_points(), f_q)) ** 2
    res.check_abs("half_integer_suppression", 0.0,
                  float(dens_half.mean() / dens_int.mean()), 1e-4, "oracle")
    return res


def _window_support_arrays(win: ApparatusWavefunction):
    nz = np.nonzero(win.density() > 0)[0]
    sl = slice(nz[0], nz[-1] + 1)
    return win.grid.x_points()[sl], win.samples[sl]


# ===========================================================================
# 3. N identical two-level systems: superoscillations, stretch and shift
# ===========================================================================

def _two_level_pair(alpha0: float):
    """Selection pair of a single two-level system with weak value alpha0 at
    the null rotation: polar angles -gamma/2 and +gamma/2 with
    cos(gamma/2) = 1/(2 alpha0)."""
    gamma = 2 * np.arccos(1.0 / (2 * alpha0))
    pre = spin_coherent_state(0.5, -gamma / 2, 0.0)
    post = spin_coherent_state(0.5, +gamma / 2, 0.0)
    return pre, post, gamma


def _nspin_profile(alpha0: float, n_spins: int, grid: GridSpec,
                   phi_i: ApparatusWavefunction):
    """Profile of the averaged observable via the product-amplitude identity:
    g_N(x) = g_1(x/N)^N, so alpha_N(x) = alpha_1(x/N) and L_N = L_1(x/N)^N."""
    pre, post, _ = _two_level_pair(alpha0)
    sz = spin_operators(0.5)[2]
    evals, coeffs = vonneumann.spectral_coefficients(pre, sz, post)
    y = grid.x_points() / n_spins
    phases = coeffs[:, None] * np.exp(1j * np.outer(evals, y))
    g1 = phases.sum(axis=0)
    ratio = (evals[:, None] * phases).sum(axis=0) / g1
    log_abs_gn = n_spins * np.log(np.abs(g1))
    phase0 = n_spins * float(np.angle(g1[int(np.argmin(np.abs(grid.x_points())))]))
    return assemble_profile(grid, phi_i, ratio.real, ratio.imag, log_abs_gn, phase0)


def run_nspin_superoscillation(params: dict, rng=None) -> ScenarioResult:
    alpha0 = params["alpha0"]
    n_spins = int(params["n_spins"])
    sigma = params["sigma"]
    res = ScenarioResult("nspin-superoscillation", dict(params))

    pre, post, gamma = _two_level_pair(alpha0)
    sz = spin_operators(0.5)[2]
    res.check_abs("alpha_at_null_rotation", alpha0, weak_value(pre, sz, post).alpha,
                  1e-12, "closed-form")
    pre100, post100, gamma100 = _two_level_pair(100.0)
    res.check_abs("alpha0_100_gamma", 0.997, gamma100 / np.pi, 4e-3, "closed-form")
    res.check_abs("alpha0_100", 100.0, weak_value(pre100, sz, post100).alpha, 1e-9,
                  "closed-form")

    grid = GridSpec.centered(40.0, 8192)
    x = grid.x_points()

    # ---- stretch/squeeze at x0 = 0 ----------------------------------------
    phi0 = gaussian_state(sigma, 0.0, 0.0, grid)
    prof0 = _nspin_profile(alpha0, n_spins, grid, phi0)
    sp0 = sampling_point(prof0, phi0)
    res.check_abs("width_ratio_x0_0", 1.6, sp0.sigma_eff / sigma, 0.05, "closed-form")
    post0 = weakvalues.posterior_density(prof0, phi0)
    exact_ratio = np.sqrt(_density_moments(x, post0)[1]) / sigma
    res.add_dataset("posterior_x0_0", ["x", "prior", "posterior", "likelihood"],
                    x, phi0.density(), post0, prof0.likelihood)
    res.add_dataset("width_ratios", ["formula", "exact_density"],
                    np.array([sp0.sigma_eff / sigma]), np.array([exact_ratio]))

    # superoscillatory region: |alpha_N| above the single-system bound 1/2
    region = np.abs(prof0.alpha) > 0.5
    width = float(np.sum(region) * grid.dx)
    res.check_rel("superoscillation_width", 2 * np.sqrt(2 / alpha0) * n_spins, width,
                  0.05, "closed-form")

    # curvature of the kick about the null rotation; the alpha0^3 / N^2 law
    # is its large-alpha0 form (the kick decreases away from the origin)
    alpha_prime = np.gradient(prof0.alpha, grid.dx)
    curv = float(np.gradient(alpha_prime, grid.dx)[int(np.argmin(np.abs(x)))])
    res.check_rel("alpha_curvature_origin", -alpha0 * (4 * alpha0**2 - 1) / (2 * n_spins**2),
                  curv, 1e-3, "closed-form")
    res.check_rel("alpha_cubed_scaling", alpha0**3, abs(curv) * n_spins**2 / 2,
                  0.02, "closed-form")

    # pointer response at x0 = 0 (squeeze visible on top of the kick alpha0)
    f0 = np.exp(1j * prof0.action) * np.sqrt(prof0.likelihood) * phi0.samples
    f0 /= np.sqrt(np.sum(np.abs(f0) ** 2) * grid.dx)
    p_axis = np.linspace(alpha0 - 12, alpha0 + 12, 2401)
    dens_p = np.abs(fourier_at(p_axis, x, f0)) ** 2
    res.add_dataset("pointer_x0_0", ["p", "density"], p_axis, dens_p)

    # ---- shift effect at x0 = 2 pi ----------------------------------------
    x0 = params["x0_shift"]
    phi1 = gaussian_state(sigma, x0, 0.0, grid)
    prof1 = _nspin_profile(alpha0, n_spins, grid, phi1)
    sp1 = sampling_point(prof1, phi1)
    res.check_abs("sampling_point_x0_2pi", 9.03, sp1.x_first_order, 0.05, "closed-form")
    alpha_n = lambda xv: float(np.interp(xv, x, prof1.alpha))
    kick_ratio = alpha_n(x0) / alpha_n(sp1.x_first_order) - 1.0
    res.check_abs("kick_reduction_x0_2pi", 0.30, kick_ratio, 0.03, "closed-form")
    post1 = weakvalues.posterior_density(prof1, phi1)
    res.add_dataset("posterior_x0_2pi", ["x", "prior", "posterior"],
                    x, phi1.density(), post1)
    res.add_dataset("sampling_points", ["x0", "x_mode", "x_first_order"],
                    np.array([0.0, x0]), np.array([sp0.x_mode, sp1.x_mode]),
                    np.array([sp0.x_first_order, sp1.x_first_order]))

    # ---- biased weak-value scan -------------------------------------------
    centers = np.linspace(0.0, 4 * np.pi, 25)
    modes, kicks, naive = [], [], []
    for c in centers:
        phic = gaussian_state(sigma, float(c), 0.0, grid)
        profc = _nspin_profile(alpha0, n_spins, grid, phic)
        spc = sampling_point(profc, phic)
        modes.append(spc.x_mode)
        kicks.append(float(np.interp(spc.x_mode, x, profc.alpha)))
        naive.append(float(np.interp(c, x, profc.alpha)))
    res.add_dataset("biased_scan", ["x0", "x_mode", "kick", "alpha_at_x0"],
                    centers, np.array(modes), np.array(kicks), np.array(naive))
    res.check_true("biased_scan_monotone", bool(np.all(np.diff(modes) > 0)), "oracle")
    return res


# ===========================================================================
# 4. coherent-state pair: the weak-to-strong transition
# ===========================================================================

def _coherent_profile(lam_sq: float, grid: GridSpec, phi_i: ApparatusWavefunction):
    """Closed-form profile for the +-lambda coherent pair under the number
    operator: A_w(x) = -lam^2 e^{ix}, log|g| = -lam^2 (1 + cos x)."""
    x = grid.x_points()
    alpha = -lam_sq * np.cos(x)
    beta = -lam_sq * np.sin(x)
    log_abs = -lam_sq * (1 + np.cos(x))
    return assemble_profile(grid, phi_i, alpha, beta, log_abs, phase0=0.0)


def _coherent_posterior_log(lam_sq: float, sigma: float, x: np.ndarray) -> np.ndarray:
    return -2 * lam_sq * np.cos(x) - x**2 / (2 * sigma**2)


def run_coherent_phase_transition(params: dict, rng=None) -> ScenarioResult:
    lam_sq = params["lambda_sq"]
    eps_list = tuple(params["epsilon"])
    res = ScenarioResult("coherent-transition", dict(params))

    for eps in eps_list:
        sigma = np.sqrt(eps / (2 * lam_sq))
        tag = f"eps{eps:g}"
        span = max(2.5 * np.pi, 8.5 * sigma)
        grid = GridSpec.centered(span, 2**13)
        x = grid.x_points()
        phi_i = gaussian_state(sigma, 0.0, 0.0, grid)
        prof = _coherent_profile(lam_sq, grid, phi_i)
        post = weakvalues.posterior_density(prof, phi_i)
        f = np.exp(1j * prof.action) * np.sqrt(prof.likelihood) * phi_i.samples
        f /= np.sqrt(np.sum(np.abs(f) ** 2) * grid.dx)
        dp_i2 = 1 / (4 * sigma**2)

        if eps < 1:
            p_axis = np.linspace(-lam_sq - 6 / sigma, -lam_sq + 6 / sigma, 1601)
            dens = np.abs(fourier_at(p_axis, x, f)) ** 2
            dens /= np.trapezoid(dens, p_axis)
            mean_p = float(np.trapezoid(p_axis * dens, p_axis))
            res.check_abs(f"subcritical_mean_{tag}", -lam_sq, mean_p, 0.5, "closed-form")
            sp = sampling_point(prof, phi_i)
            exact_std = np.sqrt(_density_moments(x, post)[1])
            res.check_rel(f"stretch_ratio_{tag}", 1 / np.sqrt(1 - eps), exact_std / sigma,
                          0.02, "closed-form")
            res.check_rel(f"sigma_eff_formula_{tag}", sigma / np.sqrt(1 - eps), sp.sigma_eff,
                          1e-5, "identity")
        else:
            root = _peak_root(eps)
            peaks = _density_peak_locations(x, post)
            if len(peaks):
                got_peak = float(np.max(np.abs(peaks)))
                res.check_abs(f"peak_location_{tag}", root, got_peak, 2e-3, "oracle")
            nu_peak = -lam_sq * np.cos(root)
            # coarse wide grid for moments (fringe period ~1 still resolved),
            # fine narrow grid for locating the fringe maxima
            p_axis = np.linspace(nu_peak - 30, nu_peak + 30, 1601)
            dens = np.abs(fourier_at(p_axis, x, f)) ** 2
            dens /= np.trapezoid(dens, p_axis)
            mean_p = float(np.trapezoid(p_axis * dens, p_axis))
            var_p = float(np.trapezoid((p_axis - mean_p) ** 2 * dens, p_axis))
            res.add_dataset(f"pointer_{tag}", ["p", "density"], p_axis, dens)
            if eps >= 10:
                res.check_rel(f"supercritical_variance_{tag}", dp_i2 + lam_sq / 2, var_p,
                              0.02, "closed-form")
                p_fine = np.linspace(mean_p - 3.2, mean_p + 3.2, 2401)
                dens_fine = np.abs(fourier_at(p_fine, x, f)) ** 2
                resid = _fringe_residuals(p_fine, dens_fine, mean_p, window=2.5)
                res.check_abs(f"fringe_integer_residual_{tag}", 0.0,
                              float(np.max(np.abs(resid))) if resid.size else np.inf,
                              0.05, "oracle")
                fr_pred = _fringe_prediction_residual(p_fine, dens_fine, mean_p, root,
                                                      lam_sq / eps)
                res.check_abs(f"fringe_law_residual_{tag}", 0.0, fr_pred, 0.05, "closed-form")
        res.add_dataset(f"posterior_{tag}", ["x", "prior", "posterior"],
                        x, phi_i.density(), post)

    # bifurcation onset by modality scan of the posterior
    onset = None
    scan = np.arange(0.9, 1.2001, 0.0025)
    xs = np.linspace(-3.0, 3.0, 2**14)
    for eps in scan:
        sigma = np.sqrt(eps / (2 * lam_sq))
        logp = _coherent_posterior_log(lam_sq, sigma, xs)
        d = np.exp(logp - logp.max())
        if _count_peaks(d) >= 2:
            onset = float(eps)
            break
    res.check_abs("bifurcation_onset", 1.0, onset if onset else np.inf, 0.05, "oracle")

    # root curve of x = eps sin x: smooth and monotone in eps
    eps_grid = np.linspace(1.05, 8.0, 80)
    roots = np.array([_peak_root(e) for e in eps_grid])
    res.add_dataset("peak_roots", ["epsilon", "root", "near_critical_approx"],
                    eps_grid, roots,
                    np.sqrt(np.maximum(6 * (eps_grid - 1) / eps_grid, 0.0)))
    res.check_true("roots_monotone", bool(np.all(np.diff(roots) > 0)), "oracle")

    # critical width scaling Delta-x prop. |lambda|^(-1/2) at eps = 1
    lam2_sweep = np.asarray(params["scaling_lambda_sq"], float)
    widths = []
    for l2 in lam2_sweep:
        sigma = np.sqrt(1.0 / (2 * l2))
        logp = _coherent_posterior_log(l2, sigma, xs)
        d = np.exp(logp - logp.max())
        d /= np.trapezoid(d, xs)
        widths.append(np.sqrt(np.trapezoid(d * xs**2, xs)))
    slope = float(np.polyfit(np.log(np.sqrt(lam2_sweep)), np.log(widths), 1)[0])
    res.check_abs("critical_width_slope", -0.5, slope, 0.1, "oracle")
    res.add_dataset("critical_scaling", ["lambda", "delta_x"],
                    np.sqrt(lam2_sweep), np.array(widths))
    return res


def _peak_root(eps: float) -> float:
    """First positive root of x = eps sin x by bisection on (0, pi]."""
    if eps <= 1:
        return 0.0
    f = lambda x: x - eps * np.sin(x)
    lo, hi = 1e-9, np.pi
    # f(lo) < 0 for eps > 1; f(pi) = pi > 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _density_peak_locations(x, dens, rel_floor=1e-3):
    inner = (dens[1:-1] > dens[:-2]) & (dens[1:-1] > dens[2:])
    idx = np.nonzero(inner)[0] + 1
    idx = idx[dens[idx] > rel_floor * dens.max()]
    return x[idx]


def _fringe_residuals(p, dens, center, window):
    locs = _density_peak_locations(p, dens, rel_floor=1e-3)
    locs = locs[np.abs(locs - center) <= window]
    return locs - np.round(locs)


def _fringe_prediction_residual(p, dens, center, x_t, offset):
    """Max distance of observed fringe maxima from p_k = k pi / x~ - offset."""
    locs = _density_peak_locations(p, dens, rel_floor=1e-3)
    locs = locs[np.abs(locs - center) <= 2.5]
    if locs.size == 0:
        return np.inf
    k = np.round((locs + offset) * x_t / np.pi)
    return float(np.max(np.abs(locs - (k * np.pi / x_t - offset))))


# ===========================================================================
# 5. negative kinetic energy of a post-selected oscillator
# ===========================================================================

def run_negative_kinetic_energy(params: dict, rng=None) -> ScenarioResult:
    m = params["mass"]
    omega = params["omega"]
    q = params["q"]
    res = ScenarioResult("negative-kinetic-energy", dict(params))

    xs = np.linspace(-6.0, 6.0, 1201)
    tau = classical.kinetic_local_weak_value(m, omega, q, xs)
    like = classical.kinetic_likelihood(m, omega, q, xs)
    act = classical.kinetic_action(m, omega, q, xs)
    kap = classical.de_broglie_momentum(m, omega, q, xs)
    res.add_dataset("profiles", ["x", "tau", "likelihood", "action", "kappa"],
                    xs, tau, like, act, kap)

    tau0 = float(classical.kinetic_local_weak_value(m, omega, q, 0.0))
    res.check_abs("tau_zero_closed_form", omega / 2 - m * omega**2 * q**2 / 2, tau0,
                  1e-12, "closed-form")

    # momentum-space quadrature oracle for the amplitude <q| e^(i T x) |0>
    kgrid = np.linspace(-16.0, 16.0, 2**13, endpoint=False)
    dk = kgrid[1] - kgrid[0]
    psi0_k = (1 / (m * omega * np.pi)) ** 0.25 * np.exp(-kgrid**2 / (2 * m * omega))
    phase = np.exp(1j * kgrid * q)

    def amp_numeric(xv):
        return np.sum(phase * np.exp(1j * kgrid**2 * xv / (2 * m)) * psi0_k) * dk / np.sqrt(2 * np.pi)

    def tau_numeric(xv):
        g = amp_numeric(xv)
        num = np.sum(phase * (kgrid**2 / (2 * m)) * np.exp(1j * kgrid**2 * xv / (2 * m)) * psi0_k) \
            * dk / np.sqrt(2 * np.pi)
        return float((num / g).real)

    amp_n = np.array([amp_numeric(xv) for xv in xs])
    amp_cf = (m * omega / np.pi) ** 0.25 * (1 - 1j * xs * omega) ** -0.5 \
        * np.exp(-m * omega * q**2 / (2 * (1 - 1j * xs * omega)))
    rel_err = np.abs(amp_n - amp_cf) / np.abs(amp_cf)
    res.check_abs("dft_amplitude_agreement", 0.0, float(np.max(rel_err)), 1e-6, "oracle")
    res.check_abs("tau_zero_numeric", tau0, tau_numeric(0.0), 1e-6, "oracle")

    lo, hi = 0.5, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if tau_numeric(mid) < 0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    res.check_true("tau_sign_change_in_band", 0.8 <= root * omega <= 1.3, "oracle")
    # tau = 0 at 1 + x^2 w^2 = 2 m w q^2 / (1 + m w q^2)
    u_root = 2 * m * omega * q**2 / (1 + m * omega * q**2)
    res.check_abs("tau_sign_change_location",
                  np.sqrt(u_root - 1) / omega if u_root > 1 else np.nan,
                  root, 1e-6, "closed-form")

    x_far = 50.0 / omega
    kap_far = float(classical.de_broglie_momentum(m, omega, q, x_far))
    res.check_rel("kappa_free_limit", m * q / x_far, kap_far, 1e-3, "closed-form")
    tau_far = float(classical.kinetic_local_weak_value(m, omega, q, x_far))
    free = (m * q / x_far) ** 2 / (2 * m)
    res.check_rel("tau_free_limit_ratio", 1 + 1 / (m * omega * q**2), tau_far / free,
                  0.02, "closed-form")

    x_c = np.sqrt(m * omega * q**2 - 1) / omega
    jump = float(classical.kinetic_likelihood(m, omega, q, x_c)
                 / classical.kinetic_likelihood(m, omega, q, 0.0))
    expected_jump = np.exp(m * omega * q**2 - 1) / np.sqrt(m * omega * q**2)
    res.check_rel("likelihood_jump_ratio", expected_jump, jump, 1e-9, "identity")
    res.check_rel("likelihood_jump_location", q * np.sqrt(m * omega), x_c, 0.35, "closed-form")
    res.check_ge("likelihood_jump_size", 100.0, jump, "closed-form")

    # bound + free split is an algebraic identity of the closed form
    om_x = omega / (1 + xs**2 * omega**2)
    split = om_x / 2 - m * om_x**2 * q**2 / 2 + kap**2 / (2 * m)
    res.check_abs("bound_free_split", 0.0, float(np.max(np.abs(split - tau))), 1e-12,
                  "identity")
    return res


# ===========================================================================
# 6. basis-free distribution of weak values
# ===========================================================================

def run_overall_distribution(params: dict, rng=None) -> ScenarioResult:
    dim = int(params["dim"])
    n_samples = int(params["n_samples"])
    res = ScenarioResult("overall-distribution", dict(params))
    if rng is None:
        rng = derive_rng(params.get("seed", 0), "overall-distribution")

    a_max = 1.0
    evals = -a_max + (2 * np.arange(dim) + 1) * a_max / dim
    A = HermitianObservable(np.diag(evals).astype(complex))
    psi = KetVector(np.ones(dim, dtype=complex) / np.sqrt(dim))
    mean_a = A.expectation(psi)
    delta_a = np.sqrt(A.variance(psi))

    samples = weakvalues.overall_weak_value_samples(psi, A, n_samples, rng)
    alpha = samples.z.real
    beta = samples.z.imag

    res.check_abs("sample_mean", mean_a, float(alpha.mean()),
                  4 * delta_a / np.sqrt(2 * n_samples) + 1e-12, "statistical")
    res.check_rel("sample_std", delta_a / np.sqrt(2), float(alpha.std()), 0.01, "statistical")

    from scipy import stats
    ks = stats.kstest(alpha, lambda a: weakvalues.overall_cdf(a, mean_a, delta_a))
    res.check_abs("ks_distance", 0.0, float(ks.statistic), 0.01, "statistical")

    ecc_mc = float(np.mean(np.abs(alpha) > a_max))
    ecc_cf = weakvalues.eccentric_probability(a_max, mean_a, delta_a)
    res.check_abs("eccentric_probability_mc", 0.0257, ecc_mc, 0.003, "statistical")
    res.check_abs("eccentric_probability_closed_form", 0.0257, ecc_cf, 0.003, "closed-form")

    # symmetry of the complex distribution about beta = 0: sign balance
    # (a robust stand-in for a skew test; the sixth moment diverges)
    frac_pos = float(np.mean(beta > 0))
    res.check_abs("beta_sign_symmetry", 0.5, frac_pos, 3 * np.sqrt(0.25 / n_samples),
                  "statistical")

    a_grid = np.linspace(mean_a - 8 * delta_a, mean_a + 8 * delta_a, 801)
    hist = classical.histogram(alpha[np.abs(alpha - mean_a) < 8 * delta_a],
                               160, a_grid[0], a_grid[-1])
    scale = float(np.mean(np.abs(alpha - mean_a) < 8 * delta_a))
    res.add_dataset("alpha_histogram", ["bin_center", "count", "density", "stderr"],
                    hist.centers, hist.counts, hist.density * scale, hist.stderr * scale)
    res.add_dataset("alpha_closed_form", ["alpha", "density"],
                    a_grid, weakvalues.overall_density(a_grid, mean_a, delta_a))
    norm_1d = float(np.trapezoid(weakvalues.overall_density(a_grid, mean_a, delta_a), a_grid)
                    + 1 - (weakvalues.overall_cdf(a_grid[-1], mean_a, delta_a)
                           - weakvalues.overall_cdf(a_grid[0], mean_a, delta_a)))
    res.check_abs("marginal_normalization", 1.0, norm_1d, 1e-6, "identity")
    return res


# ===========================================================================
# registry
# ===========================================================================

def _float_list(text):
    return tuple(float(v) for v in str(text).split(","))


@dataclass(frozen=True)
class ParamSpec:
    default: object
    parse: Callable
    help: str = ""


@dataclass(frozen=True)
class ScenarioSpec:
    runner: Callable
    params: dict
    description: str


SCENARIOS = {
    "spin1-sg": ScenarioSpec(
        run_spin1_stern_gerlach,
        {
            "sigmas": ParamSpec((0.1, 0.35, 0.75), _float_list, "pointer noise levels"),
            "u_angle": ParamSpec(np.pi / 3, float, "polar angle of the measured component"),
            "v_angle": ParamSpec(2 * np.pi / 3, float, "polar angle of the post-selection"),
        },
        "spin-1 double Stern-Gerlach: broadened spectra, posterior breakup, sum rule"),
    "orbital-angular-momentum": ScenarioSpec(
        run_orbital_angular_momentum,
        {
            "qk": ParamSpec(25.0, float, "product |q||k| (classical angular momentum scale)"),
            "theta0": ParamSpec(np.pi / 2, float, "angle between the boundary vectors"),
            "sigma_x": ParamSpec(np.pi, float, "Gaussian reaction-angle spread"),
            "window_center": ParamSpec(np.pi / 8, float, "window sampling point"),
            "window_halfwidth": ParamSpec(np.pi / 32, float, "window half-width"),
            "quantization_sigma_x": ParamSpec(3 * np.pi, float,
                                              "spread for the quantization-emergence item"),
        },
        "planar angular momentum: local sampling, sinc shifts, Bessel quantization"),
    "nspin-superoscillation": ScenarioSpec(
        run_nspin_superoscillation,
        {
            "alpha0": ParamSpec(5.0, float, "weak value at the null rotation"),
            "n_spins": ParamSpec(50, int, "number of averaged two-level systems"),
            "sigma": ParamSpec(np.pi / 4, float, "Gaussian reaction spread"),
            "x0_shift": ParamSpec(2 * np.pi, float, "prior center for the shift case"),
        },
        "averaged two-level systems: superoscillation, stretch and shift effects"),
    "coherent-transition": ScenarioSpec(
        run_coherent_phase_transition,
        {
            "lambda_sq": ParamSpec(25.0, float, "|lambda|^2 of the coherent pair"),
            "epsilon": ParamSpec((0.1, 1.1, 4.0, 49.0), _float_list,
                                 "criticality parameters 2 sigma^2 |lambda|^2"),
            "scaling_lambda_sq": ParamSpec((16.0, 25.0, 36.0, 49.0), _float_list,
                                           "|lambda|^2 sweep for the critical width fit"),
        },
        "coherent pair under the number operator: weak-to-strong transition"),
    "negative-kinetic-energy": ScenarioSpec(
        run_negative_kinetic_energy,
        {
            "mass": ParamSpec(1.0, float, "oscillator mass"),
            "omega": ParamSpec(1.0, float, "oscillator frequency"),
            "q": ParamSpec(3.0, float, "post-selected position"),
        },
        "ground-state oscillator post-selected outside the turning points"),
    "overall-distribution": ScenarioSpec(
        run_overall_distribution,
        {
            "dim": ParamSpec(8, int, "Hilbert-space dimension"),
            "n_samples": ParamSpec(10**5, int, "accepted Monte Carlo samples"),
        },
        "basis-free weak-value distribution vs the closed form"),
}


def run_scenario(name: str, params: Optional[dict] = None, seed: int = 0,
                 tolerance_scale: float = 1.0) -> ScenarioResult:
    spec = SCENARIOS[name]
    eff = {k: v.default for k, v in spec.params.items()}
    if params:
        eff.update(params)
    rng = derive_rng(seed, name)
    result = spec.runner(eff, rng)
    result.parameters = {**eff, "seed": seed, "tolerance_scale": tolerance_scale}
    return _scale_checks(result, tolerance_scale)
