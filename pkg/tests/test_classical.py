import numpy as np
import pytest

from weakmeas import classical as C
from weakmeas.errors import MultipleExtremals, StarvedSampler

TIMES = (0.0, 1.0, 2.0)


def quad_lag(c=0.15, mass=1.0):
    return C.Lagrangian1D(mass, ("free",), ("quadratic", c))


def lin_lag(a=1.0, mass=1.0):
    return C.Lagrangian1D(mass, ("free",), ("linear", a))


class TestExtremalAction:
    def test_free_textbook_values(self):
        # x = 0: S = m (q2-q1)^2 / (2 T), Van Vleck m / T
        lag = lin_lag()
        ext = C.extremal_action(lag, C.BoundaryProblem(0.0, 1.0, *TIMES, x=0.0))
        assert abs(ext.s12 - 0.25) < 1e-14
        assert abs(ext.vanvleck - 0.5) < 1e-14

    def test_action_gradient_is_alpha(self):
        for lag in (lin_lag(), quad_lag()):
            for x in (-0.8, 0.0, 0.9):
                h = 1e-6
                sp = C.extremal_action(lag, C.BoundaryProblem(0.0, 1.0, *TIMES, x=x + h)).s12
                sm = C.extremal_action(lag, C.BoundaryProblem(0.0, 1.0, *TIMES, x=x - h)).s12
                ext = C.extremal_action(lag, C.BoundaryProblem(0.0, 1.0, *TIMES, x=x))
                assert abs((sp - sm) / (2 * h) - ext.alpha12) < 1e-6

    def test_linear_shooting_oracle(self):
        # piecewise-linear trajectory with a momentum kick x at t_i
        x = 0.7
        ext = C.extremal_action(lin_lag(), C.BoundaryProblem(0.0, 1.0, *TIMES, x=x))
        k1 = (1.0 - x * 1.0) / 2.0
        q_i = k1 * 1.0
        assert abs(ext.alpha12 - q_i) < 1e-12
        assert abs(ext.k1 - k1) < 1e-12
        assert abs(ext.k2 - (k1 + x)) < 1e-12

    def test_momentum_endpoints_are_gradients(self):
        lag = quad_lag()
        bp = C.BoundaryProblem(0.2, 1.1, *TIMES, x=0.5)
        ext = C.extremal_action(lag, bp)
        h = 1e-6
        s_q2p = C.extremal_action(lag, C.BoundaryProblem(0.2, 1.1 + h, *TIMES, x=0.5)).s12
        s_q2m = C.extremal_action(lag, C.BoundaryProblem(0.2, 1.1 - h, *TIMES, x=0.5)).s12
        s_q1p = C.extremal_action(lag, C.BoundaryProblem(0.2 + h, 1.1, *TIMES, x=0.5)).s12
        s_q1m = C.extremal_action(lag, C.BoundaryProblem(0.2 - h, 1.1, *TIMES, x=0.5)).s12
        assert abs(ext.k2 - (s_q2p - s_q2m) / (2 * h)) < 1e-6
        assert abs(ext.k1 + (s_q1p - s_q1m) / (2 * h)) < 1e-6

    def test_focal_guard(self):
        with pytest.raises(MultipleExtremals):
            C.extremal_action(quad_lag(c=0.5), C.BoundaryProblem(0.0, 1.0, *TIMES, x=1.0))

    def test_harmonic_not_closed_form(self):
        lag = C.Lagrangian1D(1.0, ("harmonic", 1.0), ("linear", 1.0))
        assert not lag.closed_form_solvable
        with pytest.raises(ValueError):
            C.extremal_action(lag, C.BoundaryProblem(0.0, 1.0, *TIMES, x=0.0))


class TestPosterior:
    def setup_method(self):
        self.prior = C.PhaseSpacePrior(0.6, 1.0)
        self.xg = np.linspace(-2.8, 2.8, 1121)
        self.pg = np.linspace(-6.0, 8.0, 1401)

    def test_no_coupling_posterior_is_prior(self):
        post = C.classical_posterior(lin_lag(a=0.0), self.prior, 0.0, 1.0, TIMES,
                                     self.xg, self.pg)
        assert np.max(np.abs(post.posterior_x - self.prior.density_x(self.xg))) < 1e-12
        assert np.max(np.abs(post.posterior_p - self.prior.density_p(self.pg))) < 1e-9

    def test_linear_flat_likelihood(self):
        post = C.classical_posterior(lin_lag(), self.prior, 0.0, 1.0, TIMES,
                                     self.xg, self.pg)
        assert np.max(np.abs(post.likelihood - 1.0)) < 1e-12

    def test_bayes_normalization(self):
        post = C.classical_posterior(quad_lag(), self.prior, 0.0, 1.0, TIMES,
                                     self.xg, self.pg)
        prior_x = self.prior.density_x(self.xg)
        total = np.trapezoid(post.likelihood * prior_x, self.xg) / np.trapezoid(prior_x, self.xg)
        assert abs(total - 1.0) < 1e-10

    def test_pointer_mean_shift(self):
        post = C.classical_posterior(lin_lag(), self.prior, 0.0, 1.0, TIMES,
                                     self.xg, self.pg)
        wx = post.posterior_x / np.trapezoid(post.posterior_x, self.xg)
        predicted = np.trapezoid(wx * post.alpha, self.xg)
        mean_p = np.trapezoid(self.pg * post.posterior_p, self.pg)
        assert abs(mean_p - predicted) < 1e-6


class TestMonteCarlo:
    def setup_method(self):
        self.lag = quad_lag()
        self.prior = C.PhaseSpacePrior(0.6, 1.0)
        self.xg = np.linspace(-2.8, 2.8, 1121)
        self.pg = np.linspace(-6.0, 8.0, 1401)
        self.post = C.classical_posterior(self.lag, self.prior, 0.0, 1.0, TIMES,
                                          self.xg, self.pg)

    def test_posterior_per_bin(self):
        mc = C.monte_carlo_oracle(self.lag, self.prior, 0.0, 0.4, 1.0, 0.4, TIMES,
                                  10**6, 12345, k_max=8.0)
        hist = C.histogram(mc.x, 30, -1.8, 1.8)
        model = np.interp(hist.centers, self.xg, self.post.posterior_x)
        dev = C.per_bin_deviation(hist, model, mc.x.size)
        assert np.max(np.abs(dev)) < 3.0
        hp = C.histogram(mc.p_f, 30, -3.0, 5.0)
        modp = np.interp(hp.centers, self.pg, self.post.posterior_p)
        devp = C.per_bin_deviation(hp, modp, mc.p_f.size)
        assert np.max(np.abs(devp)) < 3.0

    def test_flow_reversibility(self):
        mc = C.monte_carlo_oracle(self.lag, self.prior, 0.0, 0.4, 1.0, 0.4, TIMES,
                                  10**5, 7, k_max=8.0)
        recovered = C.invert_flow(self.lag, mc.final, TIMES)
        for rec, ini in zip(recovered, mc.initial):
            assert np.max(np.abs(rec - ini)) < 1e-12

    def test_bound_doubling_invariance(self):
        # doubling the flat momentum bound changes the posterior by < 1 sigma
        a = C.monte_carlo_oracle(self.lag, self.prior, 0.0, 0.4, 1.0, 0.4, TIMES,
                                 2 * 10**6, 3, k_max=8.0)
        b = C.monte_carlo_oracle(self.lag, self.prior, 0.0, 0.4, 1.0, 0.4, TIMES,
                                 4 * 10**6, 4, k_max=16.0)
        ha = C.histogram(a.x, 16, -1.6, 1.6)
        hb = C.histogram(b.x, 16, -1.6, 1.6)
        diff = np.abs(ha.density - hb.density)
        sigma = np.sqrt(ha.stderr**2 + hb.stderr**2)
        assert np.mean(diff / sigma) < 1.0
        assert a.k_bound_ok and b.k_bound_ok

    def test_window_width_invariance(self):
        # the admitted couplings have state-independent Jacobians, so the
        # windowed likelihood already equals the point limit at any width
        ref = None
        for w2, seed in ((0.8, 21), (0.4, 22), (0.2, 23)):
            mc = C.monte_carlo_oracle(self.lag, self.prior, 0.0, 0.4, 1.0, w2, TIMES,
                                      3 * 10**6, seed, k_max=8.0)
            hist = C.histogram(mc.x, 20, -1.6, 1.6)
            model = np.interp(hist.centers, self.xg, self.post.posterior_x)
            dev = C.per_bin_deviation(hist, model, mc.x.size)
            assert np.max(np.abs(dev)) < 3.5
            ref = hist if ref is None else ref

    def test_accept_all_posterior_is_prior(self):
        # no effective post-selection window: the x sample keeps its prior
        # (the flat-bound headroom warning is expected when nothing is cut)
        with pytest.warns(UserWarning, match="flat bound"):
            mc = C.monte_carlo_oracle(self.lag, self.prior, 0.0, 0.4, 0.0, 1e6, TIMES,
                                      2 * 10**5, 99, k_max=8.0)
        assert mc.acceptance == 1.0
        hist = C.histogram(mc.x, 24, -1.8, 1.8)
        model = self.prior.density_x(hist.centers)
        dev = C.per_bin_deviation(hist, model, mc.x.size)
        assert np.max(np.abs(dev)) < 3.5

    def test_starved_sampler(self):
        with pytest.raises(StarvedSampler):
            C.monte_carlo_oracle(self.lag, self.prior, 0.0, 0.001, 30.0, 0.001, TIMES,
                                 10**5, 1, k_max=8.0)


class TestBayesStructure:
    def test_discrete_product_rule(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            prior = rng.random(6)
            prior /= prior.sum()
            like = rng.random(6)
            post, evidence = C.discrete_posterior(prior, like)
            assert abs(post.sum() - 1.0) < 1e-12
            assert abs(evidence - np.sum(like * prior)) < 1e-12
            # product rule both ways: P(XZ|Y) = P(X|YZ) P(Z|Y) = P(Z|XY) P(X|Y)
            joint_a = post * evidence
            joint_b = like * prior
            assert np.max(np.abs(joint_a - joint_b)) < 1e-12

    def test_irreversibility_on_grid(self):
        # two priors that differ only where the likelihood vanishes map to
        # exactly the same posterior
        prior = C.PhaseSpacePrior(0.6, 1.0)
        xg = np.linspace(-2.8, 2.8, 1121)
        pg = np.linspace(-6.0, 8.0, 401)
        post = C.classical_posterior(quad_lag(), prior, 0.0, 1.0, TIMES, xg, pg,
                                     k_max=0.55)
        dead = post.likelihood == 0.0
        assert dead.any() and not dead.all()
        p1 = prior.density_x(xg)
        p2 = p1.copy()
        p2[dead] *= 7.0
        q1 = p1 * post.likelihood
        q1 /= np.trapezoid(q1, xg)
        q2 = p2 * post.likelihood
        q2 /= np.trapezoid(q2, xg)
        assert np.array_equal(q1, q2)
        assert np.max(np.abs(p1 - p2)) > 0


class TestKineticClosedForms:
    def test_tau_at_origin(self):
        assert abs(C.kinetic_local_weak_value(1.0, 1.0, 3.0, 0.0) - (-4.0)) < 1e-14

    def test_free_particle_limit(self):
        x = 50.0
        kappa = C.de_broglie_momentum(1.0, 1.0, 3.0, x)
        assert abs(kappa * x / 3.0 - 1.0) < 1e-3
        tau = C.kinetic_local_weak_value(1.0, 1.0, 3.0, x)
        free = (3.0 / x) ** 2 / 2
        assert abs(tau / free - (1 + 1 / 9)) < 0.02

    def test_likelihood_jump(self):
        x_c = np.sqrt(8.0)
        ratio = C.kinetic_likelihood(1.0, 1.0, 3.0, x_c) / C.kinetic_likelihood(1.0, 1.0, 3.0, 0.0)
        assert abs(ratio - np.exp(8.0) / 3.0) < 1e-9 * ratio

    def test_action_gradient(self):
        xs = np.linspace(-4, 4, 20001)
        s = C.kinetic_action(1.0, 1.0, 3.0, xs)
        tau = C.kinetic_local_weak_value(1.0, 1.0, 3.0, xs)
        ds = np.gradient(s, xs[1] - xs[0])
        assert np.max(np.abs(ds[2:-2] - tau[2:-2])) < 1e-5


class TestCorrespondence:
    def test_sweep_monotone(self):
        rep = C.semiclassical_correspondence()
        assert rep.monotone_decreasing
        assert rep.dev_alpha[-1] < 0.01
        assert rep.dev_likelihood[-1] < 1e-4

    def test_report_json(self, tmp_path):
        import json
        rep = C.semiclassical_correspondence(classicality=(1.0, 2.0))
        payload = C.write_correspondence_json(rep, tmp_path / "sweep.json")
        readback = json.loads((tmp_path / "sweep.json").read_text())
        assert readback == payload
        assert len(readback["dev_alpha"]) == 2


class TestHistogramCsv:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        hist = C.histogram(rng.normal(0, 1, 10000), 20, -4, 4)
        path = tmp_path / "hist.csv"
        C.write_histogram_csv(hist, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "bin_center,count,density,stderr"
        assert len(lines) == 21
        total = sum(int(l.split(",")[1]) for l in lines[1:])
        assert total == np.sum(hist.counts)
