import numpy as np
import pytest
from scipy import stats

from weakmeas import hilbert as H
from weakmeas.errors import DimError, InvalidSpin, NotHermitian, TruncationError


def mat_norm(m):
    return np.max(np.abs(m))


class TestSpinOperators:
    def test_sz_eigenvalues_half(self):
        _, _, sz = H.spin_operators(0.5)
        assert np.allclose(np.sort(np.linalg.eigvalsh(sz.matrix)), [-0.5, 0.5], atol=1e-14)

    def test_commutator(self):
        for j in (0.5, 1.0, 1.5):
            sx, sy, sz = H.spin_operators(j)
            comm = sx.matrix @ sy.matrix - sy.matrix @ sx.matrix
            assert mat_norm(comm - 1j * sz.matrix) < 1e-12

    def test_rotated_spectrum(self):
        su = H.spin_component(1, (np.sin(np.pi / 3), 0, np.cos(np.pi / 3)))
        assert np.allclose(np.linalg.eigvalsh(su.matrix), [-1, 0, 1], atol=1e-12)

    def test_eigenvalue_range(self):
        for j in (0.5, 1.0, 2.5):
            sx, _, sz = H.spin_operators(j)
            for op in (sx, sz):
                w = np.linalg.eigvalsh(op.matrix)
                assert np.allclose(np.sort(w), np.arange(-j, j + 1), atol=1e-12)

    def test_invalid_spin(self):
        with pytest.raises(InvalidSpin):
            H.spin_operators(0.7)


class TestSpinCoherent:
    def test_z_axis(self):
        ket = H.spin_coherent_state(0.5, 0.0, 0.0)
        assert np.allclose(ket.amplitudes, [1, 0], atol=1e-14)

    def test_tilted_pair_weak_value(self):
        # <g/2| Sz |-g/2> / <g/2|-g/2> = 1/(2 cos(g/2)); the right-angle pair
        # registers 1/sqrt(2)
        gamma = np.pi / 2
        pre = H.spin_coherent_state(0.5, -gamma / 2, 0.0)
        post = H.spin_coherent_state(0.5, gamma / 2, 0.0)
        sz = H.spin_operators(0.5)[2]
        val = np.vdot(post.amplitudes, sz.matrix @ pre.amplitudes) / H.inner(post, pre)
        assert abs(val - 1 / np.sqrt(2)) < 1e-12

    def test_overlap_law(self):
        # |<n|m>|^2 = cos^2(Theta/2), brute force over a grid of angle pairs
        rng = np.random.default_rng(3)
        for _ in range(40):
            th1, th2 = rng.uniform(0, np.pi, 2)
            ph1, ph2 = rng.uniform(0, 2 * np.pi, 2)
            a = H.spin_coherent_state(0.5, th1, ph1)
            b = H.spin_coherent_state(0.5, th2, ph2)
            n1 = np.array([np.sin(th1) * np.cos(ph1), np.sin(th1) * np.sin(ph1), np.cos(th1)])
            n2 = np.array([np.sin(th2) * np.cos(ph2), np.sin(th2) * np.sin(ph2), np.cos(th2)])
            cos_t = np.clip(np.dot(n1, n2), -1, 1)
            assert abs(abs(H.inner(a, b)) ** 2 - (1 + cos_t) / 2) < 1e-12


class TestCoherentState:
    def test_vacuum(self):
        ket = H.coherent_state(0.0, 16)
        assert abs(ket.amplitudes[0] - 1) < 1e-14
        assert np.max(np.abs(ket.amplitudes[1:])) < 1e-14

    def test_number_weak_value(self):
        # the +-lam overlap cancels e^(2 lam^2)-fold; the extended-precision
        # construction keeps the ratio accurate well past double precision
        lam = 3.0
        n_max = H.coherent_truncation(lam) + 20
        plus = H.coherent_state(lam, n_max, extended=True)
        minus = H.coherent_state(-lam, n_max, extended=True)
        nop = H.number_operator(n_max, extended=True)
        val = np.vdot(minus.amplitudes, nop.matrix @ plus.amplitudes) / H.inner(minus, plus)
        assert abs(val - (-9.0)) < 1e-10

    def test_opposite_overlap(self):
        lam = 2.0
        plus = H.coherent_state(lam, 60)
        minus = H.coherent_state(-lam, 60)
        assert abs(abs(H.inner(minus, plus)) ** 2 - np.exp(-4 * lam**2)) < 1e-12

    def test_truncation_rule(self):
        with pytest.raises(TruncationError):
            H.coherent_state(3.0, 30)


class TestEvolve:
    def test_identity_at_zero(self):
        psi = H.haar_random_state(4, 11)
        A = H.HermitianObservable(np.diag([0.3, 1.0, 2.0, -1.0]).astype(complex))
        out = H.evolve(A, 0.0, psi)
        assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-14)

    def test_half_integer_revolution(self):
        # series-sum oracle: exp(i Sz 2 pi) on spin-1/2 equals -identity
        sz = H.spin_operators(0.5)[2]
        psi = H.haar_random_state(2, 5)
        out = H.evolve(sz, 2 * np.pi, psi)
        series = np.zeros((2, 2), dtype=complex)
        term = np.eye(2, dtype=complex)
        for k in range(1, 60):
            series += term
            term = term @ (1j * sz.matrix * 2 * np.pi) / k
        assert np.max(np.abs(out.amplitudes - series @ psi.amplitudes)) < 1e-10
        assert np.max(np.abs(out.amplitudes + psi.amplitudes)) < 1e-12

    def test_coherent_rotation(self):
        lam, x = 1.5, 0.8
        n_max = 60
        ket = H.coherent_state(lam, n_max)
        rotated = H.evolve(H.number_operator(n_max), x, ket)
        target = H.coherent_state(lam * np.exp(1j * x), n_max)
        assert np.max(np.abs(rotated.amplitudes - target.amplitudes)) < 1e-12

    def test_group_law_and_unitarity(self):
        rng = np.random.default_rng(17)
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        A = H.HermitianObservable(m + m.conj().T)
        psi = H.haar_random_state(5, 23)
        one = H.evolve(A, 0.4, H.evolve(A, 1.1, psi))
        two = H.evolve(A, 1.5, psi)
        assert np.max(np.abs(one.amplitudes - two.amplitudes)) < 1e-10
        assert abs(np.linalg.norm(two.amplitudes) - 1) < 1e-12

    def test_eigenstate_weak_value_collapse(self):
        A = H.HermitianObservable(np.diag([1.0, 2.0, 5.0]).astype(complex))
        psi = H.KetVector(np.array([0, 0, 1], dtype=complex))
        rng = np.random.default_rng(2)
        for _ in range(10):
            phi = H.haar_random_state(3, rng.integers(1 << 31))
            ov = H.inner(phi, psi)
            if abs(ov) < 1e-3:
                continue
            assert abs(np.vdot(phi.amplitudes, A.matrix @ psi.amplitudes) / ov - 5.0) < 1e-10

    def test_dim_mismatch(self):
        sz = H.spin_operators(0.5)[2]
        with pytest.raises(DimError):
            H.evolve(sz, 1.0, H.haar_random_state(3, 1))


class TestSpectral:
    def test_spin1_projectors(self):
        sz = H.spin_operators(1)[2]
        dec = H.spectral(sz)
        assert np.allclose(dec.eigenvalues, [-1, 0, 1], atol=1e-12)
        total = sum(dec.projectors)
        assert mat_norm(total - np.eye(3)) < 1e-10
        for i, pi in enumerate(dec.projectors):
            for j, pj in enumerate(dec.projectors):
                expect = pi if i == j else 0
                assert mat_norm(pi @ pj - expect) < 1e-10

    def test_degenerate_merge(self):
        A = H.HermitianObservable(np.diag([1.0, 1.0 + 1e-12, 3.0]).astype(complex))
        dec = H.spectral(A)
        assert len(dec.eigenvalues) == 2
        assert abs(np.trace(dec.projectors[0]).real - 2) < 1e-12

    def test_reassembly(self):
        rng = np.random.default_rng(8)
        m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        A = H.HermitianObservable(m + m.conj().T)
        assert mat_norm(H.spectral(A).reassemble() - A.matrix) < 1e-10

    def test_spin1_probabilities(self):
        su = H.spin_component(1, (np.sin(np.pi / 3), 0, np.cos(np.pi / 3)))
        psi = H.spin_coherent_state(1, 0.0, 0.0)
        dec = H.spectral(su)
        probs = [np.real(np.vdot(psi.amplitudes, proj @ psi.amplitudes))
                 for proj in dec.projectors]
        assert np.allclose(probs, [1 / 16, 3 / 8, 9 / 16], atol=1e-12)

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            H.HermitianObservable(np.array([[0, 1], [0, 0]], dtype=complex))


class TestHaar:
    def test_dim_one(self):
        ket = H.haar_random_state(1, 99)
        assert abs(ket.amplitudes[0] - 1.0) < 1e-14

    def test_deterministic(self):
        a = H.haar_random_state(5, 1234)
        b = H.haar_random_state(5, 1234)
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_mean_overlap(self):
        rng = np.random.default_rng(77)
        batch = H.haar_random_batch(4, 100_000, rng)
        w = np.abs(batch[:, 0]) ** 2
        assert abs(w.mean() - 0.25) < 3 * w.std() / np.sqrt(w.size)

    def test_dim2_marginal_uniform(self):
        rng = np.random.default_rng(101)
        batch = H.haar_random_batch(2, 50_000, rng)
        w = np.abs(batch[:, 0]) ** 2
        assert stats.kstest(w, "uniform").statistic < 0.01

    def test_unitary_invariance(self):
        # overlap statistics against a fixed axis match those against a rotated one
        rng = np.random.default_rng(55)
        batch = H.haar_random_batch(3, 80_000, rng)
        u = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))[0]
        w0 = np.abs(batch[:, 0]) ** 2
        w1 = np.abs(batch @ u[:, 0].conj()) ** 2
        assert abs(w0.mean() - w1.mean()) < 4 * w0.std() / np.sqrt(w0.size)
