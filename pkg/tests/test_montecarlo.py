import numpy as np
import pytest

from risnf import (CorrelationKind, InvalidArgumentError, NotPSDError, Scenario,
                   SystemConfig, TrainingDesign, apply_adjoint, build_cascaded,
                   dft_phase_schedule, empirical_nmse, gram, ls_estimate,
                   orthonormal_pilots, sample_channel, simulate_observations,
                   trial_rng)
from risnf.montecarlo import complex_normal
from oracles import explicit_q, random_orthonormal, random_psd


def _vec(X):
    """Column-major vectorization, batched over the leading axis."""
    return np.swapaxes(X, -1, -2).reshape(X.shape[0], -1)


class TestSampleChannel:

    def test_white_covariance(self, rng):
        draws = 10_000
        X = np.array([sample_channel(np.eye(3), np.eye(2), 3, 2, rng) for _ in range(draws)])
        v = _vec(X)
        emp = v.T @ v.conj() / draws
        assert np.linalg.norm(emp - np.eye(6)) / np.sqrt(6) <= 0.05

    def test_kronecker_covariance(self, rng):
        Rr, Rt = random_psd(rng, 3), random_psd(rng, 2)
        draws = 20_000
        X = np.array([sample_channel(Rr, Rt, 3, 2, rng) for _ in range(draws)])
        v = _vec(X)
        emp = v.T @ v.conj() / draws
        ref = np.kron(Rt, Rr)  # cov(vec X) for column-major vec
        assert np.linalg.norm(emp - ref) / np.linalg.norm(ref) <= 0.05

    def test_rank_one_receive_side(self, rng):
        u = random_orthonormal(rng, 5, 1)
        X = sample_channel(u @ u.conj().T, np.eye(3), 5, 3, rng)
        resid = X - u @ (u.conj().T @ X)
        assert np.abs(resid).max() <= 1e-10 * np.abs(X).max()

    def test_determinism(self):
        R = np.eye(4)
        a = sample_channel(R, R, 4, 4, trial_rng(7, 3))
        b = sample_channel(R, R, 4, 4, trial_rng(7, 3))
        assert np.array_equal(a, b)

    def test_not_psd(self, rng):
        with pytest.raises(NotPSDError):
            sample_channel(np.diag([1.0, -1.0]), np.eye(1), 2, 1, rng)

    def test_shape_mismatch(self, rng):
        with pytest.raises(InvalidArgumentError):
            sample_channel(np.eye(2), np.eye(2), 3, 2, rng)


class TestBuildCascaded:

    def test_scalar(self):
        r = build_cascaded(np.array([[2.0j]]), np.array([[1.5]]))
        np.testing.assert_allclose(r.c, [3.0j])
        assert r.dims == (1, 1, 1)

    def test_column_locality(self, rng):
        K, N, M = 4, 2, 3
        H = np.zeros((K, N), complex)
        F = np.zeros((M, K), complex)
        H[2] = complex_normal(rng, N)
        F[:, 2] = complex_normal(rng, M)
        C = build_cascaded(H, F).c.reshape(K, N * M)  # one row per RIS element
        assert np.count_nonzero(np.abs(C).sum(axis=1)) == 1

    def test_khatri_rao_identity(self, rng):
        K, N, M = 2, 2, 2
        H = complex_normal(rng, (K, N))
        F = complex_normal(rng, (M, K))
        c = build_cascaded(H, F).c
        # explicit Khatri-Rao product, columns H^T[:, k] ⊗ F[:, k]
        KR = np.column_stack([np.kron(H.T[:, k], F[:, k]) for k in range(K)])
        for _ in range(5):
            phi = np.exp(2j * np.pi * rng.random(K))
            x = complex_normal(rng, N)
            lhs = np.kron(x[None, :], np.eye(M)) @ KR @ phi
            np.testing.assert_allclose(lhs, F @ np.diag(phi) @ H @ x, atol=1e-12)
            # and the same through the cascaded vector
            row = np.kron(np.kron(phi[None, :], x[None, :]), np.eye(M))
            np.testing.assert_allclose(row @ c, lhs, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            build_cascaded(np.ones((3, 2)), np.ones((2, 4)))


class TestSimulateObservations:

    def test_scalar_noiseless(self, rng):
        real = build_cascaded(np.array([[0.5 + 1j]]), np.array([[2.0 - 1j]]))
        obs = simulate_observations(TrainingDesign(1, 4.0, 1e-300), np.array([[1j]]),
                                    orthonormal_pilots(1), real, rng)
        np.testing.assert_allclose(obs.y, [[2.0 * (2 - 1j) * 1j * (0.5 + 1j)]], atol=1e-12)

    def test_noise_calibration(self, rng):
        K, N, M = 3, 2, 50
        real = build_cascaded(np.zeros((K, N)), np.zeros((M, K)))
        phi = dft_phase_schedule(K, 2000 * N, N)
        obs = simulate_observations(TrainingDesign(2000 * N, 1.0, 0.7), phi,
                                    orthonormal_pilots(N), real, rng)
        assert obs.y.size >= 1e5
        assert np.mean(np.abs(obs.y) ** 2) == pytest.approx(0.7, rel=0.03)
        assert abs(np.mean(obs.y ** 2)) <= 0.02  # circular symmetry

    @pytest.mark.parametrize("K,N,M", [(2, 2, 2), (3, 1, 4), (4, 2, 1)])
    def test_per_step_matches_stacked_form(self, rng, K, N, M):
        phi = np.exp(2j * np.pi * rng.random((K + 1, K)))
        X = orthonormal_pilots(N)
        real = build_cascaded(complex_normal(rng, (K, N)), complex_normal(rng, (M, K)))
        obs = simulate_observations(TrainingDesign((K + 1) * N, 3.0, 1e-300), phi, X, real, rng)
        ref = np.sqrt(3.0) * explicit_q(phi, X.symbols, M) @ real.c
        np.testing.assert_allclose(obs.vector(), ref, atol=1e-12)

    def test_noiseless_pipeline_recovers_channel(self, rng):
        K, N, M = 2, 2, 2
        phi = dft_phase_schedule(K, K * N, N)
        X = orthonormal_pilots(N)
        real = build_cascaded(complex_normal(rng, (K, N)), complex_normal(rng, (M, K)))
        d = TrainingDesign(K * N, 2.0, 1e-300)
        obs = simulate_observations(d, phi, X, real, rng)
        c_hat = ls_estimate(apply_adjoint(phi, X, obs), gram(phi, N, M), d.pilot_power)
        np.testing.assert_allclose(c_hat, real.c, atol=1e-12)


class TestEmpiricalNMSE:

    def test_perfect_and_zero(self, rng):
        truths = [complex_normal(rng, 6) for _ in range(4)]
        assert empirical_nmse(truths, truths) == 0.0
        assert empirical_nmse([np.zeros(6)] * 4, truths) == pytest.approx(1.0)

    def test_errors(self):
        with pytest.raises(InvalidArgumentError):
            empirical_nmse([], [])
        with pytest.raises(InvalidArgumentError):
            empirical_nmse([np.ones(2)], [np.zeros(2)])
        with pytest.raises(InvalidArgumentError):
            empirical_nmse([np.ones(2)], [np.ones(2), np.ones(2)])

    def test_ls_closed_form(self):
        K, N, M, snr = 4, 2, 2, 10.0
        phi = dft_phase_schedule(K, K * N, N)
        X = orthonormal_pilots(N)
        G = gram(phi, N, M)
        d = TrainingDesign(K * N, snr, 1.0)
        est, truth = [], []
        for t in range(10_000):
            rng = trial_rng(11, t)
            real = build_cascaded(complex_normal(rng, (K, N)), complex_normal(rng, (M, K)))
            obs = simulate_observations(d, phi, X, real, rng)
            est.append(ls_estimate(apply_adjoint(phi, X, obs), G, snr))
            truth.append(real.c)
        assert empirical_nmse(est, truth) == pytest.approx(1 / 80, rel=0.03)


class TestTrialStreams:

    def test_disjoint_trials_uncorrelated(self):
        n = 4000
        a = complex_normal(trial_rng(5, 0), n)
        b = complex_normal(trial_rng(5, 1), n)
        assert abs(np.vdot(a, b)) / n <= 3 / np.sqrt(n)

    def test_seed_and_trial_both_matter(self):
        x = trial_rng(1, 2).random(4)
        assert not np.array_equal(x, trial_rng(2, 2).random(4))
        assert not np.array_equal(x, trial_rng(1, 3).random(4))
        assert np.array_equal(x, trial_rng(1, 2).random(4))


@pytest.fixture(scope="module")
def stats():
    sc = Scenario.from_wavelengths(SystemConfig(), (4, 2, 0.25), (2, 1, 0.25),
                                   (2, 1, 0.25))
    return sc.statistics(3)


class TestScenarioSampling:

    def test_coupled_channel_matches_coupled_correlation(self, stats):
        rng = np.random.default_rng(0)
        draws = 10_000
        F = np.array([stats.sample(rng, True).F for _ in range(draws)])
        v = _vec(F)
        emp = v.T @ v.conj() / draws
        # vec(F) with F = M x K: column-major covariance is R_FR ⊗ R_FB
        ref = np.kron(stats.correlation("FR", coupled=True).entries,
                      stats.correlation("FB", coupled=True).entries)
        assert np.linalg.norm(emp - ref) / np.linalg.norm(ref) <= 0.05

    def test_cascade_matches_covariance(self, stats):
        rng = np.random.default_rng(1)
        draws = 20_000
        for coupled in (False, True):
            C = np.array([stats.sample(rng, coupled).c for _ in range(draws)])
            emp = C.T @ C.conj() / draws
            ref = stats.covariance(CorrelationKind.EXACT_CLUSTERED, coupled).materialize()
            assert np.trace(ref).real == pytest.approx(32, rel=1e-12)
            assert np.linalg.norm(emp - ref) / np.linalg.norm(ref) <= 0.05

    def test_paired_draws(self, stats):
        a = stats.sample(trial_rng(0, 0), False)
        b = stats.sample(trial_rng(0, 0), True)
        S = {n: c.sqrt for n, c in stats.couplings.items()}
        g = stats._coupling_gains
        np.testing.assert_allclose(b.F, g["F"] * S["bs"] @ a.F @ S["ris"], atol=1e-12)
