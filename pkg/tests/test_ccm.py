import numpy as np
import pytest

from ccmlab import ccm
from ccmlab.beamspace import steering_vector


def riemann_ccm(theta_deg, sigma_deg, rho, n_antennas, n_beams=10_000):
    """Independent oracle: equal-power midpoint sum over the spread interval."""
    offsets = (np.arange(n_beams) + 0.5) / n_beams - 0.5
    angles = theta_deg + sigma_deg * offsets
    powers = np.full(n_beams, rho / n_beams)
    return ccm.ccm_discrete(angles, powers, n_antennas).matrix


class TestCcmFromParams:
    def test_matches_discrete_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            theta = rng.uniform(-45, 45)
            sigma = rng.uniform(0.6, 3.0)
            rho = 10 ** (rng.uniform(20, 40) / 10)
            r = ccm.ccm_from_params(theta, sigma, rho, 32).matrix
            oracle = riemann_ccm(theta, sigma, rho, 32)
            err = np.linalg.norm(r - oracle) / np.linalg.norm(oracle)
            assert err < 1e-5

    def test_worked_example(self):
        r = ccm.ccm_from_params(30.0, 2.0, 2.0, 32).matrix
        oracle = riemann_ccm(30.0, 2.0, 2.0, 32)
        assert np.linalg.norm(r - oracle) / np.linalg.norm(oracle) < 1e-5

    def test_trace_is_rho_times_n(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            rho = 10 ** (rng.uniform(-10, 40) / 10)
            r = ccm.ccm_from_params(rng.uniform(-45, 45), rng.uniform(0.6, 3.0), rho, 64)
            assert abs(np.trace(r.matrix).real - rho * 64) < 1e-9 * rho * 64

    def test_hermitian_and_psd(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            r = ccm.ccm_from_params(rng.uniform(-45, 45), rng.uniform(0.6, 3.0),
                                    1.0, 128).matrix
            lam = np.linalg.eigvalsh(r)
            assert np.abs(r - r.conj().T).max() < 1e-12 * lam[-1]
            assert lam[0] > -1e-10 * lam[-1]

    def test_zero_spread_limit_is_rank_one(self):
        r = ccm.ccm_from_params(0.0, 1e-6, 1.0, 8).matrix
        r1 = ccm.ccm_rank1(0.0, 1.0, 8).matrix
        assert np.linalg.norm(r - r1) / np.linalg.norm(r1) < 1e-6

    def test_quadrature_converged_at_default_nodes(self):
        q = ccm.default_quad_nodes(3.0, 128)
        a = ccm.ccm_from_params(-12.0, 3.0, 1.0, 128, quad_nodes=q).matrix
        b = ccm.ccm_from_params(-12.0, 3.0, 1.0, 128, quad_nodes=2 * q).matrix
        assert np.linalg.norm(a - b) / np.linalg.norm(b) < 1e-8

    def test_literal_normalization_traces_to_rho_sigma(self):
        sigma = 2.0
        r = ccm.ccm_from_params(5.0, sigma, 3.0, 16, normalized=False).matrix
        assert abs(np.trace(r).real - 3.0 * np.deg2rad(sigma)) < 1e-9

    def test_effective_rank_grows_with_spread(self):
        lo = ccm.ccm_from_params(0.0, 0.6, 1.0, 128).matrix
        hi = ccm.ccm_from_params(0.0, 3.0, 1.0, 128).matrix

        def eff_rank(m):
            lam = np.linalg.eigvalsh(m)
            return int(np.sum(lam > 1e-6 * lam[-1]))

        assert eff_rank(hi) >= eff_rank(lo)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            ccm.ccm_from_params(0.0, 0.0, 1.0, 8)
        with pytest.raises(ValueError):
            ccm.ccm_from_params(0.0, 1.0, -1.0, 8)
        with pytest.raises(ValueError):
            ccm.ccm_from_params(0.0, 1.0, 1.0, 8, quad_nodes=1)


class TestRankOne:
    def test_two_antenna_broadside(self):
        np.testing.assert_allclose(ccm.ccm_rank1(0.0, 1.0, 2).matrix,
                                   np.ones((2, 2)), atol=1e-12)

    def test_spectrum(self):
        r = ccm.ccm_rank1(17.0, 2.5, 16)
        lam = np.linalg.eigvalsh(r.matrix)
        np.testing.assert_allclose(lam[-1], 2.5 * 16, rtol=1e-12)
        assert np.abs(lam[:-1]).max() < 1e-12 * lam[-1]
        assert r.rank == 1


class TestDiscrete:
    def test_single_angle_equals_rank_one(self):
        a = ccm.ccm_discrete([12.0], [0.7], 16).matrix
        b = ccm.ccm_rank1(12.0, 0.7, 16).matrix
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_orthogonal_beams_spectrum(self):
        from ccmlab.beamspace import beam_angle
        angles = [beam_angle(3, 16), beam_angle(7, 16)]
        r = ccm.ccm_discrete(angles, [2.0, 0.5], 16).matrix
        lam = np.sort(np.linalg.eigvalsh(r))[::-1]
        np.testing.assert_allclose(lam[:2], [32.0, 8.0], rtol=1e-10)
        assert np.abs(lam[2:]).max() < 1e-10 * lam[0]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ccm.ccm_discrete([1.0, 2.0], [1.0], 8)


class TestFactor:
    def test_identity(self):
        f = ccm.factor(np.eye(6))
        assert f.shape == (6, 6)
        np.testing.assert_allclose(f @ f.conj().T, np.eye(6), atol=1e-12)

    def test_rank_one(self):
        u = steering_vector(9.0, 12)
        r = 3.0 * 12 * np.outer(u, u.conj())
        f = ccm.factor(r)
        assert f.shape[1] == 1
        phase = f[0, 0] / (np.sqrt(36.0) * u[0])
        np.testing.assert_allclose(f[:, 0], np.sqrt(36.0) * u * phase, atol=1e-10)

    def test_random_psd_round_trip(self):
        rng = np.random.default_rng(5)
        g = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        r = g @ g.conj().T
        f = ccm.factor(r)
        assert np.linalg.norm(f @ f.conj().T - r) / np.linalg.norm(r) < 1e-8

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            ccm.factor(np.diag([1.0, -0.5]))

    def test_zero_matrix(self):
        assert ccm.factor(np.zeros((4, 4))).shape == (4, 0)


class TestSampleChannel:
    def test_zero_covariance_gives_zero(self):
        r = ccm.Ccm.from_matrix(np.zeros((4, 4)))
        h = ccm.sample_channel(r, np.random.default_rng(0))
        np.testing.assert_array_equal(h, np.zeros(4))

    def test_rank_one_draws_are_collinear(self):
        r = ccm.ccm_rank1(25.0, 2.0, 16)
        u = steering_vector(25.0, 16)
        rng = np.random.default_rng(1)
        for _ in range(5):
            h = ccm.sample_channel(r, rng)
            corr = abs(np.vdot(u, h)) / (np.linalg.norm(h))
            np.testing.assert_allclose(corr, 1.0, atol=1e-12)

    def test_identity_covariance_moments(self):
        r = ccm.Ccm.from_matrix(np.eye(4))
        rng = np.random.default_rng(2)
        h = ccm.sample_channel(r, rng, size=100_000)
        emp = h @ h.conj().T / h.shape[1]
        assert np.linalg.norm(emp - np.eye(4)) / np.linalg.norm(np.eye(4)) < 0.05

    def test_second_moment_error_decays_with_draws(self):
        r = ccm.ccm_from_params(-10.0, 2.0, 1.0, 16)
        rng = np.random.default_rng(3)

        def emp_err(m):
            h = ccm.sample_channel(r, rng, size=m)
            emp = h @ h.conj().T / m
            return np.linalg.norm(emp - r.matrix) / np.linalg.norm(r.matrix)

        # O(1/sqrt(M)): two decades of draws shrink the error by ~10x
        assert emp_err(200_000) < emp_err(2_000) / 3
