import numpy as np
import pytest

from ccmlab import beamform
from ccmlab.beamform import InterferenceModel, capon, geb, interference_ccm, sinr, steer_bf
from ccmlab.beamspace import steering_vector
from ccmlab.ccm import Ccm, ccm_from_params, ccm_rank1, sample_channel


def random_unitary(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestInterferenceCcm:
    def test_single_tap_leaves_noise_only(self):
        r = ccm_rank1(10.0, 1.0, 8)
        model = interference_ccm([r], 0, noise_var=2.0)
        np.testing.assert_allclose(model.r_eta, 2.0 * np.eye(8), atol=1e-12)
        assert model.tap_ids == ()

    def test_two_taps(self):
        r0 = ccm_rank1(10.0, 1.0, 8)
        r1 = ccm_rank1(-25.0, 3.0, 8)
        model = interference_ccm([r0, r1], 0, noise_var=1.0)
        np.testing.assert_allclose(model.r_eta, r1.matrix + np.eye(8), atol=1e-12)
        assert model.tap_ids == (1,)

    def test_trace_additivity(self):
        taps = [ccm_from_params(t, 1.0, p, 16) for t, p in ((0.0, 1.0), (10.0, 2.0), (20.0, 4.0))]
        model = interference_ccm(taps, 1, noise_var=0.5)
        expected = 0.5 * 16 + (1.0 + 4.0) * 16
        assert abs(np.trace(model.r_eta).real - expected) < 1e-8

    def test_unknown_tap(self):
        with pytest.raises(KeyError):
            interference_ccm([ccm_rank1(0.0, 1.0, 4)], 5, noise_var=1.0)

    def test_zero_noise_rejected(self):
        with pytest.raises(ValueError):
            interference_ccm([ccm_rank1(0.0, 1.0, 4)], 0, noise_var=0.0)


class TestCapon:
    def test_white_interference_is_matched_filter(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        model = InterferenceModel(r_eta=3.0 * np.eye(16), tap_ids=())
        w = capon(h, model)
        np.testing.assert_allclose(w, h / 3.0, atol=1e-12)

    def test_null_steers_strong_interferer(self):
        n = 64
        theta_i = -12.0
        interferer = ccm_rank1(theta_i, 1e6, n)
        model = interference_ccm([ccm_rank1(20.0, 1.0, n), interferer], 0, noise_var=1.0)
        h = sample_channel(ccm_rank1(20.0, 1.0, n), np.random.default_rng(1))
        w = capon(h, model)
        u_i = steering_vector(theta_i, n)
        gain_interferer = abs(np.vdot(w, u_i)) / np.linalg.norm(w)
        gain_signal = abs(np.vdot(w, h)) / (np.linalg.norm(w) * np.linalg.norm(h))
        assert gain_interferer < 1e-3 * gain_signal

    def test_linear_in_channel(self):
        rng = np.random.default_rng(2)
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        model = InterferenceModel(r_eta=np.eye(8) + 0.5 * ccm_rank1(4.0, 1.0, 8).matrix,
                                  tap_ids=())
        w1 = capon(h, model)
        w2 = capon((2 - 1j) * h, model)
        np.testing.assert_allclose(w2, (2 - 1j) * w1, atol=1e-12)
        assert sinr(w1, h, model) == pytest.approx(sinr(w2, h, model))

    def test_zero_channel_rejected(self):
        with pytest.raises(ValueError):
            capon(np.zeros(4), InterferenceModel(r_eta=np.eye(4), tap_ids=()))


class TestGeb:
    def test_white_interference_returns_principal_eigenvector(self):
        n = 32
        r = ccm_rank1(7.0, 2.0, n)
        model = InterferenceModel(r_eta=np.eye(n), tap_ids=())
        w = geb(r, model)
        u = steering_vector(7.0, n)
        assert abs(np.vdot(w, u)) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)

    def test_scaling_invariance(self):
        rng = np.random.default_rng(3)
        r = ccm_from_params(-15.0, 2.0, 1.0, 16)
        model = InterferenceModel(
            r_eta=np.eye(16) + ccm_from_params(5.0, 1.0, 2.0, 16).matrix, tap_ids=())
        w1 = geb(r, model)
        w2 = geb(Ccm(factor=np.sqrt(7) * r.factor, matrix=7 * r.matrix), model)
        assert abs(np.vdot(w1, w2)) == pytest.approx(1.0, abs=1e-10)

    def test_beats_steering_against_structured_interference(self):
        rng = np.random.default_rng(4)
        n = 64
        gains = []
        for _ in range(100):
            theta_s = rng.uniform(-40, 40)
            theta_i = theta_s + rng.choice([-1, 1]) * rng.uniform(2.0, 6.0)
            served = ccm_from_params(theta_s, rng.uniform(0.6, 3.0), 1.0, n)
            interf = interference_ccm(
                [served, ccm_from_params(theta_i, rng.uniform(0.6, 3.0), 10.0, n)],
                0, noise_var=0.1)
            h = sample_channel(served, rng)
            gains.append(sinr(geb(served, interf), h, interf)
                         / sinr(steer_bf(theta_s, n), h, interf))
        assert np.median(gains) >= 1.0


class TestSteer:
    def test_unit_norm(self):
        assert np.linalg.norm(steer_bf(33.0, 128)) == pytest.approx(1.0, abs=1e-12)

    def test_matched_filter_bound_on_aligned_channel(self):
        n = 64
        u = steering_vector(-20.0, n)
        h = 3.0 * u
        model = InterferenceModel(r_eta=0.5 * np.eye(n), tap_ids=())
        got = sinr(steer_bf(-20.0, n), h, model)
        assert got == pytest.approx(np.linalg.norm(h) ** 2 / 0.5, rel=1e-12)

    def test_misalignment_costs_over_3db(self):
        n = 128
        h = steering_vector(0.0, n)
        model = InterferenceModel(r_eta=np.eye(n), tap_ids=())
        aligned = sinr(steer_bf(0.0, n), h, model)
        off = sinr(steer_bf(3.0, n), h, model)
        assert 10 * np.log10(aligned / off) >= 3.0


class TestSinr:
    def test_matched_filter_value(self):
        rng = np.random.default_rng(5)
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        model = InterferenceModel(r_eta=2.0 * np.eye(8), tap_ids=())
        assert sinr(h, h, model) == pytest.approx(np.linalg.norm(h) ** 2 / 2.0)

    def test_orthogonal_weights_give_zero(self):
        h = np.array([1.0, 0.0], dtype=complex)
        w = np.array([0.0, 1.0], dtype=complex)
        model = InterferenceModel(r_eta=np.eye(2), tap_ids=())
        assert sinr(w, h, model) == 0.0

    def test_scale_invariant_in_weights(self):
        rng = np.random.default_rng(6)
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        w = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        model = InterferenceModel(r_eta=np.eye(8) + np.outer(h, h.conj()).real, tap_ids=())
        assert sinr(w, h, model) == pytest.approx(sinr((0.1 - 9j) * w, h, model))

    def test_unitary_rotation_invariance(self):
        rng = np.random.default_rng(7)
        n = 16
        h = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        r = ccm_from_params(10.0, 2.0, 1.0, n).matrix + np.eye(n)
        q = random_unitary(n, rng)
        a = sinr(w, h, InterferenceModel(r_eta=r, tap_ids=()))
        b = sinr(q @ w, q @ h, InterferenceModel(r_eta=q @ r @ q.conj().T, tap_ids=()))
        assert a == pytest.approx(b, rel=1e-10)

    def test_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            sinr(np.zeros(4), np.ones(4), InterferenceModel(r_eta=np.eye(4), tap_ids=()))


class TestCaponOptimality:
    def test_capon_maximizes_sinr(self):
        rng = np.random.default_rng(8)
        n = 32
        for _ in range(20):
            taps = [ccm_from_params(rng.uniform(-40, 40), rng.uniform(0.6, 3.0),
                                    10 ** (rng.normal(3.0, 0.3)), n) for _ in range(4)]
            model = interference_ccm(taps, 0, noise_var=1.0)
            h = sample_channel(taps[0], rng)
            best = sinr(capon(h, model), h, model)
            assert best >= sinr(geb(taps[0], model), h, model) - 1e-9 * best
            assert best >= sinr(steer_bf(taps[0].params[0], n), h, model) - 1e-9 * best
            for _ in range(25):
                w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                assert best >= sinr(w, h, model) - 1e-9 * best
