import numpy as np
import pytest

from ccmlab import neural
from ccmlab.neural import Mlp, TrainConfig, architectures, grad_check, train


def finite_difference_grads(net, x, y, step=1e-6):
    """Central differences over every parameter, same loss as backprop."""
    grads = []
    for param in net.weights + net.biases:
        g = np.zeros_like(param)
        flat = param.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = neural._mse(net, x, y)
            flat[i] = orig - step
            down = neural._mse(net, x, y)
            flat[i] = orig
            gflat[i] = (up - down) / (2 * step)
        grads.append(g)
    return grads


class TestConstruction:
    def test_shapes(self):
        net = Mlp([8, 16, 16, 1], np.random.default_rng(0))
        assert [w.shape for w in net.weights] == [(16, 8), (16, 16), (1, 16)]
        assert [b.shape for b in net.biases] == [(16,), (16,), (1,)]

    def test_seed_determinism(self):
        a = Mlp([4, 8, 2], np.random.default_rng(5))
        b = Mlp([4, 8, 2], np.random.default_rng(5))
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_affine_net_zero_input_zero_output(self):
        # no hidden layers: zero biases and identity output give exactly 0
        net = Mlp([4, 3], np.random.default_rng(1))
        np.testing.assert_array_equal(net.forward(np.zeros(4)), np.zeros(3))

    def test_bad_sizes(self):
        with pytest.raises(ValueError):
            Mlp([4], np.random.default_rng(0))
        with pytest.raises(ValueError):
            Mlp([4, 0, 1], np.random.default_rng(0))

    def test_init_bounds(self):
        net = Mlp([100, 50, 1], np.random.default_rng(2))
        bound = np.sqrt(6.0 / 150)
        assert np.abs(net.weights[0]).max() <= bound
        assert all(not b.any() for b in net.biases)


class TestForward:
    def test_zero_parameters(self):
        net = Mlp([3, 4, 2], np.random.default_rng(0))
        net.set_params([np.zeros_like(w) for w in net.weights],
                       [np.zeros_like(b) for b in net.biases])
        acts, out = net._forward_cached(np.zeros((1, 3)))
        np.testing.assert_array_equal(out, np.zeros((1, 2)))
        np.testing.assert_array_equal(acts[1], 0.5 * np.ones((1, 4)))

    def test_single_linear_layer(self):
        net = Mlp([1, 1], np.random.default_rng(0))
        net.set_params([np.array([[2.0]])], [np.array([0.0])])
        assert net.forward(np.array([3.0]))[0] == 6.0

    def test_sigmoid_saturation(self):
        assert abs(neural.sigmoid(np.array([50.0]))[0] - 1.0) < 1e-15
        assert neural.sigmoid(np.array([-800.0]))[0] == 0.0

    def test_input_shape_checked(self):
        net = Mlp([3, 2], np.random.default_rng(0))
        with pytest.raises(ValueError):
            net.forward(np.zeros(4))


class TestBackprop:
    def test_zero_gradient_at_fit(self):
        net = Mlp([2, 1], np.random.default_rng(0))
        net.set_params([np.array([[1.0, -1.0]])], [np.array([0.5])])
        x = np.array([[1.0, 2.0], [0.0, 3.0]])
        y = x @ np.array([1.0, -1.0]) + 0.5
        w_grads, b_grads, loss = net.backprop(x, y[:, None])
        assert loss == 0.0
        assert all(np.abs(g).max() == 0.0 for g in w_grads + b_grads)

    def test_linear_net_analytic_gradient(self):
        net = Mlp([1, 1], np.random.default_rng(0))
        w0, b0 = 1.3, -0.2
        net.set_params([np.array([[w0]])], [np.array([b0])])
        x, y = np.array([[2.0]]), np.array([[1.0]])
        w_grads, b_grads, _ = net.backprop(x, y)
        resid = w0 * 2.0 + b0 - 1.0
        np.testing.assert_allclose(w_grads[0][0, 0], 2 * resid * 2.0, rtol=1e-15)
        np.testing.assert_allclose(b_grads[0][0], 2 * resid, rtol=1e-15)

    def test_gradient_scales_with_residual(self):
        net = Mlp([2, 1], np.random.default_rng(1))
        x = np.array([[1.0, -2.0]])
        out = net.forward_batch(x)[0, 0]
        g1, _, _ = net.backprop(x, np.array([[out - 1.0]]))
        g3, _, _ = net.backprop(x, np.array([[out - 3.0]]))
        np.testing.assert_allclose(g3[0], 3 * g1[0], rtol=1e-12)

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(2)
        net = Mlp([4, 8, 3, 1], rng)
        x = rng.normal(size=(6, 4))
        y = rng.normal(size=(6, 1))
        w_grads, b_grads, _ = net.backprop(x, y)
        fd = finite_difference_grads(net, x, y)
        analytic = w_grads + b_grads
        scale = max(np.abs(np.concatenate([g.ravel() for g in analytic])).max(), 1e-12)
        for a, n in zip(analytic, fd):
            assert np.abs(a - n).max() / scale < 1e-6

    def test_empty_batch_rejected(self):
        net = Mlp([2, 1], np.random.default_rng(0))
        with pytest.raises(ValueError):
            net.backprop(np.zeros((0, 2)), np.zeros((0, 1)))


class TestGradCheck:
    def test_fresh_net_passes(self):
        rng = np.random.default_rng(3)
        net = Mlp([5, 7, 1], rng)
        assert grad_check(net, rng.normal(size=(4, 5)), rng.normal(size=(4, 1))) < 1e-6

    def test_detects_corrupted_gradient(self):
        rng = np.random.default_rng(4)
        net = Mlp([4, 6, 1], rng)
        x, y = rng.normal(size=(5, 4)), rng.normal(size=(5, 1))
        w_grads, b_grads, _ = net.backprop(x, y)
        fd = finite_difference_grads(net, x, y)
        analytic = np.concatenate([g.ravel() for g in w_grads + b_grads])
        numeric = np.concatenate([g.ravel() for g in fd])
        analytic[np.argmax(np.abs(analytic))] = 0.0  # zero the largest entry
        scale = max(np.abs(analytic).max(), np.abs(numeric).max())
        assert np.abs(analytic - numeric).max() / scale >= 1e-2


class TestTrain:
    def test_zero_learning_rate_is_noop(self):
        rng = np.random.default_rng(5)
        net = Mlp([2, 4, 1], rng)
        before = net.params_copy()
        train(net, rng.normal(size=(300, 2)), rng.normal(size=300),
              TrainConfig(learning_rate=0.0, max_epochs=3, seed=1))
        for w0, w1 in zip(before[0], net.weights):
            np.testing.assert_array_equal(w0, w1)

    def test_zero_momentum_is_plain_gradient_step(self):
        rng = np.random.default_rng(6)
        net = Mlp([2, 1], rng)
        x = rng.normal(size=(64, 2))
        y = rng.normal(size=64)
        ref = Mlp([2, 1], np.random.default_rng(6))
        cfg = TrainConfig(learning_rate=0.1, momentum=0.0, batch_size=64,
                          max_epochs=1, validation_fraction=0.0, seed=11)
        train(net, x, y, cfg)
        # replicate: one full-batch step on the same shuffled data
        order_rng = np.random.default_rng(11)
        perm = order_rng.permutation(64)
        xs, ys = x[perm], y[perm][:, None]
        sel = order_rng.permutation(64)[:64]
        w_grads, b_grads, _ = ref.backprop(xs[sel], ys[sel])
        np.testing.assert_allclose(net.weights[0], ref.weights[0] - 0.1 * w_grads[0],
                                   atol=1e-15)

    def test_linear_regression_recovers_slope(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(1000, 1))
        y = 3.0 * x[:, 0]
        net = Mlp([1, 1], rng)
        train(net, x, y, TrainConfig(learning_rate=0.1, momentum=0.9, max_epochs=60, seed=2))
        # least-squares oracle on a pure slope is exactly 3
        assert abs(net.weights[0][0, 0] - 3.0) < 0.03
        assert abs(net.biases[0][0]) < 0.02

    def test_divergence_guard(self):
        rng = np.random.default_rng(8)
        net = Mlp([2, 8, 1], rng)
        x = 100 * rng.normal(size=(256, 2))
        y = 100 * rng.normal(size=256)
        with pytest.raises(FloatingPointError):
            train(net, x, y, TrainConfig(learning_rate=1e6, max_epochs=60,
                                         patience=60, seed=1))

    def test_training_improves_over_initialization(self):
        rng = np.random.default_rng(9)
        x = rng.uniform(-1, 1, size=(2000, 3))
        y = np.sin(x.sum(axis=1))
        net = Mlp([3, 16, 1], rng)
        before = neural._mse(net, x, y[:, None])
        train(net, x, y, TrainConfig(learning_rate=0.05, max_epochs=30, seed=3))
        assert neural._mse(net, x, y[:, None]) <= before

    def test_bitwise_deterministic_histories(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(500, 2))
        y = x[:, 0] - x[:, 1]
        h = []
        for _ in range(2):
            net = Mlp([2, 8, 1], np.random.default_rng(123))
            res = train(net, x, y, TrainConfig(learning_rate=0.05, max_epochs=10, seed=42))
            h.append((tuple(res.train_loss), tuple(res.val_loss)))
        assert h[0] == h[1]

    def test_full_batch_gradient_permutation_invariant(self):
        rng = np.random.default_rng(11)
        net = Mlp([3, 5, 1], rng)
        x = rng.normal(size=(200, 3))
        y = rng.normal(size=(200, 1))
        g1, _, _ = net.backprop(x, y)
        perm = rng.permutation(200)
        g2, _, _ = net.backprop(x[perm], y[perm])
        for a, b in zip(g1, g2):
            assert np.abs(a - b).max() < 1e-12

    def test_data_smaller_than_batch_rejected(self):
        net = Mlp([2, 1], np.random.default_rng(0))
        with pytest.raises(ValueError):
            train(net, np.zeros((10, 2)), np.zeros(10),
                  TrainConfig(batch_size=64, max_epochs=1))


class TestArchitectures:
    def test_aoa_shapes(self):
        for n_sec in (4, 8):
            shapes = architectures(n_sec, "aoa")
            assert len(shapes) == 8
            assert all(s == [n_sec, 16, 16, 1] for s in shapes)

    def test_as_shapes_n_sec_4(self):
        shapes = architectures(4, "as")
        assert shapes[1] == [8, 40, 40, 40, 1]
        assert shapes[0] == [8, 32, 32, 32, 1]

    def test_as_shapes_n_sec_8(self):
        shapes = architectures(8, "as")
        assert shapes[4] == [10, 32, 16, 16, 1]
        assert shapes[7] == [10, 16, 16, 1]

    def test_rejects_unknown(self):
        with pytest.raises(ValueError):
            architectures(6, "aoa")
        with pytest.raises(ValueError):
            architectures(8, "doa")


class TestPersistence:
    def test_round_trip_is_bitwise(self):
        rng = np.random.default_rng(12)
        net = Mlp([6, 9, 2], rng)
        clone = Mlp.from_json(net.to_json())
        x = rng.normal(size=(20, 6))
        np.testing.assert_array_equal(net.forward_batch(x), clone.forward_batch(x))

    def test_shape_validation(self):
        net = Mlp([2, 2], np.random.default_rng(0))
        doc = net.to_json().replace('"layer_sizes": [2, 2]', '"layer_sizes": [2, 3]')
        with pytest.raises(ValueError):
            Mlp.from_json(doc)
