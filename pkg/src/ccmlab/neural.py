"""From-scratch multilayer perceptron with momentum gradient descent.

Real-valued fully connected networks: sigmoid hidden layers, identity output,
trained on batch-mean squared error with the two-step momentum update

    step 1:  a = eta * a + gamma * grad
    step 2:  theta = theta - a

Bias terms are included even though the layered equations can be written
without them; the regression targets here are not centred and zero-bias
networks measurably underfit.  All arithmetic is double precision so the
finite-difference gradient check is meaningful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic activation 1 / (1 + exp(-x)), saturation-safe."""
    return expit(x)


class Mlp:
    """Layered real network: weights[i] is (fan_out, fan_in), biases[i] (fan_out,)."""

    def __init__(self, layer_sizes, rng: np.random.Generator):
        layer_sizes = [int(s) for s in layer_sizes]
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        if any(s < 1 for s in layer_sizes):
            raise ValueError("layer sizes must be >= 1")
        self.layer_sizes = layer_sizes
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_in(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_out(self) -> int:
        return self.layer_sizes[-1]

    @property
    def mac_count(self) -> int:
        """Multiply-accumulates of one forward pass (the weight count)."""
        return int(sum(w.size for w in self.weights))

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Evaluate one input vector; hidden sigmoid, affine identity output."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_in,):
            raise ValueError(f"input shape {x.shape} does not match n_in={self.n_in}")
        return self.forward_batch(x[None, :])[0]

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        """Evaluate a (M, n_in) batch to a (M, n_out) batch."""
        a = np.asarray(x, dtype=float)
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = sigmoid(a @ w.T + b)
        return a @ self.weights[-1].T + self.biases[-1]

    def _forward_cached(self, x: np.ndarray):
        acts = [np.asarray(x, dtype=float)]
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            acts.append(sigmoid(acts[-1] @ w.T + b))
        out = acts[-1] @ self.weights[-1].T + self.biases[-1]
        return acts, out

    def backprop(self, x: np.ndarray, y: np.ndarray):
        """Exact gradients of batch-mean MSE w.r.t. every weight and bias.

        Returns (weight_grads, bias_grads, loss) with the parameter shapes.
        The loss is the mean over samples of the squared output-error norm.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if x.shape[0] == 0:
            raise ValueError("batch must be non-empty")
        if x.shape[1] != self.n_in or y.shape[1] != self.n_out or x.shape[0] != y.shape[0]:
            raise ValueError("batch shapes do not match the network")
        m = x.shape[0]
        acts, out = self._forward_cached(x)
        resid = out - y
        # overflow to inf/nan is fine here: it feeds the divergence guard
        with np.errstate(over="ignore", invalid="ignore"):
            loss = float(np.sum(resid**2) / m)
            delta = 2.0 * resid / m  # d loss / d output
            w_grads = [None] * len(self.weights)
            b_grads = [None] * len(self.biases)
            for i in range(len(self.weights) - 1, -1, -1):
                w_grads[i] = delta.T @ acts[i]
                b_grads[i] = delta.sum(axis=0)
                if i > 0:
                    # propagate through the sigmoid: s' = s (1 - s)
                    s = acts[i]
                    delta = (delta @ self.weights[i]) * s * (1.0 - s)
        return w_grads, b_grads, loss

    def params_copy(self):
        return [w.copy() for w in self.weights], [b.copy() for b in self.biases]

    def set_params(self, weights, biases):
        self.weights = [np.array(w, dtype=float) for w in weights]
        self.biases = [np.array(b, dtype=float) for b in biases]

    def to_json(self) -> str:
        doc = {
            "layer_sizes": self.layer_sizes,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "hidden_activation": "sigmoid",
            "output_activation": "identity",
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Mlp":
        doc = json.loads(text)
        if doc.get("hidden_activation") != "sigmoid" or doc.get("output_activation") != "identity":
            raise ValueError("unsupported activation tags in model file")
        net = cls.__new__(cls)
        net.layer_sizes = [int(s) for s in doc["layer_sizes"]]
        net.weights = [np.array(w, dtype=float) for w in doc["weights"]]
        net.biases = [np.array(b, dtype=float) for b in doc["biases"]]
        for w, b, fan_in, fan_out in zip(net.weights, net.biases,
                                         net.layer_sizes[:-1], net.layer_sizes[1:]):
            if w.shape != (fan_out, fan_in) or b.shape != (fan_out,):
                raise ValueError("model file weight shapes do not match layer_sizes")
        return net


def mlp_new(layer_sizes, rng: np.random.Generator) -> Mlp:
    """Fresh network with uniform fan-based weights and zero biases."""
    return Mlp(layer_sizes, rng)


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 128
    max_epochs: int = 100
    patience: int = 10
    validation_fraction: float = 0.1
    seed: int = 0

    def validate(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be >= 1")
        if not 0 <= self.validation_fraction < 1:
            raise ValueError("validation_fraction must be in [0, 1)")


@dataclass
class TrainResult:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0
    best_val: float = np.inf


def train(net: Mlp, inputs: np.ndarray, targets: np.ndarray, cfg: TrainConfig) -> TrainResult:
    """Mini-batch momentum gradient descent with early stopping.

    Data is shuffled every epoch; a validation split is held out up front and
    the parameters achieving the best validation MSE are restored into ``net``
    when training stops (after ``patience`` non-improving epochs or
    ``max_epochs``).  Raises if the training loss turns non-finite.
    """
    cfg.validate()
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise ValueError("inputs and targets must have the same number of rows")
    if x.shape[0] < cfg.batch_size:
        raise ValueError("data size must be >= batch_size")
    rng = np.random.default_rng(cfg.seed)

    n_val = int(round(cfg.validation_fraction * x.shape[0]))
    perm = rng.permutation(x.shape[0])
    x, y = x[perm], y[perm]
    x_val, y_val = x[:n_val], y[:n_val]
    x_tr, y_tr = x[n_val:], y[n_val:]
    if x_tr.shape[0] < cfg.batch_size:
        raise ValueError("training split smaller than batch_size; lower validation_fraction")

    vel_w = [np.zeros_like(w) for w in net.weights]
    vel_b = [np.zeros_like(b) for b in net.biases]
    result = TrainResult()
    best = net.params_copy()
    stale = 0
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(x_tr.shape[0])
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, x_tr.shape[0] - cfg.batch_size + 1, cfg.batch_size):
            sel = order[start:start + cfg.batch_size]
            w_grads, b_grads, loss = net.backprop(x_tr[sel], y_tr[sel])
            epoch_loss += loss
            n_batches += 1
            for i in range(len(net.weights)):
                vel_w[i] = cfg.momentum * vel_w[i] + cfg.learning_rate * w_grads[i]
                vel_b[i] = cfg.momentum * vel_b[i] + cfg.learning_rate * b_grads[i]
                net.weights[i] -= vel_w[i]
                net.biases[i] -= vel_b[i]
        epoch_loss /= max(n_batches, 1)
        if not np.isfinite(epoch_loss):
            raise FloatingPointError(f"training diverged at epoch {epoch}: loss={epoch_loss}")
        result.train_loss.append(epoch_loss)

        if n_val > 0:
            val = _mse(net, x_val, y_val)
        else:
            val = epoch_loss
        result.val_loss.append(val)
        if val < result.best_val:
            result.best_val = val
            result.best_epoch = epoch
            best = net.params_copy()
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    net.set_params(*best)
    return result


def _mse(net: Mlp, x: np.ndarray, y: np.ndarray) -> float:
    out = net.forward_batch(x)
    with np.errstate(over="ignore"):
        return float(np.sum((out - y) ** 2) / x.shape[0])


def grad_check(net: Mlp, x: np.ndarray, y: np.ndarray, step: float = 1e-6) -> float:
    """Backprop vs central finite differences over every parameter.

    Returns ``max_i |g_bp - g_fd| / max(||g_bp||_inf, ||g_fd||_inf)`` so tiny
    gradient entries are judged against the gradient scale, not against their
    own rounding noise.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    w_grads, b_grads, _ = net.backprop(x, y)
    analytic = np.concatenate([g.ravel() for g in w_grads] + [g.ravel() for g in b_grads])
    numeric = np.empty_like(analytic)
    pos = 0
    for param in net.weights + net.biases:
        flat = param.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = _mse(net, x, y)
            flat[i] = orig - step
            down = _mse(net, x, y)
            flat[i] = orig
            numeric[pos] = (up - down) / (2.0 * step)
            pos += 1
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-300)
    return float(np.max(np.abs(analytic - numeric)) / scale)


# Per-sector hidden-layer widths for the spread-estimation networks.
_AS_HIDDEN_4 = (
    (32, 32, 32), (40, 40, 40), (20, 20, 10), (40, 20, 10),
    (32, 32, 16), (40, 20, 20), (40, 20, 10), (40, 20, 10),
)
_AS_HIDDEN_8 = (
    (40, 20, 20), (40, 20, 20), (20, 20, 10), (40, 40, 20),
    (32, 16, 16), (40, 20, 20), (40, 40, 20), (16, 16),
)
_AS_INPUT_DIM = {4: 8, 8: 10}  # 2 * (beams kept for spread estimation)


def architectures(beams_per_sector: int, task: str) -> list[list[int]]:
    """Per-sector layer-size lists [n_in, hidden..., 1] for a task.

    ``task`` is "aoa" (input: the sector's beam powers) or "as" (input: mean
    and std of the selected beam window, concatenated).
    """
    if beams_per_sector not in (4, 8):
        raise ValueError("beams_per_sector must be 4 or 8")
    if task == "aoa":
        return [[beams_per_sector, 16, 16, 1] for _ in range(8)]
    if task == "as":
        hidden = _AS_HIDDEN_4 if beams_per_sector == 4 else _AS_HIDDEN_8
        n_in = _AS_INPUT_DIM[beams_per_sector]
        return [[n_in, *h, 1] for h in hidden]
    raise ValueError(f"unknown task {task!r}; expected 'aoa' or 'as'")
