"""Feed-forward nets trained with Adam: a sigmoid classifier and an autoencoder.

Backpropagation is written out explicitly so the analytic gradients can be
checked against central finite differences (see gradient_check).
"""

from __future__ import annotations

import numpy as np

from .base import FRAUD_PROBABILITY, RECONSTRUCTION_ERROR, DEFAULT_CONTAMINATION, ScoreModel
from .logistic import _log1p_exp, _sigmoid


class DenseNet:
    """Plain ReLU MLP with a linear output layer; parameters in self.weights/biases."""

    def __init__(self, layer_sizes, seed):
        rng = np.random.default_rng(seed)
        self.layer_sizes = list(layer_sizes)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            # He initialization, suited to the ReLU hidden units
            self.weights.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
            self.biases.append(np.zeros(fan_out))

    def forward(self, X):
        """Returns (output, hidden activations); output layer stays linear."""
        a = X
        hidden = [a]
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            if i < last:
                a = np.maximum(z, 0.0)
                hidden.append(a)
            else:
                a = z
        return a, hidden

    def backward(self, hidden, d_out):
        """Gradients of the loss given d(loss)/d(output); mirrors forward."""
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        delta = d_out
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = hidden[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (hidden[i] > 0)
        return grads_w, grads_b

    def parameters(self):
        return self.weights + self.biases

    def set_parameters(self, params):
        k = len(self.weights)
        self.weights = [np.asarray(p, dtype=float) for p in params[:k]]
        self.biases = [np.asarray(p, dtype=float) for p in params[k:]]


def _bce_loss_and_delta(logits, y, sample_weight):
    z = logits[:, 0]
    w = sample_weight / sample_weight.sum()
    loss = float(np.sum(w * (_log1p_exp(z) - y * z)))
    d_out = (w * (_sigmoid(z) - y))[:, None]
    return loss, d_out


def _mse_loss_and_delta(output, target, sample_weight):
    w = sample_weight / sample_weight.sum()
    diff = output - target
    loss = float(np.sum(w * np.mean(diff**2, axis=1)))
    d_out = (2.0 / output.shape[1]) * diff * w[:, None]
    return loss, d_out


class _AdamState:
    def __init__(self, params, lr, beta1, beta2, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g**2
            m_hat = m / (1 - b1**self.t)
            v_hat = v / (1 - b2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _fit_adam(net, X, target, loss_fn, *, epochs, batch_size, lr, beta1, beta2,
              seed, sample_weight=None):
    n = X.shape[0]
    weight = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    rng = np.random.default_rng(seed)
    params = net.parameters()
    adam = _AdamState(params, lr, beta1, beta2)
    step = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            sel = order[start : start + batch_size]
            out, hidden = net.forward(X[sel])
            loss, d_out = loss_fn(out, target[sel], weight[sel])
            if not np.isfinite(loss):
                raise RuntimeError(f"training diverged (non-finite loss) at step {step}")
            grads_w, grads_b = net.backward(hidden, d_out)
            adam.step(params, grads_w + grads_b)
            step += 1
    net.set_parameters(params)


def batch_loss_and_gradients(net, X, target, loss_fn, sample_weight=None):
    """Loss and analytic parameter gradients on one batch, for gradient checks."""
    weight = np.ones(X.shape[0]) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    out, hidden = net.forward(X)
    loss, d_out = loss_fn(out, target, weight)
    grads_w, grads_b = net.backward(hidden, d_out)
    return loss, grads_w + grads_b


def gradient_check(net, X, target, loss_fn, eps=1e-6):
    """Largest per-tensor relative gap between analytic and central-difference gradients."""
    _, analytic = batch_loss_and_gradients(net, X, target, loss_fn)
    params = net.parameters()
    worst = 0.0
    for p, g in zip(params, analytic):
        numeric = np.zeros_like(p)
        flat_p = p.ravel()
        flat_n = numeric.ravel()
        for k in range(flat_p.size):
            orig = flat_p[k]
            h = eps * max(1.0, abs(orig))
            flat_p[k] = orig + h
            up, _ = batch_loss_and_gradients(net, X, target, loss_fn)
            flat_p[k] = orig - h
            down, _ = batch_loss_and_gradients(net, X, target, loss_fn)
            flat_p[k] = orig
            flat_n[k] = (up - down) / (2 * h)
        denom = np.linalg.norm(g) + np.linalg.norm(numeric)
        if denom > 0:
            worst = max(worst, float(np.linalg.norm(g - numeric) / denom))
    return worst


class NeuralNetworkModel(ScoreModel):
    kind = "NeuralNetwork"
    semantics = FRAUD_PROBABILITY

    def __init__(self, net: DenseNet, n_features: int):
        super().__init__()
        self.net = net
        self.n_features = int(n_features)
        self.threshold = 0.5

    @classmethod
    def fit(cls, X, y, hidden=(50, 50, 50), learning_rate=1e-3, beta1=0.9, beta2=0.999,
            batch_size=128, epochs=30, seed=0, class_weight=None):
        d = X.shape[1]
        net = DenseNet([d, *hidden, 1], seed=seed)
        if class_weight == "balanced":
            pos = y.mean()
            weight = np.where(y == 1, 0.5 / pos, 0.5 / (1 - pos))
        else:
            weight = None
        _fit_adam(net, X, np.asarray(y, dtype=float), _bce_loss_and_delta,
                  epochs=epochs, batch_size=batch_size, lr=learning_rate,
                  beta1=beta1, beta2=beta2, seed=seed, sample_weight=weight)
        return cls(net, d)

    def score(self, X):
        logits, _ = self.net.forward(np.asarray(X, dtype=float))
        return _sigmoid(logits[:, 0])

    def config(self):
        return {"n_features": self.n_features, "threshold": self.threshold,
                "layer_sizes": self.net.layer_sizes}

    def arrays(self):
        out = {}
        for i, (W, b) in enumerate(zip(self.net.weights, self.net.biases)):
            out[f"W{i}"] = W
            out[f"b{i}"] = b
        return out

    @classmethod
    def from_state(cls, config, arrays):
        net = DenseNet(config["layer_sizes"], seed=0)
        k = len(net.weights)
        net.set_parameters([arrays[f"W{i}"] for i in range(k)] + [arrays[f"b{i}"] for i in range(k)])
        model = cls(net, config["n_features"])
        model.threshold = config["threshold"]
        return model


class AutoencoderModel(ScoreModel):
    """Reconstruction-error scorer; trained without labels."""

    kind = "Autoencoder"
    semantics = RECONSTRUCTION_ERROR

    def __init__(self, net: DenseNet, n_features: int):
        super().__init__()
        self.net = net
        self.n_features = int(n_features)
        self.threshold = np.inf

    @classmethod
    def fit(cls, X, hidden=(50, 50, 50), learning_rate=1e-3, beta1=0.9, beta2=0.999,
            batch_size=128, epochs=30, seed=0, contamination=DEFAULT_CONTAMINATION):
        d = X.shape[1]
        net = DenseNet([d, *hidden, d], seed=seed)
        _fit_adam(net, X, X, _mse_loss_and_delta,
                  epochs=epochs, batch_size=batch_size, lr=learning_rate,
                  beta1=beta1, beta2=beta2, seed=seed)
        model = cls(net, d)
        model.threshold = float(np.quantile(model.score(X), 1.0 - contamination))
        return model

    def score(self, X):
        X = np.asarray(X, dtype=float)
        recon, _ = self.net.forward(X)
        return np.mean((recon - X) ** 2, axis=1)

    def config(self):
        return {"n_features": self.n_features, "threshold": self.threshold,
                "layer_sizes": self.net.layer_sizes}

    arrays = NeuralNetworkModel.arrays

    @classmethod
    def from_state(cls, config, arrays):
        net = DenseNet(config["layer_sizes"], seed=0)
        k = len(net.weights)
        net.set_parameters([arrays[f"W{i}"] for i in range(k)] + [arrays[f"b{i}"] for i in range(k)])
        model = cls(net, config["n_features"])
        model.threshold = config["threshold"]
        return model
