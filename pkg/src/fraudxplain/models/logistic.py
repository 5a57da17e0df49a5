"""L2-regularized logistic regression trained by deterministic gradient descent.

Full-batch descent with Armijo backtracking, no randomness at all: the
coefficients double as the ground-truth global importances in the agreement
study, so two fits on the same data must agree bit for bit.
"""

from __future__ import annotations

import numpy as np

from .base import FRAUD_PROBABILITY, ScoreModel


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log1p_exp(z):
    # log(1 + exp(z)) without overflow
    return np.where(z > 0, z + np.log1p(np.exp(-np.abs(z))), np.log1p(np.exp(np.minimum(z, 0))))


class LogisticRegressionModel(ScoreModel):
    kind = "LogisticRegression"
    semantics = FRAUD_PROBABILITY

    def __init__(self, coef, intercept, n_features, converged=True, n_iter=0):
        super().__init__()
        self.coef_ = np.asarray(coef, dtype=float)
        self.intercept_ = float(intercept)
        self.n_features = int(n_features)
        self.converged_ = bool(converged)
        self.n_iter_ = int(n_iter)
        self.threshold = 0.5

    @classmethod
    def fit(cls, X, y, l2=1e-4, max_iter=500, tol=1e-6, class_weight=None):
        n, d = X.shape
        y = np.asarray(y, dtype=float)
        if class_weight == "balanced":
            pos = y.mean()
            w = np.where(y == 1, 0.5 / pos, 0.5 / (1 - pos))
        else:
            w = np.ones(n)
        w_norm = w / w.sum()

        theta = np.zeros(d + 1)  # [coef..., intercept]

        def loss_grad(t):
            z = X @ t[:d] + t[d]
            # mean weighted logistic loss + (l2/2)||coef||^2, intercept unpenalized
            loss = float(np.sum(w_norm * (_log1p_exp(z) - y * z)) + 0.5 * l2 * np.dot(t[:d], t[:d]))
            resid = w_norm * (_sigmoid(z) - y)
            grad = np.empty(d + 1)
            grad[:d] = X.T @ resid + l2 * t[:d]
            grad[d] = resid.sum()
            return loss, grad

        loss, grad = loss_grad(theta)
        step = 1.0
        n_iter = 0
        while n_iter < max_iter:
            gnorm2 = float(grad @ grad)
            if np.sqrt(gnorm2) < tol:
                break
            # Armijo backtracking from twice the last accepted step
            step = min(step * 2.0, 1e6)
            accepted = False
            while step > 1e-14:
                trial = theta - step * grad
                trial_loss, trial_grad = loss_grad(trial)
                if trial_loss <= loss - 1e-4 * step * gnorm2:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break  # no descent direction progress left at float precision
            theta, loss, grad = trial, trial_loss, trial_grad
            n_iter += 1
        converged = np.sqrt(float(grad @ grad)) < tol

        return cls(theta[:d], theta[d], d, converged=converged, n_iter=n_iter)

    def decision_function(self, X):
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_

    def score(self, X):
        return _sigmoid(self.decision_function(X))

    def config(self):
        return {
            "n_features": self.n_features,
            "threshold": self.threshold,
            "intercept": self.intercept_,
            "converged": self.converged_,
            "n_iter": self.n_iter_,
        }

    def arrays(self):
        return {"coef": self.coef_}

    @classmethod
    def from_state(cls, config, arrays):
        model = cls(arrays["coef"], config["intercept"], config["n_features"],
                    converged=config["converged"], n_iter=config["n_iter"])
        model.threshold = config["threshold"]
        return model
