"""Gradient-boosted trees with logistic loss and Newton leaf values."""

from __future__ import annotations

import numpy as np

from ._tree import grow_regression_tree, predict_value
from .base import FRAUD_PROBABILITY, ScoreModel
from .logistic import _sigmoid
from .tree_models import _class_sample_weight, _pack_forest, _unpack_forest


class GradientBoostingModel(ScoreModel):
    kind = "GradientBoosting"
    semantics = FRAUD_PROBABILITY

    def __init__(self, trees, base_score, learning_rate, n_features):
        super().__init__()
        self.trees = trees
        self.base_score = float(base_score)
        self.learning_rate = float(learning_rate)
        self.n_features = int(n_features)
        self.threshold = 0.5

    @classmethod
    def fit(cls, X, y, n_estimators=100, max_depth=12, learning_rate=0.002,
            min_samples_leaf=20, reg_lambda=1.0, class_weight=None):
        y = np.asarray(y, dtype=float)
        weight = _class_sample_weight(y, class_weight)
        w = np.ones(len(y)) if weight is None else weight

        p0 = float(np.clip(np.average(y, weights=w), 1e-6, 1 - 1e-6))
        base_score = float(np.log(p0 / (1 - p0)))
        raw = np.full(len(y), base_score)
        trees = []
        for round_idx in range(n_estimators):
            p = _sigmoid(raw)
            g = w * (p - y)
            h = w * p * (1 - p)
            tree = grow_regression_tree(
                X, g, h, max_depth=max_depth,
                min_samples_leaf=min_samples_leaf, reg_lambda=reg_lambda,
            )
            trees.append(tree)
            raw = raw + learning_rate * predict_value(tree, X)
            if not np.isfinite(raw).all():
                raise RuntimeError(f"training diverged (non-finite score) at round {round_idx}")
        return cls(trees, base_score, learning_rate, X.shape[1])

    def decision_function(self, X):
        X = np.asarray(X, dtype=float)
        raw = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            raw += self.learning_rate * predict_value(tree, X)
        return raw

    def score(self, X):
        return _sigmoid(self.decision_function(X))

    def config(self):
        return {
            "n_features": self.n_features,
            "threshold": self.threshold,
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
        }

    def arrays(self):
        return _pack_forest(self.trees)

    @classmethod
    def from_state(cls, config, arrays):
        model = cls(_unpack_forest(arrays), config["base_score"],
                    config["learning_rate"], config["n_features"])
        model.threshold = config["threshold"]
        return model
