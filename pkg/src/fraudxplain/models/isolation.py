"""Isolation forest scoring anomalies by average path length."""

from __future__ import annotations

import math

import numpy as np

from ._tree import average_path_adjustment, grow_isolation_tree, predict_value
from .base import ANOMALY_SCORE, DEFAULT_CONTAMINATION, ScoreModel
from .tree_models import _pack_forest, _unpack_forest


class IsolationForestModel(ScoreModel):
    """Scores are 2 ** (-E[h(x)] / c(psi)), in (0, 1], larger means more anomalous."""

    kind = "IsolationForest"
    semantics = ANOMALY_SCORE

    def __init__(self, trees, subsample_size, n_features):
        super().__init__()
        self.trees = trees
        self.subsample_size = int(subsample_size)
        self.n_features = int(n_features)
        self.threshold = np.inf

    @classmethod
    def fit(cls, X, n_estimators=100, max_samples=256, contamination="auto", seed=0):
        n = X.shape[0]
        psi = min(max_samples, n)
        height_limit = max(1, math.ceil(math.log2(max(psi, 2))))
        trees = []
        for child in np.random.SeedSequence(seed).spawn(n_estimators):
            rng = np.random.default_rng(child)
            rows = rng.choice(n, size=psi, replace=False)
            trees.append(grow_isolation_tree(X[rows], height_limit=height_limit, rng=rng))
        model = cls(trees, psi, X.shape[1])
        rate = DEFAULT_CONTAMINATION if contamination == "auto" else float(contamination)
        model.threshold = float(np.quantile(model.score(X), 1.0 - rate))
        return model

    def score(self, X):
        X = np.asarray(X, dtype=float)
        path = np.zeros(X.shape[0])
        for tree in self.trees:
            path += predict_value(tree, X)
        path /= len(self.trees)
        return 2.0 ** (-path / average_path_adjustment(self.subsample_size))

    def config(self):
        return {"n_features": self.n_features, "threshold": self.threshold,
                "subsample_size": self.subsample_size}

    def arrays(self):
        return _pack_forest(self.trees)

    @classmethod
    def from_state(cls, config, arrays):
        model = cls(_unpack_forest(arrays), config["subsample_size"], config["n_features"])
        model.threshold = config["threshold"]
        return model
