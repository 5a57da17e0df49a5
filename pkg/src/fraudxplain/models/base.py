"""Uniform score-function view over all trained models."""

from __future__ import annotations

import numpy as np

FRAUD_PROBABILITY = "fraud_probability"
RECONSTRUCTION_ERROR = "reconstruction_error"
ANOMALY_SCORE = "anomaly_score"

# assumed anomaly fraction when a model must turn scores into decisions;
# mirrors the base rate of the fraud data this tool targets
DEFAULT_CONTAMINATION = 0.035


class ScoreModel:
    """A trained model seen as instance -> real score.

    Scores are oriented so larger means more fraud-like for every
    semantics. `threshold` is the decision boundary used by
    predict_binary (score >= threshold reads as fraud).
    """

    kind: str = ""
    semantics: str = ""

    def __init__(self) -> None:
        self.n_features: int = 0
        self.threshold: float = 0.5

    def score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.score(x.reshape(1, -1))[0])

    def predict_binary(self, x) -> int:
        return int(self.evaluate(x) >= self.threshold)

    # persistence hooks, see models.io
    def config(self) -> dict:
        raise NotImplementedError

    def arrays(self) -> dict[str, np.ndarray]:
        raise NotImplementedError

    @classmethod
    def from_state(cls, config: dict, arrays: dict[str, np.ndarray]) -> "ScoreModel":
        raise NotImplementedError


def batch_evaluate(model: ScoreModel, data) -> np.ndarray:
    """Vector of model scores, one per row, order preserved.

    Accepts a Dataset or a bare matrix; raises on feature-count mismatch.
    """
    X = data.matrix if hasattr(data, "matrix") else np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {X.shape}")
    if X.shape[1] != model.n_features:
        raise ValueError(f"model expects {model.n_features} features, data has {X.shape[1]}")
    if X.shape[0] == 0:
        return np.empty(0, dtype=float)
    return model.score(X)


def predict_binary(model: ScoreModel, instance) -> int:
    return model.predict_binary(instance)
