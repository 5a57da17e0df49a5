"""Attribution containers, top-k ranking, and the global logistic baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Attribution:
    """Per-feature contributions for one explained instance."""

    method: str
    feature_names: list[str]
    phi: np.ndarray
    base_value: float
    predicted_value: float
    diagnostics: dict

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "feature_names": list(self.feature_names),
            "phi": [float(v) for v in self.phi],
            "base_value": float(self.base_value),
            "predicted_value": float(self.predicted_value),
            "diagnostics": self.diagnostics,
        }


@dataclass
class RankedFeatures:
    """Top-k features by |phi|, rank 1 = most important; ties keep feature order."""

    entries: list[tuple[str, float, int]]
    k: int

    @property
    def names(self) -> list[str]:
        return [name for name, _, _ in self.entries]

    def rank_of(self, name: str) -> int:
        for entry_name, _, r in self.entries:
            if entry_name == name:
                return r
        raise KeyError(name)


def rank_features(feature_names, phi, k: int) -> RankedFeatures:
    phi = np.asarray(phi, dtype=float)
    order = sorted(range(len(phi)), key=lambda j: (-abs(phi[j]), j))
    k_eff = min(k, len(phi))
    entries = [(feature_names[j], float(phi[j]), r + 1) for r, j in enumerate(order[:k_eff])]
    return RankedFeatures(entries=entries, k=k_eff)


def rank(attr: Attribution, k: int) -> RankedFeatures:
    return rank_features(attr.feature_names, attr.phi, k)


def global_lr_importance(model, data, k: int) -> RankedFeatures:
    """Global importances of a logistic model: |coefficient| times feature spread.

    Inputs are z-scored so numeric spreads sit near 1; the scaling mostly
    rebalances the integer-coded categorical columns.
    """
    if model.kind != "LogisticRegression":
        raise ValueError(f"global importance is defined for LogisticRegression, got {model.kind}")
    stds = data.matrix.std(axis=0)
    return rank_features(data.feature_names, model.coef_ * stds, k)
