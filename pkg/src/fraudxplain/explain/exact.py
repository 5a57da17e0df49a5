"""Brute-force Shapley values over every coalition; the oracle other explainers are checked against."""

from __future__ import annotations

import math

import numpy as np

from ._masking import coalition_values
from .attribution import Attribution

MAX_EXACT_FEATURES = 12


def all_coalition_masks(n_features: int) -> np.ndarray:
    """All 2^M coalitions as a bool matrix; row index is the coalition bitmask."""
    ids = np.arange(2**n_features, dtype=np.int64)
    return (ids[:, None] >> np.arange(n_features)) & 1 == 1


def shapley_from_coalition_values(values: np.ndarray, n_features: int) -> np.ndarray:
    """Shapley values of a game tabulated over all 2^M coalitions.

    values[S] is the worth of the coalition whose bitmask is S (bit i set
    means player i present).
    """
    m = n_features
    if len(values) != 2**m:
        raise ValueError(f"expected {2**m} coalition values, got {len(values)}")
    weight = np.array([math.factorial(s) * math.factorial(m - s - 1) / math.factorial(m)
                       for s in range(m)])
    phi = np.zeros(m)
    for mask in range(2**m):
        size = mask.bit_count()
        for i in range(m):
            bit = 1 << i
            if mask & bit:
                continue
            phi[i] += weight[size] * (values[mask | bit] - values[mask])
    return phi


def exact_shapley(model, instance, background, feature_names=None) -> Attribution:
    """Exact Shapley attribution under interventional masking.

    Cost is 2^M coalition evaluations, each averaging over the whole
    background, so M is capped at 12.
    """
    background = np.asarray(background.rows if hasattr(background, "rows") else background,
                            dtype=float)
    instance = np.asarray(instance, dtype=float)
    m = instance.shape[0]
    if m > MAX_EXACT_FEATURES:
        raise ValueError(f"exact Shapley is limited to {MAX_EXACT_FEATURES} features, got {m}")
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(m)]

    predicted = model.evaluate(instance) if m else float(model.score(background[:1])[0])
    if m == 0:
        base = float(np.mean(model.score(background)))
        return Attribution("exact_shapley", [], np.zeros(0), base, predicted,
                           {"n_coalitions": 0})

    values = coalition_values(model, instance, background, all_coalition_masks(m))
    phi = shapley_from_coalition_values(values, m)
    return Attribution(
        method="exact_shapley",
        feature_names=list(feature_names),
        phi=phi,
        base_value=float(values[0]),
        predicted_value=predicted,
        diagnostics={"n_coalitions": int(2**m)},
    )
