"""KernelSHAP: Shapley values via kernel-weighted least squares on coalitions.

For each coalition z the masked prediction v(z) is the mean model score over
hybrid rows (present features from the instance, absent ones from each
background row). The attribution solves

    min_phi  sum_z  w(z) * (v(z) - base - z . phi)^2

with the Shapley kernel w(z) = (M-1) / (C(M,|z|) * |z| * (M-|z|)), subject to
base = mean background score and base + sum(phi) = predicted value. The two
constraints absorb the infinite-weight empty and full coalitions: the last
feature's coefficient is eliminated by substitution, so the solve never sees
an infinite weight. With full enumeration the solution equals the exact
Shapley values.

Sampled mode draws coalitions proportional to the kernel (paired with their
complements) and uses draw frequencies as regression weights.
"""

from __future__ import annotations

import math

import numpy as np

from ._masking import coalition_values
from .attribution import Attribution
from .exact import all_coalition_masks

MAX_FULL_FEATURES = 20


def shapley_kernel_weight(m: int, size: int) -> float:
    if size == 0 or size == m:
        return math.inf
    return (m - 1) / (math.comb(m, size) * size * (m - size))


def _full_masks_and_weights(m: int):
    masks = all_coalition_masks(m)
    sizes = masks.sum(axis=1)
    keep = (sizes > 0) & (sizes < m)
    masks = masks[keep]
    weights = np.array([shapley_kernel_weight(m, int(s)) for s in sizes[keep]])
    return masks, weights


def _sampled_masks_and_weights(m: int, n_coalitions: int, rng: np.random.Generator):
    sizes = np.arange(1, m)
    # coalition drawn with probability proportional to its kernel weight:
    # p(size) ~ kernel(size) * C(M, size) = (M-1) / (size * (M - size))
    p = (m - 1) / (sizes * (m - sizes))
    p = p / p.sum()

    counts: dict[bytes, int] = {}
    order: list[bytes] = []

    def add(mask: np.ndarray):
        key = mask.tobytes()
        if key not in counts:
            counts[key] = 0
            order.append(key)
        counts[key] += 1

    drawn = 0
    while drawn < n_coalitions:
        size = int(rng.choice(sizes, p=p))
        members = rng.choice(m, size=size, replace=False)
        mask = np.zeros(m, dtype=bool)
        mask[members] = True
        add(mask)
        drawn += 1
        if drawn < n_coalitions:  # complement pairing halves the sampling variance
            add(~mask)
            drawn += 1

    masks = np.array([np.frombuffer(key, dtype=bool) for key in order])
    weights = np.array([counts[key] for key in order], dtype=float)
    return masks, weights


def _constrained_wls(masks, values, weights, base, delta):
    """Solve the kernel regression with sum(phi) = delta eliminated by substitution."""
    m = masks.shape[1]
    if m == 1:
        return np.array([delta]), 0.0
    z = masks.astype(float)
    y = values - base - z[:, -1] * delta
    design = z[:, :-1] - z[:, [-1]]
    sw = np.sqrt(weights)
    sol, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    phi = np.append(sol, delta - sol.sum())
    residual = float(np.sum(weights * (design @ sol - y) ** 2))
    return phi, residual


def kernel_shap(model, instance, background, n_coalitions=None, seed=0,
                feature_names=None) -> Attribution:
    """KernelSHAP attribution for one instance.

    n_coalitions is "full" (every coalition, M <= 20) or a sample budget of
    at least M + 2; the default budget is 2M + 2048. Deterministic for a
    fixed seed and background.
    """
    rows = np.asarray(background.rows if hasattr(background, "rows") else background, dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValueError("background must be a nonempty 2-d matrix (resolve it first)")
    instance = np.asarray(instance, dtype=float)
    m = instance.shape[0]
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(m)]

    base = float(np.mean(model.score(rows)))
    predicted = model.evaluate(instance) if m else base
    if m == 0:
        return Attribution("kernel_shap", [], np.zeros(0), base, predicted,
                           {"n_coalitions": 0, "enumerated": True, "residual": 0.0})

    if n_coalitions is None:
        n_coalitions = 2 * m + 2048
    if n_coalitions != "full":
        n_coalitions = int(n_coalitions)
        if n_coalitions < m + 2:
            raise ValueError(f"n_coalitions must be at least M + 2 = {m + 2}, got {n_coalitions}")
    # a budget covering every coalition is promoted to exact enumeration
    full = n_coalitions == "full" or n_coalitions >= 2**m - 2
    if full:
        if m > MAX_FULL_FEATURES:
            raise ValueError(f"full enumeration is limited to {MAX_FULL_FEATURES} features, got {m}")
        masks, weights = _full_masks_and_weights(m)
    else:
        masks, weights = _sampled_masks_and_weights(m, n_coalitions, np.random.default_rng(seed))

    if len(masks):
        values = coalition_values(model, instance, rows, masks)
        phi, residual = _constrained_wls(masks, values, weights, base, predicted - base)
    else:  # M == 1 has no intermediate coalitions
        phi, residual = np.array([predicted - base]), 0.0

    return Attribution(
        method="kernel_shap",
        feature_names=list(feature_names),
        phi=phi,
        base_value=base,
        predicted_value=predicted,
        diagnostics={
            "n_coalitions": int(weights.sum()) if not full and len(masks) else int(len(masks)),
            "enumerated": bool(full),
            "residual": residual,
        },
    )
