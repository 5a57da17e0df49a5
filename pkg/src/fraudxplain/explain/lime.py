"""Local surrogate explanations from seeded perturbations around one instance.

Numeric features are resampled from a normal law centered at the instance
value with the feature's training spread; categorical features are resampled
from the training code frequencies and enter the surrogate as the indicator
"perturbed value equals the instance value". A ridge model weighted by
exp(-d^2 / kernel_width^2) over the top-k features (by absolute weighted
correlation with the black-box output) provides the attribution.

Only probability-semantics models are supported: perturbing integer codes
under a reconstruction-error or path-length scorer produces outputs the
linear surrogate cannot track, so the restriction is explicit instead of
silently returning garbage.
"""

from __future__ import annotations

import numpy as np

from ..models.base import FRAUD_PROBABILITY
from .attribution import Attribution

_RIDGE_LAMBDA = 1e-3


def _weighted_corr(columns, y, w):
    wn = w / w.sum()
    ym = y - np.sum(wn * y)
    cm = columns - np.sum(wn[:, None] * columns, axis=0)
    cov = (wn[:, None] * cm * ym[:, None]).sum(axis=0)
    var_c = (wn[:, None] * cm**2).sum(axis=0)
    var_y = np.sum(wn * ym**2)
    denom = np.sqrt(var_c * var_y)
    out = np.zeros(columns.shape[1])
    ok = denom > 0
    out[ok] = cov[ok] / denom[ok]
    return out


def _weighted_ridge(columns, y, w, lam):
    wn = w / w.sum()
    x_mean = np.sum(wn[:, None] * columns, axis=0)
    y_mean = float(np.sum(wn * y))
    xc = columns - x_mean
    yc = y - y_mean
    gram = xc.T @ (wn[:, None] * xc) + lam * np.eye(columns.shape[1])
    coef = np.linalg.solve(gram, xc.T @ (wn * yc))
    intercept = y_mean - float(coef @ x_mean)
    return coef, intercept


def lime(model, instance, train_data, n_perturbations=5000, kernel_width=None,
         top_k=10, seed=0) -> Attribution:
    """LIME attribution for one instance of a probability-semantics model."""
    if model.semantics != FRAUD_PROBABILITY:
        raise ValueError(
            f"lime supports fraud-probability models only; {model.kind} emits "
            f"{model.semantics} (use kernel_shap or exact_shapley instead)"
        )
    if train_data.n_rows == 0:
        raise ValueError("lime needs a nonempty training dataset")

    instance = np.asarray(instance, dtype=float)
    m = instance.shape[0]
    names = train_data.feature_names
    is_cat = train_data.schema.column_kinds()
    if kernel_width is None:
        kernel_width = 0.75 * np.sqrt(m)

    rng = np.random.default_rng(seed)
    perturbed = np.empty((n_perturbations, m))
    for j in range(m):
        col = train_data.matrix[:, j]
        if is_cat[j]:
            codes, counts = np.unique(col, return_counts=True)
            perturbed[:, j] = rng.choice(codes, size=n_perturbations, p=counts / counts.sum())
        else:
            perturbed[:, j] = instance[j] + rng.normal(0.0, col.std(), size=n_perturbations)

    outputs = model.score(perturbed)
    if np.ptp(outputs) == 0.0:
        raise ValueError(
            "degenerate fit: the model returned the same output for every perturbation"
        )

    surrogate = perturbed.copy()
    instance_rep = instance.copy()
    for j in np.flatnonzero(is_cat):
        surrogate[:, j] = (perturbed[:, j] == instance[j]).astype(float)
        instance_rep[j] = 1.0

    dist_sq = np.sum((surrogate - instance_rep) ** 2, axis=1)
    sample_w = np.exp(-dist_sq / kernel_width**2)

    corr = _weighted_corr(surrogate, outputs, sample_w)
    selected = sorted(range(m), key=lambda j: (-abs(corr[j]), j))[: min(top_k, m)]
    selected = np.array(sorted(selected))

    coef, intercept = _weighted_ridge(surrogate[:, selected], outputs, sample_w, _RIDGE_LAMBDA)
    phi = np.zeros(m)
    phi[selected] = coef

    fitted = surrogate[:, selected] @ coef + intercept
    wn = sample_w / sample_w.sum()
    ss_res = float(np.sum(wn * (outputs - fitted) ** 2))
    ss_tot = float(np.sum(wn * (outputs - np.sum(wn * outputs)) ** 2))
    predicted = model.evaluate(instance)
    surrogate_at_instance = float(instance_rep[selected] @ coef + intercept)

    return Attribution(
        method="lime",
        feature_names=list(names),
        phi=phi,
        base_value=float(intercept),
        predicted_value=predicted,
        diagnostics={
            "n_perturbations": int(n_perturbations),
            "kernel_width": float(kernel_width),
            "r2": 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0,
            "prediction_discrepancy": abs(surrogate_at_instance - predicted),
            "selected_features": [names[j] for j in selected],
        },
    )
