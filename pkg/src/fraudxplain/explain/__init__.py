"""Single-instance attribution methods and their shared containers."""

from .attribution import Attribution, RankedFeatures, global_lr_importance, rank, rank_features
from .background import BackgroundSpec, resolve_background
from .exact import exact_shapley, shapley_from_coalition_values, all_coalition_masks
from .kernel_shap import kernel_shap, shapley_kernel_weight
from .lime import lime

__all__ = [
    "Attribution",
    "RankedFeatures",
    "BackgroundSpec",
    "resolve_background",
    "exact_shapley",
    "shapley_from_coalition_values",
    "all_coalition_masks",
    "kernel_shap",
    "shapley_kernel_weight",
    "lime",
    "global_lr_importance",
    "rank",
    "rank_features",
]
