"""Interventional masking: score hybrids of the instance and background rows."""

from __future__ import annotations

import numpy as np

# keep hybrid blocks around this many rows to bound memory while amortizing
# the per-call overhead of model scoring
_CHUNK_ROWS = 262_144


def coalition_values(model, instance, background, masks) -> np.ndarray:
    """Masked prediction per coalition.

    masks is (n_coalitions, n_features) bool; True means the feature is
    present, taking the instance value, False features come from each
    background row. The value of a coalition is the mean model score over
    the hybrids built against every background row.
    """
    instance = np.asarray(instance, dtype=float)
    background = np.asarray(background, dtype=float)
    masks = np.asarray(masks, dtype=bool)
    n_bg = background.shape[0]
    n_masks = masks.shape[0]
    out = np.empty(n_masks)
    step = max(1, _CHUNK_ROWS // max(n_bg, 1))
    for start in range(0, n_masks, step):
        block = masks[start : start + step]
        k = block.shape[0]
        tiled = np.tile(background, (k, 1))
        expanded = np.repeat(block, n_bg, axis=0)
        hybrids = np.where(expanded, instance, tiled)
        scores = model.score(hybrids)
        out[start : start + k] = np.asarray(scores).reshape(k, n_bg).mean(axis=1)
    return out
