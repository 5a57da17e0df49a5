"""Background (reference) dataset strategies for the masking explainers."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

STRATEGIES = ("all", "subsample", "normal_only", "fraud_only", "custom")


@dataclass(frozen=True)
class BackgroundSpec:
    """How to pick reference rows: a strategy plus optional subsample size.

    `size` applies after the label filter for normal_only/fraud_only and is
    required for the subsample strategy. `rows` carries the input for the
    custom strategy and the resolved matrix after resolve_background.
    """

    strategy: str
    size: int | None = None
    seed: int | None = None
    rows: np.ndarray | None = None

    @property
    def resolved(self) -> bool:
        return self.rows is not None

    def label(self) -> str:
        if self.strategy == "subsample":
            return f"subsample({self.size})"
        if self.size is not None:
            return f"{self.strategy}({self.size})"
        return self.strategy


def resolve_background(spec: BackgroundSpec, data) -> BackgroundSpec:
    """Materialize the strategy against a Dataset; deterministic per seed."""
    if spec.strategy not in STRATEGIES:
        raise ValueError(f"unknown background strategy {spec.strategy!r}")

    if spec.strategy == "custom":
        if spec.rows is None:
            raise ValueError("custom background needs rows")
        rows = np.asarray(spec.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise ValueError("custom background rows must be a nonempty 2-d matrix")
        return replace(spec, rows=rows)

    candidates = data.matrix
    if spec.strategy in ("normal_only", "fraud_only"):
        if data.labels is None:
            raise ValueError(f"{spec.strategy} background needs a labeled dataset")
        wanted = 0 if spec.strategy == "normal_only" else 1
        keep = np.flatnonzero(data.labels == wanted)
        if len(keep) == 0:
            raise ValueError(f"{spec.strategy}: no rows with label {wanted}")
        candidates = candidates[keep]

    if spec.strategy == "subsample" and spec.size is None:
        raise ValueError("subsample background needs a size")

    if spec.size is not None:
        if spec.size > len(candidates):
            raise ValueError(
                f"requested background size {spec.size} exceeds the {len(candidates)} eligible rows"
            )
        if spec.seed is None:
            raise ValueError("subsampling a background needs a seed")
        rng = np.random.default_rng(spec.seed)
        pick = np.sort(rng.choice(len(candidates), size=spec.size, replace=False))
        candidates = candidates[pick]

    return replace(spec, rows=candidates)
