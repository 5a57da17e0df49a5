"""The three reliability studies: agreement, background sensitivity, and run time.

Reports are machine readable: one JSON file with fixed top-level keys
{meta, table1, agreement, sensitivity, timing} plus a companion CSV per
populated table. Agreement and sensitivity outputs are deterministic for a
fixed seed; timing records obviously are not.
"""

from __future__ import annotations

import csv
import json
import statistics
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .explain import (
    BackgroundSpec,
    RankedFeatures,
    kernel_shap,
    lime,
    rank,
    resolve_background,
)
from .models.base import FRAUD_PROBABILITY

# Reference AUC values for the 24-column IEEE-CIS extract, used to
# sanity-flag comparison runs on that data (informational, never gating).
REFERENCE_AUC = {
    "NaiveBayes": 0.663,
    "LogisticRegression": 0.533,
    "DecisionTree": 0.706,
    "RandomForest": 0.688,
    "GradientBoosting": 0.709,
    "NeuralNetwork": 0.581,
    "Autoencoder": 0.617,
    "IsolationForest": 0.553,
}
REFERENCE_AUC_BAND = 0.05


@dataclass
class AgreementReport:
    """How much two top-k rankings share: overlap count plus rank footrule."""

    model_kind: str
    explainer: str
    overlap_at_10: int
    rank_footrule: int
    reference: str

    def to_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "explainer": self.explainer,
            "overlap_at_10": self.overlap_at_10,
            "rank_footrule": self.rank_footrule,
            "reference": self.reference,
        }


@dataclass
class BenchRecord:
    """One timing grid cell; wall_seconds is a median over n_repeats runs."""

    model_kind: str
    explainer: str
    background_size: int | None
    wall_seconds: float | None
    n_repeats: int
    instance_id: int | str
    base_value_gap: float | None = None
    skipped: bool = False
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "explainer": self.explainer,
            "background_size": self.background_size,
            "wall_seconds": self.wall_seconds,
            "n_repeats": self.n_repeats,
            "instance_id": self.instance_id,
            "base_value_gap": self.base_value_gap,
            "skipped": self.skipped,
            "reason": self.reason,
        }


def agreement(a: RankedFeatures, b: RankedFeatures, model_kind="", explainer="",
              reference="") -> AgreementReport:
    """Overlap and Spearman footrule (over shared features) of two rankings."""
    if a.k != b.k:
        raise ValueError(f"rankings have different k: {a.k} vs {b.k}")
    shared = set(a.names) & set(b.names)
    footrule = sum(abs(a.rank_of(name) - b.rank_of(name)) for name in shared)
    return AgreementReport(model_kind, explainer, len(shared), footrule, reference)


def pick_fraud_instance(data, seed: int) -> int:
    """Seed-selected fraud row index; the single instance all studies explain."""
    if data.labels is None:
        raise ValueError("picking a fraud instance needs labels")
    fraud_rows = np.flatnonzero(data.labels == 1)
    if len(fraud_rows) == 0:
        raise ValueError("dataset contains no fraud rows")
    rng = np.random.default_rng(seed)
    return int(fraud_rows[rng.integers(len(fraud_rows))])


def run_agreement_study(models, explainers, instance, background, lr_reference,
                        train_data, *, n_coalitions=None, n_perturbations=5000,
                        top_k=10, seed=0) -> list[AgreementReport]:
    """Compare each (model, explainer) top-k against the logistic global top-k.

    Also cross-reports the two anomaly models against each other. `models` is
    an ordered {kind: ScoreModel} mapping, all trained on the same data;
    `background` must already be resolved.
    """
    reports = []
    rankings = {}
    for kind, model in models.items():
        for explainer in explainers:
            if explainer == "kernel_shap":
                attr = kernel_shap(model, instance, background, n_coalitions=n_coalitions,
                                   seed=seed, feature_names=train_data.feature_names)
            elif explainer == "lime":
                if model.semantics != FRAUD_PROBABILITY:
                    continue
                attr = lime(model, instance, train_data,
                            n_perturbations=n_perturbations, top_k=top_k, seed=seed)
            else:
                raise ValueError(f"unknown explainer {explainer!r}")
            ranked = rank(attr, top_k)
            rankings[(kind, explainer)] = ranked
            reports.append(agreement(ranked, lr_reference, model_kind=kind,
                                     explainer=explainer, reference="lr_global"))

    ae = rankings.get(("Autoencoder", "kernel_shap"))
    iforest = rankings.get(("IsolationForest", "kernel_shap"))
    if ae is not None and iforest is not None:
        reports.append(agreement(iforest, ae, model_kind="IsolationForest",
                                 explainer="kernel_shap", reference="Autoencoder"))
    return reports


def run_sensitivity_study(models, instance, data, *, background_size=None,
                          n_coalitions=None, top_k=10, seed=0) -> list[dict]:
    """Overlap of each model's top-k between normal-only and fraud-only backgrounds.

    The same coalition sample is used for both backgrounds so the measured
    difference comes from the reference rows alone. Models at or above the
    median overlap are tagged stable, the rest sensitive.
    """
    normal = resolve_background(
        BackgroundSpec("normal_only", size=background_size, seed=seed), data)
    fraud = resolve_background(
        BackgroundSpec("fraud_only", size=background_size, seed=seed), data)

    rows = []
    for kind, model in models.items():
        ranked = {}
        for label, background in (("normal", normal), ("fraud", fraud)):
            attr = kernel_shap(model, instance, background, n_coalitions=n_coalitions,
                               seed=seed, feature_names=data.feature_names)
            ranked[label] = rank(attr, top_k)
        report = agreement(ranked["normal"], ranked["fraud"], model_kind=kind,
                           explainer="kernel_shap", reference="fraud_only_background")
        rows.append({
            "model_kind": kind,
            "overlap_at_10": report.overlap_at_10,
            "rank_footrule": report.rank_footrule,
            "backgrounds": ["normal_only", "fraud_only"],
        })
    median = statistics.median(r["overlap_at_10"] for r in rows)
    for r in rows:
        r["group"] = "stable" if r["overlap_at_10"] >= median else "sensitive"
    return rows


def run_timing_study(models, instance, train_data, *, sizes=(600, 1000, 4000),
                     n_repeats=3, n_coalitions=None, n_perturbations=5000,
                     seed=0, instance_id=0, lime_enabled=True) -> list[BenchRecord]:
    """Wall-clock medians for single-instance explanations over the size grid.

    One SHAP record per (model, background size), skip markers for sizes the
    data cannot supply, and one LIME cell per model (skipped with a reason
    for non-probability models). Timers exclude training and background
    resolution; cells run strictly sequentially.
    """
    records = []
    for kind, model in models.items():
        mean_score = float(np.mean(model.score(train_data.matrix))) if len(instance) else 0.0
        for size in sizes:
            if size > train_data.n_rows:
                records.append(BenchRecord(kind, f"kernel_shap(s={size})", size, None,
                                           0, instance_id, skipped=True,
                                           reason=f"only {train_data.n_rows} rows available"))
                continue
            background = resolve_background(
                BackgroundSpec("subsample", size=size, seed=seed), train_data)

            def run_shap():
                return kernel_shap(model, instance, background,
                                   n_coalitions=n_coalitions, seed=seed)

            attr = run_shap()  # warm-up, also supplies the base value
            times = []
            for _ in range(n_repeats):
                start = time.perf_counter()
                run_shap()
                times.append(time.perf_counter() - start)
            records.append(BenchRecord(
                kind, f"kernel_shap(s={size})", size,
                statistics.median(times), n_repeats, instance_id,
                base_value_gap=abs(attr.base_value - mean_score)))

        if not lime_enabled:
            continue
        if model.semantics != FRAUD_PROBABILITY:
            records.append(BenchRecord(kind, "lime", None, None, 0, instance_id,
                                       skipped=True,
                                       reason=f"lime unsupported for {model.semantics} models"))
            continue

        def run_lime():
            return lime(model, instance, train_data,
                        n_perturbations=n_perturbations, seed=seed)

        run_lime()  # warm-up
        times = []
        for _ in range(n_repeats):
            start = time.perf_counter()
            run_lime()
            times.append(time.perf_counter() - start)
        records.append(BenchRecord(kind, "lime", None, statistics.median(times),
                                   n_repeats, instance_id))
    return records


def git_describe() -> str | None:
    try:
        out = subprocess.run(["git", "describe", "--always"], capture_output=True,
                             text=True, timeout=10)
    except (OSError, subprocess.TimeoutExpired):
        return None
    return out.stdout.strip() if out.returncode == 0 else None


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        return
    fieldnames = list(rows[0])
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                             for k, v in row.items()})


def write_report(out_dir, meta: dict, *, table1=(), agreement_reports=(),
                 sensitivity=(), timing=(), filename="report.json") -> Path:
    """Emit the study report JSON plus one CSV per populated table."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {
        "meta": meta,
        "table1": list(table1),
        "agreement": [r.to_dict() if isinstance(r, AgreementReport) else r
                      for r in agreement_reports],
        "sensitivity": list(sensitivity),
        "timing": [r.to_dict() if isinstance(r, BenchRecord) else r for r in timing],
    }
    path = out_dir / filename
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_csv(out_dir / "table1.csv", report["table1"])
    _write_csv(out_dir / "agreement.csv", report["agreement"])
    _write_csv(out_dir / "sensitivity.csv", report["sensitivity"])
    _write_csv(out_dir / "timing.csv", report["timing"])
    return path
