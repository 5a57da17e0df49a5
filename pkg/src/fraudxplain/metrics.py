"""Binary classification metrics for imbalanced data: precision/recall/F1 and AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EvalReport:
    """Positive-class metrics plus macro-averaged companions.

    Zero-division convention: precision and recall are 0 when their
    denominator is 0, and f1 is 0 when precision + recall is 0.
    """

    precision: float
    recall: float
    f1: float
    auc: float | None
    tp: int
    fp: int
    tn: int
    fn: int
    n_rows: int
    macro_precision: float = 0.0
    macro_recall: float = 0.0
    macro_f1: float = 0.0

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "confusion": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
            "n_rows": self.n_rows,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
        }


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def classification_report(labels, predictions) -> EvalReport:
    """Confusion counts and positive-class precision/recall/f1 (auc left None)."""
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if labels.shape != predictions.shape:
        raise ValueError(f"length mismatch: {labels.shape} labels vs {predictions.shape} predictions")
    if labels.size == 0:
        raise ValueError("need at least one row")

    tp = int(np.sum((labels == 1) & (predictions == 1)))
    fp = int(np.sum((labels == 0) & (predictions == 1)))
    tn = int(np.sum((labels == 0) & (predictions == 0)))
    fn = int(np.sum((labels == 1) & (predictions == 0)))
    precision, recall, f1 = _prf(tp, fp, fn)
    # macro: average the positive-class view with the negative-class view
    neg_precision, neg_recall, neg_f1 = _prf(tn, fn, fp)
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        auc=None,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        n_rows=int(labels.size),
        macro_precision=(precision + neg_precision) / 2,
        macro_recall=(recall + neg_recall) / 2,
        macro_f1=(f1 + neg_f1) / 2,
    )


def _midranks(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=float)
    i = 0
    sorted_scores = scores[order]
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc(labels, scores) -> float:
    """Area under the ROC curve via the rank (Mann-Whitney) statistic.

    Ties contribute half, i.e. the result equals P(score+ > score-) +
    0.5 * P(score+ = score-) over random positive/negative pairs.
    """
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape:
        raise ValueError(f"length mismatch: {labels.shape} labels vs {scores.shape} scores")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc needs both classes present")
    ranks = _midranks(scores)
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def full_report(labels, predictions, scores) -> EvalReport:
    """classification_report plus auc computed from continuous scores."""
    report = classification_report(labels, predictions)
    report.auc = auc(labels, scores)
    return report
