"""Confusion matrix and the five evaluation metrics for SBR prediction.

Positive class is SBR throughout. All metrics are computed in double
precision; rounding to two decimals happens only at presentation time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

SBR = "SBR"
NSBR = "NSBR"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    fpr: float
    g_measure: float
    counts: ConfusionMatrix

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "fpr": self.fpr,
            "g_measure": self.g_measure,
            "tp": self.counts.tp,
            "fp": self.counts.fp,
            "fn": self.counts.fn,
            "tn": self.counts.tn,
        }


def confusion(predicted: Sequence[str], actual: Sequence[str]) -> ConfusionMatrix:
    """Tally the 2x2 confusion table; SBR is the positive class."""
    if len(predicted) != len(actual):
        raise ValueError(
            f"length mismatch: {len(predicted)} predictions vs {len(actual)} actuals"
        )
    if len(actual) == 0:
        raise ValueError("cannot tally an empty prediction set")
    tp = fp = fn = tn = 0
    for p, a in zip(predicted, actual):
        if a == SBR:
            if p == SBR:
                tp += 1
            else:
                fn += 1
        else:
            if p == SBR:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Precision, recall, F1, false-positive rate, and G-measure.

    Zero-denominator conventions keep every metric a total function:
    precision = 0 if no positive predictions, recall = 0 if no actual
    positives, FPR = 0 if no actual negatives, F1 = 0 if precision and
    recall are both 0, G = 0 if recall and (1 - FPR) are both 0.
    """
    if cm.total <= 0:
        raise ValueError("confusion matrix is empty")
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn, cm.tn
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    fpr = fp / (fp + tn) if fp + tn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    specificity = 1.0 - fpr
    g_measure = (
        2.0 * recall * specificity / (recall + specificity)
        if recall + specificity > 0
        else 0.0
    )
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        fpr=fpr,
        g_measure=g_measure,
        counts=cm,
    )
