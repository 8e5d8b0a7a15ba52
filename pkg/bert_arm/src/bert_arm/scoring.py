"""Threshold classification and the evaluation metrics used to pick
checkpoints. Positive class is security (label 1); ties at the 0.5
threshold go positive, matching the harness."""
from __future__ import annotations

THRESHOLD = 0.5


def summarize(probabilities: list[float], labels: list[int]) -> dict[str, float]:
    tp = fp = fn = tn = 0
    for p, label in zip(probabilities, labels):
        predicted = 1 if p >= THRESHOLD else 0
        if label == 1:
            if predicted:
                tp += 1
            else:
                fn += 1
        elif predicted:
            fp += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    specificity = 1.0 - fpr
    g = (
        2 * recall * specificity / (recall + specificity)
        if recall + specificity
        else 0.0
    )
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    return {
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "fpr": fpr,
        "g_measure": g,
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "tn": tn,
    }
