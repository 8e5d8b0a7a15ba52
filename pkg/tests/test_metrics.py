from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sbrbench.metrics import NSBR, SBR, ConfusionMatrix, compute_metrics, confusion


def oracle_metrics(tp, fp, fn, tn):
    """Exact rational evaluation of the five metric definitions."""
    precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    fpr = Fraction(fp, fp + tn) if fp + tn else Fraction(0)
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall
        else Fraction(0)
    )
    spec = 1 - fpr
    g = 2 * recall * spec / (recall + spec) if recall + spec else Fraction(0)
    return precision, recall, f1, fpr, g


# hand-checked fixture table, including every zero-denominator case
FIXTURE_CASES = [
    (10, 0, 0, 90),  # perfect classifier
    (3, 1, 2, 94),  # worked example: precision .75, recall .6
    (0, 0, 0, 10),  # no positives anywhere: all zero-denominator paths
    (0, 5, 0, 5),  # no actual SBRs, some false alarms
    (0, 0, 4, 6),  # SBRs exist but nothing predicted positive
    (5, 5, 5, 5),  # balanced
    (1, 0, 0, 0),  # single true positive, no negatives at all
    (0, 10, 0, 0),  # everything a false positive
    (7, 3, 1, 89),
    (2, 8, 6, 84),
]


@pytest.mark.parametrize("tp,fp,fn,tn", FIXTURE_CASES)
def test_metrics_match_rational_oracle(tp, fp, fn, tn):
    m = compute_metrics(ConfusionMatrix(tp, fp, fn, tn))
    precision, recall, f1, fpr, g = oracle_metrics(tp, fp, fn, tn)
    assert m.precision == pytest.approx(float(precision), abs=1e-9)
    assert m.recall == pytest.approx(float(recall), abs=1e-9)
    assert m.f1 == pytest.approx(float(f1), abs=1e-9)
    assert m.fpr == pytest.approx(float(fpr), abs=1e-9)
    assert m.g_measure == pytest.approx(float(g), abs=1e-9)


def test_perfect_classifier():
    m = compute_metrics(ConfusionMatrix(10, 0, 0, 90))
    assert (m.precision, m.recall, m.f1, m.g_measure) == (1.0, 1.0, 1.0, 1.0)
    assert m.fpr == 0.0


def test_worked_example():
    m = compute_metrics(ConfusionMatrix(3, 1, 2, 94))
    assert m.precision == pytest.approx(0.75)
    assert m.recall == pytest.approx(0.6)
    assert m.fpr == pytest.approx(1 / 95)
    assert m.g_measure == pytest.approx(0.7470, abs=5e-5)


def test_reported_chromium_row_consistency():
    # recall 0.61 with zero false alarms gives a G-measure that rounds to
    # the published 0.75
    cm = ConfusionMatrix(tp=61, fp=0, fn=39, tn=100)
    m = compute_metrics(cm)
    assert m.g_measure == pytest.approx(2 * 0.61 / 1.61)
    assert abs(m.g_measure - 0.75) <= 0.01


def test_confusion_basic():
    cm = confusion([SBR, NSBR], [SBR, NSBR])
    assert (cm.tp, cm.tn, cm.fp, cm.fn) == (1, 1, 0, 0)


def test_confusion_all_negative_predictions():
    predicted = [NSBR] * 10
    actual = [SBR] * 3 + [NSBR] * 7
    cm = confusion(predicted, actual)
    assert (cm.fn, cm.tn, cm.tp, cm.fp) == (3, 7, 0, 0)


def test_confusion_against_manual_tally():
    import random

    rng = random.Random(1234)
    predicted = [rng.choice([SBR, NSBR]) for _ in range(50)]
    actual = [rng.choice([SBR, NSBR]) for _ in range(50)]
    tally = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
    for p, a in zip(predicted, actual):
        if p == SBR and a == SBR:
            tally["tp"] += 1
        elif p == SBR and a == NSBR:
            tally["fp"] += 1
        elif p == NSBR and a == SBR:
            tally["fn"] += 1
        else:
            tally["tn"] += 1
    cm = confusion(predicted, actual)
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == (
        tally["tp"],
        tally["fp"],
        tally["fn"],
        tally["tn"],
    )


def test_confusion_length_mismatch():
    with pytest.raises(ValueError):
        confusion([SBR], [SBR, NSBR])


def test_negative_count_rejected():
    with pytest.raises(ValueError):
        ConfusionMatrix(-1, 0, 0, 1)


counts = st.integers(min_value=0, max_value=500)


@given(tp=counts, fp=counts, fn=counts, tn=counts, k=st.integers(2, 9))
def test_metrics_scale_free(tp, fp, fn, tn, k):
    if tp + fp + fn + tn == 0:
        return
    a = compute_metrics(ConfusionMatrix(tp, fp, fn, tn))
    b = compute_metrics(ConfusionMatrix(k * tp, k * fp, k * fn, k * tn))
    for field in ("precision", "recall", "f1", "fpr", "g_measure"):
        assert getattr(a, field) == pytest.approx(getattr(b, field), abs=1e-12)


@given(tp=counts, fp=counts, fn=counts, tn=counts)
def test_metric_ranges_and_f1_bound(tp, fp, fn, tn):
    if tp + fp + fn + tn == 0:
        return
    m = compute_metrics(ConfusionMatrix(tp, fp, fn, tn))
    for field in ("precision", "recall", "f1", "fpr", "g_measure"):
        assert 0.0 <= getattr(m, field) <= 1.0
    assert m.f1 <= max(m.precision, m.recall) + 1e-12
    if m.recall == 0:
        assert m.g_measure == 0.0


@given(recall_pct=st.integers(0, 100), fpr_pct=st.integers(0, 100))
def test_g_measure_is_symmetric_harmonic_mean(recall_pct, fpr_pct):
    # G treats recall and specificity symmetrically; equal arguments give
    # back the common value
    r = recall_pct
    spec = 100 - fpr_pct
    cm_a = ConfusionMatrix(tp=r, fp=100 - spec, fn=100 - r, tn=spec)
    cm_b = ConfusionMatrix(tp=spec, fp=100 - r, fn=100 - spec, tn=r)
    g_a = compute_metrics(cm_a).g_measure
    g_b = compute_metrics(cm_b).g_measure
    assert g_a == pytest.approx(g_b, abs=1e-12)
    if r == spec:
        assert g_a == pytest.approx(r / 100, abs=1e-12)
