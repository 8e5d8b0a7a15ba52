"""FARSEC-style keyword mining and training-set filtering.

Mines the top-W security keywords from training SBRs by TF-IDF, assigns
each keyword a Graham-style class probability (the farsectwo variant
doubles the non-security side), combines the probabilities of keywords
present in a report into a single score, and removes NSBRs scoring above
the threshold. Filtering applies to training data only.
"""
from __future__ import annotations

import csv
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Dataset
from .features import tokenize

logger = logging.getLogger(__name__)

PLAIN = "plain"
FARSECTWO = "farsectwo"

PROB_FLOOR = 0.01
PROB_CEIL = 0.99


@dataclass(frozen=True)
class FarsecConfig:
    keyword_count: int = 100
    threshold: float = 0.75
    variant: str = FARSECTWO

    def __post_init__(self) -> None:
        if self.keyword_count < 1:
            raise ValueError("keyword_count must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.variant not in (PLAIN, FARSECTWO):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class KeywordTable:
    entries: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for term, p in self.entries.items():
            if not PROB_FLOOR <= p <= PROB_CEIL:
                raise ValueError(f"probability for {term!r} outside [{PROB_FLOOR}, {PROB_CEIL}]")

    def __len__(self) -> int:
        return len(self.entries)

    def dump(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["keyword", "probability"])
            for term, p in sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0])):
                writer.writerow([term, repr(p)])


def _token_sets(train: Dataset) -> list[tuple[bool, set[str], Counter]]:
    out = []
    for report in train:
        tokens = tokenize(report.text)
        out.append((report.is_sbr, set(tokens), Counter(tokens)))
    return out


def extract_keywords(train: Dataset, cfg: FarsecConfig) -> list[str]:
    """Top-W SBR terms by (count across SBRs) * ln(n_docs / (1 + df)).

    Document frequency runs over the whole training set; ties break
    lexicographically.
    """
    docs = _token_sets(train)
    n_docs = len(docs)
    if not any(is_sbr for is_sbr, _, _ in docs):
        raise ValueError(f"dataset {train.name!r} has no SBRs; FARSEC is undefined")
    sbr_counts: Counter[str] = Counter()
    df: Counter[str] = Counter()
    for is_sbr, tokens, counts in docs:
        df.update(tokens)
        if is_sbr:
            sbr_counts.update(counts)
    scored = [
        (count * math.log(n_docs / (1.0 + df[term])), term)
        for term, count in sbr_counts.items()
    ]
    scored.sort(key=lambda st: (-st[0], st[1]))
    return [term for _, term in scored[: cfg.keyword_count]]


def keyword_probability(term: str, train: Dataset, variant: str = FARSECTWO) -> float:
    """Graham-style probability that a report containing ``term`` is an SBR.

    Presence-based rates per class; farsectwo doubles the NSBR rate to
    bias against false positives. The result is clamped to [0.01, 0.99];
    a term absent from both classes floors at 0.01.
    """
    n_sbr = n_nsbr = 0
    in_sbr = in_nsbr = 0
    for report in train:
        present = term in set(tokenize(report.text))
        if report.is_sbr:
            n_sbr += 1
            in_sbr += present
        else:
            n_nsbr += 1
            in_nsbr += present
    bad = in_sbr / n_sbr if n_sbr else 0.0
    good = in_nsbr / n_nsbr if n_nsbr else 0.0
    if variant == FARSECTWO:
        good *= 2.0
    if bad + good == 0.0:
        return PROB_FLOOR
    return min(PROB_CEIL, max(PROB_FLOOR, bad / (bad + good)))


def build_keyword_table(train: Dataset, cfg: FarsecConfig) -> KeywordTable:
    """Mine keywords and compute their probabilities in one pass."""
    docs = _token_sets(train)
    n_docs = len(docs)
    n_sbr = sum(1 for is_sbr, _, _ in docs if is_sbr)
    n_nsbr = n_docs - n_sbr
    if n_sbr == 0:
        raise ValueError(f"dataset {train.name!r} has no SBRs; FARSEC is undefined")
    sbr_counts: Counter[str] = Counter()
    df: Counter[str] = Counter()
    in_sbr: Counter[str] = Counter()
    in_nsbr: Counter[str] = Counter()
    for is_sbr, tokens, counts in docs:
        df.update(tokens)
        if is_sbr:
            sbr_counts.update(counts)
            in_sbr.update(tokens)
        else:
            in_nsbr.update(tokens)
    scored = [
        (count * math.log(n_docs / (1.0 + df[term])), term)
        for term, count in sbr_counts.items()
    ]
    scored.sort(key=lambda st: (-st[0], st[1]))
    entries: dict[str, float] = {}
    g = 2.0 if cfg.variant == FARSECTWO else 1.0
    for _, term in scored[: cfg.keyword_count]:
        bad = in_sbr[term] / n_sbr if n_sbr else 0.0
        good = g * (in_nsbr[term] / n_nsbr) if n_nsbr else 0.0
        if bad + good == 0.0:
            p = PROB_FLOOR
        else:
            p = min(PROB_CEIL, max(PROB_FLOOR, bad / (bad + good)))
        entries[term] = p
    return KeywordTable(entries=entries)


def score_report(report, table: KeywordTable) -> float:
    """Naive-Bayes combination of the probabilities of keywords present.

    Keyword presence uses the report's token set, so duplicate occurrences
    do not change the score. A report hitting no keywords scores 0.
    """
    present = set(tokenize(report.text)) & table.entries.keys()
    if not present:
        return 0.0
    # canonical multiplication order keeps scores bit-identical across
    # processes (set order follows the randomized string hash)
    prod_p = prod_q = 1.0
    for term in sorted(present):
        p = table.entries[term]
        prod_p *= p
        prod_q *= 1.0 - p
    denom = prod_p + prod_q
    if denom > 0.0:
        return prod_p / denom
    # both products underflowed (very large tables); redo in log-odds space
    log_odds = sum(
        math.log(table.entries[t]) - math.log(1.0 - table.entries[t]) for t in sorted(present)
    )
    if log_odds >= 0.0:
        return 1.0
    return 0.0


def filter_nsbrs(train: Dataset, cfg: FarsecConfig, table: KeywordTable | None = None) -> Dataset:
    """Drop NSBRs whose score exceeds the threshold; SBRs are never removed.

    The keyword table is built from this training set unless one is
    supplied. Order is preserved and the removal count is logged.
    """
    if table is None:
        table = build_keyword_table(train, cfg)
    kept = []
    removed = 0
    for report in train:
        if not report.is_sbr and score_report(report, table) > cfg.threshold:
            removed += 1
            continue
        kept.append(report)
    logger.info(
        "dataset %r: FARSEC removed %d of %d NSBRs (threshold %.2f, W=%d, %s)",
        train.name,
        removed,
        train.n_nsbr,
        cfg.threshold,
        cfg.keyword_count,
        cfg.variant,
    )
    return train.replace_reports(kept)


def removed_ids(train: Dataset, cfg: FarsecConfig, table: KeywordTable | None = None) -> list[str]:
    """Ids of the NSBRs the filter would drop, for audit dumps."""
    if table is None:
        table = build_keyword_table(train, cfg)
    return [
        r.id
        for r in train
        if not r.is_sbr and score_report(r, table) > cfg.threshold
    ]


class FarsecFilter:
    """Estimator-style wrapper: fit mines the keyword table, transform
    filters a training dataset. This is a training-set resampler; test
    data is never filtered.
    """

    def __init__(self, config: FarsecConfig | None = None):
        self.config = config or FarsecConfig()

    def fit(self, train: Dataset) -> "FarsecFilter":
        self.table_ = build_keyword_table(train, self.config)
        return self

    def transform(self, train: Dataset) -> Dataset:
        if not hasattr(self, "table_"):
            raise RuntimeError("FarsecFilter must be fitted before transform")
        return filter_nsbrs(train, self.config, self.table_)

    def fit_transform(self, train: Dataset) -> Dataset:
        return self.fit(train).transform(train)
