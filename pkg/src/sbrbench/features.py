"""Term-frequency / TF-IDF featurization over a capped vocabulary.

Tokens are lowercased maximal runs of alphanumeric characters of length
at least two. The vocabulary ranks terms by training document frequency
(ties broken lexicographically) and keeps the top ``cap``. Weights are
raw term count times ln(n_docs / (1 + df)), floored at zero.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

from .corpus import BugReport, Dataset

DEFAULT_VOCAB_CAP = 4000

_TOKEN_RE = re.compile(r"[^\W_]{2,}", re.UNICODE)


def tokenize(text: str, drop_stop_words: bool = False) -> list[str]:
    """Lowercased alphanumeric runs of length >= 2, in document order.

    Stop-word removal is off by default; the toggle drops common English
    words after the token rule is applied.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if drop_stop_words:
        tokens = [t for t in tokens if t not in ENGLISH_STOP_WORDS]
    return tokens


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    index: dict[str, int]
    document_frequency: dict[str, int]
    n_documents: int

    def __len__(self) -> int:
        return len(self.terms)

    def dump(self, path: str | Path) -> None:
        """Two-column text file (term, document frequency) for inspection."""
        with Path(path).open("w", encoding="utf-8") as fh:
            for term in self.terms:
                fh.write(f"{term}\t{self.document_frequency[term]}\n")


@dataclass(frozen=True)
class FeatureVector:
    columns: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        if len(self.columns) != len(self.weights):
            raise ValueError("columns and weights must have equal length")

    def __len__(self) -> int:
        return len(self.columns)


def build_vocabulary(
    train: Dataset | Sequence[BugReport],
    cap: int = DEFAULT_VOCAB_CAP,
    drop_stop_words: bool = False,
) -> Vocabulary:
    """Top-``cap`` training terms by document frequency, ties lexicographic."""
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    reports = list(train)
    if not reports:
        raise ValueError("cannot build a vocabulary from an empty training corpus")
    df: Counter[str] = Counter()
    for report in reports:
        df.update(set(tokenize(report.text, drop_stop_words)))
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:cap]
    terms = tuple(t for t, _ in ranked)
    return Vocabulary(
        terms=terms,
        index={t: i for i, t in enumerate(terms)},
        document_frequency={t: c for t, c in ranked},
        n_documents=len(reports),
    )


def _idf(vocab: Vocabulary, term: str, n_train_docs: int) -> float:
    return max(0.0, math.log(n_train_docs / (1.0 + vocab.document_frequency[term])))


def tfidf_vector(
    report: BugReport,
    vocab: Vocabulary,
    n_train_docs: int | None = None,
    drop_stop_words: bool = False,
) -> FeatureVector:
    """Sparse TF-IDF weights for one report against a training vocabulary.

    Out-of-vocabulary tokens are ignored; the IDF floor keeps every weight
    non-negative even for terms present in all training documents.
    """
    if n_train_docs is None:
        n_train_docs = vocab.n_documents
    counts = Counter(tokenize(report.text, drop_stop_words))
    cols: list[int] = []
    weights: list[float] = []
    for term, count in counts.items():
        col = vocab.index.get(term)
        if col is None:
            continue
        w = count * _idf(vocab, term, n_train_docs)
        if w > 0.0:
            cols.append(col)
            weights.append(w)
    order = np.argsort(np.asarray(cols, dtype=np.int64)) if cols else []
    return FeatureVector(
        columns=np.asarray(cols, dtype=np.int64)[order] if cols else np.empty(0, dtype=np.int64),
        weights=np.asarray(weights, dtype=np.float64)[order] if cols else np.empty(0, dtype=np.float64),
    )


class TfidfFeaturizer(BaseEstimator, TransformerMixin):
    """Sklearn-style transformer from bug reports to a sparse TF-IDF matrix.

    ``fit`` builds the capped vocabulary from the training reports;
    ``transform`` maps any report collection onto that space as a CSR
    matrix. The fitted vocabulary is immutable, so transforming distinct
    collections concurrently is safe.
    """

    def __init__(self, cap: int = DEFAULT_VOCAB_CAP, drop_stop_words: bool = False):
        self.cap = cap
        self.drop_stop_words = drop_stop_words

    def fit(self, X: Dataset | Sequence[BugReport], y=None) -> "TfidfFeaturizer":
        self.vocabulary_ = build_vocabulary(X, cap=self.cap, drop_stop_words=self.drop_stop_words)
        self.n_features_in_ = len(self.vocabulary_)
        vocab = self.vocabulary_
        self._idf = np.array(
            [_idf(vocab, t, vocab.n_documents) for t in vocab.terms], dtype=np.float64
        )
        return self

    def transform(self, X: Dataset | Sequence[BugReport]) -> sp.csr_matrix:
        if not hasattr(self, "vocabulary_"):
            raise RuntimeError("TfidfFeaturizer must be fitted before transform")
        index = self.vocabulary_.index
        idf = self._idf
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for report in X:
            counts: Counter[int] = Counter()
            for token in tokenize(report.text, self.drop_stop_words):
                col = index.get(token)
                if col is not None:
                    counts[col] += 1
            row = sorted(counts.items())
            for col, count in row:
                w = count * idf[col]
                if w > 0.0:
                    indices.append(col)
                    data.append(w)
            indptr.append(len(indices))
        return sp.csr_matrix(
            (
                np.asarray(data, dtype=np.float64),
                np.asarray(indices, dtype=np.int32),
                np.asarray(indptr, dtype=np.int64),
            ),
            shape=(len(indptr) - 1, len(self.vocabulary_)),
        )


def labels_to_array(reports: Iterable[BugReport]) -> np.ndarray:
    """0/1 label vector, 1 for SBR."""
    return np.asarray([1 if r.is_sbr else 0 for r in reports], dtype=np.uint8)
