"""From-scratch random forest over sparse TF-IDF vectors.

CART trees with Gini impurity, bootstrap sampling, and per-split feature
subsampling. Candidate thresholds are midpoints between consecutive
distinct observed values; absent sparse entries count as zero. Training
is deterministic for a given (data, params, seed) regardless of worker
count because every tree derives its own RNG from hash(seed, tree_index).
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin

from . import _forest_core as core
from .metrics import NSBR, SBR

_MASK64 = (1 << 64) - 1
_UNLIMITED_DEPTH = 2**31 - 1

MODEL_FORMAT = "sbrbench-forest"
MODEL_VERSION = 1


def mix_seed(seed: int, index: int) -> int:
    """Stable 64-bit hash of (seed, index) for per-tree RNG streams."""
    z = ((seed & _MASK64) * 0x9E3779B97F4A7C15 + (index + 1) * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 30
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 27
    return z


@dataclass(frozen=True)
class HyperParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: float | int | str = "sqrt"

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None for unlimited")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        mf = self.max_features
        if isinstance(mf, str):
            if mf != "sqrt":
                raise ValueError(f"unknown max_features {mf!r}")
        elif isinstance(mf, int) and not isinstance(mf, bool):
            if mf < 1:
                raise ValueError("max_features count must be >= 1")
        elif isinstance(mf, float):
            if not 0.0 < mf <= 1.0:
                raise ValueError("max_features fraction must lie in (0, 1]")
        else:
            raise ValueError(f"bad max_features {mf!r}")

    def resolve_max_features(self, n_features: int) -> int:
        if n_features == 0:
            return 0
        mf = self.max_features
        if mf == "sqrt":
            k = int(round(math.sqrt(n_features)))
        elif isinstance(mf, int) and not isinstance(mf, bool):
            k = mf
        else:
            k = int(round(mf * n_features))
        return max(1, min(k, n_features))

    def as_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
        }


def _as_csr(X) -> sp.csr_matrix:
    m = sp.csr_matrix(X, dtype=np.float64)
    m.sort_indices()
    return m


class RandomForestSbrClassifier(BaseEstimator, ClassifierMixin):
    """Random forest classifier with the SBR class as label 1.

    Follows the scikit-learn estimator protocol: hyperparameters live on
    the instance, ``fit`` returns self, fitted state carries a trailing
    underscore. ``predict`` marks a report SBR when its probability is at
    least the threshold (default 0.5, ties go to SBR).
    """

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int | None = None,
        min_samples_split: int = 2,
        min_samples_leaf: int = 1,
        max_features: float | int | str = "sqrt",
        seed: int = 0,
        n_jobs: int = 1,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.seed = seed
        self.n_jobs = n_jobs

    @property
    def hyper_params(self) -> HyperParams:
        return HyperParams(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            min_samples_leaf=self.min_samples_leaf,
            max_features=self.max_features,
        )

    def fit(self, X, y) -> "RandomForestSbrClassifier":
        params = self.hyper_params  # validates
        X = _as_csr(X)
        y = np.asarray(y, dtype=np.uint8)
        n, p = X.shape
        if n == 0:
            raise ValueError("cannot train a forest on an empty training set")
        if y.shape[0] != n:
            raise ValueError(f"X has {n} rows but y has {y.shape[0]} labels")
        if np.any(y > 1):
            raise ValueError("labels must be 0 (NSBR) or 1 (SBR)")
        k = params.resolve_max_features(p)
        depth = params.max_depth if params.max_depth is not None else _UNLIMITED_DEPTH
        indptr = X.indptr.astype(np.int64)
        indices = X.indices.astype(np.int64)
        # column postings sorted by value, so the column-major split search
        # never has to sort
        Xc = X.tocsc()
        Xc.sort_indices()
        cindptr = Xc.indptr.astype(np.int64)
        col_ids = np.repeat(np.arange(p, dtype=np.int64), np.diff(cindptr))
        order = np.lexsort((Xc.data, col_ids))
        scrows = Xc.indices.astype(np.int64)[order]
        scvals = Xc.data[order]

        def grow(tree_index: int):
            cap = 2 * n + 1
            feature = np.empty(cap, dtype=np.int64)
            threshold = np.empty(cap, dtype=np.float64)
            left = np.empty(cap, dtype=np.int64)
            right = np.empty(cap, dtype=np.int64)
            value = np.empty(cap, dtype=np.float64)
            count = core.build_tree(
                indptr,
                indices,
                X.data,
                cindptr,
                scrows,
                scvals,
                y,
                p,
                depth,
                params.min_samples_split,
                params.min_samples_leaf,
                k,
                np.uint64(mix_seed(self.seed, tree_index)),
                feature,
                threshold,
                left,
                right,
                value,
            )
            return (
                feature[:count].copy(),
                threshold[:count].copy(),
                left[:count].copy(),
                right[:count].copy(),
                value[:count].copy(),
            )

        if self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                trees = list(pool.map(grow, range(params.n_trees)))
        else:
            trees = [grow(t) for t in range(params.n_trees)]

        self._store_trees(trees)
        self.n_features_in_ = p
        self.classes_ = np.array([0, 1])
        return self

    def _store_trees(self, trees) -> None:
        counts = [t[0].shape[0] for t in trees]
        ptr = np.zeros(len(trees) + 1, dtype=np.int64)
        np.cumsum(counts, out=ptr[1:])
        feature = np.concatenate([t[0] for t in trees])
        threshold = np.concatenate([t[1] for t in trees])
        left = np.concatenate([t[2] for t in trees])
        right = np.concatenate([t[3] for t in trees])
        value = np.concatenate([t[4] for t in trees])
        # child links become absolute offsets into the concatenated arrays
        for t in range(len(trees)):
            base = ptr[t]
            seg = slice(ptr[t], ptr[t + 1])
            internal = feature[seg] >= 0
            left[seg][internal] += base
            right[seg][internal] += base
        self.tree_ptr_ = ptr
        self.node_feature_ = feature
        self.node_threshold_ = threshold
        self.node_left_ = left
        self.node_right_ = right
        self.node_value_ = value

    def _check_fitted(self) -> None:
        if not hasattr(self, "tree_ptr_"):
            raise RuntimeError("forest is not fitted")

    def sbr_probability(self, X) -> np.ndarray:
        """Mean leaf SBR fraction across trees for every row."""
        self._check_fitted()
        X = _as_csr(X)
        if X.shape[1] > self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features; model was trained with {self.n_features_in_}"
            )
        out = np.empty(X.shape[0], dtype=np.float64)
        core.predict_forest(
            X.indptr.astype(np.int64),
            X.indices.astype(np.int64),
            X.data,
            self.n_features_in_,
            self.tree_ptr_,
            self.node_feature_,
            self.node_threshold_,
            self.node_left_,
            self.node_right_,
            self.node_value_,
            out,
        )
        return out

    def predict_proba(self, X) -> np.ndarray:
        p = self.sbr_probability(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.sbr_probability(X) >= threshold).astype(np.uint8)

    # -- serialization ----------------------------------------------------

    def to_payload(self) -> dict:
        self._check_fitted()
        trees = []
        for t in range(len(self.tree_ptr_) - 1):
            base = int(self.tree_ptr_[t])
            seg = slice(base, int(self.tree_ptr_[t + 1]))
            feature = self.node_feature_[seg]
            left = self.node_left_[seg].copy()
            right = self.node_right_[seg].copy()
            internal = feature >= 0
            left[internal] -= base
            right[internal] -= base
            trees.append(
                {
                    "feature": feature.tolist(),
                    "threshold": self.node_threshold_[seg].tolist(),
                    "left": left.tolist(),
                    "right": right.tolist(),
                    "value": self.node_value_[seg].tolist(),
                }
            )
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "params": self.hyper_params.as_dict(),
            "seed": self.seed,
            "n_features": self.n_features_in_,
            "trees": trees,
        }

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            json.dump(self.to_payload(), fh, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_payload(cls, payload: dict) -> "RandomForestSbrClassifier":
        if payload.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a {MODEL_FORMAT} payload")
        if payload.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {payload.get('version')!r}")
        params = payload["params"]
        model = cls(seed=payload["seed"], **params)
        trees = [
            (
                np.asarray(t["feature"], dtype=np.int64),
                np.asarray(t["threshold"], dtype=np.float64),
                np.asarray(t["left"], dtype=np.int64),
                np.asarray(t["right"], dtype=np.int64),
                np.asarray(t["value"], dtype=np.float64),
            )
            for t in payload["trees"]
        ]
        model._store_trees(trees)
        model.n_features_in_ = payload["n_features"]
        model.classes_ = np.array([0, 1])
        return model

    @classmethod
    def load(cls, path: str | Path) -> "RandomForestSbrClassifier":
        with Path(path).open(encoding="utf-8") as fh:
            return cls.from_payload(json.load(fh))


def train_forest(X, y, params: HyperParams, seed: int, n_jobs: int = 1) -> RandomForestSbrClassifier:
    """Train a forest from a HyperParams bundle."""
    return RandomForestSbrClassifier(
        n_trees=params.n_trees,
        max_depth=params.max_depth,
        min_samples_split=params.min_samples_split,
        min_samples_leaf=params.min_samples_leaf,
        max_features=params.max_features,
        seed=seed,
        n_jobs=n_jobs,
    ).fit(X, y)


def classify(probability: float, threshold: float = 0.5) -> str:
    """SBR iff probability >= threshold."""
    if not 0.0 <= probability <= 1.0:
        raise ValueError(f"probability {probability} outside [0, 1]")
    return SBR if probability >= threshold else NSBR
