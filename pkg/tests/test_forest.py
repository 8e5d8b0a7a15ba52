import json

import numpy as np
import pytest
import scipy.sparse as sp

from sbrbench.forest import (
    HyperParams,
    RandomForestSbrClassifier,
    classify,
    mix_seed,
    train_forest,
)
from sbrbench.metrics import NSBR, SBR


def csr(rows, n_features=None):
    dense = np.asarray(rows, dtype=np.float64)
    if n_features is not None:
        padded = np.zeros((dense.shape[0], n_features))
        padded[:, : dense.shape[1]] = dense
        dense = padded
    return sp.csr_matrix(dense)


def walk_tree_oracle(model, x_dense):
    """Independent straightforward traversal over the stored trees."""
    total = 0.0
    n_trees = len(model.tree_ptr_) - 1
    for t in range(n_trees):
        node = int(model.tree_ptr_[t])
        while model.node_feature_[node] >= 0:
            f = int(model.node_feature_[node])
            if x_dense[f] < model.node_threshold_[node]:
                node = int(model.node_left_[node])
            else:
                node = int(model.node_right_[node])
        total += model.node_value_[node]
    return total / n_trees


class PurePythonCart:
    """Brute-force CART on dense data: exhaustive split search, Gini."""

    def fit(self, X, y):
        self.tree = self._grow([tuple(row) for row in X], list(y))
        return self

    @staticmethod
    def _gini(labels):
        if not labels:
            return 0.0
        p = sum(labels) / len(labels)
        return 1.0 - p * p - (1.0 - p) * (1.0 - p)

    def _grow(self, rows, labels):
        if len(set(labels)) == 1:
            return ("leaf", labels[0])
        best = None
        parent = self._gini(labels)
        m = len(labels)
        for f in range(len(rows[0])):
            values = sorted(set(r[f] for r in rows))
            for lo, hi in zip(values, values[1:]):
                threshold = (lo + hi) / 2
                left = [l for r, l in zip(rows, labels) if r[f] < threshold]
                right = [l for r, l in zip(rows, labels) if r[f] >= threshold]
                w = (len(left) * self._gini(left) + len(right) * self._gini(right)) / m
                gain = parent - w
                if gain > 1e-12 and (best is None or gain > best[0]):
                    best = (gain, f, threshold)
        if best is None:
            return ("leaf", round(sum(labels) / len(labels)))
        _, f, threshold = best
        li = [i for i, r in enumerate(rows) if r[f] < threshold]
        ri = [i for i, r in enumerate(rows) if r[f] >= threshold]
        return (
            "node",
            f,
            threshold,
            self._grow([rows[i] for i in li], [labels[i] for i in li]),
            self._grow([rows[i] for i in ri], [labels[i] for i in ri]),
        )

    def predict_one(self, x):
        node = self.tree
        while node[0] == "node":
            _, f, threshold, left, right = node
            node = left if x[f] < threshold else right
        return node[1]


TOY_X = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
TOY_Y = [0, 0, 1, 1]


def test_single_cart_can_shatter_toy_set():
    oracle = PurePythonCart().fit(TOY_X, TOY_Y)
    assert [oracle.predict_one(x) for x in TOY_X] == TOY_Y


def test_forest_perfect_on_separable_toy_set():
    X = csr(TOY_X)
    clf = RandomForestSbrClassifier(n_trees=25, seed=5).fit(X, TOY_Y)
    assert clf.predict(X).tolist() == TOY_Y


def test_all_sbr_training_set():
    X = csr([[1.0, 0.0], [0.0, 2.0], [3.0, 1.0]])
    clf = RandomForestSbrClassifier(n_trees=10, seed=1).fit(X, [1, 1, 1])
    assert np.all(clf.sbr_probability(X) == 1.0)


def test_empty_training_set_rejected():
    with pytest.raises(ValueError):
        RandomForestSbrClassifier().fit(sp.csr_matrix((0, 4)), [])


def test_label_validation():
    X = csr([[1.0], [2.0]])
    with pytest.raises(ValueError):
        RandomForestSbrClassifier().fit(X, [0, 2])
    with pytest.raises(ValueError):
        RandomForestSbrClassifier().fit(X, [0])


def test_determinism_across_thread_counts():
    rng = np.random.default_rng(3)
    X = sp.random(120, 30, density=0.3, random_state=7, format="csr")
    y = rng.integers(0, 2, size=120)
    one = RandomForestSbrClassifier(n_trees=16, seed=9, n_jobs=1).fit(X, y)
    many = RandomForestSbrClassifier(n_trees=16, seed=9, n_jobs=8).fit(X, y)
    assert json.dumps(one.to_payload(), sort_keys=True) == json.dumps(
        many.to_payload(), sort_keys=True
    )


def test_predict_proba_matches_reference_traversal():
    rng = np.random.default_rng(11)
    X = sp.random(80, 12, density=0.4, random_state=2, format="csr")
    y = rng.integers(0, 2, size=80)
    clf = RandomForestSbrClassifier(n_trees=7, seed=13).fit(X, y)
    probs = clf.sbr_probability(X)
    dense = X.toarray()
    for i in range(X.shape[0]):
        assert probs[i] == pytest.approx(walk_tree_oracle(clf, dense[i]), abs=1e-12)
    two_col = clf.predict_proba(X)
    assert np.allclose(two_col.sum(axis=1), 1.0)
    assert np.allclose(two_col[:, 1], probs)


_M64 = (1 << 64) - 1


def _splitmix64_next(state):
    state = (state + 0x9E3779B97F4A7C15) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return state, z ^ (z >> 31)


def replay_bootstrap(tree_seed, n):
    """The documented bootstrap draw: n splitmix64 draws modulo n."""
    weights = np.zeros(n, dtype=np.int64)
    state = tree_seed
    for _ in range(n):
        state, z = _splitmix64_next(state)
        weights[z % n] += 1
    return weights


def test_every_split_strictly_decreases_bootstrap_gini():
    rng = np.random.default_rng(21)
    X = sp.random(150, 20, density=0.35, random_state=4, format="csr")
    y = rng.integers(0, 2, size=150)
    clf = RandomForestSbrClassifier(n_trees=4, seed=2).fit(X, y)
    dense = X.toarray()

    def weighted_gini(idx, weights):
        m = weights[idx].sum()
        s = weights[idx][y[idx] == 1].sum()
        return 1.0 - (s / m) ** 2 - ((m - s) / m) ** 2, m

    for t in range(len(clf.tree_ptr_) - 1):
        weights = replay_bootstrap(mix_seed(clf.seed, t), X.shape[0])
        assert weights.sum() == X.shape[0]
        idx0 = np.flatnonzero(weights)
        stack = [(int(clf.tree_ptr_[t]), idx0)]
        while stack:
            node, idx = stack.pop()
            assert len(idx) > 0
            gini, m = weighted_gini(idx, weights)
            f = int(clf.node_feature_[node])
            value = weights[idx][y[idx] == 1].sum() / weights[idx].sum()
            assert clf.node_value_[node] == pytest.approx(value, abs=1e-12)
            if f < 0:
                continue
            thr = clf.node_threshold_[node]
            left = idx[dense[idx, f] < thr]
            right = idx[dense[idx, f] >= thr]
            gl, ml = weighted_gini(left, weights)
            gr, mr = weighted_gini(right, weights)
            assert (ml * gl + mr * gr) / m < gini - 1e-12
            stack.append((int(clf.node_left_[node]), left))
            stack.append((int(clf.node_right_[node]), right))


def test_chosen_splits_maximize_bootstrap_gini_gain():
    # exhaustive split search as the oracle: every stored split must
    # match the best achievable weighted Gini gain at its node, and its
    # threshold must be a midpoint of consecutive distinct values
    rng = np.random.default_rng(5)
    n, p = 40, 6
    X = sp.random(n, p, density=0.5, random_state=3, format="csr")
    y = rng.integers(0, 2, size=n)
    clf = RandomForestSbrClassifier(n_trees=3, max_features=1.0, seed=11).fit(X, y)
    dense = X.toarray()

    def gini_counts(m, s):
        return 1.0 - (s / m) ** 2 - ((m - s) / m) ** 2

    def best_gain(idx, weights):
        m = weights[idx].sum()
        s = weights[idx][y[idx] == 1].sum()
        parent = gini_counts(m, s)
        best = 0.0
        for f in range(p):
            values = sorted(set(dense[idx, f]))
            for lo, hi in zip(values, values[1:]):
                thr = 0.5 * (lo + hi)
                left = idx[dense[idx, f] < thr]
                right = idx[dense[idx, f] >= thr]
                ml = weights[left].sum()
                sl = weights[left][y[left] == 1].sum()
                mr = weights[right].sum()
                sr = weights[right][y[right] == 1].sum()
                gain = parent - (ml * gini_counts(ml, sl) + mr * gini_counts(mr, sr)) / m
                best = max(best, gain)
        return parent, best

    for t in range(3):
        weights = replay_bootstrap(mix_seed(clf.seed, t), n)
        stack = [(int(clf.tree_ptr_[t]), np.flatnonzero(weights))]
        while stack:
            node, idx = stack.pop()
            f = int(clf.node_feature_[node])
            if f < 0:
                continue
            thr = clf.node_threshold_[node]
            values = sorted(set(dense[idx, f]))
            midpoints = [0.5 * (lo + hi) for lo, hi in zip(values, values[1:])]
            assert any(abs(thr - mp) < 1e-12 for mp in midpoints)
            parent, oracle_best = best_gain(idx, weights)
            left = idx[dense[idx, f] < thr]
            right = idx[dense[idx, f] >= thr]
            m = weights[idx].sum()
            ml = weights[left].sum()
            sl = weights[left][y[left] == 1].sum()
            mr = weights[right].sum()
            sr = weights[right][y[right] == 1].sum()
            achieved = parent - (ml * gini_counts(ml, sl) + mr * gini_counts(mr, sr)) / m
            assert achieved == pytest.approx(oracle_best, abs=1e-12)
            stack.append((int(clf.node_left_[node]), left))
            stack.append((int(clf.node_right_[node]), right))


def test_classify_thresholds():
    assert classify(0.5) == SBR
    assert classify(0.49) == NSBR
    assert classify(1.0) == SBR
    assert classify(0.2, threshold=0.1) == SBR
    with pytest.raises(ValueError):
        classify(1.5)


def test_two_trees_averaging():
    X = csr([[1.0], [0.0]])
    clf = RandomForestSbrClassifier(n_trees=2, seed=0)
    clf.fit(X, [1, 0])
    # synthetic two-leaf forest: force values to check the mean directly
    clf.node_feature_ = np.array([-1, -1], dtype=np.int64)
    clf.node_threshold_ = np.zeros(2)
    clf.node_left_ = np.array([-1, -1], dtype=np.int64)
    clf.node_right_ = np.array([-1, -1], dtype=np.int64)
    clf.node_value_ = np.array([1.0, 0.0])
    clf.tree_ptr_ = np.array([0, 1, 2], dtype=np.int64)
    assert clf.sbr_probability(csr([[0.3]]))[0] == 0.5


def test_serialization_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    X = sp.random(60, 15, density=0.4, random_state=5, format="csr")
    y = rng.integers(0, 2, size=60)
    clf = RandomForestSbrClassifier(
        n_trees=9, max_depth=7, min_samples_leaf=2, max_features=0.5, seed=77
    ).fit(X, y)
    path = tmp_path / "model.json"
    clf.save(path)
    loaded = RandomForestSbrClassifier.load(path)
    assert np.array_equal(loaded.sbr_probability(X), clf.sbr_probability(X))
    again = tmp_path / "model2.json"
    loaded.save(again)
    assert path.read_bytes() == again.read_bytes()


def test_serialization_rejects_foreign_payload(tmp_path):
    path = tmp_path / "bogus.json"
    path.write_text(json.dumps({"format": "something-else"}), encoding="utf-8")
    with pytest.raises(ValueError):
        RandomForestSbrClassifier.load(path)


def test_hyperparams_validation():
    with pytest.raises(ValueError):
        HyperParams(n_trees=0)
    with pytest.raises(ValueError):
        HyperParams(min_samples_split=1)
    with pytest.raises(ValueError):
        HyperParams(max_features=0.0)
    with pytest.raises(ValueError):
        HyperParams(max_features="log2")
    assert HyperParams(max_depth=None).max_depth is None


def test_resolve_max_features():
    p = HyperParams(max_features="sqrt")
    assert p.resolve_max_features(100) == 10
    assert HyperParams(max_features=0.5).resolve_max_features(10) == 5
    assert HyperParams(max_features=1.0).resolve_max_features(7) == 7
    assert HyperParams(max_features=3).resolve_max_features(7) == 3
    assert HyperParams(max_features=99).resolve_max_features(7) == 7
    assert HyperParams(max_features=0.001).resolve_max_features(10) == 1


def test_train_forest_wrapper():
    X = csr(TOY_X)
    model = train_forest(X, TOY_Y, HyperParams(n_trees=5), seed=3)
    assert model.predict(X).tolist() == TOY_Y
    assert model.hyper_params.n_trees == 5


def test_mix_seed_distinct_streams():
    seeds = {mix_seed(42, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert mix_seed(42, 0) != mix_seed(43, 0)


def test_monotone_adding_trees_keeps_toy_perfect():
    # deep trees over all features shatter the toy set; a lone tree can
    # bootstrap away the whole minority class, so start where coverage is
    # overwhelming: more trees never hurt from there
    X = csr(TOY_X)
    for n in (5, 9, 33, 101):
        clf = RandomForestSbrClassifier(n_trees=n, max_features=1.0, seed=6).fit(X, TOY_Y)
        assert clf.predict(X).tolist() == TOY_Y
