"""Numba kernels for CART growing and forest traversal on sparse data.

The tree builder is sparse-aware. A bootstrap sample is stored as the
distinct rows drawn plus an integer weight per row, so duplicates cost
nothing. At each node the split search picks, per node, between two
evaluation strategies by estimated cost:

- column-major: walk the candidate features' postings, which the caller
  provides pre-sorted by value, filtering to rows in the node; entries
  arrive in value order, so no sorting is needed;
- row-major: bucket the node's nonzero entries by candidate feature and
  sort each small bucket.

Zero entries form an implicit block that always falls on the low side of
a positive threshold. All randomness comes from an explicit splitmix64
state per tree, which keeps training deterministic for a given seed
regardless of how many trees run concurrently.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_GAIN_EPS = 1e-12
# row-major work per entry is roughly double column-major (bucket + sort)
_COL_PATH_FACTOR = 2


@njit(cache=True, nogil=True, inline="always")
def _next_u64(state):
    state[0] = state[0] + _SPLITMIX_GAMMA
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def _rand_below(state, n):
    return np.int64(_next_u64(state) % np.uint64(n))


@njit(cache=True, nogil=True, inline="always")
def _row_value(indptr, indices, data, row, feature):
    lo = indptr[row]
    hi = indptr[row + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        f = indices[mid]
        if f == feature:
            return data[mid]
        if f < feature:
            lo = mid + 1
        else:
            hi = mid
    return 0.0


@njit(cache=True, nogil=True)
def _sort_pairs(values, tags, lo, hi):
    """In-place quicksort of values[lo:hi] with an int64 tag per entry."""
    stack = np.empty(128, dtype=np.int64)
    top = 0
    stack[top] = lo
    stack[top + 1] = hi
    top += 2
    while top > 0:
        top -= 2
        lo = stack[top]
        hi = stack[top + 1]
        while hi - lo > 16:
            mid = (lo + hi) // 2
            a = values[lo]
            b = values[mid]
            c = values[hi - 1]
            if (a <= b) == (b <= c):
                pivot = b
            elif (b <= a) == (a <= c):
                pivot = a
            else:
                pivot = c
            i = lo
            j = hi - 1
            while i <= j:
                while values[i] < pivot:
                    i += 1
                while values[j] > pivot:
                    j -= 1
                if i <= j:
                    tv = values[i]
                    values[i] = values[j]
                    values[j] = tv
                    tt = tags[i]
                    tags[i] = tags[j]
                    tags[j] = tt
                    i += 1
                    j -= 1
            # keep the smaller side in the loop, defer the larger
            if j - lo < hi - i:
                if i < hi - 1:
                    stack[top] = i
                    stack[top + 1] = hi
                    top += 2
                hi = j + 1
            else:
                if lo < j + 1:
                    stack[top] = lo
                    stack[top + 1] = j + 1
                    top += 2
                lo = i
        for i in range(lo + 1, hi):
            v = values[i]
            t = tags[i]
            j = i - 1
            while j >= lo and values[j] > v:
                values[j + 1] = values[j]
                tags[j + 1] = tags[j]
                j -= 1
            values[j + 1] = v
            tags[j + 1] = t
    return


@njit(cache=True, nogil=True, inline="always")
def _scan_thresholds(val_buf, tag_buf, lo, hi, m, s, nz_m, nz_s, min_leaf, parent_gini):
    """Best (gain, threshold) over the boundaries of a value-sorted bucket.

    The implicit zero block (weight m - nz_m) sits before val_buf[lo:hi].
    Candidate thresholds are midpoints between consecutive distinct
    values; a candidate is valid when both sides carry at least min_leaf
    bootstrap samples.
    """
    best_gain = 0.0
    best_thr = 0.0
    left_m = m - nz_m
    left_s = s - nz_s
    prev_val = 0.0
    e = lo
    if left_m == 0:
        v0 = val_buf[lo]
        while e < hi and val_buf[e] == v0:
            tag = tag_buf[e]
            left_m += tag >> 1
            left_s += (tag >> 1) * (tag & 1)
            e += 1
        prev_val = v0
    while e < hi:
        v = val_buf[e]
        right_m = m - left_m
        if left_m >= min_leaf and right_m >= min_leaf:
            right_s = s - left_s
            gl = 1.0 - (left_s / left_m) ** 2 - ((left_m - left_s) / left_m) ** 2
            gr = 1.0 - (right_s / right_m) ** 2 - ((right_m - right_s) / right_m) ** 2
            gain = parent_gini - (left_m * gl + right_m * gr) / m
            if gain > best_gain:
                best_gain = gain
                best_thr = 0.5 * (prev_val + v)
        while e < hi and val_buf[e] == v:
            tag = tag_buf[e]
            left_m += tag >> 1
            left_s += (tag >> 1) * (tag & 1)
            e += 1
        prev_val = v
    return best_gain, best_thr


@njit(cache=True, nogil=True)
def build_tree(
    indptr,
    indices,
    data,
    cindptr,
    scrows,
    scvals,
    y,
    n_features,
    max_depth,
    min_samples_split,
    min_samples_leaf,
    k_features,
    seed,
    node_feature,
    node_threshold,
    node_left,
    node_right,
    node_value,
):
    """Grow one tree on a bootstrap sample; returns the node count.

    (cindptr, scrows, scvals) are CSC postings sorted by value within
    each column. Sample-count bounds apply to bootstrap draw counts, so a
    row drawn twice counts twice. Output arrays must have capacity
    2*n + 1. Internal nodes hold a feature and threshold (go left when
    value < threshold); leaves hold feature -1 and the SBR fraction of
    their bootstrap samples.
    """
    n = indptr.shape[0] - 1
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed

    weight = np.zeros(n, dtype=np.int64)
    for _ in range(n):
        weight[_rand_below(state, n)] += 1
    n_distinct = 0
    for r in range(n):
        if weight[r] > 0:
            n_distinct += 1
    samples = np.empty(n_distinct, dtype=np.int64)
    pos = 0
    root_nnz = 0
    for r in range(n):
        if weight[r] > 0:
            samples[pos] = r
            pos += 1
            root_nnz += indptr[r + 1] - indptr[r]

    perm = np.arange(n_features, dtype=np.int64)
    feat_stamp = np.full(n_features, -1, dtype=np.int64)
    slot_of = np.zeros(n_features, dtype=np.int64)
    row_stamp = np.full(n, -1, dtype=np.int64)
    kcap = max(k_features, 1)
    feat_ids = np.empty(kcap, dtype=np.int64)
    feat_cnt = np.zeros(kcap, dtype=np.int64)
    feat_start = np.zeros(kcap + 1, dtype=np.int64)
    fill_pos = np.zeros(kcap, dtype=np.int64)
    feat_m = np.zeros(kcap, dtype=np.int64)  # bootstrap weight of nonzero entries
    feat_s = np.zeros(kcap, dtype=np.int64)  # ... of SBR nonzero entries
    val_buf = np.empty(max(root_nnz, 1), dtype=np.float64)
    tag_buf = np.empty(max(root_nnz, 1), dtype=np.int64)  # weight*2 + label

    # stack rows: start, end, depth, parent, is_left
    stack = np.empty((2 * n_distinct + 2, 5), dtype=np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = n_distinct
    stack[top, 2] = 0
    stack[top, 3] = -1
    stack[top, 4] = 0
    top += 1
    node_count = 0

    while top > 0:
        top -= 1
        start = stack[top, 0]
        end = stack[top, 1]
        depth = stack[top, 2]
        parent = stack[top, 3]
        is_left = stack[top, 4]

        node_id = node_count
        node_count += 1
        if parent >= 0:
            if is_left == 1:
                node_left[parent] = node_id
            else:
                node_right[parent] = node_id

        m = np.int64(0)
        s = np.int64(0)
        node_nnz = np.int64(0)
        for i in range(start, end):
            r = samples[i]
            w = weight[r]
            m += w
            if y[r] == 1:
                s += w
            node_nnz += indptr[r + 1] - indptr[r]
        node_feature[node_id] = -1
        node_threshold[node_id] = 0.0
        node_left[node_id] = -1
        node_right[node_id] = -1
        node_value[node_id] = s / m

        if (
            s == 0
            or s == m
            or m < min_samples_split
            or m < 2 * min_samples_leaf
            or depth >= max_depth
            or k_features == 0
        ):
            continue

        # sample k distinct candidate features (all of them: skip the RNG)
        kk = k_features
        if kk > n_features:
            kk = n_features
        col_cost = np.int64(0)
        if kk == n_features:
            for j in range(kk):
                feat_ids[j] = j
            col_cost = cindptr[n_features]
        else:
            for j in range(kk):
                rr = j + _rand_below(state, n_features - j)
                tmp = perm[j]
                perm[j] = perm[rr]
                perm[rr] = tmp
                f = perm[j]
                feat_ids[j] = f
                col_cost += cindptr[f + 1] - cindptr[f]

        parent_gini = 1.0 - (s / m) ** 2 - ((m - s) / m) ** 2
        best_gain = _GAIN_EPS
        best_feature = np.int64(-1)
        best_threshold = 0.0

        if col_cost < node_nnz * _COL_PATH_FACTOR:
            # column-major: filter each candidate's value-sorted postings
            for i in range(start, end):
                row_stamp[samples[i]] = node_id
            for j in range(kk):
                f = feat_ids[j]
                cnt = np.int64(0)
                nz_m = np.int64(0)
                nz_s = np.int64(0)
                for e in range(cindptr[f], cindptr[f + 1]):
                    r = scrows[e]
                    if row_stamp[r] == node_id:
                        w = weight[r]
                        lab = y[r]
                        val_buf[cnt] = scvals[e]
                        tag_buf[cnt] = w * 2 + lab
                        nz_m += w
                        nz_s += w * lab
                        cnt += 1
                if cnt == 0:
                    continue
                gain, thr = _scan_thresholds(
                    val_buf, tag_buf, 0, cnt, m, s, nz_m, nz_s,
                    min_samples_leaf, parent_gini,
                )
                if gain > best_gain:
                    best_gain = gain
                    best_feature = f
                    best_threshold = thr
        else:
            # row-major: bucket the node's entries by candidate feature
            for j in range(kk):
                f = feat_ids[j]
                feat_stamp[f] = node_id
                slot_of[f] = j
                feat_cnt[j] = 0
                feat_m[j] = 0
                feat_s[j] = 0
            for i in range(start, end):
                r = samples[i]
                for e in range(indptr[r], indptr[r + 1]):
                    f = indices[e]
                    if feat_stamp[f] == node_id:
                        feat_cnt[slot_of[f]] += 1
            feat_start[0] = 0
            for j in range(kk):
                feat_start[j + 1] = feat_start[j] + feat_cnt[j]
                fill_pos[j] = feat_start[j]
            for i in range(start, end):
                r = samples[i]
                w = weight[r]
                lab = y[r]
                tag = w * 2 + lab
                ws = w * lab
                for e in range(indptr[r], indptr[r + 1]):
                    f = indices[e]
                    if feat_stamp[f] == node_id:
                        j = slot_of[f]
                        p2 = fill_pos[j]
                        val_buf[p2] = data[e]
                        tag_buf[p2] = tag
                        feat_m[j] += w
                        feat_s[j] += ws
                        fill_pos[j] = p2 + 1
            for j in range(kk):
                cnt = feat_cnt[j]
                if cnt == 0:
                    continue
                lo = feat_start[j]
                hi = lo + cnt
                if cnt > 1:
                    _sort_pairs(val_buf, tag_buf, lo, hi)
                gain, thr = _scan_thresholds(
                    val_buf, tag_buf, lo, hi, m, s, feat_m[j], feat_s[j],
                    min_samples_leaf, parent_gini,
                )
                if gain > best_gain:
                    best_gain = gain
                    best_feature = feat_ids[j]
                    best_threshold = thr

        if best_feature < 0:
            continue

        # partition distinct rows in place: value < threshold goes left
        i = start
        j2 = end - 1
        while i <= j2:
            v = _row_value(indptr, indices, data, samples[i], best_feature)
            if v < best_threshold:
                i += 1
            else:
                tmp = samples[i]
                samples[i] = samples[j2]
                samples[j2] = tmp
                j2 -= 1
        split = i

        node_feature[node_id] = best_feature
        node_threshold[node_id] = best_threshold
        # right child pushed first so the left child is processed first
        stack[top, 0] = split
        stack[top, 1] = end
        stack[top, 2] = depth + 1
        stack[top, 3] = node_id
        stack[top, 4] = 0
        top += 1
        stack[top, 0] = start
        stack[top, 1] = split
        stack[top, 2] = depth + 1
        stack[top, 3] = node_id
        stack[top, 4] = 1
        top += 1

    return node_count


@njit(cache=True, nogil=True)
def predict_forest(
    indptr,
    indices,
    data,
    n_features,
    tree_ptr,
    node_feature,
    node_threshold,
    node_left,
    node_right,
    node_value,
    out,
):
    """Mean leaf SBR fraction over all trees for every CSR row."""
    n_docs = indptr.shape[0] - 1
    n_trees = tree_ptr.shape[0] - 1
    dense = np.zeros(n_features, dtype=np.float64)
    for d in range(n_docs):
        for e in range(indptr[d], indptr[d + 1]):
            dense[indices[e]] = data[e]
        acc = 0.0
        for t in range(n_trees):
            node = tree_ptr[t]
            while node_feature[node] >= 0:
                if dense[node_feature[node]] < node_threshold[node]:
                    node = node_left[node]
                else:
                    node = node_right[node]
            acc += node_value[node]
        out[d] = acc / n_trees
        for e in range(indptr[d], indptr[d + 1]):
            dense[indices[e]] = 0.0
    return
