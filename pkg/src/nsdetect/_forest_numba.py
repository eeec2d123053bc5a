"""Numba @njit kernels for tree growth and traversal.

Operation-for-operation mirror of _forest_numpy.py; see that module's
docstring for the parity contract and its entropy/log2 caveat. No
fastmath: split gains must come out bit-identical to the fallback's
elementwise float64 arithmetic.
"""

from __future__ import annotations

import numpy as np
from numba import njit

GINI = 0
ENTROPY = 1

_PHI64 = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _splitmix64(state):
    state = state + _PHI64
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def _feature_subset(n_features, k, state):
    pool = np.arange(n_features, dtype=np.int64)
    for i in range(k):
        state, z = _splitmix64(state)
        j = i + int(z % np.uint64(n_features - i))
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp
    return np.sort(pool[:k])


@njit(cache=True)
def _impurity_scalar(pos, n, criterion):
    n_f = np.float64(n)
    p = np.float64(pos) / n_f
    q = np.float64(n - pos) / n_f
    if criterion == GINI:
        return 1.0 - p * p - q * q
    t1 = p * np.log2(p) if pos > 0 else 0.0
    t2 = q * np.log2(q) if pos < n else 0.0
    return -(t1 + t2)


@njit(cache=True)
def grow_tree(
    X,
    y,
    sample_idx,
    max_depth,
    min_samples_split,
    min_samples_leaf,
    max_features,
    criterion,
    tree_seed,
):
    idx = sample_idx.copy()
    m = idx.shape[0]
    cap = 2 * m + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    value = np.zeros(cap, dtype=np.float64)
    count = np.zeros(cap, dtype=np.int32)
    n_nodes = 0

    stack = np.empty((2 * m + 2, 5), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = m
    stack[0, 2] = 0
    stack[0, 3] = -1
    stack[0, 4] = 0
    top = 1
    while top > 0:
        top -= 1
        start = stack[top, 0]
        end = stack[top, 1]
        depth = stack[top, 2]
        parent = stack[top, 3]
        is_left = stack[top, 4]
        node_id = n_nodes
        n_nodes += 1
        n_node = end - start
        pos_total = 0
        for i in range(start, end):
            pos_total += y[idx[i]]
        value[node_id] = pos_total / np.float64(n_node)
        count[node_id] = n_node
        if parent >= 0:
            if is_left == 1:
                left[parent] = node_id
            else:
                right[parent] = node_id

        if (
            (max_depth >= 0 and depth >= max_depth)
            or n_node < min_samples_split
            or pos_total == 0
            or pos_total == n_node
        ):
            continue

        node_impurity = _impurity_scalar(pos_total, n_node, criterion)
        feat_state = tree_seed ^ (np.uint64(node_id) * _PHI64)
        subset = _feature_subset(X.shape[1], max_features, feat_state)

        n_node_f = np.float64(n_node)
        best_w = np.inf
        best_feat = -1
        best_thr = 0.0
        vals = np.empty(n_node, dtype=np.float64)
        for fi in range(subset.shape[0]):
            f = subset[fi]
            for i in range(n_node):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals)
            cum = 0
            for i in range(n_node - 1):
                cum += y[idx[start + order[i]]]
                v_lo = vals[order[i]]
                v_hi = vals[order[i + 1]]
                if v_lo == v_hi:
                    continue
                n_l = i + 1
                n_r = n_node - n_l
                if n_l < min_samples_leaf or n_r < min_samples_leaf:
                    continue
                imp_l = _impurity_scalar(cum, n_l, criterion)
                imp_r = _impurity_scalar(pos_total - cum, n_r, criterion)
                w = (np.float64(n_l) * imp_l + np.float64(n_r) * imp_r) / n_node_f
                if w < best_w:
                    best_w = w
                    best_feat = f
                    thr = (v_lo + v_hi) * 0.5
                    if thr == v_hi:
                        thr = v_lo
                    best_thr = thr

        if best_feat < 0 or not best_w < node_impurity:
            continue

        feature[node_id] = best_feat
        threshold[node_id] = best_thr
        tmp = np.empty(n_node, dtype=np.int64)
        k = 0
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                tmp[k] = idx[i]
                k += 1
        n_left = k
        for i in range(start, end):
            if not (X[idx[i], best_feat] <= best_thr):
                tmp[k] = idx[i]
                k += 1
        idx[start:end] = tmp

        stack[top, 0] = start + n_left
        stack[top, 1] = end
        stack[top, 2] = depth + 1
        stack[top, 3] = node_id
        stack[top, 4] = 0
        top += 1
        stack[top, 0] = start
        stack[top, 1] = start + n_left
        stack[top, 2] = depth + 1
        stack[top, 3] = node_id
        stack[top, 4] = 1
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        count[:n_nodes].copy(),
    )


@njit(cache=True)
def forest_apply(X, feature, threshold, left, right, value, offsets):
    n_points = X.shape[0]
    n_trees = offsets.shape[0] - 1
    out = np.empty(n_points, dtype=np.float64)
    for i in range(n_points):
        s = 0.0
        for t in range(n_trees):
            node = offsets[t]
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            s += value[node]
        out[i] = s / n_trees
    return out
