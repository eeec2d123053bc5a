"""Pure-numpy fallback kernels for tree growth and traversal.

These mirror the numba kernels in _forest_numba.py operation for
operation: identical split scoring (integer counts, then the same float64
expressions), identical first-minimum tie-breaking, identical node
numbering and feature subsampling. A gini forest grown by either backend
is bit-for-bit the same forest. Entropy forests agree in practice but are
not guaranteed identical: numpy's vectorized log2 and numba's scalar log2
can differ by one ulp, which in principle can flip a near-tie split.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_PHI64 = 0x9E3779B97F4A7C15

GINI = 0
ENTROPY = 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + _PHI64) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def _feature_subset(n_features: int, k: int, state: int) -> np.ndarray:
    """k distinct feature indices via partial Fisher-Yates, sorted ascending."""
    pool = list(range(n_features))
    for i in range(k):
        state, z = _splitmix64(state)
        j = i + int(z % (n_features - i))
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(np.array(pool[:k], dtype=np.int64))


def _impurity_from_counts(pos, n, criterion: int):
    """Vectorized impurity from positive/total counts (exact integers in)."""
    n_f = np.asarray(n, dtype=np.float64)
    pos = np.asarray(pos, dtype=np.float64)
    neg = np.asarray(n, dtype=np.float64) - pos
    p = pos / n_f
    q = neg / n_f
    if criterion == GINI:
        return 1.0 - p * p - q * q
    t1 = np.where(pos > 0, p * np.log2(np.where(pos > 0, p, 1.0)), 0.0)
    t2 = np.where(neg > 0, q * np.log2(np.where(neg > 0, q, 1.0)), 0.0)
    return -(t1 + t2)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    sample_idx: np.ndarray,
    max_depth: int,
    min_samples_split: int,
    min_samples_leaf: int,
    max_features: int,
    criterion: int,
    tree_seed: int,
):
    """Grow one tree over X[sample_idx]; returns flat node arrays.

    max_depth < 0 means unbounded. Returns (feature, threshold, left,
    right, value, count); feature == -1 marks a leaf.
    """
    tree_seed = int(tree_seed)  # arbitrary-precision masking, unlike np.uint64
    idx = np.array(sample_idx, dtype=np.int64)
    m = idx.shape[0]
    cap = 2 * m + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    value = np.zeros(cap, dtype=np.float64)
    count = np.zeros(cap, dtype=np.int32)
    n_nodes = 0

    # Stack rows: (start, end, depth, parent, is_left); right pushed first
    # so the left child is popped (and numbered) before the right child.
    stack = [(0, m, 0, -1, 0)]
    while stack:
        start, end, depth, parent, is_left = stack.pop()
        node_id = n_nodes
        n_nodes += 1
        seg = idx[start:end]
        n_node = end - start
        labs = y[seg]
        pos_total = int(labs.sum())
        value[node_id] = pos_total / float(n_node)
        count[node_id] = n_node
        if parent >= 0:
            if is_left:
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

        node_impurity = float(
            _impurity_from_counts(np.array([pos_total]), np.array([n_node]), criterion)[0]
        )
        feat_state = (tree_seed ^ ((node_id * _PHI64) & _MASK64)) & _MASK64
        subset = _feature_subset(X.shape[1], max_features, feat_state)

        best_w = np.inf
        best_feat = -1
        best_thr = 0.0
        for f in subset:
            vals = X[seg, f]
            order = np.argsort(vals)
            sv = vals[order]
            cum_pos = np.cumsum(labs[order])
            n_l = np.arange(1, n_node)
            n_r = n_node - n_l
            valid = (
                (sv[1:] != sv[:-1])
                & (n_l >= min_samples_leaf)
                & (n_r >= min_samples_leaf)
            )
            if not valid.any():
                continue
            pos_l = cum_pos[:-1][valid]
            nl = n_l[valid]
            nr = n_r[valid]
            imp_l = _impurity_from_counts(pos_l, nl, criterion)
            imp_r = _impurity_from_counts(pos_total - pos_l, nr, criterion)
            w = (nl * imp_l + nr * imp_r) / float(n_node)
            j = int(np.argmin(w))
            if w[j] < best_w:
                best_w = float(w[j])
                best_feat = int(f)
                i_split = np.nonzero(valid)[0][j]
                thr = (sv[i_split] + sv[i_split + 1]) * 0.5
                if thr == sv[i_split + 1]:
                    thr = sv[i_split]
                best_thr = float(thr)

        # Split only on a strict impurity decrease.
        if best_feat < 0 or not best_w < node_impurity:
            continue

        feature[node_id] = best_feat
        threshold[node_id] = best_thr
        go_left = X[seg, best_feat] <= best_thr
        idx[start:end] = np.concatenate([seg[go_left], seg[~go_left]])
        n_left = int(go_left.sum())
        stack.append((start + n_left, end, depth + 1, node_id, 0))
        stack.append((start, start + n_left, depth + 1, node_id, 1))

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        count[:n_nodes].copy(),
    )


def forest_apply(
    X: np.ndarray,
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    value: np.ndarray,
    offsets: np.ndarray,
) -> np.ndarray:
    """Mean leaf fraction over trees; left iff x[f] <= threshold.

    Tree node arrays are concatenated; `offsets[t]` is tree t's root and
    child links are absolute indices into the flat arrays.
    """
    n_points = X.shape[0]
    n_trees = offsets.shape[0] - 1
    out = np.zeros(n_points, dtype=np.float64)
    rows = np.arange(n_points)
    for t in range(n_trees):
        node = np.full(n_points, offsets[t], dtype=np.int64)
        active = feature[node] >= 0
        while active.any():
            an = node[active]
            go_left = X[rows[active], feature[an]] <= threshold[an]
            node[active] = np.where(go_left, left[an], right[an])
            active = feature[node] >= 0
        out += value[node]
    return out / n_trees
