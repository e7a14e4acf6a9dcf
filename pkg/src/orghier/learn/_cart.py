"""Compiled CART kernels.

Feature subsampling at a node is driven by a hash of (tree key, node key),
where the node key is the heap index of the node (root 1, children 2k and
2k+1).  A node's split therefore does not depend on how many other nodes
were grown before it, and a tree grown to depth D truncated at depth d is
identical to the tree grown with ``max_depth=d``.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK53 = np.uint64((1 << 53) - 1)


@njit(cache=True)
def splitmix(x):
    z = x + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def combine(a, b):
    return splitmix(a ^ splitmix(b))


@njit(cache=True)
def _permutation(n, key):
    perm = np.arange(n)
    state = key
    for i in range(n - 1, 0, -1):
        state = splitmix(state)
        u = np.float64(state & _MASK53) / 9007199254740992.0
        j = int(u * (i + 1))
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return perm


@njit(cache=True)
def _gini_sum(counts, n):
    """n * gini(counts)."""
    if n == 0:
        return 0.0
    s = 0.0
    for c in counts:
        s += c * c
    return n - s / n


@njit(cache=True)
def build_tree(X, y, sample_idx, n_classes, max_depth, max_features, tree_key):
    """Grow one tree on the rows ``sample_idx`` (repeats allowed).

    Returns node arrays: feature (-1 for leaves), threshold, left, right,
    depth, class counts, and the weighted impurity decrease of each split
    (in units of samples; divide by the root size for the usual fraction).
    """
    n_features = X.shape[1]
    cap = 2 * len(sample_idx) + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    depth = np.zeros(cap, dtype=np.int64)
    counts = np.zeros((cap, n_classes))
    decrease = np.zeros(cap)

    idx = sample_idx.copy()
    buf = np.empty_like(idx)
    # stack entries: node id, start, end, heap key
    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_key = np.empty(cap, dtype=np.uint64)
    top = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = len(idx)
    st_key[0] = np.uint64(1)
    top = 1
    n_nodes = 1
    vals = np.empty(len(idx))
    labs = np.empty(len(idx), dtype=np.int64)
    left_counts = np.zeros(n_classes)
    right_counts = np.zeros(n_classes)

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        key = st_key[top]
        m = end - start
        for c in range(n_classes):
            counts[node, c] = 0.0
        for t in range(start, end):
            counts[node, y[idx[t]]] += 1.0
        parent = _gini_sum(counts[node], m)
        if depth[node] >= max_depth or parent <= 1e-12 or m < 2:
            continue

        best_imp = parent - 1e-12
        best_f = -1
        best_thr = 0.0
        perm = _permutation(n_features, combine(tree_key, key))
        evaluated = 0
        for pi in range(n_features):
            if evaluated >= max_features:
                break
            f = perm[pi]
            lo = X[idx[start], f]
            hi = lo
            for t in range(start, end):
                v = X[idx[t], f]
                vals[t - start] = v
                labs[t - start] = y[idx[t]]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            if hi <= lo:
                continue
            evaluated += 1
            order = np.argsort(vals[:m], kind="mergesort")
            for c in range(n_classes):
                left_counts[c] = 0.0
                right_counts[c] = counts[node, c]
            for r in range(m - 1):
                o = order[r]
                c = labs[o]
                left_counts[c] += 1.0
                right_counts[c] -= 1.0
                v0 = vals[o]
                v1 = vals[order[r + 1]]
                if v1 <= v0:
                    continue
                nl = r + 1
                imp = _gini_sum(left_counts, nl) + _gini_sum(right_counts, m - nl)
                if imp < best_imp:
                    best_imp = imp
                    best_f = f
                    thr = 0.5 * (v0 + v1)
                    if thr >= v1:
                        thr = v0
                    best_thr = thr
        if best_f < 0:
            continue

        # stable partition of idx[start:end]
        nl = 0
        for t in range(start, end):
            if X[idx[t], best_f] <= best_thr:
                buf[start + nl] = idx[t]
                nl += 1
        nr = 0
        for t in range(start, end):
            if X[idx[t], best_f] > best_thr:
                buf[start + nl + nr] = idx[t]
                nr += 1
        for t in range(start, end):
            idx[t] = buf[t]

        feature[node] = best_f
        threshold[node] = best_thr
        decrease[node] = parent - best_imp
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        depth[lnode] = depth[node] + 1
        depth[rnode] = depth[node] + 1
        # push right first so the left subtree is grown first
        st_node[top] = rnode
        st_start[top] = start + nl
        st_end[top] = end
        st_key[top] = key * np.uint64(2) + np.uint64(1)
        top += 1
        st_node[top] = lnode
        st_start[top] = start
        st_end[top] = start + nl
        st_key[top] = key * np.uint64(2)
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), depth[:n_nodes].copy(), counts[:n_nodes].copy(),
            decrease[:n_nodes].copy())


@njit(cache=True)
def predict_by_depth(feature, threshold, left, right, counts, X, n_depths):
    """Class index predicted for every row of ``X`` under depth limits 1..n_depths.

    Column ``d - 1`` is the prediction of the tree truncated at depth ``d``.
    Ties between class counts go to the smaller class index.
    """
    n = X.shape[0]
    out = np.empty((n, n_depths), dtype=np.int64)
    for s in range(n):
        node = 0
        for d in range(n_depths + 1):
            if d > 0:
                out[s, d - 1] = np.argmax(counts[node])
            if feature[node] >= 0 and d < n_depths:
                if X[s, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
    return out


@njit(cache=True)
def leaf_counts(feature, threshold, left, right, counts, X, max_depth):
    """Class counts of the node each row of ``X`` lands in, stopping at ``max_depth``."""
    out = np.empty((X.shape[0], counts.shape[1]))
    for s in range(X.shape[0]):
        node = 0
        d = 0
        while feature[node] >= 0 and d < max_depth:
            if X[s, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
            d += 1
        out[s] = counts[node]
    return out
