"""Compiled inner loops for the tree learners and the SVM solver.

Features are quantile-binned once per fit (uint8 codes, at most MAX_BINS
bins); split search then runs on per-node histograms. Split thresholds are
stored as raw feature values so prediction works on unbinned rows. All
kernels are deterministic given their explicit seed arguments.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAX_BINS = 64


def bin_columns(X: np.ndarray, max_bins: int = MAX_BINS):
    """Quantile-bin every column.

    Returns (binned uint8 matrix, padded edge matrix (p, max_bins-1),
    per-column edge counts). Bin b holds values in (edge[b-1], edge[b]];
    a row goes left at a split on bin s iff value <= edge[s].
    """
    n, p = X.shape
    binned = np.empty((n, p), dtype=np.uint8)
    edges = np.zeros((p, max_bins - 1), dtype=np.float64)
    n_edges = np.zeros(p, dtype=np.int64)
    for j in range(p):
        col = X[:, j]
        uniq = np.unique(col)
        if uniq.size <= max_bins:
            e = (uniq[:-1] + uniq[1:]) / 2.0
        else:
            qs = np.quantile(col, np.arange(1, max_bins) / max_bins)
            e = np.unique(qs)
        binned[:, j] = np.searchsorted(e, col, side="left").astype(np.uint8)
        n_edges[j] = e.size
        edges[j, :e.size] = e
    return binned, edges, n_edges


@njit(cache=True)
def _gini_weighted(counts, total):
    if total <= 0:
        return 0.0
    s = 0.0
    for c in range(counts.shape[0]):
        s += counts[c] * counts[c]
    return total * (1.0 - s / (total * total))


@njit(cache=True)
def build_cls_tree(Xb, y, n_classes, rows, mtry, max_depth, min_leaf,
                   n_edges, edges, seed,
                   feature, threshold, left, right, leaf_class, importance):
    """Grow one gini classification tree on the given (bootstrap) rows.

    Node arrays are caller-allocated; returns the number of nodes used.
    importance accumulates per-feature impurity decrease divided by the
    row count.
    """
    np.random.seed(seed)
    n = rows.shape[0]
    p = Xb.shape[1]
    idx = rows.copy()
    buf = np.empty(n, dtype=np.int64)

    # stack of (node, start, end, depth)
    stack = np.empty((2 * n + 2, 4), dtype=np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = 0
    stack[top, 2] = n
    stack[top, 3] = 0
    top += 1
    n_nodes = 1

    feat_pool = np.empty(p, dtype=np.int64)
    hist = np.empty((MAX_BINS, n_classes), dtype=np.float64)
    counts = np.empty(n_classes, dtype=np.float64)
    left_counts = np.empty(n_classes, dtype=np.float64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        n_node = end - start

        counts[:] = 0.0
        for t in range(start, end):
            counts[y[idx[t]]] += 1.0
        best_c = 0
        for c in range(1, n_classes):
            if counts[c] > counts[best_c]:
                best_c = c
        parent_imp = _gini_weighted(counts, float(n_node))

        make_leaf = (depth >= max_depth or n_node < 2 * min_leaf
                     or parent_imp <= 1e-12)
        best_gain = 0.0
        best_f = -1
        best_bin = -1
        if not make_leaf:
            for t in range(p):
                feat_pool[t] = t
            n_try = mtry if mtry < p else p
            for t in range(n_try):
                r = t + np.random.randint(0, p - t)
                tmp = feat_pool[t]
                feat_pool[t] = feat_pool[r]
                feat_pool[r] = tmp
                f = feat_pool[t]
                ne = n_edges[f]
                if ne == 0:
                    continue
                nb = ne + 1
                for b in range(nb):
                    for c in range(n_classes):
                        hist[b, c] = 0.0
                for s in range(start, end):
                    hist[Xb[idx[s], f], y[idx[s]]] += 1.0
                left_counts[:] = 0.0
                n_left = 0.0
                for b in range(ne):
                    for c in range(n_classes):
                        left_counts[c] += hist[b, c]
                        n_left += hist[b, c]
                    n_right = n_node - n_left
                    if n_left < min_leaf or n_right < min_leaf:
                        continue
                    child_imp = _gini_weighted(left_counts, n_left)
                    rc = 0.0
                    for c in range(n_classes):
                        rc += (counts[c] - left_counts[c]) ** 2
                    child_imp += n_right * (1.0 - rc / (n_right * n_right))
                    gain = parent_imp - child_imp
                    if gain > best_gain + 1e-12:
                        best_gain = gain
                        best_f = f
                        best_bin = b
            if best_f < 0 or best_gain <= 1e-12:
                make_leaf = True

        if make_leaf:
            feature[node] = -1
            threshold[node] = 0.0
            left[node] = -1
            right[node] = -1
            leaf_class[node] = best_c
            continue

        importance[best_f] += best_gain / n
        # stable partition: rows with bin <= best_bin go left
        n_l = 0
        for s in range(start, end):
            if Xb[idx[s], best_f] <= best_bin:
                buf[n_l] = idx[s]
                n_l += 1
        n_r = 0
        for s in range(start, end):
            if Xb[idx[s], best_f] > best_bin:
                buf[n_l + n_r] = idx[s]
                n_r += 1
        for s in range(n_node):
            idx[start + s] = buf[s]

        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = edges[best_f, best_bin]
        left[node] = left_id
        right[node] = right_id
        leaf_class[node] = best_c

        stack[top, 0] = left_id
        stack[top, 1] = start
        stack[top, 2] = start + n_l
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = right_id
        stack[top, 1] = start + n_l
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True)
def build_cls_forest(Xb, y, n_classes, boot, mtry, max_depth, min_leaf,
                     n_edges, edges, tree_seeds):
    """Grow a forest; returns packed node arrays plus per-tree importances."""
    n_trees, n = boot.shape
    cap = n_trees * (2 * n + 1)
    feature = np.empty(cap, dtype=np.int64)
    threshold = np.empty(cap, dtype=np.float64)
    left = np.empty(cap, dtype=np.int64)
    right = np.empty(cap, dtype=np.int64)
    leaf_class = np.empty(cap, dtype=np.int64)
    offsets = np.zeros(n_trees + 1, dtype=np.int64)
    importances = np.zeros((n_trees, Xb.shape[1]), dtype=np.float64)

    used = 0
    for t in range(n_trees):
        n_nodes = build_cls_tree(
            Xb, y, n_classes, boot[t], mtry, max_depth, min_leaf,
            n_edges, edges, tree_seeds[t],
            feature[used:], threshold[used:], left[used:], right[used:],
            leaf_class[used:], importances[t])
        used += n_nodes
        offsets[t + 1] = used
    return (feature[:used].copy(), threshold[:used].copy(),
            left[:used].copy(), right[:used].copy(),
            leaf_class[:used].copy(), offsets, importances)


@njit(cache=True)
def predict_cls_forest(X, feature, threshold, left, right, leaf_class,
                       offsets, n_classes):
    """Per-row vote counts over all trees."""
    m = X.shape[0]
    n_trees = offsets.shape[0] - 1
    votes = np.zeros((m, n_classes), dtype=np.float64)
    for t in range(n_trees):
        base = offsets[t]
        for i in range(m):
            node = 0
            while feature[base + node] >= 0:
                if X[i, feature[base + node]] <= threshold[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            votes[i, leaf_class[base + node]] += 1.0
    return votes


@njit(cache=True)
def build_reg_tree(Xb, grad, hess, max_depth, min_leaf, lam, gamma,
                   n_edges, edges,
                   feature, threshold, left, right, leaf_value):
    """Grow one second-order regression tree on gradient/hessian targets.

    Split gain is the usual half-sum-of-squares improvement with L2 weight
    penalty lam, and a split is kept only when gain exceeds gamma. Leaf
    value is -G/(H+lam). Returns the node count.
    """
    n = Xb.shape[0]
    p = Xb.shape[1]
    idx = np.arange(n)
    buf = np.empty(n, dtype=np.int64)

    stack = np.empty((2 * n + 2, 4), dtype=np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = 0
    stack[top, 2] = n
    stack[top, 3] = 0
    top += 1
    n_nodes = 1

    hist_g = np.empty(MAX_BINS, dtype=np.float64)
    hist_h = np.empty(MAX_BINS, dtype=np.float64)
    hist_c = np.empty(MAX_BINS, dtype=np.float64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        n_node = end - start

        g_sum = 0.0
        h_sum = 0.0
        for t in range(start, end):
            g_sum += grad[idx[t]]
            h_sum += hess[idx[t]]
        denom = h_sum + lam
        if denom < 1e-12:
            denom = 1e-12
        base_score = g_sum * g_sum / denom

        make_leaf = depth >= max_depth or n_node < 2 * min_leaf
        best_gain = 0.0
        best_f = -1
        best_bin = -1
        if not make_leaf:
            for f in range(p):
                ne = n_edges[f]
                if ne == 0:
                    continue
                nb = ne + 1
                for b in range(nb):
                    hist_g[b] = 0.0
                    hist_h[b] = 0.0
                    hist_c[b] = 0.0
                for s in range(start, end):
                    b = Xb[idx[s], f]
                    hist_g[b] += grad[idx[s]]
                    hist_h[b] += hess[idx[s]]
                    hist_c[b] += 1.0
                gl = 0.0
                hl = 0.0
                cl = 0.0
                for b in range(ne):
                    gl += hist_g[b]
                    hl += hist_h[b]
                    cl += hist_c[b]
                    cr = n_node - cl
                    if cl < min_leaf or cr < min_leaf:
                        continue
                    gr = g_sum - gl
                    hr = h_sum - hl
                    dl = hl + lam
                    if dl < 1e-12:
                        dl = 1e-12
                    dr = hr + lam
                    if dr < 1e-12:
                        dr = 1e-12
                    gain = 0.5 * (gl * gl / dl + gr * gr / dr
                                  - base_score) - gamma
                    if gain > best_gain + 1e-12:
                        best_gain = gain
                        best_f = f
                        best_bin = b
            if best_f < 0 or best_gain <= 1e-12:
                make_leaf = True

        if make_leaf:
            feature[node] = -1
            threshold[node] = 0.0
            left[node] = -1
            right[node] = -1
            leaf_value[node] = -g_sum / denom
            continue

        n_l = 0
        for s in range(start, end):
            if Xb[idx[s], best_f] <= best_bin:
                buf[n_l] = idx[s]
                n_l += 1
        n_r = 0
        for s in range(start, end):
            if Xb[idx[s], best_f] > best_bin:
                buf[n_l + n_r] = idx[s]
                n_r += 1
        for s in range(n_node):
            idx[start + s] = buf[s]

        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = edges[best_f, best_bin]
        left[node] = left_id
        right[node] = right_id
        leaf_value[node] = 0.0

        stack[top, 0] = left_id
        stack[top, 1] = start
        stack[top, 2] = start + n_l
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = right_id
        stack[top, 1] = start + n_l
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


@njit(cache=True)
def predict_reg_forest(X, feature, threshold, left, right, leaf_value,
                       offsets, scale, out):
    """Add scale * (sum of tree outputs) into out, one tree set at a time."""
    m = X.shape[0]
    n_trees = offsets.shape[0] - 1
    for t in range(n_trees):
        base = offsets[t]
        for i in range(m):
            node = 0
            while feature[base + node] >= 0:
                if X[i, feature[base + node]] <= threshold[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            out[i] += scale * leaf_value[base + node]


@njit(cache=True)
def smo_solve(K, y, C, tol, max_iter):
    """Sequential minimal optimization for the soft-margin dual.

    K is the full kernel matrix, y in {-1, +1}. Uses maximal-violating-pair
    working set selection; stops when the KKT gap drops below tol. Returns
    (alpha, b, iterations).
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = np.full(n, -1.0)  # gradient of 1/2 a'Qa - e'a at a = 0

    it = 0
    while it < max_iter:
        # i: max -y*grad over I_up, j: min -y*grad over I_low
        i = -1
        j = -1
        gmax = -1e300
        gmin = 1e300
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > gmax:
                    gmax = v
                    i = t
            if (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0):
                if v < gmin:
                    gmin = v
                    j = t
        if i < 0 or j < 0 or gmax - gmin <= tol:
            break

        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta <= 1e-12:
            eta = 1e-12
        # minimize along the pair, preserving y'alpha
        f_i = y[i] * (grad[i] + 1.0)
        f_j = y[j] * (grad[j] + 1.0)
        e_i = f_i - y[i]
        e_j = f_j - y[j]
        if y[i] != y[j]:
            lo = max(0.0, alpha[j] - alpha[i])
            hi = min(C, C + alpha[j] - alpha[i])
        else:
            lo = max(0.0, alpha[i] + alpha[j] - C)
            hi = min(C, alpha[i] + alpha[j])
        aj_new = alpha[j] + y[j] * (e_i - e_j) / eta
        if aj_new < lo:
            aj_new = lo
        elif aj_new > hi:
            aj_new = hi
        ai_new = alpha[i] + y[i] * y[j] * (alpha[j] - aj_new)
        d_i = ai_new - alpha[i]
        d_j = aj_new - alpha[j]
        if abs(d_i) < 1e-14 and abs(d_j) < 1e-14:
            break
        alpha[i] = ai_new
        alpha[j] = aj_new
        for t in range(n):
            grad[t] += y[t] * (y[i] * K[t, i] * d_i + y[j] * K[t, j] * d_j)
        it += 1

    # intercept from free vectors, else midpoint of the KKT bounds
    b_sum = 0.0
    n_free = 0
    for t in range(n):
        if 1e-8 < alpha[t] < C - 1e-8:
            f_t = y[t] * (grad[t] + 1.0)
            b_sum += y[t] - f_t
            n_free += 1
    if n_free > 0:
        b = b_sum / n_free
    else:
        lo = -1e300
        hi = 1e300
        for t in range(n):
            f_t = y[t] * (grad[t] + 1.0)
            v = y[t] - f_t
            at_lower = alpha[t] <= 1e-8
            if (at_lower and y[t] > 0) or (alpha[t] >= C - 1e-8 and y[t] < 0):
                if v > lo:
                    lo = v
            else:
                if v < hi:
                    hi = v
        b = (lo + hi) / 2.0 if lo > -1e299 and hi < 1e299 else 0.0
    return alpha, b, it
