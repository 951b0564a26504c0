"""Gradient-boosted trees with a second-order (gradient/hessian) objective.

One regression tree per class per round on the softmax cross-entropy
gradients; split gain uses the curvature term with an L2 leaf penalty, and a
split must clear the min-gain threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k


@dataclass
class BoostModel:
    n_classes: int
    n_rounds: int
    learning_rate: float
    init_scores: np.ndarray   # log class priors, (n_classes,)
    class_nodes: list         # per class: (feature, threshold, left, right, value, offsets)


def _softmax(F: np.ndarray) -> np.ndarray:
    z = F - F.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _predict_class(nodes, X: np.ndarray, scale: float) -> np.ndarray:
    feature, threshold, left, right, value, offsets = nodes
    out = np.zeros(X.shape[0])
    if offsets.shape[0] > 1:
        k.predict_reg_forest(X, feature, threshold, left, right, value,
                             offsets, scale, out)
    return out


def fit_boost(X: np.ndarray, y: np.ndarray, n_classes: int, n_rounds: int,
              max_depth: int, learning_rate: float, reg_lambda: float,
              min_gain: float, seed: int) -> BoostModel:
    n, p = X.shape
    binned, edges, n_edges = k.bin_columns(X)
    Xc = np.ascontiguousarray(X, dtype=np.float64)

    priors = np.bincount(y, minlength=n_classes).astype(float) / n
    init = np.log(np.maximum(priors, 1e-12))
    F = np.tile(init, (n, 1))
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y] = 1.0

    cap = 2 * n + 1
    parts = [{"f": [], "t": [], "l": [], "r": [], "v": [], "n": [0]}
             for _ in range(n_classes)]
    for _ in range(n_rounds):
        P = _softmax(F)
        G = P - Y
        H = P * (1.0 - P)
        for c in range(n_classes):
            feature = np.empty(cap, dtype=np.int64)
            threshold = np.empty(cap, dtype=np.float64)
            left = np.empty(cap, dtype=np.int64)
            right = np.empty(cap, dtype=np.int64)
            value = np.empty(cap, dtype=np.float64)
            n_nodes = k.build_reg_tree(
                binned, np.ascontiguousarray(G[:, c]),
                np.ascontiguousarray(H[:, c]),
                np.int64(max_depth), np.int64(1), reg_lambda, min_gain,
                n_edges, edges,
                feature, threshold, left, right, value)
            part = parts[c]
            part["f"].append(feature[:n_nodes])
            part["t"].append(threshold[:n_nodes])
            part["l"].append(left[:n_nodes])
            part["r"].append(right[:n_nodes])
            part["v"].append(value[:n_nodes])
            part["n"].append(part["n"][-1] + n_nodes)
            if learning_rate != 0.0:
                single = (feature[:n_nodes], threshold[:n_nodes],
                          left[:n_nodes], right[:n_nodes], value[:n_nodes],
                          np.array([0, n_nodes], dtype=np.int64))
                F[:, c] += _predict_class(single, Xc, learning_rate)

    class_nodes = []
    for part in parts:
        class_nodes.append((
            np.concatenate(part["f"]), np.concatenate(part["t"]),
            np.concatenate(part["l"]), np.concatenate(part["r"]),
            np.concatenate(part["v"]), np.array(part["n"], dtype=np.int64)))
    return BoostModel(n_classes=n_classes, n_rounds=n_rounds,
                      learning_rate=learning_rate, init_scores=init,
                      class_nodes=class_nodes)


def boost_scores(model: BoostModel, X: np.ndarray) -> np.ndarray:
    """Softmax over accumulated per-class tree outputs."""
    m = X.shape[0]
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    F = np.tile(model.init_scores, (m, 1))
    if model.learning_rate != 0.0:
        for c in range(model.n_classes):
            F[:, c] += _predict_class(model.class_nodes[c], Xc,
                                      model.learning_rate)
    return _softmax(F)
