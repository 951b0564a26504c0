"""Random forest classifier: bootstrap resamples, random split subsets, gini."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as k


@dataclass
class ForestModel:
    n_trees: int
    n_classes: int
    nodes: tuple              # (feature, threshold, left, right, leaf_class, offsets)
    importances: np.ndarray   # per-tree impurity decrease, (n_trees, p)
    oob_masks: np.ndarray     # (n_trees, n_train) bool, True = row left out
    inbag_unique_fraction: np.ndarray  # fraction of distinct rows per bootstrap


def resolve_mtry(mtry, p: int) -> int:
    if mtry == "sqrt":
        return max(1, int(math.isqrt(p)))
    m = int(mtry)
    if m < 1:
        raise ValueError("mtry must be at least 1")
    return min(m, p)


def fit_forest_prebinned(binned: np.ndarray, edges: np.ndarray,
                         n_edges: np.ndarray, y: np.ndarray, n_classes: int,
                         n_trees: int, mtry, max_depth, min_leaf: int,
                         seed: int) -> ForestModel:
    """Forest fit over already-binned columns (importance-only callers can
    skip re-binning shuffled copies)."""
    n, p = binned.shape
    rng = np.random.default_rng(seed)
    boot = rng.integers(0, n, size=(n_trees, n), dtype=np.int64)
    tree_seeds = rng.integers(0, 2**31 - 1, size=n_trees, dtype=np.int64)

    depth_cap = np.int64(2**31) if max_depth is None else np.int64(max_depth)
    nodes = k.build_cls_forest(
        binned, y.astype(np.int64), n_classes, boot,
        resolve_mtry(mtry, p), depth_cap, np.int64(min_leaf),
        n_edges, edges, tree_seeds)

    inbag = np.zeros((n_trees, n), dtype=bool)
    for t in range(n_trees):
        inbag[t, boot[t]] = True
    return ForestModel(
        n_trees=n_trees, n_classes=n_classes,
        nodes=nodes[:6], importances=nodes[6],
        oob_masks=~inbag,
        inbag_unique_fraction=inbag.mean(axis=1))


def fit_forest(X: np.ndarray, y: np.ndarray, n_classes: int, n_trees: int,
               mtry, max_depth, min_leaf: int, seed: int) -> ForestModel:
    binned, edges, n_edges = k.bin_columns(X)
    return fit_forest_prebinned(binned, edges, n_edges, y, n_classes,
                                n_trees, mtry, max_depth, min_leaf, seed)


def forest_scores(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Vote shares over trees; rows sum to 1."""
    feature, threshold, left, right, leaf_class, offsets = model.nodes
    votes = k.predict_cls_forest(np.ascontiguousarray(X, dtype=np.float64),
                                 feature, threshold, left, right, leaf_class,
                                 offsets, model.n_classes)
    return votes / model.n_trees
