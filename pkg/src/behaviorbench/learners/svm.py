"""Soft-margin kernel SVM solved by SMO, one-vs-one for multiclass.

Features are z-scored inside fit. Class scores are smoothed pairwise votes:
each pair contributes sigmoid(decision) to its positive class and the
complement to the other, so scores are monotone in the margins, continuous,
and sum to 1 across classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..errors import NumericError
from . import _kernels as k

SUPPORT_EPS = 1e-10


@dataclass
class PairMachine:
    pos_class: int
    neg_class: int
    support_vectors: np.ndarray   # standardized rows
    dual_coef: np.ndarray         # alpha_s * y_s
    intercept: float
    iterations: int


@dataclass
class SvmModel:
    n_classes: int
    kernel: str
    gamma: float
    mean: np.ndarray
    scale: np.ndarray
    pairs: list


def _kernel_matrix(kind: str, gamma: float, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return A @ B.T
    if kind == "rbf":
        aa = np.sum(A * A, axis=1)[:, None]
        bb = np.sum(B * B, axis=1)[None, :]
        d2 = np.maximum(aa + bb - 2.0 * (A @ B.T), 0.0)
        return np.exp(-gamma * d2)
    raise ValueError(f"unknown kernel {kind!r}")


def fit_svm(X: np.ndarray, y: np.ndarray, n_classes: int, kernel: str,
            gamma, C: float, tol: float, max_iter: int) -> SvmModel:
    n, p = X.shape
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0, 1.0, scale)
    Z = (X - mean) / scale
    if not np.all(np.isfinite(Z)):
        raise NumericError("non-finite values after standardization")
    g = (1.0 / p) if gamma == "scale" else float(gamma)

    pairs = []
    present = np.unique(y)
    for a, b in combinations(sorted(int(c) for c in present), 2):
        sel = np.where((y == a) | (y == b))[0]
        Zs = np.ascontiguousarray(Z[sel])
        ys = np.where(y[sel] == a, 1.0, -1.0)
        K = _kernel_matrix(kernel, g, Zs, Zs)
        alpha, intercept, iters = k.smo_solve(K, ys, C, tol, max_iter)
        sv = alpha > SUPPORT_EPS
        pairs.append(PairMachine(
            pos_class=a, neg_class=b,
            support_vectors=Zs[sv].copy(),
            dual_coef=(alpha[sv] * ys[sv]).copy(),
            intercept=float(intercept),
            iterations=int(iters)))
    return SvmModel(n_classes=n_classes, kernel=kernel, gamma=g,
                    mean=mean, scale=scale, pairs=pairs)


def svm_decision_values(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Raw pairwise decision values, one column per trained pair."""
    Z = (X - model.mean) / model.scale
    out = np.empty((X.shape[0], len(model.pairs)))
    for j, pair in enumerate(model.pairs):
        if pair.support_vectors.shape[0] == 0:
            out[:, j] = pair.intercept
            continue
        K = _kernel_matrix(model.kernel, model.gamma, Z, pair.support_vectors)
        out[:, j] = K @ pair.dual_coef + pair.intercept
    return out
