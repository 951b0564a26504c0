"""Stratified partitioning, confusion matrices, the six reported metrics,
and fold-wise cross-validation.

Multiclass metrics are one-vs-rest, macro-averaged; a class with an empty
denominator contributes 0 for precision/recall (documented convention), and
the reported F1 is the harmonic mean of the macro precision and macro
recall. AUC is the rank-based (Mann-Whitney) statistic with ties counted
as half, macro-averaged over classes present in the labels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .datamodel import FeatureMatrix
from .errors import EmptyInput, FoldError, StratificationError
from .learners import LearnerSpec, TrainedModel, fit, predict_scores
from .stats import aggregate_mean_sd

METRIC_FIELDS = ("accuracy", "precision", "recall_sensitivity",
                 "specificity", "f1", "auc")


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall_sensitivity: float
    specificity: float
    f1: float
    auc: float

    def __post_init__(self):
        for name in METRIC_FIELDS:
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0 + 1e-12):
                raise ValueError(f"{name} = {v} outside [0, 1]")

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_FIELDS}


@dataclass(frozen=True)
class FoldPlan:
    """k disjoint row-index folds covering every row, class-balanced."""

    k: int
    folds: tuple
    n_rows: int
    stratified: bool
    seed: int

    def __post_init__(self):
        all_idx = sorted(i for fold in self.folds for i in fold)
        if all_idx != list(range(self.n_rows)):
            raise FoldError("folds must partition the row indices exactly")
        if len(self.folds) != self.k:
            raise FoldError("fold count does not match k")

    def train_indices(self, fold: int) -> np.ndarray:
        test = set(self.folds[fold])
        return np.array([i for i in range(self.n_rows) if i not in test])


def stratified_split(matrix: FeatureMatrix, ratio: float = 0.8,
                     seed: int = 0):
    """Class-stratified train/test partition.

    Per-class train counts are round(ratio * count), kept inside
    [1, count-1] so both sides stay populated.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie strictly between 0 and 1")
    labels = matrix.labels
    rng = np.random.default_rng(seed)
    train_idx: list = []
    test_idx: list = []
    for c in np.unique(labels):
        rows = np.where(labels == c)[0]
        if rows.size < 2:
            raise StratificationError(f"class {c} has fewer than 2 rows")
        n_train = int(round(ratio * rows.size))
        n_train = min(max(n_train, 1), rows.size - 1)
        perm = rng.permutation(rows)
        train_idx.extend(perm[:n_train])
        test_idx.extend(perm[n_train:])
    train_idx.sort()
    test_idx.sort()
    return matrix.select_rows(train_idx), matrix.select_rows(test_idx)


def kfold_plan(matrix: FeatureMatrix, k: int = 10, seed: int = 0) -> FoldPlan:
    """Stratified k folds: shuffle within class, deal round-robin."""
    labels = matrix.labels
    n = labels.shape[0]
    if k < 2 or k > n:
        raise FoldError(f"k={k} invalid for {n} rows")
    counts = np.bincount(labels, minlength=matrix.class_level)
    present = counts[counts > 0]
    if present.min() < k:
        raise FoldError(
            f"k={k} exceeds the smallest class count ({int(present.min())})")
    rng = np.random.default_rng(seed)
    folds: list = [[] for _ in range(k)]
    cursor = 0
    for c in np.unique(labels):
        rows = rng.permutation(np.where(labels == c)[0])
        for r in rows:
            folds[cursor % k].append(int(r))
            cursor += 1
    return FoldPlan(k=k, folds=tuple(tuple(sorted(f)) for f in folds),
                    n_rows=n, stratified=True, seed=seed)


def confusion_matrix(true_labels, predicted_labels, n_classes: int) -> np.ndarray:
    """c x c counts; rows are true classes, columns predictions."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(np.asarray(true_labels), np.asarray(predicted_labels)):
        cm[int(t), int(p)] += 1
    return cm


def compute_metrics(cm: np.ndarray, auc: float = 0.0) -> MetricSet:
    """Macro one-vs-rest metrics from a confusion matrix.

    AUC needs the raw scores, so the caller supplies it (auc_ovr).
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = cm.sum()
    if total <= 0:
        raise EmptyInput("empty confusion matrix")
    c = cm.shape[0]
    precisions, recalls, specificities = [], [], []
    for i in range(c):
        tp = cm[i, i]
        fn = cm[i, :].sum() - tp
        fp = cm[:, i].sum() - tp
        tn = total - tp - fn - fp
        precisions.append(tp / (tp + fp) if tp + fp > 0 else 0.0)
        recalls.append(tp / (tp + fn) if tp + fn > 0 else 0.0)
        specificities.append(tn / (tn + fp) if tn + fp > 0 else 0.0)
    precision = float(np.mean(precisions))
    recall = float(np.mean(recalls))
    specificity = float(np.mean(specificities))
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return MetricSet(accuracy=float(np.trace(cm) / total),
                     precision=precision, recall_sensitivity=recall,
                     specificity=specificity, f1=f1, auc=auc)


def _rank_average(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0])
    sorted_vals = values[order]
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def binary_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Mann-Whitney AUC with ties counted 0.5."""
    pos = np.asarray(positive, dtype=bool)
    n_pos = int(pos.sum())
    n_neg = pos.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise EmptyInput("need at least one positive and one negative")
    ranks = _rank_average(np.asarray(scores, dtype=float))
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auc_ovr(scores: np.ndarray, labels: np.ndarray) -> float:
    """Macro average of one-vs-rest AUCs over classes present in labels."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_classes = scores.shape[1]
    parts = []
    for c in range(n_classes):
        pos = labels == c
        n_pos = int(pos.sum())
        if n_pos == 0:
            warnings.warn(f"class {c} absent from labels; excluded from AUC")
            continue
        if n_pos == labels.shape[0]:
            warnings.warn(f"class {c} has no negatives; excluded from AUC")
            continue
        parts.append(binary_auc(scores[:, c], pos))
    if not parts:
        raise EmptyInput("no class with both positives and negatives")
    return float(np.mean(parts))


@dataclass(frozen=True)
class RunResult:
    """One cross-validated cell: per-fold metrics, their aggregate, and the
    summed confusion matrix."""

    fold_metrics: tuple
    mean: MetricSet
    sd: MetricSet
    confusion: np.ndarray
    n_rows: int
    selected_counts: Optional[tuple] = None
    notes: tuple = ()

    def as_dict(self) -> dict:
        return {
            "folds": [m.as_dict() for m in self.fold_metrics],
            "mean": self.mean.as_dict(),
            "sd": self.sd.as_dict(),
            "confusion": self.confusion.tolist(),
            "n_rows": self.n_rows,
            "selected_counts": (list(self.selected_counts)
                                if self.selected_counts is not None else None),
            "notes": list(self.notes),
        }


def _aggregate_metricsets(metric_sets):
    means = {}
    sds = {}
    for name in METRIC_FIELDS:
        mean, sd = aggregate_mean_sd([getattr(m, name) for m in metric_sets])
        means[name] = min(mean, 1.0)
        sds[name] = min(sd, 1.0)
    return MetricSet(**means), MetricSet(**sds)


def cross_validate(spec: LearnerSpec, matrix: FeatureMatrix, plan: FoldPlan,
                   fold_selector: Optional[Callable] = None) -> RunResult:
    """Fit on k-1 folds, evaluate on the held-out fold, aggregate.

    `fold_selector(train_matrix, fold_index)` may return column indices to
    keep; it sees only the fold's training rows, so any feature selection
    stays inside the fold. Learner errors propagate tagged with the fold.
    """
    if plan.n_rows != matrix.n_rows:
        raise FoldError("plan does not match the matrix row count")
    fold_metrics = []
    selected_counts = []
    notes: list = []
    total_cm = np.zeros((matrix.class_level, matrix.class_level), dtype=np.int64)
    for f in range(plan.k):
        test_idx = np.array(plan.folds[f])
        train_idx = plan.train_indices(f)
        assert not set(test_idx) & set(train_idx)
        train = matrix.select_rows(train_idx)
        test = matrix.select_rows(test_idx)
        if fold_selector is not None:
            keep = fold_selector(train, f)
            if keep is not None:
                train = train.select_columns(keep)
                test = test.select_columns(keep)
            selected_counts.append(len(train.column_names))
        try:
            model = fit(spec, train)
            scores = predict_scores(model, test)
        except Exception as exc:
            exc.args = (f"fold {f}: {exc}",)
            raise
        predicted = np.argmax(scores, axis=1)
        cm = confusion_matrix(test.labels, predicted, matrix.class_level)
        total_cm += cm
        fold_metrics.append(compute_metrics(cm, auc=auc_ovr(scores, test.labels)))
    mean, sd = _aggregate_metricsets(fold_metrics)
    return RunResult(
        fold_metrics=tuple(fold_metrics), mean=mean, sd=sd,
        confusion=total_cm, n_rows=matrix.n_rows,
        selected_counts=tuple(selected_counts) if fold_selector else None,
        notes=tuple(notes))
