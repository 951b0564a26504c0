"""All-relevant feature selection with shadow features.

Each run merges the still-active features (undecided plus already
Confirmed; Rejected ones are excluded from the system) with freshly
shuffled shadow copies of them, fits a random forest, and converts
per-tree impurity importances into Z-scores (mean over trees divided by
their standard deviation). A feature scores a hit when its Z exceeds the
best shadow Z for that run. After every run a two-sided exact binomial
test (success probability one half) promotes undecided features with
significantly many hits to Confirmed (kept, no longer tested) and drops
features with significantly few to Rejected. Whatever is still undecided
at max_runs stays Tentative.

Two guards keep the null behavior honest, matching the classical
implementations: the shadow set is padded with extra shuffled copies until
it has at least MIN_SHADOWS columns (a max over one or two shadows is too
weak a bar), and the per-run test is Bonferroni-adjusted across the
matrix's feature count (without it the best spuriously label-correlated
noise column random-walks to a false Confirmed under sequential testing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .datamodel import FeatureMatrix
from .errors import EmptySelection, InvalidLabels
from .learners._kernels import bin_columns
from .learners.forest import fit_forest_prebinned

CONFIRMED = "Confirmed"
TENTATIVE = "Tentative"
REJECTED = "Rejected"

MIN_SHADOWS = 5

# Internal forest for importance scoring; modest trees keep a full
# 100-run selection fast while leaving Z-scores stable.
FOREST_DEFAULTS = {"n_trees": 30, "max_depth": 6, "mtry": "sqrt", "min_leaf": 1}


@dataclass(frozen=True)
class BorutaConfig:
    alpha: float = 0.01
    max_runs: int = 100
    seed: int = 0
    forest: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.max_runs < 1:
            raise ValueError("max_runs must be at least 1")
        merged = dict(FOREST_DEFAULTS)
        unknown = set(self.forest) - set(merged)
        if unknown:
            raise ValueError(f"unknown forest parameters {sorted(unknown)}")
        merged.update(self.forest)
        object.__setattr__(self, "forest", merged)


@dataclass(frozen=True)
class FeatureDecision:
    name: str
    decision: str
    hit_count: int
    runs_participated: int


@dataclass(frozen=True)
class BorutaReport:
    decisions: tuple           # FeatureDecision per input column, in order
    max_shadow_trace: tuple    # best shadow Z per run
    n_runs: int
    alpha: float
    seed: int

    def __post_init__(self):
        for d in self.decisions:
            if d.hit_count > d.runs_participated:
                raise ValueError("hit_count cannot exceed runs_participated")

    def names_with(self, decision: str) -> tuple:
        return tuple(d.name for d in self.decisions if d.decision == decision)

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "seed": self.seed,
            "n_runs": self.n_runs,
            "max_shadow_trace": list(self.max_shadow_trace),
            "features": [
                {"name": d.name, "decision": d.decision, "hits": d.hit_count,
                 "runs": d.runs_participated} for d in self.decisions],
        }


def binomial_two_sided(hits: int, runs: int) -> float:
    """Exact two-sided binomial p-value at success probability 0.5."""
    if runs <= 0:
        return 1.0
    denom = 1 << runs
    low = sum(math.comb(runs, i) for i in range(0, hits + 1))
    high = sum(math.comb(runs, i) for i in range(hits, runs + 1))
    return min(1.0, 2.0 * min(low / denom, high / denom))


def _z_scores(importances: np.ndarray) -> np.ndarray:
    """Per-column mean/sd over trees; a zero sd with nonzero mean is +inf."""
    mean = importances.mean(axis=0)
    sd = importances.std(axis=0, ddof=1)
    z = np.zeros(importances.shape[1])
    nonzero = sd > 0
    z[nonzero] = mean[nonzero] / sd[nonzero]
    z[(~nonzero) & (mean > 0)] = np.inf
    return z


def boruta_select(matrix: FeatureMatrix, cfg: BorutaConfig) -> BorutaReport:
    """Run the shadow-feature selection loop over a complete matrix."""
    X = np.asarray(matrix.values, dtype=np.float64)
    y = np.asarray(matrix.labels, dtype=np.int64)
    n, p = X.shape
    if p < 2:
        raise ValueError("need at least two features")
    if np.unique(y).size < 2:
        raise InvalidLabels("labels are constant")

    rng = np.random.default_rng(cfg.seed)
    fp = cfg.forest
    status = np.zeros(p, dtype=np.int8)   # 0 undecided, 1 confirmed, -1 rejected
    hits = np.zeros(p, dtype=np.int64)
    runs_part = np.zeros(p, dtype=np.int64)
    trace = []

    # Shadows are permutations of real columns, so binning once covers them.
    binned, edges, n_edges = bin_columns(X)

    run = 0
    while run < cfg.max_runs and (status == 0).any():
        run += 1
        undecided = np.where(status == 0)[0]
        confirmed = np.where(status == 1)[0]
        active = np.concatenate([confirmed, undecided])
        shadow_src = active
        while shadow_src.size < MIN_SHADOWS:
            shadow_src = np.concatenate([shadow_src, active])
        shadow_bins = np.empty((n, shadow_src.size), dtype=np.uint8)
        for s, col in enumerate(shadow_src):
            shadow_bins[:, s] = binned[rng.permutation(n), col]
        design = np.ascontiguousarray(
            np.hstack([binned[:, active], shadow_bins]))
        keep = np.concatenate([active, shadow_src])
        design_edges = np.ascontiguousarray(edges[keep])
        design_n_edges = np.ascontiguousarray(n_edges[keep])
        forest_seed = int(rng.integers(0, 2**31 - 1))
        model = fit_forest_prebinned(
            design, design_edges, design_n_edges, y, matrix.class_level,
            int(fp["n_trees"]), fp["mtry"], fp["max_depth"],
            int(fp["min_leaf"]), forest_seed)
        z = _z_scores(model.importances)
        n_real = active.size
        mzsa = float(z[n_real:].max())
        trace.append(mzsa)

        z_undecided = z[confirmed.size:n_real]
        hit_mask = z_undecided > mzsa
        hits[undecided[hit_mask]] += 1
        runs_part[undecided] += 1

        threshold = cfg.alpha / p
        for u in undecided:
            pval = binomial_two_sided(int(hits[u]), int(runs_part[u]))
            if pval < threshold:
                status[u] = 1 if hits[u] > runs_part[u] / 2 else -1

    names = matrix.column_names
    decisions = []
    for j in range(p):
        label = {1: CONFIRMED, 0: TENTATIVE, -1: REJECTED}[int(status[j])]
        decisions.append(FeatureDecision(
            name=names[j], decision=label,
            hit_count=int(hits[j]), runs_participated=int(runs_part[j])))
    return BorutaReport(decisions=tuple(decisions),
                        max_shadow_trace=tuple(trace), n_runs=run,
                        alpha=cfg.alpha, seed=cfg.seed)


def apply_selection(matrix: FeatureMatrix, report: BorutaReport,
                    keep_tentative: bool = False) -> FeatureMatrix:
    """Drop Rejected (and optionally Tentative) columns, preserving order."""
    if tuple(d.name for d in report.decisions) != matrix.column_names:
        raise ValueError("report does not match the matrix columns")
    wanted = {CONFIRMED} | ({TENTATIVE} if keep_tentative else set())
    keep = [j for j, d in enumerate(report.decisions) if d.decision in wanted]
    if not keep:
        raise EmptySelection("no columns retained by the selection")
    return matrix.select_columns(keep)
