"""Two-stage accuracy analysis: one-way ANOVA with Bonferroni post-hoc
within classes, then a pooled balanced full-factorial ANOVA with partial
eta squared.

The factorial stage covers four factors (dataset environment 0/1, feature
selection 0/1, classifier 1-4, class 1-3); with the three behavior-category
variants as replicates that is a 2x2x4x3 design with 3 replicates per cell,
144 observations and 96 error degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .errors import DegenerateAnova, DegenerateEffect, EmptyInput, UnbalancedDesign

FACTOR_NAMES = ("dataset", "feature_selection", "classifier", "class")

_STARS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


def aggregate_mean_sd(values: Sequence[float]):
    """Arithmetic mean and sample (n-1) standard deviation.

    A single value reports zero spread.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise EmptyInput("no values to aggregate")
    n = len(vals)
    mean = sum(vals) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var)


def f_tail(f_value: float, df1: int, df2: int) -> float:
    """Upper-tail F probability via the regularized incomplete beta."""
    if math.isinf(f_value):
        return 0.0
    if f_value <= 0:
        return 1.0
    x = df2 / (df2 + df1 * f_value)
    return float(special.betainc(df2 / 2.0, df1 / 2.0, x))


def t_tail_two_sided(t_value: float, df: int) -> float:
    if math.isinf(t_value):
        return 0.0
    x = df / (df + t_value * t_value)
    return float(special.betainc(df / 2.0, 0.5, x))


@dataclass(frozen=True)
class OneWayResult:
    f_value: float
    df_between: int
    df_within: int
    p_value: float
    ss_between: float
    ss_within: float


def _check_groups(groups) -> list:
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    out = []
    for g in groups:
        vals = [float(v) for v in g]
        if len(vals) < 2:
            raise ValueError("every group needs at least two values")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("group values must be finite")
        out.append(vals)
    return out


def one_way_anova(groups) -> OneWayResult:
    """Classic one-way decomposition: F = MS_between / MS_within."""
    gs = _check_groups(groups)
    n = sum(len(g) for g in gs)
    grand = sum(sum(g) for g in gs) / n
    ssb = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in gs)
    ssw = sum(sum((v - sum(g) / len(g)) ** 2 for v in g) for g in gs)
    df_b = len(gs) - 1
    df_w = n - len(gs)
    if ssw == 0 and ssb == 0:
        raise DegenerateAnova("no variance between or within groups")
    if ssw == 0:
        return OneWayResult(math.inf, df_b, df_w, 0.0, ssb, ssw)
    f = (ssb / df_b) / (ssw / df_w)
    return OneWayResult(f, df_b, df_w, f_tail(f, df_b, df_w), ssb, ssw)


@dataclass(frozen=True)
class PairwiseComparison:
    group_i: int
    group_j: int
    mean_i: float
    mean_j: float
    t_value: float
    df: int
    p_raw: float
    p_adjusted: float
    significant: bool


def bonferroni_posthoc(groups, alpha: float = 0.05):
    """All pairwise pooled-variance t tests at the alpha/m threshold."""
    gs = _check_groups(groups)
    m = len(gs) * (len(gs) - 1) // 2
    out = []
    for i, j in combinations(range(len(gs)), 2):
        a, b = gs[i], gs[j]
        na, nb = len(a), len(b)
        ma, mb = sum(a) / na, sum(b) / nb
        ssa = sum((v - ma) ** 2 for v in a)
        ssb = sum((v - mb) ** 2 for v in b)
        df = na + nb - 2
        sp2 = (ssa + ssb) / df
        se = math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
        if se == 0:
            t = 0.0 if ma == mb else math.copysign(math.inf, ma - mb)
        else:
            t = (ma - mb) / se
        p = t_tail_two_sided(abs(t), df)
        out.append(PairwiseComparison(
            group_i=i, group_j=j, mean_i=ma, mean_j=mb, t_value=t, df=df,
            p_raw=p, p_adjusted=min(1.0, m * p), significant=p < alpha / m))
    return out


# ---------------------------------------------------------------------------
# Balanced full factorial
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactorialObservation:
    env: int
    fs: int
    learner: int
    class_code: int
    replicate: int
    response: float

    def factor_value(self, factor: str) -> int:
        return {"dataset": self.env, "feature_selection": self.fs,
                "classifier": self.learner, "class": self.class_code}[factor]


@dataclass(frozen=True)
class FactorialDesign:
    observations: tuple

    def __post_init__(self):
        if not self.observations:
            raise EmptyInput("empty design")
        counts: dict = {}
        for obs in self.observations:
            key = (obs.env, obs.fs, obs.learner, obs.class_code)
            counts[key] = counts.get(key, 0) + 1
        levels = self.levels()
        expected_cells = 1
        for vals in levels.values():
            expected_cells *= len(vals)
        if len(counts) != expected_cells:
            raise UnbalancedDesign(
                f"{len(counts)} cells observed, full crossing needs {expected_cells}")
        reps = set(counts.values())
        if len(reps) != 1:
            raise UnbalancedDesign(f"unequal replicate counts per cell: {sorted(reps)}")
        if reps.pop() < 2:
            raise UnbalancedDesign("need at least 2 replicates per cell")

    def levels(self) -> dict:
        out = {}
        for f in FACTOR_NAMES:
            out[f] = tuple(sorted({obs.factor_value(f) for obs in self.observations}))
        return out

    @property
    def n(self) -> int:
        return len(self.observations)


@dataclass(frozen=True)
class AnovaRow:
    effect: str
    df: int
    ss: float
    f_value: Optional[float]
    p_value: Optional[float]
    partial_eta_sq: Optional[float]


def partial_eta_squared(ss_effect: float, ss_error: float) -> float:
    if ss_effect < 0 or ss_error < 0:
        raise ValueError("sums of squares must be non-negative")
    if ss_effect == 0 and ss_error == 0:
        raise DegenerateEffect("effect and error sums of squares are both zero")
    return ss_effect / (ss_effect + ss_error)


def effect_order():
    """All 15 effects in Table-style order: mains, then higher interactions."""
    out = []
    for size in range(1, len(FACTOR_NAMES) + 1):
        for combo in combinations(range(len(FACTOR_NAMES)), size):
            out.append(tuple(FACTOR_NAMES[i] for i in combo))
    return out


def factorial_anova(design: FactorialDesign):
    """Full factorial decomposition of a balanced design.

    Returns the 15 effect rows in effect_order() followed by the error row.
    Balanced data makes all sums-of-squares types coincide, so effects are
    computed from marginal means by inclusion-exclusion.
    """
    obs = design.observations
    n = design.n
    y = np.array([o.response for o in obs])
    grand = y.mean()
    levels = design.levels()

    # marginal means for every factor subset, keyed by the subset
    def margin_means(subset):
        sums: dict = {}
        counts: dict = {}
        for o in obs:
            key = tuple(o.factor_value(f) for f in subset)
            sums[key] = sums.get(key, 0.0) + o.response
            counts[key] = counts.get(key, 0) + 1
        return {k: sums[k] / counts[k] for k in sums}

    means = {(): {(): grand}}
    for subset in effect_order():
        means[subset] = margin_means(subset)

    rows = []
    for subset in effect_order():
        cells = list(product(*(levels[f] for f in subset)))
        n_per_cell = n
        for f in subset:
            n_per_cell //= len(levels[f])
        ss = 0.0
        for cell in cells:
            effect = 0.0
            for r in range(len(subset) + 1):
                for sub_idx in combinations(range(len(subset)), r):
                    t = tuple(subset[i] for i in sub_idx)
                    key = tuple(cell[i] for i in sub_idx)
                    sign = (-1) ** (len(subset) - r)
                    effect += sign * means[t][key]
            ss += n_per_cell * effect * effect
        df = 1
        for f in subset:
            df *= len(levels[f]) - 1
        rows.append((subset, df, ss))

    # error: within-cell spread around the full-cell means
    full = means[effect_order()[-1]]
    ss_err = 0.0
    for o in obs:
        cell_mean = full[tuple(o.factor_value(f) for f in FACTOR_NAMES)]
        ss_err += (o.response - cell_mean) ** 2
    n_cells = 1
    for vals in levels.values():
        n_cells *= len(vals)
    df_err = n - n_cells

    out = []
    ms_err = ss_err / df_err if df_err > 0 else 0.0
    for subset, df, ss in rows:
        name = "*".join(subset)
        if ms_err > 0:
            f_value = (ss / df) / ms_err
            p = f_tail(f_value, df, df_err)
        else:
            f_value = math.inf if ss > 0 else 0.0
            p = 0.0 if ss > 0 else 1.0
        eta = partial_eta_squared(ss, ss_err) if (ss > 0 or ss_err > 0) else 0.0
        out.append(AnovaRow(effect=name, df=df, ss=ss, f_value=f_value,
                            p_value=p, partial_eta_sq=eta))
    out.append(AnovaRow(effect="error", df=df_err, ss=ss_err,
                        f_value=None, p_value=None, partial_eta_sq=None))
    return out


def significance_stars(p: Optional[float]) -> str:
    if p is None:
        return ""
    for cut, stars in _STARS:
        if p < cut:
            return stars
    return ""


def render_anova_table(rows) -> str:
    """Aligned text table: effect, df, starred F, partial eta squared."""
    header = f"{'Factors':<58}{'df':>4}  {'F-value':>12}  {'eta^2':>6}"
    lines = [header, "-" * len(header)]
    for row in rows:
        if row.f_value is None:
            f_txt, eta_txt = "", ""
        else:
            f_txt = f"{row.f_value:.2f}{significance_stars(row.p_value)}"
            eta_txt = f"{row.partial_eta_sq:.2f}"
        name = row.effect.replace("*", " * ").replace("_", " ").title() \
            if row.effect != "error" else "Error"
        lines.append(f"{name:<58}{row.df:>4}  {f_txt:>12}  {eta_txt:>6}")
    return "\n".join(lines)


def one_way_from_factorial(design: FactorialDesign, factor: str) -> OneWayResult:
    """One-way ANOVA over a single factor of a design (consistency helper)."""
    groups: dict = {}
    for o in design.observations:
        groups.setdefault(o.factor_value(factor), []).append(o.response)
    return one_way_anova([groups[k] for k in sorted(groups)])
