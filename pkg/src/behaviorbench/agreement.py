"""Inter-rater agreement statistics."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import DegenerateAgreement, EmptyInput

KAPPA_BANDS = (
    (0.00, "poor"),
    (0.20, "slight"),
    (0.40, "fair"),
    (0.60, "moderate"),
    (0.80, "substantial"),
)


@dataclass(frozen=True)
class RatingPair:
    """Two raters' categorical judgements over the same items."""

    rater_a: tuple
    rater_b: tuple

    def __post_init__(self):
        if len(self.rater_a) != len(self.rater_b):
            raise ValueError("rating vectors must have equal length")
        if len(self.rater_a) < 2:
            raise ValueError("need at least two rated items")

    @property
    def n(self) -> int:
        return len(self.rater_a)


def cohen_kappa(pair: RatingPair) -> float:
    """Cohen's kappa: (p_o - p_e) / (1 - p_e).

    When chance agreement is exactly 1 (both raters constant on the same
    category) kappa is defined as 1 for perfect observed agreement;
    otherwise that state is unreachable and raises DegenerateAgreement.
    """
    n = pair.n
    cats = sorted(set(pair.rater_a) | set(pair.rater_b), key=str)
    counts = {c: [0, 0] for c in cats}
    agree = 0
    for a, b in zip(pair.rater_a, pair.rater_b):
        counts[a][0] += 1
        counts[b][1] += 1
        if a == b:
            agree += 1
    p_o = agree / n
    p_e = sum((ca / n) * (cb / n) for ca, cb in counts.values())
    if p_e >= 1.0:
        if p_o == 1.0:
            return 1.0
        raise DegenerateAgreement(
            "chance agreement is 1 with imperfect observed agreement")
    return (p_o - p_e) / (1.0 - p_e)


def interpret_kappa(kappa: float) -> str:
    """Map kappa to the conventional agreement band label."""
    if not -1.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [-1, 1]")
    if kappa == 1.0:
        return "perfect"
    for upper, label in KAPPA_BANDS:
        if kappa <= upper:
            return label
    return "almost_perfect"


def mean_pairwise_kappa(raters: Sequence[Sequence]) -> float:
    """Mean Cohen's kappa over all rater pairs (multi-rater reduction)."""
    if len(raters) < 2:
        raise EmptyInput("need at least two raters")
    values = [cohen_kappa(RatingPair(tuple(a), tuple(b)))
              for a, b in combinations(raters, 2)]
    return sum(values) / len(values)
