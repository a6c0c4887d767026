"""Frequentist one-step shared-species discovery estimators and the exact
discovery probability for synthetic populations with known proportions.

The estimators generalize Good-Turing to two groups via shared-singleton
statistics: f_{1+} counts species seen exactly once in group 1 and at least
once in group 2, f_{+1} is symmetric, and f_{11} counts species seen exactly
once in both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .logmath import DomainError


@dataclass(frozen=True)
class FrequencyCounts:
    f_1plus: int
    f_plus1: int
    f_11: int

    def __post_init__(self):
        if min(self.f_1plus, self.f_plus1, self.f_11) < 0:
            raise DomainError("frequency counts must be nonnegative")
        if self.f_11 > min(self.f_1plus, self.f_plus1):
            raise DomainError("f_11 cannot exceed f_1+ or f_+1")


@dataclass(frozen=True)
class FlaggedProbability:
    """A probability estimate that may overflow 1; flagged, never clamped."""

    value: float

    @property
    def exceeds_one(self) -> bool:
        return self.value > 1.0


def frequency_counts(table) -> FrequencyCounts:
    c1 = np.asarray(table.counts1)
    c2 = np.asarray(table.counts2)
    return FrequencyCounts(
        f_1plus=int(np.count_nonzero((c1 == 1) & (c2 >= 1))),
        f_plus1=int(np.count_nonzero((c1 >= 1) & (c2 == 1))),
        f_11=int(np.count_nonzero((c1 == 1) & (c2 == 1))),
    )


def yue_estimator(counts: FrequencyCounts, n1: int, n2: int) -> FlaggedProbability:
    """(f_1+ + f_+1 + f_11) / n1; defined only for equal sample sizes."""
    if n1 != n2:
        raise DomainError(f"estimator requires n1 = n2, got ({n1}, {n2})")
    if n1 < 1:
        raise DomainError("need at least one observation")
    return FlaggedProbability((counts.f_1plus + counts.f_plus1 + counts.f_11) / n1)


def chao_shared_estimator(counts: FrequencyCounts, n1: int, n2: int) -> FlaggedProbability:
    """f_1+ / n1 + f_+1 / n2 + f_11 / (n1 n2)."""
    if n1 < 1 or n2 < 1:
        raise DomainError("need at least one observation per group")
    return FlaggedProbability(counts.f_1plus / n1 + counts.f_plus1 / n2
                              + counts.f_11 / (n1 * n2))


def true_discovery_prob(p1, p2, sample_counts1, sample_counts2) -> float:
    """Exact probability that the next pair of draws reveals a new shared
    species, for a population with known per-species proportions.

    sum_m [ p1m p2m 1(unseen in both) + p1m 1(unseen in 1, seen in 2)
            + p2m 1(seen in 1, unseen in 2) ]
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    c1 = np.asarray(sample_counts1)
    c2 = np.asarray(sample_counts2)
    if not (p1.shape == p2.shape == c1.shape == c2.shape):
        raise DomainError("population and sample arrays must share one length")
    unseen1 = c1 == 0
    unseen2 = c2 == 0
    both_new = float(np.sum(p1 * p2 * (unseen1 & unseen2)))
    new_in_1 = float(np.sum(p1 * (unseen1 & ~unseen2)))
    new_in_2 = float(np.sum(p2 * (~unseen1 & unseen2)))
    return both_new + new_in_1 + new_in_2
