"""Priors on the total number of species M (a positive integer).

The model is agnostic to this distribution: every downstream quantity only
needs the pmf ``q_M`` and a handful of truncated expectations.  Three
variants are provided: the 1-shifted Poisson used by default, a point mass
(useful for exact finite checks), and an arbitrary tabulated pmf.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .logmath import LOG_ZERO, ConvergenceError, DomainError, log_factorial

#: consecutive sub-tolerance terms required before a tail is declared dead
TAIL_RUN = 5


class MPrior(ABC):
    """Distribution of the species count M over {1, 2, ...}."""

    @abstractmethod
    def log_pmf(self, m: int) -> float:
        ...

    @abstractmethod
    def mode(self) -> int:
        """A point at or beyond the bulk of the mass; guards series stopping."""

    def pmf(self, m: int) -> float:
        return math.exp(self.log_pmf(m))

    def support_window(self, eps: float = 1e-15) -> tuple[int, int]:
        """A range [lo, hi] outside which the prior mass is at most eps.

        Lets expectations of bounded functions skip the negligible head of a
        large-rate prior instead of iterating from m = 1.
        """
        if self.support_max is not None:
            return 1, self.support_max
        raise NotImplementedError

    #: largest support point, or None when the support is unbounded
    support_max: int | None = None


@dataclass(frozen=True)
class OneShiftedPoisson(MPrior):
    """q_M(m) = e^{-lam} lam^{m-1} / (m-1)! for m >= 1."""

    lam: float

    def __post_init__(self):
        if self.lam <= 0.0:
            raise DomainError(f"rate must be positive, got {self.lam}")

    def log_pmf(self, m: int) -> float:
        if m < 1:
            return LOG_ZERO
        return -self.lam + (m - 1) * math.log(self.lam) - log_factorial(m - 1)

    def mode(self) -> int:
        return 1 + int(math.floor(self.lam))

    def mean(self) -> float:
        return 1.0 + self.lam

    def support_window(self, eps: float = 1e-15) -> tuple[int, int]:
        lo = 1 + int(poisson.ppf(eps, self.lam))
        hi = 1 + int(poisson.ppf(1.0 - eps, self.lam)) + 10
        return max(lo, 1), hi


@dataclass(frozen=True)
class PointMass(MPrior):
    """All mass on a single species count m0 >= 1."""

    m0: int

    def __post_init__(self):
        if self.m0 < 1:
            raise DomainError(f"point mass must sit on m >= 1, got {self.m0}")
        object.__setattr__(self, "support_max", self.m0)

    def log_pmf(self, m: int) -> float:
        return 0.0 if m == self.m0 else LOG_ZERO

    def mode(self) -> int:
        return self.m0


class TabulatedPrior(MPrior):
    """Finite-support pmf given as probabilities for m = 1, 2, ..., len(probs)."""

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise DomainError("probs must be a nonempty 1-D sequence")
        if np.any(probs < 0.0):
            raise DomainError("probabilities must be nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"probabilities must sum to 1, got {total!r}")
        self.probs = probs
        self.support_max = int(probs.size)

    def log_pmf(self, m: int) -> float:
        if m < 1 or m > self.probs.size:
            return LOG_ZERO
        p = self.probs[m - 1]
        return math.log(p) if p > 0.0 else LOG_ZERO

    def mode(self) -> int:
        return 1 + int(np.argmax(self.probs))


def expectation(prior: MPrior, f, *, tol: float = 1e-12,
                max_terms: int = 10**6) -> float:
    """E[f(M)] for a nonnegative f bounded by 1, by truncated summation.

    The sum runs over the prior's effective support window (mass outside is
    negligible relative to ``tol``) and additionally stops early once
    ``TAIL_RUN`` consecutive terms fall below ``tol`` times the partial sum
    with the index past the prior's mode, the same stopping rule as the
    V-coefficient series.
    """
    lo, hi = prior.support_window(min(tol * 1e-3, 1e-15))
    if hi - lo + 1 > max_terms:
        raise ConvergenceError(
            f"expectation support window of {hi - lo + 1} terms exceeds the "
            f"cap of {max_terms}")
    total = 0.0
    run = 0
    guard = prior.mode()
    for m in range(lo, hi + 1):
        term = prior.pmf(m) * f(m)
        total += term
        if m > guard and term <= tol * total:
            run += 1
            if run >= TAIL_RUN:
                return total
        else:
            run = 0
    return total


def expected_inverse_m(prior: MPrior, **kwargs) -> float:
    """E(1/M); closed form (1 - e^{-lam})/lam under the 1-shifted Poisson."""
    if isinstance(prior, OneShiftedPoisson):
        lam = prior.lam
        return -math.expm1(-lam) / lam
    return expectation(prior, lambda m: 1.0 / m, **kwargs)


def expected_inv_one_plus_gamma_m(prior: MPrior, gamma: float, **kwargs) -> float:
    """E(1/(1 + gamma*M)) by truncated series."""
    if gamma < 0.0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    return expectation(prior, lambda m: 1.0 / (1.0 + gamma * m), **kwargs)
