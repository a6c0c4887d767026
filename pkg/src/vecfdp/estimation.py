"""Diversity indices from observed abundances and the two-step,
diversity-based method-of-moments fit of the model parameters.

Step one estimates the sums of squared proportions (Simpson indices) per
group and the cross-product sum from the data.  Step two inverts the
closed-form prior moments

    E(sum_m w_{1,m} w_{2,m})  = E(1/M)                      -> lambda
    E(sum_m w_{j,m}^2)        = (1+g_j) E(1/(1+g_j M))      -> gamma_j

The first equation involves only lambda; given lambda the two gamma
conditions decouple and can be solved independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .logmath import DomainError
from .mprior import (
    MPrior,
    OneShiftedPoisson,
    expected_inv_one_plus_gamma_m,
    expected_inverse_m,
)
from .vcoef import ModelParams


class MomentRangeError(ValueError):
    """A sample moment falls outside the range attainable by the model."""


@dataclass(frozen=True)
class DiversityStats:
    """Per-group Simpson estimates, the cross-product sum, and Morisita."""

    ss1: float
    ss2: float
    cp: float
    mode: str

    @property
    def morisita(self) -> float:
        return 2.0 * self.cp / (self.ss1 + self.ss2)


def diversity_stats(table, mode: str = "plug_in") -> DiversityStats:
    """Estimate ss_j = sum of squared proportions and cp = cross products.

    ``plug_in`` uses the raw relative frequencies; ``unbiased`` replaces the
    within-group squares by n_l (n_l - 1) / (n (n - 1)), which is unbiased
    for the squared-proportion sum under multinomial sampling (cp is left
    as the plug-in cross product: it is already unbiased across independent
    groups).
    """
    c1 = np.asarray(table.counts1, dtype=float)
    c2 = np.asarray(table.counts2, dtype=float)
    n1, n2 = c1.sum(), c2.sum()
    if n1 < 1 or n2 < 1:
        raise DomainError("each group needs at least one observation")
    if mode == "plug_in":
        ss1 = float(np.sum((c1 / n1) ** 2))
        ss2 = float(np.sum((c2 / n2) ** 2))
    elif mode == "unbiased":
        if n1 < 2 or n2 < 2:
            raise DomainError("unbiased mode needs n_j >= 2")
        ss1 = float(np.sum(c1 * (c1 - 1.0)) / (n1 * (n1 - 1.0)))
        ss2 = float(np.sum(c2 * (c2 - 1.0)) / (n2 * (n2 - 1.0)))
    else:
        raise DomainError(f"unknown estimator mode {mode!r}")
    cp = float(np.sum((c1 / n1) * (c2 / n2)))
    return DiversityStats(ss1=ss1, ss2=ss2, cp=cp, mode=mode)


def _bisect_decreasing(f, lo: float, hi: float, target: float, *,
                       f_tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root of f(x) = target for f monotone decreasing on [lo, hi]."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val - target) < f_tol:
            return mid
        if val > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expected_cross_moment(lam: float) -> float:
    """Forward map lambda -> E(1/M) = (1 - e^{-lam}) / lam."""
    return expected_inverse_m(OneShiftedPoisson(lam))


def expected_simpson_moment(gamma: float, prior: MPrior) -> float:
    """Forward map gamma -> (1 + gamma) E(1 / (1 + gamma M))."""
    return (1.0 + gamma) * expected_inv_one_plus_gamma_m(prior, gamma)


def fit_lambda(cp: float) -> float:
    """Invert E(1/M) = cp for the species-count rate lambda.

    The map is strictly decreasing from 1 (lambda -> 0) to 0, so the root
    is unique; the bracket is expanded geometrically before bisecting.
    """
    if not (0.0 < cp < 1.0):
        raise MomentRangeError(
            f"cross-product moment must lie in (0, 1), got {cp}; a value at or "
            "above 1 has no positive-rate solution")
    lo, hi = 1e-12, 1.0
    while expected_cross_moment(hi) > cp:
        hi *= 2.0
        if hi > 1e18:
            raise MomentRangeError(f"no finite rate matches cp={cp}")
    lam = _bisect_decreasing(expected_cross_moment, lo, hi, cp)
    return lam


def fit_gamma(ss: float, prior: MPrior | float) -> float:
    """Invert (1 + gamma) E(1/(1 + gamma M)) = ss for gamma > 0.

    ``prior`` may be an MPrior or a plain lambda for the default 1-shifted
    Poisson.  The moment decreases from 1 (gamma -> 0) to E(1/M)
    (gamma -> infinity), so ss must lie strictly between those limits; the
    bisection runs on log-gamma over [1e-8, 1e8].
    """
    if isinstance(prior, (int, float)):
        prior = OneShiftedPoisson(float(prior))
    lower = expected_inverse_m(prior)
    if ss >= 1.0:
        raise MomentRangeError(
            f"Simpson moment {ss} >= 1, the gamma -> 0 limit; no root")
    if ss <= lower:
        raise MomentRangeError(
            f"Simpson moment {ss} <= E(1/M) = {lower:.6g}, the gamma -> infinity "
            "limit; no root")

    def moment_of_log_gamma(lg: float) -> float:
        return expected_simpson_moment(math.exp(lg), prior)

    lg = _bisect_decreasing(moment_of_log_gamma,
                            math.log(1e-8), math.log(1e8), ss)
    return math.exp(lg)


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    stats: DiversityStats
    lambda_residual: float
    gamma1_residual: float
    gamma2_residual: float

    @property
    def lam(self) -> float:
        return self.params.m_prior.lam


def fit_all(table, mode: str = "plug_in") -> FitResult:
    """Two-step fit: lambda from the cross products, then each gamma from
    its group's Simpson moment (the two solves are independent)."""
    stats = diversity_stats(table, mode)
    lam = fit_lambda(stats.cp)
    prior = OneShiftedPoisson(lam)
    gamma1 = fit_gamma(stats.ss1, prior)
    gamma2 = fit_gamma(stats.ss2, prior)
    params = ModelParams(gamma1=gamma1, gamma2=gamma2, m_prior=prior)
    return FitResult(
        params=params,
        stats=stats,
        lambda_residual=abs(expected_cross_moment(lam) - stats.cp),
        gamma1_residual=abs(expected_simpson_moment(gamma1, prior) - stats.ss1),
        gamma2_residual=abs(expected_simpson_moment(gamma2, prior) - stats.ss2),
    )
