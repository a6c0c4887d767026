"""The normalizing V coefficients of the two-group species sampling model.

``V(n1, n2, r)`` weights partitions with ``r`` global species blocks given
group sample sizes ``n1`` and ``n2``:

    V^r_{n1,n2} = sum_{m >= max(r,1)} (m)_{r fall} q_M(m)
                  / [ (gamma1*m)_{n1} (gamma2*m)_{n2} ]

The series converges for every pmf q_M; truncation is adaptive and validated
by cap-doubling invariance, a recurrence identity, and a large-sample
asymptotic expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .logmath import (
    LOG_ZERO,
    ConvergenceError,
    DomainError,
    log_add,
    log_falling_factorial,
    log_pochhammer,
)
from .mprior import TAIL_RUN, MPrior

DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 10**6


@dataclass(frozen=True)
class ModelParams:
    """Group concentrations (gamma1, gamma2) plus the prior on M."""

    gamma1: float
    gamma2: float
    m_prior: MPrior

    def __post_init__(self):
        if self.gamma1 <= 0.0 or self.gamma2 <= 0.0:
            raise DomainError(
                f"concentrations must be positive, got ({self.gamma1}, {self.gamma2})")

    def gamma(self, group: int) -> float:
        if group == 1:
            return self.gamma1
        if group == 2:
            return self.gamma2
        raise DomainError(f"group must be 1 or 2, got {group}")


def log_v(n1: int, n2: int, r: int, params: ModelParams, *,
          tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """log V^r_{n1,n2}, summed term by term in log space.

    Terms are accumulated from m = max(r, 1) upward and the sum stops once
    the current term has stayed below ``tol`` times the partial sum for
    ``TAIL_RUN`` consecutive indices *and* m has passed the prior's mode
    plus r (the general term only decays monotonically past the bulk of
    q_M's mass).  Finite-support priors are summed exactly.
    """
    if n1 < 0 or n2 < 0:
        raise DomainError(f"sample sizes must be >= 0, got ({n1}, {n2})")
    if r < 0:
        raise DomainError(f"r must be >= 0, got r={r}")
    # r > n1 + n2 never arises in a partition law but the series is still
    # convergent; the recurrence identity evaluates such coefficients.
    prior = params.m_prior
    g1, g2 = params.gamma1, params.gamma2
    start = max(r, 1)
    cap = prior.support_max
    guard = prior.mode() + r
    log_tol = math.log(tol)

    total = LOG_ZERO
    run = 0
    m = start
    while True:
        if cap is not None and m > cap:
            return total
        lq = prior.log_pmf(m)
        if lq > LOG_ZERO:
            term = (log_falling_factorial(m, r) + lq
                    - log_pochhammer(g1 * m, n1) - log_pochhammer(g2 * m, n2))
        else:
            term = LOG_ZERO
        total = log_add(total, term)
        if m > guard and total > LOG_ZERO and term <= log_tol + total:
            run += 1
            if run >= TAIL_RUN:
                return total
        else:
            run = 0
        if m - start + 1 >= max_terms:
            if cap is None:
                raise ConvergenceError(
                    f"V series (n1={n1}, n2={n2}, r={r}) did not converge "
                    f"within {max_terms} terms")
            return total
        m += 1


def log_v_single(n: int, r: int, gamma: float, prior: MPrior, *,
                 tol: float = DEFAULT_TOL,
                 max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """Single-group V^r_n: the two-group coefficient with the other size zero."""
    params = ModelParams(gamma1=gamma, gamma2=1.0, m_prior=prior)
    return log_v(n, 0, r, params, tol=tol, max_terms=max_terms)


class VCoefficients:
    """Memoizing evaluator of log V for one fixed parameter triple.

    Values for single-group reductions are served from the same cache (keys
    with one size equal to zero).  Insertion is idempotent, so concurrent
    recomputation of a key is harmless.
    """

    def __init__(self, params: ModelParams, *, tol: float = DEFAULT_TOL,
                 max_terms: int = DEFAULT_MAX_TERMS):
        self.params = params
        self.tol = tol
        self.max_terms = max_terms
        self._cache: dict[tuple[int, int, int], float] = {}

    def log_v(self, n1: int, n2: int, r: int) -> float:
        key = (n1, n2, r)
        value = self._cache.get(key)
        if value is None:
            value = log_v(n1, n2, r, self.params,
                          tol=self.tol, max_terms=self.max_terms)
            self._cache[key] = value
        return value

    def log_v_single(self, n: int, r: int, group: int = 1) -> float:
        if group == 1:
            return self.log_v(n, 0, r)
        if group == 2:
            return self.log_v(0, n, r)
        raise DomainError(f"group must be 1 or 2, got {group}")

    def check_recurrence(self, n1: int, n2: int, r: int) -> float:
        """Relative residual of the one-step-in-each-group recurrence.

        V^r_{n1,n2} = g1 g2 { r^2 V^r' + (2r+1) V^{r+1}' + V^{r+2}' }
                      + n1 V^r_{n1+1,n2} + n2 V^r_{n1,n2+1} - n1 n2 V^r'

        with V' evaluated at (n1+1, n2+1).  Returns |LHS - RHS| / LHS.
        """
        if r < 1:
            raise DomainError(f"recurrence needs r >= 1, got r={r}")
        g1, g2 = self.params.gamma1, self.params.gamma2
        log_lhs = self.log_v(n1, n2, r)
        if log_lhs == LOG_ZERO:
            raise DomainError(f"V({n1},{n2},{r}) is zero; residual undefined")
        pieces = [
            (g1 * g2 * r * r, self.log_v(n1 + 1, n2 + 1, r)),
            (g1 * g2 * (2 * r + 1), self.log_v(n1 + 1, n2 + 1, r + 1)),
            (g1 * g2, self.log_v(n1 + 1, n2 + 1, r + 2)),
            (float(n1), self.log_v(n1 + 1, n2, r)),
            (float(n2), self.log_v(n1, n2 + 1, r)),
            (-float(n1) * n2, self.log_v(n1 + 1, n2 + 1, r)),
        ]
        rhs_over_lhs = sum(c * math.exp(lv - log_lhs) for c, lv in pieces if c != 0.0)
        return abs(1.0 - rhs_over_lhs)

    def log_v_asymptotic(self, n1: int, n2: int, r: int) -> float:
        """Two-term large-sample expansion of log V^r_{n1,n2}.

        leading = r! q_M(r) / [(g1 r)_{n1} (g2 r)_{n2}]; the correction
        multiplies it by 1 + (r+1) (g1 r)_{g1} (g2 r)_{g2}
        n1^{-g1} n2^{-g2} q_M(r+1)/q_M(r).
        """
        if n1 < 1 or n2 < 1:
            raise DomainError("asymptotic form needs n1, n2 >= 1")
        prior = self.params.m_prior
        lq_r = prior.log_pmf(r)
        if lq_r == LOG_ZERO:
            raise DomainError(f"prior mass at r={r} is zero")
        g1, g2 = self.params.gamma1, self.params.gamma2
        leading = (log_falling_factorial(r, r) + lq_r
                   - log_pochhammer(g1 * r, n1) - log_pochhammer(g2 * r, n2))
        lq_r1 = prior.log_pmf(r + 1)
        if lq_r1 == LOG_ZERO:
            return leading
        log_corr = (math.log(r + 1.0) + lq_r1 - lq_r
                    + log_pochhammer(g1 * r, g1) + log_pochhammer(g2 * r, g2)
                    - g1 * math.log(n1) - g2 * math.log(n2))
        return leading + math.log1p(math.exp(log_corr))
