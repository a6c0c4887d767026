"""Log-space primitives shared by every series and product in the package.

All probabilities and coefficient magnitudes are carried as plain floats in
natural-log scale; the value zero is represented by ``-inf``.  Log-gamma is
the single primitive, so arguments need not be integers.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np
from scipy.special import gammaln

LOG_ZERO = float("-inf")


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """A truncated series failed to reach its tolerance within the term cap."""


def log_pochhammer(x: float, n: float) -> float:
    """log of the rising factorial (x)_n = Gamma(x+n)/Gamma(x).

    ``x`` must be positive; ``n`` is a nonnegative real (integer orders are
    the common case, real orders are needed for asymptotic expansions).
    """
    if x <= 0.0:
        raise DomainError(f"log_pochhammer requires x > 0, got x={x}")
    if n < 0:
        raise DomainError(f"log_pochhammer requires n >= 0, got n={n}")
    if n == 0:
        return 0.0
    return float(gammaln(x + n) - gammaln(x))


def log_falling_factorial(m: float, r: int) -> float:
    """log of (m)_{r falling} = m (m-1) ... (m-r+1); -inf whenever r > m."""
    if r < 0:
        raise DomainError(f"log_falling_factorial requires r >= 0, got r={r}")
    if r == 0:
        return 0.0
    if m < r:
        return LOG_ZERO
    if isinstance(m, int) or float(m).is_integer():
        m = int(m)
        return log_factorial(m) - log_factorial(m - r)
    return float(gammaln(m + 1) - gammaln(m - r + 1))


_LOG_FACT = gammaln(np.arange(512, dtype=float) + 1.0)


def log_factorial(n: int) -> float:
    global _LOG_FACT
    if n >= _LOG_FACT.size:
        _LOG_FACT = gammaln(np.arange(max(2 * _LOG_FACT.size, n + 1),
                                      dtype=float) + 1.0)
    return float(_LOG_FACT[n])


def log_binomial(n: int, k: int) -> float:
    """log of the binomial coefficient; -inf outside 0 <= k <= n."""
    if k < 0 or k > n or n < 0:
        return LOG_ZERO
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k)


def log_add(a: float, b: float) -> float:
    """log(e^a + e^b) without overflow; -inf acts as the additive zero."""
    return float(np.logaddexp(a, b))


def log_sum_exp(terms: Iterable[float]) -> float:
    """log of a sum of exponentials via max shift; empty input gives -inf."""
    arr = np.asarray(list(terms) if not isinstance(terms, np.ndarray) else terms,
                     dtype=float)
    if arr.size == 0:
        return LOG_ZERO
    hi = float(np.max(arr))
    if hi == LOG_ZERO:
        return LOG_ZERO
    if math.isinf(hi):  # +inf input: propagate
        return hi
    return hi + math.log(float(np.sum(np.exp(arr - hi))))
