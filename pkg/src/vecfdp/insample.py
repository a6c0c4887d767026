"""Exact prior-predictive distributions of distinct and shared species
counts for a two-group sample, plus the correlation between the two random
probability measures.

Notation for a sample of sizes (n1, n2): r_j local distinct species in
group j, r global distinct species, t = r1 + r2 - r shared species, and
r1* = r - r2, r2* = r - r1 group-exclusive species.
"""

from __future__ import annotations

import math

from .gfc import central_table
from .logmath import DomainError, log_binomial, log_factorial, log_sum_exp
from .mprior import expected_inv_one_plus_gamma_m, expected_inverse_m
from .pmftable import PmfTable
from .vcoef import ModelParams, VCoefficients


def prior_joint(vc: VCoefficients, n1: int, n2: int) -> PmfTable:
    """Joint pmf of (global r, local r1, local r2).

    P(r, r1, r2) = V^r_{n1,n2} * r1! r2! / (r1*! r2*! t!)
                   * |C(n1, r1; -g1)| |C(n2, r2; -g2)|

    over the support 1 <= r_j <= min(r, n_j), max(r1, r2) <= r <= r1 + r2.
    """
    if n1 < 1 or n2 < 1:
        raise DomainError("both groups need at least one observation")
    g1, g2 = vc.params.gamma1, vc.params.gamma2
    t1 = central_table(g1, n1)
    t2 = central_table(g2, n2)
    entries = {}
    for r1 in range(1, n1 + 1):
        lc1 = t1.log_central(n1, r1)
        for r2 in range(1, n2 + 1):
            lc2 = t2.log_central(n2, r2)
            base = lc1 + lc2 + log_factorial(r1) + log_factorial(r2)
            for r in range(max(r1, r2), r1 + r2 + 1):
                t = r1 + r2 - r
                r1s = r - r2
                r2s = r - r1
                lp = (vc.log_v(n1, n2, r) + base
                      - log_factorial(r1s) - log_factorial(r2s) - log_factorial(t))
                entries[(r, r1, r2)] = lp
    return PmfTable(entries)


def prior_marginal_global(vc: VCoefficients, n1: int, n2: int) -> PmfTable:
    """Pmf of the global number of distinct species r in (n1, n2) samples.

    Evaluated by the double sum over the per-group "missing species" counts
    z_j = r - r_j; equals the r-marginal of the joint.  With one group
    empty the sum collapses to the single-group law V^r_n |C(n, r)|.
    """
    if n1 + n2 < 1 or min(n1, n2) < 0:
        raise DomainError("need at least one observation overall")
    g1, g2 = vc.params.gamma1, vc.params.gamma2
    t1 = central_table(g1, n1)
    t2 = central_table(g2, n2)
    entries = {}
    for r in range(1, n1 + n2 + 1):
        terms = []
        for z1 in range(0, r):
            lc1 = t1.log_central(n1, r - z1) if r - z1 <= n1 else None
            if lc1 is None:
                continue
            for z2 in range(0, r - z1 + 1):
                if r - z2 > n2:
                    continue
                lc2 = t2.log_central(n2, r - z2)
                coeff = (log_factorial(r - z1) - log_factorial(z2)
                         - log_factorial(r - z1 - z2)
                         + log_factorial(r - z2) - log_factorial(z1))
                terms.append(coeff + lc1 + lc2)
        if terms:
            entries[r] = vc.log_v(n1, n2, r) + log_sum_exp(terms)
    return PmfTable(entries)


def prior_joint_global_shared(vc: VCoefficients, n1: int, n2: int) -> PmfTable:
    """Joint pmf of (global distinct r, shared t).

    P(r, t) = V^r_{n1,n2} sum_{k1*=0}^{r-t} binom(r-k1*, t) (t+k1*)!/k1*!
              |C(n1, t+k1*; -g1)| |C(n2, r-k1*; -g2)|
    """
    if n1 < 1 or n2 < 1:
        raise DomainError("both groups need at least one observation")
    g1, g2 = vc.params.gamma1, vc.params.gamma2
    t1 = central_table(g1, n1)
    t2 = central_table(g2, n2)
    entries = {}
    for r in range(1, n1 + n2 + 1):
        for t in range(0, min(r, n1, n2) + 1):
            terms = []
            for k1s in range(0, r - t + 1):
                r1 = t + k1s
                r2 = r - k1s
                if r1 > n1 or r2 > n2 or r2 < 1:
                    continue
                terms.append(log_binomial(r - k1s, t)
                             + log_factorial(r1) - log_factorial(k1s)
                             + t1.log_central(n1, r1) + t2.log_central(n2, r2))
            if terms:
                entries[(r, t)] = vc.log_v(n1, n2, r) + log_sum_exp(terms)
    return PmfTable(entries)


def prior_marginal_shared(vc: VCoefficients, n1: int, n2: int) -> PmfTable:
    """Pmf of the number of shared species t, including t = 0."""
    return prior_joint_global_shared(vc, n1, n2).map_keys(lambda key: key[1])


def prior_local(vc: VCoefficients, n: int, group: int = 1) -> PmfTable:
    """Single-group pmf of the local number of distinct species.

    P(K = r) = V^r_n |C(n, r; -gamma_j)| with the single-group V.
    """
    if n < 1:
        raise DomainError("need at least one observation")
    gamma = vc.params.gamma(group)
    table = central_table(gamma, n)
    entries = {
        r: vc.log_v_single(n, r, group) + table.log_central(n, r)
        for r in range(1, n + 1)
    }
    return PmfTable(entries)


def correlation(params: ModelParams, *, tol: float = 1e-12,
                max_terms: int = 10**6) -> float:
    """Correlation between the two random measures on any fixed set.

    cor = E(1/M) / { sqrt((1+g1)(1+g2)) *
                     sqrt(E(1/(1+g1 M)) E(1/(1+g2 M))) }

    Tends to E(1/M) as the concentrations vanish and to 1 as they diverge.
    """
    prior = params.m_prior
    num = expected_inverse_m(prior, tol=tol, max_terms=max_terms)
    e1 = expected_inv_one_plus_gamma_m(prior, params.gamma1, tol=tol,
                                       max_terms=max_terms)
    e2 = expected_inv_one_plus_gamma_m(prior, params.gamma2, tol=tol,
                                       max_terms=max_terms)
    den = math.sqrt((1.0 + params.gamma1) * (1.0 + params.gamma2)) * math.sqrt(e1 * e2)
    return num / den


def expected_in_sample(vc: VCoefficients, n1: int, n2: int):
    """(E[K1], E[K2], E[K], E[S]) from the joint distribution."""
    joint = prior_joint(vc, n1, n2)
    e_k = joint.mean(0)
    e_k1 = joint.mean(1)
    e_k2 = joint.mean(2)
    return e_k1, e_k2, e_k, e_k1 + e_k2 - e_k
