import math

import mpmath
import pytest

from vecfdp.logmath import LOG_ZERO, ConvergenceError, DomainError
from vecfdp.mprior import OneShiftedPoisson, PointMass, TabulatedPrior
from vecfdp.vcoef import ModelParams, VCoefficients, log_v, log_v_single


def mp_series_oracle(n1, n2, r, gamma1, gamma2, lam, terms=2000):
    """Direct high-precision summation of the coefficient series."""
    with mpmath.workdps(60):
        total = mpmath.mpf(0)
        for m in range(max(r, 1), max(r, 1) + terms):
            q = mpmath.e ** (-lam) * mpmath.mpf(lam) ** (m - 1) / mpmath.factorial(m - 1)
            fall = mpmath.ff(m, r)
            total += fall * q / (mpmath.rf(gamma1 * m, n1) * mpmath.rf(gamma2 * m, n2))
        return float(mpmath.log(total))


def test_empty_sample_is_total_mass():
    params = ModelParams(1.0, 1.0, OneShiftedPoisson(2.0))
    assert log_v(0, 0, 0, params) == pytest.approx(0.0, abs=1e-12)


def test_first_factorial_moment():
    # sum_m m q_M(m) = 1 + lam for the 1-shifted Poisson
    for lam in (0.5, 1.0, 4.0):
        params = ModelParams(1.0, 1.0, OneShiftedPoisson(lam))
        assert log_v(0, 0, 1, params) == pytest.approx(
            math.log(1.0 + lam), rel=1e-12)


def test_point_mass_single_term():
    params = ModelParams(1.0, 1.0, PointMass(3))
    assert log_v(2, 1, 1, params) == pytest.approx(math.log(3.0 / 36.0), rel=1e-13)


def test_single_group_is_zero_other_size():
    prior = OneShiftedPoisson(1.0)
    params = ModelParams(1.0, 1.0, prior)
    assert log_v_single(1, 1, 1.0, prior) == pytest.approx(
        log_v(1, 0, 1, params), abs=1e-14)


def test_point_mass_below_r_is_zero():
    assert log_v_single(3, 3, 1.0, PointMass(2)) == LOG_ZERO


def test_against_high_cap_oracle():
    expected = mp_series_oracle(4, 0, 2, 0.5, 1.0, 2.0)
    got = log_v_single(4, 2, 0.5, OneShiftedPoisson(2.0))
    assert got == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("n1,n2,r,g1,g2,lam", [
    (3, 2, 2, 0.7, 1.4, 2.0),
    (5, 5, 4, 1.0, 1.0, 0.5),
    (1, 6, 3, 2.5, 0.3, 8.0),
])
def test_two_group_against_oracle(n1, n2, r, g1, g2, lam):
    params = ModelParams(g1, g2, OneShiftedPoisson(lam))
    assert log_v(n1, n2, r, params) == pytest.approx(
        mp_series_oracle(n1, n2, r, g1, g2, lam), rel=1e-10)


def test_tabulated_prior_finite_sum():
    prior = TabulatedPrior([0.2, 0.5, 0.3])
    params = ModelParams(1.0, 2.0, prior)
    # V^2_{2,1} = sum_{m>=2} m(m-1) q(m) / [(m)_2 (2m)_1]
    expected = sum(m * (m - 1) * q / ((m * (m + 1)) * (2 * m))
                   for m, q in ((2, 0.5), (3, 0.3)))
    assert math.exp(log_v(2, 1, 2, params)) == pytest.approx(expected, rel=1e-12)


def test_strictly_decreasing_in_sample_sizes():
    params = ModelParams(0.8, 1.3, OneShiftedPoisson(2.0))
    vc = VCoefficients(params)
    for r in (1, 2, 3):
        values = [vc.log_v(n1, 2, r) for n1 in range(r, r + 6)]
        assert all(a > b for a, b in zip(values, values[1:]))
        values = [vc.log_v(3, n2, r) for n2 in range(r, r + 6)]
        assert all(a > b for a, b in zip(values, values[1:]))


def test_cache_matches_fresh_evaluation():
    params = ModelParams(0.8, 1.3, OneShiftedPoisson(2.0))
    vc = VCoefficients(params)
    for key in ((2, 3, 2), (4, 4, 1), (0, 0, 0), (5, 1, 4)):
        cached = vc.log_v(*key)
        again = vc.log_v(*key)
        fresh = log_v(*key, params)
        assert cached == again
        assert cached == pytest.approx(fresh, rel=1e-12)


@pytest.mark.parametrize("g1,g2,lam", [(0.5, 0.5, 1.0), (2.0, 0.5, 5.0),
                                       (1.0, 1.0, 1.0)])
def test_recurrence_residual_grid(g1, g2, lam):
    vc = VCoefficients(ModelParams(g1, g2, OneShiftedPoisson(lam)))
    for n1 in range(0, 7):
        for n2 in range(0, 7):
            for r in range(1, 5):
                assert vc.check_recurrence(n1, n2, r) < 1e-8, (n1, n2, r)


def test_recurrence_point_mass_no_truncation():
    vc = VCoefficients(ModelParams(1.2, 0.6, PointMass(6)))
    for n1 in range(0, 5):
        for n2 in range(0, 5):
            for r in range(1, 4):
                assert vc.check_recurrence(n1, n2, r) < 1e-10


def test_recurrence_empty_sample_moment_relation():
    vc = VCoefficients(ModelParams(1.5, 0.7, OneShiftedPoisson(3.0)))
    assert vc.check_recurrence(0, 0, 1) < 1e-10


def test_asymptotic_ratio_approaches_one():
    vc = VCoefficients(ModelParams(1.0, 1.0, OneShiftedPoisson(3.0)))
    gaps = []
    for n in (50, 100, 200, 400):
        exact = vc.log_v(n, n, 3)
        approx = vc.log_v_asymptotic(n, n, 3)
        gaps.append(abs(math.expm1(exact - approx)))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_asymptotic_point_mass_leading_term_exact():
    # no prior mass above r: the correction term vanishes and the single
    # series term is the leading term itself
    r = 3
    vc = VCoefficients(ModelParams(1.0, 2.0, PointMass(r)))
    assert vc.log_v_asymptotic(30, 40, r) == pytest.approx(
        vc.log_v(30, 40, r), rel=1e-12)


def test_asymptotic_small_rate_leading_mass():
    lam = 1e-4
    vc = VCoefficients(ModelParams(1.0, 1.0, OneShiftedPoisson(lam)))
    # with nearly all prior mass on M = 1, V^1_{n,n} ~ q(1)/(n!)^2
    exact = vc.log_v(20, 20, 1)
    lead = vc.log_v_asymptotic(20, 20, 1)
    assert exact == pytest.approx(lead, rel=1e-6)


def test_cap_doubling_invariance():
    params = ModelParams(0.3, 3.0, OneShiftedPoisson(8.0))
    base = log_v(5, 5, 3, params, max_terms=10**6)
    doubled = log_v(5, 5, 3, params, max_terms=2 * 10**6)
    assert abs(math.expm1(doubled - base)) < 1e-12


def test_convergence_error_on_tiny_cap():
    params = ModelParams(1.0, 1.0, OneShiftedPoisson(50.0))
    with pytest.raises(ConvergenceError):
        log_v(2, 2, 1, params, max_terms=5)


def test_domain_errors():
    params = ModelParams(1.0, 1.0, OneShiftedPoisson(1.0))
    with pytest.raises(DomainError):
        log_v(-1, 0, 0, params)
    with pytest.raises(DomainError):
        log_v(1, 1, -1, params)
    with pytest.raises(DomainError):
        ModelParams(0.0, 1.0, OneShiftedPoisson(1.0))
