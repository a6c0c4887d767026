import math

import pytest

from vecfdp import prediction as pred
from vecfdp import simulate
from vecfdp.gfc import log_noncentral_gfc
from vecfdp.logmath import DomainError
from vecfdp.mprior import OneShiftedPoisson, PointMass
from vecfdp.vcoef import ModelParams, VCoefficients

PARAMS = ModelParams(1.3, 0.6, OneShiftedPoisson(2.0))

STATE = pred.ObservedState(n1=4, n2=3, r1=2, r2=2, r=3,
                           counts1=(2, 2, 0), counts2=(1, 0, 2))


@pytest.fixture(scope="module")
def vc():
    return VCoefficients(PARAMS)


def test_state_derived_quantities():
    assert STATE.t == 1
    assert STATE.r1_star == 1
    assert STATE.r2_star == 1


def test_state_validation():
    with pytest.raises(DomainError):
        pred.ObservedState(2, 2, 3, 1, 3)
    with pytest.raises(DomainError):
        pred.ObservedState(2, 2, 1, 1, 3)
    with pytest.raises(DomainError):
        pred.ObservedState(4, 3, 2, 2, 3, counts1=(2, 1, 0), counts2=(1, 0, 2))


def test_posterior_m_normalization_and_mean(vc):
    state = pred.ObservedState(5, 5, 3, 2, 3)
    pmf = pred.posterior_m_pmf(vc, state)
    assert pmf.total_mass() == pytest.approx(1.0, abs=1e-10)
    assert pmf.mean() == pytest.approx(pred.posterior_m_mean(vc, state),
                                       rel=1e-8)
    assert pmf.prob(0) > 0.0


def test_posterior_m_point_mass_support():
    vc = VCoefficients(ModelParams(1.0, 1.0, PointMass(5)))
    pmf = pred.posterior_m_pmf(vc, STATE)
    assert pmf.support() == [2]
    assert pmf.prob(2) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("n1,n2,r1,r2,r", [
    (5, 5, 3, 2, 3), (3, 3, 2, 2, 2), (6, 2, 2, 1, 3), (8, 8, 4, 4, 6),
])
def test_posterior_m_mean_identity_grid(vc, n1, n2, r1, r2, r):
    state = pred.ObservedState(n1, n2, r1, r2, r)
    pmf = pred.posterior_m_pmf(vc, state)
    assert pmf.mean() == pytest.approx(pred.posterior_m_mean(vc, state),
                                       rel=1e-8)


def test_posterior_m_mean_decreases_with_data(vc):
    means = [pred.posterior_m_mean(vc, pred.ObservedState(n, n, 3, 3, 4))
             for n in (10, 20, 40, 80)]
    assert all(a > b for a, b in zip(means, means[1:]))


def test_posterior_m_mean_asymptotic_agreement():
    vc = VCoefficients(ModelParams(1.0, 1.0, OneShiftedPoisson(3.0)))
    ratios = []
    for n in (100, 400, 1600):
        state = pred.ObservedState(n, n, 3, 3, 4)
        exact = pred.posterior_m_mean(vc, state)
        approx = pred.posterior_m_mean_asymptotic(vc, state)
        ratios.append(exact / approx)
    assert abs(ratios[-1] - 1.0) < abs(ratios[0] - 1.0)
    assert ratios[-1] == pytest.approx(1.0, abs=1e-2)


def test_joint_new_single_observation_hand_case(vc):
    # one extra draw in group 1 only: either an already observed species
    # (the non-central coefficient carries g1 r1 + n1) or a new one
    joint = pred.posterior_joint_new(vc, STATE, 1, 0)
    g1 = PARAMS.gamma1
    rho1 = g1 * STATE.r1 + STATE.n1
    log_v_obs = vc.log_v(4, 3, 3)
    p_old = math.exp(vc.log_v(5, 3, 3) - log_v_obs) * rho1
    assert joint.prob((0, 0, 0)) == pytest.approx(p_old, rel=1e-12)
    # the new observation may hit the one species seen only in group 2
    p_cross = math.exp(vc.log_v(5, 3, 3) - log_v_obs) * g1 * STATE.r2_star
    assert joint.prob((0, 1, 0)) == pytest.approx(p_cross, rel=1e-12)
    p_new = math.exp(vc.log_v(5, 3, 4) - log_v_obs) * g1
    assert joint.prob((1, 1, 0)) == pytest.approx(p_new, rel=1e-12)
    assert joint.total_mass() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("m1,m2", [(0, 0), (1, 1), (2, 3), (3, 3)])
def test_joint_new_normalization(vc, m1, m2):
    for state in (STATE, pred.ObservedState(3, 3, 2, 2, 4),
                  pred.ObservedState(5, 2, 3, 1, 3)):
        joint = pred.posterior_joint_new(vc, state, m1, m2)
        assert joint.total_mass() == pytest.approx(1.0, abs=1e-8)


def test_joint_new_monte_carlo_agreement(vc):
    draws = simulate.conditional_future_draws(vc, STATE, 2, 2, 200_000, seed=4)
    emp = simulate.empirical_pmf(draws)
    exact = pred.posterior_joint_new(vc, STATE, 2, 2)
    assert simulate.tv_distance(emp, exact) < 0.02


def test_marginal_global_new_matches_joint(vc):
    for m1, m2 in ((1, 1), (3, 2), (2, 0)):
        joint = pred.posterior_joint_new(vc, STATE, m1, m2)
        marg = pred.posterior_marginal_global_new(vc, STATE, m1, m2)
        agg = joint.marginal(0)
        for k in set(marg.support()) | set(agg.support()):
            assert marg.prob(k) == pytest.approx(agg.prob(k), abs=1e-10)
        assert marg.total_mass() == pytest.approx(1.0, abs=1e-10)


def test_marginal_global_new_one_sided_reduction(vc):
    m1 = 4
    marg = pred.posterior_marginal_global_new(vc, STATE, m1, 0)
    g1 = PARAMS.gamma1
    rho = g1 * STATE.r + STATE.n1
    log_v_obs = vc.log_v(4, 3, 3)
    for k in range(0, m1 + 1):
        expected = math.exp(vc.log_v(4 + m1, 3, 3 + k) - log_v_obs
                            + log_noncentral_gfc(m1, k, g1, rho))
        assert marg.prob(k) == pytest.approx(expected, rel=1e-10)


def test_local_new_normalization_and_one_step_value(vc):
    for m in range(0, 7):
        local = pred.posterior_local_new(vc, STATE, m, 1)
        assert local.total_mass() == pytest.approx(1.0, abs=1e-10)
    local = pred.posterior_local_new(vc, STATE, 1, 1)
    expected = math.exp(vc.log_v_single(STATE.n1 + 1, STATE.r1 + 1, 1)
                        - vc.log_v_single(STATE.n1, STATE.r1, 1)) * PARAMS.gamma1
    assert local.prob(1) == pytest.approx(expected, rel=1e-12)


def test_local_vs_joint_marginal_gap_reported(vc):
    # the single-group law conditions on less data; the gap is a reported
    # diagnostic, not an identity
    gap = pred.local_marginal_gap(vc, STATE, 2, 2, 1)
    assert 0.0 <= gap <= 1.0
    print(f"single-group vs joint-marginal gap at (2,2): {gap:.4f}")


def test_exchangeable_reduction_collapses_to_single_group():
    vc = VCoefficients(ModelParams(0.8, 1.7, OneShiftedPoisson(3.0)))
    state = pred.ObservedState(n1=5, n2=0, r1=3, r2=0, r=3)
    m1 = 4
    joint = pred.posterior_joint_new(vc, state, m1, 0)
    local = pred.posterior_local_new(vc, state, m1, 1)
    marg = pred.posterior_marginal_global_new(vc, state, m1, 0)
    for k in range(0, m1 + 1):
        assert joint.prob((k, k, 0)) == pytest.approx(local.prob(k), rel=1e-10)
        assert marg.prob(k) == pytest.approx(local.prob(k), rel=1e-10)


def test_coverage_equals_shared_pmf_zero(vc):
    for m1, m2 in ((1, 1), (2, 2), (3, 1), (0, 2)):
        cov = pred.shared_coverage_prob(vc, STATE, m1, m2)
        sp = pred.shared_pmf(vc, STATE, m1, m2)
        assert cov == pytest.approx(sp.prob(0), abs=1e-10)
        assert sp.total_mass() == pytest.approx(1.0, abs=1e-8)


def test_coverage_one_sided_no_shared_possible():
    vc = VCoefficients(PARAMS)
    state = pred.ObservedState(n1=5, n2=0, r1=3, r2=0, r=3)
    assert pred.shared_coverage_prob(vc, state, 4, 0) == pytest.approx(
        1.0, abs=1e-10)


def test_one_step_pmf_values_and_identities(vc):
    pmf = pred.one_step_shared_pmf(vc, STATE)
    assert pmf.total_mass() == pytest.approx(1.0, abs=1e-10)
    g1, g2 = PARAMS.gamma1, PARAMS.gamma2
    expected_s2 = math.exp(vc.log_v(5, 4, 3) - vc.log_v(4, 3, 3)) \
        * g1 * g2 * STATE.r1_star * STATE.r2_star
    assert pmf.prob(2) == pytest.approx(expected_s2, rel=1e-12)
    assert pred.one_step_discovery_prob(vc, STATE) == pytest.approx(
        1.0 - pmf.prob(0), abs=1e-12)
    assert pred.shared_coverage_prob(vc, STATE, 1, 1) == pytest.approx(
        pmf.prob(0), abs=1e-12)


def test_one_step_pmf_matches_joint_aggregation(vc):
    pmf = pred.one_step_shared_pmf(vc, STATE)
    agg = pred.shared_pmf(vc, STATE, 1, 1)
    for s in (0, 1, 2):
        assert pmf.prob(s) == pytest.approx(agg.prob(s), abs=1e-12)


def test_one_step_all_species_shared(vc):
    state = pred.ObservedState(n1=3, n2=3, r1=2, r2=2, r=2)
    assert state.r1_star == 0 and state.r2_star == 0
    pmf = pred.one_step_shared_pmf(vc, state)
    assert pmf.prob(2) == 0.0
    # a new shared species can still appear as the same brand-new species
    assert pmf.prob(1) > 0.0
    assert pmf.total_mass() == pytest.approx(1.0, abs=1e-10)


def test_shared_pmf_monte_carlo(vc):
    draws = simulate.conditional_future_draws(vc, STATE, 2, 2, 200_000, seed=8)
    emp = simulate.empirical_pmf(draws, columns=(3,))
    exact = pred.shared_pmf(vc, STATE, 2, 2)
    assert simulate.tv_distance(emp, exact) < 0.02


def test_expected_new_linearity_and_zero_query(vc):
    exp = pred.expected_new(vc, STATE, 3, 2)
    assert exp.s == pytest.approx(exp.k1 + exp.k2 - exp.k, abs=1e-10)
    zero = pred.expected_new(vc, STATE, 0, 0)
    assert zero == (0.0, 0.0, 0.0, 0.0)


def test_expected_new_moment_route_matches_joint(vc):
    for m1, m2 in ((1, 1), (3, 2), (0, 2), (4, 4)):
        a = pred.expected_new(vc, STATE, m1, m2, method="joint")
        b = pred.expected_new(vc, STATE, m1, m2, method="moment")
        for x, y in zip(a, b):
            assert x == pytest.approx(y, abs=1e-8)


def test_expected_new_sampler_agreement(vc):
    draws = simulate.conditional_future_draws(vc, STATE, 2, 2, 200_000, seed=15)
    exact = pred.expected_new(vc, STATE, 2, 2)
    means = draws.mean(axis=0)
    errs = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
    for got, se, want in zip(means, errs, (exact.k, exact.k1, exact.k2, exact.s)):
        assert abs(got - want) < 3.0 * se + 1e-9


def test_pair_probs_cells(vc):
    pair = pred.predictive_pair_probs(vc, STATE)
    cells = pair.as_dict()
    assert sum(cells.values()) == pytest.approx(1.0, abs=1e-12)
    assert pair.normalizer_ratio == pytest.approx(1.0, abs=1e-10)
    g1, g2 = PARAMS.gamma1, PARAMS.gamma2
    n1, n2, r = STATE.n1, STATE.n2, STATE.r
    log_v_obs = vc.log_v(n1, n2, r)
    lv1 = math.exp(vc.log_v(n1 + 1, n2 + 1, r + 1) - log_v_obs)
    lv2 = math.exp(vc.log_v(n1 + 1, n2 + 1, r + 2) - log_v_obs)
    assert cells["new_new"] == pytest.approx((lv1 + lv2) * g1 * g2, rel=1e-10)


def test_pair_probs_aggregate_to_one_step_terms(vc):
    # the same-species part of the (new, new) cell is exactly the
    # coefficient-one summand of the s = 1 mass
    pmf = pred.one_step_shared_pmf(vc, STATE)
    g1, g2 = PARAMS.gamma1, PARAMS.gamma2
    n1, n2, r = STATE.n1, STATE.n2, STATE.r
    log_v_obs = vc.log_v(n1, n2, r)
    lv0 = math.exp(vc.log_v(n1 + 1, n2 + 1, r) - log_v_obs)
    lv1 = math.exp(vc.log_v(n1 + 1, n2 + 1, r + 1) - log_v_obs)
    w1 = g1 * STATE.r1 + n1
    w2 = g2 * STATE.r2 + n2
    s1 = (lv0 * (STATE.r2_star * g1 * w2 + STATE.r1_star * g2 * w1)
          + lv1 * g1 * g2 * (STATE.r1_star + STATE.r2_star + 1))
    assert pmf.prob(1) == pytest.approx(s1, rel=1e-12)


def test_extrapolation_rows(vc):
    grid = [(0, 0), (1, 1), (2, 2), (4, 4)]
    rows = pred.extrapolation_curves(vc, STATE, grid)
    assert [(row["m1"], row["m2"]) for row in rows] == grid
    assert rows[0]["expected_new_global"] == 0.0
    assert rows[0]["expected_new_shared"] == 0.0
    assert rows[0]["coverage_prob"] == pytest.approx(1.0, abs=1e-12)
    e_k = [row["expected_new_global"] for row in rows]
    cov = [row["coverage_prob"] for row in rows]
    assert all(a <= b + 1e-12 for a, b in zip(e_k, e_k[1:]))
    assert all(a >= b - 1e-12 for a, b in zip(cov, cov[1:]))
