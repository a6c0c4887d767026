#!/usr/bin/env python3
"""A tour of the model's exact machinery on a small two-group sample.

Run:  python demos/model_tour.py
"""

from vecfdp import (
    ModelParams,
    ObservedState,
    OneShiftedPoisson,
    VCoefficients,
    correlation,
    expected_in_sample,
    one_step_shared_pmf,
    posterior_m_mean,
    posterior_m_pmf,
    prior_joint,
    prior_marginal_shared,
    shared_pmf,
)
from vecfdp.simulate import bruteforce_prior

params = ModelParams(gamma1=1.2, gamma2=0.7, m_prior=OneShiftedPoisson(2.5))
vc = VCoefficients(params)

print("=== dependence between the two areas ===")
print(f"correlation between the random measures: {correlation(params):.4f}")
for gamma in (0.01, 1.0, 100.0):
    rho = correlation(ModelParams(gamma, gamma, OneShiftedPoisson(2.5)))
    print(f"  gamma1 = gamma2 = {gamma:>6}: correlation {rho:.4f}")

print()
print("=== in-sample laws for samples of sizes (4, 3) ===")
joint = prior_joint(vc, 4, 3)
print("most likely (global r, local r1, local r2):")
for key, prob in joint.top_entries(5):
    print(f"  {key}: {prob:.4f}")
shared = prior_marginal_shared(vc, 4, 3)
print("shared species pmf:", {t: round(p, 4) for t, p in sorted(shared.probs().items())})
e_k1, e_k2, e_k, e_s = expected_in_sample(vc, 4, 3)
print(f"expectations: E[K1] = {e_k1:.3f}, E[K2] = {e_k2:.3f}, "
      f"E[K] = {e_k:.3f}, E[S] = {e_s:.3f}")

print()
print("=== the exact law agrees with exhaustive enumeration ===")
oracle = bruteforce_prior(params, 3, 2)
worst = max(abs(oracle.prob(k) - prior_joint(vc, 3, 2).prob(k))
            for k in oracle.support())
print(f"max entrywise gap on (3, 2): {worst:.2e}")

print()
print("=== posterior prediction after observing a sample ===")
state = ObservedState(n1=4, n2=3, r1=2, r2=2, r=3)
pmf = posterior_m_pmf(vc, state)
print(f"unseen species count: mean {posterior_m_mean(vc, state):.3f}, "
      f"pmf head {[round(pmf.prob(m), 4) for m in range(4)]}")
one_step = one_step_shared_pmf(vc, state)
print("next pair of observations, new shared species pmf:",
      {s: round(one_step.prob(s), 4) for s in (0, 1, 2)})
two_step = shared_pmf(vc, state, 2, 2)
print("two more per group, new shared species pmf:",
      {s: round(p, 4) for s, p in sorted(two_step.probs().items())})
