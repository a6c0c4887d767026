#!/usr/bin/env python3
"""End-to-end workflow on the bundled two-park ant survey table: fit the
parameters from diversity moments, quantify the chance of new shared
species, and extrapolate coverage over future sampling effort.

Run:  python demos/ants_workflow.py
"""

from vecfdp import (
    ObservedState,
    VCoefficients,
    ants_table,
    extrapolation_curves,
    fit_all,
    one_step_discovery_prob,
    posterior_m_mean,
    predictive_pair_probs,
)
from vecfdp.baselines import chao_shared_estimator, frequency_counts

table = ants_table()
print("=== dataset ===")
print(table.summary())

print()
print("=== diversity-based fit ===")
fit = fit_all(table, "plug_in")
print(f"Simpson estimates: ss1 = {fit.stats.ss1:.4f}, ss2 = {fit.stats.ss2:.4f}")
print(f"cross products cp = {fit.stats.cp:.4f}, Morisita = {fit.stats.morisita:.4f}")
print(f"fitted: lambda = {fit.lam:.3f}, gamma1 = {fit.params.gamma1:.3f}, "
      f"gamma2 = {fit.params.gamma2:.3f}")

vc = VCoefficients(fit.params)
state = ObservedState.from_abundance(table)

print()
print("=== how exhausted is the species pool? ===")
print(f"expected unseen species:   {posterior_m_mean(vc, state):.4f}")
print(f"one-step shared discovery: {one_step_discovery_prob(vc, state):.4f}")
pair = predictive_pair_probs(vc, state)
print(f"next pair of observations: {pair.as_dict()}")

print()
print("=== frequentist baseline ===")
counts = frequency_counts(table)
chao = chao_shared_estimator(counts, table.n1, table.n2)
print(f"shared singletons: f_1+ = {counts.f_1plus}, f_+1 = {counts.f_plus1}, "
      f"f_11 = {counts.f_11}")
print(f"one-step shared discovery (ChaoSh): {chao.value:.4f}"
      + ("  [exceeds one]" if chao.exceeds_one else ""))

print()
print("=== coverage as sampling effort grows ===")
grid = [(m, m) for m in (0, 25, 50, 100, 200, 400)]
print(f"{'m per park':>10} {'E[new shared]':>14} {'coverage':>9}")
for row in extrapolation_curves(vc, state, grid):
    print(f"{row['m1']:>10} {row['expected_new_shared']:>14.4f} "
          f"{row['coverage_prob']:>9.4f}")
print("coverage is the probability that the additional effort finds no "
      "new shared species")
