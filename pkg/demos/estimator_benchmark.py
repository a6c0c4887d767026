#!/usr/bin/env python3
"""Desk-scale reruns of the two benchmark experiments on synthetic
geometric-decay populations.

Experiment 1 compares one-step shared-species discovery estimators against
the exact population value over growing sample sizes.  Experiment 2 fits on
a training fraction and predicts the shared species of the held-out rest.

Run:  python demos/estimator_benchmark.py          (about a minute)
"""

import time

from vecfdp.simulate import (
    Experiment1Config,
    Experiment2Config,
    run_experiment1,
    run_experiment2,
)

t0 = time.time()
print("=== experiment 1: one-step discovery, alpha1 = alpha2 = 0.8 ===")
cfg1 = Experiment1Config(grid=(50, 100, 200, 400), replications=20, seed=11)
rows = run_experiment1(cfg1)
by_n = {}
for row in rows:
    by_n.setdefault(row["n"], {})[row["method"]] = row
print(f"{'n':>5} {'true':>22} {'proposed':>22} {'chao_sh':>10} {'yue':>8}")
for n in cfg1.grid:
    d = by_n[n]
    true = d["true"]
    prop = d["proposed"]
    print(f"{n:>5} {true['median']:.4f} [{true['q1']:.4f},{true['q3']:.4f}]"
          f" {prop['median']:.4f} [{prop['q1']:.4f},{prop['q3']:.4f}]"
          f" {d['chao_sh']['median']:>10.4f} {d['yue']['median']:>8.4f}")
print("medians with interquartile bands; all methods converge with n")

print()
print("=== experiment 2: predicting held-out shared species, n = 400 ===")
cfg2 = Experiment2Config(n=400, replications=20, seed=11)
for row in run_experiment2(cfg2):
    print(f"train {int(row['split'] * 100):>3}%: predicted "
          f"{row['predicted_median']:6.2f} "
          f"[{row['predicted_q1']:.2f}, {row['predicted_q3']:.2f}]  "
          f"true {row['true_median']:5.1f}  "
          f"median error {row['error_median']:+.2f}")
print(f"\ntotal runtime {time.time() - t0:.0f}s")
