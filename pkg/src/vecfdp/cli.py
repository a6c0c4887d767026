"""Command-line interface: data ingestion, model fitting, in-sample and
predictive analyses, baselines, simulation experiments, and the validation
battery.

Reports are JSON by default (probabilities in both linear and log scale);
row-oriented outputs (extrapolation curves, experiment tables) are CSV.
Exit codes: 0 ok, 1 input error, 2 numerical error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .abundance import IngestError, ants_csv_path, ingest
from .baselines import chao_shared_estimator, frequency_counts, yue_estimator
from .estimation import MomentRangeError, fit_all
from .insample import (
    correlation,
    expected_in_sample,
    prior_joint,
    prior_marginal_global,
    prior_marginal_shared,
)
from .logmath import ConvergenceError, DomainError
from .mprior import OneShiftedPoisson
from .prediction import (
    ObservedState,
    expected_new,
    extrapolation_curves,
    one_step_discovery_prob,
    one_step_shared_pmf,
    posterior_m_mean,
    posterior_m_pmf,
    predictive_pair_probs,
    shared_coverage_prob,
    shared_pmf,
)
from .simulate import Experiment1Config, Experiment2Config, run_experiment1, run_experiment2
from .validation import run_all
from .vcoef import ModelParams, VCoefficients

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2
EXIT_VALIDATION = 3


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors map to the input-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit2(f"{self.prog}: error: {message}")


class SystemExit2(Exception):
    pass


def _prob(p: float) -> dict:
    return {"value": p, "log": math.log(p) if p > 0.0 else float("-inf")}


def _pmf_report(table, top: int = 20) -> dict:
    entries = [{"key": list(k) if isinstance(k, tuple) else k, "prob": v}
               for k, v in table.top_entries(top)]
    return {"total_mass": table.total_mass(), "top_entries": entries}


def _emit_json(report: dict, stream) -> None:
    stream.write(json.dumps(report, indent=2, sort_keys=True))
    stream.write("\n")


def _emit_rows(rows: list[dict], stream) -> None:
    if not rows:
        return
    writer = csv.DictWriter(stream, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)


def _model_from_args(args, table) -> tuple[VCoefficients, dict]:
    """Explicit parameters when all three are given, otherwise fit."""
    given = [args.lam, args.gamma1, args.gamma2]
    if all(v is not None for v in given):
        params = ModelParams(args.gamma1, args.gamma2, OneShiftedPoisson(args.lam))
        meta = {"source": "flags", "lambda": args.lam,
                "gamma1": args.gamma1, "gamma2": args.gamma2}
    elif any(v is not None for v in given):
        raise SystemExit2("provide all of --lam/--gamma1/--gamma2 or none")
    else:
        fit = fit_all(table, args.mode)
        params = fit.params
        meta = {"source": f"fit ({args.mode})", "lambda": fit.lam,
                "gamma1": params.gamma1, "gamma2": params.gamma2,
                "residuals": {"lambda": fit.lambda_residual,
                              "gamma1": fit.gamma1_residual,
                              "gamma2": fit.gamma2_residual}}
    vc = VCoefficients(params, tol=args.tol, max_terms=args.max_terms)
    return vc, meta


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-12,
                   help="relative series truncation tolerance")
    p.add_argument("--max-terms", type=int, default=10**6,
                   help="cap on series terms before a convergence error")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--mode", choices=("plug_in", "unbiased"), default="plug_in",
                   help="Simpson moment estimator")
    p.add_argument("--format", choices=("json", "csv"), default=None,
                   help="output format (default json; curve/simulate default csv)")
    p.add_argument("--output", default=None, help="write to file instead of stdout")


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lam", type=float, default=None,
                   help="species-count rate (skips fitting when given)")
    p.add_argument("--gamma1", type=float, default=None)
    p.add_argument("--gamma2", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vecfdp",
                     description="Shared-species analysis for two-area "
                                 "abundance data")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="diversity stats and fitted parameters")
    p.add_argument("table", help="abundance CSV (species,count_1,count_2)")
    _add_common(p)

    p = sub.add_parser("insample", help="prior laws of distinct/shared species")
    p.add_argument("table")
    _add_params(p)
    _add_common(p)

    p = sub.add_parser("predict", help="posterior prediction for (m1, m2)")
    p.add_argument("table")
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--m2", type=int, required=True)
    _add_params(p)
    _add_common(p)

    p = sub.add_parser("discover", help="one-step shared species discovery")
    p.add_argument("table")
    _add_params(p)
    _add_common(p)

    p = sub.add_parser("curve", help="extrapolation curve rows as CSV")
    p.add_argument("table")
    p.add_argument("--grid", default="10:10:2",
                   help="M1:M2:STEP, Cartesian grid 0..M1 x 0..M2 in steps")
    _add_params(p)
    _add_common(p)

    p = sub.add_parser("baselines", help="frequentist one-step estimators")
    p.add_argument("table")
    _add_common(p)

    p = sub.add_parser("simulate", help="benchmark experiments")
    p.add_argument("--experiment", type=int, choices=(1, 2), required=True)
    p.add_argument("--alpha1", type=float, default=0.8)
    p.add_argument("--alpha2", type=float, default=0.8)
    p.add_argument("--m-true", type=int, default=60)
    p.add_argument("--grid", default="50:400:50",
                   help="experiment 1 sample sizes LO:HI:STEP")
    p.add_argument("--n", type=int, default=400, help="experiment 2 sample size")
    p.add_argument("--replications", type=int, default=20)
    _add_common(p)

    p = sub.add_parser("validate", help="numerical validation battery")
    p.add_argument("--full", action="store_true",
                   help="larger grids and Monte-Carlo sample")
    _add_common(p)

    sub.add_parser("ants-path", help="print the bundled example dataset path")
    return parser


def _cmd_fit(args) -> dict:
    table = ingest(args.table)
    fit = fit_all(table, args.mode)
    return {
        "command": "fit",
        "input": {"path": args.table, **table.summary()},
        "diversity": {"ss1": fit.stats.ss1, "ss2": fit.stats.ss2,
                      "cp": fit.stats.cp, "morisita": fit.stats.morisita,
                      "mode": fit.stats.mode},
        "params": {"lambda": fit.lam, "gamma1": fit.params.gamma1,
                   "gamma2": fit.params.gamma2},
        "residuals": {"lambda": fit.lambda_residual,
                      "gamma1": fit.gamma1_residual,
                      "gamma2": fit.gamma2_residual},
    }


def _cmd_insample(args) -> dict:
    table = ingest(args.table)
    vc, meta = _model_from_args(args, table)
    n1, n2 = table.n1, table.n2
    e_k1, e_k2, e_k, e_s = expected_in_sample(vc, min(n1, 50), min(n2, 50)) \
        if max(n1, n2) <= 50 else (None,) * 4
    report = {
        "command": "insample",
        "input": {"path": args.table, **table.summary()},
        "params": meta,
        "correlation": correlation(vc.params, tol=args.tol,
                                   max_terms=args.max_terms),
    }
    if e_k is not None:
        report["expected"] = {"k1": e_k1, "k2": e_k2, "k": e_k, "s": e_s}
        report["pmf_joint"] = _pmf_report(prior_joint(vc, n1, n2))
        report["pmf_global"] = _pmf_report(prior_marginal_global(vc, n1, n2))
        report["pmf_shared"] = _pmf_report(prior_marginal_shared(vc, n1, n2))
    else:
        report["note"] = ("in-sample pmf tables are reported only for "
                          "n1, n2 <= 50; larger samples get correlation only")
    return report


def _cmd_predict(args) -> dict:
    table = ingest(args.table)
    vc, meta = _model_from_args(args, table)
    state = ObservedState.from_abundance(table)
    m1, m2 = args.m1, args.m2
    exp = expected_new(vc, state, m1, m2)
    report = {
        "command": "predict",
        "input": {"path": args.table, **table.summary()},
        "params": meta,
        "m1": m1, "m2": m2,
        "posterior_unseen": {"mean": posterior_m_mean(vc, state),
                             "pmf": _pmf_report(posterior_m_pmf(vc, state))},
        "expected_new": {"k1": exp.k1, "k2": exp.k2, "k": exp.k, "s": exp.s},
        "coverage_prob": _prob(shared_coverage_prob(vc, state, m1, m2)),
    }
    if m1 + m2 <= 12:
        report["shared_pmf"] = _pmf_report(shared_pmf(vc, state, m1, m2))
    return report


def _cmd_discover(args) -> dict:
    table = ingest(args.table)
    vc, meta = _model_from_args(args, table)
    state = ObservedState.from_abundance(table)
    pmf = one_step_shared_pmf(vc, state)
    pair = predictive_pair_probs(vc, state)
    return {
        "command": "discover",
        "input": {"path": args.table, **table.summary()},
        "params": meta,
        "one_step_shared_pmf": {str(s): _prob(pmf.prob(s)) for s in (0, 1, 2)},
        "discovery_prob": _prob(one_step_discovery_prob(vc, state)),
        "pair_probs": pair.as_dict(),
        "pair_normalizer_ratio": pair.normalizer_ratio,
    }


def _parse_grid(spec: str) -> list[tuple[int, int]]:
    try:
        m1_max, m2_max, step = (int(x) for x in spec.split(":"))
        if m1_max < 0 or m2_max < 0 or step < 1:
            raise ValueError
    except ValueError:
        raise SystemExit2(f"bad --grid {spec!r}; expected M1:M2:STEP") from None
    points1 = sorted(set(list(range(0, m1_max + 1, step)) + [m1_max]))
    points2 = sorted(set(list(range(0, m2_max + 1, step)) + [m2_max]))
    return [(a, b) for a in points1 for b in points2]


def _cmd_curve(args) -> list[dict]:
    table = ingest(args.table)
    vc, meta = _model_from_args(args, table)
    state = ObservedState.from_abundance(table)
    return extrapolation_curves(vc, state, _parse_grid(args.grid))


def _cmd_baselines(args) -> dict:
    table = ingest(args.table)
    counts = frequency_counts(table)
    chao = chao_shared_estimator(counts, table.n1, table.n2)
    report = {
        "command": "baselines",
        "input": {"path": args.table, **table.summary()},
        "frequency_counts": {"f_1plus": counts.f_1plus,
                             "f_plus1": counts.f_plus1, "f_11": counts.f_11},
        "chao_sh": {"value": chao.value, "exceeds_one": chao.exceeds_one},
        "chao2000_richness": "unavailable",
    }
    if table.n1 == table.n2:
        yue = yue_estimator(counts, table.n1, table.n2)
        report["yue"] = {"value": yue.value, "exceeds_one": yue.exceeds_one}
    else:
        report["yue"] = "unavailable: requires equal sample sizes"
    return report


def _cmd_simulate(args) -> list[dict]:
    if args.experiment == 1:
        lo, hi, step = (int(x) for x in args.grid.split(":"))
        cfg = Experiment1Config(alpha1=args.alpha1, alpha2=args.alpha2,
                                m_true=args.m_true,
                                grid=tuple(range(lo, hi + 1, step)),
                                replications=args.replications,
                                seed=args.seed or 11, mode=args.mode)
        return run_experiment1(cfg)
    cfg = Experiment2Config(alpha1=args.alpha1, alpha2=args.alpha2,
                            m_true=args.m_true, n=args.n,
                            replications=args.replications,
                            seed=args.seed or 11, mode=args.mode)
    return run_experiment2(cfg)


def _cmd_validate(args) -> tuple[dict, bool]:
    results = run_all(fast=not args.full)
    ok = all(r.passed for r in results)
    return {"command": "validate", "passed": ok,
            "checks": [r.as_dict() for r in results]}, ok


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit2 as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help/--version
        return int(exc.code or 0)

    out = io.StringIO()
    try:
        if args.command == "ants-path":
            print(ants_csv_path())
            return EXIT_OK
        if args.command == "validate":
            report, ok = _cmd_validate(args)
            _emit_json(report, out)
            code = EXIT_OK if ok else EXIT_VALIDATION
        elif args.command in ("curve", "simulate"):
            rows = _cmd_curve(args) if args.command == "curve" else _cmd_simulate(args)
            if args.format == "json":
                _emit_json({"command": args.command, "rows": rows}, out)
            else:
                _emit_rows(rows, out)
            code = EXIT_OK
        else:
            handler = {"fit": _cmd_fit, "insample": _cmd_insample,
                       "predict": _cmd_predict, "discover": _cmd_discover,
                       "baselines": _cmd_baselines}[args.command]
            report = handler(args)
            if args.format == "csv":
                raise SystemExit2(f"{args.command} only emits json")
            _emit_json(report, out)
            code = EXIT_OK
    except (IngestError, SystemExit2) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, DomainError, MomentRangeError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = out.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
