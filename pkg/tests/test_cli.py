import csv
import io
import json

import pytest

from vecfdp.abundance import ants_csv_path
from vecfdp.cli import main


@pytest.fixture()
def toy_csv(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text("species,count_1,count_2\n"
                    "a,8,6\nb,5,0\nc,3,4\nd,1,2\ne,0,5\n", encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_fit_reports_params_and_stats(capsys, toy_csv):
    code, out, err = run(capsys, "fit", toy_csv)
    assert code == 0
    report = json.loads(out)
    assert report["input"]["n1"] == 17 and report["input"]["n2"] == 17
    assert report["params"]["lambda"] > 0
    assert report["residuals"]["lambda"] < 1e-10


def test_fit_missing_file_is_input_error(capsys, tmp_path):
    code, out, err = run(capsys, "fit", str(tmp_path / "nope.csv"))
    assert code == 1
    assert "input error" in err


def test_malformed_row_is_input_error(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("species,count_1,count_2\nx,0,0\n", encoding="utf-8")
    code, out, err = run(capsys, "fit", str(path))
    assert code == 1
    assert "zero count in both groups" in err


def test_degenerate_moments_is_numerical_error(capsys, tmp_path):
    # a single fully shared species gives cp = 1: no finite rate exists
    path = tmp_path / "deg.csv"
    path.write_text("species,count_1,count_2\nonly,5,7\n", encoding="utf-8")
    code, out, err = run(capsys, "fit", str(path))
    assert code == 2
    assert "numerical error" in err


def test_insample_report(capsys, toy_csv):
    code, out, err = run(capsys, "insample", toy_csv)
    assert code == 0
    report = json.loads(out)
    assert 0.0 < report["correlation"] <= 1.0
    assert report["pmf_joint"]["total_mass"] == pytest.approx(1.0, abs=1e-8)
    exp = report["expected"]
    assert exp["s"] == pytest.approx(exp["k1"] + exp["k2"] - exp["k"], abs=1e-9)


def test_insample_with_explicit_params(capsys, toy_csv):
    code, out, err = run(capsys, "insample", toy_csv, "--lam", "2.0",
                         "--gamma1", "0.5", "--gamma2", "0.5")
    assert code == 0
    report = json.loads(out)
    assert report["params"]["source"] == "flags"
    # equal concentrations: correlation matches the symmetric closed form
    assert 0.0 < report["correlation"] < 1.0


def test_insample_large_table_reports_correlation_only(capsys):
    code, out, err = run(capsys, "insample", str(ants_csv_path()))
    assert code == 0
    report = json.loads(out)
    assert "note" in report and "pmf_joint" not in report
    assert 0.0 < report["correlation"] <= 1.0


def test_predict_report_with_explicit_params(capsys, toy_csv):
    code, out, err = run(capsys, "predict", toy_csv, "--m1", "2", "--m2", "2",
                         "--lam", "3.0", "--gamma1", "1.0", "--gamma2", "0.8")
    assert code == 0
    report = json.loads(out)
    assert report["params"]["source"] == "flags"
    assert report["shared_pmf"]["total_mass"] == pytest.approx(1.0, abs=1e-8)
    assert 0.0 <= report["coverage_prob"]["value"] <= 1.0


def test_predict_partial_params_rejected(capsys, toy_csv):
    code, out, err = run(capsys, "predict", toy_csv, "--m1", "1", "--m2", "1",
                         "--lam", "3.0")
    assert code == 1


def test_discover_report(capsys, toy_csv):
    code, out, err = run(capsys, "discover", toy_csv)
    assert code == 0
    report = json.loads(out)
    pmf = {int(k): v["value"] for k, v in report["one_step_shared_pmf"].items()}
    assert sum(pmf.values()) == pytest.approx(1.0, abs=1e-8)
    assert report["discovery_prob"]["value"] == pytest.approx(
        1.0 - pmf[0], abs=1e-10)
    assert sum(report["pair_probs"].values()) == pytest.approx(1.0, abs=1e-10)


def test_discover_ants_positive(capsys):
    code, out, err = run(capsys, "discover", str(ants_csv_path()))
    assert code == 0
    report = json.loads(out)
    assert report["input"]["n1"] == 934
    assert report["discovery_prob"]["value"] > 0.0


def test_discover_with_explicit_params(capsys, toy_csv):
    code, out, err = run(capsys, "discover", toy_csv, "--lam", "4.0",
                         "--gamma1", "1.0", "--gamma2", "1.0")
    assert code == 0
    report = json.loads(out)
    assert report["pair_normalizer_ratio"] == pytest.approx(1.0, abs=1e-8)


def test_predict_with_fitted_params(capsys, toy_csv):
    code, out, err = run(capsys, "predict", toy_csv, "--m1", "30", "--m2", "10")
    assert code == 0
    report = json.loads(out)
    assert report["params"]["source"].startswith("fit")
    exp = report["expected_new"]
    assert exp["s"] == pytest.approx(exp["k1"] + exp["k2"] - exp["k"], abs=1e-8)
    assert "shared_pmf" not in report  # large futures report moments only


def test_curve_csv_rows(capsys, toy_csv):
    code, out, err = run(capsys, "curve", toy_csv, "--grid", "4:4:2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 9
    first = rows[0]
    assert first["m1"] == "0" and first["m2"] == "0"
    assert float(first["coverage_prob"]) == pytest.approx(1.0, abs=1e-9)


def test_baselines_report(capsys, toy_csv):
    code, out, err = run(capsys, "baselines", toy_csv)
    assert code == 0
    report = json.loads(out)
    assert report["yue"]["value"] >= 0.0
    assert report["chao_sh"]["value"] >= 0.0
    assert report["chao2000_richness"] == "unavailable"


def test_baselines_unequal_sizes(capsys, tmp_path):
    path = tmp_path / "uneq.csv"
    path.write_text("species,count_1,count_2\na,2,1\nb,1,0\n", encoding="utf-8")
    code, out, err = run(capsys, "baselines", str(path))
    assert code == 0
    report = json.loads(out)
    assert report["yue"].startswith("unavailable")


def test_baselines_overflow_flagged(capsys, tmp_path):
    path = tmp_path / "single.csv"
    path.write_text("species,count_1,count_2\na,1,1\n", encoding="utf-8")
    code, out, err = run(capsys, "baselines", str(path))
    assert code == 0
    report = json.loads(out)
    assert report["yue"]["value"] == pytest.approx(3.0)
    assert report["yue"]["exceeds_one"] is True
    assert report["chao_sh"]["exceeds_one"] is True


def test_curve_bad_grid_is_input_error(capsys, toy_csv):
    code, out, err = run(capsys, "curve", toy_csv, "--grid", "4:4")
    assert code == 1
    assert "bad --grid" in err


def test_simulate_experiment1_csv(capsys):
    code, out, err = run(capsys, "simulate", "--experiment", "1",
                         "--grid", "30:60:30", "--replications", "2",
                         "--seed", "5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {row["method"] for row in rows} == {"proposed", "yue", "chao_sh",
                                               "true"}


def test_simulate_experiment2_csv(capsys):
    code, out, err = run(capsys, "simulate", "--experiment", "2",
                         "--n", "40", "--replications", "2", "--seed", "5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 9


def test_simulate_json_format(capsys):
    code, out, err = run(capsys, "simulate", "--experiment", "1",
                         "--grid", "30:30:30", "--replications", "2",
                         "--seed", "5", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["command"] == "simulate"
    assert len(report["rows"]) == 4


def test_json_reports_round_trip_byte_identical(capsys, toy_csv, tmp_path):
    code, out, err = run(capsys, "fit", toy_csv)
    assert code == 0
    reparsed = json.loads(out)
    re_emitted = json.dumps(reparsed, indent=2, sort_keys=True) + "\n"
    assert re_emitted == out


def test_output_file(capsys, toy_csv, tmp_path):
    target = tmp_path / "report.json"
    code, out, err = run(capsys, "fit", toy_csv, "--output", str(target))
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["command"] == "fit"


def test_deterministic_given_seed(capsys, toy_csv):
    _, out1, _ = run(capsys, "predict", toy_csv, "--m1", "2", "--m2", "1",
                     "--seed", "9")
    _, out2, _ = run(capsys, "predict", toy_csv, "--m1", "2", "--m2", "1",
                     "--seed", "9")
    assert out1 == out2


def test_validate_passes(capsys):
    code, out, err = run(capsys, "validate")
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    assert all(check["passed"] for check in report["checks"])


def test_validate_failure_exit_code(capsys, monkeypatch):
    from vecfdp import cli
    from vecfdp.validation import CheckResult

    def broken(*, fast=True):
        return [CheckResult(name="forced", measured=1.0, threshold=1e-8,
                            passed=False)]

    monkeypatch.setattr(cli, "run_all", broken)
    code, out, err = run(capsys, "validate")
    assert code == 3
    assert json.loads(out)["passed"] is False


def test_unknown_command_is_input_error(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1
