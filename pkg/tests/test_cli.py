"""Command-line contract: exit codes, schemas, file formats."""

import csv
import json

import jsonschema
import pytest

from asep_exact import cli


def run(argv):
    return cli.main(argv)


def test_no_command_is_usage_error(capsys):
    assert run([]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert run(["verify-delta", "--p", "0.5", "--y", "0,1", "--frobnicate"]) == 1


def test_p_zero_exits_one_citing_hypothesis(capsys):
    code = run(["prob", "--p", "0", "--t", "1", "--y", "0,1", "--nu", "1,1"])
    assert code == 1
    assert "p != 0 hypothesis" in capsys.readouterr().err


def test_missing_rate_is_usage_error(capsys):
    assert run(["prob", "--y", "0,1", "--nu", "1,2", "--t", "1"]) == 1


def test_verify_delta_pass_and_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = run(
        ["verify-delta", "--p", "0.7", "--y", "0,1", "--nu", "1,2", "--out", str(out)]
    )
    assert code == 0
    assert "verify-delta: PASS" in capsys.readouterr().out
    report = json.loads(out.read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMAS["verify-delta"])
    assert report["passed"] is True
    assert report["quadrature"]["nodes"] >= 8
    assert report["tolerance"] == 1e-8


def test_verify_delta_impossible_tolerance_exits_two(capsys):
    # an unreachable tolerance must fail honestly with exit 2
    code = run(
        ["verify-delta", "--p", "0.7", "--y", "0,1", "--quad-tol", "1e-30",
         "--nodes", "8"]
    )
    assert code == 2
    assert "FAIL" in capsys.readouterr().out


def test_report_schema_validates_and_rejects():
    good = {
        "command": "verify-delta",
        "formula": "contour-sum-at-time-zero",
        "p": 0.7,
        "initial": {"sites": [0, 1], "species": [1, 2]},
        "margin": 2,
        "tolerance": 1e-8,
        "quadrature": {"nodes": 64, "radius": 0.3, "radius_rule": "balanced"},
        "max_residual": 1e-17,
        "passed": True,
    }
    jsonschema.validate(good, cli.REPORT_SCHEMAS["verify-delta"])
    for drop in ("max_residual", "quadrature", "formula"):
        bad = {k: v for k, v in good.items() if k != drop}
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(bad, cli.REPORT_SCHEMAS["verify-delta"])
    extra = dict(good, surprise=1)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(extra, cli.REPORT_SCHEMAS["verify-delta"])


def test_prob_csv_columns(tmp_path):
    out = tmp_path / "rows.csv"
    code = run(
        ["prob", "--p", "0.5", "--t", "0.3", "--y", "0,1", "--nu", "1,2",
         "--x", "0,2", "--pi", "2,1", "--csv", str(out)]
    )
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["sites"] for r in rows] == ["0 2"]
    assert rows[0]["species"] == "2 1"
    assert 0 <= float(rows[0]["value"]) <= 1
    assert abs(float(rows[0]["imag"])) < 1e-9
    assert "oracle" not in rows[0]


def test_prob_with_oracle_adds_column(tmp_path):
    out = tmp_path / "rows.csv"
    code = run(
        ["prob", "--p", "0.5", "--t", "0.3", "--y", "0,1", "--nu", "1,2",
         "--window", "-3,4", "--with-oracle", "--csv", str(out)]
    )
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert rows and "oracle" in rows[0]
    for row in rows:
        assert abs(float(row["value"]) - float(row["oracle"])) < 1e-6


def test_simulate_csv_histogram(tmp_path):
    out = tmp_path / "hist.csv"
    code = run(
        ["simulate", "--p", "0.7", "--t", "0.4", "--y", "0,1", "--nu", "2,1",
         "--trials", "500", "--seed", "5", "--csv", str(out)]
    )
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0]) == {"sites", "species", "count", "frequency"}
    assert sum(int(r["count"]) for r in rows) == 500
    for row in rows:
        assert float(row["frequency"]) == pytest.approx(int(row["count"]) / 500)


def test_compare_command_exit_codes(tmp_path, capsys):
    argv = ["compare", "--p", "0.7", "--t", "0.4", "--y", "0,1", "--nu", "2,1",
            "--trials", "20000", "--seed", "77"]
    assert run(argv) == 0
    assert "compare: PASS" in capsys.readouterr().out
    # an absurd threshold flips the same data to a verification failure
    assert run(argv + ["--z-threshold", "1e-9"]) == 2


def test_problem_file_round_trip(tmp_path):
    problem = {
        "p": "7/10",
        "t": 0.5,
        "N": 2,
        "M": 2,
        "Y": [0, 1],
        "nu": [2, 1],
        "targets": [{"X": [0, 1], "pi": [2, 1]}],
        "quad": {"nodes": 64, "radius": None},
    }
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(problem))
    out = tmp_path / "report.json"
    assert run(["prob", str(path), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMAS["prob"])
    assert report["targets"][0]["value"] == pytest.approx(0.4616951307536925, abs=5e-11)


def test_problem_file_unknown_field_rejected(tmp_path, capsys):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps({"p": 0.5, "t": 1.0, "Y": [0], "nu": [1], "bogus": 2}))
    assert run(["prob", str(path)]) == 1
    assert "bogus" in capsys.readouterr().err


def test_problem_file_inconsistent_counts_rejected(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(
        json.dumps({"p": 0.5, "t": 1.0, "N": 3, "Y": [0, 1], "nu": [1, 2]})
    )
    assert run(["prob", str(path)]) == 1


def test_manifest_dispatch_and_rejection(tmp_path, capsys):
    manifest = {"command": "verify-delta", "p": "1/2", "y": [0, 1, 2]}
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    assert run(["run", str(path)]) == 0
    path.write_text(json.dumps(dict(manifest, command="never-heard-of-it")))
    assert run(["run", str(path)]) == 1
    path.write_text(json.dumps(dict(manifest, mystery_knob=3)))
    assert run(["run", str(path)]) == 1


def test_schema_command_prints_everything(capsys):
    assert run(["schema"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"manifest", "problem", "reports", "csv"}
    assert set(doc["reports"]) == set(cli.REPORT_SCHEMAS)
    # every published schema is itself valid under the draft it names
    jsonschema.Draft202012Validator.check_schema(doc["manifest"])
    jsonschema.Draft202012Validator.check_schema(doc["problem"])
    for schema in doc["reports"].values():
        jsonschema.Draft202012Validator.check_schema(schema)


def test_oracle_command_report(tmp_path):
    out = tmp_path / "oracle.json"
    code = run(
        ["oracle", "--p", "0.5", "--t", "0.2", "--y", "0,1", "--nu", "1,2",
         "--out", str(out)]
    )
    assert code == 0
    report = json.loads(out.read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMAS["oracle"])
    assert report["total_value"] == pytest.approx(1.0, abs=1e-6)
    assert report["leakage"] <= 1e-10


def test_verify_braid_cli_small(tmp_path):
    out = tmp_path / "braid.json"
    code = run(
        ["verify-braid", "--p", "1/2", "--n", "3", "--points", "2", "--seed", "0",
         "--out", str(out)]
    )
    assert code == 0
    report = json.loads(out.read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMAS["verify-braid"])
    assert report["passed"] and report["checks"] > 0


def test_verify_braid_needs_rational(capsys):
    assert run(["verify-braid", "--p", "0.5", "--n", "3"]) == 1
    assert "rational" in capsys.readouterr().err


def test_verify_b_classes_cli(tmp_path):
    out = tmp_path / "b.json"
    code = run(
        ["verify-b-classes", "--p", "0.7", "--y", "0,1,2", "--x", "1,2,4",
         "--out", str(out)]
    )
    assert code == 0
    report = json.loads(out.read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMAS["verify-b-classes"])
    assert report["passed"]


def test_verify_second_class_cli(tmp_path):
    out = tmp_path / "sc.json"
    code = run(
        ["verify-second-class", "--p", "2/5", "--max-n", "3", "--seed", "0",
         "--out", str(out)]
    )
    assert code == 0
    report = json.loads(out.read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMAS["verify-second-class"])
    assert report["passed"] and report["checks"] > 0
