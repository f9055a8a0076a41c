"""Report plumbing, the battery entry points, and the CLI contract."""

import json

import pytest

import clt_spectra.verify
from clt_spectra import make_report
from clt_spectra.cli import run
from clt_spectra.report import CSV_HEADER, reports_csv, reports_document
from clt_spectra.verify import exact_battery, negative_control, verify_all


def test_exact_battery_green():
    reports = exact_battery()
    assert len(reports) >= 30
    assert all(r.passed for r in reports)


def test_negative_control_fails():
    r = negative_control(None)
    assert not r.passed
    assert r.context.get("expected_failure") is True


def test_reports_csv_shape():
    rows = [make_report("demo", 0.0, 1.0, n=2, m=1)]
    text = reports_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "name,n,m,lhs,rhs,slack,pass"
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("demo,2,1,") and lines[1].endswith(",true")


def test_reports_document_rejects_empty():
    with pytest.raises(ValueError):
        reports_document([])


def test_cli_density_json(capsys):
    assert run(["density", "--spec", "gaussian:sigma=1", "--nodes", "512"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "clt-spectra/1"
    assert abs(doc["variance"] - 1.0) <= 1e-6


def test_cli_determinism(capsys):
    argv = ["theta", "--spec", "gaussian:sigma=1", "--nodes", "512", "--seed", "42"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first


def test_cli_density_round_trip(tmp_path, capsys):
    path = str(tmp_path / "d.dat")
    assert run(["density", "--spec", "gamma:beta=4", "--nodes", "2048", "--output", path]) == 0
    direct = json.loads(capsys.readouterr().out)["jst"]
    assert run(["density", "--spec", f"file:{path}"]) == 0
    reread = json.loads(capsys.readouterr().out)["jst"]
    assert abs(direct - reread) <= 1e-9


def test_cli_theta_inf_sentinel(capsys):
    code = run(["theta", "--spec", "discrete:-1=0.5,1=0.5", "--n", "2", "--exact"])
    captured = capsys.readouterr()
    assert code == 0
    assert "inf" in captured.err
    assert json.loads(captured.out)["theta"] == "inf"


def test_cli_spectrum_csv(capsys):
    assert run(["spectrum", "--spec", "discrete:0=0.25,1=0.5,2=0.25", "--exact", "--format", "csv"]) == 0
    head = capsys.readouterr().out.split("\n", 1)[0]
    assert head.startswith("node,")


def test_cli_exact_trace(capsys):
    assert run(["trace", "--spec", "discrete:0=0.25,1=0.5,2=0.25", "--exact"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["trace"] - 5.0 / 3.0) <= 1e-12


def test_cli_closed_form_table(capsys):
    assert run(["closed-form", "--spec", "gamma:beta=2", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "family,n,k,value,kind"
    assert any(line.startswith("gamma,2,1,0.5,") for line in lines)


def test_cli_efron_stein(capsys):
    assert run(["efron-stein", "--spec", "discrete:0=0.25,1=0.5,2=0.25", "--n", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["total_second_moment"] - 3.75) <= 1e-12
    assert abs(doc["identity_residual"]) <= 1e-12


def test_cli_error_exit_codes(capsys):
    assert run(["theta", "--spec", "nosuch:x=1"]) == 1
    assert run(["theta", "--frobnicate"]) == 1
    assert run(["efron-stein", "--spec", "gaussian:sigma=1"]) == 1
    capsys.readouterr()


def test_cli_bounds_exit_2_on_violation(monkeypatch, capsys):
    def broken_battery(spec, cfg=None, n_max=3, seed=42):
        return [make_report("forced-violation", 2.0, 1.0)]

    monkeypatch.setattr(clt_spectra.verify, "family_battery", broken_battery)
    code = run(["bounds", "--spec", "gaussian:sigma=1"])
    out = capsys.readouterr().out
    assert code == 2
    assert json.loads(out)["reports"][0]["pass"] is False


def test_cli_verify_alias(monkeypatch, capsys):
    seen = {}

    def tiny_verify_all(spec=None, cfg=None, n_max=3, seed=42):
        seen["called"] = True
        return [make_report("stub", 0.0, 1.0)]

    monkeypatch.setattr(clt_spectra.verify, "verify_all", tiny_verify_all)
    assert run(["verify", "--format", "csv"]) == 0
    assert seen.get("called") is True
    assert capsys.readouterr().out.startswith(CSV_HEADER)


def test_cli_expected_failure_that_passes_trips_exit_2(monkeypatch, capsys):
    def suspicious(spec=None, cfg=None, n_max=3, seed=42):
        return [make_report("control", 0.0, 1.0, context={"expected_failure": True})]

    monkeypatch.setattr(clt_spectra.verify, "verify_all", suspicious)
    assert run(["verify-all"]) == 2
    capsys.readouterr()


def test_cli_thread_cap_env(monkeypatch, capsys):
    monkeypatch.setenv("CLT_SPECTRA_THREADS", "1")
    assert run(["closed-form"]) == 0
    capsys.readouterr()


def test_verify_all_includes_control():
    reports = verify_all(n_max=2)
    names = [r.name for r in reports]
    assert "negative-control-inflated-theta" in names
    hard = [r for r in reports if not r.passed and not r.context.get("expected_failure")]
    assert hard == []
