import json
import math
import subprocess
import sys

import pytest

from confound_prob.cli import build_parser
from confound_prob.report import RESULT_COLUMNS, read_results_csv, read_sweep_csv

from helpers import run_cli

COMMANDS = ("evalue", "analyze", "sweep", "plot", "verify")


# --- help and usage -------------------------------------------------------------

@pytest.mark.parametrize("cmd", COMMANDS)
def test_help_exits_zero_and_lists_every_flag(cmd):
    code, out, _ = run_cli(cmd, "--help")
    assert code == 0
    sub = build_parser()._subparsers._group_actions[0].choices[cmd]
    for action in sub._actions:
        for opt in action.option_strings:
            assert opt in out


def test_top_level_help():
    code, out, _ = run_cli("--help")
    assert code == 0 and all(c in out for c in COMMANDS)


def test_usage_error_exits_one():
    code, _, err = run_cli("analyze")
    assert code == 1 and "--input" in err
    assert run_cli("nonsense")[0] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "confound_prob", "evalue", "--rr", "2", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["evalue"] == pytest.approx(2 + math.sqrt(2), abs=1e-12)


# --- evalue ---------------------------------------------------------------------

def test_evalue_null():
    code, out, _ = run_cli("evalue", "--rr", "1.0", "--json")
    assert code == 0 and json.loads(out) == {"rr": 1.0, "evalue": 1.0, "evalue_ci_limit": None}


def test_evalue_two_text():
    code, out, _ = run_cli("evalue", "--rr", "2.0")
    assert code == 0 and "3.414213562" in out


def test_evalue_ci_touching_null():
    code, out, _ = run_cli("evalue", "--rr", "2.0", "--lcl", "1.0", "--ucl", "4.0", "--json")
    assert code == 0 and json.loads(out)["evalue_ci_limit"] == 1.0


def test_evalue_ci_limit_value():
    _, out, _ = run_cli("evalue", "--rr", "2.0", "--lcl", "1.4", "--ucl", "2.86", "--json")
    assert json.loads(out)["evalue_ci_limit"] == pytest.approx(1.4 + math.sqrt(0.56), rel=1e-15)


@pytest.mark.parametrize("argv", [("--rr", "0"), ("--rr", "-1"), ("--rr", "2", "--lcl", "1.5"),
                                  ("--rr", "2", "--lcl", "2.5", "--ucl", "3")])
def test_evalue_invalid(argv):
    code, out, err = run_cli("evalue", *argv)
    assert code == 1 and out == "" and "error" in err


# --- analyze --------------------------------------------------------------------

def analyze(fixture_csv, tmp_path, *extra, name="r.csv"):
    out = tmp_path / name
    code, stdout, stderr = run_cli("analyze", "--input", str(fixture_csv), "--sigma-gamma", "0.5",
                                   "--default-s", "0.15", "--out", str(out), *extra)
    return code, out, stdout, stderr


def test_analyze_fixture(fixture_csv, tmp_path):
    code, out, _, _ = analyze(fixture_csv, tmp_path, "--json", str(tmp_path / "r.json"))
    assert code == 0
    text = out.read_bytes().decode("utf-8")
    assert text.splitlines()[0] == ",".join(RESULT_COLUMNS)
    rows = read_results_csv(text)
    assert [r["case_id"] for r in rows] == [line.split(",")[0] for line in fixture_csv.read_text().splitlines()[1:]]
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["default_s"] == 0.15 and doc["prior"] == {"sigma_theta": 1.0, "sigma_gamma": 0.5}
    assert [r["p_exceed"] for r in doc["results"]] == [r["p_exceed"] for r in rows]


def test_analyze_to_stdout(fixture_csv):
    code, out, _ = run_cli("analyze", "--input", str(fixture_csv), "--no-ci")
    assert code == 0 and len(out.splitlines()) == 12
    assert all(r["theta_ci_lo"] is None for r in read_results_csv(out))


def test_analyze_quad_matches_closed(fixture_csv, tmp_path):
    _, a, _, _ = analyze(fixture_csv, tmp_path, "--no-ci", name="a.csv")
    code, b, _, _ = analyze(fixture_csv, tmp_path, "--no-ci", "--engine", "quad", name="b.csv")
    assert code == 0
    for x, y in zip(read_results_csv(a.read_text()), read_results_csv(b.read_text())):
        assert abs(x["p_exceed"] - y["p_exceed"]) < 1e-6


def test_analyze_mc_seed_from_env(fixture_csv, tmp_path, monkeypatch):
    args = ("--no-ci", "--engine", "mc", "--mc-draws", "20000")
    monkeypatch.setenv("CONFOUND_PROB_SEED", "7")
    _, env_out, _, _ = analyze(fixture_csv, tmp_path, *args, name="env.csv")
    monkeypatch.delenv("CONFOUND_PROB_SEED")
    _, flag_out, _, _ = analyze(fixture_csv, tmp_path, *args, "--seed", "7", name="flag.csv")
    _, other, _, _ = analyze(fixture_csv, tmp_path, *args, "--seed", "8", name="other.csv")
    assert env_out.read_bytes() == flag_out.read_bytes()
    assert env_out.read_bytes() != other.read_bytes()


def test_analyze_flag_beats_env(fixture_csv, tmp_path, monkeypatch):
    args = ("--no-ci", "--engine", "mc", "--mc-draws", "20000")
    _, a, _, _ = analyze(fixture_csv, tmp_path, *args, "--seed", "3", name="a.csv")
    monkeypatch.setenv("CONFOUND_PROB_SEED", "99")
    _, b, _, _ = analyze(fixture_csv, tmp_path, *args, "--seed", "3", name="b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_analyze_bad_env_seed(fixture_csv, tmp_path, monkeypatch):
    monkeypatch.setenv("CONFOUND_PROB_SEED", "seven")
    code, _, _, err = analyze(fixture_csv, tmp_path, "--engine", "mc")
    assert code == 1 and "CONFOUND_PROB_SEED" in err


def corrupt(fixture_csv, tmp_path):
    lines = fixture_csv.read_text().splitlines()
    lines[3] = "smk-02,smoking,RR,abc,,,,"
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines) + "\n")
    return bad


def test_analyze_ingest_failure_reports_json(fixture_csv, tmp_path):
    code, out, stdout, _ = analyze(corrupt(fixture_csv, tmp_path), tmp_path)
    assert code == 1 and not out.exists()
    assert json.loads(stdout) == [{"line": 4, "field": "point", "message": "not a number: 'abc'"}]


def test_analyze_skip_invalid_partial(fixture_csv, tmp_path):
    code, out, _, err = analyze(corrupt(fixture_csv, tmp_path), tmp_path, "--skip-invalid", "--no-ci")
    assert code == 2
    assert len(read_results_csv(out.read_text())) == 10
    assert json.loads(err[err.index("["):])[0]["line"] == 4


def test_analyze_missing_file(tmp_path):
    code, _, stdout, _ = analyze(tmp_path / "nope.csv", tmp_path)
    assert code == 1 and json.loads(stdout)[0]["field"] == "input"


def test_analyze_bad_header(tmp_path):
    f = tmp_path / "h.csv"
    f.write_text("case_id,point\nx,2\n")
    code, _, stdout, _ = analyze(f, tmp_path)
    assert code == 1 and json.loads(stdout)[0]["field"] == "header"


def test_analyze_all_cases_fail(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("case_id,domain,measure,point,ci_lower,ci_upper,se_log,evalue\nx,d,RR,2,,,,\n")
    code, _, _ = run_cli("analyze", "--input", str(f), "--default-s", "-1")
    assert code == 1


def test_analyze_empty_input(tmp_path):
    f = tmp_path / "e.csv"
    f.write_text("case_id,domain,measure,point,ci_lower,ci_upper,se_log,evalue\n")
    code, out, _ = run_cli("analyze", "--input", str(f))
    assert code == 0 and out == ",".join(RESULT_COLUMNS) + "\n"


# --- sweep ----------------------------------------------------------------------

def test_sweep_paper_grid(fixture_csv, tmp_path):
    out, summ = tmp_path / "s.csv", tmp_path / "span.csv"
    code, _, _ = run_cli("sweep", "--input", str(fixture_csv), "--default-s", "0.15",
                         "--sigma-gamma-grid", "0.25,0.5,1.0", "--out", str(out), "--summary", str(summ))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "case_id,sigma_gamma,p_exceed" and len(lines) == 34
    assert len(summ.read_text().splitlines()) == 12
    assert len(read_sweep_csv(out.read_text())) == 11


def test_sweep_single_value(fixture_csv, tmp_path):
    summ = tmp_path / "span.csv"
    code, out, _ = run_cli("sweep", "--input", str(fixture_csv), "--sigma-gamma-grid", "0.5",
                           "--summary", str(summ))
    assert code == 0 and len(out.splitlines()) == 12
    assert all(line.endswith(",0") for line in summ.read_text().splitlines()[1:])


@pytest.mark.parametrize("grid", ["1.0,0.5,0.25", "0.5,0.5", "a,b", "", "-1,2", "0,1"])
def test_sweep_bad_grid(fixture_csv, grid):
    code, _, err = run_cli("sweep", "--input", str(fixture_csv), f"--sigma-gamma-grid={grid}")
    assert code == 1 and "usage error" in err


# --- plot -----------------------------------------------------------------------

def test_plot_each_figure(fixture_csv, tmp_path):
    _, res, _, _ = analyze(fixture_csv, tmp_path, "--no-ci")
    sw = tmp_path / "s.csv"
    run_cli("sweep", "--input", str(fixture_csv), "--out", str(sw), "--summary", str(tmp_path / "x.csv"))
    for fig, src in (("e-vs-p", res), ("case-bars", res), ("prior-sensitivity", sw)):
        svg = tmp_path / f"{fig}.svg"
        code, _, _ = run_cli("plot", "--results", str(src), "--figure", fig, "--out", str(svg))
        assert code == 0 and svg.read_text().startswith("<svg")


def test_plot_unknown_figure(tmp_path):
    code, _, err = run_cli("plot", "--results", "x.csv", "--figure", "pie", "--out", str(tmp_path / "p.svg"))
    assert code == 1 and "invalid choice" in err


def test_plot_empty_results(tmp_path):
    f = tmp_path / "r.csv"
    f.write_text(",".join(RESULT_COLUMNS) + "\n")
    code, _, err = run_cli("plot", "--results", str(f), "--figure", "case-bars", "--out", str(tmp_path / "p.svg"))
    assert code == 1 and "no results" in err


def test_plot_missing_results(tmp_path):
    code, _, _ = run_cli("plot", "--results", str(tmp_path / "no.csv"), "--figure", "e-vs-p",
                         "--out", str(tmp_path / "p.svg"))
    assert code == 1


# --- verify ---------------------------------------------------------------------

def test_verify_smoke():
    code, out, _ = run_cli("verify", "--grid-size", "5")
    assert code == 0 and "max |closed - quadrature|" in out


def test_verify_injected_bias_fails():
    code, _, err = run_cli("verify", "--grid-size", "5", "--inject-bias", "1e-3")
    assert code == 1 and "offending tuple" in err


def test_verify_skip_mc():
    code, out, _ = run_cli("verify", "--grid-size", "3", "--mc-points", "0")
    assert code == 0 and "0 compared" in out
