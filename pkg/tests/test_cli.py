"""CLI: argument handling, exit codes, file outputs, determinism."""

import json

import pytest

from hubperc.cli import build_experiment_config, main, parse_config_text


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- constants --------------------------------------------------------------

def test_constants_json(capsys):
    code, out, _ = run_cli(capsys, "constants", "--tau", "2.5", "--C", "1", "--kernel", "nr")
    assert code == 0
    payload = json.loads(out)
    assert payload["lambda_c"] == pytest.approx(0.285366, abs=1e-6)
    assert payload["alpha"] == pytest.approx(2.0 / 3.0)
    assert payload["b_alpha"] == pytest.approx(1.0233267079464887)


def test_constants_grg_a_alpha_is_pi(capsys):
    code, out, _ = run_cli(capsys, "constants", "--kernel", "grg")
    assert code == 0
    assert json.loads(out)["a_alpha"] == pytest.approx(3.141592653589793, rel=1e-10)


def test_constants_bad_tau_exits_2(capsys):
    code, _, err = run_cli(capsys, "constants", "--tau", "3.1")
    assert code == 2
    assert "tau must lie in (2,3)" in err


def test_unknown_subcommand_exits_2(capsys):
    code, _, _ = run_cli(capsys, "frobnicate")
    assert code == 2


def test_help_exits_0(capsys):
    for sub in ("constants", "simulate", "experiment", "fixedpoint"):
        code, out, _ = run_cli(capsys, sub, "--help")
        assert code == 0
        assert "--" in out


# --- simulate ---------------------------------------------------------------

def test_simulate_zero_pi(tmp_path, capsys):
    out_dir = tmp_path / "sim"
    code, out, _ = run_cli(capsys, "simulate", "--n", "500", "--lam", "0",
                           "--seed", "3", "--out", str(out_dir))
    assert code == 0
    assert "m=0 C1=1 C2=1" in out
    assert (out_dir / "edges.csv").read_text().strip() == "u,v"
    meta = json.loads((out_dir / "summary.json").read_text())
    assert meta["m"] == 0 and meta["pi"] == 0.0


def test_simulate_deterministic_bytes(tmp_path, capsys):
    blobs = []
    for name in ("a", "b"):
        out_dir = tmp_path / name
        code, out, _ = run_cli(capsys, "simulate", "--n", "3000", "--lam", "0.9",
                               "--seed", "17", "--out", str(out_dir))
        assert code == 0
        blobs.append(tuple((out_dir / f).read_bytes()
                           for f in ("edges.csv", "components.csv", "summary.json")))
    assert blobs[0] == blobs[1]
    meta = json.loads(blobs[0][2].decode())
    assert meta["m"] > 0
    header, first = blobs[0][0].decode().split("\n")[:2]
    assert header == "u,v"
    u, v = (int(t) for t in first.split(","))
    assert 1 <= u < v <= 3000


def test_simulate_bad_pi_exits_2(tmp_path, capsys):
    code, _, err = run_cli(capsys, "simulate", "--n", "100", "--pi", "1.5",
                           "--out", str(tmp_path / "x"))
    assert code == 2
    assert "pi must lie in [0,1]" in err


# --- experiment config parsing ---------------------------------------------

def test_parse_config_text():
    raw = parse_config_text(
        "# comment\nregime = critical\nn=1000  # trailing\n\nreplicates = 3\nseed=9\n")
    assert raw == {"regime": "critical", "n": "1000", "replicates": "3", "seed": "9"}
    with pytest.raises(ValueError, match="expected key = value"):
        parse_config_text("just words\n")
    with pytest.raises(ValueError, match="duplicate"):
        parse_config_text("n = 1\nn = 2\n")


def test_build_experiment_config():
    cfg, label = build_experiment_config(
        {"regime": "scan", "n": "2000", "replicates": "4", "seed": "8",
         "lambda_grid": "0.05, 1.0, 2.0", "workers": "2"})
    assert label == "scan"
    assert cfg.regime == "critical"
    assert cfg.lambda_grid == (0.05, 1.0, 2.0)
    assert cfg.workers == 2
    with pytest.raises(ValueError, match="unknown config key"):
        build_experiment_config({"regime": "critical", "n": "10", "replicates": "1",
                                 "seed": "1", "frob": "x"})
    with pytest.raises(ValueError, match="missing config key"):
        build_experiment_config({"regime": "critical", "n": "10", "replicates": "1"})
    with pytest.raises(ValueError, match="regime must be one of"):
        build_experiment_config({"regime": "weird", "n": "10", "replicates": "1",
                                 "seed": "1"})


# --- experiment subcommand --------------------------------------------------

def _write_cfg(tmp_path, text):
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    return str(path)


def test_experiment_smoke_writes_report(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, "regime = subcritical\nn = 10000\nreplicates = 6\nseed = 5\n")
    out_dir = tmp_path / "rep"
    code, out, err = run_cli(capsys, "experiment", "--config", cfg, "--out", str(out_dir))
    assert code in (0, 1)  # tolerance verdict may go either way at smoke scale
    assert "regime=subcritical replicates=6" in out
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["replicates"] == 6
    lines = (out_dir / "records.csv").read_text().strip().split("\n")
    assert lines[0] == "replicate,quantity,value"
    if code == 1:
        assert "FAIL" in err


def test_experiment_exit_1_still_writes_data(tmp_path, capsys):
    # supercritical at smoke scale is far from the asymptotic targets -> exit 1
    cfg = _write_cfg(tmp_path, "regime = supercritical\nn = 10000\nreplicates = 5\n"
                               "seed = 12\nlambda_mult = 2.0\n")
    out_dir = tmp_path / "rep"
    code, _, err = run_cli(capsys, "experiment", "--config", cfg, "--out", str(out_dir))
    assert code == 1
    assert "FAIL" in err
    assert (out_dir / "records.csv").exists() and (out_dir / "summary.json").exists()


def test_experiment_subcritical_lambda_guard_exits_2(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, "regime = supercritical\nn = 1000\nreplicates = 2\n"
                               "seed = 1\nlambda_mult = 0.5\n")
    code, _, err = run_cli(capsys, "experiment", "--config", cfg, "--out", str(tmp_path / "o"))
    assert code == 2
    assert "lambda below critical" in err


def test_experiment_missing_config_file_exits_3(tmp_path, capsys):
    code, _, err = run_cli(capsys, "experiment", "--config", str(tmp_path / "nope.cfg"),
                           "--out", str(tmp_path / "o"))
    assert code == 3
    assert "error:" in err


def test_experiment_deterministic_bytes(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, "regime = critical\nn = 5000\nreplicates = 5\nseed = 77\n"
                               "truncation_m = 100\n")
    blobs = []
    for name in ("r1", "r2"):
        out_dir = tmp_path / name
        run_cli(capsys, "experiment", "--config", cfg, "--out", str(out_dir))
        blobs.append((out_dir / "records.csv").read_bytes()
                     + (out_dir / "summary.json").read_bytes())
    assert blobs[0] == blobs[1]


# --- fixedpoint -------------------------------------------------------------

def test_fixedpoint_zero_lambda(tmp_path, capsys):
    out_dir = tmp_path / "fp"
    code, out, _ = run_cli(capsys, "fixedpoint", "--a", "50", "--lam", "0",
                           "--n-grid", "256", "--out", str(out_dir))
    assert code == 0
    assert "zeta_a=0.0" in out
    payload = json.loads((out_dir / "summary.json").read_text())
    assert payload["zeta_a"] == 0.0
    assert payload["lambda_c_a"] == pytest.approx(0.5437, abs=2e-3)
    rows = (out_dir / "rho.csv").read_text().strip().split("\n")
    assert rows[0] == "u,rho"
    assert len(rows) == 1 + 256


def test_fixedpoint_two_step_check(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "fixedpoint", "--a", "20", "--lam", "0.3",
                           "--n-grid", "512", "--two-step-check",
                           "--out", str(tmp_path / "fp"))
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("operator_norm="))
    rel = float(line.rsplit("rel_diff=", 1)[1])
    assert rel < 1e-6


def test_fixedpoint_ladder_output(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "fixedpoint", "--a", "50", "--lam",
                           "0.5707319930889453", "--n-grid", "512", "--ladder",
                           "--ladder-grid", "1024", "--out", str(tmp_path / "fp"))
    assert code == 0
    rungs = [l for l in out.splitlines() if l.startswith("ladder: ") and " zeta_a" not in l]
    assert len(rungs) >= 8
    final = next(l for l in out.splitlines() if l.startswith("zeta_extrapolated="))
    assert float(final.split("=", 1)[1]) == pytest.approx(2.118383909779324, rel=1e-6)


def test_fixedpoint_subcritical_ladder_exits_2(tmp_path, capsys):
    code, _, err = run_cli(capsys, "fixedpoint", "--a", "20", "--lam", "0.1",
                           "--n-grid", "64", "--ladder", "--ladder-grid", "64",
                           "--ladder-cap", "40", "--out", str(tmp_path / "fp"))
    assert code == 2
    assert "subcritical" in err
