import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from flamefront.cli import SweepRecord, main, parse_grid, read_config, UsageError

SOLVE = ["solve", "--theta", "0.5", "--lambda", "1", "--alpha", "0.5"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    return rows[0], rows[1:]


def comments(text):
    return [ln[2:] for ln in text.splitlines() if ln.startswith("# ")]


# solve -----------------------------------------------------------------------

def test_solve_success(capsys):
    code, out, _ = run(SOLVE, capsys)
    assert code == 0
    header, rows = table(out)
    assert header == SweepRecord.header()
    rec = dict(zip(header, map(float, rows[0])))
    assert max(rec[k] for k in header if k.startswith("res_")) < 1e-6
    assert rec["sigma_star"] == pytest.approx(rec["c_star"] * rec["r_star"], rel=1e-11)
    assert rec["wall_time_ms"] == 0.0


def test_solve_json(capsys):
    code, out, _ = run(SOLVE + ["--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == SweepRecord.header()
    assert doc["rows"][0][0] == 0.5


def test_solve_bad_theta(capsys):
    code, _, err = run(["solve", "--theta", "1.5", "--lambda", "1", "--alpha", "0.5"], capsys)
    assert code == 1
    assert "--theta" in err and "theta must lie in (0,1)" in err


def test_solve_alpha_guardrail(capsys):
    code, _, err = run(["solve", "--theta", "0.5", "--lambda", "1", "--alpha", "0.999"], capsys)
    assert code == 1
    assert "--alpha" in err and "alpha-one" in err


def test_solve_missing_flag(capsys):
    code, _, err = run(["solve", "--theta", "0.5"], capsys)
    assert code == 1
    assert "required" in err


def test_unknown_subcommand(capsys):
    assert run(["frobnicate"], capsys)[0] == 1


def test_solve_residual_limit_gives_exit_two(capsys):
    code, out, _ = run(SOLVE + ["--max-residual", "1e-300"], capsys)
    assert code == 2
    assert "status = residual above limit" in comments(out)


def test_solve_timing_opt_in(capsys):
    _, out, _ = run(SOLVE + ["--timing"], capsys)
    header, rows = table(out)
    assert float(rows[0][header.index("wall_time_ms")]) > 0


def test_solve_output_is_deterministic(capsys):
    first = run(SOLVE, capsys)[1]
    second = run(SOLVE, capsys)[1]
    assert first == second
    _, rows = table(first)
    # twelve significant digits
    assert all(len(v.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) <= 12
               for v in rows[0])


def test_out_file(tmp_path, capsys):
    path = tmp_path / "one.csv"
    code, out, _ = run(SOLVE + ["--out", str(path)], capsys)
    assert code == 0 and out == ""
    assert path.read_text().startswith("theta,lambda,alpha")


# sweep -----------------------------------------------------------------------

def test_sweep_default_grid(capsys):
    code, out, _ = run(["sweep"], capsys)
    assert code == 0
    header, rows = table(out)
    assert header == SweepRecord.header()
    assert len(rows) == 27
    assert "c_star_monotonicity_violations = 0" in comments(out)
    assert "failures = 0" in comments(out)


def test_sweep_theta_line(capsys):
    code, out, _ = run(["sweep", "--theta-grid", "0.1:0.9:9", "--lambda-grid", "1",
                        "--alpha-grid", "0.5"], capsys)
    assert code == 0
    header, rows = table(out)
    c = np.array([float(r[header.index("c_star")]) for r in rows])
    assert len(c) == 9 and np.all(np.diff(c) < 0)


def test_sweep_single_point_equals_solve(capsys):
    _, solved, _ = run(SOLVE, capsys)
    _, swept, _ = run(["sweep", "--theta-grid", "0.5", "--lambda-grid", "1",
                       "--alpha-grid", "0.5"], capsys)
    assert table(solved)[1] == table(swept)[1]


def test_sweep_parallel_matches_serial(capsys):
    args = ["sweep", "--theta-grid", "0.7,0.3", "--lambda-grid", "2,0.5", "--alpha-grid", "0.6,0.3"]
    serial = run(args, capsys)
    parallel = run(args + ["--jobs", "3"], capsys)
    assert serial == parallel
    _, rows = table(serial[1])
    assert [tuple(r[:3]) for r in rows] == [
        (t, lam, a) for t in ("0.7", "0.3") for lam in ("2", "0.5") for a in ("0.6", "0.3")]


def test_sweep_reports_violations_for_descending_order(capsys):
    # grid order does not matter for the monotonicity check
    code, out, _ = run(["sweep", "--theta-grid", "0.9,0.2", "--lambda-grid", "1",
                        "--alpha-grid", "0.5"], capsys)
    assert code == 0
    assert "c_star_monotonicity_violations = 0" in comments(out)


@pytest.mark.parametrize("grid", ["0.1:0.9", "a,b", "0.1:0.9:0", "", "1:2:3:4"])
def test_sweep_malformed_grid(capsys, grid):
    assert run(["sweep", "--theta-grid", grid], capsys)[0] == 1


def test_sweep_out_of_range_grid(capsys):
    assert run(["sweep", "--alpha-grid", "0.5,0.999"], capsys)[0] == 1
    assert run(["sweep", "--theta-grid", "0.5,1.2"], capsys)[0] == 1


def test_sweep_tuple_failure_is_recorded(capsys, monkeypatch):
    monkeypatch.setenv("FLAMEFRONT_MAX_X", "20")
    code, out, _ = run(["sweep", "--theta-grid", "0.01,0.5", "--lambda-grid", "1",
                        "--alpha-grid", "0.5"], capsys)
    assert code == 2
    header, rows = table(out)
    bad, good = rows
    assert math.isnan(float(bad[header.index("c_star")]))
    assert float(bad[header.index("res_ign")]) > 0
    assert not math.isnan(float(good[header.index("c_star")]))
    assert "failures = 1" in comments(out)


def test_parse_grid():
    assert parse_grid("0.1, 0.2,0.3", "g") == [0.1, 0.2, 0.3]
    assert parse_grid("0:1:5", "g") == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(UsageError):
        parse_grid("x", "g")


# config ----------------------------------------------------------------------

def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep definition\ntheta-grid = 0.3,0.6\nlambda_grid = 1\n"
                   "alpha-grid = 0.5\ntiming = false\n")
    code, out, _ = run(["sweep", "--config", str(cfg)], capsys)
    assert code == 0 and len(table(out)[1]) == 2
    code, out, _ = run(["sweep", "--config", str(cfg), "--theta-grid", "0.4"], capsys)
    assert code == 0
    assert [r[0] for r in table(out)[1]] == ["0.4"]


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("theta-grid 0.3\n")
    assert run(["sweep", "--config", str(cfg)], capsys)[0] == 1
    assert run(["sweep", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 1
    with pytest.raises(UsageError):
        read_config(str(cfg))


# profile ---------------------------------------------------------------------

def test_profile_table(capsys):
    code, out, _ = run(["profile", "--theta", "0.5", "--lambda", "1", "--alpha", "0.5",
                        "--points", "40"], capsys)
    assert code == 0
    header, rows = table(out)
    assert header == ["xi", "u", "v", "uprime", "vprime"]
    data = np.array(rows, dtype=float)
    assert len(data) == 40 + 20
    assert tuple(data[-1]) == (0.0, 1.0, 0.0, 0.0, 0.0)
    meta = dict(c.split(" = ", 1) for c in comments(out) if " = " in c)
    xi_ign = float(meta["xi_ign"])
    assert float(meta["xi_tr"]) == 0.0
    k = int(np.argmin(np.abs(data[:, 0] - xi_ign)))
    assert data[k, 1] == pytest.approx(0.5, abs=1e-8)
    assert np.all(np.diff(data[:, 1]) >= -1e-12) and np.all(np.diff(data[:, 2]) <= 1e-12)


def test_profile_argument_errors(capsys):
    base = ["profile", "--theta", "0.5", "--lambda", "1", "--alpha", "0.5"]
    assert run(base + ["--points", "8"], capsys)[0] == 1
    assert run(base + ["--xi-min", "0"], capsys)[0] == 1


# compare-asymptotics ---------------------------------------------------------

@pytest.mark.parametrize("theta,alpha,regime,band", [
    ("0.98", "0.5", "theta-near-one", 0.05),
    ("0.5", "0.005", "alpha-zero", 0.03),
    ("0.001", "0.5", "theta-small", 0.10),
    ("0.5", "0.995", "alpha-one", 0.05),
])
def test_compare_within_bands(capsys, theta, alpha, regime, band):
    code, out, _ = run(["compare-asymptotics", "--theta", theta, "--lambda", "1",
                        "--alpha", alpha, "--regimes", regime], capsys)
    assert code == 0
    header, rows = table(out)
    c_row = dict(zip(header, rows[0]))
    assert c_row["quantity"] == "c_star"
    assert float(c_row["rel_err"]) < band
    assert c_row["within"] == "true"


def test_compare_outside_guardrail_reports_closed_form(capsys):
    code, out, _ = run(["compare-asymptotics", "--theta", "0.5", "--lambda", "1",
                        "--alpha", "0.999", "--regimes", "alpha-one"], capsys)
    assert code == 0
    header, rows = table(out)
    assert float(rows[0][header.index("asymptotic")]) == pytest.approx(1 / math.sqrt(2))
    assert rows[1][header.index("asymptotic")] == "inf"


def test_compare_regime_mismatch(capsys):
    assert run(["compare-asymptotics", "--theta", "0.5", "--lambda", "1", "--alpha", "0.5",
                "--regimes", "theta-near-one"], capsys)[0] == 1
    assert run(["compare-asymptotics", "--theta", "0.5", "--lambda", "1", "--alpha", "0.5",
                "--regimes", "w0-profile"], capsys)[0] == 1


def test_compare_band_failure_gives_exit_two(capsys):
    # theta = 0.9 is inside the regime's domain, but the leading term is too coarse there
    code, out, _ = run(["compare-asymptotics", "--theta", "0.9", "--lambda", "5",
                        "--alpha", "0.9", "--regimes", "theta-near-one"], capsys)
    assert code == 2
    header, rows = table(out)
    assert float(rows[0][header.index("rel_err")]) > 0.05
    assert rows[0][header.index("within")] == "false"
    assert "status = outside band" in comments(out)


# phase -----------------------------------------------------------------------

def test_phase_trace(capsys):
    code, out, _ = run(["phase", "--lambda", "1", "--alpha", "0.5"], capsys)
    assert code == 0
    header, rows = table(out)
    assert header == ["t", "q", "p", "r", "theta_angle"]
    data = np.array(rows, dtype=float)
    assert data[0, 4] == pytest.approx(0.0, abs=0.05)
    assert data[-1, 4] == pytest.approx(-math.pi / 2, abs=1e-11)  # 12 significant digits
    assert np.all(np.diff(data[:, 1]) <= 0)
    assert "violations = 0" in comments(out)


def test_phase_bad_reach(capsys):
    assert run(["phase", "--lambda", "1", "--alpha", "0.5", "--reach", "0"], capsys)[0] == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "flamefront.cli", "solve", "--theta", "2",
                           "--lambda", "1", "--alpha", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "theta must lie in (0,1)" in proc.stderr
