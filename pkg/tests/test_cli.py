import json
import subprocess
import sys

import pytest

RUN = [sys.executable, "-m", "semi_isac.cli"]


def run_cli(*args, cwd=None):
    return subprocess.run(RUN + list(args), capture_output=True, text=True, cwd=cwd)


def write_config(tmp_path, overrides):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(overrides))
    return str(path)


def test_solve_deterministic_output():
    a = run_cli("solve", "--seed", "2")
    b = run_cli("solve", "--seed", "2")
    assert a.returncode == 0
    assert a.stdout == b.stdout


def test_solve_infeasible_exit_code():
    # seed 0 draws a far target/ISaC pair: sensing floors unreachable
    r = run_cli("solve", "--seed", "0")
    assert r.returncode == 2
    assert "infeasible" in r.stderr.lower()


def test_solve_infeasible_when_threshold_above_capacity(tmp_path):
    cfg = write_config(tmp_path, {"qos_comm_mbps": 1e7})  # 10 Tbit/s floor
    r = run_cli("solve", "--seed", "2", "--config", cfg)
    assert r.returncode == 2


def test_config_error_names_key(tmp_path):
    cfg = write_config(tmp_path, {"p_max_dbm": "very loud"})
    r = run_cli("solve", "--seed", "2", "--config", cfg)
    assert r.returncode == 1
    assert "p_max_dbm" in r.stderr


def test_config_error_null_value(tmp_path):
    cfg = write_config(tmp_path, {"p_max_dbm": None})
    r = run_cli("solve", "--seed", "2", "--config", cfg)
    assert r.returncode == 1
    assert "p_max_dbm" in r.stderr


def test_config_unknown_key(tmp_path):
    cfg = write_config(tmp_path, {"p_max_dbW": 16.0})
    r = run_cli("solve", "--seed", "2", "--config", cfg)
    assert r.returncode == 1
    assert "p_max_dbW" in r.stderr


def test_config_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    r = run_cli("solve", "--seed", "2", "--config", str(path))
    assert r.returncode == 1


def test_ee_self_consistency():
    r = run_cli("ee", "--seed", "2")
    assert r.returncode == 0
    lines = {l.split(":")[0]: l for l in r.stdout.splitlines() if ":" in l}
    eta = float(lines["energy efficiency [bits/s/W]"].split(":")[1])
    assert eta > 0.0


def test_ee_trace_monotone(tmp_path):
    out = tmp_path / "trace.csv"
    r = run_cli("ee", "--seed", "2", "--out", str(out))
    assert r.returncode == 0
    rows = out.read_text().splitlines()[1:]
    etas = [float(x.split(",")[1]) for x in rows]
    assert all(b > a for a, b in zip(etas, etas[1:]))


def test_ee_large_omega_matches_solve(tmp_path):
    cfg = write_config(tmp_path, {"circuit_power_dbm": 90.0})  # 1e6 W
    r_ee = run_cli("ee", "--seed", "2", "--config", cfg)
    r_solve = run_cli("solve", "--seed", "2")
    assert r_ee.returncode == 0 and r_solve.returncode == 0

    def taus(text):
        for line in text.splitlines():
            if line.startswith("spectrum fractions"):
                return [float(tok.split("=")[1]) for tok in line.split()[2:]]
        raise AssertionError("no allocation line")

    t_ee, t_solve = taus(r_ee.stdout), taus(r_solve.stdout)
    assert t_ee == pytest.approx(t_solve, abs=2e-4)


def test_sweep_unknown_name():
    r = run_cli("sweep", "nope")
    assert r.returncode == 1


def test_sweep_qos_csv_deterministic(tmp_path):
    cfg = write_config(tmp_path, {"qos_thresholds_mbps": [1.0, 2.0]})
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    r1 = run_cli("sweep", "qos", "--config", cfg, "--trials", "4", "--out", str(out1))
    r2 = run_cli("sweep", "qos", "--config", cfg, "--trials", "4", "--out", str(out2))
    assert r1.returncode == 0 and r2.returncode == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert len(lines) == 1 + 2 * 4  # header + thresholds x schemes


def test_sweep_priority_profile_labels(tmp_path):
    cfg = write_config(tmp_path, {"priority_isac_values": [0.3, 0.7]})
    out = tmp_path / "p.csv"
    r = run_cli("sweep", "priority", "--config", cfg, "--trials", "2", "--out", str(out))
    assert r.returncode == 0
    lines = out.read_text().splitlines()[1:]
    schemes = {l.split(",")[1] for l in lines}
    assert schemes == {"joint_rr5M_rc20M", "joint_rr30M_rc5M"}
    # the Gamma rule is reflected in the labels x sweep values grid
    assert len(lines) == 2 * 2


def test_sweep_trace_csv(tmp_path):
    cfg = write_config(tmp_path, {
        "ee_thresholds_mbps": [1.0],
        "trace_configs": [{"rcs_m2": 0.1, "clutter_gains": [0.01, 0.001]}]})
    out = tmp_path / "t.csv"
    r = run_cli("sweep", "trace", "--config", cfg, "--trials", "2", "--out", str(out))
    assert r.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "config,iteration,eta,f_value"
    assert len(lines) > 1
