import json
import subprocess
import sys

import pytest

ENTRY = [sys.executable, "-m", "mnlab.cli"]


def run_cli(*args, env=None):
    import os

    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(ENTRY + list(args), capture_output=True, text=True,
                          env=full_env)


def test_verify_spectral_passes(tmp_path):
    out = tmp_path / "spectral.json"
    proc = run_cli("verify-spectral", "--n", "64", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    report = json.loads(out.read_text())
    assert report["pass"] is True
    residuals = [c["max_abs_residual"] for c in report["checks"]
                 if c["lemma"] == "closed_form_spectrum_match"]
    assert max(residuals) < 1e-10
    assert report["config"]["n"] == 64


def test_tolerance_override_can_fail_checks(tmp_path):
    out = tmp_path / "strict.json"
    proc = run_cli("verify-spectral", "--n", "16", "--tol", "1e-30",
                   "--out", str(out))
    assert proc.returncode == 2
    assert "failed checks" in proc.stderr
    assert json.loads(out.read_text())["pass"] is False


def test_certificate_reports_are_byte_identical(tmp_path):
    out = tmp_path / "cert.json"
    args = ("certificate", "--model", "m2", "--n", "128", "--alpha", "1",
            "--L", "1", "--tau", "0.1", "--c", "9", "--kappa", "0.09",
            "--seed", "7", "--out", str(out))
    proc1 = run_cli(*args)
    first = out.read_bytes()
    proc2 = run_cli(*args)
    second = out.read_bytes()
    assert proc1.returncode == proc2.returncode
    assert proc1.returncode in (0, 2)
    assert first == second
    cert = json.loads(first)["certificate"]
    assert cert["cond_iii"]["pass"] is True


def test_rate_table_csv_kernel_specialisation(tmp_path):
    out = tmp_path / "rates.csv"
    proc = run_cli("rate-table", "--alphas", "0.6,1,2", "--qs", "0,0.5,1",
                   "--format", "csv", "--out", str(out))
    assert proc.returncode == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "model,q,alpha,exponent"
    rows = [line.split(",") for line in lines[1:]]
    m1 = {r[2]: r[3] for r in rows if r[0] == "m1"}
    q0 = {r[2]: r[3] for r in rows if r[0] == "mq" and r[1] == "0.0"}
    assert m1 == q0


def test_two_point_subcommand(tmp_path):
    out = tmp_path / "tp.json"
    proc = run_cli("two-point-m3", "--n", "128", "--sigma-min", "1",
                   "--sigma-max", "4", "--c", "0.3", "--tau", "0.1",
                   "--out", str(out))
    assert proc.returncode == 0
    cert = json.loads(out.read_text())["certificate"]
    assert cert["family"]["kind"] == "two_point"
    assert cert["cond_iii"]["pass"] is True


def test_kl_scaling_json(tmp_path):
    out = tmp_path / "scaling.json"
    proc = run_cli("kl-scaling", "--model", "m1", "--alpha", "1", "--L", "1",
                   "--tau", "0.1", "--ns", "256,512,1024", "--out", str(out))
    assert proc.returncode == 0
    result = json.loads(out.read_text())["result"]
    assert abs(result["slope"] - 0.5) <= 0.1
    assert len(result["rows"]) == 3


def test_simulate_rate_csv(tmp_path):
    out = tmp_path / "sim.csv"
    proc = run_cli("simulate-rate", "--estimator", "rv", "--ns", "512,1024",
                   "--reps", "100", "--seed", "3", "--format", "csv",
                   "--out", str(out))
    assert proc.returncode == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("model,estimator,n,mse")
    assert len(lines) == 3


def test_verify_linalg_and_kl_pass(tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("verify-linalg", "--trials", "500", "--seed", "1",
                   "--out", str(out)).returncode == 0
    assert json.loads(out.read_text())["pass"] is True
    assert run_cli("verify-kl", "--trials", "200", "--seed", "2",
                   "--out", str(out)).returncode == 0
    assert json.loads(out.read_text())["pass"] is True


def test_verify_posdefmaj_passes(tmp_path):
    out = tmp_path / "r.json"
    proc = run_cli("verify-posdefmaj", "--count", "10", "--ns", "32,64",
                   "--seed", "3", "--out", str(out))
    assert proc.returncode == 0
    report = json.loads(out.read_text())
    assert all(c["pass"] for c in report["checks"])


def test_verify_model3_structure_reports_known_corner(tmp_path):
    out = tmp_path / "r.json"
    proc = run_cli("verify-model3-structure", "--n", "64", "--tau", "0.1",
                   "--out", str(out))
    # the 3x3-confinement check fails honestly (bottom-corner +1 entry)
    assert proc.returncode == 2
    report = json.loads(out.read_text())
    by_name = {c["lemma"]: c for c in report["checks"]}
    failing = [name for name, c in by_name.items() if not c["pass"]]
    assert failing == ["noise_residual_confined_3x3"]
    assert by_name["noise_residual_confined_3x3"]["parameters"][
        "bottom_corner_value"] == 1.0
    corner = by_name["corner_entry_discrepancy_recorded"]
    assert corner["pass"] is True
    assert corner["parameters"]["difference"] == pytest.approx(
        corner["parameters"]["expected_difference"]
    )


def test_usage_errors_exit_one():
    assert run_cli("certificate", "--model", "bogus").returncode == 1
    assert run_cli("no-such-command").returncode == 1
    # certificate requires --c
    assert run_cli("certificate", "--model", "m2", "--n", "64").returncode == 1


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("n = 32\ntol = 1e-8\n# comment\nseed = 4\n")
    out = tmp_path / "report.json"
    proc = run_cli("verify-spectral", "--config", str(config), "--n", "16",
                   "--out", str(out))
    assert proc.returncode == 0
    cfg = json.loads(out.read_text())["config"]
    assert cfg["n"] == 16       # flag beats file
    assert cfg["tol"] == 1e-8   # file beats default
    assert cfg["seed"] == 4


def test_env_seed_fallback(tmp_path):
    out = tmp_path / "report.json"
    proc = run_cli("verify-spectral", "--n", "8", "--out", str(out),
                   env={"MNLAB_SEED": "99"})
    assert proc.returncode == 0
    assert json.loads(out.read_text())["config"]["seed"] == 99


def test_stdout_json_when_no_out():
    proc = run_cli("rate-table", "--alphas", "1", "--qs", "1")
    assert proc.returncode == 0
    report = json.loads(proc.stdout)
    assert report["command"] == "rate-table"
