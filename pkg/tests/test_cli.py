"""End-to-end CLI behavior: exit codes, output formats, env overrides."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from sgdm_sched import schedules

BASE_CONFIG = """\
[problem]
family = quadratic
d = 4
n = 32
sigma_sq = 1.0
seed = 3

[optimizer]
alg = nshb
beta = 0.9
theta0_seed = 1

[schedule]
regime = constant-bs
kind = cosine
lambda_max = 0.15
batch = 8
T = 40

[harness]
seeds = 8
record_every = 1
validation_mode = strict
"""


def cli(*args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "sgdm_sched", *args],
        capture_output=True,
        text=True,
        env=env,
    )


class TestRunCommand:
    def test_valid_config_exit_zero(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(BASE_CONFIG)
        res = cli("run", str(cfg), "--out", str(tmp_path / "runs"))
        assert res.returncode == 0, res.stderr
        assert "theorem1_sq: PASS" in res.stdout
        assert "admissible: PASS" in res.stdout

    def test_unknown_key_exit_two(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(BASE_CONFIG + "\nwibble = 3\n")
        res = cli("run", str(cfg))
        assert res.returncode == 2
        assert "wibble" in res.stderr

    def test_unknown_schedule_kind_exit_two(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(BASE_CONFIG.replace("kind = cosine", "kind = zigzag"))
        res = cli("run", str(cfg), "--out", str(tmp_path / "runs"))
        assert res.returncode == 2

    def test_momentum_growth_conflict_exit_three(self, tmp_path):
        # growth constant c = gamma = 1.2 >= 1/0.95^2 = 1.108: no admissible rate
        cfg = tmp_path / "exp.ini"
        cfg.write_text(
            BASE_CONFIG.replace("beta = 0.9", "beta = 0.95").replace(
                "regime = constant-bs\nkind = cosine\nlambda_max = 0.15\nbatch = 8\nT = 40",
                "regime = joint-growth\ngamma = 1.2\nlambda0 = 0.001\nb0 = 8\ndelta = 2\n"
                "epochs_per_phase = 1,1",
            )
        )
        res = cli("run", str(cfg), "--out", str(tmp_path / "runs"))
        assert res.returncode == 3
        assert "1/beta^2" in res.stderr

    def test_divergence_exit_four(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(
            BASE_CONFIG.replace("lambda_max = 0.15", "lambda_max = 1e200").replace(
                "validation_mode = strict", "validation_mode = waived"
            )
        )
        res = cli("run", str(cfg), "--out", str(tmp_path / "runs"))
        assert res.returncode == 4

    def test_bound_failure_exit_one(self, tmp_path):
        # waived, stable but inadmissible rate: the variance floor sits above
        # sigma^2/b, so the out-of-hypothesis bound check must fail
        cfg = tmp_path / "exp.ini"
        cfg.write_text(
            BASE_CONFIG.replace("beta = 0.9", "beta = 0.0")
            .replace("kind = cosine", "kind = constant")
            .replace("lambda_max = 0.15", "lambda_max = 1.5")
            .replace("T = 40", "T = 2000")
            .replace("batch = 8", "batch = 16")
            .replace("validation_mode = strict", "validation_mode = waived")
        )
        res = cli("run", str(cfg), "--out", str(tmp_path / "runs"))
        assert res.returncode == 1, res.stdout + res.stderr
        assert "theorem1_sq: FAIL" in res.stdout

    def test_env_var_out_root(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(BASE_CONFIG)
        res = cli("run", str(cfg), env_extra={"SGDM_SCHED_OUT": str(tmp_path / "envruns")})
        assert res.returncode == 0
        assert any((tmp_path / "envruns").iterdir())

    def test_seed_override_flag(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(BASE_CONFIG)
        res = cli("run", str(cfg), "--seeds", "4", "--out", str(tmp_path / "runs"))
        assert res.returncode == 0
        exp_dirs = list((tmp_path / "runs").iterdir())
        assert len(exp_dirs) == 1
        assert len(list(exp_dirs[0].glob("trace_*.csv"))) == 4


class TestScheduleCommand:
    def test_cosine_fifteen_rows(self):
        res = cli("schedule", "--kind", "cosine", "--lr-min", "0", "--lr-max", "1",
                  "--batch", "1", "--dataset-size", "5", "--T", "15")
        assert res.returncode == 0
        lines = res.stdout.strip().splitlines()
        assert lines[0] == "t,lr,batch"
        assert len(lines) == 16
        assert float(lines[1].split(",")[1]) == 1.0
        assert float(lines[6].split(",")[1]) == 0.75

    def test_constant_all_rows_equal(self):
        res = cli("schedule", "--kind", "constant", "--lr", "0.1", "--batch", "4", "--T", "6")
        rows = res.stdout.strip().splitlines()[1:]
        assert len({r.split(",")[1] for r in rows}) == 1
        assert float(rows[0].split(",")[1]) == 0.1

    def test_warmup_constant_phase_rates(self):
        res = cli("schedule", "--kind", "warmup_constant", "--lr0", "0.1", "--gamma", "1.5",
                  "--warmup-phases", "1", "--b0", "8", "--delta", "2",
                  "--epochs-per-phase", "1,1,1", "--dataset-size", "32")
        assert res.returncode == 0
        table = schedules.table_from_csv(res.stdout)
        np.testing.assert_allclose(table.lr, [0.1] * 4 + [0.15] * 2 + [0.15], rtol=1e-15)

    def test_round_trip_exact(self):
        res = cli("schedule", "--kind", "diminishing", "--lr-max", "0.123456789012345",
                  "--batch", "3", "--T", "50")
        table = schedules.table_from_csv(res.stdout)
        expected = 0.123456789012345 / np.sqrt(np.arange(50) + 1.0)
        np.testing.assert_array_equal(table.lr, expected)

    def test_invalid_parameters_exit_two(self):
        res = cli("schedule", "--kind", "cosine", "--lr-max", "1", "--batch", "1",
                  "--dataset-size", "5", "--T", "14")
        assert res.returncode == 2


class TestBoundsCommand:
    def test_constant_regime_golden(self):
        res = cli("bounds", "--regime", "cor3.1-constant", "--lr", "0.1", "--batch", "10",
                  "--T", "100", "--sigma-sq", "1", "--f0-gap", "1", "--beta", "0",
                  "--alg", "nshb", "--L", "1")
        assert res.returncode == 0, res.stderr
        doc = json.loads(res.stdout)
        assert doc["B_T"] == pytest.approx(0.1)
        assert doc["V_T"] == pytest.approx(0.1)
        assert doc["rhs_sq"] == pytest.approx(0.3)
        assert doc["regime"] == "cor3.1-constant"

    def test_beta_zero_algs_agree(self):
        docs = []
        for alg in ("nshb", "shb"):
            res = cli("bounds", "--regime", "cor3.1-constant", "--lr", "0.1", "--batch", "10",
                      "--T", "100", "--sigma-sq", "1", "--f0-gap", "1", "--beta", "0",
                      "--alg", alg, "--L", "1")
            docs.append(json.loads(res.stdout))
        assert docs[0]["C_alg"] == docs[1]["C_alg"] == 1.0
        assert docs[0]["rhs_sq"] == docs[1]["rhs_sq"]

    def test_gamma_at_delta_exit_two(self):
        res = cli("bounds", "--regime", "cor3.3", "--gamma", "2.0", "--lr0", "0.1",
                  "--b0", "8", "--delta", "2", "--epochs-per-phase", "1,1,1",
                  "--dataset-size", "32", "--sigma-sq", "1", "--f0-gap", "1",
                  "--beta", "0.5", "--alg", "nshb", "--L", "1")
        assert res.returncode == 2
        assert "gamma/delta" in res.stderr

    def test_missing_flags_exit_two(self):
        res = cli("bounds", "--regime", "cor3.1-constant", "--sigma-sq", "1",
                  "--f0-gap", "1", "--beta", "0", "--alg", "nshb", "--L", "1")
        assert res.returncode == 2


class TestAuditCommand:
    def test_audit_passes_and_writes_csv(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(BASE_CONFIG.replace("seeds = 8", "seeds = 64"))
        res = cli("audit", str(cfg), "--out", str(tmp_path / "runs"))
        assert res.returncode == 0, res.stderr
        assert "lyapunov_descent: PASS" in res.stdout
        audit_files = list((tmp_path / "runs").glob("*/audit.csv"))
        assert len(audit_files) == 1
        header = audit_files[0].read_text().splitlines()[0]
        assert header == "t,mean_delta_lyapunov,descent_rhs,stderr,ok"

    def test_audit_requires_nshb(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(BASE_CONFIG.replace("alg = nshb", "alg = shb"))
        res = cli("audit", str(cfg))
        assert res.returncode == 2


class TestRatefitCommand:
    def _fake_report(self, path, T, y):
        path.write_text(json.dumps({
            "totals": {"T": T, "M": None, "samples": T * 8},
            "empirical": {"min_mean_grad_norm": y},
        }))

    def test_fits_reports(self, tmp_path):
        paths = []
        for k in range(8, 13):
            p = tmp_path / f"r{k}.json"
            self._fake_report(p, 2**k, 3.0 * (2**k) ** -0.5)
            paths.append(str(p))
        res = cli("ratefit", *paths, "--mode", "loglog", "--x", "T")
        assert res.returncode == 0, res.stderr
        doc = json.loads(res.stdout)
        assert doc["slope"] == pytest.approx(-0.5, abs=1e-9)

    def test_too_few_points_exit_two(self, tmp_path):
        paths = []
        for k in range(3):
            p = tmp_path / f"r{k}.json"
            self._fake_report(p, 100 * (k + 1), 1.0 / (k + 1))
            paths.append(str(p))
        res = cli("ratefit", *paths)
        assert res.returncode == 2
