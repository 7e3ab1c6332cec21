import json

import numpy as np
import pytest

from movingheat.cli import main

STOCHASTIC_CFG = """
[domain]
kind = sinusoidal
a0 = 1.0
amp = 0.5
omega = 1.0
T = 1.0

[noise]
kind = moving_diagonal
gamma = 0.4
beta = 0.2
m = 8

[sim]
n = 8
dt = 0.001
t_end = 0.1
seed = 9
n_paths = 8

[output]
grid_size = 33
snapshot_stride = 20
"""

DETERMINISTIC_CFG = """
[domain]
kind = linear
a0 = 1.0
slope = 0.25
T = 0.5

[noise]
kind = zero

[sim]
n = 16
dt = 0.001
t_end = 0.1

[output]
snapshot_stride = 50

[init]
kind = parabola
"""


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(STOCHASTIC_CFG, encoding="utf-8")
    return p


def run(*argv):
    return main([str(a) for a in argv])


class TestSimulate:
    def test_outputs_and_manifest(self, tmp_path, cfg_path):
        out = tmp_path / "out"
        assert run("simulate", "--config", cfg_path, "--out", out) == 0
        traj = (out / "trajectory.csv").read_text().splitlines()
        assert traj[0] == "step,t,a_t,l2_sq,h1_sq," + ",".join(f"A_{k}" for k in range(1, 9))
        assert len(traj) == 1 + 6  # strided saves 0,20,...,100
        fields = (out / "fields.csv").read_text().splitlines()
        assert fields[0] == "t,x,u"
        assert len(fields) == 1 + 6 * 33
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 9
        assert set(manifest["outputs"]) == {"fields.csv", "trajectory.csv"}

    def test_bitwise_reproducible(self, tmp_path, cfg_path):
        assert run("simulate", "--config", cfg_path, "--out", tmp_path / "a") == 0
        assert run("simulate", "--config", cfg_path, "--out", tmp_path / "b") == 0
        for name in ("trajectory.csv", "fields.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_rerun_from_manifest_reproduces(self, tmp_path, cfg_path):
        out = tmp_path / "orig"
        assert run("simulate", "--config", cfg_path, "--out", out) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        replay_cfg = tmp_path / "replay.cfg"
        replay_cfg.write_text(manifest["config_text"], encoding="utf-8")
        assert run("simulate", "--config", replay_cfg, "--out", tmp_path / "replay") == 0
        assert (out / "trajectory.csv").read_bytes() == (
            tmp_path / "replay" / "trajectory.csv"
        ).read_bytes()

    def test_csv_roundtrips_to_identical_doubles(self, tmp_path, cfg_path):
        out = tmp_path / "rt"
        assert run("simulate", "--config", cfg_path, "--out", out) == 0
        rows = np.loadtxt(out / "trajectory.csv", delimiter=",", skiprows=1)
        from movingheat.config import parse_run
        from movingheat.integrator import simulate

        setup = parse_run(cfg_path)
        traj = simulate(setup.config, setup.u0)
        assert np.array_equal(rows[:, 5:], traj.coeffs)
        assert np.array_equal(rows[:, 3], traj.l2_sq)

    def test_env_var_overrides_out(self, tmp_path, cfg_path, monkeypatch):
        target = tmp_path / "env_target"
        monkeypatch.setenv("MOVINGHEAT_OUT", str(target))
        assert run("simulate", "--config", cfg_path, "--out", tmp_path / "ignored") == 0
        assert (target / "trajectory.csv").exists()
        assert not (tmp_path / "ignored").exists()


class TestEnsemble:
    def test_workers_bitwise_identical(self, tmp_path, cfg_path):
        assert run("ensemble", "--config", cfg_path, "--out", tmp_path / "w1",
                   "--workers", 1) == 0
        assert run("ensemble", "--config", cfg_path, "--out", tmp_path / "w4",
                   "--workers", 4) == 0
        for name in ("ensemble.csv", "moments.csv"):
            assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w4" / name).read_bytes()

    def test_moments_columns(self, tmp_path, cfg_path):
        out = tmp_path / "m"
        assert run("ensemble", "--config", cfg_path, "--out", out) == 0
        lines = (out / "moments.csv").read_text().splitlines()
        assert lines[0] == "stat,value,stderr"
        stats = {line.split(",")[0] for line in lines[1:]}
        assert {"sup_l2_sq", "y_norm_sq", "sup_l2_sq_p2", "y_norm_sq_p2"} <= stats


class TestConverge:
    def test_csv_contract(self, tmp_path, cfg_path):
        out = tmp_path / "cv"
        assert run("converge", "--config", cfg_path, "--out", out,
                   "--levels", "8,16", "--seeds", 2) == 0
        lines = (out / "converge.csv").read_text().splitlines()
        assert lines[0] == "seed,n,D_x,D_y"
        assert len(lines) == 1 + 2 * 2


class TestEnergyCheck:
    def test_csv_contract(self, tmp_path, cfg_path):
        out = tmp_path / "ec"
        assert run("energy-check", "--config", cfg_path, "--out", out) == 0
        lines = (out / "energy.csv").read_text().splitlines()
        assert lines[0] == "t,l2_sq,visc,sto,hs,residual"
        first = [float(v) for v in lines[1].split(",")]
        assert first[0] == 0.0
        assert first[5] == 0.0  # residual starts at zero


class TestOracleCompare:
    def test_deterministic_run(self, tmp_path):
        cfg = tmp_path / "det.cfg"
        cfg.write_text(DETERMINISTIC_CFG, encoding="utf-8")
        out = tmp_path / "oc"
        assert run("oracle-compare", "--config", cfg, "--out", out, "--fd-m", 128) == 0
        lines = (out / "oracle.csv").read_text().splitlines()
        assert lines[0] == "t,discrepancy_l2"
        final = float(lines[-1].split(",")[1])
        assert final <= 1e-3

    def test_rejects_noise(self, tmp_path, cfg_path, capsys):
        assert run("oracle-compare", "--config", cfg_path, "--out", tmp_path / "x") == 1
        assert "deterministic-only" in capsys.readouterr().err


class TestCouplingDump:
    def test_skew_symmetric_dump(self, tmp_path, cfg_path):
        out = tmp_path / "cd"
        assert run("coupling-dump", "--config", cfg_path, "--out", out,
                   "--n", 16, "--t", 0.3) == 0
        b = np.loadtxt(out / "coupling.csv", delimiter=",")
        assert b.shape == (16, 16)
        assert np.all(b + b.T == 0.0)
        assert np.all(np.diag(b) == 0.0)


class TestExitCodes:
    def test_validation_error_is_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[domain]\nkind = constant\na0 = 1.0\nT = 1.0\n[sim]\nwhat = 1\n",
                       encoding="utf-8")
        assert run("simulate", "--config", bad, "--out", tmp_path) == 1
        assert "what" in capsys.readouterr().err

    def test_missing_file_is_one(self, tmp_path):
        assert run("simulate", "--config", tmp_path / "nope.cfg", "--out", tmp_path) == 1

    def test_non_doubling_levels_is_one(self, tmp_path, cfg_path, capsys):
        assert run("converge", "--config", cfg_path, "--out", tmp_path / "x",
                   "--levels", "8,24") == 1
        assert "double" in capsys.readouterr().err

    def test_numerical_failure_is_two(self, tmp_path, cfg_path, monkeypatch):
        from movingheat.errors import NumericalError
        import movingheat.cli as cli_mod

        def boom(config, u0):
            raise NumericalError("step 3: non-finite coefficients")

        monkeypatch.setattr(cli_mod, "simulate", boom)
        assert run("simulate", "--config", cfg_path, "--out", tmp_path / "y") == 2
