"""End-to-end CLI tests driving main() in process."""

import io
import json

import numpy as np
import pytest

from backflow.cli import main
from backflow.classical import default_generator, markov_trajectory
from backflow.mittag import ml_neg
from backflow.quantum import QuantumParams, n_qe
from backflow.serialize import read_phase_grid_csv, read_trajectory_csv
from backflow.sweeps import quantum_phase_diagram
from backflow.trajectory import Trajectory
from backflow.serialize import trajectory_csv


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParsing:
    def test_no_subcommand(self, capsys):
        code, _, err = run(capsys)
        assert code == 2
        assert err.startswith("usage-error:")

    def test_missing_required_flag(self, capsys):
        code, _, err = run(capsys, "quantum-nqe", "--alpha", "0.5")
        assert code == 2
        assert "--omega" in err

    def test_bad_choice(self, capsys):
        code, _, err = run(capsys, "classical-traj", "--model", "bogus",
                           "--p0", "1,0,0", "--horizon", "1")
        assert code == 2

    def test_bad_float(self, capsys):
        code, _, err = run(capsys, "ml", "--alpha", "abc", "--x", "1")
        assert code == 2 and "'alpha'" in err

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "backflow" in capsys.readouterr().out


class TestMl:
    def test_single_value(self, capsys):
        code, out, _ = run(capsys, "ml", "--alpha", "0.5", "--x", "2.0")
        assert code == 0
        assert float(out) == float(ml_neg(0.5, 2.0))

    def test_batch_mode(self, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin",
                            io.StringIO("0.5 1.0\n\n0.9 10.0\n"))
        code, out, _ = run(capsys, "ml", "--batch")
        assert code == 0
        got = [float(v) for v in out.split()]
        assert got == [float(ml_neg(0.5, 1.0)), float(ml_neg(0.9, 10.0))]

    def test_batch_bad_line(self, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("0.5\n"))
        code, _, err = run(capsys, "ml", "--batch")
        assert code == 2

    def test_requires_inputs(self, capsys):
        code, _, err = run(capsys, "ml", "--alpha", "0.5")
        assert code == 2

    def test_domain_error_exit(self, capsys):
        code, _, err = run(capsys, "ml", "--alpha", "1.5", "--x", "1")
        assert code == 3
        assert err.startswith("domain-error:")


class TestConfigFile:
    def test_config_supplies_required(self, capsys, outdir):
        cfg = outdir / "run.json"
        cfg.write_text(json.dumps({"alpha": 0.5, "omega": 4.0,
                                   "horizon": 10.0}))
        code, out, _ = run(capsys, "quantum-nqe", "--config", str(cfg))
        assert code == 0
        meta = json.loads((outdir / "quantum-nqe.meta.json").read_text())
        assert meta["config"]["alpha"] == 0.5

    def test_flag_beats_config(self, capsys, outdir):
        cfg = outdir / "run.json"
        cfg.write_text(json.dumps({"alpha": 0.3, "omega": 4.0,
                                   "horizon": 10.0}))
        code, _, _ = run(capsys, "quantum-nqe", "--config", str(cfg),
                         "--alpha", "0.7")
        assert code == 0
        meta = json.loads((outdir / "quantum-nqe.meta.json").read_text())
        assert meta["config"]["alpha"] == 0.7

    def test_snake_case_keys_accepted(self, capsys, outdir):
        cfg = outdir / "run.json"
        cfg.write_text(json.dumps({"alpha": 0.5, "omega": 4.0,
                                   "horizon": 10.0,
                                   "points_per_period": 32}))
        code, _, _ = run(capsys, "quantum-nqe", "--config", str(cfg))
        assert code == 0
        meta = json.loads((outdir / "quantum-nqe.meta.json").read_text())
        assert meta["config"]["points-per-period"] == 32

    def test_unknown_key_names_itself(self, capsys, outdir):
        cfg = outdir / "run.json"
        cfg.write_text(json.dumps({"alpha": 0.5, "omega": 4.0,
                                   "cadence": 3}))
        code, _, err = run(capsys, "quantum-nqe", "--config", str(cfg))
        assert code == 2
        assert "cadence" in err and "quantum-nqe" in err

    def test_config_not_object(self, capsys, outdir):
        cfg = outdir / "run.json"
        cfg.write_text("[1, 2]")
        code, _, _ = run(capsys, "quantum-nqe", "--config", str(cfg))
        assert code == 2

    def test_config_invalid_json(self, capsys, outdir):
        cfg = outdir / "run.json"
        cfg.write_text("{nope")
        code, _, _ = run(capsys, "quantum-nqe", "--config", str(cfg))
        assert code == 2

    def test_config_missing_file(self, capsys, outdir):
        code, _, err = run(capsys, "quantum-nqe", "--config",
                           str(outdir / "absent.json"))
        assert code == 9
        assert err.startswith("io-error:")


class TestQuantumCommands:
    ARGS = ["--alpha", "0.5", "--omega", "4.0", "--horizon", "10"]

    def test_traj_writes_csv_and_meta(self, capsys, outdir):
        code, out, _ = run(capsys, "quantum-traj", *self.ARGS)
        assert code == 0
        times, cols = read_trajectory_csv(
            (outdir / "quantum-traj.csv").read_text())
        assert times[0] == 0.0 and times[-1] == 10.0
        meta = json.loads((outdir / "quantum-traj.meta.json").read_text())
        assert meta["config"]["subcommand"] == "quantum-traj"
        assert meta["samples"] == times.shape[0]

    def test_nqe_matches_library(self, capsys, outdir):
        code, out, _ = run(capsys, "quantum-nqe", *self.ARGS)
        assert code == 0
        direct = n_qe(QuantumParams(0.5, 1.0, 4.0), horizon=10.0)
        assert float(out) == direct
        doc = json.loads((outdir / "quantum-nqe.json").read_text())
        assert doc["n_i"] == direct

    def test_csv_reruns_byte_identical(self, capsys, outdir):
        run(capsys, "quantum-traj", *self.ARGS)
        first = (outdir / "quantum-traj.csv").read_bytes()
        run(capsys, "quantum-traj", *self.ARGS)
        assert (outdir / "quantum-traj.csv").read_bytes() == first

    def test_phase_small_grid_round_trips(self, capsys, outdir):
        code, _, _ = run(capsys, "quantum-phase",
                         "--alpha-min", "0.4", "--alpha-max", "0.8",
                         "--n-alpha", "3", "--ratio-min", "2",
                         "--ratio-max", "6", "--n-ratio", "3",
                         "--horizon", "30", "--svg")
        assert code == 0
        back = read_phase_grid_csv((outdir / "quantum-phase.csv").read_text())
        direct = quantum_phase_diagram((0.4, 0.8), (2.0, 6.0), (3, 3),
                                       horizon=30.0)
        assert np.array_equal(back.values, direct.values)
        assert (outdir / "quantum-phase.svg").read_text().startswith("<svg")


class TestClassicalTraj:
    BASE = ["classical-traj", "--p0", "1,0,0", "--horizon", "5",
            "--steps", "11"]

    def test_markov_matches_library(self, capsys, outdir):
        code, _, _ = run(capsys, *self.BASE, "--model", "markov")
        assert code == 0
        times, cols = read_trajectory_csv(
            (outdir / "classical-traj.csv").read_text())
        direct = markov_trajectory(default_generator(),
                                   np.array([1.0, 0.0, 0.0]),
                                   np.linspace(0.0, 5.0, 11))
        assert np.array_equal(cols, direct.states)
        meta = json.loads((outdir / "classical-traj.meta.json").read_text())
        assert np.allclose(meta["stationary"], [0.5, 0.25, 0.25], atol=1e-12)

    @pytest.mark.parametrize("extra", [
        ("--model", "gme", "--gamma", "2.0"),
        ("--model", "erlang2"),
        ("--model", "erlang2-mc", "--ntraj", "500", "--seed", "7"),
        ("--model", "fractional", "--alpha", "0.5"),
    ])
    def test_each_model_runs(self, capsys, outdir, extra):
        code, _, _ = run(capsys, *self.BASE, *extra)
        assert code == 0
        assert (outdir / "classical-traj.csv").exists()

    def test_mc_rerun_bit_identical(self, capsys, outdir):
        args = self.BASE + ["--model", "erlang2-mc", "--ntraj", "400",
                            "--seed", "11"]
        run(capsys, *args)
        first = (outdir / "classical-traj.csv").read_bytes()
        run(capsys, *args)
        assert (outdir / "classical-traj.csv").read_bytes() == first

    def test_phase_split_changes_result(self, capsys, outdir):
        run(capsys, *self.BASE, "--model", "erlang2")
        fresh = (outdir / "classical-traj.csv").read_bytes()
        run(capsys, *self.BASE, "--model", "erlang2",
            "--phase-split", "stationary")
        assert (outdir / "classical-traj.csv").read_bytes() != fresh

    def test_gme_needs_gamma(self, capsys, outdir):
        code, _, err = run(capsys, *self.BASE, "--model", "gme")
        assert code == 3

    def test_steps_validated(self, capsys, outdir):
        code, _, _ = run(capsys, "classical-traj", "--model", "markov",
                         "--p0", "1,0,0", "--horizon", "5", "--steps", "1")
        assert code == 2

    def test_bad_p0(self, capsys, outdir):
        code, _, _ = run(capsys, "classical-traj", "--model", "markov",
                         "--p0", "1,0", "--horizon", "5")
        assert code == 2


class TestKFile:
    def test_custom_generator_used(self, capsys, outdir):
        kf = outdir / "K.txt"
        kf.write_text("-2 1 1\n1 -2 1\n1 1 -2\n")
        code, _, _ = run(capsys, "classical-traj", "--model", "markov",
                         "--p0", "1,0,0", "--horizon", "5",
                         "--k-file", str(kf))
        assert code == 0
        meta = json.loads((outdir / "classical-traj.meta.json").read_text())
        third = meta["stationary"]
        assert np.allclose(third, [1 / 3] * 3, atol=1e-12)

    def test_non_numeric_k_file(self, capsys, outdir):
        kf = outdir / "K.txt"
        kf.write_text("not a matrix\n")
        code, _, err = run(capsys, "classical-traj", "--model", "markov",
                           "--p0", "1,0,0", "--horizon", "5",
                           "--k-file", str(kf))
        assert code == 2

    def test_missing_k_file(self, capsys, outdir):
        code, _, err = run(capsys, "classical-traj", "--model", "markov",
                           "--p0", "1,0,0", "--horizon", "5",
                           "--k-file", str(outdir / "absent.txt"))
        assert code == 9


class TestMapAndSweep:
    def test_classical_map_markov(self, capsys, outdir):
        code, out, _ = run(capsys, "classical-map", "--model", "markov",
                           "--metric", "n_dkl", "--res", "4",
                           "--horizon", "5", "--steps", "101")
        assert code == 0
        back = read_phase_grid_csv((outdir / "classical-map.csv").read_text(),
                                   meta={"mask": "barycentric"})
        finite = back.values[np.isfinite(back.values)]
        assert finite.shape[0] == 15
        assert np.all(finite <= 1e-8)

    def test_alpha_sweep_growth_in_meta(self, capsys, outdir):
        code, _, _ = run(capsys, "alpha-sweep", "--n-alpha", "2",
                         "--alpha-min", "0.4", "--alpha-max", "0.8",
                         "--horizons", "2,5", "--p0", "1,0,0",
                         "--p0", "0,1,0")
        assert code == 0
        meta = json.loads((outdir / "alpha-sweep.meta.json").read_text())
        growth = np.asarray(meta["growth"])
        assert growth.shape == (2, 2, 2)
        back = read_phase_grid_csv((outdir / "alpha-sweep.csv").read_text())
        assert np.array_equal(back.values, growth[-1])


class TestBackflowCommand:
    def write_csv(self, outdir, values, times=None):
        values = np.asarray(values, dtype=np.float64)
        if times is None:
            times = np.arange(values.shape[0], dtype=np.float64)
        path = outdir / "input.csv"
        path.write_text(trajectory_csv(Trajectory(times, values)))
        return path

    def test_reference_four_sample(self, capsys, outdir):
        path = self.write_csv(outdir, [0.0, 1.0, 0.5, 2.0])
        code, out, _ = run(capsys, "backflow", "--input", str(path))
        assert code == 0
        assert float(out) == 2.5
        doc = json.loads((outdir / "backflow.json").read_text())
        assert [iv[:2] for iv in doc["intervals"]] == [[0.0, 1.0], [2.0, 3.0]]

    def test_monotone_is_zero(self, capsys, outdir):
        path = self.write_csv(outdir, [3.0, 2.0, 1.0, 0.5])
        code, out, _ = run(capsys, "backflow", "--input", str(path))
        assert code == 0 and float(out) == 0.0

    def test_epsilon_filters_small_rises(self, capsys, outdir):
        path = self.write_csv(outdir, [0.0, 0.1, 0.0, 2.0])
        code, out, _ = run(capsys, "backflow", "--input", str(path),
                           "--epsilon", "0.5")
        assert code == 0 and float(out) == 2.0

    def test_missing_input(self, capsys, outdir):
        code, _, err = run(capsys, "backflow", "--input",
                           str(outdir / "absent.csv"))
        assert code == 9


class TestOutdirResolution:
    ARGS = ["quantum-traj", "--alpha", "0.5", "--omega", "4.0",
            "--horizon", "5"]

    def test_env_var(self, capsys, tmp_path, monkeypatch):
        target = tmp_path / "env_out"
        target.mkdir()
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("BACKFLOW_OUTDIR", str(target))
        code, _, _ = run(capsys, *self.ARGS)
        assert code == 0
        assert (target / "quantum-traj.csv").exists()

    def test_flag_beats_env(self, capsys, tmp_path, monkeypatch):
        flagged = tmp_path / "flagged"
        flagged.mkdir()
        monkeypatch.setenv("BACKFLOW_OUTDIR", str(tmp_path / "ignored"))
        code, _, _ = run(capsys, *self.ARGS, "--outdir", str(flagged))
        assert code == 0
        assert (flagged / "quantum-traj.csv").exists()

    def test_missing_outdir(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, _, err = run(capsys, *self.ARGS, "--outdir",
                           str(tmp_path / "nope"))
        assert code == 9
