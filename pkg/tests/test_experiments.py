"""Experiment harness and CLI: configs, CSV determinism, manifests."""

import json
import subprocess
import sys

import pytest

from qembezzle.errors import ConfigError, QEmbezzleError
from qembezzle.experiments import (
    ExperimentConfig,
    config_from_dict,
    parse_result_csv,
    replay_manifest,
    run_experiment,
)


class TestConfig:
    def test_unknown_field_rejected_with_path(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"experiment": "fidelity", "bogus": 1})
        assert err.value.field == "bogus"

    def test_bad_epsilon_grid_path(self):
        with pytest.raises(ConfigError) as err:
            config_from_dict({"experiment": "nmin", "epsilon_grid": [0.1, 2.0]})
        assert err.value.field == "epsilon_grid[1]"

    def test_missing_experiment(self):
        with pytest.raises(ConfigError):
            config_from_dict({})

    def test_defaults_valid(self):
        cfg = config_from_dict({"experiment": "fidelity"})
        assert cfg.d == 2 and cfg.seed == 0


class TestRuns:
    def test_fidelity_rows_match_labels(self, tmp_path):
        cfg = ExperimentConfig(experiment="fidelity", output_path=str(tmp_path / "f.csv"))
        result = run_experiment(cfg)
        table = parse_result_csv(result.csv_path.read_text())
        assert table.header[:2] == ("table", "row")
        labelled = [r for r in table.rows if r[2]]
        assert len(labelled) == 4
        for row in labelled:
            label = float(row[2])
            value = float(row[5]) if row[3] == "avg_fidelity" else float(row[4])
            assert abs(value - label) <= 0.01

    def test_csv_round_trip_preserves_12_digits(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="embezzle", epsilon_grid=[0.1, 0.2], output_path=str(tmp_path / "e.csv")
        )
        result = run_experiment(cfg)
        parsed = parse_result_csv(result.csv_path.read_text())
        for raw_row, typed_row in zip(parsed.rows, result.table.rows):
            for cell, value in zip(raw_row, typed_row):
                if isinstance(value, float):
                    assert float(cell) == pytest.approx(value, rel=1e-11)

    def test_byte_identical_rerun(self, tmp_path):
        cfg1 = ExperimentConfig(
            experiment="nmin",
            epsilon_grid=[0.1, 0.2],
            candidates=5,
            seed=11,
            output_path=str(tmp_path / "a.csv"),
        )
        cfg2 = ExperimentConfig(
            experiment="nmin",
            epsilon_grid=[0.1, 0.2],
            candidates=5,
            seed=11,
            output_path=str(tmp_path / "b.csv"),
        )
        run_experiment(cfg1)
        run_experiment(cfg2)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_manifest_replay(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="montecarlo",
            samples=3,
            candidates=3,
            seed=21,
            output_path=str(tmp_path / "mc.csv"),
        )
        result = run_experiment(cfg)
        replayed = replay_manifest(result.manifest_path, tmp_path / "mc2.csv")
        assert (tmp_path / "mc.csv").read_bytes() == (tmp_path / "mc2.csv").read_bytes()
        assert replayed.manifest["csv_sha256"] == result.manifest["csv_sha256"]

    def test_threads_do_not_change_output(self, tmp_path):
        base = dict(experiment="montecarlo", samples=4, candidates=3, seed=5)
        r1 = run_experiment(ExperimentConfig(**base, output_path=str(tmp_path / "t1.csv")))
        r2 = run_experiment(
            ExperimentConfig(**base, threads=4, output_path=str(tmp_path / "t2.csv"))
        )
        assert r1.table == r2.table

    def test_manifest_contents(self, tmp_path):
        cfg = ExperimentConfig(experiment="consumption", m_values=[4, 8], output_path=str(tmp_path / "c.csv"))
        result = run_experiment(cfg)
        doc = json.loads(result.manifest_path.read_text())
        assert doc["config"]["experiment"] == "consumption"
        assert "qembezzle" in doc["versions"]
        assert doc["wall_time_s"] >= 0.0
        assert len(doc["csv_sha256"]) == 64

    def test_replay_mismatch_detected(self, tmp_path):
        cfg = ExperimentConfig(experiment="consumption", m_values=[4], output_path=str(tmp_path / "x.csv"))
        result = run_experiment(cfg)
        doc = json.loads(result.manifest_path.read_text())
        doc["csv_sha256"] = "0" * 64
        bad = tmp_path / "bad.manifest.json"
        bad.write_text(json.dumps(doc))
        with pytest.raises(QEmbezzleError):
            replay_manifest(bad, tmp_path / "y.csv")


class TestCli:
    def _run(self, *args, cwd):
        return subprocess.run(
            [sys.executable, "-m", "qembezzle.cli", *args],
            capture_output=True,
            text=True,
            cwd=cwd,
        )

    def test_happy_path_and_replay(self, tmp_path):
        out = self._run(
            "fidelity", "--out", "fid.csv", "--state-source", "fixture:I", cwd=tmp_path
        )
        assert out.returncode == 0, out.stderr
        assert (tmp_path / "fid.csv").exists()
        rep = self._run("replay", "--manifest", "fid.csv.manifest.json", "--out", "fid2.csv", cwd=tmp_path)
        assert rep.returncode == 0, rep.stderr
        assert (tmp_path / "fid.csv").read_bytes() == (tmp_path / "fid2.csv").read_bytes()

    def test_config_file_with_flag_override(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"epsilon_grid": [0.2], "candidates": 2, "seed": 9}))
        out = self._run(
            "nmin", "--config", str(cfg_path), "--out", "n.csv", "--seed", "10", cwd=tmp_path
        )
        assert out.returncode == 0, out.stderr
        manifest = json.loads((tmp_path / "n.csv.manifest.json").read_text())
        assert manifest["config"]["seed"] == 10  # flag wins over file

    def test_config_error_exit_code(self, tmp_path):
        out = self._run("nmin", "--epsilon", "2.0", cwd=tmp_path)
        assert out.returncode == 2
        assert "config error" in out.stderr

    def test_unreadable_config_exit_code(self, tmp_path):
        out = self._run("nmin", "--config", "missing.json", cwd=tmp_path)
        assert out.returncode == 2

    def test_numerical_failure_exit_code(self, tmp_path):
        # A state document that is not PSD must fail numerically, not as config.
        bad = {
            "dim": 2,
            "splitA": 1,
            "splitB": 2,
            "entries": [[[1.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.5, 0.0]]],
        }
        path = tmp_path / "bad_state.json"
        path.write_text(json.dumps(bad))
        out = self._run(
            "nmin", "--state-source", f"file:{path}", "--epsilon", "0.1", cwd=tmp_path
        )
        assert out.returncode == 3
        assert "numerical failure" in out.stderr
