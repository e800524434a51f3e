import logging
import math
from datetime import datetime

import numpy as np
import pytest

from spindyn.cli.app import LoggingProgressReporter, build_parser, run_cli
from spindyn.core.models import ProgressUpdate
from spindyn.services.scenario_controller import ScenarioController
from spindyn.services.scenario_service import PRESETS
from spindyn.utils.config_manager import ConfigManager
from spindyn.utils.file_manager import FileManager, read_series

TWO_QUBIT_ARGS = ["two-qubits", "--preset", "case_a", "--alpha", "1", "--points", "100", "--t-end", "10"]


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.delenv("SPINDYN_THREADS", raising=False)


class TestScenarioCommands:
    def test_two_qubit_run_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert run_cli(TWO_QUBIT_ARGS + ["--out", str(out)]) == 0
        for name in ("entropy.csv", "observables.csv", "recoherences.csv", "manifest.ini"):
            assert (out / name).is_file()
        series = read_series(str(out / "entropy.csv"))
        assert len(series) == 100
        assert series.delta[0] == 0.0
        assert "case_a: two-qubits ok" in capsys.readouterr().out

    def test_manifest_contents(self, tmp_path):
        out = tmp_path / "run"
        run_cli(TWO_QUBIT_ARGS + ["--out", str(out)])
        manifest = (out / "manifest.ini").read_text(encoding="utf-8")
        assert "[two_qubits]" in manifest and "[run]" in manifest and "[manifest]" in manifest
        listed = FileManager().read_manifest_files(str(out / "manifest.ini"))
        assert str(out / "entropy.csv") in listed
        assert str(out / "manifest.ini") in listed
        values = ConfigManager(PRESETS).parse_snapshot(manifest, "two_qubits")
        assert values["preset"] == "case_a" and values["points"] == 100

    def test_manifest_records_stage_timings(self, tmp_path):
        out = tmp_path / "run"
        run_cli(TWO_QUBIT_ARGS + ["--out", str(out)])
        manifest = (out / "manifest.ini").read_text(encoding="utf-8")
        for key in ("peak_memory_mb", "stage_diagonalize_s", "stage_propagate_s", "stage_entropy_s"):
            assert f"\n{key} = " in manifest

    def test_outputs_are_deterministic(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        run_cli(TWO_QUBIT_ARGS + ["--out", str(first)])
        run_cli(TWO_QUBIT_ARGS + ["--out", str(second)])
        assert (first / "entropy.csv").read_bytes() == (second / "entropy.csv").read_bytes()

    def test_csv_floats_round_trip(self, tmp_path):
        out = tmp_path / "run"
        run_cli(TWO_QUBIT_ARGS + ["--out", str(out)])
        text = (out / "entropy.csv").read_text(encoding="utf-8")
        assert text.startswith("t,delta,delta_N,sigma1,sigma2\n")
        assert "\r" not in text
        series = read_series(str(out / "entropy.csv"))
        assert np.array_equal(series.times, np.linspace(0.0, 10.0, 100))

    def test_several_presets_on_two_workers(self, tmp_path):
        out = tmp_path / "batch"
        args = ["two-qubits", "--preset", "case_a,case_f", "--points", "50", "--t-end", "5", "--jobs", "2"]
        assert run_cli(args + ["--out", str(out)]) == 0
        assert (out / "case_a" / "entropy.csv").is_file()
        assert (out / "case_f" / "entropy.csv").is_file()

    def test_plot_scripts(self, tmp_path):
        out = tmp_path / "run"
        assert run_cli(TWO_QUBIT_ARGS + ["--plots", "--out", str(out)]) == 0
        script = (out / "entropy.gp").read_text(encoding="utf-8")
        assert "entropy.csv" in script and "set output 'entropy.png'" in script

    def test_uncoupled_environment(self, tmp_path):
        out = tmp_path / "env"
        args = ["environment", "--alpha", "0", "--s1", "5", "--z1", "1", "--z2", "1", "--points", "50",
                "--t-end", "10", "--out", str(out)]
        assert run_cli(args) == 0
        assert np.all(read_series(str(out / "entropy.csv")).delta == 0.0)

    def test_config_file(self, tmp_path):
        config = tmp_path / "run.ini"
        config.write_text("[two_qubits]\nalpha = 0\npoints = 30\nt_end = 3\n", encoding="utf-8")
        out = tmp_path / "run"
        assert run_cli(["two-qubits", "--config", str(config), "--out", str(out)]) == 0
        assert len(read_series(str(out / "entropy.csv"))) == 30


class TestClassicalCommands:
    def test_poincare_decoupled(self, tmp_path):
        out = tmp_path / "section"
        args = ["poincare", "--alpha", "0", "--point", "1,0,1,0", "--crossings", "10", "--out", str(out)]
        assert run_cli(args) == 0
        header, data = FileManager().read_table(str(out / "section.csv"))
        assert header == ("q1", "p1", "t_cross")
        assert data.shape == (10, 3)
        assert np.allclose(np.diff(data[:, 2]), 2 * math.pi, atol=1e-6)

    def test_lyapunov_point(self, tmp_path):
        out = tmp_path / "lyap"
        args = ["lyapunov", "--alpha", "0", "--point", "1,0,2,1", "--horizon", "20", "--out", str(out)]
        assert run_cli(args) == 0
        lines = (out / "lyapunov.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "representative,q1,p1,q2,p2,lambda"
        assert lines[1].startswith("point,1,0,2,1,")
        assert abs(float(lines[1].split(",")[-1])) < 1e-5


class TestFailures:
    def test_unknown_flag(self, tmp_path):
        assert run_cli(["two-qubits", "--bogus", "1", "--out", str(tmp_path)]) == 1

    def test_missing_command(self):
        assert run_cli([]) == 1

    def test_unknown_preset(self, tmp_path, capsys):
        assert run_cli(["two-qubits", "--preset", "case_z", "--out", str(tmp_path)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_invalid_value(self, tmp_path):
        assert run_cli(["two-qubits", "--points", "one", "--out", str(tmp_path)]) == 1

    def test_missing_config_file(self, tmp_path):
        assert run_cli(["two-qubits", "--config", str(tmp_path / "absent.ini"), "--out", str(tmp_path)]) == 1

    def test_numerical_failure_exits_2(self, tmp_path, capsys):
        args = ["semiclassical", "--s", "1000", "--initial", "coherent", "--points", "10", "--t-end", "1",
                "--out", str(tmp_path / "big")]
        assert run_cli(args) == 2
        assert "1 of 1 job(s) failed (" in capsys.readouterr().err

    def test_version(self, capsys):
        assert run_cli(["--version"]) == 0
        assert "spindyn" in capsys.readouterr().out


class TestListing:
    def test_list_presets(self, capsys):
        assert run_cli(["list-presets"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 16
        assert lines[0].startswith("case_a\ttwo_qubits\t")

    def test_list_one_regime(self, capsys):
        assert run_cli(["list-presets", "--regime", "semiclassical"]) == 0
        names = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
        assert names == ["chaotic", "periodic", "regular"]


def test_parser_maps_flags_to_config_keys():
    args = build_parser().parse_args(["semiclassical", "--step", "0.01", "--lyapunov"])
    assert args.cfg_classical_step == "0.01"
    assert args.cfg_lyapunov == "true"


def test_controller_reports_idle():
    assert not ScenarioController(ConfigManager(PRESETS)).is_running()


def test_progress_goes_to_the_log(caplog):
    with caplog.at_level(logging.INFO, logger="spindyn.cli.app"):
        LoggingProgressReporter().report_progress(ProgressUpdate(50.0, "propagate", "half way", datetime.now()))
    assert " 50.0% propagate: half way" in caplog.text
