import numpy as np
import pytest

from spindyn.core.models import EntropySeries, RunManifest
from spindyn.utils.error_handler import ConfigError
from spindyn.utils.file_manager import FileManager, format_float, read_series, write_series


def test_float_format_is_exact():
    for value in (0.1 + 0.2, 1e-300, -2.0 / 3.0, 12345.678901234567):
        assert float(format_float(value)) == value


def test_series_file_reproduces_doubles(tmp_path, rng):
    times = np.linspace(0.0, 3.0, 7)
    series = EntropySeries(times=times, delta=rng.random(7), delta_N=rng.random(7),
                           sigma1=rng.random(7), sigma2=rng.random(7))
    path = write_series(series, str(tmp_path / "entropy.csv"))
    again = read_series(path)
    for name in ("times", "delta", "delta_N", "sigma1", "sigma2"):
        assert np.array_equal(getattr(again, name), getattr(series, name))


def test_text_cells_and_recorded_files(tmp_path):
    manager = FileManager()
    path = manager.write_table(str(tmp_path / "nested" / "rows.csv"), ("label", "value"), [("regular", 0.5)])
    assert (tmp_path / "nested" / "rows.csv").read_text(encoding="utf-8") == "label,value\nregular,0.5\n"
    assert manager.written_files == [path]


def test_non_series_file_is_rejected(tmp_path):
    manager = FileManager()
    path = manager.write_table(str(tmp_path / "other.csv"), ("a", "b"), [(1.0, 2.0)])
    with pytest.raises(ConfigError):
        manager.read_series(path)
    (tmp_path / "bad.csv").write_text("t,delta\n0,oops\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        manager.read_table(str(tmp_path / "bad.csv"))


def test_manifest_lists_itself(tmp_path):
    manager = FileManager()
    series_path = manager.write_table(str(tmp_path / "entropy.csv"), ("t",), [(0.0,)])
    manifest = RunManifest(config_snapshot="[run]\nout = x\n", version="1.0.0", wall_time=0.25,
                           output_files=manager.written_files, extra={"job": "custom"})
    path = manager.write_manifest(manifest, str(tmp_path / "manifest.ini"))
    assert sorted(manager.read_manifest_files(path)) == sorted([series_path, path])
    text = (tmp_path / "manifest.ini").read_text(encoding="utf-8")
    assert text.startswith("[run]\nout = x\n\n[manifest]\n")
    assert "job = custom" in text
