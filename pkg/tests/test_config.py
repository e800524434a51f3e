import pytest

from spindyn.core.models import Z_INF, ClassicalState, SpinMagnitude
from spindyn.services.scenario_service import PRESETS
from spindyn.utils.config_manager import THREADS_ENV_VAR, ConfigManager
from spindyn.utils.error_handler import ConfigError
from spindyn.utils.validation import parse_point, parse_spin, parse_z


@pytest.fixture
def manager():
    return ConfigManager(PRESETS)


@pytest.fixture
def write_ini(tmp_path):
    def write(text, name="config.ini"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


class TestDefaults:
    def test_typed_defaults(self, manager):
        defaults = manager.get_defaults("two_qubits")
        assert defaults["alpha"] == 1.0
        assert defaults["points"] == 2000
        assert defaults["z1"] == 0j

    def test_semiclassical_defaults(self, manager):
        defaults = manager.get_defaults("semiclassical")
        assert defaults["s"] == SpinMagnitude.from_value(15)
        assert defaults["alpha"] == pytest.approx(2.0 / 15.0)
        assert defaults["energy"] is None and defaults["point"] is None

    def test_unknown_section(self, manager):
        with pytest.raises(ConfigError):
            manager.get_defaults("kicked_top")


class TestPrecedence:
    def test_defaults_preset_file_flags(self, manager, write_ini):
        path = write_ini("[two_qubits]\nalpha = 2.0\nz1 = 1j\n")
        values = manager.resolve("two_qubits", config_path=path, preset="case_c", overrides={"alpha": "3"})
        assert values["alpha"] == 3.0
        assert values["z1"] == 1j
        assert values["z2"] == 0j
        assert values["preset"] == "case_c"
        assert values["points"] == 2000

    def test_preset_named_in_file(self, manager, write_ini):
        path = write_ini("[two_qubits]\npreset = case_c\n")
        values = manager.resolve("two_qubits", config_path=path)
        assert values["z1"] is Z_INF

    def test_file_beats_preset(self, manager, write_ini):
        path = write_ini("[environment]\ninitial = coherent\n")
        values = manager.resolve("environment", config_path=path, preset="thermal")
        assert values["initial"] == "coherent"
        assert values["z2"] == 1

    def test_preset_of_another_regime(self, manager):
        with pytest.raises(ConfigError) as info:
            manager.resolve("environment", preset="case_a")
        assert info.value.key == "preset"

    def test_unknown_preset(self, manager):
        with pytest.raises(ConfigError):
            manager.resolve("two_qubits", preset="case_z")


class TestValidation:
    def test_unknown_key_in_file(self, manager, write_ini):
        path = write_ini("[two_qubits]\nbeta = 1\n")
        with pytest.raises(ConfigError) as info:
            manager.resolve("two_qubits", config_path=path)
        assert info.value.key == "two_qubits.beta"

    def test_unknown_section_in_file(self, manager, write_ini):
        with pytest.raises(ConfigError):
            manager.load_file(write_ini("[kicked]\nk = 3\n"))

    def test_malformed_file(self, manager, write_ini):
        with pytest.raises(ConfigError):
            manager.load_file(write_ini("alpha = 1\n"))

    def test_missing_file(self, manager, tmp_path):
        with pytest.raises(ConfigError):
            manager.load_file(str(tmp_path / "absent.ini"))

    @pytest.mark.parametrize("key, text", [
        ("alpha", "strong"), ("alpha", "nan"), ("points", "1"), ("points", "2.5"), ("z1", "north"),
    ])
    def test_invalid_values(self, manager, key, text):
        with pytest.raises(ConfigError) as info:
            manager.resolve("two_qubits", overrides={key: text})
        assert info.value.key == f"two_qubits.{key}"

    def test_time_window(self, manager):
        with pytest.raises(ConfigError) as info:
            manager.resolve("two_qubits", overrides={"t_start": "5", "t_end": "1"})
        assert info.value.key == "two_qubits.t_end"

    def test_choices(self, manager):
        with pytest.raises(ConfigError):
            manager.resolve("environment", overrides={"mixed_method": "sampled"})
        with pytest.raises(ConfigError):
            manager.resolve("poincare", overrides={"direction": "up"})

    def test_error_message_names_the_key(self, manager):
        with pytest.raises(ConfigError, match="two_qubits.alpha"):
            manager.resolve("two_qubits", overrides={"alpha": "strong"})


class TestParsers:
    def test_complex_labels(self):
        assert parse_z("1+2i").value == 1 + 2j
        assert parse_z(" -0.5j ").value == -0.5j
        assert parse_z("inf").value is Z_INF
        assert not parse_z("1+").is_valid

    def test_spins(self):
        assert parse_spin("3/2").value == SpinMagnitude(3)
        result = parse_spin("1/3")
        assert not result.is_valid and result.suggestions
        assert not parse_spin("0").is_valid

    def test_points(self):
        assert parse_point("1, 2, 3, 4").value == ClassicalState(1.0, 2.0, 3.0, 4.0)
        assert not parse_point("1,2,3").is_valid
        assert not parse_point("1,2,3,inf").is_valid


class TestSnapshot:
    def test_round_trip(self, manager):
        values = manager.resolve("semiclassical", overrides={
            "point": "0.1,0.2,0.3,0.4", "energy": "-14.5", "z1": "0.3-1.7j", "z2": "inf", "lyapunov": "true",
        })
        text = manager.snapshot({"semiclassical": values})
        assert manager.parse_snapshot(text, "semiclassical") == values

    def test_round_trip_keeps_float_bits(self, manager):
        values = manager.resolve("two_qubits", overrides={"alpha": repr(0.1 + 0.2)})
        again = manager.parse_snapshot(manager.snapshot({"two_qubits": values}), "two_qubits")
        assert again["alpha"] == 0.1 + 0.2

    def test_manifest_section_is_ignored(self, manager):
        values = manager.resolve("environment", preset="thermal")
        text = manager.snapshot({"environment": values}) + "\n[manifest]\nversion = 1.0.0\n"
        assert manager.parse_snapshot(text, "environment") == values

    def test_missing_section(self, manager):
        with pytest.raises(ConfigError):
            manager.parse_snapshot("[run]\nout = x\n", "two_qubits")


class TestRunSection:
    def test_threads_from_environment(self, manager, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "4")
        assert manager.resolve("run")["jobs"] == 4
        assert manager.resolve("run", overrides={"jobs": "2"})["jobs"] == 2

    def test_default_single_job(self, manager, monkeypatch):
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        assert manager.resolve("run")["jobs"] == 1

    def test_invalid_threads(self, manager, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "0")
        with pytest.raises(ConfigError):
            manager.resolve("run")
