"""
Configuration manager for spindyn runs.

Configuration lives in INI files with one section per command ([two_qubits],
[environment], [semiclassical], [poincare], [lyapunov]) plus [run] for output
settings. Values are resolved with the precedence

    built-in defaults < preset < config file < command-line flags

and a resolved section can be rendered back to INI text (the snapshot stored in
every run manifest); parsing a snapshot yields the identical configuration.
"""

import configparser
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from ..core.interfaces import IConfigManager
from ..core.models import Preset
from .error_handler import ConfigError
from .validation import (
    BOOL, FLOAT, OPTIONAL_FLOAT, OPTIONAL_POINT, OPTIONAL_POSITIVE_FLOAT, POSITIVE_FLOAT, SPIN, TEXT, Z,
    ConfigValidator, FieldSpec, at_least, choice, format_value, parse_int, require_consistent,
)

THREADS_ENV_VAR = "SPINDYN_THREADS"
MANIFEST_SECTION = "manifest"

# alpha s = 2 on the s1 = s2 = 15 shell; chosen by sweep_coupling over (0.5, 1, 2, 5) / 15
SEMICLASSICAL_ALPHA = "0.13333333333333333"

_INT = lambda minimum: FieldSpec(parser=parse_int, check=at_least(minimum))  # noqa: E731

_TIME_FIELDS = {"t_start": FLOAT, "t_end": FLOAT, "points": _INT(2)}

SCHEMA: Dict[str, Dict[str, FieldSpec]] = {
    "two_qubits": {
        "preset": TEXT, "alpha": FLOAT, "z1": Z, "z2": Z, **_TIME_FIELDS,
    },
    "environment": {
        "preset": TEXT, "alpha": FLOAT, "s1": SPIN,
        "initial": choice("coherent", "uniform", "thermal"),
        "z1": Z, "z2": Z, "temperature": OPTIONAL_POSITIVE_FLOAT,
        "mixed_method": choice("ensemble", "full"), **_TIME_FIELDS,
    },
    "semiclassical": {
        "preset": TEXT, "alpha": FLOAT, "s": SPIN,
        "initial": choice("representative", "canonical", "coherent"),
        "representative": choice("periodic", "regular", "chaotic"),
        "point": OPTIONAL_POINT, "z1": Z, "z2": Z, "energy": OPTIONAL_FLOAT,
        "crossings": _INT(0), "lyapunov": BOOL, "horizon": POSITIVE_FLOAT,
        "renorm_interval": POSITIVE_FLOAT, "classical_step": POSITIVE_FLOAT,
        "grid_n": _INT(3), "scan_horizon": POSITIVE_FLOAT, **_TIME_FIELDS,
    },
    "poincare": {
        "alpha": FLOAT, "s": SPIN, "point": OPTIONAL_POINT,
        "representative": choice("periodic", "regular", "chaotic"),
        "crossings": _INT(1), "direction": choice("positive", "negative", "both"),
        "step": POSITIVE_FLOAT, "energy": OPTIONAL_FLOAT, "scan": BOOL, "grid_n": _INT(3),
        "scan_horizon": POSITIVE_FLOAT,
    },
    "lyapunov": {
        "alpha": FLOAT, "s": SPIN, "point": OPTIONAL_POINT,
        "representative": choice("periodic", "regular", "chaotic", "all"),
        "horizon": POSITIVE_FLOAT, "renorm_interval": POSITIVE_FLOAT, "step": POSITIVE_FLOAT,
        "energy": OPTIONAL_FLOAT, "sweep": BOOL, "grid_n": _INT(3), "scan_horizon": POSITIVE_FLOAT,
    },
    "run": {
        "out": TEXT, "jobs": _INT(1), "plots": BOOL, "chunk_size": _INT(1),
    },
}


class ConfigManager(IConfigManager):
    """
    Loads, merges, validates and snapshots INI configuration.

    Presets are injected so the manager stays independent of the scenario layer.
    """

    DEFAULTS: Dict[str, Dict[str, str]] = {
        "two_qubits": {
            "preset": "", "alpha": "1.0", "z1": "0", "z2": "0",
            "t_start": "0.0", "t_end": "50.0", "points": "2000",
        },
        "environment": {
            "preset": "", "alpha": "1.0", "s1": "200", "initial": "coherent", "z1": "0", "z2": "0",
            "temperature": "", "mixed_method": "ensemble",
            "t_start": "0.0", "t_end": "200.0", "points": "4000",
        },
        "semiclassical": {
            "preset": "", "alpha": SEMICLASSICAL_ALPHA, "s": "15", "initial": "representative",
            "representative": "regular", "point": "", "z1": "0", "z2": "0", "energy": "",
            "crossings": "0", "lyapunov": "false", "horizon": "2000.0", "renorm_interval": "1.0",
            "classical_step": "0.001", "grid_n": "7", "scan_horizon": "500.0",
            "t_start": "0.0", "t_end": "200.0", "points": "4000",
        },
        "poincare": {
            "alpha": SEMICLASSICAL_ALPHA, "s": "15", "point": "", "representative": "chaotic",
            "crossings": "200", "direction": "positive", "step": "0.005", "energy": "",
            "scan": "false", "grid_n": "7", "scan_horizon": "500.0",
        },
        "lyapunov": {
            "alpha": SEMICLASSICAL_ALPHA, "s": "15", "point": "", "representative": "all",
            "horizon": "2000.0", "renorm_interval": "1.0", "step": "0.01", "energy": "",
            "sweep": "false", "grid_n": "7", "scan_horizon": "500.0",
        },
        "run": {
            "out": "output", "jobs": "1", "plots": "false", "chunk_size": "256",
        },
    }

    def __init__(self, presets: Optional[Mapping[str, Preset]] = None):
        """
        Initialize the ConfigManager.

        Args:
            presets: Named presets by name; each applies to one section
        """
        self.presets: Mapping[str, Preset] = presets or {}
        self.validator = ConfigValidator(SCHEMA)
        self._logger = logging.getLogger(__name__)

    def get_defaults(self, section: str) -> Dict[str, Any]:
        """
        Typed built-in defaults of a section.

        Raises:
            ConfigError: If the section is unknown
        """
        self._check_section(section)
        defaults = self.validator.coerce_section(section, self.DEFAULTS[section])
        if section == "run":
            defaults["jobs"] = self._jobs_from_environment(defaults["jobs"])
        return defaults

    def load_file(self, path: Optional[str]) -> configparser.ConfigParser:
        """
        Read an INI file.

        Args:
            path: File path, or None for an empty configuration

        Raises:
            ConfigError: If the file is missing or malformed
        """
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        if path is None:
            return parser
        config_path = Path(path)
        if not config_path.is_file():
            raise ConfigError(f"Config file not found: {path}", key="config")
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                parser.read_file(f)
        except configparser.Error as e:
            raise ConfigError(f"Malformed config file {path}: {e}", key="config") from e
        for section in parser.sections():
            if section not in SCHEMA and section != MANIFEST_SECTION:
                raise ConfigError(f"Unknown section [{section}] in {path}", key=section)
        self._logger.info(f"Loaded configuration from {path}")
        return parser

    def resolve(self, section: str, config_path: Optional[str] = None, preset: Optional[str] = None,
                overrides: Optional[Mapping[str, str]] = None,
                parser: Optional[configparser.ConfigParser] = None) -> Dict[str, Any]:
        """
        Resolve one section: defaults < preset < file < overrides.

        Args:
            section: Config section name
            config_path: Optional INI file
            preset: Preset name; falls back to the file's or the default 'preset' key
            overrides: Raw flag values keyed by config key
            parser: Already loaded file contents (takes the place of config_path)

        Returns:
            Typed, validated values of every key in the section

        Raises:
            ConfigError: Naming the offending key
        """
        self._check_section(section)
        parser = parser if parser is not None else self.load_file(config_path)
        from_file = dict(parser.items(section)) if parser.has_section(section) else {}
        overrides = {k: str(v) for k, v in (overrides or {}).items() if v is not None}

        raw = dict(self.DEFAULTS[section])
        preset_name = preset or overrides.get("preset") or from_file.get("preset") or raw.get("preset", "")
        if preset_name:
            raw = self._validate_and_merge(section, raw, self._preset_values(section, preset_name))
            if "preset" in raw:
                raw["preset"] = preset_name
        raw = self._validate_and_merge(section, raw, from_file)
        raw = self._validate_and_merge(section, raw, overrides)
        if preset_name and "preset" in raw:
            raw["preset"] = preset_name

        values = self.validator.coerce_section(section, raw)
        if section == "run" and "jobs" not in from_file and "jobs" not in overrides:
            values["jobs"] = self._jobs_from_environment(values["jobs"])
        require_consistent(section, values)
        return values

    def snapshot(self, sections: Mapping[str, Mapping[str, Any]]) -> str:
        """
        Render resolved sections as INI text.

        Args:
            sections: Typed values per section name

        Returns:
            INI text that parse_snapshot maps back to the same values
        """
        lines = []
        for section, values in sections.items():
            self._check_section(section)
            lines.append(f"[{section}]")
            for key in self.DEFAULTS[section]:
                if key in values:
                    lines.append(f"{key} = {format_value(values[key])}")
            lines.append("")
        return "\n".join(lines)

    def parse_snapshot(self, text: str, section: str) -> Dict[str, Any]:
        """
        Parse one section of snapshot (or manifest) text.

        The [manifest] section of a run manifest is ignored.
        """
        self._check_section(section)
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as e:
            raise ConfigError(f"Malformed snapshot: {e}", key="snapshot") from e
        if not parser.has_section(section):
            raise ConfigError(f"Snapshot has no [{section}] section", key=section)
        raw = dict(self.DEFAULTS[section])
        raw = self._validate_and_merge(section, raw, dict(parser.items(section)))
        return self.validator.coerce_section(section, raw)

    def _validate_and_merge(self, section: str, base: Mapping[str, str], update: Mapping[str, str]) -> Dict[str, str]:
        """
        Merge raw values over a base after validating each key.

        Raises:
            ConfigError: On unknown keys or invalid values
        """
        merged = dict(base)
        for key, text in update.items():
            if key not in self.DEFAULTS[section]:
                raise ConfigError(f"Unknown key '{key}' in [{section}]", key=f"{section}.{key}")
            self.validator.coerce(section, key, text)
            merged[key] = text
        return merged

    def _preset_values(self, section: str, name: str) -> Mapping[str, str]:
        preset = self.presets.get(name)
        if preset is None:
            raise ConfigError(f"Unknown preset '{name}'", key="preset")
        if preset.regime != section:
            raise ConfigError(f"Preset '{name}' belongs to [{preset.regime}], not [{section}]", key="preset")
        return preset.values

    def _check_section(self, section: str) -> None:
        if section not in SCHEMA:
            raise ConfigError(f"Unknown section [{section}]", key=section)

    def _jobs_from_environment(self, default: int) -> int:
        text = os.environ.get(THREADS_ENV_VAR)
        if not text:
            return default
        return self.validator.coerce("run", "jobs", text)
