"""
Validation utilities for spindyn configuration values.

Config files and command-line flags deliver text; this module turns that text
into typed values (floats, spin magnitudes, coherent-state labels, canonical
points) with messages that name the offending key, and renders typed values
back to text for config snapshots.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from ..core.models import Z_INF, ClassicalState, SpinMagnitude, is_infinite
from .error_handler import ConfigError, StateError


@dataclass
class ValidationResult:
    """
    Result of a validation operation.

    Attributes:
        is_valid: Whether the validation passed
        value: Parsed value when valid
        error_message: Error message if validation failed
        suggestions: List of suggestions to fix the issue
        details: Additional validation details
    """
    is_valid: bool
    value: Any = None
    error_message: Optional[str] = None
    suggestions: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)


def _fail(message: str, *suggestions: str) -> ValidationResult:
    return ValidationResult(is_valid=False, error_message=message, suggestions=list(suggestions))


def _ok(value: Any) -> ValidationResult:
    return ValidationResult(is_valid=True, value=value)


def parse_float(text: str) -> ValidationResult:
    try:
        value = float(text)
    except ValueError:
        return _fail(f"'{text}' is not a number")
    if not math.isfinite(value):
        return _fail(f"'{text}' is not finite")
    return _ok(value)


def parse_int(text: str) -> ValidationResult:
    try:
        return _ok(int(text))
    except ValueError:
        return _fail(f"'{text}' is not an integer")


def parse_bool(text: str) -> ValidationResult:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return _ok(True)
    if lowered in ("0", "false", "no", "off"):
        return _ok(False)
    return _fail(f"'{text}' is not a boolean", "Use true or false")


def parse_z(text: str) -> ValidationResult:
    """Coherent-state label: a complex literal such as 1, 1j or 1+1j, or 'inf'."""
    stripped = text.strip().replace(" ", "")
    if stripped.lower() in ("inf", "infinity", "+inf"):
        return _ok(Z_INF)
    try:
        value = complex(stripped.replace("i", "j") if "j" not in stripped else stripped)
    except ValueError:
        return _fail(f"'{text}' is not a complex number", "Write complex labels like 1, 1j, 0.5-2j or inf")
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        return _fail(f"'{text}' is not finite; use 'inf' for the point at infinity")
    return _ok(value)


def parse_spin(text: str) -> ValidationResult:
    try:
        spin = SpinMagnitude.from_value(text)
    except StateError as e:
        return _fail(str(e), "Spin magnitudes are multiples of 1/2, e.g. 1/2, 15 or 200")
    if spin.twice_s == 0:
        return _fail("Spin magnitude must be positive")
    return _ok(spin)


def parse_point(text: str) -> ValidationResult:
    """Canonical point written q1,p1,q2,p2."""
    parts = [part for part in text.replace(";", ",").split(",") if part.strip()]
    if len(parts) != 4:
        return _fail(f"'{text}' does not have four components", "Write canonical points as q1,p1,q2,p2")
    try:
        return _ok(ClassicalState(*(float(part) for part in parts)))
    except (ValueError, StateError) as e:
        return _fail(f"'{text}' is not a canonical point: {e}")


def parse_optional(parser: Callable[[str], ValidationResult]) -> Callable[[str], ValidationResult]:
    def parse(text: str) -> ValidationResult:
        if text.strip() == "":
            return _ok(None)
        return parser(text)
    return parse


def format_value(value: Any) -> str:
    """
    Render a typed value as config text that parses back to the same value.

    Floats use repr, which round-trips exactly.
    """
    if value is None:
        return ""
    if is_infinite(value):
        return "inf"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, ClassicalState):
        return ",".join(repr(v) for v in (value.q1, value.p1, value.q2, value.p2))
    if isinstance(value, SpinMagnitude):
        return str(value)
    if isinstance(value, complex):
        return repr(value).strip("()")
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class FieldSpec:
    """
    Type and range of one config key.

    Attributes:
        parser: Text-to-value parser
        check: Optional range check returning an error message or None
        choices: Allowed values for enumerated keys
    """
    parser: Callable[[str], ValidationResult]
    check: Optional[Callable[[Any], Optional[str]]] = None
    choices: Tuple[str, ...] = ()


def positive(value: Any) -> Optional[str]:
    if value is not None and value <= 0:
        return "must be positive"
    return None


def at_least(bound: float) -> Callable[[Any], Optional[str]]:
    def check(value: Any) -> Optional[str]:
        if value is not None and value < bound:
            return f"must be at least {bound:g}"
        return None
    return check


def choice(*values: str) -> FieldSpec:
    def parse(text: str) -> ValidationResult:
        return _ok(text.strip())
    return FieldSpec(parser=parse, choices=tuple(values))


TEXT = FieldSpec(parser=lambda text: _ok(text.strip()))
FLOAT = FieldSpec(parser=parse_float)
POSITIVE_FLOAT = FieldSpec(parser=parse_float, check=positive)
OPTIONAL_FLOAT = FieldSpec(parser=parse_optional(parse_float))
OPTIONAL_POSITIVE_FLOAT = FieldSpec(parser=parse_optional(parse_float), check=positive)
BOOL = FieldSpec(parser=parse_bool)
Z = FieldSpec(parser=parse_z)
SPIN = FieldSpec(parser=parse_spin)
OPTIONAL_POINT = FieldSpec(parser=parse_optional(parse_point))


class ConfigValidator:
    """
    Typed validation of config sections against a schema.

    The schema maps section -> key -> FieldSpec; unknown keys are rejected.
    """

    def __init__(self, schema: Mapping[str, Mapping[str, FieldSpec]]):
        """
        Initialize the validator.

        Args:
            schema: Field specification per section and key
        """
        self.schema = schema

    def validate_value(self, section: str, key: str, text: str) -> ValidationResult:
        """
        Validate one raw value.

        Args:
            section: Config section name
            key: Key inside the section
            text: Raw text value

        Returns:
            ValidationResult carrying the typed value when valid
        """
        fields = self.schema.get(section)
        if fields is None:
            return _fail(f"Unknown section [{section}]", f"Known sections: {', '.join(sorted(self.schema))}")
        spec = fields.get(key)
        if spec is None:
            return _fail(f"Unknown key '{key}' in [{section}]", f"Known keys: {', '.join(sorted(fields))}")
        result = spec.parser(str(text))
        if not result.is_valid:
            return result
        if spec.choices and result.value not in spec.choices:
            return _fail(f"'{result.value}' is not one of {', '.join(spec.choices)}")
        if spec.check is not None:
            problem = spec.check(result.value)
            if problem:
                return _fail(f"{result.value!r} {problem}")
        return result

    def coerce(self, section: str, key: str, text: str) -> Any:
        """
        Parse a raw value or raise.

        Raises:
            ConfigError: Naming '<section>.<key>' when the value is invalid
        """
        result = self.validate_value(section, key, text)
        if not result.is_valid:
            raise ConfigError(result.error_message, key=f"{section}.{key}")
        return result.value

    def coerce_section(self, section: str, raw: Mapping[str, str]) -> Dict[str, Any]:
        """Parse every key of a section; raises on the first invalid key."""
        return {key: self.coerce(section, key, text) for key, text in raw.items()}


def validate_time_window(section: str, values: Mapping[str, Any]) -> List[str]:
    """
    Cross-key checks of a resolved section.

    Returns:
        List of error messages, empty when the section is consistent
    """
    errors = []
    if "t_start" in values and "t_end" in values and values["t_end"] <= values["t_start"]:
        errors.append(f"{section}.t_end: must exceed t_start ({values['t_start']!r})")
    if "points" in values and values["points"] < 2:
        errors.append(f"{section}.points: must be at least 2")
    return errors


def require_consistent(section: str, values: Mapping[str, Any],
                       checks: Sequence[Callable[[str, Mapping[str, Any]], List[str]]] = (validate_time_window,)) -> None:
    """
    Run cross-key checks and raise on the first problem.

    Raises:
        ConfigError: With the key named in the message
    """
    for check in checks:
        errors = check(section, values)
        if errors:
            key, _, message = errors[0].partition(": ")
            raise ConfigError(message, key=key)
