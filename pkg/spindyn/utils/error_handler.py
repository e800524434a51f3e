"""
Centralized error handling for the spindyn simulator.

This module defines the exception taxonomy shared by the physics, service and
command-line layers, and an ErrorHandler that turns exceptions into log records,
user-facing messages and process exit codes.
"""

import logging
import traceback
from enum import Enum
from typing import Any, Dict, List, Optional


class SpinDynError(Exception):
    """Base class for every error raised deliberately by spindyn."""


class ConfigError(SpinDynError, ValueError):
    """
    Malformed configuration, unknown key or flag, or out-of-range parameter.

    Attributes:
        key: Name of the offending configuration key, if known
    """

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key

    def __str__(self) -> str:
        base = super().__str__()
        if self.key and self.key not in base:
            return f"{self.key}: {base}"
        return base


class StateError(SpinDynError, ValueError):
    """Invalid physical input: bad normalization, dimension mismatch, constraint violation."""


class NumericalError(SpinDynError, RuntimeError):
    """A numerical procedure failed or a tolerance assertion was violated."""


class BoundaryHitError(NumericalError):
    """
    A classical trajectory reached the boundary of the spin sphere chart.

    Attributes:
        last_state: Last valid canonical point (q1, p1, q2, p2) before the boundary
        last_time: Time of the last valid state
    """

    def __init__(self, message: str, last_state: Any = None, last_time: Optional[float] = None):
        super().__init__(message)
        self.last_state = last_state
        self.last_time = last_time


class ErrorSeverity(Enum):
    """Enumeration of error severity levels."""
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class ErrorCategory(Enum):
    """Enumeration of error categories used for counting and exit codes."""
    CONFIG = "CONFIG"
    VALIDATION = "VALIDATION"
    NUMERICAL = "NUMERICAL"
    FILE_SYSTEM = "FILE_SYSTEM"
    THREADING = "THREADING"
    UNKNOWN = "UNKNOWN"


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def categorize(error: BaseException) -> ErrorCategory:
    """
    Pick the category an exception belongs to.

    Args:
        error: The exception to classify

    Returns:
        The matching ErrorCategory
    """
    if isinstance(error, ConfigError):
        return ErrorCategory.CONFIG
    if isinstance(error, StateError):
        return ErrorCategory.VALIDATION
    if isinstance(error, NumericalError):
        return ErrorCategory.NUMERICAL
    if isinstance(error, OSError):
        return ErrorCategory.FILE_SYSTEM
    return ErrorCategory.UNKNOWN


class ErrorHandler:
    """
    Centralized error handling with logging and exit-code mapping.

    Keeps per-category counts so a batch run can summarize its failures.
    """

    def __init__(self, logger: Optional[logging.Logger] = None):
        """
        Initialize the error handler.

        Args:
            logger: Logger used for reports; defaults to this module's logger
        """
        self._logger = logger or logging.getLogger(__name__)
        self._error_counts: Dict[ErrorCategory, int] = {cat: 0 for cat in ErrorCategory}

    def handle_error(self, error: BaseException, category: Optional[ErrorCategory] = None,
                     severity: ErrorSeverity = ErrorSeverity.ERROR,
                     context: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """
        Record and log an error.

        Args:
            error: The exception that occurred
            category: Category override; inferred from the exception type when omitted
            severity: Severity level of the error
            context: Optional context information (job name, output path, ...)

        Returns:
            Dictionary with the error details that were logged
        """
        category = category or categorize(error)
        self._error_counts[category] += 1

        details = self._generate_error_details(error, category, severity, context)
        level = logging.WARNING if severity in (ErrorSeverity.INFO, ErrorSeverity.WARNING) else logging.ERROR
        self._logger.log(level, details["user_message"])
        for suggestion in details["suggestions"]:
            self._logger.info(f"  hint: {suggestion}")
        self._logger.debug(details["traceback"])
        return details

    def exit_code_for(self, error: BaseException) -> int:
        """
        Map an exception to the process exit code.

        Args:
            error: The exception that terminated the command

        Returns:
            1 for configuration problems, 2 for numerical or runtime failures
        """
        category = categorize(error)
        if category == ErrorCategory.CONFIG:
            return EXIT_CONFIG
        return EXIT_NUMERICAL

    def _generate_error_details(self, error: BaseException, category: ErrorCategory,
                                severity: ErrorSeverity,
                                context: Optional[Dict[str, Any]]) -> Dict[str, Any]:
        return {
            "error_type": type(error).__name__,
            "error_message": str(error),
            "category": category.value,
            "severity": severity.value,
            "traceback": traceback.format_exc(),
            "context": context or {},
            "user_message": self._generate_user_friendly_message(error, category, context),
            "suggestions": self._generate_suggestions(error, category),
        }

    def _generate_user_friendly_message(self, error: BaseException, category: ErrorCategory,
                                        context: Optional[Dict[str, Any]]) -> str:
        prefix = f"[{context['job']}] " if context and context.get("job") else ""
        if category == ErrorCategory.CONFIG:
            return f"{prefix}Configuration error: {error}"
        if category == ErrorCategory.VALIDATION:
            return f"{prefix}Invalid input: {error}"
        if category == ErrorCategory.NUMERICAL:
            return f"{prefix}Numerical failure: {error}"
        if category == ErrorCategory.FILE_SYSTEM:
            return f"{prefix}File operation failed: {error}"
        return f"{prefix}An error occurred: {error}"

    def _generate_suggestions(self, error: BaseException, category: ErrorCategory) -> List[str]:
        suggestions = []
        if category == ErrorCategory.CONFIG:
            suggestions.append("Run 'list-presets' to see valid preset names")
            suggestions.append("Check the key named above in your config file or flags")
        elif category == ErrorCategory.NUMERICAL:
            if isinstance(error, BoundaryHitError):
                suggestions.append("Pick an initial point farther from the sphere boundary A = 4s")
                suggestions.append("Or choose a lower energy shell")
            else:
                suggestions.append("Try a smaller integration step or a shorter grid")
        elif category == ErrorCategory.FILE_SYSTEM:
            suggestions.append("Check that the output directory is writable")
        return suggestions

    def get_error_counts(self) -> Dict[str, int]:
        """
        Get error count statistics.

        Returns:
            Dictionary mapping error categories to their counts
        """
        return {cat.value: count for cat, count in self._error_counts.items()}


# Global error handler instance
_global_error_handler: Optional[ErrorHandler] = None


def get_error_handler() -> ErrorHandler:
    """
    Get the global error handler instance, creating it on first use.

    Returns:
        The global ErrorHandler instance
    """
    global _global_error_handler
    if _global_error_handler is None:
        _global_error_handler = ErrorHandler()
    return _global_error_handler


def initialize_error_handler(logger: Optional[logging.Logger] = None) -> ErrorHandler:
    """
    Initialize (or replace) the global error handler.

    Args:
        logger: Logger the handler should report through

    Returns:
        The initialized ErrorHandler instance
    """
    global _global_error_handler
    _global_error_handler = ErrorHandler(logger)
    return _global_error_handler
