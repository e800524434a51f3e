"""
spindyn Command-Line Application: Argument Parsing and Job Dispatch.

This module provides the SpinDynApp class that serves as the front end of the
simulator. It parses the command line, resolves each job's configuration from
defaults, presets, an optional INI file and flag overrides, hands the jobs to the
ScenarioController, and prints one summary line per job.

Subcommands:
- two-qubits: two spins 1/2 (presets case_a ... case_h)
- environment: a spin 1/2 inside a large-spin environment
- semiclassical: two large spins with the classical companion
- poincare: Poincare sections of the classical limit
- lyapunov: Lyapunov estimates and the coupling sweep
- list-presets: one preset per line

Exit codes: 0 on success, 1 on configuration errors, 2 on numerical or I/O
failures.

Usage:
    python main.py two-qubits --preset case_a --alpha 1 --out run1/
    python main.py environment --preset all --jobs 4 --out env/

Dependencies:
- argparse: command-line parsing
- logging: diagnostics on stderr
- All application modules (core, physics, services, utils)

License: MIT
Version: 1.0.0
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from ..core.interfaces import IProgressReporter
from ..core.models import JobRequest, ProgressUpdate
from ..services.scenario_controller import ScenarioController, section_name
from ..services.scenario_service import PRESETS, list_presets
from ..utils.config_manager import ConfigManager
from ..utils.error_handler import EXIT_OK, ConfigError, ErrorHandler, initialize_error_handler
from ..utils.version_info import APP_DESCRIPTION, APP_NAME, get_version_string

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# (flag, config key, help); every value is passed on as text and validated by ConfigManager
_TIME_FLAGS = [
    ("--t-start", "t_start", "Start of the time grid"),
    ("--t-end", "t_end", "End of the time grid"),
    ("--points", "points", "Number of grid points"),
]
_COMMAND_FLAGS = {
    "two-qubits": [
        ("--preset", "preset", "Preset name(s): case_a ... case_h, comma separated, or 'all'"),
        ("--alpha", "alpha", "Coupling constant"),
        ("--z1", "z1", "Coherent label of spin 1 (complex, or 'inf')"),
        ("--z2", "z2", "Coherent label of spin 2"),
    ] + _TIME_FLAGS,
    "environment": [
        ("--preset", "preset", "Preset name(s), comma separated, or 'all'"),
        ("--alpha", "alpha", "Coupling constant"),
        ("--s1", "s1", "Magnitude of the environment spin"),
        ("--initial", "initial", "coherent, uniform or thermal"),
        ("--z1", "z1", "Coherent label of the environment"),
        ("--z2", "z2", "Coherent label of the qubit"),
        ("--temperature", "temperature", "Temperature of a thermal environment (default s1/10)"),
        ("--mixed-method", "mixed_method", "ensemble or full propagation of a thermal environment"),
    ] + _TIME_FLAGS,
    "semiclassical": [
        ("--preset", "preset", "Preset name(s): periodic, regular, chaotic, or 'all'"),
        ("--alpha", "alpha", "Coupling constant"),
        ("--s", "s", "Magnitude of both spins"),
        ("--initial", "initial", "representative, canonical or coherent"),
        ("--representative", "representative", "periodic, regular or chaotic"),
        ("--point", "point", "Canonical point q1,p1,q2,p2"),
        ("--z1", "z1", "Coherent label of spin 1"),
        ("--z2", "z2", "Coherent label of spin 2"),
        ("--energy", "energy", "Energy shell of the representatives"),
        ("--crossings", "crossings", "Poincare crossings of the companion (0 disables)"),
        ("--horizon", "horizon", "Lyapunov horizon"),
        ("--renorm-interval", "renorm_interval", "Lyapunov renormalization interval"),
        ("--step", "classical_step", "RK4 step of the companion trajectory"),
        ("--grid-n", "grid_n", "Grid size of the representative scan"),
        ("--scan-horizon", "scan_horizon", "Lyapunov horizon of the representative scan"),
    ] + _TIME_FLAGS,
    "poincare": [
        ("--alpha", "alpha", "Coupling constant"),
        ("--s", "s", "Magnitude of both spins"),
        ("--point", "point", "Initial point q1,p1,q2,p2"),
        ("--representative", "representative", "periodic, regular or chaotic (when no point is given)"),
        ("--crossings", "crossings", "Number of crossings"),
        ("--direction", "direction", "positive, negative or both"),
        ("--step", "step", "RK4 step"),
        ("--energy", "energy", "Energy shell"),
        ("--grid-n", "grid_n", "Grid size of the shell scan"),
        ("--scan-horizon", "scan_horizon", "Lyapunov horizon of the representative scan"),
    ],
    "lyapunov": [
        ("--alpha", "alpha", "Coupling constant"),
        ("--s", "s", "Magnitude of both spins"),
        ("--point", "point", "Initial point q1,p1,q2,p2"),
        ("--representative", "representative", "periodic, regular, chaotic or all"),
        ("--horizon", "horizon", "Integration horizon"),
        ("--renorm-interval", "renorm_interval", "Renormalization interval"),
        ("--step", "step", "RK4 step"),
        ("--energy", "energy", "Energy shell"),
        ("--grid-n", "grid_n", "Grid size of the representative scan"),
        ("--scan-horizon", "scan_horizon", "Lyapunov horizon of the representative scan"),
    ],
}
_SWITCHES = {
    "semiclassical": [("--lyapunov", "lyapunov", "Estimate the Lyapunov exponent of the companion")],
    "poincare": [("--scan", "scan", "Sections of the whole energy-shell grid")],
    "lyapunov": [("--sweep", "sweep", "Run the coupling sweep")],
}
_RUN_FLAGS = {"out": "out", "jobs": "jobs", "plots": "plots"}


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as ConfigError instead of exiting."""

    def error(self, message: str) -> None:
        raise ConfigError(message, key="argv")


def build_parser() -> CliArgumentParser:
    """
    Build the command-line parser.

    Global flags are accepted after the subcommand.
    """
    common = CliArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--jobs", help="Concurrent jobs (default $SPINDYN_THREADS or 1)")
    common.add_argument("--plots", action="store_const", const="true", help="Write gnuplot scripts")
    common.add_argument("--verbose", action="store_true", help="Log progress (INFO)")
    common.add_argument("--debug", action="store_true", help="Log everything (DEBUG)")

    parser = CliArgumentParser(prog=APP_NAME, description=APP_DESCRIPTION)
    parser.add_argument("--version", action="version", version=get_version_string())
    subparsers = parser.add_subparsers(dest="command", metavar="command", parser_class=CliArgumentParser)
    subparsers.required = True

    for command, flags in _COMMAND_FLAGS.items():
        sub = subparsers.add_parser(command, parents=[common], help=f"Run the {command} command")
        for flag, key, text in flags:
            sub.add_argument(flag, dest=f"cfg_{key}", help=text)
        for flag, key, text in _SWITCHES.get(command, []):
            sub.add_argument(flag, dest=f"cfg_{key}", action="store_const", const="true", help=text)

    listing = subparsers.add_parser("list-presets", parents=[common], help="List shipped presets")
    listing.add_argument("--regime", choices=["two_qubits", "environment", "semiclassical"],
                         help="Only presets of one regime")
    return parser


def setup_logging(verbose: bool = False, debug: bool = False) -> None:
    """Configure root logging on stderr: WARNING, INFO with --verbose, DEBUG with --debug."""
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


class LoggingProgressReporter(IProgressReporter):
    """Sends job progress to the log at INFO (visible with --verbose)."""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self._logger = logger or logging.getLogger(__name__)

    def report_progress(self, update: ProgressUpdate) -> None:
        self._logger.info(f"{update.percentage:5.1f}% {update.current_step}: {update.message}")


class SpinDynApp:
    """
    Command-line application: wires the config manager, controller and error
    handler together and runs one command.
    """

    def __init__(self, config_manager: Optional[ConfigManager] = None,
                 controller: Optional[ScenarioController] = None):
        """Initialize the application."""
        self.config_manager = config_manager or ConfigManager(PRESETS)
        self.controller = controller
        self.error_handler: Optional[ErrorHandler] = None
        self._logger = logging.getLogger(__name__)

    def run(self, argv: Sequence[str]) -> int:
        """
        Run one command line.

        Args:
            argv: Arguments without the program name

        Returns:
            Process exit code
        """
        self.error_handler = initialize_error_handler(logging.getLogger("spindyn"))
        try:
            args = build_parser().parse_args(list(argv))
        except SystemExit as e:
            return int(e.code or 0)
        except ConfigError as e:
            return self._fail(e)

        setup_logging(args.verbose, args.debug)
        if args.command == "list-presets":
            for preset in list_presets(args.regime):
                print(f"{preset.name}\t{preset.regime}\t{preset.description}")
            return EXIT_OK

        try:
            requests = self.build_requests(args)
        except (ConfigError, OSError) as e:
            return self._fail(e)

        controller = self.controller or ScenarioController(
            self.config_manager, progress_callback=LoggingProgressReporter().report_progress)
        try:
            outcomes = controller.run_batch(requests, jobs=requests[0].run["jobs"])
        except KeyboardInterrupt:
            controller.cancel()
            self._logger.warning("Interrupted")
            return 2
        for outcome in outcomes:
            print(outcome.summary)
        failed = sum(not outcome.success for outcome in outcomes)
        if failed:
            counts = ", ".join(f"{category} {count}" for category, count in self.error_handler.get_error_counts().items()
                               if count)
            print(f"{failed} of {len(outcomes)} job(s) failed ({counts})", file=sys.stderr)
        return max((outcome.exit_code for outcome in outcomes), default=EXIT_OK)

    def build_requests(self, args: argparse.Namespace) -> List[JobRequest]:
        """
        Resolve one JobRequest per requested preset.

        Raises:
            ConfigError: Naming the offending key
        """
        section = section_name(args.command)
        parser = self.config_manager.load_file(args.config)
        overrides = {key[4:]: value for key, value in vars(args).items()
                     if key.startswith("cfg_") and value is not None}
        run_overrides = {key: getattr(args, attr) for attr, key in _RUN_FLAGS.items()
                         if getattr(args, attr) is not None}
        run = self.config_manager.resolve("run", parser=parser, overrides=run_overrides)

        names: List[Optional[str]] = [None]
        preset_text = overrides.pop("preset", None)
        if preset_text:
            names = self._preset_names(section, preset_text)

        resolved = []
        for name in names:
            values = self.config_manager.resolve(section, parser=parser, preset=name, overrides=overrides)
            resolved.append((name or values.get("preset") or "custom", values))

        out = Path(run["out"])
        requests = []
        for job_name, values in resolved:
            out_dir = out if len(resolved) == 1 else out / job_name
            requests.append(JobRequest(command=args.command, name=job_name, values=values, run=run,
                                       out_dir=str(out_dir)))
        self._logger.info(f"Resolved {len(requests)} job(s) for {args.command}")
        return requests

    def _preset_names(self, section: str, text: str) -> List[Optional[str]]:
        if text.strip() == "all":
            return [preset.name for preset in list_presets(section)]
        names = [name.strip() for name in text.split(",") if name.strip()]
        if not names:
            raise ConfigError("empty preset list", key="preset")
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate preset in '{text}'", key="preset")
        return names

    def _fail(self, error: BaseException) -> int:
        details = self.error_handler.handle_error(error)
        print(f"error: {details['error_message']}", file=sys.stderr)
        return self.error_handler.exit_code_for(error)


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the command line.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        Exit code: 0 ok, 1 configuration error, 2 numerical failure
    """
    return SpinDynApp().run(sys.argv[1:] if argv is None else argv)


def main() -> None:
    sys.exit(run_cli())


__all__ = ["SpinDynApp", "build_parser", "run_cli", "main"]
