"""
Scenario controller with thread pool support.

This module contains the ScenarioController class that executes batches of
jobs (one per preset or config) on a thread pool, writes every output of a job
into the job's own directory, records a manifest per job, and maps failures to
process exit codes.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from ..cli import plot_scripts
from ..core.interfaces import IScenarioController
from ..core.models import JobOutcome, JobRequest, ProgressUpdate, RunManifest
from ..utils.config_manager import ConfigManager
from ..utils.error_handler import EXIT_OK, get_error_handler
from ..utils.file_manager import FileManager
from ..utils.performance_monitor import get_performance_monitor
from ..utils.version_info import VERSION, get_dependencies_info, get_system_info
from .scenario_service import PRESETS, LyapunovRun, PoincareRun, ScenarioService, config_from_values

SCENARIO_COMMANDS = {
    "two-qubits": "two_qubits",
    "environment": "environment",
    "semiclassical": "semiclassical",
}
CLASSICAL_COMMANDS = {"poincare": "poincare", "lyapunov": "lyapunov"}

SWEEP_HEADER = ("alpha", "lambda_regular", "lambda_chaotic", "cells_regular", "cells_chaotic")
LYAPUNOV_HEADER = ("representative", "q1", "p1", "q2", "p2", "lambda")
OBSERVABLES_HEADER = ("t", "Sz1", "Sz2", "Sz2_sq")


def section_name(command: str) -> str:
    """Config section of a CLI command."""
    return SCENARIO_COMMANDS.get(command) or CLASSICAL_COMMANDS[command]


class ScenarioController(IScenarioController):
    """
    Controller for batch execution of scenario jobs.

    Each job gets its own ScenarioService and FileManager, so jobs never share
    output files; the performance monitor and error handler are process-wide.
    """

    def __init__(self, config_manager: Optional[ConfigManager] = None,
                 progress_callback: Optional[Callable[[ProgressUpdate], None]] = None):
        """
        Initialize the scenario controller.

        Args:
            config_manager: Renders config snapshots for manifests
            progress_callback: Optional callback for progress updates of every job
        """
        self.config_manager = config_manager or ConfigManager(PRESETS)
        self.progress_callback = progress_callback

        self._services: Dict[str, ScenarioService] = {}
        self._cancel_event = threading.Event()
        self._is_running = False
        self._lock = threading.Lock()

        self._logger = logging.getLogger(__name__)
        self.error_handler = get_error_handler()
        self.performance_monitor = get_performance_monitor()

    def run_batch(self, requests: List[JobRequest], jobs: int = 1) -> List[JobOutcome]:
        """
        Execute jobs on up to `jobs` worker threads.

        Returns:
            One outcome per request, in request order
        """
        with self._lock:
            if self._is_running:
                raise RuntimeError("A batch is already running")
            self._is_running = True
            self._cancel_event.clear()

        self.performance_monitor.start_monitoring()
        try:
            workers = max(1, min(jobs, len(requests)))
            self._logger.info(f"Running {len(requests)} job(s) on {workers} worker(s)")
            if workers == 1:
                return [self._run_job(request) for request in requests]
            with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="spindyn") as pool:
                futures = [pool.submit(self._run_job, request) for request in requests]
                return [future.result() for future in futures]
        finally:
            self.performance_monitor.stop_monitoring()
            with self._lock:
                self._is_running = False
                self._services.clear()

    def cancel(self) -> None:
        """Cancel jobs that have not started and ask running ones to stop."""
        self._logger.info("Cancelling batch")
        self._cancel_event.set()
        with self._lock:
            for service in self._services.values():
                service.cancel()

    def is_running(self) -> bool:
        with self._lock:
            return self._is_running

    def _run_job(self, request: JobRequest) -> JobOutcome:
        """
        Execute one job and convert any failure into an outcome.

        Args:
            request: Job to execute
        """
        started = time.time()
        if self._cancel_event.is_set():
            return JobOutcome(request, success=False, summary=f"{request.name}: cancelled",
                              error_message="Batch was cancelled", exit_code=2)

        service = ScenarioService(self.performance_monitor)
        with self._lock:
            self._services[request.name] = service
        file_manager = FileManager()
        try:
            if request.command in SCENARIO_COMMANDS:
                summary = self._run_scenario(request, service, file_manager)
            elif request.command == "poincare":
                summary = self._write_poincare(request, service.run_poincare(request.values), file_manager)
            elif request.command == "lyapunov":
                summary = self._write_lyapunov(request, service.run_lyapunov(request.values), file_manager)
            else:
                raise ValueError(f"Unknown command '{request.command}'")
            wall_time = time.time() - started
            self._write_manifest(request, file_manager, wall_time)
            self._logger.info(f"Job {request.name} finished in {wall_time:.2f} s")
            return JobOutcome(request, success=True, summary=f"{summary} ({wall_time:.2f} s) -> {request.out_dir}",
                              output_files=file_manager.written_files, wall_time=wall_time, exit_code=EXIT_OK)
        except Exception as e:
            details = self.error_handler.handle_error(e, context={"job": request.name})
            return JobOutcome(request, success=False, summary=f"{request.name}: failed: {e}",
                              output_files=file_manager.written_files, wall_time=time.time() - started,
                              error_message=details["error_message"], exit_code=self.error_handler.exit_code_for(e))
        finally:
            with self._lock:
                self._services.pop(request.name, None)

    def _run_scenario(self, request: JobRequest, service: ScenarioService, file_manager: FileManager) -> str:
        regime = SCENARIO_COMMANDS[request.command]
        config = config_from_values(regime, request.values, request.name, request.run["chunk_size"])
        result = service.run(config, self.progress_callback)

        out = Path(request.out_dir)
        file_manager.ensure_directory(str(out))
        file_manager.write_series(result.series, str(out / "entropy.csv"))
        observables = np.column_stack([result.series.times] + [result.observables[key] for key in OBSERVABLES_HEADER[1:]])
        file_manager.write_table(str(out / "observables.csv"), OBSERVABLES_HEADER, observables)
        file_manager.write_recoherences(result.recoherences, str(out / "recoherences.csv"))
        if result.trajectory is not None:
            file_manager.write_trajectory(result.trajectory, str(out / "trajectory.csv"))
        if result.section is not None:
            file_manager.write_section(result.section, str(out / "section.csv"))
        if result.lyapunov is not None:
            x0 = result.trajectory.state_at(0) if result.trajectory is not None else None
            label = request.values["representative"] if request.values["initial"] == "representative" \
                else request.values["initial"]
            row = (label,) + (
                (x0.q1, x0.p1, x0.q2, x0.p2) if x0 is not None else (np.nan,) * 4) + (result.lyapunov,)
            file_manager.write_table(str(out / "lyapunov.csv"), LYAPUNOV_HEADER, [row])

        if request.run["plots"]:
            title = f"{request.name}: {regime}, alpha = {config.alpha:g}"
            file_manager.write_text(str(out / "entropy.gp"), plot_scripts.entropy_script(title))
            if result.trajectory is not None:
                file_manager.write_text(str(out / "trajectory.gp"), plot_scripts.trajectory_script(title))
            if result.section is not None:
                file_manager.write_text(str(out / "section.gp"), plot_scripts.section_script(title, ["section.csv"]))

        series = result.series
        summary = (f"{request.name}: {request.command} ok, {len(series)} points, "
                   f"max delta {float(np.max(series.delta)):.4f}, max delta_N {float(np.max(series.delta_N)):.4f}, "
                   f"{len(result.recoherences)} recoherences, "
                   f"dH {result.diagnostics.get('energy_uncertainty', float('nan')):.4g}")
        if result.lyapunov is not None:
            summary += f", lambda {result.lyapunov:.4g}"
        return summary

    def _write_poincare(self, request: JobRequest, run: PoincareRun, file_manager: FileManager) -> str:
        out = Path(request.out_dir)
        file_manager.ensure_directory(str(out))
        if len(run.sections) == 1:
            names = ["section.csv"]
        else:
            names = [f"section_{i:03d}.csv" for i in range(len(run.sections))]
        for section, name in zip(run.sections, names):
            file_manager.write_section(section, str(out / name))
        if request.run["plots"]:
            title = f"{request.name}: H = {run.energy:.6g}, alpha = {run.params.alpha:g}"
            file_manager.write_text(str(out / "section.gp"), plot_scripts.section_script(title, names))
        crossings = sum(len(section.points) for section in run.sections)
        aborted = sum(section.aborted for section in run.sections)
        return (f"{request.name}: poincare ok, {len(run.sections)} section(s), {crossings} crossings, "
                f"{aborted} cut at the boundary, H = {run.energy:.6g}")

    def _write_lyapunov(self, request: JobRequest, run: LyapunovRun, file_manager: FileManager) -> str:
        out = Path(request.out_dir)
        file_manager.ensure_directory(str(out))
        if run.sweep is not None:
            file_manager.write_table(str(out / "sweep.csv"), SWEEP_HEADER, run.sweep.table)
            if request.run["plots"]:
                file_manager.write_text(str(out / "sweep.gp"),
                                        plot_scripts.sweep_script(f"{request.name}: coupling sweep"))
            return f"{request.name}: lyapunov sweep ok, {len(run.sweep.table)} candidates, alpha = {run.sweep.alpha:.17g}"
        rows = [(label, x.q1, x.p1, x.q2, x.p2, lam) for label, x, lam in run.rows]
        file_manager.write_table(str(out / "lyapunov.csv"), LYAPUNOV_HEADER, rows)
        estimates = ", ".join(f"{label} {lam:.4g}" for label, _, lam in run.rows)
        return f"{request.name}: lyapunov ok, {estimates}"

    def _write_manifest(self, request: JobRequest, file_manager: FileManager, wall_time: float) -> None:
        section = section_name(request.command)
        snapshot = self.config_manager.snapshot({section: request.values, "run": request.run})
        extra = {"command": request.command, "job": request.name}
        extra.update({key: f"{value:.3f}" for key, value in self.performance_monitor.get_performance_summary().items()})
        for warning in self.performance_monitor.check_resource_warnings():
            self._logger.warning(f"Job {request.name}: {warning}")
        extra.update({f"system_{key}": value for key, value in get_system_info().items()})
        extra.update({f"dep_{name}": version for name, version in get_dependencies_info().items()})
        manifest = RunManifest(config_snapshot=snapshot, version=VERSION, wall_time=wall_time,
                               output_files=file_manager.written_files, extra=extra)
        file_manager.write_manifest(manifest, str(Path(request.out_dir) / "manifest.ini"))
