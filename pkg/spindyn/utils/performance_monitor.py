"""
Performance monitoring utilities for spindyn runs.

Tracks resident memory (sampled in a background thread while monitoring is
active) and wall-clock time per processing stage, for run manifests and debug
logs.
"""

import logging
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, Iterator, List, Optional

import psutil


@dataclass
class PerformanceMetrics:
    """Container for one resource sample."""
    timestamp: datetime
    memory_usage_mb: float
    cpu_percent: float
    thread_count: int
    processing_stage: str


class PerformanceMonitor:
    """
    Monitor memory use and stage timings of the current process.

    Stage timings accumulate per stage name, so concurrent jobs using the
    same stage names add up.
    """

    def __init__(self, sample_interval: float = 0.5, memory_warning_mb: float = 4000.0):
        """
        Initialize the performance monitor.

        Args:
            sample_interval: Seconds between background memory samples
            memory_warning_mb: Resident size above which check_resource_warnings complains
        """
        self._sample_interval = sample_interval
        self._max_history_size = 600
        self._memory_warning_threshold_mb = memory_warning_mb

        self._metrics_history: List[PerformanceMetrics] = []
        self._stage_times: Dict[str, float] = {}
        self._peak_memory_mb = 0.0
        self._current_stage = "idle"
        self._monitoring_active = False
        self._monitor_thread: Optional[threading.Thread] = None
        self._monitor_lock = threading.Lock()
        self._logger = logging.getLogger(__name__)

    def start_monitoring(self) -> None:
        """Start sampling in a background thread."""
        with self._monitor_lock:
            if self._monitoring_active:
                return
            self._monitoring_active = True
            self._monitor_thread = threading.Thread(target=self._monitoring_loop, daemon=True)
            self._monitor_thread.start()

    def stop_monitoring(self) -> None:
        """Stop background sampling."""
        with self._monitor_lock:
            self._monitoring_active = False
            thread = self._monitor_thread
        if thread and thread.is_alive():
            thread.join(timeout=2.0)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """
        Time a block and add the duration to the stage total.

        Args:
            name: Stage name, e.g. 'diagonalize' or 'propagate'
        """
        previous = self._current_stage
        self._current_stage = name
        started = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - started
            with self._monitor_lock:
                self._stage_times[name] = self._stage_times.get(name, 0.0) + elapsed
            self._current_stage = previous
            self._sample_memory()
            self._logger.debug(f"Stage {name} took {elapsed:.3f} s")

    def get_stage_times(self) -> Dict[str, float]:
        with self._monitor_lock:
            return dict(self._stage_times)

    def get_peak_memory_mb(self) -> float:
        """Largest resident set size seen so far, in MB."""
        self._sample_memory()
        with self._monitor_lock:
            return self._peak_memory_mb

    def get_performance_summary(self) -> Dict[str, float]:
        """
        Get a summary of resource use for run manifests.

        Returns:
            Dictionary with peak memory and per-stage seconds
        """
        summary = {"peak_memory_mb": self.get_peak_memory_mb()}
        for name, seconds in sorted(self.get_stage_times().items()):
            summary[f"stage_{name}_s"] = seconds
        return summary

    def check_resource_warnings(self) -> List[str]:
        """
        Check for resource usage warnings.

        Returns:
            List of warning messages
        """
        warnings = []
        with self._monitor_lock:
            current = self._metrics_history[-1] if self._metrics_history else None
        if current and current.memory_usage_mb > self._memory_warning_threshold_mb:
            warnings.append(f"High memory usage in stage {current.processing_stage}: "
                            f"{current.memory_usage_mb:.1f} MB")
        return warnings

    def _sample_memory(self) -> None:
        try:
            metrics = self._collect_metrics()
        except psutil.Error as e:
            self._logger.debug(f"Could not sample memory: {e}")
            return
        with self._monitor_lock:
            self._metrics_history.append(metrics)
            if len(self._metrics_history) > self._max_history_size:
                self._metrics_history = self._metrics_history[-self._max_history_size:]
            self._peak_memory_mb = max(self._peak_memory_mb, metrics.memory_usage_mb)

    def _monitoring_loop(self) -> None:
        while self._monitoring_active:
            self._sample_memory()
            time.sleep(self._sample_interval)

    def _collect_metrics(self) -> PerformanceMetrics:
        process = psutil.Process()
        return PerformanceMetrics(
            timestamp=datetime.now(),
            memory_usage_mb=process.memory_info().rss / (1024 * 1024),
            cpu_percent=process.cpu_percent(),
            thread_count=process.num_threads(),
            processing_stage=self._current_stage,
        )


# Global performance monitor instance
_performance_monitor: Optional[PerformanceMonitor] = None


def get_performance_monitor() -> PerformanceMonitor:
    """
    Get the global performance monitor instance.

    Returns:
        Global PerformanceMonitor instance
    """
    global _performance_monitor
    if _performance_monitor is None:
        _performance_monitor = PerformanceMonitor()
    return _performance_monitor
