"""
spindyn Core Interfaces: Abstract Base Classes and Contracts.

This module defines the contracts between the layers of the simulator: the
scenario runner that executes physics runs, the writer that persists series and
manifests, the configuration manager, progress reporting, and the batch
controller used by the command line. Concrete classes live in services/ and
utils/; tests substitute lightweight fakes through the same contracts.

Interfaces:
- IScenarioRunner: Contract for executing one scenario configuration
- ISeriesWriter: Contract for CSV series and manifest persistence
- IConfigManager: Contract for configuration resolution and snapshots
- IProgressReporter: Contract for progress reporting components
- IScenarioController: Contract for batch job coordination

Usage:
    class MyRunner(IScenarioRunner):
        def run(self, config, progress_callback=None):
            ...

Dependencies:
- abc: Abstract base class module
- typing: Type hints for method signatures

License: MIT
Version: 1.0.0
"""

from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Mapping, Optional

from .models import (
    EntropySeries, JobOutcome, JobRequest, ProgressUpdate, RunManifest, ScenarioConfig, ScenarioResult,
)


class IScenarioRunner(ABC):
    """
    Interface for scenario runner implementations.

    Defines the contract for services that turn a ScenarioConfig into a
    ScenarioResult, reporting progress along the way.
    """

    @abstractmethod
    def run(self, config: ScenarioConfig,
            progress_callback: Optional[Callable[[ProgressUpdate], None]] = None) -> ScenarioResult:
        """
        Execute one scenario.

        Args:
            config: Fully resolved scenario configuration
            progress_callback: Function to call with progress updates

        Returns:
            ScenarioResult with the entropy series and companions
        """
        pass

    @abstractmethod
    def cancel(self) -> None:
        """Request cancellation of the running scenario."""
        pass


class ISeriesWriter(ABC):
    """
    Interface for output persistence.

    Defines the contract for components writing CSV series and run manifests.
    """

    @abstractmethod
    def write_series(self, series: EntropySeries, path: str) -> str:
        """
        Write an entropy series as CSV.

        Args:
            series: Series to write
            path: Destination file

        Returns:
            The path that was written
        """
        pass

    @abstractmethod
    def read_series(self, path: str) -> EntropySeries:
        """
        Parse a CSV written by write_series.

        Args:
            path: CSV file

        Returns:
            The series, bit-identical to the one written
        """
        pass

    @abstractmethod
    def write_manifest(self, manifest: RunManifest, path: str) -> str:
        """
        Write a run manifest.

        Args:
            manifest: Manifest to write
            path: Destination file

        Returns:
            The path that was written
        """
        pass


class IConfigManager(ABC):
    """
    Interface for configuration management.

    Defines the contract for resolving config sections and rendering snapshots.
    """

    @abstractmethod
    def resolve(self, section: str, config_path: Optional[str] = None, preset: Optional[str] = None,
                overrides: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
        """
        Resolve one section from defaults, preset, file and overrides.

        Returns:
            Typed values of every key in the section
        """
        pass

    @abstractmethod
    def snapshot(self, sections: Mapping[str, Mapping[str, Any]]) -> str:
        """
        Render resolved sections as config text.

        Returns:
            Text that parses back to the same values
        """
        pass

    @abstractmethod
    def get_defaults(self, section: str) -> Dict[str, Any]:
        """
        Get the built-in defaults of a section.

        Returns:
            Typed default values
        """
        pass


class IProgressReporter(ABC):
    """
    Interface for components that can report progress updates.
    """

    @abstractmethod
    def report_progress(self, update: ProgressUpdate) -> None:
        """
        Report a progress update.

        Args:
            update: ProgressUpdate containing current progress information
        """
        pass


class IScenarioController(ABC):
    """
    Interface for batch controller implementations.

    Defines the contract for components that execute a list of jobs, possibly
    concurrently, and collect their outcomes.
    """

    @abstractmethod
    def run_batch(self, requests: List[JobRequest], jobs: int = 1) -> List[JobOutcome]:
        """
        Execute jobs and wait for all of them.

        Args:
            requests: Jobs to run
            jobs: Maximum number of concurrent jobs

        Returns:
            One outcome per request, in request order
        """
        pass

    @abstractmethod
    def cancel(self) -> None:
        """Cancel jobs that have not started yet."""
        pass

    @abstractmethod
    def is_running(self) -> bool:
        """
        Check whether a batch is in progress.

        Returns:
            True while run_batch has not returned
        """
        pass
