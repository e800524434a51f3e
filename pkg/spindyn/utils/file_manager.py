"""
File management utilities for spindyn outputs.

This module provides the FileManager class that writes entropy series and
companion tables as CSV, reads series back, writes run manifests, and keeps the
list of files each run produced.

CSV conventions: comma separated, '.' decimal separator, LF line endings, and
floats written with 17 significant digits so a parse returns the identical
double.
"""

import configparser
import csv
import logging
import threading
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from ..core.interfaces import ISeriesWriter
from ..core.models import EntropySeries, PoincareSection, RecoherenceEvent, RunManifest, Trajectory
from .error_handler import ConfigError

SERIES_HEADER = ("t", "delta", "delta_N", "sigma1", "sigma2")
SECTION_HEADER = ("q1", "p1", "t_cross")
TRAJECTORY_HEADER = ("t", "q1", "p1", "q2", "p2", "H")
RECOHERENCE_HEADER = ("t_min", "depth", "width")
MANIFEST_SECTION = "manifest"


def format_float(value: float) -> str:
    """Shortest text with 17 significant digits; parses back to the same double."""
    return format(float(value), ".17g")


class FileManager(ISeriesWriter):
    """
    Writes and reads spindyn output files.

    Every successful write is recorded; a run's manifest lists them all.
    """

    def __init__(self):
        """Initialize the FileManager with an empty written-files list."""
        self._written: List[str] = []
        self._lock = threading.Lock()
        self._logger = logging.getLogger(__name__)

    @property
    def written_files(self) -> List[str]:
        with self._lock:
            return list(self._written)

    def ensure_directory(self, path: str) -> Path:
        """
        Create an output directory if needed.

        Raises:
            OSError: With the path in the message when creation fails
        """
        directory = Path(path)
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OSError(f"Cannot create output directory {directory}: {e}") from e
        return directory

    def write_table(self, path: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
        """
        Write a numeric CSV table.

        Args:
            path: Destination file
            header: Column names
            rows: Rows of numbers (text cells are written as they are)

        Returns:
            The path that was written

        Raises:
            OSError: With the path in the message
        """
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([value if isinstance(value, str) else format_float(value) for value in row])
        except OSError as e:
            raise OSError(f"Cannot write {target}: {e}") from e
        self._record(target)
        return str(target)

    def write_series(self, series: EntropySeries, path: str) -> str:
        """
        Write an entropy series with header t,delta,delta_N,sigma1,sigma2.

        Args:
            series: Series to write
            path: Destination file

        Returns:
            The path that was written
        """
        columns = np.column_stack([series.times, series.delta, series.delta_N, series.sigma1, series.sigma2])
        return self.write_table(path, SERIES_HEADER, columns)

    def read_table(self, path: str) -> tuple:
        """
        Read a numeric CSV table.

        Returns:
            (header, array of shape (rows, columns))

        Raises:
            OSError: If the file cannot be read
            ConfigError: If the contents are not a numeric table
        """
        source = Path(path)
        try:
            with open(source, "r", encoding="utf-8", newline="") as f:
                rows = list(csv.reader(f))
        except OSError as e:
            raise OSError(f"Cannot read {source}: {e}") from e
        if not rows:
            raise ConfigError(f"{source} is empty", key="path")
        header, body = tuple(rows[0]), rows[1:]
        try:
            data = np.array([[float(cell) for cell in row] for row in body], dtype=float)
        except ValueError as e:
            raise ConfigError(f"{source} holds a non-numeric cell: {e}", key="path") from e
        return header, data.reshape(len(body), len(header))

    def read_series(self, path: str) -> EntropySeries:
        """
        Parse a CSV written by write_series.

        Raises:
            ConfigError: If the header is not the series header
        """
        header, data = self.read_table(path)
        if header != SERIES_HEADER:
            raise ConfigError(f"{path} is not an entropy series (header {','.join(header)})", key="path")
        return EntropySeries(times=data[:, 0], delta=data[:, 1], delta_N=data[:, 2],
                             sigma1=data[:, 3], sigma2=data[:, 4])

    def write_section(self, section: PoincareSection, path: str) -> str:
        """Write section points as q1,p1,t_cross."""
        rows = [(p.q1, p.p1, p.crossing_time) for p in section.points]
        return self.write_table(path, SECTION_HEADER, rows)

    def write_trajectory(self, trajectory: Trajectory, path: str) -> str:
        """Write a classical trajectory as t,q1,p1,q2,p2,H."""
        columns = np.column_stack([trajectory.times, trajectory.states, trajectory.energies])
        return self.write_table(path, TRAJECTORY_HEADER, columns)

    def write_recoherences(self, events: Sequence[RecoherenceEvent], path: str) -> str:
        """Write recoherence events as t_min,depth,width."""
        return self.write_table(path, RECOHERENCE_HEADER, [(e.t_min, e.depth, e.width) for e in events])

    def write_text(self, path: str, text: str) -> str:
        """Write a text file (plot scripts) and record it."""
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        except OSError as e:
            raise OSError(f"Cannot write {target}: {e}") from e
        self._record(target)
        return str(target)

    def write_manifest(self, manifest: RunManifest, path: str) -> str:
        """
        Write manifest.ini: the config snapshot followed by a [manifest] section.

        The file lists itself among the output files.
        """
        target = Path(path)
        self._record(target)
        metadata = configparser.ConfigParser(interpolation=None)
        metadata.optionxform = str
        metadata[MANIFEST_SECTION] = {
            "version": manifest.version,
            "wall_time": format_float(manifest.wall_time),
            "output_files": "\n".join(sorted(set(manifest.output_files) | {str(target)})),
            **manifest.extra,
        }
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8", newline="\n") as f:
                f.write(manifest.config_snapshot.rstrip("\n") + "\n\n")
                metadata.write(f)
        except OSError as e:
            raise OSError(f"Cannot write {target}: {e}") from e
        self._logger.info(f"Wrote manifest {target}")
        return str(target)

    def read_manifest_files(self, path: str) -> List[str]:
        """Output files listed in a manifest."""
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path, "r", encoding="utf-8") as f:
                parser.read_file(f)
        except (OSError, configparser.Error) as e:
            raise OSError(f"Cannot read manifest {path}: {e}") from e
        listed = parser.get(MANIFEST_SECTION, "output_files", fallback="")
        return [line.strip() for line in listed.splitlines() if line.strip()]

    def _record(self, path: Path) -> None:
        with self._lock:
            if str(path) not in self._written:
                self._written.append(str(path))
        self._logger.debug(f"Wrote {path}")


def write_series(series: EntropySeries, path: str) -> str:
    """Write an entropy series CSV with a throwaway FileManager."""
    return FileManager().write_series(series, path)


def read_series(path: str) -> EntropySeries:
    """Read an entropy series CSV."""
    return FileManager().read_series(path)
