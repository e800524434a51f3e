"""
spindyn Core Data Models: Type-Safe Data Structures.

This module defines the data structures shared by every layer of the simulator:
spin magnitudes, quantum states, model parameters, spectra, time grids, entropy
series, classical phase-space points, scenario configurations and run manifests.
All models are frozen dataclasses; array fields are copied on construction and
marked read-only, so a model can be shared between worker threads freely.

Models:
- SpinMagnitude: half-integer spin stored as the integer 2s
- Ket / DensityOperator: pure and mixed states over a single-spin or product basis
- ModelParams: coupling and Zeeman factors of the two-spin Hamiltonian
- EigenSystem: eigenvalues and orthonormal eigenvectors of the Hamiltonian
- TimeGrid: uniform time grid
- EntropySeries / RecoherenceEvent: entanglement diagnostics along a run
- ClassicalState / Trajectory / SectionPoint / PoincareSection: classical limit
- InitialSpec / ScenarioConfig / ScenarioResult: experiment drivers
- ProgressUpdate / RunManifest: progress reporting and run bookkeeping
- Preset / JobRequest / JobOutcome: named parameter sets and batch jobs

Usage:
    s = SpinMagnitude.from_value("1/2")
    grid = TimeGrid(0.0, 50.0, 2000)
    params = ModelParams(s1=s, s2=s, alpha=1.0)

Dependencies:
- numpy: array storage for states, spectra and series
- dataclasses: frozen, typed containers

License: MIT
Version: 1.0.0
"""

from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.error_handler import StateError

NORM_TOLERANCE = 1e-12
HERMITIAN_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-10


def _frozen_array(values: Any, dtype: Any = None) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class PointAtInfinity:
    """Sentinel for the coherent-state label z = infinity (the m = +s state)."""

    _instance: Optional["PointAtInfinity"] = None

    def __new__(cls) -> "PointAtInfinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (PointAtInfinity, ())


Z_INF = PointAtInfinity()
ZValue = Union[complex, PointAtInfinity]


def is_infinite(z: ZValue) -> bool:
    """Return True when z is the point-at-infinity sentinel."""
    return z is Z_INF


@dataclass(frozen=True)
class SpinMagnitude:
    """
    Spin magnitude s stored exactly as the integer 2s.

    Attributes:
        twice_s: 2s, a non-negative integer
    """
    twice_s: int

    def __post_init__(self):
        if isinstance(self.twice_s, bool) or int(self.twice_s) != self.twice_s or self.twice_s < 0:
            raise StateError(f"twice_s must be a non-negative integer, got {self.twice_s!r}")
        object.__setattr__(self, "twice_s", int(self.twice_s))

    @classmethod
    def from_value(cls, s: Union[int, float, str, Fraction]) -> "SpinMagnitude":
        """
        Build a SpinMagnitude from s written as a number or a fraction string.

        Args:
            s: Spin magnitude, e.g. 0.5, "1/2", 15 or "200"

        Returns:
            The matching SpinMagnitude

        Raises:
            StateError: If s is negative or not a multiple of 1/2
        """
        try:
            twice = Fraction(str(s).strip()) * 2
        except (ValueError, ZeroDivisionError) as e:
            raise StateError(f"Cannot parse spin magnitude {s!r}") from e
        if twice.denominator != 1:
            raise StateError(f"Spin magnitude must be a multiple of 1/2, got {s!r}")
        return cls(int(twice))

    @property
    def s(self) -> float:
        return self.twice_s / 2

    def dim(self) -> int:
        return self.twice_s + 1

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers -s, -s+1, ..., +s in basis order."""
        return np.arange(-self.twice_s, self.twice_s + 1, 2, dtype=float) / 2

    def __str__(self) -> str:
        if self.twice_s % 2:
            return f"{self.twice_s}/2"
        return str(self.twice_s // 2)


@dataclass(frozen=True)
class Ket:
    """
    Normalized pure state.

    Attributes:
        amplitudes: Complex amplitudes in basis order
        dims: (d,) for a single spin or (d1, d2) for the product basis, index k1*d2 + k2
    """
    amplitudes: np.ndarray
    dims: Tuple[int, ...]

    def __post_init__(self):
        amplitudes = _frozen_array(self.amplitudes, dtype=complex)
        if amplitudes.ndim != 1:
            raise StateError(f"Ket amplitudes must be a vector, got shape {amplitudes.shape}")
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != amplitudes.size:
            raise StateError(f"Ket dims {dims} do not match {amplitudes.size} amplitudes")
        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise StateError(f"Ket is not normalized: norm = {norm!r}")
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class DensityOperator:
    """
    Density operator: Hermitian, positive semidefinite, unit trace.

    Attributes:
        matrix: Complex square matrix over the same basis conventions as Ket
        dims: Subsystem dimensions, as for Ket
        validate: Run the Hermiticity/trace/spectrum checks on construction
    """
    matrix: np.ndarray
    dims: Tuple[int, ...]
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        matrix = _frozen_array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise StateError(f"Density matrix must be square, got shape {matrix.shape}")
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != matrix.shape[0]:
            raise StateError(f"Density dims {dims} do not match matrix size {matrix.shape[0]}")
        if self.validate:
            if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_TOLERANCE:
                raise StateError("Density matrix is not Hermitian")
            trace = np.trace(matrix)
            if abs(trace - 1.0) > TRACE_TOLERANCE:
                raise StateError(f"Density matrix trace is {trace!r}, expected 1")
            smallest = float(np.linalg.eigvalsh(matrix)[0])
            if smallest < -PSD_TOLERANCE:
                raise StateError(f"Density matrix has negative eigenvalue {smallest!r}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


QuantumState = Union[Ket, DensityOperator]


@dataclass(frozen=True)
class ModelParams:
    """
    Parameters of H = eps1_B0 S1z + eps2_B0 S2z + alpha S1x S2x (hbar = 1).

    Attributes:
        s1: Magnitude of spin 1
        s2: Magnitude of spin 2
        alpha: Coupling constant
        eps1_B0: Zeeman factor of spin 1
        eps2_B0: Zeeman factor of spin 2
    """
    s1: SpinMagnitude
    s2: SpinMagnitude
    alpha: float
    eps1_B0: float = 1.0
    eps2_B0: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "eps1_B0", "eps2_B0"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise StateError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def dims(self) -> Tuple[int, int]:
        return (self.s1.dim(), self.s2.dim())


@dataclass(frozen=True)
class EigenSystem:
    """
    Spectral decomposition H = V diag(E) V^dagger.

    Attributes:
        eigenvalues: Real eigenvalues, ascending
        eigenvectors: Columns are the orthonormal eigenvectors
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen_array(self.eigenvalues, dtype=float))
        object.__setattr__(self, "eigenvectors", _frozen_array(self.eigenvectors, dtype=complex))
        n = self.eigenvalues.size
        if self.eigenvectors.shape != (n, n):
            raise StateError(f"Eigenvector matrix shape {self.eigenvectors.shape} does not match {n} eigenvalues")

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class TimeGrid:
    """
    Uniform time grid in units of 1/(eps B0), hbar = 1.

    Attributes:
        t_start: First time point
        t_end: Last time point
        n_points: Number of points, at least 2
    """
    t_start: float
    t_end: float
    n_points: int

    def __post_init__(self):
        object.__setattr__(self, "t_start", float(self.t_start))
        object.__setattr__(self, "t_end", float(self.t_end))
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points or self.n_points < 2:
            raise StateError(f"n_points must be an integer >= 2, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))
        if not (np.isfinite(self.t_start) and np.isfinite(self.t_end)) or self.t_end <= self.t_start:
            raise StateError(f"Time grid must be strictly increasing, got [{self.t_start}, {self.t_end}]")

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.t_end - self.t_start) / (self.n_points - 1)


@dataclass(frozen=True)
class EntropySeries:
    """
    Entanglement diagnostics on a time grid.

    Attributes:
        times: Grid times
        delta: Normalized linear entropy of the reduced state
        delta_N: Von-Neumann entropy with log base d
        sigma1: (<S1z> + s1) / (2 s1)
        sigma2: (<S2z> + s2) / (2 s2)
    """
    times: np.ndarray
    delta: np.ndarray
    delta_N: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        lengths = set()
        for name in ("times", "delta", "delta_N", "sigma1", "sigma2"):
            array = _frozen_array(getattr(self, name), dtype=float)
            if array.ndim != 1:
                raise StateError(f"{name} must be one-dimensional")
            lengths.add(array.size)
            object.__setattr__(self, name, array)
        if len(lengths) != 1:
            raise StateError(f"EntropySeries vectors have unequal lengths {sorted(lengths)}")

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class RecoherenceEvent:
    """
    A transient drop of the entropy below its plateau.

    Attributes:
        t_min: Time of the local entropy minimum
        depth: Plateau level minus the minimum value
        width: Time span below plateau - depth / 2
        index: Grid index of the minimum
    """
    t_min: float
    depth: float
    width: float
    index: int


@dataclass(frozen=True)
class ClassicalState:
    """
    Canonical point (q1, p1, q2, p2) on the product of two spin spheres.

    The sphere constraint A_i = q_i^2 + p_i^2 <= 4 s_i is checked where the spin
    magnitudes are known (classical_limit), not here.
    """
    q1: float
    p1: float
    q2: float
    p2: float

    def __post_init__(self):
        for name in ("q1", "p1", "q2", "p2"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise StateError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.p1, self.q2, self.p2], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "ClassicalState":
        q1, p1, q2, p2 = (float(v) for v in values)
        return cls(q1, p1, q2, p2)

    def actions(self) -> Tuple[float, float]:
        return (self.q1 ** 2 + self.p1 ** 2, self.q2 ** 2 + self.p2 ** 2)


@dataclass(frozen=True)
class Trajectory:
    """
    Sampled classical trajectory.

    Attributes:
        times: Sample times
        states: Array of shape (n, 4) holding (q1, p1, q2, p2) per sample
        energies: Classical Hamiltonian at each sample
    """
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", _frozen_array(self.times, dtype=float))
        object.__setattr__(self, "states", _frozen_array(self.states, dtype=float))
        object.__setattr__(self, "energies", _frozen_array(self.energies, dtype=float))
        if self.states.shape != (self.times.size, 4) or self.energies.size != self.times.size:
            raise StateError("Trajectory arrays have inconsistent shapes")

    def state_at(self, index: int) -> ClassicalState:
        return ClassicalState.from_array(self.states[index])

    def energy_drift(self) -> float:
        """Largest |H(t) - H(0)| / max(1, |H(0)|) along the trajectory."""
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / max(1.0, abs(e0)))


@dataclass(frozen=True)
class SectionPoint:
    """
    Crossing of the surface p2 = 0.

    Attributes:
        q1: Canonical coordinate of spin 1 at the crossing
        p1: Canonical momentum of spin 1 at the crossing
        crossing_time: Refined crossing time
        q2: Coordinate of spin 2 at the crossing
    """
    q1: float
    p1: float
    crossing_time: float
    q2: float = float("nan")


@dataclass(frozen=True)
class PoincareSection:
    """
    Section points of one initial condition.

    Attributes:
        initial: Initial condition
        points: Crossings in time order
        requested: Number of crossings asked for
        energy: Classical energy of the initial condition
        aborted: True when the trajectory reached the sphere boundary; points then
            holds the crossings found before the boundary
    """
    initial: ClassicalState
    points: Tuple[SectionPoint, ...]
    requested: int
    energy: float
    aborted: bool = False

    @property
    def complete(self) -> bool:
        return len(self.points) >= self.requested

    def coordinates(self) -> np.ndarray:
        """Array of shape (n, 2) with the (q1, p1) pairs."""
        if not self.points:
            return np.empty((0, 2))
        return np.array([[p.q1, p.p1] for p in self.points])


INITIAL_KINDS = ("coherent", "uniform", "thermal", "canonical", "representative")


@dataclass(frozen=True)
class InitialSpec:
    """
    Initial condition of spin 1 (or of both spins for canonical points).

    Attributes:
        kind: One of coherent, uniform, thermal, canonical, representative
        z: Coherent-state label for kind == coherent
        temperature: Temperature for kind == thermal
        point: Canonical point for kind == canonical (covers both spins)
        label: periodic / regular / chaotic for kind == representative
    """
    kind: str = "coherent"
    z: ZValue = 0j
    temperature: Optional[float] = None
    point: Optional[ClassicalState] = None
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise StateError(f"Unknown initial-state kind {self.kind!r}")


REGIMES = ("two_qubits", "environment", "semiclassical")


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Fully resolved configuration of one scenario run.

    Attributes:
        regime: two_qubits, environment or semiclassical
        alpha: Coupling constant
        grid: Time grid of the quantum series
        initial_1: Initial condition of spin 1 (or of both spins)
        initial_2: Coherent-state label of spin 2
        s1: Magnitude of spin 1
        s2: Magnitude of spin 2
        name: Preset or job name used for output folders
        mixed_method: ensemble or full propagation for mixed environments
        chunk_size: Time points per propagation block
        section_crossings: Poincare crossings of the classical companion (0 disables)
        lyapunov: Whether to estimate the Lyapunov exponent of the companion
        lyapunov_horizon: Integration horizon of the Lyapunov estimate
        renorm_interval: Renormalization interval of the Lyapunov estimate
        classical_step: RK4 step of the companion trajectory
        energy: Energy shell used to pick semiclassical representatives
        scan_grid: Grid size of the representative scan
        scan_horizon: Lyapunov horizon of the representative scan
    """
    regime: str
    alpha: float
    grid: TimeGrid
    initial_1: InitialSpec
    initial_2: ZValue
    s1: SpinMagnitude
    s2: SpinMagnitude
    name: str = "custom"
    mixed_method: str = "ensemble"
    chunk_size: int = 256
    section_crossings: int = 0
    lyapunov: bool = False
    lyapunov_horizon: float = 2000.0
    renorm_interval: float = 1.0
    classical_step: float = 1e-3
    energy: Optional[float] = None
    scan_grid: int = 7
    scan_horizon: float = 500.0

    def params(self) -> ModelParams:
        return ModelParams(s1=self.s1, s2=self.s2, alpha=self.alpha)


@dataclass(frozen=True)
class ScenarioResult:
    """
    Output of one scenario run.

    Attributes:
        config: The configuration that produced it
        series: Entropy series of subsystem 2
        observables: Extra time series keyed by name (Sz1, Sz2, Sz2_sq)
        recoherences: Events found in the linear entropy
        diagnostics: Scalars such as the initial energy uncertainty
        trajectory: Classical companion (semiclassical regime)
        section: Poincare section of the companion
        lyapunov: Lyapunov estimate of the companion
        frequencies: Distinct eigenvalue differences (two-qubit regime)
    """
    config: ScenarioConfig
    series: EntropySeries
    observables: Mapping[str, np.ndarray] = field(default_factory=dict)
    recoherences: Tuple[RecoherenceEvent, ...] = ()
    diagnostics: Mapping[str, float] = field(default_factory=dict)
    trajectory: Optional[Trajectory] = None
    section: Optional[PoincareSection] = None
    lyapunov: Optional[float] = None
    frequencies: Tuple[float, ...] = ()


@dataclass
class ProgressUpdate:
    """
    Represents a progress update during a run.

    Attributes:
        percentage: Completion percentage (0.0 to 100.0)
        current_step: Description of the current processing step
        message: Detailed progress message
        timestamp: When the progress update was created
    """
    percentage: float
    current_step: str
    message: str
    timestamp: datetime


@dataclass
class RunManifest:
    """
    Bookkeeping written next to every run's outputs.

    Attributes:
        config_snapshot: INI text of all resolved parameters, defaults included
        version: spindyn version that produced the outputs
        wall_time: Wall-clock duration in seconds
        output_files: Every file written by the run
        extra: Additional metadata (peak memory, platform, dependency versions)
    """
    config_snapshot: str
    version: str
    wall_time: float
    output_files: List[str] = field(default_factory=list)
    extra: Dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Preset:
    """
    Named parameter set for one regime.

    Attributes:
        name: Preset name as used on the command line
        regime: Config section the preset applies to
        values: Config values (as text) the preset overrides
        description: One-line description for list-presets
    """
    name: str
    regime: str
    values: Mapping[str, str]
    description: str


@dataclass(frozen=True)
class JobRequest:
    """
    One unit of work for the batch controller.

    Attributes:
        command: two-qubits, environment, semiclassical, poincare or lyapunov
        name: Job name (preset name or 'custom')
        values: Resolved, typed values of the command's config section
        run: Resolved, typed values of the [run] section
        out_dir: Directory receiving every output of this job
    """
    command: str
    name: str
    values: Mapping[str, Any]
    run: Mapping[str, Any]
    out_dir: str


@dataclass
class JobOutcome:
    """
    Result of one executed job.

    Attributes:
        request: The job that was executed
        success: Whether every stage finished
        summary: One-line summary printed by the CLI
        output_files: Files written by the job
        wall_time: Wall-clock duration in seconds
        error_message: Failure description when success is False
        exit_code: Process exit code this outcome maps to
    """
    request: JobRequest
    success: bool
    summary: str
    output_files: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    error_message: Optional[str] = None
    exit_code: int = 0
