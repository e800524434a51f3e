"""
Scenario service: preset experiment drivers for the three regimes.

This module contains the named presets, the translation of resolved config
values into ScenarioConfig objects, the three regime drivers (two qubits, spin
in an environment, semiclassical spins with a classical companion), and the
ScenarioService class that runs them with progress reporting, cancellation and
stage timing. The Poincare and Lyapunov commands of the CLI also run through
the service.
"""

import logging
import threading
import time
from datetime import datetime
from functools import lru_cache
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from ..core.interfaces import IScenarioRunner
from ..core.models import (
    REGIMES, ClassicalState, InitialSpec, Ket, ModelParams, PoincareSection, Preset, ProgressUpdate,
    ScenarioConfig, ScenarioResult, SpinMagnitude, TimeGrid, is_infinite,
)
from ..physics.classical_limit import (
    CouplingSweep, Representatives, canonical_to_z, check_sphere, classical_hamiltonian,
    classify_representatives, default_energy, integrate_trajectory, lyapunov_exponent, lyapunov_exponents,
    poincare_section, section_scan, sweep_coupling, z_to_canonical,
)
from ..physics.entanglement import detect_recoherences, entropy_series
from ..physics.quantum_dynamics import (
    ReducedEvolution, build_hamiltonian, energy_uncertainty, mixed_member_states, propagate_ensemble,
    propagate_mixed_reduced, propagate_reduced, spectral_decompose, spectral_frequencies, two_qubit_analytic,
)
from ..physics.spin_core import coherent_state, tensor, thermal_density, uniform_state
from ..utils.error_handler import BoundaryHitError, ConfigError, SpinDynError, StateError
from ..utils.performance_monitor import PerformanceMonitor, get_performance_monitor

logger = logging.getLogger(__name__)

HALF = SpinMagnitude(1)

_TWO_QUBIT_CASES = {
    "case_a": ("0", "0", "both spins down"),
    "case_b": ("1", "0", "spin 1 along x, spin 2 down"),
    "case_c": ("inf", "0", "spin 1 up, spin 2 down"),
    "case_d": ("0", "1", "spin 1 down, spin 2 along x"),
    "case_e": ("0", "1j", "spin 1 down, spin 2 at z = i"),
    "case_f": ("1", "1", "both spins along x"),
    "case_g": ("1", "1j", "spin 1 along x, spin 2 at z = i"),
    "case_h": ("1j", "1j", "both spins at z = i"),
}


# Near-resonant weak coupling for the coherent_x / mixed_z2 pair: with s1 = 200 the
# qubit flip against the south-pole environment completes within t = 200 (at
# t = pi / (20 alpha)) while the x-polarized pair stays detuned by about alpha s1 / 2.
WEAK_ENVIRONMENT_ALPHA = "0.002"


def _build_presets() -> Dict[str, Preset]:
    presets: Dict[str, Preset] = {}
    for name, (z1, z2, description) in _TWO_QUBIT_CASES.items():
        presets[name] = Preset(name, "two_qubits", {"z1": z1, "z2": z2}, f"Two qubits, {description}")

    environment = [
        ("coherent_ground", {"initial": "coherent", "z1": "0", "z2": "0"},
         "Coherent environment and qubit, both at z = 0"),
        ("coherent_x", {"initial": "coherent", "z1": "1", "z2": "1", "alpha": WEAK_ENVIRONMENT_ALPHA},
         f"Coherent environment and qubit, both along x (alpha = {WEAK_ENVIRONMENT_ALPHA})"),
        ("mixed_z2", {"initial": "coherent", "z1": "0", "z2": "1", "alpha": WEAK_ENVIRONMENT_ALPHA},
         f"Environment at z = 0, qubit along x (alpha = {WEAK_ENVIRONMENT_ALPHA})"),
        ("uniform", {"initial": "uniform", "z2": "1"},
         "Uniform superposition environment, qubit along x"),
        ("thermal", {"initial": "thermal", "z2": "1"},
         "Thermal environment (T = s1/10 unless set), qubit along x"),
    ]
    for name, values, description in environment:
        presets[name] = Preset(name, "environment", values, description)

    for label in ("periodic", "regular", "chaotic"):
        presets[label] = Preset(label, "semiclassical", {"initial": "representative", "representative": label},
                                f"Semiclassical spins from the {label} representative of the default shell")
    return presets


PRESETS: Dict[str, Preset] = _build_presets()


def list_presets(regime: Optional[str] = None) -> List[Preset]:
    """
    Shipped presets, grouped by regime.

    Args:
        regime: Restrict to one config section

    Returns:
        Presets in regime order, then by name
    """
    order = {name: i for i, name in enumerate(REGIMES)}
    chosen = [p for p in PRESETS.values() if regime is None or p.regime == regime]
    return sorted(chosen, key=lambda p: (order.get(p.regime, len(order)), p.name))


def _grid(values: Mapping[str, Any]) -> TimeGrid:
    return TimeGrid(values["t_start"], values["t_end"], values["points"])


def config_from_values(regime: str, values: Mapping[str, Any], name: str = "custom",
                       chunk_size: int = 256) -> ScenarioConfig:
    """
    Build a ScenarioConfig from a resolved config section.

    Args:
        regime: two_qubits, environment or semiclassical
        values: Typed values from ConfigManager.resolve
        name: Job name
        chunk_size: Time points per propagation block

    Raises:
        ConfigError: If the values violate a regime constraint
    """
    grid = _grid(values)
    if regime == "two_qubits":
        config = ScenarioConfig(regime=regime, alpha=values["alpha"], grid=grid,
                                initial_1=InitialSpec("coherent", z=values["z1"]), initial_2=values["z2"],
                                s1=HALF, s2=HALF, name=name, chunk_size=chunk_size)
    elif regime == "environment":
        s1 = values["s1"]
        kind = values["initial"]
        if kind == "coherent":
            initial = InitialSpec("coherent", z=values["z1"])
        elif kind == "uniform":
            initial = InitialSpec("uniform")
        else:
            temperature = values["temperature"] if values["temperature"] is not None else s1.s / 10
            initial = InitialSpec("thermal", temperature=temperature)
        config = ScenarioConfig(regime=regime, alpha=values["alpha"], grid=grid, initial_1=initial,
                                initial_2=values["z2"], s1=s1, s2=HALF, name=name,
                                mixed_method=values["mixed_method"], chunk_size=chunk_size)
    elif regime == "semiclassical":
        s = values["s"]
        kind = values["initial"]
        if kind == "representative":
            initial = InitialSpec("representative", label=values["representative"])
        elif kind == "canonical":
            if values["point"] is None:
                raise ConfigError("initial = canonical needs a point q1,p1,q2,p2", key="semiclassical.point")
            initial = InitialSpec("canonical", point=values["point"])
        else:
            initial = InitialSpec("coherent", z=values["z1"])
        config = ScenarioConfig(regime=regime, alpha=values["alpha"], grid=grid, initial_1=initial,
                                initial_2=values["z2"], s1=s, s2=s, name=name, chunk_size=chunk_size,
                                section_crossings=values["crossings"], lyapunov=values["lyapunov"],
                                lyapunov_horizon=values["horizon"], renorm_interval=values["renorm_interval"],
                                classical_step=values["classical_step"], energy=values["energy"],
                                scan_grid=values["grid_n"], scan_horizon=values["scan_horizon"])
    else:
        raise ConfigError(f"Unknown regime '{regime}'", key="regime")
    validate_scenario(config)
    return config


def validate_scenario(config: ScenarioConfig) -> None:
    """
    Check the regime constraints of a configuration.

    Raises:
        ConfigError: Naming the offending key
    """
    regime = config.regime
    if regime not in REGIMES:
        raise ConfigError(f"Unknown regime '{regime}'", key="regime")
    kind = config.initial_1.kind
    if regime == "two_qubits":
        if config.s1 != HALF or config.s2 != HALF:
            raise ConfigError("two_qubits needs s1 = s2 = 1/2", key="two_qubits.s")
        if kind != "coherent":
            raise ConfigError(f"two_qubits starts from coherent states, not {kind}", key="two_qubits.z1")
    elif regime == "environment":
        if config.s2 != HALF:
            raise ConfigError("environment needs s2 = 1/2", key="environment.s2")
        if kind not in ("coherent", "uniform", "thermal"):
            raise ConfigError(f"environment cannot start from {kind}", key="environment.initial")
        if config.mixed_method not in ("ensemble", "full"):
            raise ConfigError(f"Unknown mixed method '{config.mixed_method}'", key="environment.mixed_method")
    else:
        if config.s1 != config.s2:
            raise ConfigError("semiclassical needs s1 = s2", key="semiclassical.s")
        if kind not in ("representative", "canonical", "coherent"):
            raise ConfigError(f"semiclassical cannot start from {kind}", key="semiclassical.initial")
        if kind == "canonical":
            try:
                check_sphere(config.initial_1.point, config.params(), strict=True)
            except StateError as e:
                raise ConfigError(str(e), key="semiclassical.point") from e


@lru_cache(maxsize=16)
def find_representatives(params: ModelParams, energy: Optional[float] = None, grid_n: int = 7,
                         horizon: float = 500.0) -> Representatives:
    """Memoized classify_representatives; a batch of semiclassical presets scans the shell once."""
    return classify_representatives(params, energy, grid_n, horizon)


def _observables(evolution: ReducedEvolution, s1: SpinMagnitude, s2: SpinMagnitude) -> Dict[str, np.ndarray]:
    m1, m2 = s1.m_values(), s2.m_values()
    return {
        "Sz1": evolution.populations_1 @ m1,
        "Sz2": evolution.populations_2 @ m2,
        "Sz2_sq": evolution.populations_2 @ (m2 ** 2),
    }


def _pure_result(config: ScenarioConfig, psi0: Ket, hamiltonian: np.ndarray, eig,
                 monitor: PerformanceMonitor) -> Tuple[ReducedEvolution, Dict[str, float]]:
    d1, d2 = config.params().dims
    with monitor.stage("propagate"):
        evolution = propagate_reduced(eig, psi0, config.grid.times(), d1, d2, keep=2,
                                      chunk_size=config.chunk_size)
    h_psi = hamiltonian @ psi0.amplitudes
    diagnostics = {
        "energy_uncertainty": energy_uncertainty(hamiltonian, psi0),
        "initial_energy": float(np.vdot(psi0.amplitudes, h_psi).real),
    }
    return evolution, diagnostics


def _finish(config: ScenarioConfig, evolution: ReducedEvolution, diagnostics: Dict[str, float],
            started: float, monitor: PerformanceMonitor, **companions: Any) -> ScenarioResult:
    with monitor.stage("entropy"):
        series = entropy_series(config.grid.times(), evolution.reduced, evolution.populations_1,
                                evolution.populations_2, config.s1, config.s2)
    recoherences = tuple(detect_recoherences(series)) if len(series) >= 10 else ()
    diagnostics["dim"] = float(config.s1.dim() * config.s2.dim())
    diagnostics["wall_time"] = time.time() - started
    return ScenarioResult(config=config, series=series, observables=_observables(evolution, config.s1, config.s2),
                          recoherences=recoherences, diagnostics=diagnostics, **companions)


def _diagonalize(config: ScenarioConfig, monitor: PerformanceMonitor):
    with monitor.stage("diagonalize"):
        hamiltonian = build_hamiltonian(config.params())
        eig = spectral_decompose(hamiltonian)
    return hamiltonian, eig


def run_two_qubit_scenario(config: ScenarioConfig, monitor: Optional[PerformanceMonitor] = None) -> ScenarioResult:
    """
    Two spins 1/2 from the product of coherent states |z1> x |z2>.

    The diagnostics carry the largest deviation between the numeric spectrum
    and the closed-form two-qubit eigenvalues.
    """
    monitor = monitor or get_performance_monitor()
    started = time.time()
    if config.regime != "two_qubits":
        raise ConfigError(f"Expected a two_qubits config, got {config.regime}", key="regime")
    hamiltonian, eig = _diagonalize(config, monitor)
    psi0 = tensor(coherent_state(HALF, config.initial_1.z), coherent_state(HALF, config.initial_2))
    evolution, diagnostics = _pure_result(config, psi0, hamiltonian, eig, monitor)
    analytic = np.sort(two_qubit_analytic(config.alpha).eigenvalues)
    diagnostics["analytic_eigen_error"] = float(np.max(np.abs(analytic - eig.eigenvalues)))
    frequencies = tuple(float(w) for w in spectral_frequencies(eig))
    return _finish(config, evolution, diagnostics, started, monitor, frequencies=frequencies)


def run_environment_scenario(config: ScenarioConfig, monitor: Optional[PerformanceMonitor] = None) -> ScenarioResult:
    """
    A spin 1/2 coupled to a large spin acting as its environment.

    Pure environments (coherent, uniform) propagate the product ket; a thermal
    environment propagates either the ensemble of |m1> x |z2> members or the
    full density operator, as chosen by mixed_method.
    """
    monitor = monitor or get_performance_monitor()
    started = time.time()
    if config.regime != "environment":
        raise ConfigError(f"Expected an environment config, got {config.regime}", key="regime")
    hamiltonian, eig = _diagonalize(config, monitor)
    partner = coherent_state(config.s2, config.initial_2)
    spec = config.initial_1
    if spec.kind != "thermal":
        environment = coherent_state(config.s1, spec.z) if spec.kind == "coherent" else uniform_state(config.s1)
        evolution, diagnostics = _pure_result(config, tensor(environment, partner), hamiltonian, eig, monitor)
        return _finish(config, evolution, diagnostics, started, monitor)

    rho1 = thermal_density(config.s1, spec.temperature)
    rho0 = tensor(rho1, partner)
    d1, d2 = config.params().dims
    times = config.grid.times()
    with monitor.stage("propagate"):
        if config.mixed_method == "ensemble":
            members, weights = mixed_member_states(np.diag(rho1.matrix).real, partner.amplitudes)
            evolution = propagate_ensemble(eig, members, weights, times, d1, d2, keep=2)
        else:
            evolution = propagate_mixed_reduced(eig, rho0, times, d1, d2, keep=2)
    diagnostics = {
        "energy_uncertainty": energy_uncertainty(hamiltonian, rho0),
        "initial_energy": float(np.einsum("ij,ji->", hamiltonian, rho0.matrix).real),
        "temperature": float(spec.temperature),
    }
    return _finish(config, evolution, diagnostics, started, monitor)


def semiclassical_initial(config: ScenarioConfig) -> Tuple[ClassicalState, complex, complex]:
    """
    Classical initial condition and coherent labels (z1, z2) of a semiclassical run.

    Raises:
        ConfigError: If a canonical point lies outside the sphere
    """
    params = config.params()
    spec = config.initial_1
    if spec.kind == "coherent":
        z1, z2 = spec.z, config.initial_2
        if is_infinite(z1) or is_infinite(z2):
            raise ConfigError("The classical companion cannot start at the north pole", key="semiclassical.z1")
        q1, p1 = z_to_canonical(z1, config.s1)
        q2, p2 = z_to_canonical(z2, config.s2)
        return ClassicalState(q1, p1, q2, p2), z1, z2
    if spec.kind == "representative":
        reps = find_representatives(params, config.energy, config.scan_grid, config.scan_horizon)
        x0 = reps.by_label(spec.label)
    else:
        x0 = spec.point
    try:
        check_sphere(x0, params, strict=True)
        z1 = canonical_to_z(x0.q1, x0.p1, config.s1)
        z2 = canonical_to_z(x0.q2, x0.p2, config.s2)
    except StateError as e:
        raise ConfigError(str(e), key="semiclassical.point") from e
    return x0, z1, z2


def run_semiclassical_scenario(config: ScenarioConfig,
                               monitor: Optional[PerformanceMonitor] = None) -> ScenarioResult:
    """
    Two large spins: quantum entropies next to the classical companion.

    The quantum side starts from |z1> x |z2> mapped from the classical point.
    The companion trajectory runs on the same grid; a boundary hit truncates it
    with a warning instead of failing the run. A Poincare section and a Lyapunov
    estimate are added when requested.
    """
    monitor = monitor or get_performance_monitor()
    started = time.time()
    if config.regime != "semiclassical":
        raise ConfigError(f"Expected a semiclassical config, got {config.regime}", key="regime")
    params = config.params()
    with monitor.stage("classify"):
        x0, z1, z2 = semiclassical_initial(config)
    hamiltonian, eig = _diagonalize(config, monitor)
    psi0 = tensor(coherent_state(config.s1, z1), coherent_state(config.s2, z2))
    evolution, diagnostics = _pure_result(config, psi0, hamiltonian, eig, monitor)
    diagnostics["classical_energy"] = classical_hamiltonian(x0, params)

    trajectory = None
    with monitor.stage("classical"):
        try:
            trajectory = integrate_trajectory(x0, params, config.grid, config.classical_step)
            diagnostics["energy_drift"] = trajectory.energy_drift()
        except BoundaryHitError as e:
            logger.warning(f"Classical companion of {config.name} stopped: {e}")
            diagnostics["classical_abort_time"] = float(e.last_time) if e.last_time is not None else float("nan")

        section = None
        if config.section_crossings > 0:
            section = poincare_section(x0, params, config.section_crossings)
            if section.aborted:
                diagnostics["section_abort_time"] = (section.points[-1].crossing_time
                                                     if section.points else 0.0)

        lyapunov = None
        if config.lyapunov:
            try:
                lyapunov = lyapunov_exponent(x0, params, config.lyapunov_horizon, config.renorm_interval)
            except BoundaryHitError as e:
                logger.warning(f"Lyapunov estimate of {config.name} failed: {e}")
    return _finish(config, evolution, diagnostics, started, monitor,
                   trajectory=trajectory, section=section, lyapunov=lyapunov)


_DRIVERS: Dict[str, Callable[[ScenarioConfig, Optional[PerformanceMonitor]], ScenarioResult]] = {
    "two_qubits": run_two_qubit_scenario,
    "environment": run_environment_scenario,
    "semiclassical": run_semiclassical_scenario,
}


class PoincareRun(NamedTuple):
    """Sections produced by the poincare command."""
    params: ModelParams
    energy: float
    labels: Tuple[str, ...]
    sections: Tuple[PoincareSection, ...]


class LyapunovRun(NamedTuple):
    """Estimates produced by the lyapunov command; sweep is set for --sweep."""
    params: ModelParams
    energy: float
    rows: Tuple[Tuple[str, ClassicalState, float], ...]
    sweep: Optional[CouplingSweep] = None


class RunCancelledError(SpinDynError):
    """Raised between stages when a run was cancelled."""


class ScenarioService(IScenarioRunner):
    """
    Runs scenarios with progress reporting and cancellation.

    Cancellation is checked between stages; a stage that already started runs
    to completion.
    """

    def __init__(self, monitor: Optional[PerformanceMonitor] = None):
        """Initialize the scenario service."""
        self._cancel_event = threading.Event()
        self.monitor = monitor or get_performance_monitor()
        self._logger = logging.getLogger(__name__)

    def run(self, config: ScenarioConfig,
            progress_callback: Optional[Callable[[ProgressUpdate], None]] = None) -> ScenarioResult:
        """
        Execute one scenario.

        Args:
            config: Resolved configuration
            progress_callback: Function to call with progress updates

        Returns:
            ScenarioResult of the regime driver

        Raises:
            RunCancelledError: If cancel() was called before the run started
        """
        validate_scenario(config)
        self._report(progress_callback, 0.0, "Starting", f"{config.name}: {config.regime}")
        self._check_cancelled()
        self._logger.info(f"Running {config.regime} scenario {config.name} "
                          f"(alpha = {config.alpha:g}, {config.grid.n_points} points)")
        result = _DRIVERS[config.regime](config, self.monitor)
        self._check_cancelled()
        self._report(progress_callback, 100.0, "Complete",
                     f"{config.name}: max delta {float(np.max(result.series.delta)):.4f}")
        return result

    def cancel(self) -> None:
        """Request cancellation of the running scenario."""
        self._cancel_event.set()
        self._logger.info("Scenario cancellation requested")

    def run_poincare(self, values: Mapping[str, Any]) -> PoincareRun:
        """
        Poincare sections for the poincare command.

        With scan = true every point of the energy-shell grid is integrated;
        otherwise a single point (the given one, or a representative).
        """
        params = ModelParams(s1=values["s"], s2=values["s"], alpha=values["alpha"])
        energy = values["energy"] if values["energy"] is not None else default_energy(params)
        with self.monitor.stage("poincare"):
            if values["scan"]:
                sections = section_scan(params, energy, values["grid_n"], values["crossings"],
                                        values["direction"], values["step"])
                labels = tuple(f"scan_{i:03d}" for i in range(len(sections)))
                return PoincareRun(params, energy, labels, tuple(sections))
            x0, label = self._point_or_representative(values, params, energy)
            section = poincare_section(x0, params, values["crossings"], values["direction"], values["step"])
        return PoincareRun(params, section.energy, (label,), (section,))

    def run_lyapunov(self, values: Mapping[str, Any]) -> LyapunovRun:
        """
        Lyapunov estimates for the lyapunov command.

        With sweep = true the coupling sweep runs instead; its chosen alpha and
        table are returned in `sweep`.
        """
        params = ModelParams(s1=values["s"], s2=values["s"], alpha=values["alpha"])
        energy = values["energy"] if values["energy"] is not None else default_energy(params)
        with self.monitor.stage("lyapunov"):
            if values["sweep"]:
                sweep = sweep_coupling(values["s"], values["s"], energy=values["energy"],
                                       grid_n=values["grid_n"], horizon=values["scan_horizon"])
                return LyapunovRun(params, energy, (), sweep)
            if values["point"] is None and values["representative"] == "all":
                reps = find_representatives(params, values["energy"], values["grid_n"], values["scan_horizon"])
                labels = ("periodic", "regular", "chaotic")
                points = [reps.by_label(label) for label in labels]
                exponents = lyapunov_exponents(points, params, values["horizon"], values["renorm_interval"],
                                               values["step"])
                rows = tuple((label, x, float(lam)) for label, x, lam in zip(labels, points, exponents))
                return LyapunovRun(params, energy, rows)
            x0, label = self._point_or_representative(values, params, energy)
            lam = lyapunov_exponent(x0, params, values["horizon"], values["renorm_interval"], values["step"])
        return LyapunovRun(params, energy, ((label, x0, lam),))

    def _point_or_representative(self, values: Mapping[str, Any], params: ModelParams,
                                 energy: float) -> Tuple[ClassicalState, str]:
        if values["point"] is not None:
            try:
                check_sphere(values["point"], params, strict=True)
            except StateError as e:
                raise ConfigError(str(e), key="point") from e
            return values["point"], "point"
        label = values["representative"]
        reps = find_representatives(params, values["energy"], values["grid_n"], values["scan_horizon"])
        return reps.by_label(label), label

    def _check_cancelled(self) -> None:
        if self._cancel_event.is_set():
            raise RunCancelledError("Scenario run was cancelled")

    def _report(self, callback: Optional[Callable[[ProgressUpdate], None]], percentage: float,
                step: str, message: str) -> None:
        if callback is None:
            return
        try:
            callback(ProgressUpdate(percentage=percentage, current_step=step, message=message,
                                    timestamp=datetime.now()))
        except Exception as e:
            self._logger.error(f"Error in progress callback: {e}")
