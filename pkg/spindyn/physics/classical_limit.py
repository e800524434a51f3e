"""
Classical limit of the two-spin model on the product of two spin spheres.

Canonical coordinates (q, p) of a spin with coherent-state label z satisfy
(q + i p) / sqrt(4s) = z / sqrt(1 + |z|^2), so A = q^2 + p^2 = 4s |z|^2 / (1 + |z|^2)
and the south pole z = 0 sits at the origin. The coherent-state expectation of
the Hamiltonian is

    H = eps1 (A1/2 - s1) + eps2 (A2/2 - s2) + (alpha/4) q1 q2 sqrt((4s1 - A1)(4s2 - A2)),

and the flow is q' = dH/dp, p' = -dH/dq. The chart is singular on the boundary
A = 4s (the north pole), so trajectories touching it abort.

Integrators work on a 4-tuple of components that are either floats (one
trajectory) or numpy arrays (a batch of trajectories advanced in lockstep).
"""

import logging
import math
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from ..core.models import (
    ClassicalState, ModelParams, PoincareSection, SectionPoint, SpinMagnitude, TimeGrid,
    Trajectory, ZValue, is_infinite,
)
from ..utils.error_handler import BoundaryHitError, StateError

logger = logging.getLogger(__name__)

BOUNDARY_MARGIN = 1e-9
SECTION_TOLERANCE = 1e-9
DEFAULT_STEP = 1e-3
DEFAULT_SECTION_STEP = 5e-3
DEFAULT_LYAPUNOV_STEP = 1e-2
LYAPUNOV_OFFSET = 1e-8
DIRECTIONS = ("positive", "negative", "both")

Components = Tuple[object, object, object, object]


# ---------------------------------------------------------------------------
# coordinates
# ---------------------------------------------------------------------------

def z_to_canonical(z: ZValue, s: SpinMagnitude) -> Tuple[float, float]:
    """
    Map a coherent-state label to canonical coordinates.

    z = Z_INF maps onto the boundary A = 4s along the positive q axis.
    """
    radius = math.sqrt(4 * s.s)
    if is_infinite(z):
        return (radius, 0.0)
    z = complex(z)
    if z == 0:
        return (0.0, 0.0)
    modulus = abs(z)
    scale = radius / math.hypot(1.0, modulus)
    return (scale * z.real, scale * z.imag)


def canonical_to_z(q: float, p: float, s: SpinMagnitude) -> complex:
    """
    Inverse of z_to_canonical.

    Raises:
        StateError: If A >= 4s (the north pole or outside the sphere)
    """
    limit = 4 * s.s
    action = q * q + p * p
    if action >= limit:
        raise StateError(f"Point with A = {action:.6g} is at or beyond the pole A = 4s = {limit:g}")
    w = complex(q, p) / math.sqrt(limit)
    return w / math.sqrt(1.0 - action / limit)


def _limits(params: ModelParams) -> Tuple[float, float]:
    return (4 * params.s1.s, 4 * params.s2.s)


def check_sphere(x: ClassicalState, params: ModelParams, strict: bool = False) -> None:
    """
    Check A_i <= 4 s_i, or 4 s_i - A_i >= 1e-9 when strict.

    Raises:
        StateError: On violation
    """
    limit1, limit2 = _limits(params)
    a1, a2 = x.actions()
    margin = BOUNDARY_MARGIN if strict else -1e-12 * max(limit1, limit2, 1.0)
    for index, (action, limit) in enumerate(((a1, limit1), (a2, limit2)), start=1):
        if limit - action < margin:
            where = "too close to" if strict and action <= limit else "outside"
            raise StateError(f"Spin {index} point is {where} the sphere: A{index} = {action:.12g}, 4s{index} = {limit:g}")


# ---------------------------------------------------------------------------
# Hamiltonian and flow
# ---------------------------------------------------------------------------

def _energy(x: Components, params: ModelParams):
    q1, p1, q2, p2 = x
    limit1, limit2 = _limits(params)
    a1 = q1 * q1 + p1 * p1
    a2 = q2 * q2 + p2 * p2
    coupling = 0.25 * params.alpha * q1 * q2 * np.sqrt(np.maximum((limit1 - a1) * (limit2 - a2), 0.0))
    return (params.eps1_B0 * (a1 / 2 - params.s1.s) + params.eps2_B0 * (a2 / 2 - params.s2.s) + coupling)


def _rhs(x: Components, params: ModelParams) -> Components:
    q1, p1, q2, p2 = x
    limit1, limit2 = _limits(params)
    r1 = limit1 - (q1 * q1 + p1 * p1)
    r2 = limit2 - (q2 * q2 + p2 * p2)
    c = 0.25 * params.alpha
    g = np.sqrt(r1 * r2)
    ratio12 = np.sqrt(r2 / r1)
    ratio21 = np.sqrt(r1 / r2)
    e1, e2 = params.eps1_B0, params.eps2_B0
    return (
        e1 * p1 - c * q1 * q2 * p1 * ratio12,
        -(e1 * q1 + c * q2 * (g - q1 * q1 * ratio12)),
        e2 * p2 - c * q1 * q2 * p2 * ratio21,
        -(e2 * q2 + c * q1 * (g - q2 * q2 * ratio21)),
    )


def classical_hamiltonian(x: ClassicalState, params: ModelParams) -> float:
    """
    Coherent-state energy <z|H|z> in canonical coordinates.

    Raises:
        StateError: If a sphere constraint is violated
    """
    check_sphere(x, params)
    return float(_energy((x.q1, x.p1, x.q2, x.p2), params))


def hamilton_rhs(x: ClassicalState, params: ModelParams) -> Tuple[float, float, float, float]:
    """
    (q1', p1', q2', p2') = (dH/dp1, -dH/dq1, dH/dp2, -dH/dq2).

    Raises:
        StateError: If 4 s_i - A_i < 1e-9 (the gradient diverges at the boundary)
    """
    check_sphere(x, params, strict=True)
    return tuple(float(v) for v in _rhs((x.q1, x.p1, x.q2, x.p2), params))


def _rk4(x: Components, h, params: ModelParams) -> Components:
    k1 = _rhs(x, params)
    k2 = _rhs(tuple(xi + 0.5 * h * ki for xi, ki in zip(x, k1)), params)
    k3 = _rhs(tuple(xi + 0.5 * h * ki for xi, ki in zip(x, k2)), params)
    k4 = _rhs(tuple(xi + h * ki for xi, ki in zip(x, k3)), params)
    return tuple(xi + h / 6.0 * (a + 2 * b + 2 * c + d) for xi, a, b, c, d in zip(x, k1, k2, k3, k4))


def rk4_step(x: ClassicalState, h: float, params: ModelParams) -> ClassicalState:
    """One classical 4th-order Runge-Kutta step of size h (negative h integrates backwards)."""
    check_sphere(x, params, strict=True)
    return ClassicalState.from_array(_rk4((x.q1, x.p1, x.q2, x.p2), h, params))


def _interior(x: Components, params: ModelParams):
    q1, p1, q2, p2 = x
    limit1, limit2 = _limits(params)
    r1 = limit1 - (q1 * q1 + p1 * p1)
    r2 = limit2 - (q2 * q2 + p2 * p2)
    # NaN compares False, so blown-up states are caught too
    return (r1 > BOUNDARY_MARGIN) & (r2 > BOUNDARY_MARGIN)


def integrate_trajectory(x0: ClassicalState, params: ModelParams, grid: TimeGrid,
                         step: float = DEFAULT_STEP) -> Trajectory:
    """
    Fixed-step RK4 trajectory sampled on a time grid.

    The step is shrunk so that every grid interval holds a whole number of steps.

    Raises:
        StateError: If x0 is not strictly interior
        BoundaryHitError: If the trajectory reaches the sphere boundary; carries the
            last valid state and time
    """
    if step <= 0:
        raise StateError(f"Integration step must be positive, got {step!r}")
    check_sphere(x0, params, strict=True)
    times = grid.times()
    n_sub = max(1, int(math.ceil(grid.spacing / step - 1e-9)))
    h = grid.spacing / n_sub

    states = np.empty((times.size, 4))
    x: Components = (x0.q1, x0.p1, x0.q2, x0.p2)
    states[0] = x
    for i in range(1, times.size):
        for j in range(n_sub):
            x_next = _rk4(x, h, params)
            if not _interior(x_next, params):
                t_last = times[i - 1] + j * h
                raise BoundaryHitError(
                    f"Trajectory reached the sphere boundary near t = {t_last:.6g}",
                    last_state=ClassicalState.from_array(x), last_time=t_last)
            x = x_next
        states[i] = x
    energies = _energy(tuple(states.T), params)
    trajectory = Trajectory(times=times, states=states, energies=energies)
    logger.debug(f"Integrated {times.size} samples, energy drift {trajectory.energy_drift():.3e}")
    return trajectory


# ---------------------------------------------------------------------------
# Poincare sections
# ---------------------------------------------------------------------------

def _stack(states: Sequence[ClassicalState]) -> Components:
    array = np.array([x.as_array() for x in states], dtype=float)
    return tuple(array[:, k].copy() for k in range(4))


def _select(x: Components, mask) -> Components:
    return tuple(c[mask] for c in x)


def _crossing_mask(before, after, direction: str):
    rising = (before < 0) & (after >= 0)
    falling = (before > 0) & (after <= 0)
    if direction == "positive":
        return rising
    if direction == "negative":
        return falling
    return rising | falling


def _refine_crossings(x: Components, h: float, params: ModelParams) -> Tuple[Components, np.ndarray]:
    # bisection on the step fraction; each trial re-integrates one RK4 step from x
    start_sign = np.sign(x[3])
    lo = np.zeros_like(x[3])
    hi = np.full_like(x[3], h)
    trial, mid = x, lo
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        trial = _rk4(x, mid, params)
        same_side = np.sign(trial[3]) == start_sign
        lo = np.where(same_side, mid, lo)
        hi = np.where(same_side, hi, mid)
        if np.all(np.abs(trial[3]) < 0.1 * SECTION_TOLERANCE):
            break
    return trial, mid


def poincare_sections(initials: Sequence[ClassicalState], params: ModelParams, n_crossings: int,
                      direction: str = "positive", step: float = DEFAULT_SECTION_STEP,
                      max_time: Optional[float] = None) -> List[PoincareSection]:
    """
    Sections p2 = 0 for a batch of initial conditions integrated in lockstep.

    A trajectory that reaches the sphere boundary stops there; its section keeps
    the crossings found so far and is flagged `aborted`.
    """
    if n_crossings < 1:
        raise StateError(f"n_crossings must be >= 1, got {n_crossings}")
    if direction not in DIRECTIONS:
        raise StateError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    for x0 in initials:
        check_sphere(x0, params, strict=True)
    if max_time is None:
        max_time = 20 * math.pi * n_crossings

    count = len(initials)
    x = _stack(initials)
    found: List[List[SectionPoint]] = [[] for _ in range(count)]
    alive = np.ones(count, dtype=bool)
    t = 0.0
    n_steps = int(math.ceil(max_time / step))
    for _ in range(n_steps):
        active = alive & np.array([len(points) < n_crossings for points in found])
        if not active.any():
            break
        x_next = _rk4(x, step, params)
        ok = _interior(x_next, params)
        newly_dead = active & ~ok
        if newly_dead.any():
            alive &= ~newly_dead
            x_next = tuple(np.where(ok, a, b) for a, b in zip(x_next, x))

        crossing = active & ok & _crossing_mask(x[3], x_next[3], direction)
        if crossing.any():
            at, tau = _refine_crossings(_select(x, crossing), step, params)
            for k, column in enumerate(np.flatnonzero(crossing)):
                found[column].append(SectionPoint(q1=float(at[0][k]), p1=float(at[1][k]),
                                                  crossing_time=float(t + tau[k]), q2=float(at[2][k])))
        x = x_next
        t += step

    energies = _energy(_stack(initials), params)
    sections = [PoincareSection(initial=x0, points=tuple(points[:n_crossings]), requested=n_crossings,
                                energy=float(energies[i]), aborted=not bool(alive[i]))
                for i, (x0, points) in enumerate(zip(initials, found))]
    for section in sections:
        if section.aborted:
            logger.warning(f"Boundary reached after {len(section.points)} of {n_crossings} crossings "
                           f"for {section.initial}")
        elif not section.complete:
            logger.warning(f"Found {len(section.points)} of {n_crossings} crossings for {section.initial}")
    return sections


def poincare_section(x0: ClassicalState, params: ModelParams, n_crossings: int,
                     direction: str = "positive", step: float = DEFAULT_SECTION_STEP,
                     max_time: Optional[float] = None) -> PoincareSection:
    """
    Crossings of p2 = 0 along the flow from x0, refined to |p2| < 1e-9.

    Args:
        x0: Interior initial condition
        params: Model parameters
        n_crossings: Number of crossings wanted
        direction: positive (p2' > 0), negative or both
        step: RK4 step
        max_time: Integration limit; defaults to 20 pi per requested crossing

    Returns:
        PoincareSection; `complete` is False when fewer crossings were found and
        `aborted` is True when the boundary cut the trajectory short
    """
    return poincare_sections([x0], params, n_crossings, direction, step, max_time)[0]


def occupied_cells(points: np.ndarray, bins: int = 50,
                   extent: Optional[Tuple[float, float, float, float]] = None) -> int:
    """Number of occupied cells of a bins x bins grid over (q1, p1)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if points.size == 0:
        return 0
    if extent is None:
        extent = (points[:, 0].min(), points[:, 0].max(), points[:, 1].min(), points[:, 1].max())
    q_lo, q_hi, p_lo, p_hi = extent
    histogram, _, _ = np.histogram2d(points[:, 0], points[:, 1], bins=bins,
                                     range=[[q_lo, q_hi + 1e-12], [p_lo, p_hi + 1e-12]])
    return int(np.count_nonzero(histogram))


# ---------------------------------------------------------------------------
# energy shells
# ---------------------------------------------------------------------------

def default_energy(params: ModelParams) -> float:
    """
    Default energy shell -(eps1 s1 + eps2 s2) / 2.

    Any state with a spin at the north pole has energy >= 0 there, so negative
    shells keep trajectories away from the chart boundary.
    """
    return -0.5 * (params.eps1_B0 * params.s1.s + params.eps2_B0 * params.s2.s)


def reconstruct_q2(q1: float, p1: float, energy: float, params: ModelParams, p2: float = 0.0) -> float:
    """
    Coordinate q2 that puts (q1, p1, q2, p2) on the energy shell.

    When several roots exist the largest one is returned.

    Raises:
        StateError: If the shell does not intersect this line
    """
    limit1, limit2 = _limits(params)
    if q1 * q1 + p1 * p1 >= limit1 or p2 * p2 >= limit2:
        raise StateError("Point lies outside the sphere")
    bound = math.sqrt(limit2 - p2 * p2) * (1 - 1e-12)

    def mismatch(q2: float) -> float:
        return float(_energy((q1, p1, q2, p2), params)) - energy

    samples = np.linspace(bound, -bound, 801)
    values = np.array([mismatch(q) for q in samples])
    for i in range(samples.size - 1):
        if values[i] == 0:
            return float(samples[i])
        if values[i] * values[i + 1] < 0:
            return float(brentq(mismatch, samples[i + 1], samples[i], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    raise StateError(f"Energy shell {energy:g} does not intersect q1 = {q1:g}, p1 = {p1:g}, p2 = {p2:g}")


def symmetric_periodic_point(params: ModelParams, energy: float) -> ClassicalState:
    """
    Point (q, 0, q, 0) on the exchange-symmetric manifold q1 = q2, p1 = p2.

    For equal spins and Zeeman factors that manifold is invariant and one
    dimensional, so every orbit on it is periodic.

    Raises:
        StateError: If the spins differ or the shell misses the manifold
    """
    if params.s1 != params.s2 or params.eps1_B0 != params.eps2_B0:
        raise StateError("The exchange-symmetric manifold needs equal spins and Zeeman factors")
    limit = 4 * params.s1.s

    def mismatch(q: float) -> float:
        return float(_energy((q, 0.0, q, 0.0), params)) - energy

    upper = math.sqrt(limit) * (1 - 1e-9)
    if mismatch(0.0) * mismatch(upper) > 0:
        raise StateError(f"Energy shell {energy:g} does not meet the symmetric manifold")
    q = brentq(mismatch, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return ClassicalState(q, 0.0, q, 0.0)


def shell_grid(params: ModelParams, energy: float, grid_n: int = 7, fill: float = 0.9) -> List[ClassicalState]:
    """
    Initial conditions with p2 = 0 on one energy shell, from a grid over (q1, p1).

    Grid nodes with A1 > fill * 4 s1, nodes the shell does not reach and nodes
    whose reconstructed point is not strictly interior are skipped.
    """
    limit1, _ = _limits(params)
    radius = math.sqrt(fill * limit1)
    axis = np.linspace(-radius, radius, grid_n)
    states = []
    for q1 in axis:
        for p1 in axis:
            if q1 * q1 + p1 * p1 > fill * limit1:
                continue
            try:
                q2 = reconstruct_q2(float(q1), float(p1), energy, params)
                state = ClassicalState(float(q1), float(p1), q2, 0.0)
                check_sphere(state, params, strict=True)
            except StateError:
                continue
            states.append(state)
    return states


def section_scan(params: ModelParams, energy: Optional[float] = None, grid_n: int = 7,
                 n_crossings: int = 200, direction: str = "positive", step: float = DEFAULT_SECTION_STEP) -> List[PoincareSection]:
    """Poincare portrait of one energy shell: sections of every shell_grid point."""
    energy = default_energy(params) if energy is None else energy
    initials = shell_grid(params, energy, grid_n)
    logger.info(f"Scanning {len(initials)} initial conditions on the shell H = {energy:g}")
    sections = poincare_sections(initials, params, n_crossings, direction, step)
    aborted = sum(section.aborted for section in sections)
    if aborted:
        logger.warning(f"{aborted} scan trajectories reached the sphere boundary")
    return sections


# ---------------------------------------------------------------------------
# Lyapunov exponents and classification
# ---------------------------------------------------------------------------

def lyapunov_exponents(initials: Sequence[ClassicalState], params: ModelParams, horizon: float = 2000.0,
                       renorm_interval: float = 1.0, step: float = DEFAULT_LYAPUNOV_STEP,
                       offset: float = LYAPUNOV_OFFSET) -> np.ndarray:
    """
    Largest Lyapunov exponents of a batch by two-trajectory renormalization.

    Each reference trajectory gets a companion displaced by `offset` along
    (1, 1, 1, 1)/2; every `renorm_interval` the separation d is measured, log(d/offset)
    accumulated and the companion pulled back to distance `offset`.

    Returns:
        Exponents; NaN for trajectories that reached the sphere boundary
    """
    if horizon <= 0 or renorm_interval <= 0 or step <= 0:
        raise StateError("horizon, renorm_interval and step must be positive")
    for x0 in initials:
        check_sphere(x0, params, strict=True)
    count = len(initials)
    base = _stack(initials)
    direction = offset / 2.0
    companion = tuple(c + direction for c in base)
    x = tuple(np.concatenate([b, c]) for b, c in zip(base, companion))

    n_renorm = max(1, int(round(horizon / renorm_interval)))
    n_sub = max(1, int(math.ceil(renorm_interval / step - 1e-9)))
    h = renorm_interval / n_sub
    log_sum = np.zeros(count)
    alive = np.ones(count, dtype=bool)
    for _ in range(n_renorm):
        for _ in range(n_sub):
            x_next = _rk4(x, h, params)
            ok = _interior(x_next, params)
            pair_ok = ok[:count] & ok[count:]
            alive &= pair_ok
            keep = np.concatenate([alive, alive])
            x = tuple(np.where(keep, a, b) for a, b in zip(x_next, x))
        separation = tuple(c[count:] - c[:count] for c in x)
        distance = np.sqrt(sum(d * d for d in separation))
        distance = np.where(distance > 0, distance, offset)
        log_sum += np.where(alive, np.log(distance / offset), 0.0)
        scale = offset / distance
        x = tuple(np.concatenate([c[:count], c[:count] + d * scale]) for c, d in zip(x, separation))

    exponents = log_sum / (n_renorm * renorm_interval)
    exponents[~alive] = np.nan
    return exponents


def lyapunov_exponent(x0: ClassicalState, params: ModelParams, horizon: float = 2000.0,
                      renorm_interval: float = 1.0, step: float = DEFAULT_LYAPUNOV_STEP) -> float:
    """
    Largest Lyapunov exponent of the trajectory from x0.

    Raises:
        BoundaryHitError: If either trajectory of the pair reaches the boundary
    """
    value = lyapunov_exponents([x0], params, horizon, renorm_interval, step)[0]
    if np.isnan(value):
        raise BoundaryHitError("Lyapunov pair reached the sphere boundary", last_state=x0)
    return float(value)


class Representatives(NamedTuple):
    """Periodic, regular and chaotic initial conditions of one energy shell."""
    periodic: ClassicalState
    regular: ClassicalState
    chaotic: ClassicalState
    energy: float
    candidates: Tuple[ClassicalState, ...]
    exponents: np.ndarray

    def by_label(self, label: str) -> ClassicalState:
        if label not in ("periodic", "regular", "chaotic"):
            raise StateError(f"Unknown representative {label!r}")
        return getattr(self, label)

    @property
    def regular_exponent(self) -> float:
        return float(self.exponents[self.candidates.index(self.regular)])

    @property
    def chaotic_exponent(self) -> float:
        return float(self.exponents[self.candidates.index(self.chaotic)])


def classify_representatives(params: ModelParams, energy: Optional[float] = None, grid_n: int = 7,
                             horizon: float = 500.0, renorm_interval: float = 1.0,
                             step: float = DEFAULT_LYAPUNOV_STEP) -> Representatives:
    """
    Pick periodic, regular and chaotic representatives on one energy shell.

    The periodic one lies on the exchange-symmetric manifold; among the
    shell_grid candidates off that manifold the smallest Lyapunov estimate is
    the regular representative and the largest the chaotic one. Deterministic
    for fixed arguments.

    Raises:
        StateError: If fewer than two usable candidates exist
    """
    energy = default_energy(params) if energy is None else energy
    periodic = symmetric_periodic_point(params, energy)
    candidates = [x for x in shell_grid(params, energy, grid_n)
                  if abs(x.q1 - x.q2) > 1e-6 or abs(x.p1 - x.p2) > 1e-6]
    if len(candidates) < 2:
        raise StateError(f"Energy shell {energy:g} yields too few candidates for classification")
    exponents = lyapunov_exponents(candidates, params, horizon, renorm_interval, step)
    usable = np.flatnonzero(~np.isnan(exponents))
    if usable.size < 2:
        raise StateError("Too many candidate trajectories reached the sphere boundary")
    regular = candidates[usable[np.argmin(exponents[usable])]]
    chaotic = candidates[usable[np.argmax(exponents[usable])]]
    logger.info(f"Classified {len(candidates)} candidates at H = {energy:g}: "
                f"lambda in [{np.nanmin(exponents):.4f}, {np.nanmax(exponents):.4f}]")
    return Representatives(periodic, regular, chaotic, energy, tuple(candidates), exponents)


class CouplingSweep(NamedTuple):
    """Result of the coupling sweep: chosen alpha and one row per candidate."""
    alpha: float
    table: Tuple[Tuple[float, float, float, int, int], ...]


def default_coupling_candidates(s1: SpinMagnitude, s2: SpinMagnitude) -> Tuple[float, ...]:
    """(0.5, 1, 2, 5) / sqrt(s1 s2)."""
    scale = math.sqrt(s1.s * s2.s)
    return tuple(value / scale for value in (0.5, 1.0, 2.0, 5.0))


def sweep_coupling(s1: SpinMagnitude, s2: SpinMagnitude, candidates: Optional[Iterable[float]] = None,
                   energy: Optional[float] = None, grid_n: int = 7, horizon: float = 500.0,
                   n_crossings: int = 300, ratio: float = 10.0, cell_ratio: float = 5.0) -> CouplingSweep:
    """
    Smallest coupling whose shell shows coexisting regular and chaotic motion.

    A candidate qualifies when the chaotic representative's Lyapunov estimate is
    at least `ratio` times the regular one's and its section occupies at least
    `cell_ratio` times as many cells of a 50 x 50 grid. Falls back to the last
    candidate when none qualifies.

    Returns:
        CouplingSweep with rows (alpha, lambda_regular, lambda_chaotic, cells_regular, cells_chaotic)
    """
    values = sorted(candidates) if candidates is not None else list(default_coupling_candidates(s1, s2))
    rows = []
    chosen = None
    for alpha in values:
        params = ModelParams(s1=s1, s2=s2, alpha=alpha)
        try:
            reps = classify_representatives(params, energy, grid_n, horizon)
        except StateError as e:
            logger.warning(f"alpha = {alpha:.6g} skipped: {e}")
            continue
        lam_regular, lam_chaotic = reps.regular_exponent, reps.chaotic_exponent
        sections = poincare_sections([reps.regular, reps.chaotic], params, n_crossings)
        limit = math.sqrt(4 * s1.s)
        extent = (-limit, limit, -limit, limit)
        cells_regular = occupied_cells(sections[0].coordinates(), extent=extent)
        cells_chaotic = occupied_cells(sections[1].coordinates(), extent=extent)
        rows.append((alpha, lam_regular, lam_chaotic, cells_regular, cells_chaotic))
        logger.info(f"alpha = {alpha:.6g}: lambda {lam_regular:.4g} / {lam_chaotic:.4g}, "
                    f"cells {cells_regular} / {cells_chaotic}")
        if (chosen is None and lam_chaotic >= ratio * max(lam_regular, 1e-4)
                and cells_chaotic >= cell_ratio * max(cells_regular, 1)):
            chosen = alpha
            break
    if chosen is None:
        if not rows:
            raise StateError("No coupling candidate could be classified")
        chosen = rows[-1][0]
        logger.warning(f"No candidate met the mixed-phase-space criterion; using alpha = {chosen:.6g}")
    return CouplingSweep(alpha=chosen, table=tuple(rows))
