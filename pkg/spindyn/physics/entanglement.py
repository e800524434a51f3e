"""
Entropy measures on reduced density matrices, the two-qubit concurrence, and
recoherence detection on entropy time series.

Both entropies are normalized to [0, 1]: the linear entropy by d/(d-1) and the
von-Neumann entropy by taking the logarithm in base d.
"""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..core.models import DensityOperator, EntropySeries, Ket, RecoherenceEvent, SpinMagnitude
from ..utils.error_handler import NumericalError, StateError

logger = logging.getLogger(__name__)

RANGE_TOLERANCE = 1e-9
EIGENVALUE_CLAMP = 1e-10
# entropies below this are indistinguishable from zero at double precision
ENTROPY_FLOOR = 1e-12

_SIGMA_Y = np.array([[0, -1j], [1j, 0]])
_SIGMA_YY = np.kron(_SIGMA_Y, _SIGMA_Y)


def _as_matrices(rho: Union[DensityOperator, np.ndarray]) -> np.ndarray:
    matrices = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if matrices.ndim == 2:
        matrices = matrices[None]
    if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2]:
        raise StateError(f"Expected square density matrices, got shape {matrices.shape}")
    if matrices.shape[1] < 2:
        raise StateError("Entropy normalization is undefined for dimension d = 1")
    return matrices


def _finish(values: np.ndarray, name: str) -> np.ndarray:
    if values.size and (values.min() < -RANGE_TOLERANCE or values.max() > 1 + RANGE_TOLERANCE):
        raise NumericalError(f"{name} left [0, 1] by more than {RANGE_TOLERANCE}: "
                             f"range [{values.min():.3e}, {values.max():.3e}]")
    values = np.clip(values, 0.0, 1.0)
    values[values < ENTROPY_FLOOR] = 0.0
    return values


def linear_entropy_values(reduced: np.ndarray) -> np.ndarray:
    """Vectorized linear entropy d/(d-1) (1 - Tr rho^2) over a stack of matrices."""
    matrices = _as_matrices(reduced)
    d = matrices.shape[1]
    purities = np.sum(np.abs(matrices) ** 2, axis=(1, 2))
    return _finish(d / (d - 1) * (1.0 - purities), "Linear entropy")


def von_neumann_values(reduced: np.ndarray) -> np.ndarray:
    """Vectorized von-Neumann entropy -sum lambda log_d lambda over a stack of matrices."""
    matrices = _as_matrices(reduced)
    d = matrices.shape[1]
    hermitian = (matrices + matrices.conj().transpose(0, 2, 1)) / 2
    eigenvalues = np.linalg.eigvalsh(hermitian)
    smallest = eigenvalues.min()
    if smallest < -EIGENVALUE_CLAMP:
        raise StateError(f"Reduced density matrix has eigenvalue {smallest:.3e} below -{EIGENVALUE_CLAMP}")
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(eigenvalues > 0, eigenvalues * np.log(eigenvalues), 0.0)
    return _finish(-terms.sum(axis=1) / np.log(d), "Von-Neumann entropy")


def linear_entropy(rho2: DensityOperator) -> float:
    """
    Linear entropy (idempotency defect) delta = d/(d-1) (1 - Tr rho2^2).

    Args:
        rho2: Reduced density operator of dimension d >= 2

    Returns:
        delta in [0, 1]: 0 for pure reduced states, 1 for I/d

    Raises:
        StateError: If d = 1
        NumericalError: If the raw value leaves [0, 1] by more than 1e-9
    """
    return float(linear_entropy_values(rho2)[0])


def von_neumann_entropy(rho2: DensityOperator) -> float:
    """
    Von-Neumann entropy delta_N = -sum_i lambda_i log_d lambda_i, with 0 log 0 = 0.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything more negative is
    an invalid input.
    """
    return float(von_neumann_values(rho2)[0])


def _sqrt_psd(matrix: np.ndarray) -> np.ndarray:
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return (eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ eigenvectors.conj().T


def concurrence(rho: Union[DensityOperator, Ket]) -> float:
    """
    Two-qubit concurrence C = max(0, l1 - l2 - l3 - l4).

    The l_i are the decreasing square roots of the eigenvalues of
    rho (sy x sy) rho* (sy x sy), computed from the Hermitian form
    sqrt(rho) rho~ sqrt(rho). A Ket uses the pure-state form |<psi| sy x sy |psi*>|,
    which avoids square roots of rounding-level eigenvalues.

    Raises:
        StateError: If the state is not 4-dimensional
    """
    if isinstance(rho, Ket):
        if rho.dim != 4:
            raise StateError(f"Concurrence needs a two-qubit state, got dimension {rho.dim}")
        amplitudes = rho.amplitudes
        return float(min(1.0, abs(amplitudes @ _SIGMA_YY @ amplitudes)))
    if rho.dim != 4:
        raise StateError(f"Concurrence needs a two-qubit state, got dimension {rho.dim}")
    matrix = rho.matrix
    flipped = _SIGMA_YY @ matrix.conj() @ _SIGMA_YY
    root = _sqrt_psd(matrix)
    product = root @ flipped @ root
    product = (product + product.conj().T) / 2
    singular = np.sqrt(np.clip(np.linalg.eigvalsh(product), 0.0, None))[::-1]
    return float(max(0.0, singular[0] - singular[1:].sum()))


def binary_entropy(p: float) -> float:
    """-p log2 p - (1-p) log2 (1-p) with 0 log 0 = 0."""
    total = 0.0
    for x in (p, 1.0 - p):
        if x > 0:
            total -= x * np.log2(x)
    return float(total)


def entanglement_of_formation(c: float) -> float:
    """Entanglement of formation from the concurrence: h((1 + sqrt(1 - C^2)) / 2)."""
    c = float(np.clip(c, 0.0, 1.0))
    return binary_entropy((1.0 + np.sqrt(1.0 - c * c)) / 2.0)


def sigma_values(populations: np.ndarray, s: SpinMagnitude) -> np.ndarray:
    """Normalized angular momentum (<Sz> + s) / (2s) from a stack of populations."""
    if s.twice_s == 0:
        return np.zeros(populations.shape[0])
    mean_sz = np.asarray(populations) @ s.m_values()
    return np.clip((mean_sz + s.s) / (2 * s.s), 0.0, 1.0)


def reduced_series(amplitudes: np.ndarray, d1: int, d2: int, keep: int = 2) -> np.ndarray:
    """
    Reduced density matrices of a stack of pure product-basis states.

    Args:
        amplitudes: Array of shape (T, d1 d2)
        d1: Dimension of spin 1
        d2: Dimension of spin 2
        keep: Subsystem to keep (1 or 2)

    Returns:
        Array of shape (T, dk, dk)
    """
    if keep not in (1, 2):
        raise StateError(f"keep must be 1 or 2, got {keep!r}")
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.ndim != 2 or amplitudes.shape[1] != d1 * d2:
        raise StateError(f"Expected amplitudes of shape (T, {d1 * d2}), got {amplitudes.shape}")
    psi = amplitudes.reshape(amplitudes.shape[0], d1, d2)
    if keep == 2:
        return np.matmul(psi.transpose(0, 2, 1), psi.conj())
    return np.matmul(psi, psi.conj().transpose(0, 2, 1))


def entropy_series(times: Sequence[float], reduced: np.ndarray, populations_1: np.ndarray,
                   populations_2: np.ndarray, s1: SpinMagnitude, s2: SpinMagnitude) -> EntropySeries:
    """
    Assemble an EntropySeries from reduced matrices and populations.

    Args:
        times: Grid times
        reduced: Stack of reduced density matrices (T, d, d)
        populations_1: Populations of spin 1 (T, d1)
        populations_2: Populations of spin 2 (T, d2)
        s1: Magnitude of spin 1
        s2: Magnitude of spin 2
    """
    return EntropySeries(
        times=np.asarray(times, dtype=float),
        delta=linear_entropy_values(reduced),
        delta_N=von_neumann_values(reduced),
        sigma1=sigma_values(populations_1, s1),
        sigma2=sigma_values(populations_2, s2),
    )


def extremum_indices(values: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Interior local maxima and minima.

    A plateau of equal values counts once, at its last index.

    Returns:
        (maxima indices, minima indices)
    """
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return np.array([], dtype=int), np.array([], dtype=int)
    slope = np.sign(np.diff(values))
    # carry the last non-zero slope over flat stretches
    for i in range(1, slope.size):
        if slope[i] == 0:
            slope[i] = slope[i - 1]
    turns = np.diff(slope)
    maxima = np.flatnonzero(turns < 0) + 1
    minima = np.flatnonzero(turns > 0) + 1
    return maxima, minima


def detect_recoherences(series: EntropySeries, plateau_quantile: float = 0.9,
                        min_depth: float = 0.2) -> List[RecoherenceEvent]:
    """
    Find transient drops of the linear entropy below its plateau.

    The plateau is the `plateau_quantile` quantile of delta and the depth
    threshold is (1 - min_depth) * plateau. Only minima after delta first reaches
    the threshold count: the initial rise is not a recoherence, and neither a dip
    nor its half-depth width reaches back into it. A local minimum is an event
    when plateau - minimum >= min_depth * plateau; minima sharing one dip (a
    contiguous stretch below the threshold) are merged into the deepest.

    Args:
        series: Entropy series, at least 10 points
        plateau_quantile: Quantile defining the plateau level
        min_depth: Minimum depth relative to the plateau level

    Returns:
        Events in time order; empty when there are none

    Raises:
        StateError: If the series has fewer than 10 points
    """
    if len(series) < 10:
        raise StateError(f"Recoherence detection needs at least 10 points, got {len(series)}")
    delta = series.delta
    times = series.times
    plateau = float(np.quantile(delta, plateau_quantile))
    if plateau <= 0:
        return []
    threshold = plateau - min_depth * plateau
    onset = int(np.argmax(delta >= threshold))

    _, minima = extremum_indices(delta)
    candidates = [i for i in minima
                  if i > onset and plateau - delta[i] >= min_depth * plateau and plateau - delta[i] > 0]

    events: List[RecoherenceEvent] = []
    seen_dips = set()
    for i in candidates:
        left, right = i, i
        while left - 1 > onset and delta[left - 1] < threshold:
            left -= 1
        while right < delta.size - 1 and delta[right + 1] < threshold:
            right += 1
        dip = (left, right)
        if dip in seen_dips:
            continue
        seen_dips.add(dip)
        deepest = left + int(np.argmin(delta[left:right + 1]))
        depth = plateau - float(delta[deepest])

        half_level = plateau - depth / 2
        lo, hi = deepest, deepest
        while lo - 1 > onset and delta[lo - 1] < half_level:
            lo -= 1
        while hi < delta.size - 1 and delta[hi + 1] < half_level:
            hi += 1
        width = float(times[hi] - times[lo]) if hi > lo else float(times[1] - times[0])
        events.append(RecoherenceEvent(t_min=float(times[deepest]), depth=depth, width=width, index=deepest))

    events.sort(key=lambda event: event.t_min)
    logger.debug(f"Found {len(events)} recoherence events (plateau {plateau:.4f})")
    return events
