"""
Hamiltonian construction, spectral decomposition and exact unitary propagation.

The Hamiltonian is time independent and dense, so it is diagonalized once and
every time point costs O(n^2): psi(t) = V exp(-i E t) V^dagger psi0. Series over
a whole grid are evaluated in blocks of time points, one matrix product per block.
"""

import logging
import math
import time
from typing import NamedTuple, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..core.models import DensityOperator, EigenSystem, Ket, ModelParams, QuantumState
from ..utils.error_handler import NumericalError, StateError
from .entanglement import reduced_series
from .spin_core import MAX_PRODUCT_DIM, partial_trace, spin_operators

logger = logging.getLogger(__name__)

HERMITIAN_INPUT_TOLERANCE = 1e-10
RECONSTRUCTION_TOLERANCE = 1e-9
DEFAULT_CHUNK_SIZE = 256


class TwoQubitSpectrum(NamedTuple):
    """
    Closed-form two-qubit eigensystem.

    eigenvectors[i] is normalized and written in the st basis {|11>, |10>, |01>, |00>}.
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class ReducedEvolution(NamedTuple):
    """Reduced density matrices and subsystem populations along a time grid."""
    reduced: np.ndarray
    populations_1: np.ndarray
    populations_2: np.ndarray


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """
    H = eps1_B0 (S1z x I) + eps2_B0 (I x S2z) + alpha (S1x x S2x).

    Args:
        params: Model parameters

    Returns:
        Dense complex Hermitian matrix of size d1 d2

    Raises:
        StateError: If d1 d2 exceeds the overflow guard
    """
    d1, d2 = params.dims
    if d1 * d2 > MAX_PRODUCT_DIM:
        raise StateError(f"Hamiltonian dimension {d1} x {d2} exceeds {MAX_PRODUCT_DIM}")
    ops1 = spin_operators(params.s1)
    ops2 = spin_operators(params.s2)
    hamiltonian = (params.eps1_B0 * np.kron(ops1.sz, np.eye(d2))
                   + params.eps2_B0 * np.kron(np.eye(d1), ops2.sz)
                   + params.alpha * np.kron(ops1.sx, ops2.sx))
    return hamiltonian


def spectral_decompose(hamiltonian: np.ndarray, verify: bool = True) -> EigenSystem:
    """
    Diagonalize a Hermitian matrix.

    Args:
        hamiltonian: Complex Hermitian matrix
        verify: Check the reconstruction residual against 1e-9 max|H|

    Returns:
        EigenSystem with ascending eigenvalues

    Raises:
        StateError: If the input is not Hermitian within 1e-10
        NumericalError: If the eigensolver fails or the residual check fails
    """
    hamiltonian = np.asarray(hamiltonian, dtype=complex)
    if hamiltonian.ndim != 2 or hamiltonian.shape[0] != hamiltonian.shape[1]:
        raise StateError(f"Hamiltonian must be square, got shape {hamiltonian.shape}")
    scale = max(1.0, float(np.max(np.abs(hamiltonian))))
    if np.max(np.abs(hamiltonian - hamiltonian.conj().T)) > HERMITIAN_INPUT_TOLERANCE * scale:
        raise StateError("Hamiltonian is not Hermitian")

    started = time.perf_counter()
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(hamiltonian)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Eigensolver failed: {e}") from e
    logger.info(f"Diagonalized {hamiltonian.shape[0]}x{hamiltonian.shape[0]} Hamiltonian "
                f"in {time.perf_counter() - started:.2f} s")

    eig = EigenSystem(eigenvalues, eigenvectors)
    if verify:
        residual = reconstruction_residual(eig, hamiltonian)
        if residual > RECONSTRUCTION_TOLERANCE * float(np.max(np.abs(hamiltonian)) or 1.0):
            raise NumericalError(f"Eigen-reconstruction residual {residual:.3e} too large")
    return eig


def reconstruction_residual(eig: EigenSystem, hamiltonian: np.ndarray) -> float:
    """max |V diag(E) V^dagger - H|."""
    v = eig.eigenvectors
    rebuilt = (v * eig.eigenvalues) @ v.conj().T
    return float(np.max(np.abs(rebuilt - hamiltonian)))


def _check_dim(eig: EigenSystem, dim: int) -> None:
    if dim != eig.dim:
        raise StateError(f"State dimension {dim} does not match Hamiltonian dimension {eig.dim}")


def _phases(eig: EigenSystem, times: np.ndarray) -> np.ndarray:
    return np.exp(-1j * np.outer(times, eig.eigenvalues))


def propagate_pure(eig: EigenSystem, psi0: Ket, t: float) -> Ket:
    """
    psi(t) = V exp(-i E t) V^dagger psi0; t = 0 returns psi0 unchanged.

    Raises:
        StateError: On dimension mismatch
    """
    _check_dim(eig, psi0.dim)
    if t == 0:
        return psi0
    v = eig.eigenvectors
    coefficients = v.conj().T @ psi0.amplitudes
    amplitudes = v @ (np.exp(-1j * eig.eigenvalues * t) * coefficients)
    # renormalize away round-off so the Ket invariant holds on long runs
    amplitudes /= np.linalg.norm(amplitudes)
    return Ket(amplitudes, psi0.dims)


def propagate_series(eig: EigenSystem, psi0: Ket, times: Sequence[float],
                     chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    """
    Amplitudes of psi(t) for every t, shape (len(times), n).

    Rows at t = 0 hold psi0 exactly.
    """
    _check_dim(eig, psi0.dim)
    times = np.asarray(times, dtype=float)
    v = eig.eigenvectors
    coefficients = v.conj().T @ psi0.amplitudes
    out = np.empty((times.size, eig.dim), dtype=complex)
    for start in range(0, times.size, chunk_size):
        block = times[start:start + chunk_size]
        out[start:start + block.size] = (_phases(eig, block) * coefficients) @ v.T
    out[times == 0] = psi0.amplitudes
    return out


def _reduce_mixture(weighted: np.ndarray, d1: int, d2: int, keep: int) -> np.ndarray:
    # weighted rows are sqrt(w_j) psi_j; the sum over members folds into one product
    members = weighted.shape[0]
    if keep == 2:
        flat = weighted.reshape(members * d1, d2)
        return flat.T @ flat.conj()
    flat = weighted.reshape(members, d1, d2).transpose(1, 0, 2).reshape(d1, members * d2)
    return flat @ flat.conj().T


def propagate_reduced(eig: EigenSystem, psi0: Ket, times: Sequence[float], d1: int, d2: int,
                      keep: int = 2, chunk_size: int = DEFAULT_CHUNK_SIZE) -> ReducedEvolution:
    """
    Reduced density matrices and populations of a pure evolution.

    Works block by block, so the full amplitude history is never held in memory.

    Returns:
        ReducedEvolution with reduced (T, dk, dk), populations_1 (T, d1), populations_2 (T, d2)
    """
    _check_dim(eig, psi0.dim)
    if d1 * d2 != eig.dim:
        raise StateError(f"{d1} x {d2} does not match Hamiltonian dimension {eig.dim}")
    times = np.asarray(times, dtype=float)
    dk = d2 if keep == 2 else d1
    reduced = np.empty((times.size, dk, dk), dtype=complex)
    pops1 = np.empty((times.size, d1))
    pops2 = np.empty((times.size, d2))
    for start in range(0, times.size, chunk_size):
        block = times[start:start + chunk_size]
        psi = propagate_series(eig, psi0, block, chunk_size=block.size)
        stop = start + block.size
        reduced[start:stop] = reduced_series(psi, d1, d2, keep)
        probabilities = (np.abs(psi) ** 2).reshape(block.size, d1, d2)
        pops1[start:stop] = probabilities.sum(axis=2)
        pops2[start:stop] = probabilities.sum(axis=1)
    return ReducedEvolution(reduced, pops1, pops2)


def propagate_mixed(eig: EigenSystem, rho0: DensityOperator, t: float) -> DensityOperator:
    """
    rho(t) = U rho0 U^dagger with U = V exp(-i E t) V^dagger.

    Full O(n^3) conjugation; used directly for small systems and as the
    reference for the ensemble path.
    """
    _check_dim(eig, rho0.dim)
    if t == 0:
        return rho0
    v = eig.eigenvectors
    propagator = (v * np.exp(-1j * eig.eigenvalues * t)) @ v.conj().T
    matrix = propagator @ rho0.matrix @ propagator.conj().T
    matrix = (matrix + matrix.conj().T) / 2
    return DensityOperator(matrix, rho0.dims, validate=False)


def propagate_ensemble(eig: EigenSystem, members: np.ndarray, weights: Sequence[float],
                       times: Sequence[float], d1: int, d2: int, keep: int = 2) -> ReducedEvolution:
    """
    Evolve a weighted ensemble of pure states and mix their reduced matrices.

    rho_k(t) = sum_j w_j Tr_other |psi_j(t)><psi_j(t)|, at O(K n^2) per time point.

    Args:
        eig: Spectral decomposition of H
        members: Array of shape (K, n) with normalized member amplitudes
        weights: K non-negative weights summing to 1
        times: Time grid
        d1: Dimension of spin 1
        d2: Dimension of spin 2
        keep: Subsystem whose reduced matrix is returned

    Returns:
        ReducedEvolution of the mixture
    """
    members = np.asarray(members, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    if members.ndim != 2 or members.shape[0] != weights.size:
        raise StateError("members must have shape (K, n) matching the weights")
    _check_dim(eig, members.shape[1])
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise StateError("Ensemble weights must be non-negative and sum to 1")

    active = weights > 0
    members, weights = members[active], weights[active]
    times = np.asarray(times, dtype=float)
    v = eig.eigenvectors
    coefficients = v.conj().T @ members.T
    dk = d2 if keep == 2 else d1
    reduced = np.empty((times.size, dk, dk), dtype=complex)
    pops1 = np.empty((times.size, d1))
    pops2 = np.empty((times.size, d2))
    sqrt_w = np.sqrt(weights)
    logger.info(f"Propagating ensemble of {weights.size} members over {times.size} time points")

    for i, t in enumerate(times):
        if t == 0:
            psi = members.T
        else:
            psi = v @ (np.exp(-1j * eig.eigenvalues * t)[:, None] * coefficients)
        weighted = (psi * sqrt_w).T
        reduced[i] = _reduce_mixture(weighted, d1, d2, keep)
        probabilities = (np.abs(weighted) ** 2).reshape(weights.size, d1, d2).sum(axis=0)
        pops1[i] = probabilities.sum(axis=1)
        pops2[i] = probabilities.sum(axis=0)
    return ReducedEvolution(reduced, pops1, pops2)


def two_qubit_analytic(alpha: float) -> TwoQubitSpectrum:
    """
    Closed-form eigensystem of the s1 = s2 = 1/2 Hamiltonian.

    Eigenvalues (alpha/4, -alpha/4, beta, -beta) with beta = sqrt(alpha^2 + 16) / 4.
    The third and fourth eigenvectors are written as (4(1+beta), 0, 0, alpha) and
    (alpha, 0, 0, -4(1+beta)), proportional to the 4(1 +- beta)/alpha form and
    regular at alpha = 0, where they reduce to |11> and |00>.

    Args:
        alpha: Coupling constant

    Returns:
        TwoQubitSpectrum in the st basis {|11>, |10>, |01>, |00>}
    """
    alpha = float(alpha)
    beta = math.sqrt(alpha ** 2 + 16) / 4
    eigenvalues = np.array([alpha / 4, -alpha / 4, beta, -beta])
    vectors = np.array([
        [0.0, 1.0, 1.0, 0.0],
        [0.0, -1.0, 1.0, 0.0],
        [4 * (1 + beta), 0.0, 0.0, alpha],
        [alpha, 0.0, 0.0, -4 * (1 + beta)],
    ], dtype=complex)
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return TwoQubitSpectrum(eigenvalues, vectors)


def st_to_index_basis(vector: np.ndarray) -> np.ndarray:
    """Reorder a vector from {|11>, |10>, |01>, |00>} to product index order |00>, |01>, |10>, |11>."""
    return np.asarray(vector)[..., ::-1]


def taylor_propagator(hamiltonian: np.ndarray, t: float, order: int = 30) -> np.ndarray:
    """
    exp(-i H t) by truncated Taylor series with scaling and squaring.

    Independent of the eigensolver; serves as the reference propagator.
    """
    hamiltonian = np.asarray(hamiltonian, dtype=complex)
    generator = -1j * t * hamiltonian
    norm = float(np.linalg.norm(generator, ord=1))
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    scaled = generator / (2 ** squarings)
    result = np.eye(hamiltonian.shape[0], dtype=complex)
    term = np.eye(hamiltonian.shape[0], dtype=complex)
    for k in range(1, order + 1):
        term = term @ scaled / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def energy_uncertainty(hamiltonian: np.ndarray, state: QuantumState) -> float:
    """Delta H = sqrt(<H^2> - <H>^2) of a ket or density operator."""
    hamiltonian = np.asarray(hamiltonian)
    if hamiltonian.shape[0] != state.dim:
        raise StateError(f"Hamiltonian dimension {hamiltonian.shape[0]} does not match state dimension {state.dim}")
    if isinstance(state, Ket):
        h_psi = hamiltonian @ state.amplitudes
        mean = np.vdot(state.amplitudes, h_psi).real
        mean_sq = np.vdot(h_psi, h_psi).real
    else:
        h_rho = hamiltonian @ state.matrix
        mean = np.trace(h_rho).real
        mean_sq = np.einsum("ij,ji->", hamiltonian, h_rho).real
    return float(math.sqrt(max(mean_sq - mean ** 2, 0.0)))


def spectral_frequencies(eig: EigenSystem, decimals: int = 12) -> np.ndarray:
    """Distinct non-negative differences E_i - E_j of the spectrum, ascending."""
    differences = np.abs(np.subtract.outer(eig.eigenvalues, eig.eigenvalues)).ravel()
    return np.unique(np.round(differences, decimals))


def mixed_member_states(populations: np.ndarray, partner: np.ndarray,
                        cutoff: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ensemble members |m1> x |partner> and weights for a diagonal spin-1 mixture.

    Args:
        populations: Diagonal of rho_1, length d1
        partner: Amplitudes of spin 2, length d2
        cutoff: Members with weight <= cutoff are dropped (0 keeps every non-zero weight)

    Returns:
        (members of shape (K, d1 d2), weights of length K summing to 1)
    """
    populations = np.asarray(populations, dtype=float)
    partner = np.asarray(partner, dtype=complex)
    keep = np.flatnonzero(populations > cutoff)
    d1, d2 = populations.size, partner.size
    members = np.zeros((keep.size, d1 * d2), dtype=complex)
    for row, m_index in enumerate(keep):
        members[row, m_index * d2:(m_index + 1) * d2] = partner
    weights = populations[keep] / populations[keep].sum()
    return members, weights


def propagate_mixed_reduced(eig: EigenSystem, rho0: DensityOperator, times: Sequence[float],
                            d1: int, d2: int, keep: int = 2) -> ReducedEvolution:
    """
    Reduced matrices and populations from full conjugation at every time.

    O(n^3) per time point; the reference for propagate_ensemble and the path
    behind mixed_method = full.
    """
    times = np.asarray(times, dtype=float)
    dk = d2 if keep == 2 else d1
    reduced = np.empty((times.size, dk, dk), dtype=complex)
    pops1 = np.empty((times.size, d1))
    pops2 = np.empty((times.size, d2))
    for i, t in enumerate(times):
        rho_t = propagate_mixed(eig, rho0, t)
        product = DensityOperator(rho_t.matrix, (d1, d2), validate=False)
        reduced[i] = partial_trace(product, d1, d2, keep).matrix
        probabilities = np.clip(np.diag(rho_t.matrix).real, 0.0, None).reshape(d1, d2)
        pops1[i] = probabilities.sum(axis=1)
        pops2[i] = probabilities.sum(axis=0)
    return ReducedEvolution(reduced, pops1, pops2)

