"""
Spin operators, initial states, products, partial traces and expectation values.

Basis convention: the magnetic quantum number m runs -s, -s+1, ..., +s in
ascending index order, so the qubit labels are |0> = |m=-1/2> and |1> = |m=+1/2>.
Two-spin states use the product index k = k1 * d2 + k2.
"""

import logging
from functools import lru_cache
from typing import NamedTuple, Tuple, Union

import numpy as np
from scipy.special import gammaln

from ..core.models import (
    DensityOperator, Ket, QuantumState, SpinMagnitude, ZValue, is_infinite,
)
from ..utils.error_handler import NumericalError, StateError

logger = logging.getLogger(__name__)

MAX_PRODUCT_DIM = 10 ** 6
IMAGINARY_TOLERANCE = 1e-10
HERMITIAN_OPERATOR_TOLERANCE = 1e-10


class SpinOperators(NamedTuple):
    """Cartesian spin matrices of one spin, each d x d."""
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray


@lru_cache(maxsize=32)
def _spin_operators(twice_s: int) -> SpinOperators:
    spin = SpinMagnitude(twice_s)
    s = spin.s
    m = spin.m_values()
    # <m+1|S+|m> = sqrt(s(s+1) - m(m+1)), stored one row below the diagonal
    raising = np.diag(np.sqrt(np.maximum(s * (s + 1) - m[:-1] * (m[:-1] + 1), 0.0)), k=-1).astype(complex)
    lowering = raising.conj().T
    sx = (raising + lowering) / 2
    sy = (raising - lowering) / 2j
    sz = np.diag(m).astype(complex)
    for op in (sx, sy, sz):
        op.setflags(write=False)
    return SpinOperators(sx, sy, sz)


def spin_operators(s: SpinMagnitude) -> SpinOperators:
    """
    Build Sx, Sy, Sz for spin s in the ascending-m basis.

    Args:
        s: Spin magnitude

    Returns:
        SpinOperators with read-only Hermitian matrices satisfying [Sx, Sy] = i Sz
    """
    return _spin_operators(s.twice_s)


def _log1p_abs2(z: complex) -> float:
    r = abs(z)
    if r <= 1.0:
        return float(np.log1p(r * r))
    return float(2.0 * np.log(r) + np.log1p(1.0 / (r * r)))


def coherent_state(s: SpinMagnitude, z: ZValue) -> Ket:
    """
    SU(2) coherent state |z> with amplitudes sqrt(C(2s, s+m)) z^(s+m) / (1+|z|^2)^s.

    Binomial weights are combined in log space, so s in the hundreds does not
    overflow. z = Z_INF gives |m=+s>, the limit of the expansion.

    Args:
        s: Spin magnitude
        z: Complex label or the Z_INF sentinel

    Returns:
        Normalized Ket over the single-spin basis
    """
    d = s.dim()
    amplitudes = np.zeros(d, dtype=complex)
    if is_infinite(z):
        amplitudes[-1] = 1.0
        return Ket(amplitudes, (d,))
    z = complex(z)
    if not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise StateError(f"Coherent-state label must be finite or Z_INF, got {z!r}")
    if z == 0:
        amplitudes[0] = 1.0
        return Ket(amplitudes, (d,))

    n = s.twice_s
    k = np.arange(n + 1)
    log_binomial = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    log_modulus = 0.5 * log_binomial + k * np.log(abs(z)) - (n / 2) * _log1p_abs2(z)
    amplitudes = np.exp(log_modulus) * np.exp(1j * k * np.angle(z))
    amplitudes /= np.linalg.norm(amplitudes)
    return Ket(amplitudes, (d,))


def coherent_expectations(s: SpinMagnitude, z: ZValue) -> Tuple[float, float, float]:
    """
    Closed-form (<Sx>, <Sy>, <Sz>) of a coherent state.

    Returns:
        (2s Re z, -2s Im z, s(|z|^2 - 1)) / (1 + |z|^2); <S+> is proportional to conj(z)
    """
    if is_infinite(z):
        return (0.0, 0.0, s.s)
    z = complex(z)
    norm = 1.0 + abs(z) ** 2
    return (2 * s.s * z.real / norm, -2 * s.s * z.imag / norm, s.s * (abs(z) ** 2 - 1) / norm)


def uniform_state(s: SpinMagnitude) -> Ket:
    """Equal-weight superposition of all |m>, amplitudes (2s+1)^(-1/2)."""
    d = s.dim()
    return Ket(np.full(d, 1.0 / np.sqrt(d), dtype=complex), (d,))


def thermal_density(s: SpinMagnitude, temperature: float) -> DensityOperator:
    """
    Diagonal thermal mixture with populations exp(-m/T) / N.

    Args:
        s: Spin magnitude
        temperature: T > 0 in energy units (hbar = 1)

    Returns:
        DensityOperator with unit trace

    Raises:
        StateError: If T is not a positive finite number
    """
    temperature = float(temperature)
    if not np.isfinite(temperature) or temperature <= 0:
        raise StateError(f"Temperature must be positive, got {temperature!r}")
    exponents = -s.m_values() / temperature
    weights = np.exp(exponents - exponents.max())
    populations = weights / weights.sum()
    return DensityOperator(np.diag(populations).astype(complex), (s.dim(),))


def ket_to_density(psi: Ket) -> DensityOperator:
    """Projector |psi><psi| with the same dims."""
    return DensityOperator(np.outer(psi.amplitudes, psi.amplitudes.conj()), psi.dims)


def purity(state: QuantumState) -> float:
    """Tr rho^2, identically 1 for kets."""
    if isinstance(state, Ket):
        return 1.0
    return float(np.sum(np.abs(state.matrix) ** 2))


def tensor(state_a: QuantumState, state_b: QuantumState) -> QuantumState:
    """
    Product state on the two-spin basis, index k = k1 * d2 + k2.

    A pure factor paired with a mixed one is promoted to its projector.

    Raises:
        StateError: If d1 * d2 exceeds the overflow guard
    """
    d1, d2 = state_a.dim, state_b.dim
    if d1 * d2 > MAX_PRODUCT_DIM:
        raise StateError(f"Product dimension {d1} x {d2} exceeds {MAX_PRODUCT_DIM}")
    if isinstance(state_a, Ket) and isinstance(state_b, Ket):
        return Ket(np.kron(state_a.amplitudes, state_b.amplitudes), (d1, d2))
    rho_a = ket_to_density(state_a) if isinstance(state_a, Ket) else state_a
    rho_b = ket_to_density(state_b) if isinstance(state_b, Ket) else state_b
    return DensityOperator(np.kron(rho_a.matrix, rho_b.matrix), (d1, d2), validate=False)


def _trace_out(matrix: np.ndarray, d1: int, d2: int, keep: int) -> np.ndarray:
    blocks = matrix.reshape(d1, d2, d1, d2)
    if keep == 2:
        return np.einsum("kakb->ab", blocks)
    return np.einsum("akbk->ab", blocks)


def partial_trace(rho: Union[DensityOperator, Ket], d1: int, d2: int, keep: int) -> DensityOperator:
    """
    Reduced density matrix of subsystem `keep` (1 or 2).

    For keep=2, (rho_2)_ab = sum_k rho_(k,a),(k,b). Kets are accepted and traced
    without forming the full projector.

    Raises:
        StateError: On dimension mismatch or keep not in {1, 2}
    """
    if keep not in (1, 2):
        raise StateError(f"keep must be 1 or 2, got {keep!r}")
    if rho.dim != d1 * d2:
        raise StateError(f"State dimension {rho.dim} does not equal {d1} x {d2}")
    if isinstance(rho, Ket):
        psi = rho.amplitudes.reshape(d1, d2)
        reduced = psi.T @ psi.conj() if keep == 2 else psi @ psi.conj().T
    else:
        reduced = _trace_out(rho.matrix, d1, d2, keep)
    reduced = (reduced + reduced.conj().T) / 2
    return DensityOperator(reduced, (d2 if keep == 2 else d1,))


def expectation(op: np.ndarray, state: QuantumState) -> float:
    """
    Real expectation value Tr(op rho) or <psi|op|psi>.

    Raises:
        StateError: If op is not square Hermitian or dimensions differ
        NumericalError: If the imaginary residue exceeds 1e-10 (relative to the value)
    """
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise StateError(f"Operator must be square, got shape {op.shape}")
    if op.shape[0] != state.dim:
        raise StateError(f"Operator dimension {op.shape[0]} does not match state dimension {state.dim}")
    scale = max(1.0, float(np.max(np.abs(op))))
    if np.max(np.abs(op - op.conj().T)) > HERMITIAN_OPERATOR_TOLERANCE * scale:
        raise StateError("Operator is not Hermitian")

    if isinstance(state, Ket):
        value = np.vdot(state.amplitudes, op @ state.amplitudes)
    else:
        value = np.einsum("ij,ji->", op, state.matrix)
    if abs(value.imag) > IMAGINARY_TOLERANCE * max(1.0, abs(value.real)):
        raise NumericalError(f"Expectation value has imaginary residue {value.imag!r}")
    return float(value.real)
