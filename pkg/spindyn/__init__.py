"""
spindyn: Entanglement Dynamics of Two Interacting Spins.

This package simulates two spins s1 and s2 in a constant magnetic field coupled
through alpha S1x S2x. It propagates product coherent states (and thermal
mixtures) by exact diagonalization, measures the entanglement of the pair with
the linear and von Neumann entropies, and follows the classical limit of the
same Hamiltonian with Poincare sections and Lyapunov exponents.

Package Structure:
- core/: data models and interfaces
- physics/: spin algebra, propagation, entanglement measures, classical limit
- services/: regime drivers, presets and the batch controller
- utils/: configuration, validation, errors, CSV output, monitoring
- cli/: command-line front end and gnuplot scripts

Usage:
    from spindyn import run_cli
    exit_code = run_cli(["two-qubits", "--preset", "case_a", "--out", "run1"])

License: MIT
Version: 1.0.0
"""

from .utils.version_info import VERSION

__version__ = VERSION


def run_cli(argv=None) -> int:
    """Run the command line; see spindyn.cli.app.run_cli."""
    from .cli.app import run_cli as _run_cli
    return _run_cli(argv)


__all__ = ["__version__", "run_cli"]
