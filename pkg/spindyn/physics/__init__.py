"""
Physics of the two-spin system.

Modules:
- spin_core: spin operators, coherent and thermal states, partial traces
- quantum_dynamics: Hamiltonian, spectral propagation, mixed-state paths
- entanglement: entropies, concurrence, recoherence detection
- classical_limit: canonical flow, Poincare sections, Lyapunov exponents
"""
