import numpy as np
import pytest
from scipy.linalg import expm

from spindyn.core.models import Ket, ModelParams, SpinMagnitude
from spindyn.physics.quantum_dynamics import (
    build_hamiltonian, energy_uncertainty, mixed_member_states, propagate_ensemble,
    propagate_mixed, propagate_mixed_reduced, propagate_pure, propagate_reduced, propagate_series,
    reconstruction_residual, spectral_decompose, spectral_frequencies, st_to_index_basis, taylor_propagator,
    two_qubit_analytic,
)
from spindyn.physics.spin_core import coherent_state, ket_to_density, partial_trace, tensor, thermal_density
from spindyn.utils.error_handler import StateError


def params_for(s1, s2, alpha):
    return ModelParams(s1=SpinMagnitude.from_value(s1), s2=SpinMagnitude.from_value(s2), alpha=alpha)


class TestHamiltonian:
    def test_hermitian(self):
        h = build_hamiltonian(params_for(2, "1/2", 0.7))
        assert h.shape == (10, 10)
        assert np.allclose(h, h.conj().T)

    def test_decoupled_spectrum(self):
        eig = spectral_decompose(build_hamiltonian(params_for(1, "1/2", 0.0)))
        expected = np.sort([m1 + m2 for m1 in (-1, 0, 1) for m2 in (-0.5, 0.5)])
        assert np.allclose(eig.eigenvalues, expected, atol=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 4.0, 10.0])
    def test_two_qubit_closed_form(self, alpha):
        h = build_hamiltonian(params_for("1/2", "1/2", alpha))
        eig = spectral_decompose(h)
        analytic = two_qubit_analytic(alpha)
        assert np.max(np.abs(np.sort(analytic.eigenvalues) - eig.eigenvalues)) < 1e-12
        for value, vector in zip(analytic.eigenvalues, analytic.eigenvectors):
            v = st_to_index_basis(vector)
            assert np.linalg.norm((h - value * np.eye(4)) @ v) < 1e-12

    def test_reconstruction(self):
        h = build_hamiltonian(params_for(3, 2, 1.3))
        assert reconstruction_residual(spectral_decompose(h), h) < 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(StateError):
            spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_overflow_guard(self):
        with pytest.raises(StateError):
            build_hamiltonian(params_for(1000, 1000, 1.0))


class TestPropagation:
    @pytest.mark.parametrize("spins", [("1/2", "1/2"), (1, "1/2")])
    def test_matches_independent_exponential(self, spins, rng, random_ket):
        h = build_hamiltonian(params_for(spins[0], spins[1], 1.0))
        eig = spectral_decompose(h)
        dims = (SpinMagnitude.from_value(spins[0]).dim(), SpinMagnitude.from_value(spins[1]).dim())
        worst = 0.0
        for _ in range(50):
            psi0 = Ket(random_ket(h.shape[0]), dims)
            t = float(rng.uniform(0.0, 20.0))
            reference = taylor_propagator(h, t) @ psi0.amplitudes
            worst = max(worst, np.max(np.abs(propagate_pure(eig, psi0, t).amplitudes - reference)))
        assert worst < 1e-10

    def test_taylor_matches_scipy(self):
        h = build_hamiltonian(params_for(2, 1, 0.8))
        assert np.allclose(taylor_propagator(h, 3.7), expm(-1j * 3.7 * h), atol=1e-11)

    def test_zero_time_is_identity(self, random_ket):
        eig = spectral_decompose(build_hamiltonian(params_for(1, 1, 2.0)))
        psi0 = Ket(random_ket(9), (3, 3))
        assert propagate_pure(eig, psi0, 0.0) is psi0
        series = propagate_series(eig, psi0, [0.0, 1.0])
        assert np.array_equal(series[0], psi0.amplitudes)

    def test_group_law_and_norm(self, random_ket):
        eig = spectral_decompose(build_hamiltonian(params_for(2, "1/2", 1.5)))
        psi0 = Ket(random_ket(10), (5, 2))
        two_steps = propagate_pure(eig, propagate_pure(eig, psi0, 1.25), 2.5)
        one_step = propagate_pure(eig, psi0, 3.75)
        assert np.allclose(two_steps.amplitudes, one_step.amplitudes, atol=1e-12)
        assert abs(np.linalg.norm(one_step.amplitudes) - 1.0) < 1e-12

    def test_energy_is_conserved(self, random_ket):
        h = build_hamiltonian(params_for("5/2", "3/2", 0.7))
        psi0 = Ket(random_ket(24), (6, 4))
        amplitudes = propagate_series(spectral_decompose(h), psi0, np.linspace(0.0, 200.0, 101))
        energies = np.einsum("ti,ij,tj->t", amplitudes.conj(), h, amplitudes).real
        assert np.max(np.abs(energies - energies[0])) < 1e-10

    def test_backward_evolution_returns(self, random_ket):
        eig = spectral_decompose(build_hamiltonian(params_for(1, "1/2", 0.9)))
        psi0 = Ket(random_ket(6), (3, 2))
        back = propagate_pure(eig, propagate_pure(eig, psi0, 5.0), -5.0)
        assert np.allclose(back.amplitudes, psi0.amplitudes, atol=1e-12)

    def test_series_matches_pointwise_across_chunks(self, random_ket):
        eig = spectral_decompose(build_hamiltonian(params_for(1, 1, 1.0)))
        psi0 = Ket(random_ket(9), (3, 3))
        times = np.linspace(0.0, 10.0, 37)
        series = propagate_series(eig, psi0, times, chunk_size=5)
        for i in (0, 4, 5, 36):
            assert np.allclose(series[i], propagate_pure(eig, psi0, times[i]).amplitudes, atol=1e-12)

    def test_reduced_evolution(self):
        eig = spectral_decompose(build_hamiltonian(params_for(2, "1/2", 1.0)))
        s1, s2 = SpinMagnitude.from_value(2), SpinMagnitude.from_value("1/2")
        psi0 = tensor(coherent_state(s1, 0.5), coherent_state(s2, 1))
        times = np.linspace(0.0, 5.0, 11)
        evolution = propagate_reduced(eig, psi0, times, 5, 2, chunk_size=4)
        for i, t in enumerate(times):
            psi = propagate_pure(eig, psi0, t)
            assert np.allclose(evolution.reduced[i], partial_trace(psi, 5, 2, keep=2).matrix, atol=1e-12)
        assert np.allclose(evolution.populations_1.sum(axis=1), 1.0)
        assert np.allclose(evolution.populations_2.sum(axis=1), 1.0)

    def test_dimension_mismatch(self, random_ket):
        eig = spectral_decompose(build_hamiltonian(params_for("1/2", "1/2", 1.0)))
        with pytest.raises(StateError):
            propagate_pure(eig, Ket(random_ket(6), (3, 2)), 1.0)


class TestMixedPropagation:
    def setup_method(self):
        self.s1 = SpinMagnitude.from_value(2)
        self.s2 = SpinMagnitude.from_value("1/2")
        self.eig = spectral_decompose(build_hamiltonian(ModelParams(self.s1, self.s2, 1.0)))
        self.rho1 = thermal_density(self.s1, 0.8)
        self.partner = coherent_state(self.s2, 1)

    def test_ensemble_matches_full_conjugation(self):
        members, weights = mixed_member_states(np.diag(self.rho1.matrix).real, self.partner.amplitudes)
        times = np.linspace(0.0, 8.0, 17)
        ensemble = propagate_ensemble(self.eig, members, weights, times, 5, 2)
        rho0 = tensor(self.rho1, self.partner)
        full = propagate_mixed_reduced(self.eig, rho0, times, 5, 2)
        assert np.allclose(ensemble.reduced, full.reduced, atol=1e-10)
        assert np.allclose(ensemble.populations_1, full.populations_1, atol=1e-10)

    def test_member_weights(self):
        members, weights = mixed_member_states(np.diag(self.rho1.matrix).real, self.partner.amplitudes)
        assert members.shape == (5, 10)
        assert abs(weights.sum() - 1.0) < 1e-12
        assert np.allclose(np.linalg.norm(members, axis=1), 1.0)

    def test_pure_projector_through_conjugation(self, random_ket):
        psi0 = Ket(random_ket(10), (5, 2))
        rho_t = propagate_mixed(self.eig, ket_to_density(psi0), 2.0)
        psi_t = propagate_pure(self.eig, psi0, 2.0)
        assert np.allclose(rho_t.matrix, ket_to_density(psi_t).matrix, atol=1e-12)

    def test_rejects_bad_weights(self):
        members, _ = mixed_member_states(np.diag(self.rho1.matrix).real, self.partner.amplitudes)
        with pytest.raises(StateError):
            propagate_ensemble(self.eig, members, np.full(5, 0.3), [0.0], 5, 2)


class TestDiagnostics:
    def test_energy_uncertainty_of_eigenstate(self):
        h = build_hamiltonian(params_for(1, "1/2", 0.6))
        eig = spectral_decompose(h)
        eigenstate = Ket(eig.eigenvectors[:, 2], (3, 2))
        assert energy_uncertainty(h, eigenstate) < 1e-7

    def test_energy_uncertainty_ket_and_projector_agree(self, random_ket):
        h = build_hamiltonian(params_for(1, "1/2", 0.6))
        psi = Ket(random_ket(6), (3, 2))
        assert abs(energy_uncertainty(h, psi) - energy_uncertainty(h, ket_to_density(psi))) < 1e-12

    def test_two_qubit_frequencies(self):
        eig = spectral_decompose(build_hamiltonian(params_for("1/2", "1/2", 1.0)))
        beta = np.sqrt(17.0) / 4
        frequencies = spectral_frequencies(eig)
        for expected in (0.0, 0.5, 2 * beta, beta - 0.25, beta + 0.25):
            assert np.min(np.abs(frequencies - expected)) < 1e-10
