import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spindyn.core.models import Z_INF, ClassicalState, ModelParams, SpinMagnitude, TimeGrid
from spindyn.physics import classical_limit
from spindyn.physics.classical_limit import (
    canonical_to_z, check_sphere, classical_hamiltonian, classify_representatives, default_coupling_candidates,
    default_energy, hamilton_rhs, integrate_trajectory, lyapunov_exponent, lyapunov_exponents,
    occupied_cells, poincare_section, reconstruct_q2, rk4_step, shell_grid, symmetric_periodic_point,
    z_to_canonical,
)
from spindyn.physics.quantum_dynamics import build_hamiltonian, propagate_series, spectral_decompose
from spindyn.physics.spin_core import coherent_expectations, coherent_state, tensor
from spindyn.utils.error_handler import StateError

S15 = SpinMagnitude.from_value(15)


def params_at(alpha):
    return ModelParams(s1=S15, s2=S15, alpha=alpha)


class TestCoordinates:
    @settings(max_examples=100, deadline=None)
    @given(z=st.complex_numbers(max_magnitude=20.0, allow_nan=False, allow_infinity=False))
    def test_round_trip(self, z):
        q, p = z_to_canonical(z, S15)
        back = canonical_to_z(q, p, S15)
        assert abs(back - z) <= 1e-9 * max(1.0, abs(z))

    def test_south_pole_and_infinity(self):
        assert z_to_canonical(0, S15) == (0.0, 0.0)
        q, p = z_to_canonical(Z_INF, S15)
        assert q * q + p * p == pytest.approx(60.0)
        with pytest.raises(StateError):
            canonical_to_z(1.0, 1.0, SpinMagnitude.from_value("1/2"))
        with pytest.raises(StateError):
            canonical_to_z(8.0, 0.0, S15)

    def test_energy_matches_coherent_expectation(self, semiclassical_params):
        z1, z2 = 0.4 - 0.3j, -1.2 + 0.5j
        q1, p1 = z_to_canonical(z1, S15)
        q2, p2 = z_to_canonical(z2, S15)
        sx1, _, sz1 = coherent_expectations(S15, z1)
        sx2, _, sz2 = coherent_expectations(S15, z2)
        expected = sz1 + sz2 + semiclassical_params.alpha * sx1 * sx2
        energy = classical_hamiltonian(ClassicalState(q1, p1, q2, p2), semiclassical_params)
        assert energy == pytest.approx(expected, abs=1e-10)

    def test_sphere_checks(self, semiclassical_params):
        with pytest.raises(StateError):
            check_sphere(ClassicalState(8.0, 0.0, 0.0, 0.0), semiclassical_params)
        on_boundary = ClassicalState(math.sqrt(60.0), 0.0, 0.0, 0.0)
        check_sphere(on_boundary, semiclassical_params)
        with pytest.raises(StateError):
            check_sphere(on_boundary, semiclassical_params, strict=True)
        with pytest.raises(StateError):
            hamilton_rhs(on_boundary, semiclassical_params)


class TestFlow:
    def test_rhs_matches_finite_differences(self, rng):
        params = params_at(1.0)
        h = 1e-5

        def energy(v):
            return classical_hamiltonian(ClassicalState.from_array(v), params)

        for _ in range(50):
            radius = np.sqrt(rng.uniform(0.0, 0.8 * 60.0, size=2))
            angle = rng.uniform(0.0, 2 * math.pi, size=2)
            x = np.array([radius[0] * math.cos(angle[0]), radius[0] * math.sin(angle[0]),
                          radius[1] * math.cos(angle[1]), radius[1] * math.sin(angle[1])])
            gradient = np.empty(4)
            for k in range(4):
                step = np.zeros(4)
                step[k] = h
                gradient[k] = (energy(x + step) - energy(x - step)) / (2 * h)
            expected = np.array([gradient[1], -gradient[0], gradient[3], -gradient[2]])
            rhs = np.array(hamilton_rhs(ClassicalState.from_array(x), params))
            assert np.linalg.norm(rhs - expected) < 1e-6 * max(np.linalg.norm(rhs), 1.0)

    def test_rk4_global_error_is_fourth_order(self, semiclassical_params):
        x0 = ClassicalState(1.0, 0.5, -0.7, 1.2)
        grid = TimeGrid(0.0, 2.0, 2)

        def final(step):
            return integrate_trajectory(x0, semiclassical_params, grid, step=step).states[-1]

        reference = final(0.025 / 8)
        coarse = np.linalg.norm(final(0.05) - reference)
        fine = np.linalg.norm(final(0.025) - reference)
        assert 12.0 < coarse / fine < 20.0

    def test_short_time_quantum_correspondence(self, semiclassical_params):
        z1, z2 = 1.0, 1.2
        times = np.linspace(0.0, 1.0, 11)
        eig = spectral_decompose(build_hamiltonian(semiclassical_params))
        psi0 = tensor(coherent_state(S15, z1), coherent_state(S15, z2))
        amplitudes = propagate_series(eig, psi0, times)
        populations_1 = (np.abs(amplitudes) ** 2).reshape(times.size, S15.dim(), S15.dim()).sum(axis=2)
        quantum = populations_1 @ S15.m_values() / 15.0

        x0 = ClassicalState(*z_to_canonical(z1, S15), *z_to_canonical(z2, S15))
        states = integrate_trajectory(x0, semiclassical_params, TimeGrid(0.0, 1.0, 11)).states
        classical = ((states[:, 0] ** 2 + states[:, 1] ** 2) / 2 - 15.0) / 15.0
        assert np.max(np.abs(quantum - classical)) < 0.05
        assert np.ptp(classical) > 0.1

    def test_decoupled_flow_is_a_rotation(self):
        x0 = ClassicalState(1.0, 0.0, 0.5, -2.0)
        trajectory = integrate_trajectory(x0, params_at(0.0), TimeGrid(0.0, 2 * math.pi, 2))
        assert np.allclose(trajectory.states[-1], x0.as_array(), atol=1e-9)

    def test_energy_conservation(self):
        x0 = ClassicalState(1.0, 0.0, 0.5, 0.3)
        trajectory = integrate_trajectory(x0, params_at(0.02), TimeGrid(0.0, 100.0, 101), step=1e-2)
        assert trajectory.energy_drift() < 1e-6

    def test_step_reverses(self, semiclassical_params):
        x0 = ClassicalState(1.0, -0.5, 2.0, 0.1)
        forward = rk4_step(x0, 1e-3, semiclassical_params)
        back = rk4_step(forward, -1e-3, semiclassical_params)
        assert np.allclose(back.as_array(), x0.as_array(), atol=1e-12)

    def test_rejects_boundary_start(self, semiclassical_params):
        with pytest.raises(StateError):
            integrate_trajectory(ClassicalState(math.sqrt(60.0), 0.0, 0.0, 0.0), semiclassical_params,
                                 TimeGrid(0.0, 1.0, 11))

    def test_rejects_bad_step(self, semiclassical_params):
        with pytest.raises(StateError):
            integrate_trajectory(ClassicalState(1.0, 0.0, 0.0, 0.0), semiclassical_params,
                                 TimeGrid(0.0, 1.0, 11), step=0.0)


class TestShells:
    def test_default_energy(self, semiclassical_params):
        assert default_energy(semiclassical_params) == -15.0

    def test_reconstructed_point_lies_on_shell(self, semiclassical_params):
        q2 = reconstruct_q2(1.5, -2.0, -15.0, semiclassical_params)
        x = ClassicalState(1.5, -2.0, q2, 0.0)
        assert classical_hamiltonian(x, semiclassical_params) == pytest.approx(-15.0, abs=1e-9)

    def test_shell_miss(self, semiclassical_params):
        with pytest.raises(StateError):
            reconstruct_q2(0.0, 0.0, 100.0, semiclassical_params)

    def test_symmetric_point_stays_symmetric(self, semiclassical_params):
        x0 = symmetric_periodic_point(semiclassical_params, -15.0)
        assert x0.q1 == x0.q2 and x0.p1 == x0.p2 == 0.0
        assert classical_hamiltonian(x0, semiclassical_params) == pytest.approx(-15.0, abs=1e-9)
        trajectory = integrate_trajectory(x0, semiclassical_params, TimeGrid(0.0, 10.0, 11), step=1e-2)
        assert np.allclose(trajectory.states[:, 0], trajectory.states[:, 2], atol=1e-10)
        assert np.allclose(trajectory.states[:, 1], trajectory.states[:, 3], atol=1e-10)

    def test_symmetric_point_needs_equal_spins(self):
        params = ModelParams(s1=S15, s2=SpinMagnitude.from_value(10), alpha=0.1)
        with pytest.raises(StateError):
            symmetric_periodic_point(params, -10.0)

    def test_shell_grid_points(self, semiclassical_params):
        states = shell_grid(semiclassical_params, -15.0, grid_n=5)
        assert states
        for x in states:
            assert x.p2 == 0.0
            assert classical_hamiltonian(x, semiclassical_params) == pytest.approx(-15.0, abs=1e-8)


class TestPoincare:
    def test_decoupled_crossings_are_a_period_apart(self):
        section = poincare_section(ClassicalState(1.0, 0.0, 1.0, 0.0), params_at(0.0), 10)
        assert section.complete and not section.aborted
        times = np.array([p.crossing_time for p in section.points])
        assert times[0] == pytest.approx(math.pi, abs=1e-6)
        assert np.allclose(np.diff(times), 2 * math.pi, atol=1e-6)
        # at alpha = 0 spin 1 has rotated by pi at every crossing
        assert np.allclose(section.coordinates(), [[-1.0, 0.0]] * 10, atol=1e-6)

    def test_crossings_sit_on_the_surface(self, semiclassical_params):
        x0 = ClassicalState(1.0, 0.5, reconstruct_q2(1.0, 0.5, -15.0, semiclassical_params), 0.0)
        section = poincare_section(x0, semiclassical_params, 5, direction="both")
        assert len(section.points) == 5
        assert section.energy == pytest.approx(-15.0, abs=1e-9)

    def test_boundary_keeps_crossings_found_so_far(self, monkeypatch):
        interior = classical_limit._interior
        calls = []

        def interior_for_3000_steps(x, params):
            calls.append(1)
            return interior(x, params) & (len(calls) <= 3000)

        monkeypatch.setattr(classical_limit, "_interior", interior_for_3000_steps)
        section = poincare_section(ClassicalState(1.0, 0.0, 1.0, 0.0), params_at(0.0), 10)
        assert section.aborted and not section.complete
        times = [p.crossing_time for p in section.points]
        assert times == pytest.approx([math.pi, 3 * math.pi], abs=1e-6)

    def test_rejects_bad_arguments(self, semiclassical_params):
        x0 = ClassicalState(1.0, 0.0, 1.0, 0.0)
        with pytest.raises(StateError):
            poincare_section(x0, semiclassical_params, 0)
        with pytest.raises(StateError):
            poincare_section(x0, semiclassical_params, 3, direction="sideways")

    def test_occupied_cells(self):
        points = np.array([[0.0, 0.0], [0.01, 0.01], [0.9, 0.9]])
        assert occupied_cells(points, bins=2, extent=(0.0, 1.0, 0.0, 1.0)) == 2
        assert occupied_cells(np.empty((0, 2))) == 0


class TestLyapunov:
    def test_decoupled_flow_has_zero_exponent(self):
        assert abs(lyapunov_exponent(ClassicalState(1.0, 0.0, 2.0, 1.0), params_at(0.0), horizon=50.0)) < 1e-5

    def test_stable_origin(self):
        assert abs(lyapunov_exponent(ClassicalState(0.0, 0.0, 0.0, 0.0), params_at(0.02), horizon=200.0)) < 0.05

    def test_batch_matches_single(self, semiclassical_params):
        points = [ClassicalState(1.0, 0.0, 0.5, 0.0), ClassicalState(-0.5, 1.0, 0.0, 0.2)]
        batch = lyapunov_exponents(points, semiclassical_params, horizon=20.0)
        for x0, value in zip(points, batch):
            assert value == pytest.approx(lyapunov_exponent(x0, semiclassical_params, horizon=20.0), abs=1e-12)

    def test_rejects_bad_horizon(self, semiclassical_params):
        with pytest.raises(StateError):
            lyapunov_exponents([ClassicalState(0.0, 0.0, 0.0, 0.0)], semiclassical_params, horizon=0.0)

    def test_coupling_candidates(self):
        candidates = default_coupling_candidates(S15, S15)
        assert candidates[2] == pytest.approx(2.0 / 15.0)

    @pytest.mark.slow
    def test_classification(self, semiclassical_params):
        reps = classify_representatives(semiclassical_params, grid_n=5, horizon=200.0)
        assert reps.periodic.q1 == reps.periodic.q2
        assert reps.regular_exponent <= reps.chaotic_exponent
        assert reps.regular != reps.chaotic
        assert reps.energy == -15.0
