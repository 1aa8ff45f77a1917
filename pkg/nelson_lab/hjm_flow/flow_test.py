"""Test cases for the hydrodynamic state and its integrator."""

import numpy as np
import pytest

from errors import CFLViolation, ConfigurationError, ResolutionError
from hjm_flow import (
    HydroState,
    compare_to_schrodinger,
    courant_number,
    curl_ratio,
    flow_energy,
    from_wavefunction,
    integrate_hydrodynamic,
    run_hydrodynamic,
    vortex_initializer,
)
from propagator import Hamiltonian, Particle
from propagator.states import coherent_state, free_gaussian_width, gaussian_packet, harmonic_eigenstate


def _variance(state: HydroState) -> float:
    x = state.grid.axis(0)
    weights = state.rho * state.grid.cell_volume
    mean = np.sum(weights * x)
    return float(np.sum(weights * (x - mean) ** 2))


class TestHydroState:
    """Test construction of hydrodynamic states."""

    def test_from_wavefunction_recovers_velocity(self, line_grid, free_hamiltonian):
        psi = gaussian_packet(line_grid, center=1.0, sigma=1.0, wavenumber=0.7)
        state = from_wavefunction(psi, free_hamiltonian)
        assert state.mass() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(state.v[0], 0.7, atol=1e-12)
        np.testing.assert_allclose(state.rho, psi.density().values, atol=1e-12)

    def test_rejects_mismatched_velocity(self, line_grid):
        with pytest.raises(ConfigurationError):
            HydroState(line_grid, np.zeros(line_grid.shape), np.zeros((2,) + line_grid.shape))

    def test_vortex_needs_a_plane(self, line_grid):
        with pytest.raises(ConfigurationError):
            vortex_initializer(line_grid, 1.0, 1.0)

    def test_vortex_core_must_be_resolved(self, plane_grid):
        with pytest.raises(ResolutionError):
            vortex_initializer(plane_grid, 0.37, 1.5 * plane_grid.spacing[0])

    def test_zero_strength_has_no_flow(self, plane_grid):
        state = vortex_initializer(plane_grid, 0.0, 0.0)
        assert np.all(state.v == 0.0)
        assert state.frozen is None


class TestIntegrateHydrodynamic:
    """Test single steps and short runs of the flow."""

    def test_stationary_ground_state(self, trap_grid, harmonic_hamiltonian):
        state = from_wavefunction(harmonic_eigenstate(trap_grid.axis(0), 0).astype(complex), harmonic_hamiltonian)
        run = run_hydrodynamic(state, harmonic_hamiltonian, 0.01, 100, stride=100)
        assert run.final.t == pytest.approx(1.0)
        assert np.max(np.abs(run.final.rho - state.rho)) < 1e-6
        assert np.max(np.abs(run.final.v)) < 1e-6

    def test_quantum_spreading_width(self, line_grid, free_hamiltonian):
        state = from_wavefunction(gaussian_packet(line_grid, sigma=1.0), free_hamiltonian)
        run = run_hydrodynamic(state, free_hamiltonian, 1e-3, 1000, stride=1000)
        assert np.sqrt(_variance(run.final)) == pytest.approx(free_gaussian_width(1.0), abs=1e-3)
        assert list(run.log.columns) == ["t", "mass", "mass_defect", "energy", "curl_ratio"]
        assert run.log["mass_defect"].iloc[-1] <= 1e-8 * 1.0

    def test_frozen_band_leaks_mass_into_the_log(self, line_grid, free_hamiltonian):
        x = line_grid.axis(0)
        log_rho = -0.5 * x**2 - 0.5 * np.log(2.0 * np.pi)
        frozen = (x >= 0.5) & (x <= 1.5)
        state = HydroState(line_grid, log_rho, np.ones((1,) + line_grid.shape), 0.0, frozen)
        # d_t ln rho = x for this flow, and the band keeps its share of that inflow
        expected = -1e-3 * np.sum(np.exp(log_rho[frozen]) * x[frozen]) * line_grid.cell_volume
        stepped = integrate_hydrodynamic(state, free_hamiltonian, 1e-3)
        assert stepped.mass_defect == pytest.approx(expected, rel=0.05)
        assert stepped.mass() == pytest.approx(1.0, abs=1e-12)

        run = run_hydrodynamic(state, free_hamiltonian, 1e-3, 10, stride=5)
        np.testing.assert_allclose(run.log["mass"], 1.0, atol=1e-12)
        assert run.log["mass_defect"].iloc[0] == 0.0
        assert run.log["mass_defect"].iloc[-1] == pytest.approx(10 * abs(expected), rel=0.1)

    def test_classical_translation_is_rigid(self, line_grid, free_hamiltonian):
        state = from_wavefunction(gaussian_packet(line_grid, sigma=1.0, wavenumber=0.5), free_hamiltonian)
        run = run_hydrodynamic(state, free_hamiltonian, 1e-3, 1000, quantum_kinetic=False, stride=1000)
        shifted = gaussian_packet(line_grid, center=0.5, sigma=1.0).density().values
        assert np.max(np.abs(run.final.rho - shifted)) < 1e-3
        assert np.sqrt(_variance(run.final)) == pytest.approx(1.0, abs=1e-3)

    def test_classical_energy_is_conserved(self, trap_grid, harmonic_hamiltonian):
        state = from_wavefunction(coherent_state(trap_grid.axis(0), 0.0, 1.0), harmonic_hamiltonian)
        run = run_hydrodynamic(state, harmonic_hamiltonian, 1e-3, 500, quantum_kinetic=False, stride=50)
        energies = run.log["energy"].to_numpy()
        assert np.max(np.abs(energies - energies[0])) / abs(energies[0]) < 1e-4

    def test_courant_violation_suggests_a_step(self, line_grid, free_hamiltonian):
        rho = gaussian_packet(line_grid, sigma=1.0).density().values
        state = HydroState.from_density(line_grid, rho, np.full((1,) + line_grid.shape, 100.0))
        with pytest.raises(CFLViolation) as raised:
            integrate_hydrodynamic(state, free_hamiltonian, 1e-3)
        assert courant_number(state, free_hamiltonian, raised.value.suggested_dt) < 0.5

    def test_irrotational_flow_has_no_curl(self, plane_grid, plane_trap):
        x, y = plane_grid.mesh()
        state = HydroState(plane_grid, -(x**2 + y**2), np.stack([0.3 * x, 0.3 * y]))
        assert curl_ratio(state, plane_trap) < 1e-12
        stepped = integrate_hydrodynamic(state, plane_trap, 1e-3)
        assert stepped.curl_ratio < 1e-12

    def test_single_axis_particles_report_no_curl(self, pair_grid):
        H = Hamiltonian(pair_grid, (Particle(axes=(0,)), Particle(axes=(1,))))
        x, y = pair_grid.mesh()
        assert curl_ratio(HydroState(pair_grid, -(x**2 + y**2), np.stack([y, -x])), H) == 0.0

    def test_classical_energy_functional(self, trap_grid, harmonic_hamiltonian):
        state = from_wavefunction(harmonic_eigenstate(trap_grid.axis(0), 0).astype(complex), harmonic_hamiltonian)
        # <x^2> = 1/2 for the ground state
        assert flow_energy(state, harmonic_hamiltonian) == pytest.approx(0.25, abs=1e-10)
        assert flow_energy(state, harmonic_hamiltonian, quantum_kinetic=True) == pytest.approx(0.5, abs=1e-10)


class TestCompareToSchrodinger:
    """Test agreement with the wavefunction propagator."""

    def test_free_gaussian(self, line_grid, free_hamiltonian):
        report = compare_to_schrodinger(gaussian_packet(line_grid, sigma=1.0), free_hamiltonian, 1e-3, 500, stride=100)
        assert list(report.columns) == ["t", "rho_l2", "rho_max", "v_l2", "v_max"]
        assert report["rho_l2"].iloc[0] < 1e-12
        assert report["t"].iloc[-1] == pytest.approx(0.5)
        assert report["rho_l2"].max() < 1e-3
        assert report["v_l2"].max() < 1e-3

    def test_classical_mode(self, line_grid, free_hamiltonian):
        psi = gaussian_packet(line_grid, sigma=1.0, wavenumber=0.5)
        report = compare_to_schrodinger(psi, free_hamiltonian, 1e-3, 500, stride=250, quantum_kinetic=False)
        assert report["rho_l2"].max() < 1e-3

    @pytest.mark.slow
    def test_coherent_state_one_period(self, trap_grid, harmonic_hamiltonian):
        psi = coherent_state(trap_grid.axis(0), 0.0, 1.0)
        steps = int(round(2.0 * np.pi / 1e-3))
        report = compare_to_schrodinger(psi, harmonic_hamiltonian, 1e-3, steps, stride=steps // 4)
        assert report["rho_l2"].max() < 1e-3
