"""Test cases for scheduled evolution."""

import numpy as np
import pytest

from errors import ConfigurationError
from propagator import EvolutionSchedule, evolve
from propagator.states import gaussian_packet


class TestEvolutionSchedule:
    """Test schedule validation."""

    def test_rejects_non_positive_dt(self):
        with pytest.raises(ConfigurationError):
            EvolutionSchedule(dt=0.0, steps=10)

    def test_rejects_zero_stride(self):
        with pytest.raises(ConfigurationError):
            EvolutionSchedule(dt=0.1, steps=10, stride=0)


class TestEvolve:
    """Test snapshot recording and conservation logs."""

    def test_zero_steps_echoes_initial_state(self, line_grid, free_hamiltonian):
        psi = gaussian_packet(line_grid, sigma=1.0)
        result = evolve(psi, free_hamiltonian, EvolutionSchedule(dt=0.01, steps=0))
        assert result.times == [0.0]
        np.testing.assert_array_equal(result.final.values, psi.values)
        assert list(result.log.columns) == ["t", "norm", "energy"]

    def test_stride_and_final_snapshot(self, line_grid, free_hamiltonian):
        psi = gaussian_packet(line_grid, sigma=1.0)
        result = evolve(psi, free_hamiltonian, EvolutionSchedule(dt=0.01, steps=10, stride=4))
        assert result.times == pytest.approx([0.0, 0.04, 0.08, 0.10])
        assert result.series().shape == (4,) + line_grid.shape

    def test_norm_log(self, trap_grid, harmonic_hamiltonian):
        psi = gaussian_packet(trap_grid, center=1.0, sigma=0.7)
        result = evolve(psi, harmonic_hamiltonian, EvolutionSchedule(dt=0.01, steps=1000, stride=100))
        assert np.max(np.abs(result.log["norm"] - 1.0)) < 1e-10

    @pytest.mark.slow
    def test_energy_conserved(self, trap_grid, harmonic_hamiltonian):
        psi = gaussian_packet(trap_grid, center=1.5, sigma=1.0 / np.sqrt(2.0))
        result = evolve(psi, harmonic_hamiltonian, EvolutionSchedule(dt=1e-4, steps=10_000, stride=1000))
        assert result.max_energy_drift() < 1e-8

    def test_classical_energy_conserved(self, trap_grid, harmonic_hamiltonian):
        psi = gaussian_packet(trap_grid, center=1.0, sigma=0.9, wavenumber=0.4)
        schedule = EvolutionSchedule(dt=1e-3, steps=1000, stride=100, mode="classical")
        result = evolve(psi, harmonic_hamiltonian, schedule)
        assert result.max_energy_drift() < 1e-6

    def test_crank_nicolson_method(self, trap_grid, harmonic_hamiltonian):
        psi = gaussian_packet(trap_grid, center=1.0, sigma=0.7)
        schedule = EvolutionSchedule(dt=0.01, steps=20, stride=10, method="crank_nicolson")
        result = evolve(psi, harmonic_hamiltonian, schedule)
        assert np.max(np.abs(result.log["norm"] - 1.0)) < 1e-8

    def test_unknown_method(self, line_grid, free_hamiltonian):
        with pytest.raises(ConfigurationError):
            evolve(gaussian_packet(line_grid), free_hamiltonian, EvolutionSchedule(dt=0.1, steps=1, method="leapfrog"))
