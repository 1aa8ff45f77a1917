"""Test cases for the Madelung decomposition."""

import numpy as np
import pytest

from lattice import Grid
from madelung import canonical_momentum, decompose, probability_current, quantum_kinetic
from propagator import Hamiltonian, Particle
from propagator.states import free_gaussian, free_gaussian_fields, gaussian_packet, harmonic_eigenstate


@pytest.fixture
def ring():
    return Grid.uniform(1, 64, (-np.pi, np.pi), periodic=True)


class TestDecompose:
    """Test velocities, osmotic potential and floors."""

    def test_plane_wave(self, ring):
        x = ring.axis(0)
        psi = np.exp(3j * x) / np.sqrt(2.0 * np.pi)
        fields = decompose(psi, Hamiltonian(ring, (Particle(),)))
        np.testing.assert_allclose(fields.v[0], 3.0, atol=1e-12)
        np.testing.assert_allclose(fields.u[0], 0.0, atol=1e-12)
        assert fields.floored_count == 0

    def test_plane_wave_heavy_particle(self, ring):
        x = ring.axis(0)
        psi = np.exp(2j * x) / np.sqrt(2.0 * np.pi)
        fields = decompose(psi, Hamiltonian(ring, (Particle(mass=4.0),), hbar=2.0))
        np.testing.assert_allclose(fields.v[0], 1.0, atol=1e-12)
        np.testing.assert_allclose(fields.canonical_momentum[0], 4.0, atol=1e-12)

    def test_uniform_vector_potential_shifts_velocity(self, ring):
        x = ring.axis(0)
        psi = np.exp(3j * x) / np.sqrt(2.0 * np.pi)
        H = Hamiltonian(ring, (Particle(charge=1.0),), c=10.0, vector_potential=np.array([5.0]))
        fields = decompose(psi, H)
        np.testing.assert_allclose(fields.v[0], 2.5, atol=1e-12)
        np.testing.assert_allclose(fields.canonical_momentum[0], 3.0, atol=1e-12)

    def test_spreading_gaussian(self, line_grid, free_hamiltonian):
        x = line_grid.axis(0)
        t = 0.7
        fields = decompose(free_gaussian(x, t, sigma=1.0, wavenumber=0.5), free_hamiltonian, t)
        rho, v, u = free_gaussian_fields(x, t, sigma=1.0, wavenumber=0.5)
        inside = np.abs(x) < 5.0
        np.testing.assert_allclose(fields.rho, rho, atol=1e-12)
        np.testing.assert_allclose(fields.v[0][inside], v[inside], atol=1e-8)
        np.testing.assert_allclose(fields.u[0][inside], u[inside], atol=1e-8)
        np.testing.assert_allclose(fields.b[0][inside], (v + u)[inside], atol=1e-8)
        np.testing.assert_allclose(fields.b_star[0][inside], (v - u)[inside], atol=1e-8)

    def test_osmotic_potential_is_half_log_density(self, line_grid, free_hamiltonian):
        psi = gaussian_packet(line_grid, sigma=1.0)
        fields = decompose(psi, free_hamiltonian)
        inside = ~fields.floored
        np.testing.assert_allclose(fields.R[inside], 0.5 * np.log(fields.rho[inside]), rtol=1e-12)

    def test_floored_cells(self, trap_grid, harmonic_hamiltonian):
        psi = gaussian_packet(trap_grid, sigma=0.5)
        fields = decompose(psi, harmonic_hamiltonian)
        floor = 1e-12 * fields.rho.max()
        assert fields.floored[0] and fields.floored[-1]
        assert not fields.floored[trap_grid.points[0] // 2]
        np.testing.assert_allclose(fields.R[fields.floored], 0.5 * np.log(floor))
        assert np.all(fields.quantum_kinetic[0][fields.floored] == 0.0)

    def test_fields_are_read_only(self, line_grid, free_hamiltonian):
        fields = decompose(gaussian_packet(line_grid), free_hamiltonian)
        with pytest.raises(ValueError):
            fields.v[0, 0] = 1.0

    def test_current_and_canonical_momentum(self, ring):
        x = ring.axis(0)
        psi = np.exp(3j * x) / np.sqrt(2.0 * np.pi)
        H = Hamiltonian(ring, (Particle(),))
        np.testing.assert_allclose(probability_current(psi, H).values[0], 3.0 / (2.0 * np.pi), atol=1e-12)
        np.testing.assert_allclose(canonical_momentum(psi, H).values[0], 3.0, atol=1e-12)


class TestQuantumKinetic:
    """Test the quantum kinetic term against closed forms."""

    def test_gaussian_center(self, line_grid, free_hamiltonian):
        sigma = 1.3
        rho = gaussian_packet(line_grid, sigma=sigma).density()
        qk = quantum_kinetic(rho, free_hamiltonian)
        center = int(np.argmin(np.abs(line_grid.axis(0))))
        assert qk[0, center] == pytest.approx(1.0 / (4.0 * sigma**2), abs=1e-10)

    def test_balances_oscillator_potential(self, trap_grid, harmonic_hamiltonian):
        x = trap_grid.axis(0)
        rho = harmonic_eigenstate(x, 0) ** 2
        qk = quantum_kinetic(rho, harmonic_hamiltonian)
        inside = np.abs(x) < 4.0
        total = qk[0] + harmonic_hamiltonian.potential()
        np.testing.assert_allclose(total[inside], 0.5, atol=1e-8)

    def test_per_particle_blocks(self, pair_grid):
        H = Hamiltonian(pair_grid, (Particle(mass=1.0, axes=(0,)), Particle(mass=2.0, axes=(1,))))
        rho = gaussian_packet(pair_grid, sigma=1.0).density()
        qk = quantum_kinetic(rho, H)
        assert qk.shape == (2,) + pair_grid.shape
        center = tuple(int(np.argmin(np.abs(a))) for a in pair_grid.axes)
        assert qk[0][center] == pytest.approx(0.25, abs=1e-10)
        assert qk[1][center] == pytest.approx(0.125, abs=1e-10)
