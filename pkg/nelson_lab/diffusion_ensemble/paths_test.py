"""Test cases for deterministic current-velocity paths."""

import numpy as np
import pytest

from diffusion_ensemble import current_trajectory, field_velocity
from errors import ConfigurationError
from lattice import Grid
from madelung import MadelungSeries, decompose
from propagator import Hamiltonian, Particle
from propagator.states import free_gaussian, free_gaussian_width, harmonic_eigenstate, vortex_state


class TestCurrentTrajectory:
    """Test RK4 integration of dq/dt = v(q, t)."""

    def test_stationary_state_does_not_move(self, trap_grid, harmonic_hamiltonian):
        fields = decompose(harmonic_eigenstate(trap_grid.axis(0), 0).astype(complex), harmonic_hamiltonian)
        path = current_trajectory(field_velocity(fields.v, trap_grid), [0.7], 0.0, 2.0, 0.05, trap_grid)
        np.testing.assert_allclose(path.positions[:, 0], 0.7, atol=1e-12)
        assert path.times[-1] == pytest.approx(2.0)

    def test_boosted_gaussian_scales_with_the_width(self, line_grid, free_hamiltonian):
        x = line_grid.axis(0)
        times = np.linspace(0.0, 1.0, 51)
        snapshots = [free_gaussian(x, t, wavenumber=0.5) for t in times]
        series = MadelungSeries.from_snapshots(snapshots, times, free_hamiltonian)
        starts = np.array([[-1.0], [0.0], [1.0]])
        path = current_trajectory(series, starts, 0.0, 1.0, 0.01)
        exact = 0.5 * 1.0 + starts[:, 0] * free_gaussian_width(1.0)
        np.testing.assert_allclose(path.final[:, 0], exact, atol=1e-3)
        assert not path.exited

    def test_vortex_orbit_keeps_its_radius(self):
        grid = Grid.uniform(2, 256, (-8.0, 8.0), periodic=True)
        H = Hamiltonian(grid, (Particle(axes=(0, 1)),))
        fields = decompose(vortex_state(grid, 1), H)
        path = current_trajectory(field_velocity(fields.v, grid), [1.0, 0.0], 0.0, 2.0 * np.pi, 0.01, grid)
        radii = np.linalg.norm(path.positions, axis=1)
        np.testing.assert_allclose(radii, 1.0, rtol=5e-3)
        # angular speed hbar / (m r^2) = 1 closes one orbit in 2 pi
        np.testing.assert_allclose(path.final, [1.0, 0.0], atol=2e-2)

    def test_path_leaving_a_wall_is_truncated(self):
        grid = Grid.uniform(1, 32, (0.0, 1.0), periodic=False)
        push = np.full((1,) + grid.shape, 10.0)
        path = current_trajectory(field_velocity(push, grid), [0.5], 0.0, 1.0, 0.01, grid)
        assert path.exited
        assert path.final[0] <= grid.axis(0)[-1]
        assert path.times[-1] < 1.0

    def test_step_must_be_positive(self, trap_grid):
        with pytest.raises(ConfigurationError):
            current_trajectory(field_velocity(np.zeros((1,) + trap_grid.shape), trap_grid), [0.0], 0.0, 1.0, 0.0)
