"""Test cases for walker sampling and the forward/backward steppers."""

import numpy as np
import pytest

from diffusion_ensemble import (
    Ensemble,
    NoiseSpec,
    backward_step,
    equilibrium_test,
    euler_maruyama_step,
    propagate_ensemble,
    sample_initial,
)
from errors import ConfigurationError
from lattice import Grid
from madelung import decompose
from propagator.states import free_gaussian_fields, free_gaussian_width, gaussian_packet, harmonic_eigenstate


@pytest.fixture
def ground_density(trap_grid):
    return harmonic_eigenstate(trap_grid.axis(0), 0) ** 2


@pytest.fixture
def ground_drift(trap_grid, harmonic_hamiltonian):
    psi = harmonic_eigenstate(trap_grid.axis(0), 0).astype(complex)
    return decompose(psi, harmonic_hamiltonian).b


class TestSampleInitial:
    """Test inverse-CDF sampling of gridded densities."""

    def test_delta_density(self, trap_grid):
        rho = np.zeros(trap_grid.shape)
        rho[70] = 1.0
        ens = sample_initial(rho, 500, seed=3, grid=trap_grid)
        assert np.all(np.abs(ens.positions[:, 0] - trap_grid.axis(0)[70]) <= 0.5 * trap_grid.spacing[0])

    def test_gaussian_moments(self, line_grid):
        rho = gaussian_packet(line_grid, sigma=1.0).density()
        M = 100_000
        ens = sample_initial(rho, M, seed=11)
        assert abs(ens.positions.mean()) < 4.0 / np.sqrt(M)
        assert ens.positions.var() == pytest.approx(1.0, rel=0.05)

    def test_same_seed_same_positions(self, line_grid):
        rho = gaussian_packet(line_grid, sigma=1.0).density()
        np.testing.assert_array_equal(sample_initial(rho, 1000, seed=5).positions, sample_initial(rho, 1000, seed=5).positions)
        assert not np.array_equal(sample_initial(rho, 1000, seed=5).positions, sample_initial(rho, 1000, seed=6).positions)

    def test_conditional_axes(self, plane_grid):
        x, y = plane_grid.mesh()
        rho = np.exp(-(x**2 + y**2 - 1.2 * x * y))
        ens = sample_initial(rho, 50_000, seed=2, grid=plane_grid)
        correlation = np.corrcoef(ens.positions.T)[0, 1]
        assert correlation == pytest.approx(0.6, abs=0.03)

    def test_rejects_empty_density(self, trap_grid):
        with pytest.raises(ConfigurationError):
            sample_initial(np.zeros(trap_grid.shape), 10, seed=1, grid=trap_grid)


class TestEulerMaruyama:
    """Test forward increments, reflection and clamping."""

    def test_increment_variance(self):
        grid = Grid.uniform(1, 64, (-50.0, 50.0), periodic=True)
        ens = Ensemble(np.zeros((1_000_000, 1)), 0.0, seed=1)
        moved = euler_maruyama_step(ens, np.zeros((1,) + grid.shape), grid, 0.01, NoiseSpec([0.25]))
        increments = moved.positions[:, 0]
        assert increments.var() == pytest.approx(0.5 * 0.01, rel=0.01)
        assert abs(increments.mean()) < 4.0 * np.sqrt(0.005 / 1_000_000)

    def test_zero_dt_is_identity(self, trap_grid, ground_drift):
        ens = Ensemble(np.linspace(-1.0, 1.0, 20)[:, None], 0.0, seed=1)
        assert euler_maruyama_step(ens, ground_drift, trap_grid, 0.0, NoiseSpec([0.5])) is ens

    def test_partitioning_does_not_change_results(self, trap_grid, ground_drift, ground_density):
        ens = sample_initial(ground_density, 5000, seed=9, grid=trap_grid)
        noise = NoiseSpec([0.5])
        serial = euler_maruyama_step(ens, ground_drift, trap_grid, 0.01, noise, threads=1)
        parallel = euler_maruyama_step(ens, ground_drift, trap_grid, 0.01, noise, threads=4)
        np.testing.assert_array_equal(serial.positions, parallel.positions)
        assert serial.step == 1 and serial.t == pytest.approx(0.01)

    def test_reflection_is_counted(self):
        grid = Grid.uniform(1, 32, (0.0, 1.0), periodic=False)
        ens = Ensemble(np.full((100, 1), grid.axis(0)[-1]), 0.0, seed=4)
        push = np.full((1,) + grid.shape, 5.0)
        moved = euler_maruyama_step(ens, push, grid, 0.01, NoiseSpec([0.0]))
        assert moved.reflected == 100
        assert np.all(moved.positions <= grid.axis(0)[-1])

    def test_clamp_is_counted(self, trap_grid):
        ens = Ensemble(np.zeros((10, 1)), 0.0, seed=4)
        fast = np.full((1,) + trap_grid.shape, 1e6)
        moved = euler_maruyama_step(ens, fast, trap_grid, 1e-6, NoiseSpec([0.0]), clamp=100.0)
        assert moved.clamped == 10
        np.testing.assert_allclose(moved.positions, 1e-4)

    def test_negative_dt(self, trap_grid, ground_drift):
        with pytest.raises(ConfigurationError):
            euler_maruyama_step(Ensemble(np.zeros((1, 1)), 0.0, seed=1), ground_drift, trap_grid, -0.1, NoiseSpec([0.5]))

    @pytest.mark.slow
    def test_ground_state_equilibrium(self, trap_grid, ground_drift, ground_density):
        ens = sample_initial(ground_density, 50_000, seed=2024, grid=trap_grid)
        bundle = propagate_ensemble(ens, ground_drift, trap_grid, 1e-3, 5000, NoiseSpec([0.5]), stride=5000)
        final = bundle.frames[-1][:, 0]
        assert final.var() == pytest.approx(0.5, rel=0.02)
        report = equilibrium_test(Ensemble(bundle.frames[-1], bundle.times[-1], 2024), ground_density, trap_grid)
        assert report.l1 < 0.02
        assert report.p_value > 0.01
        assert bundle.reflected == 0


class TestBackwardStep:
    """Test the time-reversed diffusion."""

    def test_backward_drift_identity(self, trap_grid, harmonic_hamiltonian):
        psi = gaussian_packet(trap_grid, center=0.5, sigma=0.8, wavenumber=0.7)
        fields = decompose(psi, harmonic_hamiltonian)
        np.testing.assert_allclose(fields.b_star, fields.b - 2.0 * fields.u, rtol=0, atol=1e-12)

    def test_free_gaussian_variance_schedule(self, line_grid):
        final = gaussian_packet(line_grid, sigma=free_gaussian_width(1.0)).density()
        ens = sample_initial(final, 20_000, seed=17, t=1.0)

        def b_star(points, t):
            _, v, u = free_gaussian_fields(points[:, 0], t)
            return (v - u)[:, None]

        bundle = propagate_ensemble(ens, b_star, line_grid, 1e-3, 1000, NoiseSpec([0.5]), direction="backward", stride=1000)
        assert bundle.times[-1] == pytest.approx(0.0, abs=1e-9)
        assert bundle.frames[-1][:, 0].var() == pytest.approx(1.0, rel=0.03)

    def test_backward_moves_time_down(self, trap_grid, ground_drift):
        ens = Ensemble(np.zeros((4, 1)), 1.0, seed=1)
        stepped = backward_step(ens, -ground_drift, trap_grid, 0.1, NoiseSpec([0.5]))
        assert stepped.t == pytest.approx(0.9)
