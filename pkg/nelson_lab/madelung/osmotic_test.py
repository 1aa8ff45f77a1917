"""Test cases for osmotic potential accumulation."""

import numpy as np
import pytest

from errors import ConfigurationError, OutOfDomainError
from lattice import ComplexField, Grid
from madelung import MadelungSeries, osmotic_potential_accumulate, reported_osmotic_source
from propagator import Hamiltonian, Particle
from propagator.states import free_gaussian, gaussian_packet


@pytest.fixture
def wide_line():
    return Grid.uniform(1, 1024, (-16.0, 16.0), periodic=True)


def spreading_series(grid, H, times):
    snapshots = [ComplexField(grid, free_gaussian(grid.axis(0), t, sigma=1.0)) for t in times]
    return MadelungSeries.from_snapshots(snapshots, times, H, scheme="central")


class TestOsmoticAccumulation:
    """Test R accumulated along characteristics against half the log density."""

    def test_tracks_half_log_density(self, wide_line):
        times = list(np.linspace(0.0, 0.5, 11))
        series = spreading_series(wide_line, Hamiltonian(wide_line, (Particle(),)), times)
        R = osmotic_potential_accumulate(series)
        x = wide_line.axis(0)
        inside = np.abs(x) < 4.0
        deviation = R[-1][inside] - series.fields[-1].R[inside]
        deviation -= deviation.mean()
        assert np.max(np.abs(deviation)) < 1e-3

    def test_canonical_split_matches_with_uniform_vector_potential(self, wide_line):
        H = Hamiltonian(wide_line, (Particle(charge=1.0),), c=10.0, vector_potential=np.array([3.0]))
        series = spreading_series(wide_line, H, [0.0, 0.1, 0.2])
        kinetic = osmotic_potential_accumulate(series)
        canonical = osmotic_potential_accumulate(series, canonical=True)
        np.testing.assert_allclose(canonical, kinetic, rtol=0, atol=1e-12)

    def test_characteristics_leaving_the_grid(self):
        grid = Grid.uniform(1, 128, (-4.0, 4.0), periodic=False)
        H = Hamiltonian(grid, (Particle(),))
        psi = gaussian_packet(grid, sigma=1.0, wavenumber=20.0)
        series = MadelungSeries.from_snapshots([psi, psi], [0.0, 0.5], H)
        with pytest.raises(OutOfDomainError):
            osmotic_potential_accumulate(series)

    def test_needs_two_snapshots(self, wide_line):
        series = spreading_series(wide_line, Hamiltonian(wide_line, (Particle(),)), [0.0])
        with pytest.raises(ConfigurationError):
            osmotic_potential_accumulate(series)


class TestReportedSource:
    """Test the R / mu report."""

    def test_divides_by_the_coupling(self):
        np.testing.assert_allclose(reported_osmotic_source(np.array([1.0, -2.0]), mu=0.5), [2.0, -4.0])

    def test_rejects_non_positive_coupling(self):
        with pytest.raises(ConfigurationError, match="diffusion coupling"):
            reported_osmotic_source(np.zeros(3), mu=0.0)
