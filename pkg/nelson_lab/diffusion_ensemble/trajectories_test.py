"""Test cases for recorded bundles and the NLT1 trajectory store."""

import numpy as np
import pytest

from diffusion_ensemble import (
    Ensemble,
    NoiseSpec,
    decode_trajectories,
    encode_trajectories,
    propagate_ensemble,
    read_trajectories,
    series_drift,
    write_trajectories,
)
from errors import ConfigurationError
from madelung import MadelungSeries
from propagator.states import coherent_orbit, coherent_state


@pytest.fixture
def small_bundle(trap_grid):
    ens = Ensemble(np.linspace(-1.0, 1.0, 12).reshape(6, 2)[:, :1], 0.0, seed=12)
    return propagate_ensemble(ens, -trap_grid.axis(0)[None, :], trap_grid, 0.01, 7, NoiseSpec([0.5]), stride=3)


class TestPropagateEnsemble:
    """Test frame recording."""

    def test_stride_and_final_frame(self, small_bundle):
        assert small_bundle.times == pytest.approx([0.0, 0.03, 0.06, 0.07])
        assert small_bundle.walkers == 6 and small_bundle.dims == 1
        assert small_bundle.positions().shape == (4, 6, 1)
        assert small_bundle.nearest_frame(0.05) == 2

    def test_rejects_unknown_direction(self, trap_grid):
        ens = Ensemble(np.zeros((2, 1)), 0.0, seed=1)
        with pytest.raises(ConfigurationError):
            propagate_ensemble(ens, np.zeros((1,) + trap_grid.shape), trap_grid, 0.01, 2, NoiseSpec([0.5]), direction="sideways")
        with pytest.raises(ConfigurationError):
            propagate_ensemble(ens, np.zeros((1,) + trap_grid.shape), trap_grid, 0.01, 2, NoiseSpec([0.5]), stride=0)


class TestTrajectoryStore:
    """Test the NLT1 binary layout."""

    def test_header_layout(self, small_bundle):
        data = encode_trajectories(small_bundle)
        assert data[:4] == b"NLT1"
        assert int(np.frombuffer(data, "<u8", 1, 4)[0]) == 6
        assert tuple(np.frombuffer(data, "<u4", 2, 12)) == (1, 3)
        assert int(np.frombuffer(data, "<u8", 1, 20)[0]) == 4
        assert len(data) == 28 + 4 * 8 * (1 + 6)

    def test_file_round_trip(self, small_bundle, tmp_path):
        path = write_trajectories(small_bundle, tmp_path / "runs" / "walkers.nlt")
        restored = read_trajectories(path)
        assert restored.stride == 3
        assert restored.times == small_bundle.times
        np.testing.assert_array_equal(restored.positions(), small_bundle.positions())

    def test_rejects_foreign_bytes(self):
        with pytest.raises(ConfigurationError):
            decode_trajectories(b"PK\x03\x04" + bytes(32))


class TestSeriesDrift:
    """Test drift callables built from Madelung snapshots."""

    @pytest.fixture
    def coherent_series(self, trap_grid, harmonic_hamiltonian):
        x = trap_grid.axis(0)
        times = [0.0, 0.5, 1.0]
        return MadelungSeries.from_snapshots([coherent_state(x, t, 1.0) for t in times], times, harmonic_hamiltonian)

    @staticmethod
    def exact(points, t):
        # coherent state: b = v + u and b* = v - u with u = -(x - X(t)), v = P(t)
        position, momentum = coherent_orbit(t, 1.0)
        return momentum - (points[:, 0] - position), momentum + (points[:, 0] - position)

    def test_reads_snapshots_at_their_times(self, coherent_series):
        forward = series_drift(coherent_series)
        backward = series_drift(coherent_series, "backward")
        points = np.array([[0.0], [0.5]])
        for t in (0.0, 0.5, 1.0):
            b, b_star = self.exact(points, t)
            np.testing.assert_allclose(forward(points, t)[:, 0], b, atol=1e-3)
            np.testing.assert_allclose(backward(points, t)[:, 0], b_star, atol=1e-3)

    def test_linear_between_snapshots(self, coherent_series):
        forward = series_drift(coherent_series)
        points = np.array([[-0.5], [0.0], [0.5]])
        midpoint = 0.5 * (forward(points, 0.5) + forward(points, 1.0))
        np.testing.assert_allclose(forward(points, 0.75), midpoint, atol=1e-12)
        quarter = 0.75 * forward(points, 0.0) + 0.25 * forward(points, 0.5)
        np.testing.assert_allclose(forward(points, 0.125), quarter, atol=1e-12)

    def test_clamps_outside_the_series(self, coherent_series):
        forward = series_drift(coherent_series)
        points = np.array([[0.25]])
        np.testing.assert_array_equal(forward(points, -1.0), forward(points, 0.0))
        np.testing.assert_array_equal(forward(points, 2.0), forward(points, 1.0))
