"""Test cases for vortex circulation under the hydrodynamic flow."""

import numpy as np
import pytest

from circulation import circle_loop
from hjm_flow import circulation_drift_experiment, measure_circulation, trapped_vortex
from lattice import Grid
from madelung import decompose
from propagator.states import vortex_state


@pytest.fixture
def fine_plane():
    return Grid.uniform(2, 256, (-8.0, 8.0), periodic=True)


class TestTrappedVortex:
    """Test the initial vortex against the oscillator eigenstates."""

    def test_unit_vortex_matches_the_eigenstate(self, plane_grid, plane_trap):
        state, H = trapped_vortex(plane_grid, 1.0)
        fields = decompose(vortex_state(plane_grid, 1), plane_trap)
        x, y = plane_grid.mesh()
        ring = (np.hypot(x, y) > 0.5) & (np.hypot(x, y) < 3.0)
        # the on-axis node carries a little mass, so compare shapes on the ring
        np.testing.assert_allclose(state.rho[ring] / state.rho[ring].sum(), fields.rho[ring] / fields.rho[ring].sum(), rtol=1e-8)
        np.testing.assert_allclose(state.v[:, ring], fields.v[:, ring], atol=1e-8)

    def test_fractional_circulation(self, plane_grid):
        state, H = trapped_vortex(plane_grid, 0.37)
        quanta, flagged = measure_circulation(state, H, circle_loop((0.0, 0.0), 1.0))
        assert quanta == pytest.approx(0.37, rel=5e-3)
        assert not flagged

    def test_core_is_frozen(self, plane_grid):
        state, _ = trapped_vortex(plane_grid, 2.0, core_radius=0.5)
        x, y = plane_grid.mesh()
        assert np.array_equal(state.frozen, np.hypot(x, y) < 0.5)


class TestCirculationDrift:
    """Test conservation of the canonical circulation along the flow."""

    def test_no_vortex_stays_at_zero(self, plane_grid):
        drift = circulation_drift_experiment(plane_grid, 0.0, 1.0, 5e-3, stride=50)
        assert drift.max_drift < 1e-6
        assert np.isnan(drift.relative_drift)
        frame = drift.as_frame()
        assert list(frame.columns) == ["t", "loop", "value_h", "flagged"]
        assert frame["t"].iloc[-1] == pytest.approx(1.0)

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [0.37, 2.0])
    def test_circulation_is_conserved(self, fine_plane, alpha):
        drift = circulation_drift_experiment(fine_plane, alpha, 1.0, 2e-3, stride=50)
        assert drift.quanta[0] == pytest.approx(alpha, rel=5e-3)
        assert not drift.flagged.any()
        assert drift.relative_drift < 1e-2
        np.testing.assert_allclose(drift.run.log["mass"], 1.0, atol=1e-8)
        assert drift.run.log["mass_defect"].iloc[-1] <= 1e-8 * 1.0
