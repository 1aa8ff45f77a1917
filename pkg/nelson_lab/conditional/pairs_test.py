"""Test cases for two-term pair states and the reduced-mass transform."""

import numpy as np
import pytest

from conditional import (
    circulation_sectors,
    entangled_pair_state,
    exchange_asymmetry,
    reduced_mass_transform,
    relative_phase_lock,
    softened_interaction,
)
from errors import ConfigurationError, DegenerateInputError
from lattice import Grid
from propagator import imaginary_time_ground_state
from propagator.states import free_gaussian, vortex_state


@pytest.fixture
def square():
    return Grid.uniform(2, 128, (-12.0, 12.0), periodic=True)


class TestEntangledPairState:
    """Test the symmetrized pair and its closed-form density."""

    def test_zero_phase_peak(self, square):
        x = square.axis(0)
        packet = np.exp(-x**2 / 4.0)
        pair = entangled_pair_state(square, packet, packet)
        centre = (64, 64)
        assert square.axis(0)[64] == 0.0
        assert pair.rho_formula[centre] == pytest.approx(4.0 * pair.norm**2, rel=1e-12)
        assert pair.interference[centre] == pytest.approx(2.0 * pair.norm**2, rel=1e-12)

    def test_cosine_form_matches_modulus(self, square):
        x = square.axis(0)
        pair = entangled_pair_state(square, free_gaussian(x, 0.0, -1.0, 1.0, 1.5), free_gaussian(x, 0.0, 1.0, 1.0, -1.5))
        density = np.abs(pair.psi.values) ** 2
        assert np.max(np.abs(pair.rho_formula - density)) < 1e-10 * np.max(density)
        assert pair.psi.norm() == pytest.approx(1.0, rel=1e-12)

    def test_disjoint_packets_factorize(self, square):
        x = square.axis(0)
        pair = entangled_pair_state(square, free_gaussian(x, 0.0, -6.0, 0.5), free_gaussian(x, 0.0, 6.0, 0.5))
        assert np.max(np.abs(pair.interference)) < 1e-10

    def test_symmetrized_state_is_exchange_symmetric(self, square):
        x = square.axis(0)
        pair = entangled_pair_state(square, free_gaussian(x, 0.0, -2.0, 1.0, 0.5), free_gaussian(x, 0.0, 2.0, 0.7, -0.5))
        assert exchange_asymmetry(pair.psi) == 0.0

    def test_general_two_term_state(self, square):
        x = square.axis(0)
        a, b = free_gaussian(x, 0.0, -2.0), free_gaussian(x, 0.0, 2.0)
        pair = entangled_pair_state(square, a, b, symmetrize=False, psi_c=b, psi_d=free_gaussian(x, 0.0, 0.0, 1.0, 1.0))
        assert not pair.symmetric
        assert exchange_asymmetry(pair.psi) > 0.1

    def test_cancelling_terms_are_rejected(self, square):
        packet = free_gaussian(square.axis(0), 0.0)
        with pytest.raises(DegenerateInputError):
            entangled_pair_state(square, packet, packet, symmetrize=False, psi_c=-packet, psi_d=packet)

    def test_mismatched_axes_are_rejected(self):
        grid = Grid(((-4.0, 4.0), (-2.0, 2.0)), (32, 32), (True, True))
        packet = np.ones(32, dtype=complex)
        with pytest.raises(ConfigurationError):
            entangled_pair_state(grid, packet, packet)


class TestReducedMass:
    """Test the centre-of-mass and relative coordinates."""

    def test_equal_masses(self):
        assert reduced_mass_transform(1.0, 1.0).mu == 0.5

    def test_heavy_partner_limit(self):
        assert reduced_mass_transform(1.0, 1e6).mu == pytest.approx(0.999999, rel=1e-9)

    def test_coordinate_maps_invert(self):
        transform = reduced_mass_transform(1.0, 3.0)
        q1, q2 = np.array([0.3, -1.2]), np.array([2.0, 0.5])
        back = transform.from_relative(*transform.to_relative(q1, q2))
        np.testing.assert_allclose(back[0], q1, atol=1e-14)
        np.testing.assert_allclose(back[1], q2, atol=1e-14)

    def test_relative_potential(self):
        transform = reduced_mass_transform(1.0, 1.0, softened_interaction(1.0, -1.0, 0.5))
        assert transform.relative_potential(np.array([0.0]))[0] == pytest.approx(-2.0)

    def test_position_dependent_interaction_is_rejected(self):
        with pytest.raises(ConfigurationError):
            reduced_mass_transform(1.0, 1.0, lambda q1, q2: q1 * q2)
        with pytest.raises(ConfigurationError):
            reduced_mass_transform(1.0, 1.0, lambda q1, q2: q1 - q2)

    def test_non_positive_mass_is_rejected(self):
        with pytest.raises(ConfigurationError):
            reduced_mass_transform(0.0, 1.0)

    @pytest.mark.slow
    def test_circulation_sector_matches(self):
        grid = Grid.uniform(2, 128, (-8.0, 8.0), periodic=True)
        transform = reduced_mass_transform(1.0, 1.0)
        pair_H = transform.pair_hamiltonian(grid, omega=1.0)
        relative_H = transform.relative_hamiltonian(grid, omega=1.0)
        # (q1 + i q2) is proportional to (xi - i eta) in mass-scaled relative coordinates
        lock = relative_phase_lock(transform, grid, -1)
        relative_psi, relative_energy = imaginary_time_ground_state(relative_H, phase_lock=lock)
        assert relative_energy == pytest.approx(2.0, abs=1e-3)

        pair, relative = circulation_sectors(transform, vortex_state(grid, 1), pair_H, relative_psi, relative_H, 1.5)
        assert pair.quanta == pytest.approx(-1.0, abs=5e-3)
        assert relative.quanta == pytest.approx(-1.0, abs=5e-3)
        assert abs(pair.quanta - relative.quanta) < 5e-3
