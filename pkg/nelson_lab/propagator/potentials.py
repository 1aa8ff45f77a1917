"""Potential builders sampled on configuration-space grids."""

from typing import Callable, Sequence, Union

import numpy as np

from errors import ConfigurationError
from lattice import Grid


def _centers(grid: Grid, center: Union[float, Sequence[float]]) -> np.ndarray:
    return np.broadcast_to(np.asarray(center, dtype=float), (grid.dims,))


def harmonic(grid: Grid, axis_masses: Sequence[float], omega: float, center: Union[float, Sequence[float]] = 0.0) -> np.ndarray:
    """``sum_a m_a omega^2 (x_a - c_a)^2 / 2``."""
    masses = np.broadcast_to(np.asarray(axis_masses, dtype=float), (grid.dims,))
    centers = _centers(grid, center)
    V = np.zeros(grid.shape)
    for a, x in enumerate(grid.mesh()):
        V += 0.5 * masses[a] * omega**2 * (x - centers[a]) ** 2
    return V


def power_well(grid: Grid, strength: float, power: int = 4, center: Union[float, Sequence[float]] = 0.0) -> np.ndarray:
    """``strength * sum_a (x_a - c_a)^power``; steep even powers give box-like wells."""
    if power % 2:
        raise ConfigurationError("power well needs an even exponent")
    centers = _centers(grid, center)
    V = np.zeros(grid.shape)
    for a, x in enumerate(grid.mesh()):
        V += strength * (x - centers[a]) ** power
    return V


def separation(grid: Grid, axis_1: int, axis_2: int) -> np.ndarray:
    """``q1 - q2`` on the grid, minimum image on a shared periodic axis."""
    mesh = grid.mesh()
    d = mesh[axis_1] - mesh[axis_2]
    if grid.periodic[axis_1] and grid.periodic[axis_2] and grid.extents[axis_1] == grid.extents[axis_2]:
        length = grid.lengths[axis_1]
        d = d - length * np.round(d / length)
    return d


def softened_coulomb(grid: Grid, e1: float, e2: float, softening: float, axes: Sequence[int] = (0, 1)) -> np.ndarray:
    """``e1 e2 / sqrt((q1 - q2)^2 + a^2)`` between two 1D particles."""
    if not softening > 0:
        raise ConfigurationError(f"Coulomb softening must be positive, got {softening}")
    d = separation(grid, axes[0], axes[1])
    return e1 * e2 / np.sqrt(d**2 + softening**2)


def uniform_vector_potential(components: Sequence[float]) -> np.ndarray:
    return np.asarray(components, dtype=float)


def electric_ramp(components: Sequence[float], c: float) -> Callable[[float], np.ndarray]:
    """Uniform ``A(t) = -c E t`` producing the constant electric field ``E``."""
    field = np.asarray(components, dtype=float)
    return lambda t: -c * field * t
