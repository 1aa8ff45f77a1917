"""Osmotic potential accumulated along current-velocity characteristics."""

import logging
from typing import Optional

import numpy as np

from errors import ConfigurationError
from lattice import divergence_array, interpolate_array
from madelung.fields import MadelungSeries

logger = logging.getLogger(__name__)


def _velocity_divergence(series: MadelungSeries, index: int, canonical: bool) -> np.ndarray:
    fields = series.fields[index]
    H = series.hamiltonian
    if not canonical:
        return divergence_array(fields.v, fields.grid, fields.scheme)
    masses = H.axis_masses.reshape((-1,) + (1,) * fields.grid.dims)
    div = divergence_array(fields.phase_gradient / masses, fields.grid, fields.scheme)
    eA = H.coupling(fields.t)
    if eA is not None:
        div = div - divergence_array(eA / masses, fields.grid, fields.scheme)
    return div


def _sample(values: np.ndarray, grid, points: np.ndarray) -> np.ndarray:
    return interpolate_array(values, grid, points).reshape(grid.shape)


def osmotic_potential_accumulate(series: MadelungSeries, R0: Optional[np.ndarray] = None, canonical: bool = False) -> np.ndarray:
    """Integrate ``dR/dt = -(hbar/2) div v`` along ``dq/dt = v`` between snapshots.

    Semi-Lagrangian: every node traces its characteristic back over one
    snapshot interval with a midpoint rule, samples ``R`` at the departure point
    by multilinear interpolation and adds the trapezoidal source along the path.
    With ``canonical=True`` the divergence is split into ``div(grad S / m)``
    and ``-div(e A / m c)``.

    Returns:
        ``R`` at every snapshot, shape ``(T, *grid.shape)``.

    Raises:
        OutOfDomainError: if a characteristic leaves a non-periodic grid.
    """
    if len(series) < 2:
        raise ConfigurationError("osmotic accumulation needs at least two snapshots")
    grid = series.grid
    hbar = series.hamiltonian.hbar
    nodes = np.stack([x.ravel() for x in grid.mesh()], axis=-1)
    v = series.stack("v")
    R = np.empty((len(series),) + grid.shape)
    R[0] = series.fields[0].R if R0 is None else np.asarray(R0, dtype=float)
    divergences = [_velocity_divergence(series, i, canonical) for i in range(len(series))]

    for n in range(len(series) - 1):
        dt = series.times[n + 1] - series.times[n]
        mid_v = 0.5 * (v[n] + v[n + 1])
        mid_div = 0.5 * (divergences[n] + divergences[n + 1])
        first = np.stack([mid_v[a].ravel() for a in range(grid.dims)], axis=-1)
        midpoint = nodes - 0.5 * dt * first
        velocity = np.stack([interpolate_array(mid_v[a], grid, midpoint) for a in range(grid.dims)], axis=-1)
        departure = nodes - dt * velocity
        midpoint = nodes - 0.5 * dt * velocity
        source = 0.5 * (_sample(divergences[n], grid, departure) + divergences[n + 1])
        source = 0.5 * (source + _sample(mid_div, grid, midpoint))
        R[n + 1] = _sample(R[n], grid, departure) - 0.5 * hbar * dt * source
    logger.debug("accumulated osmotic potential over %d intervals", len(series) - 1)
    return R


def reported_osmotic_source(R: np.ndarray, mu: float) -> np.ndarray:
    """``R / mu`` for the diffusion coupling ``mu`` in ``R = mu U``.

    Only this ratio is observable; ``mu`` is a free coupling constant of the
    background medium and not a particle mass.
    """
    if mu <= 0:
        raise ConfigurationError(f"diffusion coupling must be positive, got {mu}")
    return np.asarray(R, dtype=float) / mu
