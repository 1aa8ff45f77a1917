"""Deterministic paths along the current velocity."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from errors import ConfigurationError, OutOfDomainError
from lattice import Grid, interpolate_array
from madelung import MadelungSeries

logger = logging.getLogger(__name__)

VelocitySource = Callable[[np.ndarray, float], np.ndarray]


@dataclass
class CurrentPath:
    """Positions along ``dq/dt = v(q, t)``; ``exited`` marks a path truncated at the grid edge."""

    times: np.ndarray
    positions: np.ndarray
    exited: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.positions[-1]


def field_velocity(v: np.ndarray, grid: Grid) -> VelocitySource:
    """Velocity callable for a fixed per-axis field."""
    v = np.asarray(v, dtype=float)

    def velocity(points: np.ndarray, t: float) -> np.ndarray:
        return np.stack([interpolate_array(v[a], grid, points) for a in range(grid.dims)], axis=-1)

    return velocity


def series_velocity(series: MadelungSeries) -> VelocitySource:
    """Velocity callable interpolating ``v`` linearly in time between snapshots."""
    v = series.stack("v")
    times = np.asarray(series.times)
    grid = series.grid

    def sample(index: int, points: np.ndarray) -> np.ndarray:
        return np.stack([interpolate_array(v[index, a], grid, points) for a in range(grid.dims)], axis=-1)

    def velocity(points: np.ndarray, t: float) -> np.ndarray:
        if t <= times[0]:
            return sample(0, points)
        if t >= times[-1]:
            return sample(len(times) - 1, points)
        right = int(np.searchsorted(times, t, side="right"))
        left = right - 1
        weight = (t - times[left]) / (times[right] - times[left])
        return (1.0 - weight) * sample(left, points) + weight * sample(right, points)

    return velocity


def current_trajectory(velocity: Union[VelocitySource, MadelungSeries], q0, t0: float, t1: float, dt: float, grid: Optional[Grid] = None) -> CurrentPath:
    """Classical RK4 integration of ``dq/dt = v(q, t)`` from ``t0`` to ``t1``.

    ``q0`` may be one point or an ``(M, dims)`` array of starting points. A path
    leaving a non-periodic grid is truncated at its last interior position.
    """
    if isinstance(velocity, MadelungSeries):
        grid = velocity.grid
        velocity = series_velocity(velocity)
    if dt <= 0:
        raise ConfigurationError("path step must be positive")
    q = np.atleast_2d(np.asarray(q0, dtype=float))
    steps = int(np.ceil((t1 - t0) / dt - 1e-9))
    h = (t1 - t0) / steps if steps else 0.0
    times, positions = [t0], [q.copy()]
    exited = False
    t = t0
    for _ in range(steps):
        try:
            k1 = velocity(q, t)
            k2 = velocity(q + 0.5 * h * k1, t + 0.5 * h)
            k3 = velocity(q + 0.5 * h * k2, t + 0.5 * h)
            k4 = velocity(q + h * k3, t + h)
        except OutOfDomainError:
            exited = True
            logger.warning("current path left the grid at t=%.6g", t)
            break
        q = q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if grid is not None:
            q = grid.wrap(q)
        t += h
        times.append(t)
        positions.append(q.copy())
    stacked = np.stack(positions)
    if np.asarray(q0).ndim == 1:
        stacked = stacked[:, 0]
    return CurrentPath(np.asarray(times), stacked, exited)
