"""Walker ensembles stepped with the forward and backward Ito diffusions."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from errors import ConfigurationError
from lattice import Grid, RealField, interpolate_array
from propagator import Hamiltonian

logger = logging.getLogger(__name__)

STREAM_INITIAL = 0
STREAM_FORWARD = 1
STREAM_BACKWARD = 2

# Drift clamp in grid extents per unit time.
CLAMP_EXTENTS_PER_TIME = 10.0

DriftSource = Union[np.ndarray, Callable[[np.ndarray, float], np.ndarray]]


@dataclass(frozen=True)
class NoiseSpec:
    """Per-axis diffusion coefficients ``nu = hbar / 2m``."""

    nu: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float).copy()
        if nu.ndim != 1 or np.any(nu < 0):
            raise ConfigurationError("diffusion coefficients must be a non-negative vector")
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)

    @classmethod
    def from_hamiltonian(cls, H: Hamiltonian) -> "NoiseSpec":
        return cls(H.diffusion_coefficients())

    def amplitude(self, dt: float) -> np.ndarray:
        """Standard deviation ``sqrt(2 nu dt)`` of one increment per axis."""
        return np.sqrt(2.0 * self.nu * dt)


@dataclass(frozen=True)
class Ensemble:
    """Walker positions at time ``t`` plus the counters that make the run reproducible.

    ``step`` indexes the noise blocks already consumed; the block for a step is a
    pure function of ``(seed, stream, step)``.
    """

    positions: np.ndarray = field(repr=False)
    t: float
    seed: int
    step: int = 0
    clamped: int = 0
    reflected: int = 0

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float)
        if positions.ndim != 2 or len(positions) < 1:
            raise ConfigurationError("ensemble positions must be an (M, dims) array with M >= 1")
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def dims(self) -> int:
        return self.positions.shape[1]


def noise_block(seed: int, stream: int, step: int, shape) -> np.ndarray:
    """Standard normals for one step, drawn from a counter-based Philox generator.

    The stream and step occupy the high counter words, so every
    ``(seed, stream, step)`` owns a disjoint block of the Philox sequence and
    walker ``i`` always receives row ``i`` regardless of how walkers are
    partitioned for stepping.
    """
    return _generator(seed, stream, step).standard_normal(shape)


def _generator(seed: int, stream: int, step: int) -> np.random.Generator:
    counter = np.array([0, 0, stream, step], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def _inverse_cdf(weights: np.ndarray, nodes: np.ndarray, h: float, uniforms: np.ndarray) -> np.ndarray:
    """Continuous inverse CDF of a piecewise-constant density on node-centred cells."""
    cdf = np.concatenate([[0.0], np.cumsum(weights)])
    cdf /= cdf[-1]
    # side="right" skips empty cells whose cdf does not advance
    cell = np.clip(np.searchsorted(cdf, uniforms, side="right") - 1, 0, len(nodes) - 1)
    width = cdf[cell + 1] - cdf[cell]
    fraction = np.divide(uniforms - cdf[cell], width, out=np.full_like(uniforms, 0.5), where=width > 0)
    return nodes[cell] + (np.clip(fraction, 0.0, 1.0) - 0.5) * h


def sample_initial(rho: Union[RealField, np.ndarray], M: int, seed: int, grid: Optional[Grid] = None, t: float = 0.0) -> Ensemble:
    """Draw ``M`` walkers from a gridded density.

    Axis 0 is sampled from its marginal by inverse CDF, every further axis from
    its conditional given the cells already chosen; within a cell positions are
    uniform.
    """
    if isinstance(rho, RealField):
        grid, values = rho.grid, rho.values
    else:
        values = np.asarray(rho, dtype=float)
    if M < 1:
        raise ConfigurationError("an ensemble needs at least one walker")
    if np.any(values < 0) or not np.sum(values) > 0:
        raise ConfigurationError("sampling density must be non-negative with positive mass")
    uniforms = _generator(seed, STREAM_INITIAL, 0).random((M, grid.dims))

    positions = np.empty((M, grid.dims))
    cells = np.zeros((M, 0), dtype=int)
    for a in range(grid.dims):
        nodes, h = grid.axis(a), grid.spacing[a]
        # marginal of the remaining axes, conditioned on the cells chosen so far
        reduced = values.sum(axis=tuple(range(a + 1, grid.dims))) if a + 1 < grid.dims else values
        if a == 0:
            positions[:, 0] = _inverse_cdf(reduced, nodes, h, uniforms[:, 0])
        else:
            groups, inverse = np.unique(cells, axis=0, return_inverse=True)
            inverse = np.asarray(inverse).reshape(-1)
            for g, prefix in enumerate(groups):
                members = np.flatnonzero(inverse == g)
                weights = reduced[tuple(prefix)]
                positions[members, a] = _inverse_cdf(weights, nodes, h, uniforms[members, a])
        index = np.clip(np.rint((positions[:, a] - nodes[0]) / h).astype(int), 0, len(nodes) - 1)
        cells = np.concatenate([cells, index[:, None]], axis=1)

    positions = grid.wrap(positions)
    for a in range(grid.dims):
        if not grid.periodic[a]:
            positions[:, a] = np.clip(positions[:, a], grid.extents[a][0], grid.axis(a)[-1])
    return Ensemble(positions, t, seed)


def default_clamp(grid: Grid) -> float:
    return CLAMP_EXTENTS_PER_TIME * max(grid.lengths)


def _sample_drift(drift: DriftSource, grid: Grid, positions: np.ndarray, t: float, threads: int) -> np.ndarray:
    if callable(drift):
        return np.asarray(drift(positions, t), dtype=float)
    drift = np.asarray(drift, dtype=float)
    if threads <= 1 or len(positions) < 2 * threads:
        return np.stack([interpolate_array(drift[a], grid, positions) for a in range(grid.dims)], axis=-1)
    chunks = np.array_split(positions, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(
            lambda chunk: np.stack([interpolate_array(drift[a], grid, chunk) for a in range(grid.dims)], axis=-1), chunks
        )
        return np.concatenate(list(parts))


def _clamp(velocities: np.ndarray, limit: float):
    speed = np.linalg.norm(velocities, axis=1)
    over = speed > limit
    if np.any(over):
        velocities = velocities.copy()
        velocities[over] *= (limit / speed[over])[:, None]
    return velocities, int(np.count_nonzero(over))


def _reflect(positions: np.ndarray, grid: Grid):
    reflected = 0
    positions = grid.wrap(positions)
    for a in range(grid.dims):
        if grid.periodic[a]:
            continue
        lo, hi = grid.extents[a][0], grid.axis(a)[-1]
        column = positions[:, a]
        for _ in range(2):
            low, high = column < lo, column > hi
            reflected += int(np.count_nonzero(low) + np.count_nonzero(high))
            column[low] = 2.0 * lo - column[low]
            column[high] = 2.0 * hi - column[high]
        np.clip(column, lo, hi, out=column)
    return positions, reflected


def _diffuse(ens: Ensemble, drift: DriftSource, grid: Grid, dt: float, noise: NoiseSpec, sign: float, stream: int, clamp: Optional[float], threads: int) -> Ensemble:
    if dt < 0:
        raise ConfigurationError(f"dt must be non-negative, got {dt}")
    if ens.dims != grid.dims:
        raise ConfigurationError(f"ensemble has {ens.dims} coordinates, grid has {grid.dims} axes")
    if dt == 0:
        return ens
    velocities, clamped = _clamp(_sample_drift(drift, grid, ens.positions, ens.t, threads), clamp or default_clamp(grid))
    xi = noise_block(ens.seed, stream, ens.step, ens.positions.shape)
    moved = ens.positions + sign * velocities * dt + noise.amplitude(dt) * xi
    moved, reflected = _reflect(moved, grid)
    if clamped:
        logger.debug("clamped drift for %d walkers at t=%.6g", clamped, ens.t)
    if reflected:
        logger.warning("reflected %d walkers off non-periodic walls at t=%.6g", reflected, ens.t)
    return replace(
        ens,
        positions=moved,
        t=ens.t + sign * dt,
        step=ens.step + 1,
        clamped=ens.clamped + clamped,
        reflected=ens.reflected + reflected,
    )


def euler_maruyama_step(ens: Ensemble, drift: DriftSource, grid: Grid, dt: float, noise: NoiseSpec, clamp: Optional[float] = None, threads: int = 1) -> Ensemble:
    """``q <- q + b(q, t) dt + sqrt(2 nu dt) xi``.

    ``drift`` is a per-axis field on ``grid`` (shape ``(dims, *grid.shape)``)
    sampled by multilinear interpolation, or a callable ``(positions, t)``.
    Drift speeds above ``clamp`` (default ten grid extents per unit time) are
    scaled down and counted; walkers leaving a non-periodic axis are reflected
    and counted.
    """
    return _diffuse(ens, drift, grid, dt, noise, 1.0, STREAM_FORWARD, clamp, threads)


def backward_step(ens: Ensemble, drift: DriftSource, grid: Grid, dt: float, noise: NoiseSpec, clamp: Optional[float] = None, threads: int = 1) -> Ensemble:
    """Time-reversed step ``q <- q - b*(q, t) dt + sqrt(2 nu dt) xi`` from ``t`` to ``t - dt``."""
    return _diffuse(ens, drift, grid, dt, noise, -1.0, STREAM_BACKWARD, clamp, threads)
