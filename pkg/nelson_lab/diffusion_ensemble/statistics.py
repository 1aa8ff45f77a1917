"""Ensemble statistics: histograms, equilibrium tests and drift regression."""

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from diffusion_ensemble.trajectories import TrajectoryBundle
from diffusion_ensemble.walkers import Ensemble
from errors import ConfigurationError, DegenerateInputError
from lattice import Grid, RealField, divergence_array, second_partial_array

logger = logging.getLogger(__name__)

MIN_EXPECTED = 5.0
TARGET_BINS_PER_AXIS = 64


def _bin_factor(grid: Grid, coarsen: Optional[int]) -> int:
    if coarsen is None:
        return max(1, min(n for n in grid.points) // TARGET_BINS_PER_AXIS)
    if coarsen < 1:
        raise ConfigurationError("histogram coarsening factor must be at least 1")
    return coarsen


def _bin_edges(grid: Grid, factor: int) -> Tuple[np.ndarray, ...]:
    edges = []
    for a in range(grid.dims):
        nodes, h = grid.axis(a), grid.spacing[a]
        cell_edges = np.concatenate([nodes - 0.5 * h, [nodes[-1] + 0.5 * h]])
        edges.append(cell_edges[::factor] if (len(cell_edges) - 1) % factor == 0 else np.append(cell_edges[::factor], cell_edges[-1]))
    return tuple(edges)


def _block_sum(values: np.ndarray, factor: int) -> np.ndarray:
    for axis in range(values.ndim):
        n = values.shape[axis]
        starts = np.arange(0, n, factor)
        values = np.add.reduceat(values, starts, axis=axis)
    return values


def _wrapped_for_bins(positions: np.ndarray, grid: Grid) -> np.ndarray:
    # node-centred cells: the upper half of the first periodic cell lies past the last node
    shifted = np.array(positions, dtype=float)
    for a in range(grid.dims):
        if grid.periodic[a]:
            lo = grid.extents[a][0] - 0.5 * grid.spacing[a]
            shifted[:, a] = lo + np.mod(shifted[:, a] - lo, grid.lengths[a])
    return shifted


def histogram_counts(ens: Ensemble, grid: Grid, coarsen: Optional[int] = None) -> Tuple[np.ndarray, Tuple[np.ndarray, ...]]:
    """Walker counts in blocks of ``coarsen`` node-centred cells per axis."""
    edges = _bin_edges(grid, _bin_factor(grid, coarsen))
    counts, _ = np.histogramdd(_wrapped_for_bins(ens.positions, grid), bins=edges)
    return counts, edges


def histogram_density(ens: Ensemble, grid: Grid, coarsen: Optional[int] = None) -> Tuple[np.ndarray, Tuple[np.ndarray, ...]]:
    """Empirical probability density per bin (counts / (M * bin volume))."""
    counts, edges = histogram_counts(ens, grid, coarsen)
    volumes = np.ones(counts.shape)
    for a, e in enumerate(edges):
        shape = [1] * len(edges)
        shape[a] = len(e) - 1
        volumes = volumes * np.diff(e).reshape(shape)
    return counts / (ens.size * volumes), edges


def bin_probabilities(rho: np.ndarray, grid: Grid, coarsen: Optional[int] = None) -> np.ndarray:
    """Target probability per histogram bin from nodal densities (midpoint rule per cell)."""
    masses = np.asarray(rho, dtype=float) * grid.cell_volume
    blocks = _block_sum(masses, _bin_factor(grid, coarsen))
    return blocks / blocks.sum()


@dataclass(frozen=True)
class EquilibriumReport:
    """Chi-square and L1 comparison of an ensemble histogram with a target density."""

    chi2: float
    dof: int
    p_value: float
    l1: float
    bins: int
    merged_bins: int

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame([self.__dict__])


def _merge_sparse(observed: np.ndarray, expected: np.ndarray) -> Tuple[np.ndarray, np.ndarray, int]:
    """Merge consecutive bins (flattened order) until each expected count reaches five."""
    merged_obs, merged_exp = [], []
    acc_obs = acc_exp = 0.0
    merged = 0
    for o, e in zip(observed, expected):
        acc_obs += o
        acc_exp += e
        if acc_exp >= MIN_EXPECTED:
            merged_obs.append(acc_obs)
            merged_exp.append(acc_exp)
            acc_obs = acc_exp = 0.0
        else:
            merged += 1
    if acc_exp > 0 or acc_obs > 0:
        if merged_exp:
            merged_obs[-1] += acc_obs
            merged_exp[-1] += acc_exp
        else:
            merged_obs.append(acc_obs)
            merged_exp.append(acc_exp)
    return np.asarray(merged_obs), np.asarray(merged_exp), merged


def equilibrium_test(ens: Ensemble, rho_target: Union[RealField, np.ndarray], grid: Optional[Grid] = None, coarsen: Optional[int] = None) -> EquilibriumReport:
    """Chi-square goodness of fit and L1 distance between walkers and ``rho_target``.

    Bins are blocks of ``coarsen`` cells per axis; bins expecting fewer than
    five walkers are merged with their neighbours in flattened order.
    """
    if isinstance(rho_target, RealField):
        grid, rho_target = rho_target.grid, rho_target.values
    if ens.size < 1000:
        raise DegenerateInputError(f"equilibrium test needs at least 1000 walkers, got {ens.size}")
    counts, _ = histogram_counts(ens, grid, coarsen)
    probabilities = bin_probabilities(rho_target, grid, coarsen)
    observed = counts.ravel()
    expected = probabilities.ravel() * ens.size
    l1 = float(np.sum(np.abs(observed / ens.size - probabilities.ravel())))

    merged_obs, merged_exp, merged = _merge_sparse(observed, expected)
    merged_exp = merged_exp * merged_obs.sum() / merged_exp.sum()
    if len(merged_obs) < 2:
        raise DegenerateInputError("fewer than two populated bins; cannot run a chi-square test")
    chi2, p_value = stats.chisquare(merged_obs, merged_exp)
    report = EquilibriumReport(float(chi2), len(merged_obs) - 1, float(p_value), l1, int(observed.size), merged)
    logger.info("equilibrium: chi2=%.3f dof=%d p=%.4g L1=%.4f", report.chi2, report.dof, report.p_value, report.l1)
    return report


@dataclass(frozen=True)
class DriftEstimate:
    """Kernel-regression estimate of a mean derivative at evaluation points.

    Points with too few effective samples carry NaN and ``estimated == False``.
    """

    points: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    effective_samples: np.ndarray
    estimated: np.ndarray

    def as_frame(self) -> pd.DataFrame:
        columns = {f"q{a}": self.points[:, a] for a in range(self.points.shape[1])}
        for a in range(self.value.shape[1]):
            columns[f"estimate{a}"] = self.value[:, a]
            columns[f"stderr{a}"] = self.stderr[:, a]
        columns["effective_samples"] = self.effective_samples
        return pd.DataFrame(columns)


def estimate_mean_forward_derivative(
    bundle: TrajectoryBundle,
    frame: int,
    points: np.ndarray,
    bandwidth: float,
    direction: Literal["forward", "backward"] = "forward",
    min_samples: float = 50.0,
) -> DriftEstimate:
    """Nadaraya-Watson regression of ``(q(t+dt) - q(t)) / dt`` on ``q(t)``.

    ``direction="backward"`` regresses ``(q(t) - q(t-dt)) / dt`` on ``q(t)``,
    estimating ``D* q = b*``. ``dt`` is the spacing between adjacent frames of a
    forward-recorded bundle. Gaussian kernel of width ``bandwidth``.
    """
    if bandwidth <= 0:
        raise ConfigurationError("kernel bandwidth must be positive")
    neighbour = frame + 1 if direction == "forward" else frame - 1
    if not 0 <= neighbour < len(bundle.frames):
        raise ConfigurationError(f"frame {frame} has no {direction} neighbour")
    here = bundle.frames[frame]
    there = bundle.frames[neighbour]
    dt = abs(bundle.times[neighbour] - bundle.times[frame])
    rates = (there - here) / dt if direction == "forward" else (here - there) / dt

    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != here.shape[1]:
        points = points.T
    values = np.full((len(points), here.shape[1]), np.nan)
    errors = np.full_like(values, np.nan)
    effective = np.zeros(len(points))
    for i, point in enumerate(points):
        weights = np.exp(-0.5 * np.sum((here - point) ** 2, axis=1) / bandwidth**2)
        total = weights.sum()
        if total <= 0:
            continue
        effective[i] = total**2 / np.sum(weights**2)
        if effective[i] < min_samples:
            continue
        mean = weights @ rates / total
        spread = weights @ (rates - mean) ** 2 / total
        values[i] = mean
        errors[i] = np.sqrt(spread * np.sum(weights**2)) / total
    estimated = effective >= min_samples
    if not np.all(estimated):
        logger.debug("%d of %d points left unestimated", int(np.count_nonzero(~estimated)), len(points))
    return DriftEstimate(points, values, errors, effective, estimated)


def fokker_planck_reference(
    rho0: np.ndarray,
    drift,
    grid: Grid,
    nu: Sequence[float],
    dt: float,
    steps: int,
    t0: float = 0.0,
    scheme: str = "central",
) -> np.ndarray:
    """Integrate ``d_t rho = -div(b rho) + sum_a nu_a d_a^2 rho`` on the grid with Heun steps.

    ``drift`` is a fixed per-axis field or a callable ``t -> field``.
    """
    nu = np.asarray(nu, dtype=float)
    h2 = min(grid.spacing) ** 2
    if dt * 2.0 * float(np.max(nu)) * grid.dims > h2:
        raise ConfigurationError(f"explicit Fokker-Planck step dt={dt} exceeds the diffusive limit {h2 / (2.0 * np.max(nu) * grid.dims):.3g}")

    def field_at(t: float) -> np.ndarray:
        return np.asarray(drift(t) if callable(drift) else drift, dtype=float)

    def rate(rho: np.ndarray, t: float) -> np.ndarray:
        flux = field_at(t) * rho
        diffusion = sum(nu[a] * second_partial_array(rho, grid, a, scheme) for a in range(grid.dims))
        return -divergence_array(flux, grid, scheme) + diffusion

    rho = np.asarray(rho0, dtype=float).copy()
    t = t0
    for _ in range(steps):
        k1 = rate(rho, t)
        k2 = rate(rho + dt * k1, t + dt)
        rho = rho + 0.5 * dt * (k1 + k2)
        t += dt
    return rho
