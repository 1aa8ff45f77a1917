"""Hydrodynamic state (density, velocity) and its initializers."""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from errors import ConfigurationError, ResolutionError
from lattice import ComplexField, Grid, partial_array
from propagator import Hamiltonian

logger = logging.getLogger(__name__)

# log of the smallest positive double; stands in for ln(0) at exact nodes
LOG_TINY = float(np.log(np.finfo(float).tiny))


def bounded(grid: Grid) -> Grid:
    """The same nodes with every axis treated as non-periodic.

    Hydrodynamic fields of localized states are not periodic (a spreading
    packet's velocity grows linearly), so the flow differentiates them with
    one-sided stencils at the edges instead of wrapping.
    """
    if not any(grid.periodic):
        return grid
    return Grid(grid.extents, grid.points, (False,) * grid.dims)


def normalize_log_density(log_rho: np.ndarray, grid: Grid) -> np.ndarray:
    return log_rho - (logsumexp(log_rho) + np.log(grid.cell_volume))


@dataclass(frozen=True)
class HydroState:
    """Density and per-axis velocity at time ``t``.

    The density is held as ``log_rho`` so that Gaussian tails stay resolved far
    below any density floor. Cells in ``frozen`` (an excised vortex core) keep
    their values under the flow. ``mass_defect`` is the relative mass change
    the last step made before it was renormalized away.
    """

    grid: Grid
    log_rho: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    t: float = 0.0
    frozen: Optional[np.ndarray] = field(default=None, repr=False)
    curl_ratio: float = float("nan")
    mass_defect: float = 0.0

    def __post_init__(self):
        log_rho = np.array(self.log_rho, dtype=float)
        v = np.array(self.v, dtype=float)
        if log_rho.shape != self.grid.shape:
            raise ConfigurationError(f"density shape {log_rho.shape} does not match grid {self.grid.shape}")
        if v.shape != (self.grid.dims,) + self.grid.shape:
            raise ConfigurationError(f"velocity must have shape {(self.grid.dims,) + self.grid.shape}, got {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(np.isnan(log_rho)):
            raise ConfigurationError("hydrodynamic state contains non-finite values")
        log_rho = np.maximum(log_rho, LOG_TINY)
        for array in (log_rho, v):
            array.setflags(write=False)
        object.__setattr__(self, "log_rho", log_rho)
        object.__setattr__(self, "v", v)
        if self.frozen is not None:
            frozen = np.array(self.frozen, dtype=bool)
            if frozen.shape != self.grid.shape:
                raise ConfigurationError("frozen mask must match the grid")
            frozen.setflags(write=False)
            object.__setattr__(self, "frozen", frozen if frozen.any() else None)

    @property
    def rho(self) -> np.ndarray:
        return np.exp(self.log_rho)

    def mass(self) -> float:
        return float(np.sum(self.rho) * self.grid.cell_volume)

    def momentum(self, H: Hamiltonian) -> np.ndarray:
        """Canonical momentum ``m v + (e/c) A`` per axis."""
        p = H.axis_masses.reshape((-1,) + (1,) * self.grid.dims) * self.v
        eA = H.coupling(self.t)
        return p if eA is None else p + eA

    def with_time(self, t: float) -> "HydroState":
        return replace(self, t=t)

    @classmethod
    def from_density(cls, grid: Grid, rho: np.ndarray, v: Optional[np.ndarray] = None, t: float = 0.0) -> "HydroState":
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0) or not np.sum(rho) > 0:
            raise ConfigurationError("density must be non-negative with positive mass")
        with np.errstate(divide="ignore"):
            log_rho = np.log(rho)
        v = np.zeros((grid.dims,) + grid.shape) if v is None else v
        return cls(grid, normalize_log_density(np.maximum(log_rho, LOG_TINY), grid), v, t)


def from_wavefunction(psi: Union[ComplexField, np.ndarray], H: Hamiltonian, t: float = 0.0) -> HydroState:
    """``rho = |psi|^2`` and ``v_a = (hbar/m_a) d_a arg(psi) - (e_a/m_a c) A_a``.

    The phase is unwrapped along each axis before differencing, so the velocity
    of a node-free state is exact wherever its phase is polynomial of degree two
    or less, tails included.
    """
    values = psi.values if isinstance(psi, ComplexField) else np.asarray(psi, dtype=complex)
    grid = bounded(H.grid)
    masses = H.axis_masses
    phase = np.angle(values)
    eA = H.coupling(t)
    v = np.empty((grid.dims,) + grid.shape)
    for a in range(grid.dims):
        v[a] = H.hbar / masses[a] * partial_array(np.unwrap(phase, axis=a), grid, a, "central")
        if eA is not None:
            v[a] -= eA[a] / masses[a]
    return HydroState.from_density(H.grid, np.abs(values) ** 2, v, t)


def vortex_initializer(
    grid: Grid,
    alpha: float,
    core_radius: float,
    width: float = 1.0,
    mass: float = 1.0,
    hbar: float = 1.0,
    center: Sequence[float] = (0.0, 0.0),
) -> HydroState:
    """Annular density carrying circulation ``alpha * h`` about ``center``.

    ``rho ~ (r/a)^(2|alpha|) exp(-r^2/a^2)`` with ``a = width`` and
    ``v = (alpha hbar / m r) e_phi``. In a harmonic trap with
    ``omega = hbar / (m a^2)`` this is a stationary solution of the flow for
    every real ``alpha``; integer values reproduce the oscillator eigenstates.
    Cells inside ``core_radius`` are frozen.

    Raises:
        ConfigurationError: if the grid is not 2D.
        ResolutionError: if the core spans fewer than two cells.
    """
    if grid.dims != 2:
        raise ConfigurationError("vortex initial data needs a 2D grid")
    if width <= 0 or mass <= 0:
        raise ConfigurationError("vortex width and mass must be positive")
    h = max(grid.spacing)
    if alpha != 0 and core_radius < 2.0 * h:
        raise ResolutionError(f"core radius {core_radius} is below two cells ({2.0 * h})")
    x, y = grid.mesh()
    dx, dy = x - center[0], y - center[1]
    r2 = dx**2 + dy**2
    at_center = r2 == 0.0
    safe_r2 = np.where(at_center, 1.0, r2)

    log_rho = -r2 / width**2
    if alpha != 0:
        # the node on the axis takes the profile at half a cell
        log_rho = log_rho + abs(alpha) * np.log(np.where(at_center, 0.25 * h**2, r2) / width**2)
    strength = alpha * hbar / mass
    v = np.stack([-strength * dy / safe_r2, strength * dx / safe_r2])
    v[:, at_center] = 0.0
    frozen = r2 < core_radius**2 if alpha != 0 else None
    logger.debug("vortex alpha=%g core=%g frozen cells=%d", alpha, core_radius, 0 if frozen is None else int(frozen.sum()))
    return HydroState(grid, normalize_log_density(log_rho, grid), v, 0.0, frozen)
