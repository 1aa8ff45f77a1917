"""Conditional wavefunctions: the two-particle state cut along particle 2's trajectory."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from diffusion_ensemble import CurrentPath, current_trajectory, series_velocity
from errors import ConfigurationError, OutOfDomainError
from lattice import Grid, laplacian_array, partial_array
from madelung import MadelungSeries
from propagator import DENSITY_FLOOR, Evolution, Hamiltonian
from propagator.stepping import Mode, classical_correction_array

logger = logging.getLogger(__name__)


def _scheme(grid: Grid) -> str:
    return "spectral" if grid.all_periodic else "central"


def pair_axes(H: Hamiltonian) -> Tuple[int, int]:
    """Grid axes of the observed particle and of the conditioning particle.

    Raises:
        ConfigurationError: unless ``H`` holds exactly two one-axis particles and
            no vector potential.
    """
    if len(H.particles) != 2 or any(len(p.axes) != 1 for p in H.particles):
        raise ConfigurationError("conditional slices need exactly two particles with one axis each")
    if H.vector_potential is not None:
        raise ConfigurationError("conditional identities are implemented for scalar potentials only")
    return H.particles[0].axes[0], H.particles[1].axes[0]


def sample_along(values: np.ndarray, grid: Grid, axis: int, coordinate: Union[float, np.ndarray]) -> np.ndarray:
    """Cubic-spline evaluation of ``values`` along one grid axis.

    A scalar ``coordinate`` removes that axis from the result. Periodic axes use
    periodic splines.

    Raises:
        OutOfDomainError: if the coordinate leaves a non-periodic axis.
    """
    nodes = grid.axis(axis)
    coordinate = np.asarray(coordinate, dtype=float)
    lo, _ = grid.extents[axis]
    if grid.periodic[axis]:
        nodes = np.append(nodes, nodes[-1] + grid.spacing[axis])
        values = np.concatenate([values, np.take(values, [0], axis=axis)], axis=axis)
        coordinate = lo + np.mod(coordinate - lo, grid.lengths[axis])
        bc = "periodic"
    else:
        if np.any(coordinate < nodes[0]) or np.any(coordinate > nodes[-1]):
            raise OutOfDomainError(f"coordinate outside axis {axis} extent [{nodes[0]}, {nodes[-1]}]")
        bc = "not-a-knot"
    if np.iscomplexobj(values):
        real = CubicSpline(nodes, values.real, axis=axis, bc_type=bc)(coordinate)
        imag = CubicSpline(nodes, values.imag, axis=axis, bc_type=bc)(coordinate)
        return real + 1j * imag
    return CubicSpline(nodes, values, axis=axis, bc_type=bc)(coordinate)


def apply_hamiltonian(values: np.ndarray, H: Hamiltonian, t: float = 0.0, classical: bool = False) -> np.ndarray:
    """``H psi`` without the rest energy; ``classical`` adds the term cancelling the quantum kinetic."""
    scheme = _scheme(H.grid)
    potential = H.potential(t)
    if classical:
        potential = potential + classical_correction_array(values, H)
    result = potential * values
    for p in H.particles:
        result = result - H.hbar**2 / (2.0 * p.mass) * laplacian_array(values, H.grid, scheme, axes=p.axes)
    return result


@dataclass(frozen=True)
class ConditionalSlice:
    """One particle's conditional wavefunction at time ``t`` and the cross terms it needs.

    ``psi`` is the raw cut ``psi(q1, q2(t), t)``; it is not normalized. Arrays
    prefixed ``d2_`` are derivatives along particle 2's axis evaluated on the
    cut. ``p2_density`` is ``rho * d2 S`` and ``weighted_energy`` is
    ``Re(psi* H psi)``, so that ``d1`` of both stays smooth where ``rho`` is
    floored; ``weighted_correction`` is ``rho`` times the classical correction.
    """

    grid: Grid
    hbar: float
    masses: Tuple[float, float]
    t: float
    q1: float
    q2: float
    q2_dot: float
    psi: np.ndarray = field(repr=False)
    d2_psi: np.ndarray = field(repr=False)
    d22_psi: np.ndarray = field(repr=False)
    d2_rho: np.ndarray = field(repr=False)
    d2_current: np.ndarray = field(repr=False)
    current2: np.ndarray = field(repr=False)
    p2_density: np.ndarray = field(repr=False)
    d1_p2_density: np.ndarray = field(repr=False)
    weighted_energy: np.ndarray = field(repr=False)
    d1_weighted_energy: np.ndarray = field(repr=False)
    weighted_correction: np.ndarray = field(repr=False)
    d1_weighted_correction: np.ndarray = field(repr=False)
    potential: np.ndarray = field(repr=False)
    correction: np.ndarray = field(repr=False)

    def _d1(self, values: np.ndarray) -> np.ndarray:
        return partial_array(values, self.grid, 0, _scheme(self.grid))

    @property
    def rho(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def floor(self) -> float:
        return DENSITY_FLOOR * float(np.max(self.rho))

    @property
    def safe_rho(self) -> np.ndarray:
        return np.maximum(self.rho, self.floor)

    @property
    def R(self) -> np.ndarray:
        return 0.5 * self.hbar * np.log(self.safe_rho)

    @property
    def normalized(self) -> np.ndarray:
        norm = np.sqrt(np.sum(self.rho) * self.grid.cell_volume)
        return self.psi / norm

    @property
    def d1_psi(self) -> np.ndarray:
        return self._d1(self.psi)

    @property
    def d1_rho(self) -> np.ndarray:
        return 2.0 * np.real(np.conj(self.psi) * self.d1_psi)

    @property
    def current1(self) -> np.ndarray:
        return self.hbar * np.imag(np.conj(self.psi) * self.d1_psi) / self.masses[0]

    @property
    def p1(self) -> np.ndarray:
        """``d1 S1``, the canonical momentum of the observed particle on the cut."""
        return self.masses[0] * self.current1 / self.safe_rho

    @property
    def v1(self) -> np.ndarray:
        return self.current1 / self.safe_rho

    @property
    def v2(self) -> np.ndarray:
        """Particle 2's current velocity along the cut."""
        return self.current2 / self.safe_rho

    @property
    def d2_S(self) -> np.ndarray:
        return self.p2_density / self.safe_rho

    @property
    def d2_R(self) -> np.ndarray:
        return 0.5 * self.hbar * self.d2_rho / self.safe_rho


def cut_state(values: np.ndarray, H: Hamiltonian, t: float, q1: float, q2: float, q2_dot: float) -> ConditionalSlice:
    """Cut one full snapshot at ``q2`` and collect the cross terms on the cut."""
    grid = H.grid
    observed, conditioning = pair_axes(H)
    scheme = _scheme(grid)
    m1, m2 = H.particles[0].mass, H.particles[1].mass

    d2_psi = partial_array(values, grid, conditioning, scheme)
    d22_psi = partial_array(d2_psi, grid, conditioning, scheme)
    overlap = np.conj(values) * d2_psi
    p2_density = H.hbar * overlap.imag
    current2 = p2_density / m2
    d2_current = partial_array(current2, grid, conditioning, scheme)
    d2_rho = 2.0 * overlap.real
    weighted_energy = np.real(np.conj(values) * apply_hamiltonian(values, H, t))
    correction = classical_correction_array(values, H)
    weighted_correction = correction * np.abs(values) ** 2

    def d1(array: np.ndarray) -> np.ndarray:
        return partial_array(array, grid, observed, scheme)

    full = {
        "psi": values,
        "d2_psi": d2_psi,
        "d22_psi": d22_psi,
        "d2_rho": d2_rho,
        "d2_current": d2_current,
        "current2": current2,
        "p2_density": p2_density,
        "d1_p2_density": d1(p2_density),
        "weighted_energy": weighted_energy,
        "d1_weighted_energy": d1(weighted_energy),
        "weighted_correction": weighted_correction,
        "d1_weighted_correction": d1(weighted_correction),
        "potential": H.potential(t),
        "correction": correction,
    }
    cut = {name: sample_along(array, grid, conditioning, q2) for name, array in full.items()}
    return ConditionalSlice(grid.sub_grid([observed]), H.hbar, (m1, m2), float(t), float(q1), float(q2), float(q2_dot), **cut)


@dataclass
class ConditionalSeries:
    """Conditional slices at uniformly spaced times along one configuration path."""

    hamiltonian: Hamiltonian
    mode: Mode
    path: CurrentPath
    slices: List[ConditionalSlice] = field(default_factory=list)
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.slices)

    @property
    def grid(self) -> Grid:
        return self.slices[0].grid

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.slices])

    @property
    def q2(self) -> np.ndarray:
        return np.array([s.q2 for s in self.slices])

    @property
    def q2_dot(self) -> np.ndarray:
        return np.array([s.q2_dot for s in self.slices])

    def stack(self, name: str) -> np.ndarray:
        return np.stack([getattr(s, name) for s in self.slices])


def _check_uniform(times: Sequence[float]) -> float:
    steps = np.diff(np.asarray(times, dtype=float))
    if len(steps) == 0 or np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ConfigurationError("conditional slicing needs at least two uniformly spaced snapshots")
    return float(steps[0])


def conditioning_path(series: MadelungSeries, start: Sequence[float], substeps: int = 4) -> CurrentPath:
    """Configuration-space path along the full current velocity, ``substeps`` RK4 steps per snapshot interval."""
    if substeps < 1:
        raise ConfigurationError("substeps must be at least 1")
    interval = _check_uniform(series.times)
    return current_trajectory(series, np.asarray(start, dtype=float), series.times[0], series.times[-1], interval / substeps)


def slice_conditional(evolution: Evolution, start: Sequence[float], substeps: int = 4, path: Optional[CurrentPath] = None) -> ConditionalSeries:
    """Cut every snapshot of a two-particle evolution along the path starting at ``start``.

    The conditioning path follows ``dq/dt = v(q, t)`` of the full state, so
    ``q2(t)`` is particle 2's deterministic trajectory. A global rest-energy
    phase is removed from every snapshot before cutting. A path that leaves the
    grid truncates the series at its last interior snapshot.
    """
    H = evolution.hamiltonian
    observed, conditioning = pair_axes(H)
    times = [float(t) for t in evolution.times]
    _check_uniform(times)
    series = MadelungSeries.from_snapshots(evolution.snapshots, times, H)
    if path is None:
        path = conditioning_path(series, start, substeps)
    velocity = series_velocity(series)

    result = ConditionalSeries(H, evolution.schedule.mode, path, truncated=path.exited)
    for t, psi in zip(times, evolution.snapshots):
        matches = np.flatnonzero(np.isclose(path.times, t, rtol=0.0, atol=1e-9 * max(1.0, abs(t))))
        if matches.size == 0:
            if not path.exited:
                raise ConfigurationError(f"conditioning path has no point at snapshot time {t}")
            break
        point = np.asarray(path.positions[matches[0]])
        values = psi.values
        if H.include_rest_energy:
            values = values * np.exp(1j * H.rest_energy * t / H.hbar)
        q2_dot = float(velocity(point[None, :], t)[0, conditioning])
        result.slices.append(cut_state(values, H, t, point[observed], point[conditioning], q2_dot))
    if result.truncated:
        logger.warning("conditioning path left the grid; kept %d of %d snapshots", len(result), len(times))
    if len(result) < 2:
        raise ConfigurationError("fewer than two conditional slices; the path left the grid too early")
    logger.info("cut %d conditional slices along q2 from %.4g to %.4g", len(result), result.q2[0], result.q2[-1])
    return result
