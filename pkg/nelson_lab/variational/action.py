"""Ensemble-averaged stochastic action and its response to smooth path variations."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from diffusion_ensemble import TrajectoryBundle
from errors import ConfigurationError, OutOfDomainError
from lattice import Grid, interpolate_array
from madelung import MadelungSeries
from propagator import Hamiltonian

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = tuple(np.geomspace(1e-3, 1e-1, 7))
MIN_FIT_POINTS = 6
BUMP_SHAPES = ("shift", "dilation")

Drift = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class Bump:
    """Path displacement ``delta q = eta(t) F(q)`` with ``eta = sin^2(k pi (t - t0) / (t1 - t0))``.

    ``shape="shift"`` moves every path by the same vector, ``F(q) = direction``.
    ``shape="dilation"`` stretches each path about ``center``,
    ``F(q) = direction * (q - center)``, so the displacement depends on where
    the path is. Both fields are affine in ``q``: the Jacobian is the diagonal
    ``stretch`` and there is no second-derivative term.

    ``eta`` and its rate vanish at ``t0`` and ``t1`` and outside that window, so
    every varied path keeps its end points.
    """

    t0: float
    t1: float
    direction: np.ndarray = field(repr=False)
    bumps: int = 1
    shape: str = "shift"
    center: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ConfigurationError(f"bump window [{self.t0}, {self.t1}] is empty")
        if self.bumps < 1:
            raise ConfigurationError("a bump needs at least one lobe")
        if self.shape not in BUMP_SHAPES:
            raise ConfigurationError(f"bump shape must be one of {list(BUMP_SHAPES)}, got {self.shape!r}")
        direction = np.array(self.direction, dtype=float)
        if direction.ndim != 1 or not np.any(direction):
            raise ConfigurationError("bump direction must be a non-zero vector")
        center = np.zeros_like(direction) if self.center is None else np.array(self.center, dtype=float)
        if center.shape != direction.shape:
            raise ConfigurationError(f"bump center has shape {center.shape}, direction {direction.shape}")
        for array in (direction, center):
            array.setflags(write=False)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "center", center)

    def _phase(self, t: np.ndarray) -> np.ndarray:
        return self.bumps * np.pi * (np.asarray(t, dtype=float) - self.t0) / (self.t1 - self.t0)

    def _window(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (t >= self.t0) & (t <= self.t1)

    def profile(self, t) -> np.ndarray:
        return np.where(self._window(t), np.sin(self._phase(t)) ** 2, 0.0)

    def rate(self, t) -> np.ndarray:
        scale = self.bumps * np.pi / (self.t1 - self.t0)
        return np.where(self._window(t), scale * np.sin(2.0 * self._phase(t)), 0.0)

    @property
    def stretch(self) -> np.ndarray:
        """Diagonal of ``dF/dq``."""
        if self.shape == "shift":
            return np.zeros_like(self.direction)
        return self.direction

    def field(self, positions: np.ndarray) -> np.ndarray:
        """``F`` at each position, same shape as ``positions``."""
        positions = np.asarray(positions, dtype=float)
        if self.shape == "shift":
            return np.broadcast_to(self.direction, positions.shape)
        return self.direction * (positions - self.center)

    def displacement(self, t: float, positions: np.ndarray) -> np.ndarray:
        """``eta(t) F(q)`` for walkers at ``positions`` at one time."""
        return self.profile(t) * self.field(positions)

    def velocity(self, t: float, positions: np.ndarray, drift: np.ndarray) -> np.ndarray:
        """Rate of the displacement along paths moving with mean velocity ``drift``.

        ``eta'(t) F(q) + eta(t) stretch * drift``. With the forward drift this is
        the forward mean derivative of the displacement, with the backward drift
        the backward one.
        """
        return self.rate(t) * self.field(positions) + self.profile(t) * self.stretch * np.asarray(drift, dtype=float)


def smooth_bump(
    bundle: TrajectoryBundle,
    axes: Sequence[int],
    bumps: int = 1,
    shape: str = "shift",
    center: Optional[Sequence[float]] = None,
) -> Bump:
    """Unit bump over the whole span of ``bundle`` acting on the given configuration axes."""
    direction = np.zeros(bundle.dims)
    direction[list(axes)] = 1.0
    return Bump(bundle.times[0], bundle.times[-1], direction, bumps, shape, center)


def particle_bump(H: Hamiltonian, bundle: TrajectoryBundle, particle: int, bumps: int = 1, shape: str = "shift") -> Bump:
    """Bump that moves only the axes of one particle."""
    if not 0 <= particle < len(H.particles):
        raise ConfigurationError(f"no particle {particle} in a {len(H.particles)}-particle Hamiltonian")
    return smooth_bump(bundle, H.particles[particle].axes, bumps, shape)


def mirrored_bundle(bundle: TrajectoryBundle, axes: Optional[Sequence[int]] = None, center: float = 0.0) -> TrajectoryBundle:
    """Bundle extended by the reflections ``2 center - q`` of every path on ``axes``.

    For a drift that is odd about ``center`` on those axes, the reflected path
    is the one driven by the negated noise, so the pair forms antithetic samples.
    """
    axes = list(range(bundle.dims)) if axes is None else list(axes)
    mirrored = TrajectoryBundle(bundle.stride, list(bundle.times), clamped=bundle.clamped, reflected=bundle.reflected)
    for frame in bundle.frames:
        image = np.array(frame)
        image[:, axes] = 2.0 * center - image[:, axes]
        mirrored.frames.append(np.concatenate([frame, image]))
    return mirrored


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise ConfigurationError("bundle times must be strictly increasing")
    weights = np.zeros(len(times))
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


def _inside(grid: Grid, positions: np.ndarray) -> np.ndarray:
    """Paths (axis 1 of ``(F, M, dims)``) that stay within every non-periodic extent."""
    inside = np.ones(positions.shape[1], dtype=bool)
    for a in range(grid.dims):
        if grid.periodic[a]:
            continue
        nodes = grid.axis(a)
        coordinate = positions[..., a]
        inside &= np.all((coordinate >= nodes[0]) & (coordinate <= nodes[-1]), axis=0)
    return inside


class SeriesSampler:
    """Per-axis fields of a Madelung series read at walker positions, linear in time between snapshots."""

    def __init__(self, series: MadelungSeries, *names: str):
        self.grid = series.grid
        self.times = np.asarray(series.times)
        self.stacks = {name: series.stack(name) for name in names}

    def _sample(self, name: str, index: int, points: np.ndarray) -> np.ndarray:
        values = self.stacks[name][index]
        return np.stack([interpolate_array(values[a], self.grid, points) for a in range(self.grid.dims)], axis=-1)

    def __call__(self, name: str, points: np.ndarray, t: float) -> np.ndarray:
        times = self.times
        if t <= times[0] or len(times) == 1:
            return self._sample(name, 0, points)
        if t >= times[-1]:
            return self._sample(name, len(times) - 1, points)
        right = int(np.searchsorted(times, t, side="right"))
        left = right - 1
        weight = (t - times[left]) / (times[right] - times[left])
        return (1.0 - weight) * self._sample(name, left, points) + weight * self._sample(name, right, points)


@dataclass
class ActionEstimate:
    """Monte Carlo estimate of the time-symmetric action over the kept paths."""

    value: float
    path_values: np.ndarray = field(repr=False)
    dropped: int = 0

    @property
    def kept(self) -> int:
        return len(self.path_values)

    @property
    def stderr(self) -> float:
        if self.kept < 2:
            return float("nan")
        return float(np.std(self.path_values, ddof=1) / np.sqrt(self.kept))


def _path_lagrangians(
    bundle: TrajectoryBundle,
    series: MadelungSeries,
    H: Hamiltonian,
    keep: np.ndarray,
    bump: Optional[Bump],
    epsilon: float,
    drift: Optional[Drift],
) -> np.ndarray:
    grid = H.grid
    times = np.asarray(bundle.times)
    masses = H.axis_masses
    sampler = SeriesSampler(series, "v", "u")
    varied = bump is not None and epsilon != 0.0

    lagrangian = np.empty((len(times), int(np.count_nonzero(keep))))
    for n, t in enumerate(times):
        q = bundle.frames[n][keep]
        u = sampler("u", q, t)
        v = sampler("v", q, t) if drift is None else drift(q, t) - u
        moved = q
        if varied:
            moved = grid.wrap(q + epsilon * bump.displacement(t, q))
            v = v + epsilon * bump.velocity(t, q, v)
            u = u + epsilon * bump.profile(t) * bump.stretch * u
        L = 0.5 * np.sum(masses * v**2, axis=-1) + 0.5 * np.sum(masses * u**2, axis=-1)
        L -= interpolate_array(H.potential(t), grid, moved)
        eA = H.coupling(t)
        if eA is not None:
            for a in range(grid.dims):
                L += interpolate_array(eA[a], grid, moved) * v[:, a]
        lagrangian[n] = L
    return lagrangian


def discretized_action(
    bundle: TrajectoryBundle,
    series: MadelungSeries,
    H: Optional[Hamiltonian] = None,
    bump: Optional[Bump] = None,
    epsilon: float = 0.0,
    drift: Optional[Drift] = None,
) -> ActionEstimate:
    """``J = E[sum_t L(q(t), t) dt]`` with the field-form Lagrangian.

    ``L = sum_a [m_a v_a^2 / 2 + m_a u_a^2 / 2 + (e_a / c) A_a v_a] - V`` with
    the osmotic velocity ``u`` read from ``series`` along each path and the time
    sum taken with trapezoid weights. The current velocity is ``drift - u`` for
    the forward ``drift`` the bundle was generated with, or the series ``v``
    when no drift is given.

    With a ``bump`` every path is displaced by ``epsilon * eta(t) F(q)`` and the
    mean derivatives of the displaced process follow from those of the original
    one: ``v`` gains ``eta' F + eta stretch * v`` and ``u`` gains
    ``eta stretch * u``, while the potentials are read at the displaced position.
    Paths leaving a non-periodic grid are dropped and counted. Per-path sums and
    the path mean use compensated summation.
    """
    H = H or series.hamiltonian
    if bundle.dims != H.grid.dims:
        raise ConfigurationError(f"bundle has {bundle.dims} coordinates, grid has {H.grid.dims} axes")
    times = np.asarray(bundle.times)
    weights = _trapezoid_weights(times)
    positions = bundle.positions()
    moved = positions
    if bump is not None and epsilon != 0.0:
        moved = positions + epsilon * np.stack([bump.displacement(t, frame) for t, frame in zip(times, positions)])
    keep = _inside(H.grid, positions) & _inside(H.grid, moved)
    dropped = int(keep.size - np.count_nonzero(keep))
    if not np.any(keep):
        raise OutOfDomainError("every path leaves the grid")
    if dropped:
        logger.warning("dropped %d of %d paths that leave the grid", dropped, keep.size)

    lagrangian = _path_lagrangians(bundle, series, H, keep, bump, epsilon, drift)
    weighted = weights[:, None] * lagrangian
    path_values = np.array([math.fsum(column) for column in weighted.T])
    value = math.fsum(path_values) / len(path_values)
    return ActionEstimate(value, path_values, dropped)


@dataclass
class VariationCurve:
    """``dJ(eps) = J(eps) - J(0)`` and the log-log slope fitted over the non-zero points."""

    epsilons: np.ndarray
    delta: np.ndarray
    slope: float
    intercept: float
    baseline: ActionEstimate = field(repr=False)

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"epsilon": self.epsilons, "delta_J": self.delta, "slope": self.slope})


def fit_slope(epsilons: Sequence[float], delta: Sequence[float]):
    """Least-squares slope and intercept of ``log|dJ|`` against ``log eps``.

    Raises:
        ConfigurationError: with fewer than six usable points or less than a decade of ``eps``.
    """
    epsilons = np.asarray(epsilons, dtype=float)
    delta = np.abs(np.asarray(delta, dtype=float))
    usable = (epsilons > 0) & (delta > 0)
    if np.count_nonzero(usable) < MIN_FIT_POINTS:
        raise ConfigurationError(f"slope fit needs at least {MIN_FIT_POINTS} non-zero points")
    if epsilons[usable].max() < 10.0 * epsilons[usable].min():
        raise ConfigurationError("slope fit needs epsilon to span at least a decade")
    fit = stats.linregress(np.log(epsilons[usable]), np.log(delta[usable]))
    return float(fit.slope), float(fit.intercept)


def perturb_and_measure(
    bundle: TrajectoryBundle,
    series: MadelungSeries,
    bump: Bump,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    H: Optional[Hamiltonian] = None,
    drift: Optional[Drift] = None,
) -> VariationCurve:
    """Recompute the action on displaced paths for every ``eps`` and fit the order of ``dJ``.

    ``drift`` is the forward drift the bundle was generated with; leave it out
    for a bundle walked along the series' own ``b``. A slope near 2 means the
    first variation vanishes and the bundle extremizes the action; a slope near
    1 means it does not.

    Raises:
        OutOfDomainError: if a displacement pushes a path off a non-periodic grid.
    """
    H = H or series.hamiltonian
    baseline = discretized_action(bundle, series, H, drift=drift)
    delta = []
    for epsilon in epsilons:
        varied = discretized_action(bundle, series, H, bump, float(epsilon), drift)
        if varied.dropped > baseline.dropped:
            raise OutOfDomainError(f"displacement {epsilon:g} pushes {varied.dropped - baseline.dropped} paths off the grid")
        delta.append(varied.value - baseline.value)
    delta = np.array(delta)
    slope, intercept = fit_slope(epsilons, delta)
    logger.info("action variation: slope %.3f over eps in [%g, %g]", slope, min(epsilons), max(epsilons))
    return VariationCurve(np.asarray(epsilons, dtype=float), delta, slope, intercept, baseline)


@dataclass(frozen=True)
class PartsCheck:
    """Both sides of ``E[sum b . dq dt] = -E[sum q . D*(dq) dt]`` for a displacement vanishing at the ends.

    For the backward check ``b`` and ``D*`` trade places with ``b*`` and ``D``.
    """

    drift_side: float
    position_side: float
    dropped: int = 0

    @property
    def difference(self) -> float:
        return self.drift_side - self.position_side


def integration_by_parts_check(
    bundle: TrajectoryBundle,
    series: MadelungSeries,
    bump: Bump,
    direction: str = "forward",
) -> PartsCheck:
    """Summation by parts of the mean forward (or backward) derivative of position along the bundle.

    The displacement's mean derivative on the position side is taken along the
    opposite drift. The two sides agree to ``O(dt)`` plus Monte Carlo error.
    Paths that wrap a periodic axis between frames are dropped, since their
    recorded positions jump by a period.
    """
    if direction not in ("forward", "backward"):
        raise ConfigurationError(f"direction must be 'forward' or 'backward', got {direction!r}")
    grid = series.grid
    times = np.asarray(bundle.times)
    weights = _trapezoid_weights(times)
    positions = bundle.positions()
    jumps = np.abs(np.diff(positions, axis=0))
    half = 0.5 * np.asarray(grid.lengths)
    keep = ~np.any(jumps > half, axis=(0, 2))
    dropped = int(keep.size - np.count_nonzero(keep))
    if dropped:
        logger.info("dropped %d wrapped paths from the summation-by-parts check", dropped)

    own, opposite = ("b", "b_star") if direction == "forward" else ("b_star", "b")
    sampler = SeriesSampler(series, own, opposite)
    drift_terms, position_terms = [], []
    for n, t in enumerate(times):
        q = positions[n][keep]
        displacement = bump.displacement(t, q)
        rate = bump.velocity(t, q, sampler(opposite, q, t))
        drift_terms.append(weights[n] * math.fsum(np.sum(sampler(own, q, t) * displacement, axis=-1)) / len(q))
        position_terms.append(-weights[n] * math.fsum(np.sum(q * rate, axis=-1)) / len(q))
    return PartsCheck(math.fsum(drift_terms), math.fsum(position_terms), dropped)
