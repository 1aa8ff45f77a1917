"""Two-term pair states and the reduced-mass picture of a two-body problem."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from circulation import CirculationResult, LoopPath, circle_loop, circulate
from errors import ConfigurationError, DegenerateInputError
from lattice import ComplexField, Grid
from madelung import MadelungFields, decompose, density_floor
from propagator import Hamiltonian, Particle
from propagator.potentials import harmonic

logger = logging.getLogger(__name__)

Interaction = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Fraction of the summed term norms below which a superposition counts as cancelled.
_CANCELLATION = 1e-14


@dataclass(frozen=True)
class PairState:
    """Normalized ``N [a(q1) b(q2) + c(q1) d(q2)]`` and its closed-form density.

    ``rho_formula`` writes the density through the factor moduli and phases,
    ``N^2 [|a1 b2|^2 + |c1 d2|^2 + 2 |a1 b2 c1 d2| cos(theta_a1 + theta_b2 - theta_c1 - theta_d2)]``,
    and ``interference`` is its cosine term alone.
    """

    psi: ComplexField
    norm: float
    rho_formula: np.ndarray = field(repr=False)
    interference: np.ndarray = field(repr=False)
    symmetric: bool = True

    @property
    def grid(self) -> Grid:
        return self.psi.grid

    def fields(self, H: Hamiltonian, t: float = 0.0) -> MadelungFields:
        """Density, phase gradient and osmotic potential of the pair."""
        return decompose(self.psi, H, t)


def entangled_pair_state(
    grid: Grid,
    psi_a: np.ndarray,
    psi_b: np.ndarray,
    symmetrize: bool = True,
    psi_c: Optional[np.ndarray] = None,
    psi_d: Optional[np.ndarray] = None,
) -> PairState:
    """Pair state from one-particle wavefunctions sampled on a shared 1D axis.

    With ``symmetrize`` the second term is the exchanged product
    ``b(q1) a(q2)``; otherwise ``psi_c`` and ``psi_d`` supply a general second
    term ``c(q1) d(q2)``.

    Raises:
        ConfigurationError: if the grid is not a square pair of identical axes or
            the factors do not match it.
        DegenerateInputError: if the two terms cancel.
    """
    if grid.dims != 2 or grid.extents[0] != grid.extents[1] or grid.points[0] != grid.points[1]:
        raise ConfigurationError("pair states need two identical axes")
    if symmetrize:
        psi_c, psi_d = psi_b, psi_a
    elif psi_c is None or psi_d is None:
        raise ConfigurationError("a general two-term state needs psi_c and psi_d")
    factors = [np.asarray(f, dtype=complex) for f in (psi_a, psi_b, psi_c, psi_d)]
    if any(f.shape != (grid.points[0],) for f in factors):
        raise ConfigurationError(f"one-particle factors must have {grid.points[0]} samples")
    a, b, c, d = factors

    first = np.multiply.outer(a, b)
    second = np.multiply.outer(c, d)
    values = first + second
    weight = np.sum(np.abs(values) ** 2) * grid.cell_volume
    scale = (np.sum(np.abs(first) ** 2) + np.sum(np.abs(second) ** 2)) * grid.cell_volume
    if not weight > _CANCELLATION * scale:
        raise DegenerateInputError("the two terms of the pair state cancel")
    norm = 1.0 / np.sqrt(weight)

    moduli = np.abs(first) * np.abs(second)
    phase = np.add.outer(np.angle(a), np.angle(b)) - np.add.outer(np.angle(c), np.angle(d))
    interference = 2.0 * norm**2 * moduli * np.cos(phase)
    rho_formula = norm**2 * (np.abs(first) ** 2 + np.abs(second) ** 2) + interference
    logger.debug("pair state norm %.6g, peak interference %.3e", norm, float(np.max(np.abs(interference))))
    return PairState(ComplexField(grid, norm * values), float(norm), rho_formula, interference, symmetrize)


def exchange_asymmetry(psi: ComplexField) -> float:
    """``max|psi(q1, q2) - psi(q2, q1)| / max|psi|`` on a square pair grid."""
    values = psi.values
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ConfigurationError("exchange needs a square two-axis grid")
    return float(np.max(np.abs(values - values.T)) / np.max(np.abs(values)))


@dataclass(frozen=True)
class ReducedMass:
    """Centre-of-mass and relative coordinates of two particles.

    ``Q = (m1 q1 + m2 q2) / M`` and ``r = q1 - q2``; the relative problem
    carries ``mu = m1 m2 / M`` and ``V_rel(r) = V_int(r, 0)``.
    """

    m1: float
    m2: float
    interaction: Optional[Interaction] = field(default=None, repr=False)

    @property
    def total(self) -> float:
        return self.m1 + self.m2

    @property
    def mu(self) -> float:
        return self.m1 * self.m2 / self.total

    def relative_potential(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.interaction is None:
            return np.zeros_like(r)
        return np.asarray(self.interaction(r, np.zeros_like(r)), dtype=float)

    def to_relative(self, q1, q2) -> Tuple[np.ndarray, np.ndarray]:
        q1, q2 = np.asarray(q1, dtype=float), np.asarray(q2, dtype=float)
        return (self.m1 * q1 + self.m2 * q2) / self.total, q1 - q2

    def from_relative(self, Q, r) -> Tuple[np.ndarray, np.ndarray]:
        Q, r = np.asarray(Q, dtype=float), np.asarray(r, dtype=float)
        return Q + self.m2 / self.total * r, Q - self.m1 / self.total * r

    def relative_momenta(self, p1, p2) -> Tuple[np.ndarray, np.ndarray]:
        """``(P, p_r) = (p1 + p2, (m2 p1 - m1 p2) / M)``, conjugate to ``(Q, r)``."""
        p1, p2 = np.asarray(p1, dtype=float), np.asarray(p2, dtype=float)
        return p1 + p2, (self.m2 * p1 - self.m1 * p2) / self.total

    def pair_hamiltonian(self, grid: Grid, omega: Optional[float] = None, hbar: float = 1.0) -> Hamiltonian:
        """Two 1D particles on ``(q1, q2)`` with the interaction and an optional common trap."""
        q1, q2 = grid.mesh()
        interaction = None if self.interaction is None else np.asarray(self.interaction(q1, q2), dtype=float)
        external = None if omega is None else harmonic(grid, (self.m1, self.m2), omega)
        return Hamiltonian(grid, (Particle(self.m1, axes=(0,)), Particle(self.m2, axes=(1,))), hbar, external=external, interaction=interaction)

    def relative_hamiltonian(self, grid: Grid, omega: Optional[float] = None, hbar: float = 1.0) -> Hamiltonian:
        """The same system on ``(Q, r)``: masses ``M`` and ``mu``, potential ``V_rel(r)``.

        A common trap ``omega`` separates into ``M omega^2 Q^2 / 2 + mu omega^2 r^2 / 2``.
        """
        _, r = grid.mesh()
        external = None if omega is None else harmonic(grid, (self.total, self.mu), omega)
        interaction = None if self.interaction is None else self.relative_potential(r)
        return Hamiltonian(grid, (Particle(self.total, axes=(0,)), Particle(self.mu, axes=(1,))), hbar, external=external, interaction=interaction)

    def pair_loop(self, relative_loop: LoopPath) -> LoopPath:
        """Image in the ``(q1, q2)`` plane of a loop drawn in the ``(Q, r)`` plane."""
        q1, q2 = self.from_relative(relative_loop.vertices[:, 0], relative_loop.vertices[:, 1])
        return LoopPath(np.stack([q1, q2], axis=-1), (0, 1), f"{relative_loop.name}-pair")


def _check_translation_invariant(interaction: Interaction) -> None:
    probe = np.linspace(-3.0, 3.0, 7)
    q1, q2 = np.meshgrid(probe, probe + 0.25, indexing="ij")
    reference = np.asarray(interaction(q1, q2), dtype=float)
    for shift in (0.37, -1.1):
        shifted = np.asarray(interaction(q1 + shift, q2 + shift), dtype=float)
        if not np.allclose(shifted, reference, rtol=1e-10, atol=1e-12):
            raise ConfigurationError("interaction is not translation invariant")
    if not np.allclose(np.asarray(interaction(q2, q1), dtype=float), reference, rtol=1e-10, atol=1e-12):
        raise ConfigurationError("interaction must depend on |q1 - q2| only")


def reduced_mass_transform(m1: float, m2: float, interaction: Optional[Interaction] = None) -> ReducedMass:
    """Reduced-mass description of two particles interacting through ``V_int(q1, q2)``.

    Raises:
        ConfigurationError: for non-positive masses or an interaction that is
            not a function of ``|q1 - q2|``.
    """
    if not (m1 > 0 and m2 > 0):
        raise ConfigurationError("both masses must be positive")
    if interaction is not None:
        _check_translation_invariant(interaction)
    transform = ReducedMass(float(m1), float(m2), interaction)
    logger.debug("reduced mass %.12g for m1=%g, m2=%g", transform.mu, m1, m2)
    return transform


def softened_interaction(e1: float, e2: float, softening: float) -> Interaction:
    """``e1 e2 / sqrt((q1 - q2)^2 + a^2)`` as a callable for :func:`reduced_mass_transform`."""
    if not softening > 0:
        raise ConfigurationError(f"Coulomb softening must be positive, got {softening}")
    return lambda q1, q2: e1 * e2 / np.sqrt((np.asarray(q1) - np.asarray(q2)) ** 2 + softening**2)


def relative_phase_lock(transform: ReducedMass, grid: Grid, ell: int, omega: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """``exp(i ell theta)`` with ``theta`` the angle in mass-scaled ``(Q, r)`` coordinates.

    For a common harmonic trap this is the exact phase of the lowest relative
    state carrying ``ell`` quanta of circulation.
    """
    Q, r = grid.mesh()
    xi = np.sqrt(transform.total * omega / hbar) * Q
    eta = np.sqrt(transform.mu * omega / hbar) * r
    return np.exp(1j * ell * np.arctan2(eta, xi))


def circulation_sectors(
    transform: ReducedMass,
    pair_psi: ComplexField,
    pair_hamiltonian: Hamiltonian,
    relative_psi: ComplexField,
    relative_hamiltonian: Hamiltonian,
    radius: float,
    vertices: int = 256,
) -> Tuple[CirculationResult, CirculationResult]:
    """Canonical circulation of the same loop seen in both coordinatizations.

    The loop is a circle of ``radius`` about the origin of the ``(Q, r)`` plane;
    its image under :meth:`ReducedMass.from_relative` is integrated against the
    two-particle state. Returns ``(pair, relative)``.
    """
    loop = circle_loop((0.0, 0.0), radius, vertices=vertices, name=f"relative-r{radius:g}")
    results = []
    for psi, H, path in ((pair_psi, pair_hamiltonian, transform.pair_loop(loop)), (relative_psi, relative_hamiltonian, loop)):
        fields = decompose(psi, H)
        floored = fields.rho <= density_floor(fields.rho)
        results.append(circulate(fields.canonical_momentum, path, H.grid, H.hbar, floored))
    pair, relative = results
    logger.info("circulation: pair %.6f h, relative %.6f h", pair.quanta, relative.quanta)
    return pair, relative
