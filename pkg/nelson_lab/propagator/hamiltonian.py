"""N-particle Hamiltonian on a configuration-space grid."""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from errors import ConfigurationError
from lattice import Grid

# Atomic units: hbar = m_e = e = 1.
SPEED_OF_LIGHT = 137.035999084

PotentialSource = Union[np.ndarray, Callable[[float], np.ndarray], None]


@dataclass(frozen=True)
class Particle:
    """One particle and the grid axes carrying its coordinates."""

    mass: float = 1.0
    charge: float = 0.0
    axes: Tuple[int, ...] = (0,)

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigurationError(f"particle mass must be positive, got {self.mass}")
        object.__setattr__(self, "axes", tuple(int(a) for a in self.axes))


@dataclass(frozen=True)
class Hamiltonian:
    """Minimal-coupling Hamiltonian summed over particles.

    ``external`` is the sum over particles of ``m_i*Phi_g + e_i*Phi_e`` sampled on
    the full grid (static array or callable of time). ``vector_potential`` holds
    one component per grid axis; the component on an axis belongs to the particle
    owning that axis.
    """

    grid: Grid
    particles: Tuple[Particle, ...]
    hbar: float = 1.0
    c: float = SPEED_OF_LIGHT
    external: PotentialSource = field(default=None, repr=False)
    interaction: Optional[np.ndarray] = field(default=None, repr=False)
    vector_potential: PotentialSource = field(default=None, repr=False)
    include_rest_energy: bool = False

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))
        owned = sorted(a for p in self.particles for a in p.axes)
        if owned != list(range(self.grid.dims)):
            raise ConfigurationError(f"particle axes {owned} must cover grid axes 0..{self.grid.dims - 1} exactly once")
        if not self.hbar > 0 or not self.c > 0:
            raise ConfigurationError("hbar and c must be positive")
        for name in ("external", "interaction"):
            value = getattr(self, name)
            if isinstance(value, np.ndarray) and value.shape != self.grid.shape:
                raise ConfigurationError(f"{name} potential shape {value.shape} does not match grid {self.grid.shape}")
        if isinstance(self.vector_potential, np.ndarray):
            expected = (self.grid.dims,) + self.grid.shape
            if self.vector_potential.shape not in (expected, (self.grid.dims,)):
                raise ConfigurationError(f"vector potential shape must be {expected} or ({self.grid.dims},)")

    @property
    def time_independent(self) -> bool:
        return not callable(self.external) and not callable(self.vector_potential)

    @property
    def axis_masses(self) -> np.ndarray:
        masses = np.empty(self.grid.dims)
        for p in self.particles:
            masses[list(p.axes)] = p.mass
        return masses

    @property
    def axis_charges(self) -> np.ndarray:
        charges = np.empty(self.grid.dims)
        for p in self.particles:
            charges[list(p.axes)] = p.charge
        return charges

    @property
    def rest_energy(self) -> float:
        return sum(p.mass for p in self.particles) * self.c**2

    def diffusion_coefficients(self) -> np.ndarray:
        """nu = hbar / 2m per grid axis."""
        return self.hbar / (2.0 * self.axis_masses)

    def potential(self, t: float = 0.0) -> np.ndarray:
        """Scalar potential energy on the grid, excluding the rest-energy constant."""
        total = np.zeros(self.grid.shape)
        if self.external is not None:
            total = total + (self.external(t) if callable(self.external) else self.external)
        if self.interaction is not None:
            total = total + self.interaction
        return total

    def vector_potential_at(self, t: float = 0.0) -> Optional[np.ndarray]:
        if self.vector_potential is None:
            return None
        A = self.vector_potential(t) if callable(self.vector_potential) else self.vector_potential
        A = np.asarray(A, dtype=float)
        if A.ndim == 1:
            A = A.reshape((self.grid.dims,) + (1,) * self.grid.dims)
        return np.broadcast_to(A, (self.grid.dims,) + self.grid.shape)

    def coupling(self, t: float = 0.0) -> Optional[np.ndarray]:
        """Per-axis ``(e/c) A`` field, or None without a vector potential."""
        A = self.vector_potential_at(t)
        if A is None:
            return None
        charges = self.axis_charges.reshape((-1,) + (1,) * self.grid.dims)
        return charges * A / self.c

    def uniform_coupling(self, t: float = 0.0) -> np.ndarray:
        """Per-axis ``(e/c) A`` for a spatially uniform vector potential.

        Raises:
            ConfigurationError: if the vector potential varies in space.
        """
        eA = self.coupling(t)
        if eA is None:
            return np.zeros(self.grid.dims)
        flat = eA.reshape(self.grid.dims, -1)
        spread = np.max(np.abs(flat - flat[:, :1]))
        if spread > 1e-12 * max(1.0, np.max(np.abs(flat))):
            raise ConfigurationError("spectral propagation supports only a spatially uniform vector potential")
        return flat[:, 0].copy()

    def kinetic_symbol(self, t: float = 0.0) -> np.ndarray:
        """``sum_a (hbar k_a - e_a A_a / c)^2 / 2 m_a`` on the FFT mesh."""
        shift = self.uniform_coupling(t)
        masses = self.axis_masses
        total = np.zeros(self.grid.shape)
        for a, k in enumerate(self.grid.kmesh()):
            total = total + (self.hbar * k - shift[a]) ** 2 / (2.0 * masses[a])
        return total

    def with_rest_energy(self, include: bool) -> "Hamiltonian":
        return Hamiltonian(
            self.grid, self.particles, self.hbar, self.c, self.external, self.interaction, self.vector_potential, include
        )

    def with_external(self, external: PotentialSource) -> "Hamiltonian":
        return Hamiltonian(
            self.grid, self.particles, self.hbar, self.c, external, self.interaction, self.vector_potential,
            self.include_rest_energy,
        )


def hamiltonian_matrix(H: Hamiltonian, t: float = 0.0, extra_potential: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """Sparse Hermitian finite-difference Hamiltonian with Peierls phases.

    On each axis the hopping between nodes j and j+1 carries the phase
    ``theta = (e/hbar c) A(x_{j+1/2}) h``, which discretizes
    ``(-i hbar d/dx - e A / c)^2 / 2m`` gauge covariantly. Non-periodic axes use
    homogeneous Dirichlet closure.
    """
    grid = H.grid
    if grid.dims > 2:
        raise ConfigurationError("the finite-difference Hamiltonian supports at most two grid axes")
    size = int(np.prod(grid.shape))
    index = np.arange(size).reshape(grid.shape)
    eA = H.coupling(t)
    masses = H.axis_masses

    diagonal = H.potential(t).ravel().astype(complex)
    if extra_potential is not None:
        diagonal = diagonal + extra_potential.ravel()
    rows, cols, data = [], [], []
    for a in range(grid.dims):
        h = grid.spacing[a]
        hop = H.hbar**2 / (2.0 * masses[a] * h**2)
        diagonal = diagonal + 2.0 * hop
        ahead = np.roll(index, -1, axis=a)
        if eA is None:
            theta = np.zeros(grid.shape)
        else:
            midpoint = 0.5 * (eA[a] + np.roll(eA[a], -1, axis=a))
            theta = midpoint * h / H.hbar
        src, dst, th = index, ahead, theta
        if not grid.periodic[a]:
            keep = [slice(None)] * grid.dims
            keep[a] = slice(0, grid.points[a] - 1)
            src, dst, th = index[tuple(keep)], ahead[tuple(keep)], theta[tuple(keep)]
        src, dst, th = src.ravel(), dst.ravel(), th.ravel()
        forward = -hop * np.exp(-1j * th)
        rows.extend([src, dst])
        cols.extend([dst, src])
        data.extend([forward, np.conj(forward)])

    rows.append(np.arange(size))
    cols.append(np.arange(size))
    data.append(diagonal)
    matrix = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )
    return matrix.tocsr()
