"""Hydrodynamic decomposition of a wavefunction."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from lattice import ComplexField, RealField, VectorField, laplacian_array, partial_array
from propagator import DENSITY_FLOOR, Hamiltonian

DensityLike = Union[RealField, np.ndarray]


def default_scheme(grid) -> str:
    return "spectral" if grid.all_periodic else "central"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class MadelungFields:
    """Density, osmotic potential and per-axis velocities of one snapshot.

    ``current`` is ``rho v`` and ``osmotic_flux`` is ``nu grad(rho)``; both are
    formed without dividing by the density, so flux identities hold to rounding
    even next to nodes. ``floored`` marks cells below the density floor, where
    ``v``, ``u``, ``R`` and the quantum kinetic are evaluated on the floor value.
    """

    hamiltonian: Hamiltonian = field(repr=False)
    t: float
    scheme: str
    rho: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    current: np.ndarray = field(repr=False)
    osmotic_flux: np.ndarray = field(repr=False)
    phase_gradient: np.ndarray = field(repr=False)
    quantum_kinetic: np.ndarray = field(repr=False)
    floored: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("rho", "R", "v", "u", "current", "osmotic_flux", "phase_gradient", "quantum_kinetic", "floored"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def grid(self):
        return self.hamiltonian.grid

    @property
    def b(self) -> np.ndarray:
        """Mean forward drift ``v + u``."""
        return self.v + self.u

    @property
    def b_star(self) -> np.ndarray:
        """Mean backward drift ``v - u``."""
        return self.v - self.u

    @property
    def canonical_momentum(self) -> np.ndarray:
        """``m v + e A / c`` per axis, i.e. ``grad S``."""
        return self.phase_gradient

    @property
    def kinetic_momentum(self) -> np.ndarray:
        masses = self.hamiltonian.axis_masses.reshape((-1,) + (1,) * self.grid.dims)
        return masses * self.v

    @property
    def floored_count(self) -> int:
        return int(np.count_nonzero(self.floored))


def density_floor(rho: np.ndarray) -> float:
    return DENSITY_FLOOR * float(np.max(rho))


def quantum_kinetic(rho: DensityLike, H: Hamiltonian, scheme: Optional[str] = None) -> np.ndarray:
    """``-(hbar^2 / 2 m_i) lap_i sqrt(rho) / sqrt(rho)`` stacked per particle.

    Floored cells are set to zero.
    """
    rho = rho.values if isinstance(rho, RealField) else np.asarray(rho, dtype=float)
    scheme = scheme or default_scheme(H.grid)
    floored = rho <= density_floor(rho)
    amplitude = np.sqrt(np.maximum(rho, 0.0))
    safe = np.where(floored, 1.0, amplitude)
    blocks = []
    for p in H.particles:
        term = -(H.hbar**2) / (2.0 * p.mass) * laplacian_array(amplitude, H.grid, scheme, axes=p.axes) / safe
        term[floored] = 0.0
        blocks.append(term)
    return np.stack(blocks)


def decompose(psi: Union[ComplexField, np.ndarray], H: Hamiltonian, t: float = 0.0, scheme: Optional[str] = None) -> MadelungFields:
    """Madelung fields of ``psi`` under ``H`` at time ``t``.

    ``v_a = (hbar/m_a) Im(psi* d_a psi)/rho - (e_a/m_a c) A_a`` and
    ``u_a = (hbar/2 m_a) d_a rho / rho`` with ``rho`` floored at
    ``1e-12 * max(rho)``; ``R = (hbar/2) ln max(rho, floor)``.
    """
    values = psi.values if isinstance(psi, ComplexField) else np.asarray(psi, dtype=complex)
    grid = H.grid
    scheme = scheme or default_scheme(grid)
    rho = np.abs(values) ** 2
    floor = density_floor(rho)
    floored = rho <= floor
    rho_f = np.maximum(rho, floor)

    masses = H.axis_masses
    nu = H.diffusion_coefficients()
    eA = H.coupling(t)
    current, osmotic, phase_gradient = [], [], []
    for a in range(grid.dims):
        overlap = np.conj(values) * partial_array(values, grid, a, scheme)
        momentum_density = H.hbar * overlap.imag
        phase_gradient.append(momentum_density / rho_f)
        j = momentum_density / masses[a]
        if eA is not None:
            j = j - eA[a] * rho / masses[a]
        current.append(j)
        # d rho = 2 Re(psi* d psi)
        osmotic.append(nu[a] * 2.0 * overlap.real)

    current = np.stack(current)
    osmotic = np.stack(osmotic)
    return MadelungFields(
        hamiltonian=H,
        t=t,
        scheme=scheme,
        rho=rho,
        R=0.5 * H.hbar * np.log(rho_f),
        v=current / rho_f,
        u=osmotic / rho_f,
        current=current,
        osmotic_flux=osmotic,
        phase_gradient=np.stack(phase_gradient),
        quantum_kinetic=quantum_kinetic(rho, H, scheme),
        floored=floored,
    )


@dataclass
class MadelungSeries:
    """Madelung fields of consecutive, uniformly spaced snapshots."""

    times: List[float]
    fields: List[MadelungFields]

    @classmethod
    def from_snapshots(cls, snapshots: Sequence[ComplexField], times: Sequence[float], H: Hamiltonian, scheme: Optional[str] = None) -> "MadelungSeries":
        times = [float(t) for t in times]
        return cls(times, [decompose(psi, H, t, scheme) for psi, t in zip(snapshots, times)])

    @classmethod
    def from_evolution(cls, evolution, scheme: Optional[str] = None) -> "MadelungSeries":
        return cls.from_snapshots(evolution.snapshots, evolution.times, evolution.hamiltonian, scheme)

    def __len__(self) -> int:
        return len(self.fields)

    @property
    def hamiltonian(self) -> Hamiltonian:
        return self.fields[0].hamiltonian

    @property
    def grid(self):
        return self.hamiltonian.grid

    @property
    def scheme(self) -> str:
        return self.fields[0].scheme

    def stack(self, name: str) -> np.ndarray:
        return np.stack([getattr(f, name) for f in self.fields])

    @property
    def floored(self) -> np.ndarray:
        return self.stack("floored")


def probability_current(psi: Union[ComplexField, np.ndarray], H: Hamiltonian, t: float = 0.0) -> VectorField:
    """``rho v`` per axis."""
    return VectorField(H.grid, decompose(psi, H, t).current)


def canonical_momentum(psi: Union[ComplexField, np.ndarray], H: Hamiltonian, t: float = 0.0) -> VectorField:
    """``grad S = m v + e A / c`` per axis."""
    return VectorField(H.grid, decompose(psi, H, t).canonical_momentum)
