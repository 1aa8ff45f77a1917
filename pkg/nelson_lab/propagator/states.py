"""Initial and closed-form reference states."""

from typing import Sequence, Union

import numpy as np
from scipy.special import eval_hermite, factorial

from errors import ConfigurationError
from lattice import ComplexField, Grid

Coords = Union[float, Sequence[float]]


def _per_axis(grid: Grid, value: Coords) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), (grid.dims,))


def gaussian_packet(grid: Grid, center: Coords = 0.0, sigma: Coords = 1.0, wavenumber: Coords = 0.0, phase: float = 0.0) -> ComplexField:
    """Normalized product Gaussian with ``rho`` width ``sigma`` and mean wavenumber per axis."""
    centers, sigmas, ks = _per_axis(grid, center), _per_axis(grid, sigma), _per_axis(grid, wavenumber)
    if np.any(sigmas <= 0):
        raise ConfigurationError("Gaussian widths must be positive")
    values = np.full(grid.shape, np.exp(1j * phase), dtype=complex)
    for a, x in enumerate(grid.mesh()):
        values *= (2.0 * np.pi * sigmas[a] ** 2) ** -0.25 * np.exp(
            -((x - centers[a]) ** 2) / (4.0 * sigmas[a] ** 2) + 1j * ks[a] * (x - centers[a])
        )
    return ComplexField(grid, values)


def free_gaussian(x: np.ndarray, t: float, center: float = 0.0, sigma: float = 1.0, wavenumber: float = 0.0, hbar: float = 1.0, mass: float = 1.0) -> np.ndarray:
    """Exact free evolution of a 1D Gaussian packet at time ``t``."""
    tau = hbar * t / (2.0 * mass * sigma**2)
    velocity = hbar * wavenumber / mass
    shifted = x - center - velocity * t
    return (
        (2.0 * np.pi * sigma**2) ** -0.25
        / np.sqrt(1.0 + 1j * tau)
        * np.exp(-(shifted**2) / (4.0 * sigma**2 * (1.0 + 1j * tau)) + 1j * wavenumber * (x - center - 0.5 * velocity * t))
    )


def free_gaussian_width(t: float, sigma: float = 1.0, hbar: float = 1.0, mass: float = 1.0) -> float:
    return sigma * np.sqrt(1.0 + (hbar * t / (2.0 * mass * sigma**2)) ** 2)


def free_gaussian_fields(x: np.ndarray, t: float, center: float = 0.0, sigma: float = 1.0, wavenumber: float = 0.0, hbar: float = 1.0, mass: float = 1.0):
    """Closed-form ``(rho, v, u)`` of the freely spreading Gaussian."""
    tau = hbar * t / (2.0 * mass * sigma**2)
    velocity = hbar * wavenumber / mass
    shifted = x - center - velocity * t
    spread = 1.0 + tau**2
    rho = np.exp(-(shifted**2) / (2.0 * sigma**2 * spread)) / np.sqrt(2.0 * np.pi * sigma**2 * spread)
    v = velocity + hbar * shifted * tau / (2.0 * mass * sigma**2 * spread)
    u = -hbar * shifted / (2.0 * mass * sigma**2 * spread)
    return rho, v, u


def coherent_state(x: np.ndarray, t: float, x0: float, p0: float = 0.0, omega: float = 1.0, hbar: float = 1.0, mass: float = 1.0) -> np.ndarray:
    """Displaced harmonic ground state, exact at time ``t``."""
    position, momentum = coherent_orbit(t, x0, p0, omega, mass)
    sigma2 = hbar / (2.0 * mass * omega)
    phase = momentum * (x - position) / hbar + (momentum * position - p0 * x0) / (2.0 * hbar) - 0.5 * omega * t
    return (2.0 * np.pi * sigma2) ** -0.25 * np.exp(-((x - position) ** 2) / (4.0 * sigma2) + 1j * phase)


def coherent_orbit(t: float, x0: float, p0: float = 0.0, omega: float = 1.0, mass: float = 1.0):
    position = x0 * np.cos(omega * t) + p0 / (mass * omega) * np.sin(omega * t)
    momentum = p0 * np.cos(omega * t) - mass * omega * x0 * np.sin(omega * t)
    return position, momentum


def harmonic_eigenstate(x: np.ndarray, n: int, omega: float = 1.0, hbar: float = 1.0, mass: float = 1.0) -> np.ndarray:
    """n-th 1D oscillator eigenfunction (real)."""
    xi = np.sqrt(mass * omega / hbar) * x
    norm = (mass * omega / (np.pi * hbar)) ** 0.25 / np.sqrt(2.0**n * factorial(n))
    return norm * eval_hermite(n, xi) * np.exp(-(xi**2) / 2.0)


def vortex_phase(grid: Grid, ell: float, center: Coords = 0.0) -> np.ndarray:
    """``exp(i ell phi)`` about ``center`` on a 2D grid."""
    if grid.dims != 2:
        raise ConfigurationError("vortex phases need a 2D grid")
    cx, cy = _per_axis(grid, center)
    x, y = grid.mesh()
    return np.exp(1j * ell * np.arctan2(y - cy, x - cx))


def vortex_state(grid: Grid, ell: int, omega: float = 1.0, hbar: float = 1.0, mass: float = 1.0, center: Coords = 0.0) -> ComplexField:
    """Lowest 2D isotropic-oscillator eigenstate with angular momentum ``ell * hbar``.

    ``psi ~ (x + i y)^ell exp(-r^2 / 2a^2)`` with ``a^2 = hbar / m omega`` and energy
    ``hbar omega (|ell| + 1)``.
    """
    if grid.dims != 2:
        raise ConfigurationError("vortex states need a 2D grid")
    cx, cy = _per_axis(grid, center)
    x, y = grid.mesh()
    orientation = 1.0 if ell >= 0 else -1.0
    z = (x - cx) + 1j * orientation * (y - cy)
    a2 = hbar / (mass * omega)
    values = z ** abs(int(ell)) * np.exp(-np.abs(z) ** 2 / (2.0 * a2))
    return ComplexField(grid, values).normalized()


def product_state(grid: Grid, factors: Sequence[np.ndarray]) -> ComplexField:
    """Outer product of per-axis 1D wavefunctions."""
    if len(factors) != grid.dims:
        raise ConfigurationError(f"need {grid.dims} factors, got {len(factors)}")
    values = np.ones((), dtype=complex)
    for factor in factors:
        values = np.multiply.outer(values, np.asarray(factor, dtype=complex))
    return ComplexField(grid, values).normalized()
