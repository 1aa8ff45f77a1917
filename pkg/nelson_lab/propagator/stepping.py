"""Time stepping for the N-particle Schrodinger equation and its classical variant."""

import logging
from typing import Callable, Literal, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import bicgstab

from errors import ConfigurationError, NumericalError
from lattice import ComplexField, RealField, laplacian_array, partial_array
from propagator.hamiltonian import Hamiltonian, hamiltonian_matrix

logger = logging.getLogger(__name__)

Mode = Literal["quantum", "classical"]

# Cells with rho below DENSITY_FLOOR * max(rho) are treated as nodes.
DENSITY_FLOOR = 1e-12

WaveLike = Union[ComplexField, np.ndarray]


def _values(psi: WaveLike) -> np.ndarray:
    return psi.values if isinstance(psi, ComplexField) else np.asarray(psi, dtype=complex)


def _scheme(H: Hamiltonian) -> str:
    return "spectral" if H.grid.all_periodic else "central"


def _check_mode(mode: str) -> None:
    if mode not in ("quantum", "classical"):
        raise ConfigurationError(f"unknown evolution mode {mode!r}")


def classical_correction_array(values: np.ndarray, H: Hamiltonian) -> np.ndarray:
    amplitude = np.abs(values)
    rho = amplitude**2
    floored = rho <= DENSITY_FLOOR * rho.max()
    safe = np.where(floored, 1.0, amplitude)
    scheme = _scheme(H)
    term = np.zeros(H.grid.shape)
    for p in H.particles:
        curvature = laplacian_array(amplitude, H.grid, scheme, axes=p.axes)
        term += H.hbar**2 / (2.0 * p.mass) * curvature / safe
    term[floored] = 0.0
    return term


def classical_correction(psi: WaveLike, H: Hamiltonian) -> RealField:
    """Per-particle sum of ``+(hbar^2/2m_i) lap_i|psi| / |psi|``.

    Adding this to the potential cancels the quantum kinetic, turning the
    Schrodinger equation into the classical nonlinear one. Floored cells get 0.
    """
    return RealField(H.grid, classical_correction_array(_values(psi), H))


def _potential_half_step(values: np.ndarray, V: np.ndarray, H: Hamiltonian, dt: float, mode: Mode) -> np.ndarray:
    # The potential sub-step leaves |psi| unchanged, so evaluating the
    # classical term on the entering amplitude solves it exactly.
    if mode == "classical":
        V = V + classical_correction_array(values, H)
    return values * np.exp(-0.5j * V * dt / H.hbar)


def split_step_values(values: np.ndarray, H: Hamiltonian, dt: float, t: float = 0.0, mode: Mode = "quantum") -> np.ndarray:
    if not H.grid.all_periodic:
        raise ConfigurationError("split-step propagation requires every grid axis to be periodic")
    t_mid = t + 0.5 * dt
    V = H.potential(t_mid)
    kinetic_phase = np.exp(-1j * H.kinetic_symbol(t_mid) * dt / H.hbar)

    values = _potential_half_step(values, V, H, dt, mode)
    values = np.fft.ifftn(kinetic_phase * np.fft.fftn(values))
    values = _potential_half_step(values, V, H, dt, mode)
    if H.include_rest_energy:
        values = values * np.exp(-1j * H.rest_energy * dt / H.hbar)
    return values


def split_step(psi: WaveLike, H: Hamiltonian, dt: float, t: float = 0.0, mode: Mode = "quantum") -> ComplexField:
    """One Strang step ``exp(-iV dt/2h) exp(-iT dt/h) exp(-iV dt/2h)``.

    The potential is sampled at the midpoint time and a uniform vector potential
    enters as a shift of the kinetic momentum in Fourier space.

    Raises:
        ConfigurationError: on non-periodic axes or a spatially varying vector potential.
    """
    _check_mode(mode)
    return ComplexField(H.grid, split_step_values(_values(psi), H, dt, t, mode))


class CrankNicolsonStepper:
    """Implicit midpoint stepping with the Peierls finite-difference Hamiltonian.

    The system matrices are rebuilt only when the Hamiltonian depends on time or
    the classical term is active.
    """

    def __init__(self, H: Hamiltonian, dt: float, mode: Mode = "quantum", rtol: float = 1e-12, maxiter: int = 1000):
        _check_mode(mode)
        self.H = H
        self.dt = dt
        self.mode = mode
        self.rtol = rtol
        self.maxiter = maxiter
        self._cached: Optional[Tuple[sp.csr_matrix, sp.csr_matrix]] = None

    def _system(self, values: np.ndarray, t: float) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
        reusable = self.H.time_independent and self.mode == "quantum"
        if reusable and self._cached is not None:
            return self._cached
        extra = classical_correction_array(values, self.H) if self.mode == "classical" else None
        matrix = hamiltonian_matrix(self.H, t + 0.5 * self.dt, extra_potential=extra)
        identity = sp.identity(matrix.shape[0], dtype=complex, format="csr")
        scaled = (0.5j * self.dt / self.H.hbar) * matrix
        system = ((identity + scaled).tocsr(), (identity - scaled).tocsr())
        if reusable:
            self._cached = system
        return system

    def step_values(self, values: np.ndarray, t: float = 0.0) -> np.ndarray:
        lhs, rhs = self._system(values, t)
        flat = values.ravel()
        b = rhs @ flat
        iterations = 0

        def count(_):
            nonlocal iterations
            iterations += 1

        solution, info = bicgstab(lhs, b, x0=flat, rtol=self.rtol, atol=0.0, maxiter=self.maxiter, callback=count)
        if info != 0:
            residual = float(np.linalg.norm(lhs @ solution - b) / max(np.linalg.norm(b), 1e-300))
            raise NumericalError(
                f"Crank-Nicolson solve did not converge at t={t:.6g}",
                {"info": int(info), "iterations": iterations, "relative_residual": residual, "rtol": self.rtol},
            )
        logger.debug("bicgstab converged in %d iterations", iterations)
        result = solution.reshape(values.shape)
        if self.H.include_rest_energy:
            result = result * np.exp(-1j * self.H.rest_energy * self.dt / self.H.hbar)
        return result

    def step(self, psi: WaveLike, t: float = 0.0) -> ComplexField:
        return ComplexField(self.H.grid, self.step_values(_values(psi), t))


def crank_nicolson(psi: WaveLike, H: Hamiltonian, dt: float, t: float = 0.0, mode: Mode = "quantum", rtol: float = 1e-12) -> ComplexField:
    """One Crank-Nicolson step ``(1 + i dt H/2h) psi' = (1 - i dt H/2h) psi``.

    Supports arbitrary smooth vector potentials on grids with at most two axes.

    Raises:
        NumericalError: if the linear solve does not converge; diagnostics hold
            the iteration count and final residual.
    """
    return CrankNicolsonStepper(H, dt, mode, rtol).step(psi, t)


def _kinetic_expectation(values: np.ndarray, H: Hamiltonian, t: float) -> float:
    spectrum = np.fft.fftn(values)
    n = values.size
    return float(np.sum(H.kinetic_symbol(t) * np.abs(spectrum) ** 2) * H.grid.cell_volume / n)


def energy(psi: WaveLike, H: Hamiltonian, t: float = 0.0) -> float:
    """Rayleigh quotient of H.

    Periodic grids use the spectral kinetic energy; otherwise the
    finite-difference matrix is applied.
    """
    values = _values(psi)
    norm = float(np.sum(np.abs(values) ** 2) * H.grid.cell_volume)
    if H.grid.all_periodic and _uniform_vector_potential(H, t):
        kinetic = _kinetic_expectation(values, H, t)
        potential = float(np.sum(H.potential(t) * np.abs(values) ** 2) * H.grid.cell_volume)
        total = (kinetic + potential) / norm
    else:
        flat = values.ravel()
        total = float(np.real(np.vdot(flat, hamiltonian_matrix(H, t) @ flat))) * H.grid.cell_volume / norm
    if H.include_rest_energy:
        total += H.rest_energy
    return total


def _uniform_vector_potential(H: Hamiltonian, t: float) -> bool:
    try:
        H.uniform_coupling(t)
    except ConfigurationError:
        return False
    return True


def classical_energy(psi: WaveLike, H: Hamiltonian, t: float = 0.0) -> float:
    """``sum_i int rho (m_i v_i^2 / 2 + V)`` over unfloored cells."""
    values = _values(psi)
    rho = np.abs(values) ** 2
    floored = rho <= DENSITY_FLOOR * rho.max()
    safe = np.where(floored, 1.0, rho)
    scheme = _scheme(H)
    eA = H.coupling(t)
    masses = H.axis_masses
    density = np.zeros(H.grid.shape)
    for a in range(H.grid.dims):
        flux = H.hbar * np.imag(np.conj(values) * partial_array(values, H.grid, a, scheme))
        if eA is not None:
            flux = flux - eA[a] * rho
        density += flux**2 / (2.0 * masses[a] * safe)
    density = density + H.potential(t) * rho
    density[floored] = 0.0
    total = float(np.sum(density) * H.grid.cell_volume)
    if H.include_rest_energy:
        total += H.rest_energy * float(np.sum(rho) * H.grid.cell_volume)
    return total


def default_trial_state(H: Hamiltonian) -> np.ndarray:
    """Gaussian centred on the grid with a quarter-extent width."""
    values = np.ones(H.grid.shape, dtype=complex)
    for a, x in enumerate(H.grid.mesh()):
        lo, hi = H.grid.extents[a]
        width = 0.125 * (hi - lo)
        values = values * np.exp(-((x - 0.5 * (lo + hi)) ** 2) / (2.0 * width**2))
    return values


def imaginary_time_ground_state(
    H: Hamiltonian,
    tol: float = 1e-10,
    psi0: Optional[WaveLike] = None,
    dtau: float = 0.01,
    check_every: int = 50,
    max_steps: int = 200_000,
    phase_lock: Optional[np.ndarray] = None,
) -> Tuple[ComplexField, float]:
    """Relax a trial state in imaginary time to the lowest state of its sector.

    Energy is checked every ``check_every`` steps and the loop stops once two
    successive checks differ by less than ``tol``. ``phase_lock`` (a unit-modulus
    field such as ``exp(i l phi)``) is re-imprinted after every step so the
    relaxation stays in a fixed circulation sector.

    Returns:
        Normalized state and its energy.

    Raises:
        ConfigurationError: for time-dependent or non-periodic Hamiltonians.
        NumericalError: if ``max_steps`` pass without convergence.
    """
    if not H.time_independent:
        raise ConfigurationError("imaginary-time relaxation requires a time-independent Hamiltonian")
    if not H.grid.all_periodic:
        raise ConfigurationError("imaginary-time relaxation uses spectral kinetics and needs periodic axes")

    grid = H.grid
    V = H.potential()
    half_potential = np.exp(-0.5 * V * dtau / H.hbar)
    kinetic = np.exp(-H.kinetic_symbol() * dtau / H.hbar)
    lock = None if phase_lock is None else np.exp(1j * np.angle(phase_lock))

    def normalize(values: np.ndarray) -> np.ndarray:
        norm = np.sqrt(np.sum(np.abs(values) ** 2) * grid.cell_volume)
        if not norm > 0:
            raise NumericalError("imaginary-time state collapsed to zero norm", {"dtau": dtau})
        return values / norm

    values = default_trial_state(H) if psi0 is None else _values(psi0).copy()
    if lock is not None:
        values = np.abs(values) * lock
    values = normalize(values)
    previous = energy(values, H)

    for step in range(1, max_steps + 1):
        values = half_potential * values
        values = np.fft.ifftn(kinetic * np.fft.fftn(values))
        values = half_potential * values
        if lock is not None:
            values = np.abs(values) * lock
        values = normalize(values)
        if step % check_every == 0:
            current = energy(values, H)
            if abs(current - previous) < tol:
                logger.info("imaginary time converged after %d steps, E0=%.12g", step, current)
                return ComplexField(grid, values), current
            previous = current

    raise NumericalError(
        f"imaginary-time relaxation did not converge in {max_steps} steps",
        {"max_steps": max_steps, "last_energy": previous, "tol": tol},
    )


Stepper = Callable[[np.ndarray, float], np.ndarray]


def make_stepper(H: Hamiltonian, dt: float, mode: Mode = "quantum", method: str = "split_step") -> Stepper:
    _check_mode(mode)
    if method == "split_step":
        return lambda values, t: split_step_values(values, H, dt, t, mode)
    if method == "crank_nicolson":
        return CrankNicolsonStepper(H, dt, mode).step_values
    raise ConfigurationError(f"unknown propagation method {method!r}")
