"""Explicit integration of the hydrodynamic (density, velocity) system."""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.ndimage import binary_dilation
from scipy.special import logsumexp

from errors import CFLViolation, ConfigurationError, NumericalError
from hjm_flow.state import LOG_TINY, HydroState, bounded, normalize_log_density
from lattice import Grid, partial_array
from propagator import Hamiltonian

logger = logging.getLogger(__name__)

COURANT_LIMIT = 0.5
CURL_TOLERANCE = 1e-3
# Cells below this fraction of the peak density are left out of curl monitoring.
CURL_DENSITY_CUTOFF = 1e-8
_COUPLING_DT = 1e-6


def _d(values: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    return partial_array(values, grid, axis, "central")


def _coupling_rate(H: Hamiltonian, t: float) -> Optional[np.ndarray]:
    """``d/dt (e/c) A`` by a centred difference, or None for a static potential."""
    if not callable(H.vector_potential):
        return None
    return (H.coupling(t + _COUPLING_DT) - H.coupling(t - _COUPLING_DT)) / (2.0 * _COUPLING_DT)


def bernoulli_energy(log_rho: np.ndarray, v: np.ndarray, t: float, H: Hamiltonian, quantum_kinetic: bool) -> np.ndarray:
    """``sum_a m_a v_a^2 / 2 + V + Q`` with ``Q = -sum_a m_a (u_a^2 / 2 + nu_a d_a u_a)``.

    ``u_a = nu_a d_a ln(rho)`` is rebuilt from the density on every call.
    """
    grid = bounded(H.grid)
    masses = H.axis_masses
    nu = H.diffusion_coefficients()
    energy = H.potential(t) + sum(0.5 * masses[a] * v[a] ** 2 for a in range(grid.dims))
    if quantum_kinetic:
        for a in range(grid.dims):
            u = nu[a] * _d(log_rho, grid, a)
            energy = energy - masses[a] * (0.5 * u**2 + nu[a] * _d(u, grid, a))
    return energy


def _rates(log_rho: np.ndarray, v: np.ndarray, t: float, H: Hamiltonian, quantum_kinetic: bool, frozen: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    grid = bounded(H.grid)
    masses = H.axis_masses
    log_rate = np.zeros(grid.shape)
    for a in range(grid.dims):
        log_rate -= _d(v[a], grid, a) + v[a] * _d(log_rho, grid, a)

    energy = bernoulli_energy(log_rho, v, t, H, quantum_kinetic)
    pull = _coupling_rate(H, t)
    v_rate = np.empty_like(v)
    for a in range(grid.dims):
        force = -_d(energy, grid, a)
        if pull is not None:
            force = force - pull[a]
        v_rate[a] = force / masses[a]

    if frozen is not None:
        log_rate[frozen] = 0.0
        v_rate[:, frozen] = 0.0
    return log_rate, v_rate


def courant_number(state: HydroState, H: Hamiltonian, dt: float, quantum_kinetic: bool = True) -> float:
    """Largest of ``|v_a| dt / h_a`` and, with the quantum kinetic on, ``nu_a dt / h_a^2``."""
    active = np.ones(state.grid.shape, dtype=bool) if state.frozen is None else ~state.frozen
    nu = H.diffusion_coefficients()
    number = 0.0
    for a, h in enumerate(state.grid.spacing):
        number = max(number, float(np.max(np.abs(state.v[a][active]))) * dt / h)
        if quantum_kinetic:
            number = max(number, nu[a] * dt / h**2)
    return number


def curl_ratio(state: HydroState, H: Hamiltonian) -> float:
    """``max|curl w| / max|grad w|`` over planar pairs of each particle's axes, ``w = p / m``.

    Cells near the frozen core or below ``CURL_DENSITY_CUTOFF`` of the peak
    density are excluded. Particles with a single axis contribute nothing.
    """
    grid = bounded(state.grid)
    w = state.momentum(H) / H.axis_masses.reshape((-1,) + (1,) * grid.dims)
    region = state.log_rho > np.max(state.log_rho) + np.log(CURL_DENSITY_CUTOFF)
    if state.frozen is not None:
        region &= ~binary_dilation(state.frozen, iterations=2)
    curl_max = gradient_max = 0.0
    for particle in H.particles:
        axes = particle.axes
        for i, a in enumerate(axes):
            for b in axes[i + 1:]:
                da_wb, db_wa = _d(w[b], grid, a), _d(w[a], grid, b)
                curl_max = max(curl_max, float(np.max(np.abs(da_wb - db_wa)[region], initial=0.0)))
                for partial in (da_wb, db_wa, _d(w[a], grid, a), _d(w[b], grid, b)):
                    gradient_max = max(gradient_max, float(np.max(np.abs(partial)[region], initial=0.0)))
    return curl_max / gradient_max if gradient_max > 0 else 0.0


def flow_energy(state: HydroState, H: Hamiltonian, quantum_kinetic: bool = False) -> float:
    """``int rho (sum_a m_a v_a^2 / 2 + V)``, plus ``int rho Q`` with the quantum kinetic on."""
    energy = bernoulli_energy(state.log_rho, state.v, state.t, H, quantum_kinetic)
    return float(np.sum(state.rho * energy) * state.grid.cell_volume)


def integrate_hydrodynamic(state: HydroState, H: Hamiltonian, dt: float, quantum_kinetic: bool = True) -> HydroState:
    """One Heun (RK2) step of continuity plus the Bernoulli-form momentum balance.

    ``d_t ln rho = -sum_a (d_a v_a + v_a d_a ln rho)`` and
    ``m_a d_t v_a = -d_a E - d_t (e_a/c) A_a`` with ``E`` from
    :func:`bernoulli_energy`. Where ``v`` is curl-free this is the convective
    form ``d_t v + v.grad v - u.grad u - nu lap u = -grad V / m``; vorticity
    present elsewhere is carried unchanged and monitored. With the quantum
    kinetic off the same step integrates the classical Hamilton-Jacobi flow.

    The density stage combination is linear in ``rho``,
    ``rho' = rho + dt/2 (rho k1 + rho_mid k2)``, so the step changes the mass
    only by the discrete ``int rho k`` of each stage. That change is returned as
    ``mass_defect`` (relative, signed) and then removed by renormalization.

    Raises:
        CFLViolation: if :func:`courant_number` reaches ``COURANT_LIMIT``.
        NumericalError: if the step produces non-finite values.
    """
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    courant = courant_number(state, H, dt, quantum_kinetic)
    if courant >= COURANT_LIMIT:
        raise CFLViolation(courant, 0.9 * COURANT_LIMIT * dt / courant)

    t = state.t
    k1_log, k1_v = _rates(state.log_rho, state.v, t, H, quantum_kinetic, state.frozen)
    mid_log, mid_v = state.log_rho + dt * k1_log, state.v + dt * k1_v
    k2_log, k2_v = _rates(mid_log, mid_v, t + dt, H, quantum_kinetic, state.frozen)
    growth = 1.0 + 0.5 * dt * (k1_log + np.exp(dt * k1_log) * k2_log)
    v = state.v + 0.5 * dt * (k1_v + k2_v)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(growth))):
        raise NumericalError(f"hydrodynamic step at t={t:.6g} produced non-finite values", {"t": t, "dt": dt})
    emptied = growth <= 0.0
    if emptied.any():
        logger.debug("%d cells emptied at t=%.6g", int(emptied.sum()), t + dt)
    with np.errstate(divide="ignore"):
        log_rho = np.where(emptied, LOG_TINY, state.log_rho + np.log(np.where(emptied, 1.0, growth)))

    grid = state.grid
    defect = float(np.expm1(logsumexp(log_rho) - logsumexp(state.log_rho)))
    stepped = HydroState(grid, normalize_log_density(log_rho, grid), v, t + dt, state.frozen)

    ratio = curl_ratio(stepped, H)
    previous = state.curl_ratio if np.isfinite(state.curl_ratio) else 0.0
    if ratio > max(CURL_TOLERANCE, 2.0 * previous):
        logger.warning("curl ratio rose to %.3e at t=%.6g", ratio, t + dt)
    return HydroState(grid, stepped.log_rho, stepped.v, stepped.t, stepped.frozen, ratio, defect)


@dataclass
class HydroRun:
    """Recorded states of one hydrodynamic run plus a (t, mass, mass_defect, energy, curl_ratio) log.

    ``mass_defect`` accumulates the absolute per-step defects up to each row, so
    it measures how far the scheme alone would have let the mass wander.
    """

    hamiltonian: Hamiltonian
    quantum_kinetic: bool
    times: List[float] = field(default_factory=list)
    states: List[HydroState] = field(default_factory=list)
    log: pd.DataFrame = None
    wall_time: float = 0.0

    @property
    def final(self) -> HydroState:
        return self.states[-1]


def run_hydrodynamic(state: HydroState, H: Hamiltonian, dt: float, steps: int, quantum_kinetic: bool = True, stride: int = 1) -> HydroRun:
    """Step ``steps`` times, keeping the initial state, every ``stride``-th and the final one."""
    if steps < 0 or stride < 1:
        raise ConfigurationError("steps must be non-negative and stride at least 1")
    run = HydroRun(H, quantum_kinetic)
    rows = []
    defect = 0.0
    started = time.perf_counter()

    def record(s: HydroState) -> None:
        run.times.append(s.t)
        run.states.append(s)
        ratio = s.curl_ratio if np.isfinite(s.curl_ratio) else curl_ratio(s, H)
        rows.append({"t": s.t, "mass": s.mass(), "mass_defect": defect, "energy": flow_energy(s, H, quantum_kinetic), "curl_ratio": ratio})

    t0 = state.t
    record(state)
    logger.info("hydrodynamic run (%s kinetic): dt=%g steps=%d", "quantum" if quantum_kinetic else "classical", dt, steps)
    for n in range(1, steps + 1):
        state = integrate_hydrodynamic(state, H, dt, quantum_kinetic).with_time(t0 + n * dt)
        defect += abs(state.mass_defect)
        if n % stride == 0 or n == steps:
            record(state)
    run.log = pd.DataFrame(rows, columns=["t", "mass", "mass_defect", "energy", "curl_ratio"])
    run.wall_time = time.perf_counter() - started
    logger.info("hydrodynamic run finished in %.2fs", run.wall_time)
    return run
