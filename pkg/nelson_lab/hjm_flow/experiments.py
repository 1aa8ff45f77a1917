"""Experiments pairing the hydrodynamic flow with circulation and wavefunction evolution."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from circulation import circle_loop, circulate
from errors import ConfigurationError
from hjm_flow.flow import HydroRun, run_hydrodynamic
from hjm_flow.state import HydroState, from_wavefunction, vortex_initializer
from lattice import ComplexField, Grid
from madelung import decompose, density_floor
from propagator import EvolutionSchedule, Hamiltonian, Particle, evolve
from propagator.potentials import harmonic

logger = logging.getLogger(__name__)

# Velocity errors are compared only where rho exceeds this fraction of its peak.
VELOCITY_SUPPORT = 1e-6


@dataclass(frozen=True)
class CirculationDrift:
    """Canonical circulation on one fixed loop at each recorded time, in units of ``h``."""

    alpha: float
    loop: str
    times: np.ndarray
    quanta: np.ndarray
    flagged: np.ndarray
    run: Optional[HydroRun] = None

    @property
    def max_drift(self) -> float:
        """Largest ``|Gamma(t) - Gamma(0)| / h`` over unflagged samples."""
        kept = self.quanta[~self.flagged]
        if kept.size == 0:
            return float("nan")
        return float(np.max(np.abs(kept - self.quanta[0])))

    @property
    def relative_drift(self) -> float:
        start = abs(self.quanta[0])
        return self.max_drift / start if start > 1e-12 else float("nan")

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "loop": self.loop, "value_h": self.quanta, "flagged": self.flagged})


def trapped_vortex(
    grid: Grid,
    alpha: float,
    omega: float = 1.0,
    mass: float = 1.0,
    hbar: float = 1.0,
    core_radius: Optional[float] = None,
) -> Tuple[HydroState, Hamiltonian]:
    """Vortex initial data matched to an isotropic trap, with its Hamiltonian."""
    width = np.sqrt(hbar / (mass * omega))
    core = core_radius if core_radius is not None else max(0.5 * width, 4.0 * max(grid.spacing))
    state = vortex_initializer(grid, alpha, core, width=width, mass=mass, hbar=hbar)
    H = Hamiltonian(grid, (Particle(mass=mass, axes=(0, 1)),), hbar=hbar, external=harmonic(grid, mass, omega))
    return state, H


def measure_circulation(state: HydroState, H: Hamiltonian, loop) -> Tuple[float, bool]:
    floored = state.rho <= density_floor(state.rho)
    result = circulate(state.momentum(H), loop, state.grid, H.hbar, floored)
    return result.quanta, result.warning


def circulation_drift_experiment(
    grid: Grid,
    alpha: float,
    T: float,
    dt: float,
    omega: float = 1.0,
    mass: float = 1.0,
    hbar: float = 1.0,
    loop_radius: Optional[float] = None,
    core_radius: Optional[float] = None,
    stride: int = 10,
    quantum_kinetic: bool = True,
) -> CirculationDrift:
    """Flow a trapped vortex of strength ``alpha`` for ``T`` and track its circulation.

    The loop is a fixed circle about the trap centre, by default at 1.5 trap
    lengths. Samples whose loop passes floored density are flagged and left
    out of the drift statistic.
    """
    if T < 0:
        raise ConfigurationError("experiment duration must be non-negative")
    state, H = trapped_vortex(grid, alpha, omega, mass, hbar, core_radius)
    radius = loop_radius if loop_radius is not None else 1.5 * np.sqrt(hbar / (mass * omega))
    loop = circle_loop((0.0, 0.0), radius, name=f"vortex-r{radius:g}")

    steps = int(round(T / dt))
    run = run_hydrodynamic(state, H, dt, steps, quantum_kinetic, stride)
    samples = [measure_circulation(s, H, loop) for s in run.states]
    drift = CirculationDrift(
        alpha,
        loop.name,
        np.asarray(run.times),
        np.array([q for q, _ in samples]),
        np.array([w for _, w in samples], dtype=bool),
        run,
    )
    logger.info("alpha=%g: circulation %.6f h, max drift %.3e h", alpha, drift.quanta[0], drift.max_drift)
    return drift


def _errors(a: np.ndarray, b: np.ndarray, grid: Grid, weight: Optional[np.ndarray] = None):
    diff = np.abs(a - b)
    if weight is None:
        return float(np.sqrt(np.sum(diff**2) * grid.cell_volume)), float(np.max(diff))
    return float(np.sqrt(np.sum(weight * diff**2) * grid.cell_volume)), float(np.max(diff, initial=0.0))


def compare_to_schrodinger(
    psi0: Union[ComplexField, np.ndarray],
    H: Hamiltonian,
    dt: float,
    steps: int,
    stride: int = 1,
    quantum_kinetic: bool = True,
) -> pd.DataFrame:
    """Run the hydrodynamic flow and the wavefunction propagator side by side.

    With ``quantum_kinetic`` off the wavefunction runs in classical mode. Each
    row holds the L2 and max errors in ``rho`` and the density-weighted L2 and
    max errors in ``v``; velocities are compared only where
    ``rho > VELOCITY_SUPPORT * max(rho)``.
    """
    psi0 = psi0 if isinstance(psi0, ComplexField) else ComplexField(H.grid, psi0)
    mode = "quantum" if quantum_kinetic else "classical"
    evolution = evolve(psi0, H, EvolutionSchedule(dt, steps, stride, mode))
    run = run_hydrodynamic(from_wavefunction(psi0, H), H, dt, steps, quantum_kinetic, stride)

    rows = []
    for t, psi, state in zip(evolution.times, evolution.snapshots, run.states):
        fields = decompose(psi, H, t)
        rho_l2, rho_max = _errors(state.rho, fields.rho, H.grid)
        support = fields.rho > VELOCITY_SUPPORT * np.max(fields.rho)
        v_l2 = v_max = 0.0
        for a in range(H.grid.dims):
            l2, worst = _errors(state.v[a][support], fields.v[a][support], H.grid, fields.rho[support])
            v_l2, v_max = np.hypot(v_l2, l2), max(v_max, worst)
        rows.append({"t": t, "rho_l2": rho_l2, "rho_max": rho_max, "v_l2": float(v_l2), "v_max": v_max})
    report = pd.DataFrame(rows, columns=["t", "rho_l2", "rho_max", "v_l2", "v_max"])
    logger.info("hydrodynamic vs wavefunction: max rho L2 error %.3e", report["rho_l2"].max())
    return report
