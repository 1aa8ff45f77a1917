"""Drive a stepping scheme over a schedule and record snapshots."""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Literal

import numpy as np
import pandas as pd

from errors import ConfigurationError
from lattice import ComplexField
from propagator.hamiltonian import Hamiltonian
from propagator.stepping import Mode, classical_energy, energy, make_stepper

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionSchedule:
    """Step size, step count and snapshot stride for one run."""

    dt: float
    steps: int
    stride: int = 1
    mode: Mode = "quantum"
    method: Literal["split_step", "crank_nicolson"] = "split_step"
    t0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.steps < 0:
            raise ConfigurationError(f"steps must be non-negative, got {self.steps}")
        if self.stride < 1:
            raise ConfigurationError(f"snapshot stride must be at least 1, got {self.stride}")

    @property
    def duration(self) -> float:
        return self.dt * self.steps


@dataclass
class Evolution:
    """Snapshots of one run plus its conserved-quantity log (t, norm, energy)."""

    hamiltonian: Hamiltonian
    schedule: EvolutionSchedule
    times: List[float] = field(default_factory=list)
    snapshots: List[ComplexField] = field(default_factory=list)
    log: pd.DataFrame = None
    wall_time: float = 0.0

    def series(self) -> np.ndarray:
        """Snapshot values stacked on a leading time axis."""
        return np.stack([s.values for s in self.snapshots])

    @property
    def final(self) -> ComplexField:
        return self.snapshots[-1]

    def max_energy_drift(self) -> float:
        energies = self.log["energy"].to_numpy()
        return float(np.max(np.abs(energies - energies[0])) / max(abs(energies[0]), 1e-300))


def evolve(psi0: ComplexField, H: Hamiltonian, schedule: EvolutionSchedule) -> Evolution:
    """Propagate ``psi0`` and keep every ``stride``-th state plus the final one.

    Quantum runs log ``<H>``; classical runs log the classical energy functional.
    """
    step = make_stepper(H, schedule.dt, schedule.mode, schedule.method)
    measure = energy if schedule.mode == "quantum" else classical_energy
    result = Evolution(H, schedule)
    rows = []
    started = time.perf_counter()

    def record(values: np.ndarray, t: float) -> None:
        snapshot = ComplexField(H.grid, values)
        result.times.append(t)
        result.snapshots.append(snapshot)
        rows.append({"t": t, "norm": snapshot.norm(), "energy": measure(values, H, t)})

    values = psi0.values.copy()
    t = schedule.t0
    record(values, t)
    logger.info(
        "evolving %s-mode state with %s: dt=%g steps=%d stride=%d",
        schedule.mode, schedule.method, schedule.dt, schedule.steps, schedule.stride,
    )
    for n in range(1, schedule.steps + 1):
        values = step(values, t)
        t = schedule.t0 + n * schedule.dt
        if n % schedule.stride == 0 or n == schedule.steps:
            record(values, t)
            logger.debug("snapshot t=%.6g norm=%.15f", t, rows[-1]["norm"])

    result.log = pd.DataFrame(rows, columns=["t", "norm", "energy"])
    result.wall_time = time.perf_counter() - started
    logger.info("evolution finished in %.2fs, max energy drift %.3e", result.wall_time, result.max_energy_drift())
    return result
