"""Loop integrals of momentum fields, phase winding and node location."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import ndimage

from circulation.loops import LoopPath
from errors import DegenerateInputError, ResolutionError
from lattice import ComplexField, Grid, RealField, VectorField, interpolate_array
from madelung import decompose
from propagator import DENSITY_FLOOR, Hamiltonian

logger = logging.getLogger(__name__)

NODE_THRESHOLD = 1e-8
MAX_PHASE_INCREMENT = 0.5 * np.pi


@dataclass(frozen=True)
class CirculationResult:
    """Line integral of a momentum field around one loop."""

    value: float
    hbar: float
    floored_samples: int = 0

    @property
    def quanta(self) -> float:
        """Circulation in units of Planck's constant ``h = 2 pi hbar``."""
        return self.value / (2.0 * np.pi * self.hbar)

    @property
    def warning(self) -> bool:
        return self.floored_samples > 0


def _momentum_values(momentum: Union[VectorField, np.ndarray]) -> np.ndarray:
    return momentum.values if isinstance(momentum, VectorField) else np.asarray(momentum, dtype=float)


def circulate(
    momentum: Union[VectorField, np.ndarray],
    loop: LoopPath,
    grid: Grid,
    hbar: float = 1.0,
    floored: Optional[np.ndarray] = None,
) -> CirculationResult:
    """Midpoint-rule line integral ``sum_segments p(midpoint) . dq`` over the loop axes.

    ``momentum`` is a per-axis field, kinetic ``m v`` or canonical ``grad S``.
    When ``floored`` is given, segment midpoints sampled next to floored cells
    are counted and logged; the value is still returned.
    """
    values = _momentum_values(momentum)
    loop.check_resolution(grid)
    midpoints, deltas = loop.segments()
    total = 0.0
    for a in loop.axes:
        total += float(np.sum(interpolate_array(values[a], grid, midpoints) * deltas[:, a]))

    flagged = 0
    if floored is not None:
        touched = interpolate_array(np.asarray(floored, dtype=float), grid, midpoints)
        flagged = int(np.count_nonzero(touched > 0.0))
        if flagged:
            logger.warning("loop %r passes %d samples through floored density", loop.name, flagged)
    return CirculationResult(total, hbar, flagged)


def vector_potential_circulation(H: Hamiltonian, loop: LoopPath, t: float = 0.0) -> float:
    """``sum_i (e_i / c) loop-integral A_i . dq_i`` of the external vector potential."""
    eA = H.coupling(t)
    if eA is None:
        return 0.0
    return circulate(eA, loop, H.grid, H.hbar).value


def winding_number(psi: Union[ComplexField, np.ndarray], loop: LoopPath, grid: Optional[Grid] = None) -> int:
    """Integer phase winding of ``psi`` around the loop.

    Phase increments come from ratios of interpolated complex samples, each on
    the principal branch.

    Raises:
        DegenerateInputError: if ``|psi|^2`` falls below the density floor at a vertex.
        ResolutionError: if any increment reaches pi/2.
    """
    if isinstance(psi, ComplexField):
        grid, values = psi.grid, psi.values
    else:
        values = np.asarray(psi, dtype=complex)
    samples = interpolate_array(values, grid, loop.vertices)
    floor = DENSITY_FLOOR * float(np.max(np.abs(values) ** 2))
    if np.any(np.abs(samples) ** 2 <= floor):
        raise DegenerateInputError(f"wavefunction vanishes on loop {loop.name!r}; winding is undefined")
    increments = np.angle(np.roll(samples, -1) / samples)
    if np.max(np.abs(increments)) >= MAX_PHASE_INCREMENT:
        raise ResolutionError(f"phase jumps by {np.max(np.abs(increments)):.3f} rad on loop {loop.name!r}; refine it")
    return int(np.rint(np.sum(increments) / (2.0 * np.pi)))


def node_detect(rho: Union[RealField, np.ndarray], grid: Optional[Grid] = None, threshold: float = NODE_THRESHOLD) -> List[Tuple[float, ...]]:
    """Centroids of interior clusters of cells with ``rho < threshold * max(rho)``.

    Clusters touching the edge of the array are the density's far tails and
    are not reported.
    """
    if isinstance(rho, RealField):
        grid, values = rho.grid, rho.values
    else:
        values = np.asarray(rho, dtype=float)
    labels, count = ndimage.label(values < threshold * float(np.max(values)))
    if count == 0:
        return []
    edge_labels = set()
    for axis in range(values.ndim):
        edge_labels.update(np.unique(np.take(labels, [0, -1], axis=axis)).tolist())
    axes = grid.axes
    nodes = []
    for label in range(1, count + 1):
        if label in edge_labels:
            continue
        index = np.argwhere(labels == label).mean(axis=0)
        nodes.append(tuple(float(np.interp(i, np.arange(len(ax)), ax)) for i, ax in zip(index, axes)))
    logger.debug("found %d nodes", len(nodes))
    return nodes


def circulation_table(snapshots: Sequence[ComplexField], times: Sequence[float], loops: Sequence[LoopPath], H: Hamiltonian) -> pd.DataFrame:
    """One row per (time, loop): kinetic and canonical circulation, winding number and floor warning."""
    rows = []
    for psi, t in zip(snapshots, times):
        fields = decompose(psi, H, t)
        for loop in loops:
            kinetic = circulate(fields.kinetic_momentum, loop, H.grid, H.hbar, fields.floored)
            canonical = circulate(fields.canonical_momentum, loop, H.grid, H.hbar)
            try:
                winding = winding_number(psi, loop)
            except DegenerateInputError:
                winding = None
            rows.append(
                {
                    "t": float(t),
                    "loop": loop.name,
                    "kinetic": kinetic.value,
                    "canonical": canonical.value,
                    "canonical_quanta": canonical.quanta,
                    "winding": winding,
                    "warning": kinetic.warning,
                }
            )
    return pd.DataFrame(rows, columns=["t", "loop", "kinetic", "canonical", "canonical_quanta", "winding", "warning"])
