"""Euler-Lagrange output of the stochastic action: the mean Newton law on snapshot fields."""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from errors import ConfigurationError
from lattice import partial_array, second_partial_array, time_derivative
from madelung import MadelungFields, MadelungSeries, force_acceleration, mean_derivative

logger = logging.getLogger(__name__)

# Residual norms are taken where rho exceeds this fraction of its peak.
SUPPORT = 1e-6


@dataclass
class EulerLagrangeResidual:
    """``m (D D* + D* D) q / 2`` minus the Lorentz force, per axis and snapshot.

    ``terms`` holds the pieces that sum to ``residual``: the rate and convective
    parts built from ``v``, the osmotic part built from ``u`` and the negated
    force. ``asymmetry`` is ``m (D D - D* D*) q / 2``, which changes sign under
    time reversal and vanishes for fields that satisfy continuity.
    """

    times: np.ndarray
    axes: Tuple[Tuple[int, ...], ...]
    residual: np.ndarray = field(repr=False)
    terms: Dict[str, np.ndarray] = field(repr=False)
    asymmetry: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)
    cell: float = 1.0

    def _norm(self, stack: np.ndarray) -> np.ndarray:
        masked = np.where(self.support[:, None], np.abs(stack), 0.0)
        return np.sqrt(np.sum(masked**2, axis=tuple(range(2, stack.ndim))) * self.cell)

    @property
    def residual_norms(self) -> np.ndarray:
        """L2 norm per snapshot and axis, shape ``(T, dims)``."""
        return self._norm(self.residual)

    @property
    def dominant_norms(self) -> np.ndarray:
        return np.max(np.stack([self._norm(term) for term in self.terms.values()]), axis=0)

    @property
    def absolute(self) -> float:
        return float(np.max(self.residual_norms))

    @property
    def relative(self) -> float:
        dominant = self.dominant_norms
        residual = self.residual_norms
        if not np.all(dominant > 0):
            return float("nan")
        return float(np.max(residual / dominant))

    def channel(self, particle: int) -> np.ndarray:
        """Residual of one particle's axes, shape ``(T, len(axes), *grid)``."""
        return self.residual[:, list(self.axes[particle])]

    def as_frame(self) -> pd.DataFrame:
        residual, dominant = self.residual_norms, self.dominant_norms
        rows = []
        for n, t in enumerate(self.times):
            for particle, axes in enumerate(self.axes):
                for a in axes:
                    rows.append({"t": t, "particle": particle, "axis": a, "residual_l2": residual[n, a], "dominant_l2": dominant[n, a]})
        return pd.DataFrame(rows)


def euler_lagrange_residual(series: MadelungSeries) -> EulerLagrangeResidual:
    """Stochastic Newton law ``m a = -grad V - (e/c) d_t A + (e/c) v x B`` checked on every snapshot.

    ``a = d_t v + (v.grad) v - (u.grad) u - nu lap u`` with gradients over the
    whole configuration space, so an entangled particle feels the motion of its
    partners through ``v``.

    Raises:
        ConfigurationError: with fewer than two snapshots.
    """
    if len(series) < 2:
        raise ConfigurationError("the Newton residual needs at least two snapshots")
    H = series.hamiltonian
    grid, scheme = series.grid, series.scheme
    masses = H.axis_masses.reshape((1, -1) + (1,) * grid.dims)
    nu = H.diffusion_coefficients()
    v = series.stack("v")
    u = series.stack("u")

    convective = np.zeros_like(v)
    osmotic = np.zeros_like(u)
    for a in range(grid.dims):
        for b in range(grid.dims):
            convective[:, a] += v[:, b] * partial_array(v[:, a], grid, b, scheme)
            osmotic[:, a] -= u[:, b] * partial_array(u[:, a], grid, b, scheme)
            osmotic[:, a] -= nu[b] * second_partial_array(u[:, a], grid, b, scheme)
    terms = {
        "rate": masses * time_derivative(v, series.times),
        "convective": masses * convective,
        "osmotic": masses * osmotic,
        "force": -masses * force_acceleration(series),
    }
    residual = sum(terms.values())

    b = series.stack("b")
    b_star = series.stack("b_star")
    asymmetry = np.stack(
        [mean_derivative(b[:, a], series, "forward") - mean_derivative(b_star[:, a], series, "backward") for a in range(grid.dims)],
        axis=1,
    )
    asymmetry = 0.5 * masses * asymmetry

    rho = series.stack("rho")
    support = rho > SUPPORT * np.max(rho, axis=tuple(range(1, rho.ndim)), keepdims=True)
    result = EulerLagrangeResidual(
        np.asarray(series.times),
        tuple(p.axes for p in H.particles),
        residual,
        terms,
        asymmetry,
        support,
        grid.cell_volume,
    )
    logger.info("Newton residual: relative %.3e over %d snapshots", result.relative, len(series))
    return result


def _reversed_fields(fields: MadelungFields, t: float) -> MadelungFields:
    return replace(fields, t=t, v=-fields.v, current=-fields.current, phase_gradient=-fields.phase_gradient)


def time_reversed(series: MadelungSeries) -> MadelungSeries:
    """The same snapshots read backward with ``v -> -v`` and ``u`` unchanged.

    Only valid for static scalar potentials; a vector potential would have to
    flip as well.

    Raises:
        ConfigurationError: for a vector potential or a time-dependent potential.
    """
    H = series.hamiltonian
    if H.vector_potential is not None or not H.time_independent:
        raise ConfigurationError("time reversal needs a static scalar potential")
    end = series.times[-1] + series.times[0]
    reversed_times = [end - t for t in reversed(series.times)]
    reversed_fields = [_reversed_fields(f, t) for f, t in zip(reversed(series.fields), reversed_times)]
    return MadelungSeries(reversed_times, reversed_fields)
