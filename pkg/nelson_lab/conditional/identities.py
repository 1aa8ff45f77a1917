"""Continuity, Hamilton-Jacobi and Schrodinger identities satisfied by conditional slices."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd

from circulation import CirculationResult
from conditional.slices import ConditionalSeries, ConditionalSlice, sample_along
from errors import ConfigurationError
from lattice import partial_array, time_derivative

logger = logging.getLogger(__name__)

# Residuals are measured where the slice density exceeds this fraction of its peak.
SUPPORT = 1e-6


@dataclass
class ConditionalResidual:
    """Residual of one identity at every slice, with the terms it balances.

    ``relative`` is the largest per-slice ratio of the residual L2 norm to the
    L2 norm of the largest term, both taken over the support of the slice.
    """

    identity: str
    times: np.ndarray
    residual: np.ndarray = field(repr=False)
    terms: Dict[str, np.ndarray] = field(repr=False)
    support: np.ndarray = field(repr=False)
    cell: float = 1.0

    def _norm(self, stack: np.ndarray) -> np.ndarray:
        masked = np.where(self.support, np.abs(stack), 0.0)
        return np.sqrt(np.sum(masked**2, axis=-1) * self.cell)

    @property
    def residual_norms(self) -> np.ndarray:
        return self._norm(self.residual)

    @property
    def dominant_norms(self) -> np.ndarray:
        return np.max(np.stack([self._norm(term) for term in self.terms.values()]), axis=0)

    @property
    def absolute(self) -> float:
        return float(np.max(np.where(self.support, np.abs(self.residual), 0.0)))

    @property
    def relative(self) -> float:
        dominant = self.dominant_norms
        if not np.all(dominant > 0):
            return float("nan")
        return float(np.max(self.residual_norms / dominant))

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": self.times,
                "identity": self.identity,
                "residual_l2": self.residual_norms,
                "dominant_l2": self.dominant_norms,
                "residual_max": np.max(np.where(self.support, np.abs(self.residual), 0.0), axis=-1),
            }
        )


def _support(series: ConditionalSeries) -> np.ndarray:
    rho = series.stack("rho")
    return rho > SUPPORT * np.max(rho, axis=-1, keepdims=True)


def _rate(series: ConditionalSeries, name: str) -> np.ndarray:
    return time_derivative(series.stack(name), series.times)


def _result(identity: str, series: ConditionalSeries, terms: Dict[str, np.ndarray]) -> ConditionalResidual:
    residual = sum(terms.values())
    result = ConditionalResidual(identity, series.times, residual, terms, _support(series), series.grid.cell_volume)
    logger.info("%s residual: relative %.3e over %d slices", identity, result.relative, len(series))
    return result


def conditional_continuity_residual(series: ConditionalSeries) -> ConditionalResidual:
    """``d_t rho1 + d1 j1 + d2 j2|_cut - (dq2/dt) d2 rho|_cut``.

    Holds in both quantum and classical mode.
    """
    q2_dot = series.q2_dot[:, None]
    terms = {
        "density_rate": _rate(series, "rho"),
        "flux_1": np.stack([partial_array(s.current1, s.grid, 0, "spectral" if s.grid.all_periodic else "central") for s in series.slices]),
        "flux_2": series.stack("d2_current"),
        "convective": -q2_dot * series.stack("d2_rho"),
    }
    return _result("continuity", series, terms)


def conditional_qhj_residual(series: ConditionalSeries, quantum: Optional[bool] = None) -> ConditionalResidual:
    """Gradient form of the conditional Hamilton-Jacobi equation along the cut.

    ``d_t p1 + d1 E|_cut - (dq2/dt) d1 (d2 S)|_cut`` with ``p1 = d1 S1`` and
    ``E = m1 v1^2/2 + m2 v2^2/2 + V + Q``. With ``quantum`` off the quantum
    kinetic of both particles is dropped (classical mode). ``d1 E`` and
    ``d1 d2 S`` are recovered from the smooth products ``rho E`` and
    ``rho d2 S`` as ``(d1(rho f) - f d1 rho) / rho``. ``quantum`` defaults to
    the mode of the evolution the slices came from.
    """
    quantum = series.mode == "quantum" if quantum is None else quantum
    rho = series.stack("safe_rho")
    d1_rho = series.stack("d1_rho")
    weighted = series.stack("weighted_energy")
    d1_weighted = series.stack("d1_weighted_energy")
    if not quantum:
        weighted = weighted + series.stack("weighted_correction")
        d1_weighted = d1_weighted + series.stack("d1_weighted_correction")
    energy_gradient = (d1_weighted - weighted / rho * d1_rho) / rho
    p2 = series.stack("p2_density")
    mixed = (series.stack("d1_p2_density") - p2 / rho * d1_rho) / rho
    terms = {
        "momentum_rate": _rate(series, "p1"),
        "energy_gradient": energy_gradient,
        "convective": -series.q2_dot[:, None] * mixed,
    }
    logger.debug("particle 2 kinetic term on the cut weighted by m2 = %g, not m1", series.slices[0].masses[1])
    return _result("hamilton_jacobi" if quantum else "hamilton_jacobi_classical", series, terms)


def conditional_schrodinger_residual(series: ConditionalSeries, classical: Optional[bool] = None) -> ConditionalResidual:
    """``i hbar d_t psi1`` minus the right side of the conditional Schrodinger equation.

    Right side: ``-(hbar^2/2m1) d1^2 psi1 + V|_cut psi1 - (hbar^2/2m2) d2^2 psi|_cut
    + i hbar (dq2/dt) d2 psi|_cut``; the classical variant adds
    ``+(hbar^2/2) sum_i lap_i|psi| / (m_i |psi|)`` on the cut, which makes it
    nonlinear. This is an identity on cuts of the full solution, not a closed
    equation for ``psi1``. ``classical`` defaults to the evolution mode.
    """
    classical = series.mode == "classical" if classical is None else classical
    hbar = series.hamiltonian.hbar
    m1, m2 = series.slices[0].masses
    grid = series.grid
    scheme = "spectral" if grid.all_periodic else "central"
    psi = series.stack("psi")
    potential = series.stack("potential")
    if classical:
        potential = potential + series.stack("correction")
    d11_psi = np.stack([partial_array(partial_array(p, grid, 0, scheme), grid, 0, scheme) for p in psi])
    terms = {
        "time_derivative": 1j * hbar * _rate(series, "psi"),
        "kinetic_1": hbar**2 / (2.0 * m1) * d11_psi,
        "potential": -potential * psi,
        "kinetic_2": hbar**2 / (2.0 * m2) * series.stack("d22_psi"),
        "convective": -1j * hbar * series.q2_dot[:, None] * series.stack("d2_psi"),
    }
    return _result("schrodinger_classical" if classical else "schrodinger", series, terms)


def conditional_osmotic(series: ConditionalSeries, R0: Optional[np.ndarray] = None) -> np.ndarray:
    """Accumulate the conditional osmotic potential ``R1`` along ``dq1/dt = v1``.

    Along each characteristic ``dR1/dt = -(hbar/2)(d1 v1 + d2 v2|_cut)
    + (dq2/dt - v2|_cut) d2 R|_cut``; the last term vanishes at particle 1's
    own position and keeps ``exp(2 R1 / hbar)`` proportional to ``rho1`` off it.
    Semi-Lagrangian midpoint steps between slices with spline sampling.

    Returns:
        ``R1`` at every slice, shape ``(T, n1)``.
    """
    if len(series) < 2:
        raise ConfigurationError("osmotic accumulation needs at least two slices")
    grid = series.grid
    hbar = series.hamiltonian.hbar
    nodes = grid.axis(0)
    scheme = "spectral" if grid.all_periodic else "central"

    def source(s) -> np.ndarray:
        rho = s.safe_rho
        d1_v1 = (partial_array(s.current1, grid, 0, scheme) - s.v1 * s.d1_rho) / rho
        d2_v2 = (s.d2_current - s.v2 * s.d2_rho) / rho
        return -0.5 * hbar * (d1_v1 + d2_v2) + (s.q2_dot - s.v2) * s.d2_R

    R = np.empty((len(series),) + grid.shape)
    R[0] = series.slices[0].R if R0 is None else np.asarray(R0, dtype=float)
    sources = [source(s) for s in series.slices]
    velocities = [s.v1 for s in series.slices]
    times = series.times
    for n in range(len(series) - 1):
        dt = times[n + 1] - times[n]
        mid_v = 0.5 * (velocities[n] + velocities[n + 1])
        midpoint = nodes - 0.5 * dt * mid_v
        velocity = sample_along(mid_v, grid, 0, midpoint)
        departure = nodes - dt * velocity
        midpoint = nodes - 0.5 * dt * velocity
        mid_source = sample_along(0.5 * (sources[n] + sources[n + 1]), grid, 0, midpoint)
        ends = 0.5 * (sample_along(sources[n], grid, 0, departure) + sources[n + 1])
        R[n + 1] = sample_along(R[n], grid, 0, departure) + dt * (2.0 * mid_source + ends) / 3.0
    logger.debug("accumulated conditional osmotic potential over %d intervals", len(series) - 1)
    return R


def osmotic_deviation(series: ConditionalSeries, R: np.ndarray) -> np.ndarray:
    """Per-slice max ``|R - (hbar/2) ln rho1 - c|`` on the support, ``c`` the mean offset there."""
    direct = series.stack("R")
    support = _support(series)
    deviations = []
    for accumulated, exact, mask in zip(R, direct, support):
        difference = accumulated[mask] - exact[mask]
        deviations.append(float(np.max(np.abs(difference - np.mean(difference)))))
    return np.array(deviations)


def residual_table(series: ConditionalSeries) -> pd.DataFrame:
    """Rows of every conditional identity in the mode the slices were evolved in."""
    results = [
        conditional_continuity_residual(series),
        conditional_qhj_residual(series),
        conditional_schrodinger_residual(series),
    ]
    return pd.concat([r.as_frame() for r in results], ignore_index=True)


def conditional_circulation(s: ConditionalSlice) -> CirculationResult:
    """``loop-integral d1 S1 dq1`` once around the periodic axis of particle 1.

    The result counts floored samples the same way :func:`circulation.circulate` does.

    Raises:
        ConfigurationError: if particle 1's axis is not periodic.
    """
    if not s.grid.periodic[0]:
        raise ConfigurationError("a closed loop in q1 alone needs a periodic axis")
    floored = int(np.count_nonzero(s.rho <= s.floor))
    if floored:
        logger.warning("conditional loop at t=%.4g passes %d floored samples", s.t, floored)
    value = float(np.sum(s.p1) * s.grid.spacing[0])
    return CirculationResult(value, s.hbar, floored)
