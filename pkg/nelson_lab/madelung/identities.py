"""Continuity, Fokker-Planck and mean-derivative identities over snapshot series."""

import logging
from typing import Dict, Literal, Optional, Sequence

import numpy as np
import pandas as pd

from errors import ConfigurationError
from lattice import divergence_array, partial_array, second_partial_array, time_derivative
from madelung.fields import MadelungFields, MadelungSeries

logger = logging.getLogger(__name__)

Direction = Literal["forward", "backward"]


def _check_direction(direction: str) -> None:
    if direction not in ("forward", "backward"):
        raise ConfigurationError(f"direction must be 'forward' or 'backward', got {direction!r}")


def density_rate(series: MadelungSeries) -> np.ndarray:
    """``d rho / dt`` at every snapshot of the series."""
    return time_derivative(series.stack("rho"), series.times)


def continuity_residual(fields: MadelungFields, rho_dot: np.ndarray) -> np.ndarray:
    """``d_t rho + sum_a d_a (rho v_a)``."""
    return rho_dot + divergence_array(fields.current, fields.grid, fields.scheme)


def _diffusion_term(fields: MadelungFields) -> np.ndarray:
    # nu lap(rho) written as div(nu grad rho) so it shares stencils with the osmotic flux
    return divergence_array(fields.osmotic_flux, fields.grid, fields.scheme)


def fokker_planck_residual(fields: MadelungFields, rho_dot: np.ndarray, direction: Direction = "forward") -> np.ndarray:
    """Forward ``d_t rho + div(b rho) - nu lap rho`` or backward ``d_t rho + div(b* rho) + nu lap rho``.

    Both reduce algebraically to the continuity residual because ``u rho = nu grad rho``.
    """
    _check_direction(direction)
    sign = 1.0 if direction == "forward" else -1.0
    drift_flux = fields.current + sign * fields.osmotic_flux
    return rho_dot + divergence_array(drift_flux, fields.grid, fields.scheme) - sign * _diffusion_term(fields)


def series_residuals(series: MadelungSeries) -> Dict[str, np.ndarray]:
    """Continuity and both Fokker-Planck residuals at every snapshot, stacked along time."""
    rho_dot = density_rate(series)
    return {
        "continuity": np.stack([continuity_residual(f, r) for f, r in zip(series.fields, rho_dot)]),
        "fokker_planck_forward": np.stack([fokker_planck_residual(f, r, "forward") for f, r in zip(series.fields, rho_dot)]),
        "fokker_planck_backward": np.stack([fokker_planck_residual(f, r, "backward") for f, r in zip(series.fields, rho_dot)]),
    }


def mean_derivative(f_series: np.ndarray, series: MadelungSeries, direction: Direction = "forward") -> np.ndarray:
    """Mean forward ``D f = d_t f + b.grad f + sum_a nu_a d_a^2 f`` or backward ``D* f`` along the series.

    ``f_series`` is a scalar field per snapshot, shape ``(T, *grid.shape)``.
    """
    _check_direction(direction)
    f_series = np.asarray(f_series, dtype=float)
    if f_series.shape != (len(series),) + series.grid.shape:
        raise ConfigurationError(f"f_series shape {f_series.shape} does not match the series")
    grid, scheme = series.grid, series.scheme
    nu = series.hamiltonian.diffusion_coefficients()
    drift = series.stack("b" if direction == "forward" else "b_star")
    sign = 1.0 if direction == "forward" else -1.0

    result = time_derivative(f_series, series.times)
    for a in range(grid.dims):
        result = result + drift[:, a] * partial_array(f_series, grid, a, scheme)
        result = result + sign * nu[a] * second_partial_array(f_series, grid, a, scheme)
    return result


def mean_acceleration(series: MadelungSeries) -> np.ndarray:
    """Stochastic mean acceleration per axis, shape ``(T, dims, *grid.shape)``.

    ``a = d_t v + (v.grad) v - (u.grad) u - nu lap u`` with gradients over every
    configuration axis, the symmetrized second mean derivative of position.
    Values in floored cells are not meaningful; see ``series.floored``.
    """
    H = series.hamiltonian
    grid, scheme = series.grid, series.scheme
    nu = H.diffusion_coefficients()
    v = series.stack("v")
    u = series.stack("u")

    acceleration = time_derivative(v, series.times)
    for a in range(grid.dims):
        for b in range(grid.dims):
            acceleration[:, a] += v[:, b] * partial_array(v[:, a], grid, b, scheme)
            acceleration[:, a] -= u[:, b] * partial_array(u[:, a], grid, b, scheme)
            acceleration[:, a] -= nu[b] * second_partial_array(u[:, a], grid, b, scheme)
    return acceleration


def force_acceleration(series: MadelungSeries) -> np.ndarray:
    """Right-hand side ``(-grad V - (e/c) d_t A + (e/c) v x B) / m`` of the stochastic Newton law.

    The magnetic term is included for 2D single-particle planes and 3D
    single-particle blocks; other layouts only carry the electric terms.
    """
    H = series.hamiltonian
    grid, scheme = series.grid, series.scheme
    masses = H.axis_masses
    potentials = np.stack([H.potential(t) for t in series.times])
    force = -np.stack([partial_array(potentials, grid, a, scheme) for a in range(grid.dims)], axis=1)

    couplings = [H.coupling(t) for t in series.times]
    if couplings[0] is not None:
        eA = np.stack(couplings)
        if len(series) > 1:
            force -= time_derivative(eA, series.times)
        force += _lorentz(series.stack("v"), eA, grid, scheme, H)
    return force / masses.reshape((1, -1) + (1,) * grid.dims)


def _lorentz(v: np.ndarray, eA: np.ndarray, grid, scheme: str, H) -> np.ndarray:
    term = np.zeros_like(v)
    for particle in H.particles:
        axes = particle.axes
        if len(axes) == 2:
            x, y = axes
            bz = partial_array(eA[:, y], grid, x, scheme) - partial_array(eA[:, x], grid, y, scheme)
            term[:, x] += v[:, y] * bz
            term[:, y] -= v[:, x] * bz
        elif len(axes) == 3:
            x, y, z = axes
            curl = {
                x: partial_array(eA[:, z], grid, y, scheme) - partial_array(eA[:, y], grid, z, scheme),
                y: partial_array(eA[:, x], grid, z, scheme) - partial_array(eA[:, z], grid, x, scheme),
                z: partial_array(eA[:, y], grid, x, scheme) - partial_array(eA[:, x], grid, y, scheme),
            }
            term[:, x] += v[:, y] * curl[z] - v[:, z] * curl[y]
            term[:, y] += v[:, z] * curl[x] - v[:, x] * curl[z]
            term[:, z] += v[:, x] * curl[y] - v[:, y] * curl[x]
    return term


def quantum_hamilton_jacobi_residual(series: MadelungSeries, phase_series: np.ndarray) -> np.ndarray:
    """``d_t S + sum_a (m_a v_a^2 / 2) + V + Q`` for the unwrapped phase ``S`` of each snapshot.

    ``phase_series`` must be continuous in time; use ``np.unwrap`` along axis 0
    on ``hbar * angle(psi)`` before passing it in.
    """
    H = series.hamiltonian
    masses = H.axis_masses.reshape((1, -1) + (1,) * series.grid.dims)
    v = series.stack("v")
    kinetic = 0.5 * np.sum(masses * v**2, axis=1)
    potentials = np.stack([H.potential(t) for t in series.times])
    qk = series.stack("quantum_kinetic").sum(axis=1)
    residual = time_derivative(np.asarray(phase_series, dtype=float), series.times) + kinetic + potentials + qk
    if H.include_rest_energy:
        residual = residual + H.rest_energy
    return residual


def residual_summary(residuals: Dict[str, np.ndarray], times: Sequence[float], floored: Optional[np.ndarray] = None, cell_volume: float = 1.0) -> pd.DataFrame:
    """Per-time L2 and max norms of each residual, excluding floored cells."""
    rows = []
    for name, stack in residuals.items():
        for i, t in enumerate(times):
            values = stack[i]
            mask = np.ones(values.shape, dtype=bool) if floored is None else ~floored[i]
            kept = values[mask]
            rows.append(
                {
                    "t": float(t),
                    "identity": name,
                    "l2": float(np.sqrt(np.sum(kept**2) * cell_volume)),
                    "max": float(np.max(np.abs(kept))) if kept.size else 0.0,
                    "floored_cells": int(values.size - kept.size),
                }
            )
    frame = pd.DataFrame(rows, columns=["t", "identity", "l2", "max", "floored_cells"])
    logger.debug("residual summary over %d snapshots, %d identities", len(times), len(residuals))
    return frame
