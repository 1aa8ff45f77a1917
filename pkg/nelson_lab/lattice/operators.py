"""Differential, integral and interpolation operators on grid fields.

Every operator is a pure function. The ``*_array`` variants work on raw numpy
samples so that hot loops in the propagators can skip field construction.
"""

import logging
from typing import Literal, Sequence, Union

import numpy as np
from scipy.ndimage import map_coordinates

from errors import ConfigurationError, OutOfDomainError
from lattice.grid import ComplexField, Field, Grid, RealField, VectorField

logger = logging.getLogger(__name__)

Scheme = Literal["spectral", "central"]

# Relative slack when deciding whether a point sits on the closing node of a
# non-periodic axis.
_EDGE_TOLERANCE = 1e-9


def _check_scheme(grid: Grid, scheme: str, axes: Sequence[int]) -> None:
    if scheme not in ("spectral", "central"):
        raise ConfigurationError(f"unknown differencing scheme {scheme!r}")
    if scheme == "spectral" and not all(grid.periodic[a] for a in axes):
        raise ConfigurationError("spectral differentiation requires every differentiated axis to be periodic")


def _as_real_if_real(result: np.ndarray, source: np.ndarray) -> np.ndarray:
    return result.real if not np.iscomplexobj(source) else result


def partial_array(values: np.ndarray, grid: Grid, axis: int, scheme: Scheme = "central") -> np.ndarray:
    """First partial derivative along ``axis``.

    ``values`` may carry extra leading dimensions; ``axis`` counts from the end
    so a stacked series of snapshots differentiates correctly.
    """
    _check_scheme(grid, scheme, [axis])
    array_axis = values.ndim - grid.dims + axis
    h = grid.spacing[axis]

    if scheme == "spectral":
        n = grid.points[axis]
        k = grid.wavenumbers(axis)
        if n % 2 == 0:
            k = k.copy()
            k[n // 2] = 0.0
        shape = [1] * values.ndim
        shape[array_axis] = n
        spectrum = np.fft.fft(values, axis=array_axis)
        result = np.fft.ifft(1j * k.reshape(shape) * spectrum, axis=array_axis)
        return _as_real_if_real(result, values)

    if grid.periodic[axis]:
        return (np.roll(values, -1, axis=array_axis) - np.roll(values, 1, axis=array_axis)) / (2.0 * h)
    return np.gradient(values, h, axis=array_axis, edge_order=2)


def second_partial_array(values: np.ndarray, grid: Grid, axis: int, scheme: Scheme = "central") -> np.ndarray:
    """Second partial derivative along ``axis``."""
    _check_scheme(grid, scheme, [axis])
    array_axis = values.ndim - grid.dims + axis
    h = grid.spacing[axis]

    if scheme == "spectral":
        k = grid.wavenumbers(axis)
        shape = [1] * values.ndim
        shape[array_axis] = grid.points[axis]
        spectrum = np.fft.fft(values, axis=array_axis)
        result = np.fft.ifft(-(k**2).reshape(shape) * spectrum, axis=array_axis)
        return _as_real_if_real(result, values)

    forward = np.roll(values, -1, axis=array_axis)
    backward = np.roll(values, 1, axis=array_axis)
    result = (forward - 2.0 * values + backward) / h**2
    if not grid.periodic[axis]:
        # one-sided second-order stencils at both ends
        moved = np.moveaxis(values, array_axis, 0)
        out = np.moveaxis(result, array_axis, 0)
        out[0] = (2.0 * moved[0] - 5.0 * moved[1] + 4.0 * moved[2] - moved[3]) / h**2
        out[-1] = (2.0 * moved[-1] - 5.0 * moved[-2] + 4.0 * moved[-3] - moved[-4]) / h**2
    return result


def gradient_array(values: np.ndarray, grid: Grid, scheme: Scheme = "central", axes: Sequence[int] = None) -> np.ndarray:
    axes = range(grid.dims) if axes is None else axes
    return np.stack([partial_array(values, grid, a, scheme) for a in axes])


def laplacian_array(values: np.ndarray, grid: Grid, scheme: Scheme = "central", axes: Sequence[int] = None) -> np.ndarray:
    axes = range(grid.dims) if axes is None else axes
    return sum(second_partial_array(values, grid, a, scheme) for a in axes)


def divergence_array(components: np.ndarray, grid: Grid, scheme: Scheme = "central", axes: Sequence[int] = None) -> np.ndarray:
    """Divergence of a stacked vector; ``components[i]`` pairs with ``axes[i]``."""
    axes = range(grid.dims) if axes is None else axes
    return sum(partial_array(components[i], grid, a, scheme) for i, a in enumerate(axes))


def gradient(f: Field, scheme: Scheme = "central") -> VectorField:
    """Per-axis partial derivatives of a scalar field."""
    return VectorField(f.grid, gradient_array(f.values, f.grid, scheme))


def laplacian(f: Field, scheme: Scheme = "central") -> Field:
    """Sum of second partials of a scalar field."""
    result = laplacian_array(f.values, f.grid, scheme)
    return type(f)(f.grid, result) if isinstance(f, (RealField, ComplexField)) else RealField(f.grid, result)


def divergence(v: VectorField, scheme: Scheme = "central") -> RealField:
    return RealField(v.grid, divergence_array(v.values, v.grid, scheme))


def curl_2d(v: VectorField, scheme: Scheme = "central") -> RealField:
    """Out-of-plane component ``dv_y/dx - dv_x/dy`` of a planar velocity."""
    if v.grid.dims != 2:
        raise ConfigurationError("curl_2d needs a 2D grid")
    values = partial_array(v.values[1], v.grid, 0, scheme) - partial_array(v.values[0], v.grid, 1, scheme)
    return RealField(v.grid, values)


def integrate_array(values: np.ndarray, grid: Grid) -> Union[float, complex]:
    total = np.sum(values) * grid.cell_volume
    return complex(total) if np.iscomplexobj(values) else float(total)


def integrate(f: Field) -> Union[float, complex]:
    """Riemann sum times cell volume."""
    return integrate_array(f.values, f.grid)


def fractional_indices(grid: Grid, points: np.ndarray) -> np.ndarray:
    """Node-index coordinates of ``points`` (shape ``(..., dims)``), wrapped on periodic axes.

    Raises:
        OutOfDomainError: if a point falls outside a non-periodic extent.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[-1] != grid.dims:
        raise ConfigurationError(f"points have {points.shape[-1]} coordinates, grid has {grid.dims} axes")
    indices = np.empty_like(points)
    for a in range(grid.dims):
        lo, _ = grid.extents[a]
        n = grid.points[a]
        idx = (points[..., a] - lo) / grid.spacing[a]
        if grid.periodic[a]:
            idx = np.mod(idx, n)
        else:
            slack = _EDGE_TOLERANCE * n
            if np.any(idx < -slack) or np.any(idx > n - 1 + slack):
                raise OutOfDomainError(f"point outside non-periodic axis {a} extent [{lo}, {grid.axis(a)[-1]}]")
            idx = np.clip(idx, 0.0, n - 1)
        indices[..., a] = idx
    return indices


def _pad_periodic(values: np.ndarray, grid: Grid) -> np.ndarray:
    pad = [(0, 1) if p else (0, 0) for p in grid.periodic]
    return np.pad(values, pad, mode="wrap") if any(grid.periodic) else values


def interpolate_array(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of scalar samples at ``points`` (shape ``(M, dims)``)."""
    coords = fractional_indices(grid, points).T
    padded = _pad_periodic(values, grid)
    if np.iscomplexobj(padded):
        re = map_coordinates(padded.real, coords, order=1, mode="nearest")
        im = map_coordinates(padded.imag, coords, order=1, mode="nearest")
        return re + 1j * im
    return map_coordinates(padded, coords, order=1, mode="nearest")


def interpolate(f: Field, point: np.ndarray) -> Union[float, complex, np.ndarray]:
    """Value of ``f`` at one configuration-space point (or at each row of a point array)."""
    point = np.asarray(point, dtype=float)
    single = point.ndim == 1
    if isinstance(f, VectorField):
        result = np.stack([interpolate_array(c, f.grid, point) for c in f.values], axis=-1)
    else:
        result = interpolate_array(f.values, f.grid, point)
    if single:
        value = result[0]
        return value if isinstance(f, VectorField) else value.item()
    return result


def time_derivative(series: np.ndarray, times: Sequence[float]) -> np.ndarray:
    """d/dt of a stacked snapshot series (time on axis 0).

    Centered differences in the interior and one-sided second-order stencils at
    the ends; two snapshots fall back to a plain difference.

    Raises:
        ConfigurationError: if snapshot times are not uniformly spaced.
    """
    times = np.asarray(times, dtype=float)
    if len(times) != len(series):
        raise ConfigurationError(f"{len(series)} snapshots but {len(times)} times")
    if len(times) < 2:
        raise ConfigurationError("time derivative needs at least two snapshots")
    steps = np.diff(times)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ConfigurationError("snapshot times must be strictly increasing and uniformly spaced")
    edge_order = 2 if len(times) >= 3 else 1
    return np.gradient(series, steps[0], axis=0, edge_order=edge_order)
