"""Tensor-product grids over configuration space and the fields sampled on them."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from errors import ConfigurationError, DegenerateInputError

MAX_DIMS = 3
MIN_POINTS = 8


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid.

    Nodes sit at ``min + j*h`` with ``h = (max - min) / points``. A periodic axis
    identifies ``max`` with ``min``, so the node at ``max`` is never stored.
    """

    extents: Tuple[Tuple[float, float], ...]
    points: Tuple[int, ...]
    periodic: Tuple[bool, ...]

    def __post_init__(self):
        extents = tuple((float(lo), float(hi)) for lo, hi in self.extents)
        points = tuple(int(n) for n in self.points)
        periodic = tuple(bool(p) for p in self.periodic)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "periodic", periodic)

        if not 1 <= len(points) <= MAX_DIMS:
            raise ConfigurationError(f"grid must have 1 to {MAX_DIMS} axes, got {len(points)}")
        if not len(extents) == len(points) == len(periodic):
            raise ConfigurationError("extents, points and periodic flags must have one entry per axis")
        for axis, n in enumerate(points):
            if n < MIN_POINTS:
                raise ConfigurationError(f"axis {axis}: at least {MIN_POINTS} points required, got {n}")
            lo, hi = extents[axis]
            if not hi > lo:
                raise ConfigurationError(f"axis {axis}: extent [{lo}, {hi}] has non-positive length")

    @classmethod
    def uniform(cls, dims: int, points: int, extent: Sequence[float], periodic: bool = True) -> "Grid":
        """Same extent, resolution and boundary on every axis."""
        lo, hi = extent
        return cls(((lo, hi),) * dims, (points,) * dims, (periodic,) * dims)

    @property
    def dims(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.points

    @cached_property
    def spacing(self) -> Tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.extents, self.points))

    @cached_property
    def lengths(self) -> Tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.extents)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def all_periodic(self) -> bool:
        return all(self.periodic)

    def axis(self, axis: int) -> np.ndarray:
        lo, _ = self.extents[axis]
        return lo + self.spacing[axis] * np.arange(self.points[axis])

    @cached_property
    def axes(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.axis(a) for a in range(self.dims))

    def mesh(self) -> Tuple[np.ndarray, ...]:
        """Coordinate arrays with ``indexing='ij'``, one per axis."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Angular wavenumbers of the FFT modes along one axis."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points[axis], d=self.spacing[axis])

    def kmesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(self.wavenumbers(a) for a in range(self.dims)), indexing="ij"))

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.extents, tuple(n * factor for n in self.points), self.periodic)

    def coarsened(self, factor: int = 2) -> "Grid":
        return Grid(self.extents, tuple(n // factor for n in self.points), self.periodic)

    def sub_grid(self, axes: Sequence[int]) -> "Grid":
        """Grid spanned by a subset of axes (e.g. one particle's coordinate block)."""
        return Grid(
            tuple(self.extents[a] for a in axes),
            tuple(self.points[a] for a in axes),
            tuple(self.periodic[a] for a in axes),
        )

    def wrap(self, points: np.ndarray) -> np.ndarray:
        """Map coordinates on periodic axes back into ``[min, max)``."""
        points = np.array(points, dtype=float, copy=True)
        for a in range(self.dims):
            if self.periodic[a]:
                lo, _ = self.extents[a]
                points[..., a] = lo + np.mod(points[..., a] - lo, self.lengths[a])
        return points

    def describe(self) -> dict:
        return {
            "extents": [list(e) for e in self.extents],
            "points": list(self.points),
            "periodic": list(self.periodic),
        }


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class Field:
    """Scalar samples at every grid node. Values are copied and made read-only."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.expected_shape():
            raise ConfigurationError(
                f"{type(self).__name__} values shape {values.shape} does not match {self.expected_shape()}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError(f"{type(self).__name__} contains non-finite samples")
        object.__setattr__(self, "values", _freeze(values))

    def expected_shape(self) -> Tuple[int, ...]:
        return self.grid.shape

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)


class RealField(Field):
    def __post_init__(self):
        if np.iscomplexobj(self.values):
            raise ConfigurationError("RealField values must be real")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        super().__post_init__()


class ComplexField(Field):
    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        super().__post_init__()

    def density(self) -> RealField:
        return RealField(self.grid, np.abs(self.values) ** 2)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume)

    def normalized(self) -> "ComplexField":
        norm = self.norm()
        if norm <= 0.0:
            raise DegenerateInputError("cannot normalize a wavefunction with zero norm")
        return ComplexField(self.grid, self.values / np.sqrt(norm))


class VectorField(Field):
    """Per-axis components stacked on the leading dimension."""

    def expected_shape(self) -> Tuple[int, ...]:
        return (self.grid.dims,) + self.grid.shape

    def component(self, axis: int) -> np.ndarray:
        return self.values[axis]
