"""Closed configuration-space paths."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from errors import ConfigurationError, ResolutionError
from lattice import Grid

DEFAULT_CIRCLE_VERTICES = 256


@dataclass(frozen=True)
class LoopPath:
    """Ordered vertices of a closed loop; the last vertex connects back to the first.

    ``axes`` lists the coordinates the loop displaces. Every other coordinate is
    held fixed along the whole loop, which is how a single particle's loop is
    embedded in the full configuration space.
    """

    vertices: np.ndarray = field(repr=False)
    axes: Tuple[int, ...]
    name: str = "loop"

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float)
        if vertices.ndim != 2 or len(vertices) < 3:
            raise ConfigurationError("a loop needs at least three vertices of equal dimension")
        axes = tuple(int(a) for a in self.axes)
        if not axes or any(a < 0 or a >= vertices.shape[1] for a in axes):
            raise ConfigurationError(f"loop axes {axes} do not fit {vertices.shape[1]}-dimensional vertices")
        held = [a for a in range(vertices.shape[1]) if a not in axes]
        if held and np.any(np.ptp(vertices[:, held], axis=0) > 0.0):
            raise ConfigurationError("coordinates outside the loop axes must stay fixed")
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "axes", axes)

    @property
    def dims(self) -> int:
        return self.vertices.shape[1]

    def segments(self) -> Tuple[np.ndarray, np.ndarray]:
        """Midpoints and displacement vectors of every segment, closing segment included."""
        following = np.roll(self.vertices, -1, axis=0)
        return 0.5 * (self.vertices + following), following - self.vertices

    def reversed(self) -> "LoopPath":
        return LoopPath(self.vertices[::-1], self.axes, f"{self.name}-reversed")

    def check_resolution(self, grid: Grid) -> None:
        """Require every segment to span less than two grid cells per axis.

        Raises:
            ResolutionError: if a segment is too long.
        """
        if grid.dims != self.dims:
            raise ConfigurationError(f"loop has {self.dims} coordinates, grid has {grid.dims} axes")
        _, deltas = self.segments()
        limit = 2.0 * np.asarray(grid.spacing)
        worst = np.max(np.abs(deltas) / limit)
        if worst >= 1.0:
            raise ResolutionError(f"loop {self.name!r} has segments longer than two grid cells; add vertices")


def _base_point(dims: int, axes: Sequence[int], fixed: Optional[Sequence[float]]) -> np.ndarray:
    base = np.zeros(dims) if fixed is None else np.array(fixed, dtype=float)
    if base.shape != (dims,):
        raise ConfigurationError(f"fixed point must have {dims} coordinates")
    return base


def circle_loop(
    center: Sequence[float],
    radius: float,
    dims: int = 2,
    axes: Sequence[int] = (0, 1),
    vertices: int = DEFAULT_CIRCLE_VERTICES,
    fixed: Optional[Sequence[float]] = None,
    clockwise: bool = False,
    name: Optional[str] = None,
) -> LoopPath:
    """Circle of ``radius`` about ``center`` in the plane of two coordinate axes."""
    if len(axes) != 2:
        raise ConfigurationError("a circle lives in exactly two axes")
    if radius <= 0:
        raise ConfigurationError("circle radius must be positive")
    points = np.repeat(_base_point(dims, axes, fixed)[None, :], vertices, axis=0)
    angles = 2.0 * np.pi * np.arange(vertices) / vertices
    if clockwise:
        angles = -angles
    points[:, axes[0]] = center[0] + radius * np.cos(angles)
    points[:, axes[1]] = center[1] + radius * np.sin(angles)
    return LoopPath(points, tuple(axes), name or f"circle-r{radius:g}")


def rectangle_loop(
    grid: Grid,
    lower: Sequence[float],
    upper: Sequence[float],
    axes: Sequence[int] = (0, 1),
    fixed: Optional[Sequence[float]] = None,
    name: Optional[str] = None,
) -> LoopPath:
    """Counter-clockwise rectangle with roughly one vertex per grid cell along each side."""
    if len(axes) != 2:
        raise ConfigurationError("a rectangle lives in exactly two axes")
    (x0, y0), (x1, y1) = lower, upper
    if x1 <= x0 or y1 <= y0:
        raise ConfigurationError("rectangle upper corner must exceed the lower corner")
    nx = max(2, int(np.ceil((x1 - x0) / grid.spacing[axes[0]])))
    ny = max(2, int(np.ceil((y1 - y0) / grid.spacing[axes[1]])))
    xs = np.linspace(x0, x1, nx, endpoint=False)
    ys = np.linspace(y0, y1, ny, endpoint=False)
    corners = np.concatenate(
        [
            np.stack([xs, np.full(nx, y0)], axis=1),
            np.stack([np.full(ny, x1), ys], axis=1),
            np.stack([x1 - (xs - x0), np.full(nx, y1)], axis=1),
            np.stack([np.full(ny, x0), y1 - (ys - y0)], axis=1),
        ]
    )
    points = np.repeat(_base_point(grid.dims, axes, fixed)[None, :], len(corners), axis=0)
    points[:, axes[0]] = corners[:, 0]
    points[:, axes[1]] = corners[:, 1]
    return LoopPath(points, tuple(axes), name or "rectangle")
