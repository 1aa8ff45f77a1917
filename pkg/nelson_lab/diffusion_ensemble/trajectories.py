"""Recorded walker paths, the drift sources that drive them and the NLT1 store."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Literal, Optional, Union

import numpy as np

from diffusion_ensemble.walkers import DriftSource, Ensemble, NoiseSpec, backward_step, euler_maruyama_step
from errors import ConfigurationError
from lattice import Grid, interpolate_array
from madelung import MadelungSeries

logger = logging.getLogger(__name__)

MAGIC = b"NLT1"


@dataclass
class TrajectoryBundle:
    """Walker positions every ``stride`` steps: ``frames[f]`` is ``(M, dims)`` at ``times[f]``."""

    stride: int
    times: List[float] = field(default_factory=list)
    frames: List[np.ndarray] = field(default_factory=list)
    clamped: int = 0
    reflected: int = 0

    def append(self, ens: Ensemble) -> None:
        self.times.append(float(ens.t))
        self.frames.append(np.array(ens.positions))
        self.clamped, self.reflected = ens.clamped, ens.reflected

    @property
    def walkers(self) -> int:
        return self.frames[0].shape[0]

    @property
    def dims(self) -> int:
        return self.frames[0].shape[1]

    def positions(self) -> np.ndarray:
        """All frames stacked, shape ``(F, M, dims)``."""
        return np.stack(self.frames)

    def nearest_frame(self, t: float) -> int:
        return int(np.argmin(np.abs(np.asarray(self.times) - t)))


def encode_trajectories(bundle: TrajectoryBundle) -> bytes:
    """NLT1 layout: magic, ``<u8`` M, ``<u4`` dims, ``<u4`` stride, ``<u8`` frame
    count, then per frame ``<f8`` t followed by ``M * dims`` ``<f8`` positions."""
    header = [
        MAGIC,
        np.array([bundle.walkers], dtype="<u8").tobytes(),
        np.array([bundle.dims, bundle.stride], dtype="<u4").tobytes(),
        np.array([len(bundle.frames)], dtype="<u8").tobytes(),
    ]
    body = [np.array([t], dtype="<f8").tobytes() + np.ascontiguousarray(f, dtype="<f8").tobytes() for t, f in zip(bundle.times, bundle.frames)]
    return b"".join(header + body)


def decode_trajectories(data: bytes) -> TrajectoryBundle:
    if data[:4] != MAGIC:
        raise ConfigurationError(f"not an NLT1 store (magic {data[:4]!r})")
    walkers = int(np.frombuffer(data, "<u8", 1, 4)[0])
    dims, stride = (int(v) for v in np.frombuffer(data, "<u4", 2, 12))
    count = int(np.frombuffer(data, "<u8", 1, 20)[0])
    record = 1 + walkers * dims
    raw = np.frombuffer(data, "<f8", count * record, 28).astype(np.float64).reshape(count, record)
    bundle = TrajectoryBundle(stride)
    bundle.times = raw[:, 0].tolist()
    bundle.frames = [row[1:].reshape(walkers, dims) for row in raw]
    return bundle


def write_trajectories(bundle: TrajectoryBundle, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_trajectories(bundle))
    logger.debug("wrote %d frames of %d walkers to %s", len(bundle.frames), bundle.walkers, path)
    return path


def read_trajectories(path: Union[str, Path]) -> TrajectoryBundle:
    return decode_trajectories(Path(path).read_bytes())


def series_drift(series: MadelungSeries, direction: Literal["forward", "backward"] = "forward") -> Callable[[np.ndarray, float], np.ndarray]:
    """Drift callable reading ``b`` (or ``b*``) linearly interpolated between the two snapshots around ``t``.

    Times outside the series read the first or last snapshot.
    """
    drifts = series.stack("b" if direction == "forward" else "b_star")
    times = np.asarray(series.times)
    grid = series.grid

    def sample(index: int, positions: np.ndarray) -> np.ndarray:
        return np.stack([interpolate_array(drifts[index, a], grid, positions) for a in range(grid.dims)], axis=-1)

    def drift(positions: np.ndarray, t: float) -> np.ndarray:
        if t <= times[0] or len(times) == 1:
            return sample(0, positions)
        if t >= times[-1]:
            return sample(len(times) - 1, positions)
        right = int(np.searchsorted(times, t, side="right"))
        left = right - 1
        weight = (t - times[left]) / (times[right] - times[left])
        if weight == 0.0:
            return sample(left, positions)
        return (1.0 - weight) * sample(left, positions) + weight * sample(right, positions)

    return drift


def propagate_ensemble(
    ens: Ensemble,
    drift: DriftSource,
    grid: Grid,
    dt: float,
    steps: int,
    noise: NoiseSpec,
    direction: Literal["forward", "backward"] = "forward",
    stride: int = 1,
    clamp: Optional[float] = None,
    threads: int = 1,
) -> TrajectoryBundle:
    """Step the ensemble ``steps`` times, recording the start, every ``stride``-th and the final frame."""
    if direction not in ("forward", "backward"):
        raise ConfigurationError(f"direction must be 'forward' or 'backward', got {direction!r}")
    if stride < 1:
        raise ConfigurationError("trajectory stride must be at least 1")
    step = euler_maruyama_step if direction == "forward" else backward_step
    bundle = TrajectoryBundle(stride)
    bundle.append(ens)
    for n in range(1, steps + 1):
        ens = step(ens, drift, grid, dt, noise, clamp, threads)
        if n % stride == 0 or n == steps:
            bundle.append(ens)
    if bundle.clamped:
        logger.info("drift clamped on %d walker-steps", bundle.clamped)
    return bundle
