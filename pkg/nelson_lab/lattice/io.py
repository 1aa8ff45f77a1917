"""NLF1 binary field dumps and per-node CSV export."""

import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from errors import ConfigurationError
from lattice.grid import ComplexField, Field, Grid, RealField, VectorField

logger = logging.getLogger(__name__)

MAGIC = b"NLF1"

KIND_REAL = 0
KIND_COMPLEX = 1
KIND_VECTOR = 2


def _kind_of(f: Field) -> int:
    if isinstance(f, VectorField):
        return KIND_VECTOR
    if f.is_complex:
        return KIND_COMPLEX
    return KIND_REAL


def encode_field(f: Field) -> bytes:
    """Little-endian NLF1 encoding.

    Layout: magic, ``<u4`` dims, ``<u4`` points per axis, ``<f8`` (min, max) per
    axis, ``u1`` periodic flag per axis, ``u1`` kind, ``<u4`` components, then
    row-major ``<f8`` samples (real/imaginary pairs for complex fields).
    """
    grid = f.grid
    kind = _kind_of(f)
    components = grid.dims if kind == KIND_VECTOR else 1
    header = [
        MAGIC,
        np.array([grid.dims], dtype="<u4").tobytes(),
        np.array(grid.points, dtype="<u4").tobytes(),
        np.array(grid.extents, dtype="<f8").tobytes(),
        np.array(grid.periodic, dtype="u1").tobytes(),
        np.array([kind], dtype="u1").tobytes(),
        np.array([components], dtype="<u4").tobytes(),
    ]
    samples = np.ascontiguousarray(f.values, dtype=complex if kind == KIND_COMPLEX else float)
    payload = samples.view(np.float64).astype("<f8").tobytes()
    return b"".join(header) + payload


def decode_field(data: bytes) -> Field:
    if data[:4] != MAGIC:
        raise ConfigurationError(f"not an NLF1 dump (magic {data[:4]!r})")
    offset = 4
    dims = int(np.frombuffer(data, "<u4", 1, offset)[0])
    offset += 4
    points = tuple(int(n) for n in np.frombuffer(data, "<u4", dims, offset))
    offset += 4 * dims
    extents = np.frombuffer(data, "<f8", 2 * dims, offset).reshape(dims, 2)
    offset += 16 * dims
    periodic = tuple(bool(p) for p in np.frombuffer(data, "u1", dims, offset))
    offset += dims
    kind = int(np.frombuffer(data, "u1", 1, offset)[0])
    offset += 1
    components = int(np.frombuffer(data, "<u4", 1, offset)[0])
    offset += 4

    grid = Grid(tuple(map(tuple, extents)), points, periodic)
    raw = np.frombuffer(data, "<f8", offset=offset).astype(np.float64)
    if kind == KIND_COMPLEX:
        return ComplexField(grid, raw.view(np.complex128).reshape(points))
    if kind == KIND_VECTOR:
        return VectorField(grid, raw.reshape((components,) + points))
    return RealField(grid, raw.reshape(points))


def write_field(f: Field, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_field(f))
    logger.debug("wrote %s field %s to %s", type(f).__name__, f.grid.points, path)
    return path


def read_field(path: Union[str, Path]) -> Field:
    return decode_field(Path(path).read_bytes())


def field_frame(f: Field) -> pd.DataFrame:
    """One row per node: coordinates ``q0..``, then the value column(s)."""
    grid = f.grid
    columns = {f"q{a}": axis.ravel() for a, axis in enumerate(grid.mesh())}
    if isinstance(f, VectorField):
        for a in range(grid.dims):
            columns[f"v{a}"] = f.values[a].ravel()
    elif f.is_complex:
        columns["re"] = f.values.real.ravel()
        columns["im"] = f.values.imag.ravel()
    else:
        columns["value"] = f.values.ravel()
    return pd.DataFrame(columns)


def write_field_csv(f: Field, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    field_frame(f).to_csv(path, index=False, float_format="%.17g")
    return path
