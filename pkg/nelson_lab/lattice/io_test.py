"""Test cases for field dumps."""

import numpy as np
import pandas as pd
import pytest

from errors import ConfigurationError
from lattice import ComplexField, Grid, RealField, VectorField, decode_field, encode_field, read_field, write_field, write_field_csv


@pytest.fixture
def plane_grid():
    return Grid(((-1.0, 1.0), (0.0, 2.0)), (8, 10), (True, False))


class TestFieldDump:
    """Test the NLF1 binary format."""

    def test_header_layout(self, plane_grid):
        data = encode_field(RealField(plane_grid, np.zeros(plane_grid.shape)))
        assert data[:4] == b"NLF1"
        assert np.frombuffer(data, "<u4", 1, 4)[0] == 2
        assert list(np.frombuffer(data, "<u4", 2, 8)) == [8, 10]
        assert list(np.frombuffer(data, "<f8", 4, 16)) == [-1.0, 1.0, 0.0, 2.0]
        assert list(np.frombuffer(data, "u1", 2, 48)) == [1, 0]
        header = 4 + 4 + 8 + 32 + 2 + 1 + 4
        assert len(data) == header + 8 * 80

    def test_complex_samples_are_pairs(self, plane_grid):
        values = np.full(plane_grid.shape, 1.5 - 2.0j)
        data = encode_field(ComplexField(plane_grid, values))
        samples = np.frombuffer(data, "<f8", offset=len(data) - 16 * 80)
        assert list(samples[:2]) == [1.5, -2.0]

    def test_file_round_trip(self, plane_grid, tmp_path):
        x, y = plane_grid.mesh()
        original = VectorField(plane_grid, np.stack([x * y, x - y]))
        restored = read_field(write_field(original, tmp_path / "fields" / "v.nlf"))
        assert isinstance(restored, VectorField)
        assert restored.grid == plane_grid
        np.testing.assert_array_equal(restored.values, original.values)

    def test_rejects_bad_magic(self):
        with pytest.raises(ConfigurationError):
            decode_field(b"XXXX" + bytes(64))


class TestFieldCsv:
    """Test per-node CSV export."""

    def test_complex_columns(self, plane_grid, tmp_path):
        x, _ = plane_grid.mesh()
        path = write_field_csv(ComplexField(plane_grid, np.exp(1j * x)), tmp_path / "psi.csv")
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["q0", "q1", "re", "im"]
        assert len(frame) == 80
