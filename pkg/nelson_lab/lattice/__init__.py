"""Grids, fields and the operators every other module builds on."""

from lattice.grid import ComplexField, Field, Grid, RealField, VectorField
from lattice.operators import (
    curl_2d,
    divergence,
    divergence_array,
    fractional_indices,
    gradient,
    gradient_array,
    integrate,
    integrate_array,
    interpolate,
    interpolate_array,
    laplacian,
    laplacian_array,
    partial_array,
    second_partial_array,
    time_derivative,
)
from lattice.io import decode_field, encode_field, field_frame, read_field, write_field, write_field_csv

__all__ = [
    "Grid",
    "Field",
    "RealField",
    "ComplexField",
    "VectorField",
    "gradient",
    "gradient_array",
    "laplacian",
    "laplacian_array",
    "divergence",
    "divergence_array",
    "curl_2d",
    "partial_array",
    "second_partial_array",
    "integrate",
    "integrate_array",
    "interpolate",
    "interpolate_array",
    "fractional_indices",
    "time_derivative",
    "encode_field",
    "decode_field",
    "read_field",
    "write_field",
    "write_field_csv",
    "field_frame",
]
