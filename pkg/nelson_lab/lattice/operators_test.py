"""Test cases for lattice operators."""

import numpy as np
import pytest

from errors import ConfigurationError, OutOfDomainError
from lattice import (
    ComplexField,
    Grid,
    RealField,
    VectorField,
    curl_2d,
    gradient,
    integrate,
    interpolate,
    laplacian,
    partial_array,
    time_derivative,
)


@pytest.fixture
def gaussian_grid():
    return Grid.uniform(1, 256, (-8.0, 8.0), periodic=True)


@pytest.fixture
def ring_grid():
    return Grid.uniform(1, 64, (0.0, 2.0 * np.pi), periodic=True)


class TestGrid:
    """Test grid construction and geometry."""

    def test_spacing_and_nodes(self):
        grid = Grid.uniform(1, 16, (0.0, 1.0))
        assert grid.spacing == (1.0 / 16,)
        assert grid.axis(0)[0] == 0.0
        assert grid.axis(0)[-1] == pytest.approx(1.0 - 1.0 / 16)

    def test_rejects_coarse_axis(self):
        with pytest.raises(ConfigurationError):
            Grid.uniform(1, 4, (0.0, 1.0))

    def test_rejects_empty_extent(self):
        with pytest.raises(ConfigurationError):
            Grid(((1.0, 1.0),), (16,), (True,))

    def test_rejects_four_axes(self):
        with pytest.raises(ConfigurationError):
            Grid.uniform(4, 8, (0.0, 1.0))

    def test_wrap(self):
        grid = Grid.uniform(2, 8, (-1.0, 1.0))
        wrapped = grid.wrap(np.array([[1.25, -1.5]]))
        assert wrapped[0] == pytest.approx([-0.75, 0.5])


class TestFields:
    """Test field invariants."""

    def test_values_are_read_only(self, ring_grid):
        f = RealField(ring_grid, np.zeros(64))
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_rejects_non_finite(self, ring_grid):
        values = np.zeros(64)
        values[3] = np.nan
        with pytest.raises(ConfigurationError):
            RealField(ring_grid, values)

    def test_rejects_wrong_shape(self, ring_grid):
        with pytest.raises(ConfigurationError):
            VectorField(ring_grid, np.zeros(64))

    def test_normalized(self, gaussian_grid):
        (x,) = gaussian_grid.mesh()
        psi = ComplexField(gaussian_grid, 3.0 * np.exp(-x**2) * np.exp(0.4j * x)).normalized()
        assert psi.norm() == pytest.approx(1.0, abs=1e-10)
        assert integrate(psi.density()) == pytest.approx(1.0, abs=1e-10)


class TestGradient:
    """Test first derivatives."""

    @pytest.mark.parametrize("scheme", ["spectral", "central"])
    def test_constant(self, ring_grid, scheme):
        f = RealField(ring_grid, np.full(64, 3.7))
        np.testing.assert_allclose(gradient(f, scheme).values, 0.0, atol=1e-11)

    def test_constant_central_is_exact(self):
        grid = Grid(((0.0, 1.0), (0.0, 2.0)), (16, 12), (True, False))
        f = RealField(grid, np.full(grid.shape, 3.7))
        assert np.all(gradient(f, "central").values == 0.0)
        assert np.all(laplacian(f, "central").values == 0.0)

    def test_spectral_fourier_mode(self):
        length = 5.0
        grid = Grid.uniform(1, 64, (0.0, length))
        (x,) = grid.mesh()
        k = 2.0 * np.pi / length
        f = RealField(grid, np.sin(k * x))
        np.testing.assert_allclose(gradient(f, "spectral").values[0], k * np.cos(k * x), atol=1e-12)

    def test_central_gaussian(self, gaussian_grid):
        (x,) = gaussian_grid.mesh()
        f = RealField(gaussian_grid, np.exp(-x**2 / 2))
        error = np.max(np.abs(gradient(f, "central").values[0] - (-x * np.exp(-x**2 / 2))))
        assert error < 1e-3

    def test_central_non_periodic(self):
        grid = Grid.uniform(1, 256, (-8.0, 8.0), periodic=False)
        (x,) = grid.mesh()
        f = RealField(grid, np.exp(-x**2 / 2))
        error = np.max(np.abs(gradient(f, "central").values[0] - (-x * np.exp(-x**2 / 2))))
        assert error < 1e-3

    def test_spectral_requires_periodic(self):
        grid = Grid.uniform(1, 32, (0.0, 1.0), periodic=False)
        with pytest.raises(ConfigurationError):
            gradient(RealField(grid, np.zeros(32)), "spectral")

    def test_unknown_scheme(self, ring_grid):
        with pytest.raises(ConfigurationError):
            gradient(RealField(ring_grid, np.zeros(64)), "upwind")

    @pytest.mark.parametrize("scheme", ["spectral", "central"])
    def test_periodic_divergence_theorem(self, ring_grid, scheme):
        (x,) = ring_grid.mesh()
        f = RealField(ring_grid, np.exp(np.sin(x)) + np.cos(3 * x))
        assert integrate(RealField(ring_grid, gradient(f, scheme).values[0])) == pytest.approx(0.0, abs=1e-12)

    def test_complex_input_stays_complex(self, ring_grid):
        (x,) = ring_grid.mesh()
        d = partial_array(np.exp(2j * x), ring_grid, 0, "spectral")
        np.testing.assert_allclose(d, 2j * np.exp(2j * x), atol=1e-12)


class TestLaplacian:
    """Test second derivatives."""

    def test_spectral_eigenfunction(self, ring_grid):
        (x,) = ring_grid.mesh()
        f = RealField(ring_grid, np.sin(4 * x))
        np.testing.assert_allclose(laplacian(f, "spectral").values, -16 * np.sin(4 * x), atol=1e-11)

    def test_central_gaussian(self, gaussian_grid):
        (x,) = gaussian_grid.mesh()
        f = RealField(gaussian_grid, np.exp(-x**2 / 2))
        exact = (x**2 - 1) * np.exp(-x**2 / 2)
        assert np.max(np.abs(laplacian(f, "central").values - exact)) < 1e-2

    def test_non_periodic_edges_second_order(self):
        grid = Grid.uniform(1, 64, (0.0, 1.0), periodic=False)
        (x,) = grid.mesh()
        f = RealField(grid, x**3)
        np.testing.assert_allclose(laplacian(f, "central").values, 6 * x, atol=1e-9)

    def test_curl_of_gradient_vanishes(self):
        grid = Grid.uniform(2, 64, (-np.pi, np.pi))
        x, y = grid.mesh()
        phi = RealField(grid, np.sin(x) * np.cos(2 * y))
        np.testing.assert_allclose(curl_2d(gradient(phi, "spectral"), "spectral").values, 0.0, atol=1e-11)


class TestInterpolate:
    """Test multilinear interpolation."""

    def test_node_identity(self):
        grid = Grid(((-2.0, 2.0), (0.0, 3.0)), (16, 12), (True, False))
        x, y = grid.mesh()
        f = RealField(grid, np.sin(x) + y**2)
        assert interpolate(f, np.array([x[5, 7], y[5, 7]])) == f.values[5, 7]

    def test_linear_field_exact(self):
        grid = Grid.uniform(1, 32, (0.0, 4.0), periodic=False)
        (x,) = grid.mesh()
        f = RealField(grid, 2.0 * x)
        midpoint = 0.5 * (x[10] + x[11])
        assert interpolate(f, np.array([midpoint])) == pytest.approx(2.0 * midpoint, abs=1e-14)

    def test_periodic_wrap(self):
        grid = Grid.uniform(1, 32, (0.0, 1.0))
        (x,) = grid.mesh()
        f = ComplexField(grid, np.exp(2j * np.pi * x))
        inside = interpolate(f, np.array([0.3]))
        assert interpolate(f, np.array([1.3])) == pytest.approx(inside)
        assert interpolate(f, np.array([-0.7])) == pytest.approx(inside)

    def test_out_of_domain(self):
        grid = Grid.uniform(1, 32, (0.0, 1.0), periodic=False)
        f = RealField(grid, np.zeros(32))
        with pytest.raises(OutOfDomainError):
            interpolate(f, np.array([1.2]))

    def test_second_order_refinement(self):
        rng = np.random.default_rng(7)
        points = rng.uniform(-3.0, 3.0, size=(200, 2))
        errors = []
        for n in (32, 64):
            grid = Grid.uniform(2, n, (-6.0, 6.0))
            x, y = grid.mesh()
            f = RealField(grid, np.exp(-(x**2 + y**2) / 2))
            exact = np.exp(-(points**2).sum(axis=1) / 2)
            errors.append(np.max(np.abs(interpolate(f, points) - exact)))
        assert errors[1] < errors[0] / 3.0

    def test_vector_field(self):
        grid = Grid.uniform(2, 16, (0.0, 1.0))
        x, y = grid.mesh()
        v = VectorField(grid, np.stack([x, 2 * y]))
        assert interpolate(v, np.array([0.25, 0.5])) == pytest.approx([0.25, 1.0])


class TestIntegrate:
    """Test quadrature."""

    def test_unit_interval(self):
        grid = Grid.uniform(1, 64, (0.0, 1.0))
        assert integrate(RealField(grid, np.ones(64))) == pytest.approx(1.0, abs=1e-15)

    def test_standard_gaussian(self, gaussian_grid):
        (x,) = gaussian_grid.mesh()
        density = RealField(gaussian_grid, np.exp(-x**2 / 2) / np.sqrt(2 * np.pi))
        assert integrate(density) == pytest.approx(1.0, abs=1e-8)


class TestTimeDerivative:
    """Test snapshot-series differentiation."""

    def test_quadratic_in_time_exact(self):
        times = np.linspace(0.0, 1.0, 6)
        series = np.stack([np.full(4, t**2) for t in times])
        np.testing.assert_allclose(time_derivative(series, times), np.stack([np.full(4, 2 * t) for t in times]))

    def test_mismatched_times(self):
        with pytest.raises(ConfigurationError):
            time_derivative(np.zeros((3, 4)), [0.0, 0.1, 0.3])
