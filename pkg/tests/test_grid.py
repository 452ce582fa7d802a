import math

import numpy as np
import pytest

from stressnet.grid import Field, Grid, check_same_grid, integrate, neumann_extend


class TestGrid:
    def test_rectangle_spacing_and_area(self):
        g = Grid.rectangle(64, 32, origin=(1.0, -2.0), size=(2.0, 1.0))
        assert g.hx == pytest.approx(2.0 / 64)
        assert g.hy == pytest.approx(1.0 / 32)
        assert g.shape == (32, 64)
        assert g.cell_area == pytest.approx(2.0 / 64 / 32)
        assert g.area == pytest.approx(2.0)

    def test_cell_centers_x_fastest(self):
        g = Grid.rectangle(4, 5)
        X, Y = g.centers()
        assert X.shape == (5, 4)
        assert X[0, :3].tolist() == [0.125, 0.375, 0.625]
        assert Y[:2, 0].tolist() == [0.1, 0.30000000000000004]
        assert g.cell_center(1, 2) == (0.375, 0.5)

    def test_locate_interior_and_upper_faces(self):
        g = Grid.rectangle(10, 10)
        assert g.locate((0.05, 0.95)) == (0, 9)
        assert g.locate((1.0, 1.0)) == (9, 9)
        assert g.locate((0.8, 0.8)) == (8, 8)

    def test_refined_halves_spacing(self):
        g = Grid.rectangle(8, 8).refined(2)
        assert (g.nx, g.hx) == (16, 1.0 / 16)

    @pytest.mark.parametrize("nx, ny", [(3, 8), (8, 2)])
    def test_too_small_rejected(self, nx, ny):
        with pytest.raises(ValueError, match="4x4"):
            Grid.rectangle(nx, ny)

    def test_bad_spacing_rejected(self):
        with pytest.raises(ValueError):
            Grid(8, 8, hx=0.0)


class TestField:
    def test_values_reshaped(self):
        g = Grid.rectangle(4, 4)
        f = Field(g, np.arange(16.0))
        assert f.values.shape == (4, 4)
        assert f.values[1, 0] == 4.0

    def test_wrong_size_rejected(self):
        with pytest.raises(ValueError, match="15 values"):
            Field(Grid.rectangle(4, 4), np.zeros(15))

    def test_arithmetic_checks_grid(self):
        a = Field.constant(Grid.rectangle(4, 4), 1.0)
        b = Field.constant(Grid.rectangle(4, 4, zone_id=2), 1.0)
        assert ((a + a) * 0.5).values.max() == 1.0
        assert (-a).values.min() == -1.0
        with pytest.raises(ValueError, match="different grids"):
            a - b
        with pytest.raises(ValueError, match="mismatch"):
            check_same_grid(a, b)

    def test_is_finite(self):
        f = Field.zeros(Grid.rectangle(4, 4))
        assert f.is_finite()
        f.values[2, 2] = np.nan
        assert not f.is_finite()


class TestIntegrate:
    def test_constant(self):
        g = Grid.rectangle(10, 20, size=(2.0, 3.0))
        assert integrate(Field.constant(g, 0.5)) == pytest.approx(3.0, rel=1e-14)

    def test_gaussian_matches_closed_form(self):
        # (sqrt(pi) * 0.1 * erf(5))^2, evaluated to 30 digits offline
        exact = 0.0314159265358013309367192123329
        g = Grid.rectangle(64, 64)
        f = Field.from_function(g, lambda x, y: np.exp(-((x - .5)**2 + (y - .5)**2) / 0.01))
        assert integrate(f) == pytest.approx(exact, rel=1e-9)

    def test_linear_exact_under_midpoint_rule(self):
        g = Grid.rectangle(7, 5)
        f = Field.from_function(g, lambda x, y: 3 * x - y + 1)
        assert integrate(f) == pytest.approx(3 * 0.5 - 0.5 + 1, abs=1e-14)


class TestNeumannExtend:
    def test_ghosts_mirror_edges(self, rng):
        g = Grid.rectangle(5, 6)
        f = Field(g, rng.random(30))
        ext = neumann_extend(f)
        assert ext.shape == (8, 7)
        np.testing.assert_array_equal(ext[1:-1, 1:-1], f.values)
        np.testing.assert_array_equal(ext[0, 1:-1], f.values[0])
        np.testing.assert_array_equal(ext[1:-1, -1], f.values[:, -1])
        assert not math.isnan(ext[0, 0])
