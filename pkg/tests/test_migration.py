import math

import numpy as np
import pytest

from stressnet.grid import Field, Grid, integrate
from stressnet.migration import (MigrationKernel, gaussian_kernel, migration_rhs,
                                 normalize_reception, transfer_rate)


def unit_grids(n=16):
    return Grid.rectangle(n, n, zone_id=1), Grid.rectangle(n, n, zone_id=2)


def constant_channel(g_src, g_dst, m):
    return MigrationKernel(Field.constant(g_src, 1.0),
                           normalize_reception(Field.constant(g_dst, 1.0)), m)


class TestKernels:
    def test_gaussian_peak_and_decay(self):
        g = Grid.rectangle(10, 10)
        k = gaussian_kernel(g, (0.55, 0.55), 0.15)
        assert k.values[5, 5] == pytest.approx(1.0)
        assert k.values[5, 8] == pytest.approx(math.exp(-(0.3 / 0.15) ** 2))

    def test_infinite_radius_is_constant(self):
        k = gaussian_kernel(Grid.rectangle(6, 6), (0.2, 0.2), math.inf)
        np.testing.assert_array_equal(k.values, 1.0)

    def test_nonpositive_radius_rejected(self):
        with pytest.raises(ValueError, match="radius"):
            gaussian_kernel(Grid.rectangle(6, 6), (0.2, 0.2), 0.0)

    def test_normalized_reception_integrates_to_one(self):
        g = Grid.rectangle(20, 12, size=(2.0, 1.0))
        e = normalize_reception(gaussian_kernel(g, (0.3, 0.7), 0.2))
        assert integrate(e) == pytest.approx(1.0, abs=1e-14)

    def test_zero_reception_rejected(self):
        with pytest.raises(ValueError, match="positive integral"):
            normalize_reception(Field.zeros(Grid.rectangle(4, 4)))

    @pytest.mark.parametrize("m", [-0.1, 1.5])
    def test_m_outside_unit_interval_rejected(self, m):
        g1, g2 = unit_grids(4)
        with pytest.raises(ValueError, match="proportion"):
            constant_channel(g1, g2, m)

    def test_unnormalized_reception_rejected(self):
        g1, g2 = unit_grids(4)
        with pytest.raises(ValueError, match="integrates"):
            MigrationKernel(Field.constant(g1, 1.0), Field.constant(g2, 2.0), 0.2)

    def test_departure_above_one_rejected(self):
        g1, g2 = unit_grids(4)
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            MigrationKernel(Field.constant(g1, 1.5), normalize_reception(Field.constant(g2, 1)),
                            0.2)


class TestMigrationRhs:
    def test_uniform_closed_form(self):
        # m = 0.2, p = 1, u = 0.5 on unit squares: the source loses 0.1 per
        # unit area and the destination gains exactly that
        g1, g2 = unit_grids()
        k = constant_channel(g1, g2, 0.2)
        src, dst = migration_rhs(Field.constant(g1, 0.5), Field.zeros(g2), k)
        np.testing.assert_allclose(src.values, -0.1, rtol=1e-14)
        np.testing.assert_allclose(dst.values, 0.1, rtol=1e-14)
        assert transfer_rate(Field.constant(g1, 0.5), k) == pytest.approx(0.1, rel=1e-14)

    def test_gaussian_channel_conserves_total(self, rng):
        g1, g2 = Grid.rectangle(16, 16), Grid.rectangle(12, 20, size=(0.6, 1.0), zone_id=2)
        k = MigrationKernel(gaussian_kernel(g1, (0.8, 0.8), 0.15),
                            normalize_reception(gaussian_kernel(g2, (0.2, 0.2), 0.15)), 0.2)
        u = Field(g1, rng.random(g1.shape))
        src, dst = migration_rhs(u, Field.zeros(g2), k)
        assert integrate(src) + integrate(dst) == pytest.approx(0.0, abs=1e-15)
        assert integrate(dst) == pytest.approx(transfer_rate(u, k), rel=1e-13)
        assert src.values.max() <= 0.0

    def test_bidirectional_nets_out(self):
        g1, g2 = unit_grids(8)
        k12 = constant_channel(g1, g2, 0.2)
        k21 = constant_channel(g2, g1, 0.8)
        src, dst = migration_rhs(Field.constant(g1, 0.4), Field.constant(g2, 0.1), k12, k21)
        # zone 1: -0.2*0.4 + 0.8*0.1 = 0
        np.testing.assert_allclose(src.values, 0.0, atol=1e-16)
        np.testing.assert_allclose(dst.values, 0.0, atol=1e-16)

    def test_zero_m_is_inert(self, rng):
        g1, g2 = unit_grids(8)
        src, dst = migration_rhs(Field(g1, rng.random(64)), Field.zeros(g2),
                                 constant_channel(g1, g2, 0.0))
        assert not src.values.any() and not dst.values.any()

    def test_grid_mismatch_rejected(self):
        g1, g2 = unit_grids(8)
        k = constant_channel(g1, g2, 0.2)
        with pytest.raises(ValueError, match="grids"):
            migration_rhs(Field.zeros(g2), Field.zeros(g1), k)
