import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stressnet.control import ControlParams, control_rhs, ramp, scenario_controls
from stressnet.grid import Field, Grid
from stressnet.migration import MigrationKernel, gaussian_kernel, normalize_reception
from stressnet.stepper import NetworkState


class TestRamp:
    @pytest.mark.parametrize("T0, T1", [(5.0, 20.0), (10.0, 20.0), (0.0, 1.0)])
    def test_endpoints_and_midpoint(self, T0, T1):
        assert ramp(T0, T0, T1) == 0.0
        assert abs(ramp(0.5 * (T0 + T1), T0, T1) - 0.5) <= 1e-15
        assert ramp(T1, T0, T1) == 1.0

    def test_flat_outside_window(self):
        assert ramp(-3.0, 5.0, 20.0) == 0.0
        assert ramp(400.0, 5.0, 20.0) == 1.0

    @given(st.floats(0.0, 30.0), st.floats(0.0, 30.0))
    def test_monotone(self, t, s):
        lo, hi = sorted((t, s))
        assert ramp(lo, 5.0, 20.0) <= ramp(hi, 5.0, 20.0)

    def test_quarter_point(self):
        # 0.5 - 0.5 cos(pi/4)
        assert ramp(8.75, 5.0, 20.0) == pytest.approx(0.14644660940672624, rel=1e-14)

    def test_degenerate_window_rejected(self):
        with pytest.raises(ValueError, match="T0 < T1"):
            ramp(1.0, 2.0, 2.0)


class TestControlParams:
    def test_strength_follows_ramp(self):
        cp = ControlParams(K=0.8, T0=5.0, T1=20.0, mode="departure")
        assert cp.strength(12.5) == pytest.approx(0.4)
        assert cp.active

    def test_off_mode_has_no_strength(self):
        cp = ControlParams(K=1.0, T0=5.0, T1=20.0, mode="off")
        assert cp.strength(100.0) == 0.0
        assert not cp.active

    @pytest.mark.parametrize("kwargs", [{"K": 1.5}, {"T0": 3.0, "T1": 2.0}, {"mode": "both"}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ControlParams(**kwargs)


class TestScenarios:
    base1 = ControlParams(1.0, 5.0, 20.0, "off")
    base2 = ControlParams(1.0, 10.0, 20.0, "off")

    def test_exclusivity(self):
        modes = {sc: tuple(c.mode for c in scenario_controls(sc, self.base1, self.base2))
                 for sc in ("wc", "sc1", "sc2")}
        assert modes == {"wc": ("off", "off"), "sc1": ("departure", "off"),
                         "sc2": ("off", "arrival")}

    def test_schedules_preserved(self):
        cp1, cp2 = scenario_controls("sc1", self.base1, self.base2)
        assert (cp1.T0, cp1.T1) == (5.0, 20.0)
        _, cp2 = scenario_controls("sc2", self.base1, self.base2)
        assert (cp2.T0, cp2.T1) == (10.0, 20.0)

    def test_unknown_scenario(self):
        with pytest.raises(ValueError, match="scenario"):
            scenario_controls("sc3", self.base1, self.base2)


def uniform_state(P1=0.4, N1=0.1, P2=0.05, N2=0.45, n=8):
    g1, g2 = Grid.rectangle(n, n, zone_id=1), Grid.rectangle(n, n, zone_id=2)
    return NetworkState(0.0, Field.constant(g1, P1), Field.constant(g1, N1),
                        Field.constant(g2, P2), Field.constant(g2, N2))


def constant_kernel(state, m=0.2):
    return MigrationKernel(Field.constant(state.uP1.grid, 1.0),
                           normalize_reception(Field.constant(state.uP2.grid, 1.0)), m)


class TestControlRhs:
    cp1 = ControlParams(1.0, 5.0, 20.0, "departure")
    cp2 = ControlParams(1.0, 10.0, 20.0, "arrival")

    def test_departure_control_closed_form(self):
        s = uniform_state()
        dP1, dN1, dP2, dN2 = control_rhs(12.5, s, self.cp1, ControlParams(), constant_kernel(s))
        # K1(12.5) = 0.5, p = 1, uP1 = 0.4
        np.testing.assert_allclose(dP1.values, -0.2, rtol=1e-14)
        np.testing.assert_array_equal(dN1.values, -dP1.values)
        assert not dP2.values.any() and not dN2.values.any()

    def test_arrival_control_uses_stressed_inflow(self):
        s = uniform_state()
        _, _, dP2, dN2 = control_rhs(30.0, s, ControlParams(), self.cp2, constant_kernel(s))
        # K2 = 1, eps2 = 1, m * integral(p uP1) = 0.2 * 0.4
        np.testing.assert_allclose(dP2.values, -0.08, rtol=1e-14)
        np.testing.assert_array_equal(dN2.values, -dP2.values)

    def test_local_integrand_alternative(self):
        s = uniform_state()
        _, _, dP2, _ = control_rhs(30.0, s, ControlParams(), self.cp2, constant_kernel(s),
                                   u2_integrand="local")
        # K2 * m * eps2 * integral(eps2 * uP2) = 0.2 * 0.05
        np.testing.assert_allclose(dP2.values, -0.01, rtol=1e-14)

    def test_gaussian_kernels_localize_controls(self):
        s = uniform_state(n=16)
        g1, g2 = s.uP1.grid, s.uP2.grid
        k = MigrationKernel(gaussian_kernel(g1, (0.8, 0.8), 0.15),
                            normalize_reception(gaussian_kernel(g2, (0.2, 0.2), 0.15)), 0.2)
        dP1, _, dP2, _ = control_rhs(50.0, s, self.cp1, self.cp2, k)
        assert np.unravel_index(np.argmin(dP1.values), g1.shape) == (12, 12)
        assert np.unravel_index(np.argmin(dP2.values), g2.shape) == (3, 3)

    def test_inactive_before_start(self):
        s = uniform_state()
        parts = control_rhs(4.0, s, self.cp1, self.cp2, constant_kernel(s))
        assert not any(p.values.any() for p in parts)

    def test_bad_integrand(self):
        s = uniform_state()
        with pytest.raises(ValueError, match="u2_integrand"):
            control_rhs(1.0, s, self.cp1, self.cp2, constant_kernel(s), u2_integrand="other")

    def test_zero_gain_reverts_to_uncontrolled_model(self):
        s = uniform_state()
        zero1 = ControlParams(0.0, 5.0, 20.0, "departure")
        zero2 = ControlParams(0.0, 10.0, 20.0, "arrival")
        parts = control_rhs(50.0, s, zero1, zero2, constant_kernel(s))
        assert not any(p.values.any() for p in parts)
