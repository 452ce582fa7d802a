"""Scheduled local controls that calm stressed pedestrians.

The departure control acts in zone 1 at rate ``K1(t) p(x)`` on the local
stressed density. The arrival control acts in zone 2 on the stressed
inflow arriving through the migration channel. Both convert stressed into
non-stressed in place, so zone masses are untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .grid import Field, integrate

MODES = ("off", "departure", "arrival")
U2_INTEGRANDS = ("inflow", "local")


@dataclass(frozen=True)
class ControlParams:
    K: float = 1.0
    T0: float = 0.0
    T1: float = 1.0
    mode: str = "off"

    def __post_init__(self):
        if not 0 <= self.K <= 1:
            raise ValueError(f"control rate K must lie in [0, 1], got {self.K}")
        if not 0 <= self.T0 < self.T1:
            raise ValueError(f"need 0 <= T0 < T1, got T0={self.T0}, T1={self.T1}")
        if self.mode not in MODES:
            raise ValueError(f"unknown control mode {self.mode!r}")

    @property
    def active(self):
        return self.mode != "off" and self.K > 0

    @property
    def effective_K(self):
        return self.K if self.mode != "off" else 0.0

    def strength(self, t):
        """``K(t) = K * ramp(t)``; zero when the control is off."""
        return self.effective_K * ramp(t, self.T0, self.T1)


def ramp(t, T0, T1):
    """Cosine ease-in: 0 before ``T0``, 1 after ``T1``."""
    if not T0 < T1:
        raise ValueError(f"ramp needs T0 < T1, got T0={T0}, T1={T1}")
    return _kernels.ramp(float(t), float(T0), float(T1))


def scenario_controls(scenario, cp1: ControlParams, cp2: ControlParams):
    """Apply the scenario's exclusivity rule to a pair of control settings.

    ``wc`` switches both off, ``sc1`` keeps only the departure control and
    ``sc2`` only the arrival control.
    """
    if scenario == "wc":
        return replace(cp1, mode="off"), replace(cp2, mode="off")
    if scenario == "sc1":
        return replace(cp1, mode="departure"), replace(cp2, mode="off")
    if scenario == "sc2":
        return replace(cp1, mode="off"), replace(cp2, mode="arrival")
    raise ValueError(f"unknown scenario {scenario!r}; expected wc, sc1 or sc2")


def control_rhs(t, state, cp1: ControlParams, cp2: ControlParams, kernel,
                u2_integrand="inflow"):
    """Control contributions ``(dP1, dN1, dP2, dN2)`` at time ``t``.

    ``kernel`` is the zone 1 -> zone 2 migration channel; its departure
    kernel localizes the departure control and its reception kernel the
    arrival control. With ``u2_integrand="inflow"`` the arrival control
    calms a fraction ``K2(t)`` of the stressed inflow; ``"local"`` uses the
    reception-weighted stressed mass already in zone 2 instead.
    """
    if u2_integrand not in U2_INTEGRANDS:
        raise ValueError(f"u2_integrand must be one of {U2_INTEGRANDS}, got {u2_integrand!r}")
    g1 = state.uP1.grid
    g2 = state.uP2.grid
    dP1 = np.zeros(g1.shape)
    dP2 = np.zeros(g2.shape)
    k1 = cp1.strength(t)
    if k1 != 0:
        dP1 = -(k1 * kernel.p_out.values * state.uP1.values)
    k2 = cp2.strength(t)
    if k2 != 0:
        if u2_integrand == "inflow":
            level = k2 * kernel.m * integrate(kernel.p_out * state.uP1)
        else:
            level = k2 * kernel.m * integrate(kernel.eps_in * state.uP2)
        dP2 = -(kernel.eps_in.values * level)
    return Field(g1, dP1), Field(g1, -dP1), Field(g2, dP2), Field(g2, -dP2)
