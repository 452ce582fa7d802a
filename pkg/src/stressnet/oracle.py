"""Spatially homogeneous reduction of the network model, integrated with RK4.

With uniform initial data, constant departure and reception kernels and no
advection, every cell of a zone follows the same trajectory: diffusion and
advection vanish and only the local exchange and the integral migration
terms remain. This module integrates that four-variable ODE independently
of the grid code and compares it with the PDE solver's zone masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import io
from .control import ControlParams, scenario_controls
from .kinetics import ZoneKineticsParams, imitation_coefficient


class NonUniformConfig(io.ConfigError):
    """The config breaks spatial uniformity, so the oracle does not apply."""


@dataclass
class HomogeneousState:
    P1: float
    N1: float
    P2: float
    N2: float
    t: float = 0.0

    def as_tuple(self):
        return (self.P1, self.N1, self.P2, self.N2)


@dataclass(frozen=True)
class OracleParams:
    zone1: ZoneKineticsParams
    zone2: ZoneKineticsParams
    area1: float = 1.0
    area2: float = 1.0
    m12: float = 0.0
    m21: float = 0.0
    p1: float = 1.0
    p2: float = 1.0
    cp1: ControlParams = ControlParams()
    cp2: ControlParams = ControlParams()
    u2_integrand: str = "inflow"

    def total_mass(self, s: HomogeneousState):
        return self.area1 * (s.P1 + s.N1) + self.area2 * (s.P2 + s.N2)


def _ramp(t, t0, t1):
    if t <= t0:
        return 0.0
    if t >= t1:
        return 1.0
    return 0.5 - 0.5 * math.cos(math.pi * (t - t0) / (t1 - t0))


def _strength(cp: ControlParams, t):
    return cp.effective_K * _ramp(t, cp.T0, cp.T1) if cp.effective_K else 0.0


def _exchange(P, N, k: ZoneKineticsParams):
    return k.a * N - k.b * P + imitation_coefficient(P, N, k) * N * P


def _derivative(y, t, pr: OracleParams):
    P1, N1, P2, N2 = y
    r1 = _exchange(P1, N1, pr.zone1)
    r2 = _exchange(P2, N2, pr.zone2)
    # a channel drains its source at rate m * p and spreads that mass evenly
    # over the destination, hence the area ratio on the inflow side
    out1 = pr.m12 * pr.p1
    out2 = pr.m21 * pr.p2
    in2 = out1 * pr.area1 / pr.area2
    in1 = out2 * pr.area2 / pr.area1
    u1 = _strength(pr.cp1, t) * pr.p1 * P1
    k2 = _strength(pr.cp2, t)
    if pr.u2_integrand == "inflow":
        u2 = k2 * in2 * P1
    else:
        u2 = k2 * pr.m12 * P2 / pr.area2
    return (
        r1 - out1 * P1 + in1 * P2 - u1,
        -r1 - out1 * N1 + in1 * N2 + u1,
        r2 - out2 * P2 + in2 * P1 - u2,
        -r2 - out2 * N2 + in2 * N1 + u2,
    )


def ode_rhs(s: HomogeneousState, params: OracleParams, t=None):
    """Time derivatives of the four uniform densities."""
    return _derivative(s.as_tuple(), s.t if t is None else t, params)


def _rk4(y, t, h, pr):
    k1 = _derivative(y, t, pr)
    k2 = _derivative(tuple(a + 0.5 * h * b for a, b in zip(y, k1)), t + 0.5 * h, pr)
    k3 = _derivative(tuple(a + 0.5 * h * b for a, b in zip(y, k2)), t + 0.5 * h, pr)
    k4 = _derivative(tuple(a + h * b for a, b in zip(y, k3)), t + h, pr)
    return tuple(a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def rk4_step(s: HomogeneousState, h, params: OracleParams) -> HomogeneousState:
    """One classic fourth-order Runge-Kutta step."""
    return HomogeneousState(*_rk4(s.as_tuple(), s.t, h, params), t=s.t + h)


def heun_step(s: HomogeneousState, h, params: OracleParams) -> HomogeneousState:
    """One explicit two-stage (Heun) step, the PDE solver's time scheme."""
    y = s.as_tuple()
    k1 = _derivative(y, s.t, params)
    k2 = _derivative(tuple(a + h * b for a, b in zip(y, k1)), s.t + h, params)
    return HomogeneousState(*(a + 0.5 * h * (b1 + b2) for a, b1, b2 in zip(y, k1, k2)),
                            t=s.t + h)


def integrate_rk4(s0: HomogeneousState, dt, t_end, params: OracleParams, record_times=None):
    """Classic RK4 from ``s0.t`` to ``t_end``.

    Steps are shortened to land exactly on each of ``record_times`` (default:
    the start and ``t_end``); returns the states at those times.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if record_times is None:
        record_times = [s0.t, t_end]
    out = []
    y, t = s0.as_tuple(), s0.t
    for stop in sorted(record_times):
        while stop - t > dt * 1e-9:
            h = min(dt, stop - t)
            y = _rk4(y, t, h, params)
            t += h
        if abs(t - stop) <= dt * 1e-9:
            t = stop
        out.append(HomogeneousState(*y, t=t))
    return out


def write_trajectory(states) -> str:
    return io.write_csv_table(("t", "P1", "N1", "P2", "N2"),
                              ((s.t, *s.as_tuple()) for s in states))


def _require(cond, key, why):
    if not cond:
        raise NonUniformConfig(f"{key} {why}; the homogeneous oracle needs uniform data",
                               key=key)


def params_from_config(cfg: io.SimulationConfig, scenario=None) -> OracleParams:
    """Oracle parameters for a uniform config; raises ``NonUniformConfig`` otherwise."""
    for z in ("zone1", "zone2"):
        zc = getattr(cfg, z)
        for key in ("v_P_max", "v_N_max"):
            _require(getattr(zc, key) == 0, f"{z}.{key}", "must be 0")
        _require(zc.initial == "clusters", f"{z}.initial", "must be clusters")
        for key in ("clusters_P", "clusters_N"):
            for *_, r, _w in getattr(zc, key):
                _require(math.isinf(r), f"{z}.{key}", "must use infinite cluster radii")
    c = cfg.coupling
    for key in ("departure_radius_1", "reception_radius_2", "departure_radius_2",
                "reception_radius_1"):
        _require(math.isinf(getattr(c, key)), f"coupling.{key}", "must be inf")
    ctl = cfg.control
    cp1 = ControlParams(ctl.K1, ctl.T0_1, ctl.T1_1,
                        "departure" if ctl.mode in ("departure", "both") else "off")
    cp2 = ControlParams(ctl.K2, ctl.T0_2, ctl.T1_2,
                        "arrival" if ctl.mode in ("arrival", "both") else "off")
    if scenario is not None:
        cp1, cp2 = scenario_controls(scenario, cp1, cp2)

    def kin(zc):
        return ZoneKineticsParams(zc.a, zc.b, zc.alpha_P, zc.alpha_N, zc.eps_guard)

    z1, z2 = cfg.zone1, cfg.zone2
    return OracleParams(
        kin(z1), kin(z2),
        area1=z1.size[0] * z1.size[1], area2=z2.size[0] * z2.size[1],
        m12=c.m_1to2 if "1to2" in c.directions else 0.0,
        m21=c.m_2to1 if "2to1" in c.directions else 0.0,
        cp1=cp1, cp2=cp2, u2_integrand=ctl.u2_integrand)


def initial_from_config(cfg: io.SimulationConfig) -> HomogeneousState:
    """Uniform densities matching the config's (infinite-radius) clusters and mass shares."""
    levels = []
    for zc in (cfg.zone1, cfg.zone2):
        wP = sum(w for *_, w in zc.clusters_P)
        wN = sum(w for *_, w in zc.clusters_N)
        area = zc.size[0] * zc.size[1]
        scale = zc.mass / (area * (wP + wN)) if wP + wN > 0 else 0.0
        levels += [wP * scale, wN * scale]
    return HomogeneousState(*levels)


@dataclass
class OracleComparison:
    times: list
    pde: list
    oracle: list
    max_rel_deviation: float
    floor: float
    trajectory: list


def compare_with_pde(cfg: io.SimulationConfig, t_end=None, scenario=None, dt=1e-3,
                     record_interval=None) -> OracleComparison:
    """Run the PDE solver and the oracle side by side on a uniform config.

    The deviation of each zone mass is measured relative to the oracle's
    mass, floored at ``1e-6`` of the total so masses passing through zero do
    not divide by zero.
    """
    from .stepper import Model, initial_state, run

    params = params_from_config(cfg, scenario)
    t_end = cfg.numerics.t_end if t_end is None else t_end
    record_interval = record_interval or cfg.output.record_interval
    cfg = cfg.with_values(numerics={"t_end": t_end}, output={"snapshot_times": ()})
    model = Model.from_config(cfg, scenario)
    result = run(initial_state(cfg, model), model, record_interval)
    times = [r.t for r in result.records]
    s0 = initial_from_config(cfg)
    traj = integrate_rk4(s0, dt, t_end, params, times)
    a1, a2 = params.area1, params.area2
    floor = 1e-6 * params.total_mass(s0)
    pde, ode, worst = [], [], 0.0
    for rec, s in zip(result.records, traj):
        got = (rec.M_P1, rec.M_N1, rec.M_P2, rec.M_N2)
        want = (a1 * s.P1, a1 * s.N1, a2 * s.P2, a2 * s.N2)
        pde.append(got)
        ode.append(want)
        for g, w in zip(got, want):
            worst = max(worst, abs(g - w) / max(abs(w), floor))
    return OracleComparison(times, pde, ode, worst, floor, traj)
