"""Method-of-lines integration of the coupled two-zone system.

``Model`` compiles a :class:`~stressnet.io.SimulationConfig` into grids,
kernels and parameter objects. :func:`rhs` assembles the right-hand side
from the public operators; the time loop itself runs in a compiled kernel
(``_kernels.advance``) that evaluates the same terms and checks positivity
and mass drift after every Heun step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .control import ControlParams, control_rhs, scenario_controls
from .grid import Field, Grid, integrate
from .io import SimulationConfig
from .kinetics import ZoneKineticsParams, reaction_rhs
from .migration import MigrationKernel, gaussian_kernel, migration_rhs, normalize_reception
from .observables import record
from .operators import (AdvectionParams, DirectionField, advective_cfl,
                        advective_divergence, build_direction_field, laplacian)

FIELD_NAMES = ("uP1", "uN1", "uP2", "uN2")


class InvariantViolation(RuntimeError):
    """Positivity, conservation or finiteness broke during a run."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


@dataclass
class NetworkState:
    t: float
    uP1: Field
    uN1: Field
    uP2: Field
    uN2: Field

    def fields(self):
        return (self.uP1, self.uN1, self.uP2, self.uN2)

    def copy(self):
        return NetworkState(self.t, *(f.copy() for f in self.fields()))

    def total_mass(self):
        return sum(integrate(f) for f in self.fields())

    def min_value(self):
        return min(float(f.values.min()) for f in self.fields())

    @classmethod
    def zeros(cls, grid1, grid2, t=0.0):
        return cls(t, Field.zeros(grid1), Field.zeros(grid1), Field.zeros(grid2),
                   Field.zeros(grid2))


@dataclass(frozen=True)
class NumericsParams:
    dt_max: float = 0.01
    cfl_safety: float = 0.9
    t_end: float = 400.0
    conservation_tol: float = 1e-6
    positivity_tol: float = 1e-10
    step_drift_tol: float = 1e-12

    def __post_init__(self):
        for name in ("dt_max", "conservation_tol", "positivity_tol", "step_drift_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be >= 0")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")


@dataclass
class Zone:
    grid: Grid
    kinetics: ZoneKineticsParams
    d_P: float
    d_N: float
    adv_P: AdvectionParams
    adv_N: AdvectionParams
    direction: DirectionField

    def packed(self, speed_density):
        p = np.zeros(_kernels.ZONE_PARAM_COUNT)
        p[_kernels.HX] = self.grid.hx
        p[_kernels.HY] = self.grid.hy
        p[_kernels.D_P] = self.d_P
        p[_kernels.D_N] = self.d_N
        p[_kernels.V_P] = self.adv_P.v_max
        p[_kernels.V_N] = self.adv_N.v_max
        p[_kernels.A] = self.kinetics.a
        p[_kernels.B] = self.kinetics.b
        p[_kernels.ALPHA_P] = self.kinetics.alpha_P
        p[_kernels.ALPHA_N] = self.kinetics.alpha_N
        p[_kernels.EPS] = self.kinetics.eps_guard
        p[_kernels.SPEED_SPECIES] = 1.0 if speed_density == "species" else 0.0
        return p


def _zone_from_config(zc, zone_id):
    grid = Grid.rectangle(zc.nx, zc.ny, zc.origin, zc.size, zone_id)
    if zc.v_P_max > 0 or zc.v_N_max > 0:
        direction = build_direction_field(grid, zc.target)
    else:
        direction = DirectionField.zero(grid)
    return Zone(grid, ZoneKineticsParams(zc.a, zc.b, zc.alpha_P, zc.alpha_N, zc.eps_guard),
                zc.d_P, zc.d_N, AdvectionParams(zc.v_P_max), AdvectionParams(zc.v_N_max),
                direction)


@dataclass
class Model:
    """Everything the right-hand side needs, compiled from a config."""

    zone1: Zone
    zone2: Zone
    kernel_12: MigrationKernel
    kernel_21: MigrationKernel
    cp1: ControlParams
    cp2: ControlParams
    numerics: NumericsParams
    u2_integrand: str = "inflow"
    speed_density: str = "total"
    config: SimulationConfig | None = None
    _packed: tuple = field(default=None, repr=False)

    @classmethod
    def from_config(cls, cfg: SimulationConfig, scenario=None):
        """Build the model; ``scenario`` (wc, sc1, sc2) overrides the control mode."""
        z1 = _zone_from_config(cfg.zone1, 1)
        z2 = _zone_from_config(cfg.zone2, 2)
        c = cfg.coupling
        p1 = gaussian_kernel(z1.grid, c.departure_center_1, c.departure_radius_1)
        e2 = normalize_reception(gaussian_kernel(z2.grid, c.reception_center_2,
                                                 c.reception_radius_2))
        p2 = gaussian_kernel(z2.grid, c.departure_center_2, c.departure_radius_2)
        e1 = normalize_reception(gaussian_kernel(z1.grid, c.reception_center_1,
                                                 c.reception_radius_1))
        k12 = MigrationKernel(p1, e2, c.m_1to2 if "1to2" in c.directions else 0.0)
        k21 = MigrationKernel(p2, e1, c.m_2to1 if "2to1" in c.directions else 0.0)
        ctl = cfg.control
        cp1 = ControlParams(ctl.K1, ctl.T0_1, ctl.T1_1,
                            "departure" if ctl.mode in ("departure", "both") else "off")
        cp2 = ControlParams(ctl.K2, ctl.T0_2, ctl.T1_2,
                            "arrival" if ctl.mode in ("arrival", "both") else "off")
        if scenario is not None:
            cp1, cp2 = scenario_controls(scenario, cp1, cp2)
        n = cfg.numerics
        numerics = NumericsParams(n.dt_max, n.cfl_safety, n.t_end, n.conservation_tol,
                                  n.positivity_tol, n.step_drift_tol)
        return cls(z1, z2, k12, k21, cp1, cp2, numerics, ctl.u2_integrand, n.speed_density,
                   cfg)

    @property
    def grids(self):
        return self.zone1.grid, self.zone2.grid

    def packed(self):
        """Arguments of the compiled right-hand side, after the state arrays."""
        if self._packed is None:
            nu1x, nu1y = self.zone1.direction.face_components()
            nu2x, nu2y = self.zone2.direction.face_components()
            ctl = np.zeros(_kernels.CONTROL_PARAM_COUNT)
            ctl[_kernels.K1] = self.cp1.effective_K
            ctl[_kernels.T0_1] = self.cp1.T0
            ctl[_kernels.T1_1] = self.cp1.T1
            ctl[_kernels.K2] = self.cp2.effective_K
            ctl[_kernels.T0_2] = self.cp2.T0
            ctl[_kernels.T1_2] = self.cp2.T1
            ctl[_kernels.U2_LOCAL] = 1.0 if self.u2_integrand == "local" else 0.0
            self._packed = (
                self.zone1.packed(self.speed_density), self.zone2.packed(self.speed_density),
                nu1x, nu1y, nu2x, nu2y,
                self.kernel_12.p_out.values, self.kernel_21.eps_in.values,
                self.kernel_21.p_out.values, self.kernel_12.eps_in.values,
                np.array([float(self.kernel_12.m), float(self.kernel_21.m)]), ctl,
            )
        return self._packed


def initial_state(cfg: SimulationConfig, model: Model | None = None) -> NetworkState:
    """Gaussian clusters (or cosine profiles) per zone, scaled to each zone's mass share."""
    model = model or Model.from_config(cfg)
    out = []
    for zc, grid in ((cfg.zone1, model.zone1.grid), (cfg.zone2, model.zone2.grid)):
        if zc.initial == "cosine_x":
            x, _ = grid.centers()
            wave = 0.5 * np.cos(np.pi * (x - grid.x0) / grid.width)
            species = [1.0 + wave, 1.0 - wave]
        else:
            species = []
            for clusters in (zc.clusters_P, zc.clusters_N):
                values = np.zeros(grid.shape)
                for cx, cy, r, w in clusters:
                    values += w * gaussian_kernel(grid, (cx, cy), r).values
                species.append(values)
        zone_mass = grid.cell_area * (species[0].sum() + species[1].sum())
        scale = zc.mass / zone_mass if zone_mass > 0 else 0.0
        out.extend(Field(grid, s * scale) for s in species)
    return NetworkState(0.0, *out)


def rhs(t, state: NetworkState, model: Model):
    """Time derivatives ``(dP1, dN1, dP2, dN2)`` assembled term by term."""
    return tuple(sum(parts) for parts in zip(*rhs_terms(t, state, model).values()))


def rhs_terms(t, state: NetworkState, model: Model):
    """Per-term contributions, keyed by term name, each a 4-tuple of fields."""
    terms = {}
    diff, adv, react = [], [], []
    for zone, uP, uN in ((model.zone1, state.uP1, state.uN1),
                         (model.zone2, state.uP2, state.uN2)):
        diff += [laplacian(uP, zone.d_P), laplacian(uN, zone.d_N)]
        if model.speed_density == "total":
            dens_P = dens_N = uP + uN
        else:
            dens_P, dens_N = uP, uN
        adv += [advective_divergence(uP, dens_P, zone.direction, zone.adv_P),
                advective_divergence(uN, dens_N, zone.direction, zone.adv_N)]
        react += list(reaction_rhs(uP, uN, zone.kinetics))
    terms["diffusion"] = tuple(diff)
    terms["advection"] = tuple(adv)
    terms["reaction"] = tuple(react)
    mP1, mP2 = migration_rhs(state.uP1, state.uP2, model.kernel_12, model.kernel_21)
    mN1, mN2 = migration_rhs(state.uN1, state.uN2, model.kernel_12, model.kernel_21)
    terms["migration"] = (mP1, mN1, mP2, mN2)
    terms["control"] = control_rhs(t, state, model.cp1, model.cp2, model.kernel_12,
                                   model.u2_integrand)
    return terms


def compiled_rhs(t, state: NetworkState, model: Model):
    """Same as :func:`rhs`, evaluated by the compiled kernel used in time stepping."""
    g1, g2 = model.grids
    out = [np.empty(g1.shape), np.empty(g1.shape), np.empty(g2.shape), np.empty(g2.shape)]
    nu1x, nu1y = model.packed()[2:4]
    nu2x, nu2y = model.packed()[4:6]
    s1 = _kernels.face_buffers(g1.shape)
    s2 = _kernels.face_buffers(g2.shape)
    z1, z2, _, _, _, _, p1, e1, p2, e2, cpl, ctl = model.packed()
    _kernels.network_rhs(float(t), *(f.values for f in state.fields()), z1, z2,
                         nu1x, nu1y, nu2x, nu2y, p1, e1, p2, e2, cpl, ctl, s1, s2, *out)
    return (Field(g1, out[0]), Field(g1, out[1]), Field(g2, out[2]), Field(g2, out[3]))


def dt_bounds(model: Model):
    """The individual step limits, before the safety factor."""
    bounds = {"dt_max": model.numerics.dt_max}
    for name, zone in (("zone1", model.zone1), ("zone2", model.zone2)):
        g = zone.grid
        d = max(zone.d_P, zone.d_N)
        bounds[f"{name}.diffusion"] = (g.hx**2 * g.hy**2 / (2 * d * (g.hx**2 + g.hy**2))
                                       if d > 0 else np.inf)
        bounds[f"{name}.advection"] = advective_cfl(g, max(zone.adv_P.v_max,
                                                           zone.adv_N.v_max))
        k = zone.kinetics
        rate = k.max_rate
        if name == "zone1":
            rate += model.kernel_12.m + model.cp1.effective_K * float(
                model.kernel_12.p_out.values.max())
        else:
            rate += model.kernel_21.m
        bounds[f"{name}.reaction"] = 1.0 / rate if rate > 0 else np.inf
    return bounds


def compute_dt(state, model: Model) -> float:
    """Stable explicit step: safety factor times the tightest bound."""
    return model.numerics.cfl_safety * min(dt_bounds(model).values())


def term_breakdown(t, state, model, field_index, j, i):
    """Value of every right-hand-side term at one cell, for failure reports."""
    terms = rhs_terms(t, state, model)
    return {name: float(parts[field_index].values[j, i]) for name, parts in terms.items()}


def _violation(status, info, t, state, model, dt):
    if status == _kernels.STATUS_DRIFT:
        msg = (f"mass drift in one step at t={t:.17g}: {info[4]:.17g} -> {info[5]:.17g} "
               f"(dt={info[6]:.6g})")
        return InvariantViolation(msg, {"kind": "conservation", "t": t,
                                        "mass_before": info[4], "mass_after": info[5]})
    which, j, i, value = int(info[0]), int(info[1]), int(info[2]), info[3]
    grid = state.fields()[which].grid
    kind = "positivity" if status == _kernels.STATUS_NEGATIVE else "finiteness"
    breakdown = term_breakdown(t, state, model, which, j, i)
    x, y = grid.cell_center(i, j)
    report = {"kind": kind, "t": t, "dt": info[6], "field": FIELD_NAMES[which],
              "zone": grid.zone_id, "cell": (i, j), "center": (x, y), "value": value,
              "value_before": float(state.fields()[which].values[j, i]),
              "terms": breakdown}
    lines = [f"{kind} violated in {FIELD_NAMES[which]} at cell (i={i}, j={j}) "
             f"center=({x:.6g}, {y:.6g}), t={t:.17g}, dt={info[6]:.6g}: "
             f"value {value:.6g} (was {report['value_before']:.6g})"]
    lines += [f"  {name:>10s}: {v: .6e}" for name, v in breakdown.items()]
    return InvariantViolation("\n".join(lines), report)


def _advance(state, t_stop, dt, model):
    """Integrate ``state`` in place up to ``t_stop``; returns number of steps."""
    info = np.zeros(8)
    arrays = [f.values for f in state.fields()]
    backup = [a.copy() for a in arrays]
    t0 = state.t
    t, steps, status = _kernels.advance(
        float(state.t), float(t_stop), float(dt), *arrays, *model.packed(),
        model.numerics.positivity_tol, model.numerics.step_drift_tol, info)
    if status != _kernels.STATUS_OK:
        # replay the segment up to the failing step so the report shows the pre-step state
        for a, b in zip(arrays, backup):
            a[...] = b
        state.t = t0
        if t > t0:
            _kernels.advance(float(t0), float(t), float(dt), *arrays, *model.packed(),
                             np.inf, np.inf, np.zeros(8))
        state.t = t
        raise _violation(status, info, t, state, model, dt)
    state.t = t
    return steps


def step(state: NetworkState, dt, model: Model) -> NetworkState:
    """One Heun step of size ``dt``; returns a new state."""
    limit = compute_dt(state, model)
    if dt > limit * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stable step {limit}")
    new = state.copy()
    _advance(new, state.t + dt, dt, model)
    return new


def _stop_times(t_end, interval, extra):
    n = int(np.floor(t_end / interval + 1e-9))
    records = [k * interval for k in range(n + 1)]
    if records[-1] < t_end:
        records.append(t_end)
    records = [t for t in records if t <= t_end]
    stops = sorted(set(records) | {float(t) for t in extra})
    return stops, set(records)


@dataclass
class RunResult:
    records: list
    snapshots: dict
    final: NetworkState
    steps: int


def run(initial: NetworkState, model: Model, record_interval=1.0, snapshot_times=(),
        on_snapshot=None) -> RunResult:
    """Integrate from ``initial`` to ``model.numerics.t_end``.

    Observables are recorded every ``record_interval`` (and at ``t_end``).
    States at ``snapshot_times`` are kept in ``RunResult.snapshots`` or, if
    ``on_snapshot`` is given, handed to it instead.
    """
    num = model.numerics
    state = initial.copy()
    if not all(np.isfinite(f.values).all() for f in state.fields()):
        raise InvariantViolation("initial state is not finite")
    if state.min_value() < -num.positivity_tol:
        raise InvariantViolation(f"initial state has negative value {state.min_value():.6g}")
    stops, record_times = _stop_times(num.t_end, record_interval, snapshot_times)
    snapshot_set = {float(t) for t in snapshot_times}
    dt = compute_dt(state, model)
    v0 = state.total_mass()
    records, snapshots, steps = [], {}, 0
    for stop in stops:
        if stop > state.t:
            steps += _advance(state, stop, dt, model)
            state.t = stop
        if stop in record_times:
            rec = record(state, dt)
            if abs(rec.V - v0) > num.conservation_tol:
                raise InvariantViolation(
                    f"total mass {rec.V:.17g} drifted from {v0:.17g} beyond "
                    f"{num.conservation_tol:g} at t={stop:g}",
                    {"kind": "conservation", "t": stop, "V": rec.V, "V0": v0})
            records.append(rec)
        if stop in snapshot_set:
            if on_snapshot is not None:
                on_snapshot(state)
            else:
                snapshots[stop] = state.copy()
    return RunResult(records, snapshots, state, steps)
