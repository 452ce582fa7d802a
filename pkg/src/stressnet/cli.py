"""Command-line entry point: ``stressnet simulate|compare|oracle|convergence``.

Exit codes: 0 success, 1 a study verdict failed, 2 bad config or usage,
3 invariant violation during a run.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .oracle import compare_with_pde, write_trajectory
from .stepper import InvariantViolation, Model, initial_state, run

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
SCENARIOS = ("wc", "sc1", "sc2")
COMPARISON_COLUMNS = ("t", "M_P_wc", "M_P_sc1", "M_P_sc2", "M_P2_wc", "M_P2_sc1", "M_P2_sc2")
ORACLE_TOLERANCE = 1e-4


def snapshot_name(zone_id, t):
    return f"zone{zone_id}_t{float(t):g}.vtk"


def simulate(cfg: io.SimulationConfig, scenario, out_dir):
    """One scenario run writing ``observables.csv`` and VTK snapshots to ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = Model.from_config(cfg, scenario)

    def save(state):
        for zone_id in (1, 2):
            io.write_snapshot(state, zone_id, out_dir / snapshot_name(zone_id, state.t))

    result = run(initial_state(cfg, model), model, cfg.output.record_interval,
                 cfg.output.snapshot_times, on_snapshot=save)
    (out_dir / "observables.csv").write_text(io.write_observables(result.records))
    return result


@dataclass
class Verdict:
    label: str
    lhs: float
    rhs: float

    @property
    def holds(self):
        return self.lhs < self.rhs

    def line(self):
        status = "PASS" if self.holds else "FAIL"
        return f"{status} {self.label}: {self.lhs:.10g} < {self.rhs:.10g}"


def ordering_verdicts(final):
    """The four terminal-time orderings; ``final`` maps scenario -> last record."""
    return [
        Verdict("M_P(sc1) < M_P(wc)", final["sc1"].M_P, final["wc"].M_P),
        Verdict("M_P2(sc2) < M_P2(wc)", final["sc2"].M_P2, final["wc"].M_P2),
        Verdict("M_P(sc1) < M_P(sc2)", final["sc1"].M_P, final["sc2"].M_P),
        Verdict("M_P2(sc2) < M_P2(sc1)", final["sc2"].M_P2, final["sc1"].M_P2),
    ]


def compare(cfg: io.SimulationConfig, out_dir):
    """Run wc, sc1 and sc2 into subdirectories and tabulate the stressed masses.

    Returns ``(results, verdicts)`` with ``results`` keyed by scenario.
    """
    out_dir = Path(out_dir)
    results = {sc: simulate(cfg, sc, out_dir / sc) for sc in SCENARIOS}
    rows = []
    for recs in zip(*(results[sc].records for sc in SCENARIOS)):
        rows.append((recs[0].t, *(r.M_P for r in recs), *(r.M_P2 for r in recs)))
    (out_dir / "comparison.csv").write_text(io.write_csv_table(COMPARISON_COLUMNS, rows))
    verdicts = ordering_verdicts({sc: results[sc].records[-1] for sc in SCENARIOS})
    return results, verdicts


def restrict(values, factor):
    """Average ``factor x factor`` blocks of a fine cell array onto the coarse grid."""
    ny, nx = values.shape
    return values.reshape(ny // factor, factor, nx // factor, factor).mean(axis=(1, 3))


def observed_orders(errors, floor=0.0):
    """``log2`` of successive error ratios; ``nan`` where an error is at or below ``floor``."""
    out = []
    for e0, e1 in zip(errors, errors[1:]):
        out.append(math.log2(e0 / e1) if e0 > floor and e1 > floor else math.nan)
    return out


@dataclass
class ConvergenceStudy:
    sizes: list
    M_P1: list
    mass_orders: list
    field_differences: list
    field_orders: list

    @property
    def order(self):
        """Observed order of the finest pair of refinements."""
        return self.field_orders[-1]


def convergence(cfg: io.SimulationConfig, levels):
    """Self-convergence under simultaneous halving of ``hx``, ``hy`` and ``dt``.

    Level ``k`` runs both zones on ``2**k`` times the configured cell counts
    (dt follows from the stability bound, which shrinks with the mesh).
    Terminal fields are averaged onto the coarsest mesh; successive level
    differences ``||u_k - u_{k+1}||_1`` then decay like ``h**p``. The same is
    reported for the terminal stressed mass of zone 1.
    """
    if levels < 3:
        raise ValueError(f"convergence needs at least 3 levels, got {levels}")
    cfg = cfg.with_values(output={"snapshot_times": ()})
    finals, masses, sizes = [], [], []
    for k in range(levels):
        f = 2 ** k
        z1, z2 = cfg.zone1, cfg.zone2
        level_cfg = cfg.with_values(zone1={"nx": z1.nx * f, "ny": z1.ny * f},
                                    zone2={"nx": z2.nx * f, "ny": z2.ny * f})
        model = Model.from_config(level_cfg)
        result = run(initial_state(level_cfg, model), model, cfg.numerics.t_end or 1.0)
        finals.append([restrict(fld.values, f) for fld in result.final.fields()])
        masses.append(result.records[-1].M_P1)
        sizes.append((z1.nx * f, z1.ny * f))
    areas = [g.cell_area for g in Model.from_config(cfg).grids]
    diffs = []
    for a, b in zip(finals, finals[1:]):
        diffs.append(sum(areas[i // 2] * np.abs(x - y).sum()
                         for i, (x, y) in enumerate(zip(a, b))))
    mass_diffs = [abs(a - b) for a, b in zip(masses, masses[1:])]
    # a conserved M_P1 differs between levels by roundoff only; report no order then
    roundoff = 1e-12 * max(abs(m) for m in masses)
    return ConvergenceStudy(sizes, masses, observed_orders(mass_diffs, roundoff), diffs,
                            observed_orders(diffs))


def _parser():
    p = argparse.ArgumentParser(prog="stressnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run one scenario")
    s.add_argument("--config", required=True)
    s.add_argument("--scenario", choices=SCENARIOS, default=None,
                   help="override the config's control block")
    s.add_argument("--out", required=True)
    c = sub.add_parser("compare", help="run wc, sc1 and sc2 and compare stressed masses")
    c.add_argument("--config", required=True)
    c.add_argument("--out", required=True)
    o = sub.add_parser("oracle", help="check a uniform config against the ODE reduction")
    o.add_argument("--config", required=True)
    o.add_argument("--out", default=None, help="optional directory for oracle.csv")
    v = sub.add_parser("convergence", help="grid self-convergence study")
    v.add_argument("--config", required=True)
    v.add_argument("--levels", type=int, default=3)
    v.add_argument("--min-order", type=float, default=0.9)
    return p


def _command(args, out):
    cfg = io.load_config(args.config)
    if args.command == "simulate":
        result = simulate(cfg, args.scenario, args.out)
        last = result.records[-1]
        print(f"t={last.t:g} steps={result.steps} M_P={last.M_P:.10g} M_P2={last.M_P2:.10g} "
              f"V={last.V:.17g} min={last.min_val:.3g}", file=out)
        return EXIT_OK
    if args.command == "compare":
        _, verdicts = compare(cfg, args.out)
        for v in verdicts:
            print(v.line(), file=out)
        return EXIT_OK
    if args.command == "oracle":
        cmp = compare_with_pde(cfg)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / "oracle.csv").write_text(write_trajectory(cmp.trajectory))
        ok = cmp.max_rel_deviation <= ORACLE_TOLERANCE
        print(f"{'PASS' if ok else 'FAIL'} max relative deviation "
              f"{cmp.max_rel_deviation:.3e} (tolerance {ORACLE_TOLERANCE:g}) over "
              f"t in [0, {cmp.times[-1]:g}]", file=out)
        return EXIT_OK if ok else EXIT_VERDICT
    if args.command == "convergence":
        study = convergence(cfg, args.levels)
        for k, (nx, ny) in enumerate(study.sizes):
            print(f"level {k}: {nx}x{ny} M_P1={study.M_P1[k]:.15g}", file=out)
        for k, (p_m, p_f) in enumerate(zip(study.mass_orders, study.field_orders)):
            print(f"levels {k}-{k + 2}: order M_P1 {p_m:.3f}, fields {p_f:.3f}", file=out)
        ok = study.order >= args.min_order
        print(f"{'PASS' if ok else 'FAIL'} observed order {study.order:.3f} "
              f"(required >= {args.min_order:g})", file=out)
        return EXIT_OK if ok else EXIT_VERDICT
    raise AssertionError(args.command)


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "convergence" and args.levels < 3:
        print(f"error: --levels must be >= 3, got {args.levels}", file=err)
        return EXIT_CONFIG
    try:
        return _command(args, out)
    except io.ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=err)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"output error: {exc}", file=err)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
