"""Configuration files, observable CSV tables and VTK snapshots.

Config files are sectioned ``key = value`` text::

    [zone1]
    d_P = 0.2
    target = (0.8, 0.8)
    clusters_P = (0.2, 0.2, 0.25, 1); (0.2, 0.75, 0.25, 1)

    [numerics]
    t_end = 400

``#`` starts a comment. Points are written ``(x, y)``, lists of numbers are
comma separated and cluster lists are ``;``-separated ``(cx, cy, r, w)``
tuples. ``inf`` is accepted as a number (infinite kernel or cluster radius
means a constant profile). A zone may set ``initial = cosine_x`` instead of
clusters to start from ``u_P, u_N = 1 +/- cos(pi (x - x0) / width) / 2``. Every key is optional; missing keys take the
default values below.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .observables import ObservableRecord

OBSERVABLE_COLUMNS = ("t", "M_P1", "M_N1", "M_P2", "M_N2", "M_P", "M_N", "V", "min_val",
                      "dt_used")
VTK_HEADER = "# vtk DataFile Version 3.0"


class ConfigError(ValueError):
    """Invalid configuration text; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ZoneConfig:
    nx: int = 64
    ny: int = 64
    origin: tuple = (0.0, 0.0)
    size: tuple = (1.0, 1.0)
    d_P: float = 0.2
    d_N: float = 0.1
    v_P_max: float = 0.025
    v_N_max: float = 0.015
    a: float = 0.01
    b: float = 0.005
    alpha_P: float = 0.7
    alpha_N: float = 0.4
    eps_guard: float = 1e-6
    target: tuple = (0.8, 0.8)
    mass: float = 0.5
    clusters_P: tuple = ()
    clusters_N: tuple = ()
    initial: str = "clusters"


@dataclass(frozen=True)
class CouplingConfig:
    directions: tuple = ("1to2",)
    m_1to2: float = 0.2
    m_2to1: float = 0.8
    departure_center_1: tuple = (0.8, 0.8)
    departure_radius_1: float = 0.15
    reception_center_2: tuple = (0.2, 0.2)
    reception_radius_2: float = 0.15
    departure_center_2: tuple = (0.2, 0.2)
    departure_radius_2: float = 0.15
    reception_center_1: tuple = (0.8, 0.8)
    reception_radius_1: float = 0.15


@dataclass(frozen=True)
class ControlConfig:
    mode: str = "off"
    K1: float = 1.0
    T0_1: float = 5.0
    T1_1: float = 20.0
    K2: float = 1.0
    T0_2: float = 10.0
    T1_2: float = 20.0
    u2_integrand: str = "inflow"


@dataclass(frozen=True)
class NumericsConfig:
    dt_max: float = 0.01
    cfl_safety: float = 0.9
    t_end: float = 400.0
    conservation_tol: float = 1e-6
    positivity_tol: float = 1e-10
    step_drift_tol: float = 1e-12
    speed_density: str = "total"


@dataclass(frozen=True)
class OutputConfig:
    record_interval: float = 1.0
    snapshot_times: tuple = (0.0, 10.0, 20.0, 100.0, 250.0, 400.0)
    output_dir: str = "."


ZONE1_DEFAULTS = ZoneConfig(
    clusters_P=((0.2, 0.2, 0.3, 1.0), (0.25, 0.75, 0.3, 1.0), (0.7, 0.3, 0.3, 1.0)),
)
ZONE2_DEFAULTS = ZoneConfig(
    d_P=0.15, d_N=0.05, v_P_max=0.0, v_N_max=0.0,
    a=0.005, b=0.0005, alpha_P=0.5, alpha_N=0.4,
    target=(0.2, 0.2),
    clusters_N=((0.75, 0.75, 0.3, 1.0), (0.3, 0.75, 0.3, 1.0), (0.75, 0.3, 0.3, 1.0)),
)


@dataclass(frozen=True)
class SimulationConfig:
    zone1: ZoneConfig = ZONE1_DEFAULTS
    zone2: ZoneConfig = ZONE2_DEFAULTS
    coupling: CouplingConfig = field(default_factory=CouplingConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def with_values(self, **sections):
        """Copy with per-section overrides, e.g. ``with_values(numerics={"t_end": 10})``."""
        updates = {name: replace(getattr(self, name), **values)
                   for name, values in sections.items()}
        cfg = replace(self, **updates)
        validate_config(cfg)
        return cfg


SECTIONS = ("zone1", "zone2", "coupling", "control", "numerics", "output")
_KINDS = {
    "nx": "int", "ny": "int",
    "origin": "point", "size": "point", "target": "point",
    "departure_center_1": "point", "reception_center_2": "point",
    "departure_center_2": "point", "reception_center_1": "point",
    "clusters_P": "clusters", "clusters_N": "clusters",
    "directions": "words", "mode": "word", "u2_integrand": "word",
    "speed_density": "word", "output_dir": "text", "initial": "word",
    "snapshot_times": "numbers",
}

_NUMBER = r"[-+]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
_NUMBER_RE = re.compile(rf"^\s*{_NUMBER}\s*$")
_TUPLE_RE = re.compile(r"^\s*\(([^()]*)\)\s*$")


def _number(text, where):
    if not _NUMBER_RE.match(text):
        raise ConfigError(f"{where}: {text.strip()!r} is not a number")
    return float(text)


def _tuple(text, n, where):
    m = _TUPLE_RE.match(text)
    if not m:
        raise ConfigError(f"{where}: expected a parenthesized {n}-tuple, got {text.strip()!r}")
    parts = m.group(1).split(",")
    if len(parts) != n:
        raise ConfigError(f"{where}: expected {n} components, got {len(parts)}")
    return tuple(_number(p, where) for p in parts)


def _convert(kind, raw, where):
    raw = raw.strip()
    if kind == "int":
        if not re.fullmatch(r"[-+]?\d+", raw):
            raise ConfigError(f"{where}: {raw!r} is not an integer")
        return int(raw)
    if kind == "point":
        return _tuple(raw, 2, where)
    if kind == "clusters":
        if not raw:
            return ()
        return tuple(_tuple(item, 4, where) for item in raw.split(";"))
    if kind == "numbers":
        if not raw:
            return ()
        return tuple(_number(item, where) for item in raw.split(","))
    if kind == "words":
        return tuple(w.strip() for w in raw.split(",") if w.strip())
    if kind in ("word", "text"):
        return raw
    return _number(raw, where)


def parse_config(text) -> SimulationConfig:
    """Parse and validate config text; missing keys fall back to defaults."""
    values = {name: {} for name in SECTIONS}
    seen = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[\s*([A-Za-z0-9_]+)\s*\]", line)
        if m:
            section = m.group(1)
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            if ("section", section) in seen:
                raise ConfigError(f"duplicate section [{section}] (first on line "
                                  f"{seen[('section', section)]})", lineno)
            seen[("section", section)] = lineno
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value' or '[section]', got {line!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        name = f"{section}.{key}"
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", key):
            raise ConfigError(f"malformed key {key!r}", lineno)
        known = {f.name for f in fields(_section_class(section))}
        if key not in known:
            raise ConfigError(f"unknown key {name}", lineno, name)
        if name in seen:
            raise ConfigError(f"duplicate key {name} on lines {seen[name]} and {lineno}",
                              lineno, name)
        seen[name] = lineno
        try:
            values[section][key] = _convert(_KINDS.get(key, "float"), raw, name)
        except ConfigError as exc:
            raise ConfigError(str(exc), lineno, name) from None
    cfg = SimulationConfig(
        zone1=replace(ZONE1_DEFAULTS, **values["zone1"]),
        zone2=replace(ZONE2_DEFAULTS, **values["zone2"]),
        coupling=CouplingConfig(**values["coupling"]),
        control=ControlConfig(**values["control"]),
        numerics=NumericsConfig(**values["numerics"]),
        output=OutputConfig(**values["output"]),
    )
    validate_config(cfg, seen)
    return cfg


def _section_class(section):
    return {"zone1": ZoneConfig, "zone2": ZoneConfig, "coupling": CouplingConfig,
            "control": ControlConfig, "numerics": NumericsConfig,
            "output": OutputConfig}[section]


def load_config(path) -> SimulationConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def validate_config(cfg: SimulationConfig, lines=None):
    """Raise ``ConfigError`` naming the first key that breaks a constraint."""
    lines = lines or {}

    def fail(key, message):
        raise ConfigError(f"{key} {message}", lines.get(key), key)

    def check_finite(key, value):
        if isinstance(value, float) and math.isnan(value):
            fail(key, "must not be nan")

    for section in SECTIONS:
        for f in fields(getattr(cfg, section)):
            value = getattr(getattr(cfg, section), f.name)
            for v in (value if isinstance(value, tuple) else (value,)):
                for w in (v if isinstance(v, tuple) else (v,)):
                    check_finite(f"{section}.{f.name}", w)

    for zname in ("zone1", "zone2"):
        z = getattr(cfg, zname)
        for key in ("nx", "ny"):
            if getattr(z, key) < 4:
                fail(f"{zname}.{key}", "must be >= 4")
        if not all(0 < s < math.inf for s in z.size):
            fail(f"{zname}.size", "must be positive and finite")
        if not all(math.isfinite(c) for c in z.origin):
            fail(f"{zname}.origin", "must be finite")
        for key in ("d_P", "d_N", "v_P_max", "v_N_max", "a", "b", "alpha_P", "alpha_N"):
            value = getattr(z, key)
            if not 0 <= value < math.inf:
                fail(f"{zname}.{key}", f"must be a finite value >= 0, got {value}")
        if not 0 < z.eps_guard < 1:
            fail(f"{zname}.eps_guard", "must lie in (0, 1)")
        x0, y0 = z.origin
        w, h = z.size
        tx, ty = z.target
        if not (x0 <= tx <= x0 + w and y0 <= ty <= y0 + h):
            fail(f"{zname}.target", "must lie inside the zone")
        if z.initial not in ("clusters", "cosine_x"):
            fail(f"{zname}.initial", "must be clusters or cosine_x")
        if not 0 <= z.mass <= 1:
            fail(f"{zname}.mass", "must lie in [0, 1]")
        for key in ("clusters_P", "clusters_N"):
            for cx, cy, r, wgt in getattr(z, key):
                if not r > 0:
                    fail(f"{zname}.{key}", "cluster radius must be positive")
                if not 0 <= wgt < math.inf:
                    fail(f"{zname}.{key}", "cluster weight must be finite and >= 0")
        if z.initial == "clusters" and z.mass > 0 and not any(wgt > 0 for key in ("clusters_P", "clusters_N")
                                  for *_, wgt in getattr(z, key)):
            fail(f"{zname}.mass", "is positive but the zone has no initial cluster")
    if abs(cfg.zone1.mass + cfg.zone2.mass - 1.0) > 1e-12 and (cfg.zone1.mass
                                                               + cfg.zone2.mass) > 0:
        fail("zone2.mass", "plus zone1.mass must equal 1 (or both be 0)")

    c = cfg.coupling
    for d in c.directions:
        if d not in ("1to2", "2to1"):
            fail("coupling.directions", f"has unknown direction {d!r}")
    if len(set(c.directions)) != len(c.directions):
        fail("coupling.directions", "lists a direction twice")
    for key in ("m_1to2", "m_2to1"):
        if not 0 <= getattr(c, key) <= 1:
            fail(f"coupling.{key}", "must lie in [0, 1]")
    for key in ("departure_radius_1", "reception_radius_2", "departure_radius_2",
                "reception_radius_1"):
        if not getattr(c, key) > 0:
            fail(f"coupling.{key}", "must be positive")

    ctl = cfg.control
    if ctl.mode not in ("off", "departure", "arrival", "both"):
        fail("control.mode", "must be one of off, departure, arrival, both")
    if ctl.u2_integrand not in ("inflow", "local"):
        fail("control.u2_integrand", "must be inflow or local")
    for k in ("K1", "K2"):
        if not 0 <= getattr(ctl, k) <= 1:
            fail(f"control.{k}", "must lie in [0, 1]")
    for a, b in (("T0_1", "T1_1"), ("T0_2", "T1_2")):
        if not 0 <= getattr(ctl, a) < getattr(ctl, b) < math.inf:
            fail(f"control.{a}", f"must satisfy 0 <= {a} < {b}")

    n = cfg.numerics
    for key in ("dt_max", "t_end", "conservation_tol", "positivity_tol", "step_drift_tol"):
        value = getattr(n, key)
        if key == "t_end":
            if not 0 <= value < math.inf:
                fail("numerics.t_end", "must be finite and >= 0")
        elif not value > 0:
            fail(f"numerics.{key}", "must be positive")
    if not 0 < n.cfl_safety <= 1:
        fail("numerics.cfl_safety", "must lie in (0, 1]")
    if n.speed_density not in ("total", "species"):
        fail("numerics.speed_density", "must be total or species")

    o = cfg.output
    if not 0 < o.record_interval < math.inf:
        fail("output.record_interval", "must be positive and finite")
    for t in o.snapshot_times:
        if not 0 <= t <= n.t_end:
            fail("output.snapshot_times", f"entry {t:g} lies outside [0, t_end]")
    return cfg


def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def format_config(cfg: SimulationConfig) -> str:
    """Emit every key of ``cfg``; ``parse_config`` reads it back unchanged."""
    out = []
    for section in SECTIONS:
        out.append(f"[{section}]")
        block = getattr(cfg, section)
        for f in fields(block):
            value = getattr(block, f.name)
            kind = _KINDS.get(f.name, "float")
            if kind == "point":
                text = f"({_fmt(value[0])}, {_fmt(value[1])})"
            elif kind == "clusters":
                text = "; ".join("(" + ", ".join(_fmt(v) for v in c) + ")" for c in value)
            elif kind == "numbers":
                text = ", ".join(_fmt(v) for v in value)
            elif kind == "words":
                text = ", ".join(value)
            else:
                text = _fmt(value)
            out.append(f"{f.name} = {text}".rstrip())
        out.append("")
    return "\n".join(out)


def write_observables(records) -> str:
    """CSV text with one row per record, every value at 17 significant digits."""
    records = list(records)
    if not records:
        raise ValueError("need at least one observable record")
    lines = [",".join(OBSERVABLE_COLUMNS)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, c)) for c in OBSERVABLE_COLUMNS))
    return "\n".join(lines) + "\n"


def read_observables(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = tuple(lines[0].split(","))
    if header != OBSERVABLE_COLUMNS:
        raise ValueError(f"unexpected observable header {lines[0]!r}")
    return [ObservableRecord(**dict(zip(header, map(float, ln.split(",")))))
            for ln in lines[1:]]


def write_csv_table(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_snapshot(state, zone_id, path):
    """Write one zone's ``u_P`` and ``u_N`` as legacy ASCII VTK structured points."""
    if zone_id == 1:
        uP, uN = state.uP1, state.uN1
    elif zone_id == 2:
        uP, uN = state.uP2, state.uN2
    else:
        raise ValueError(f"zone_id must be 1 or 2, got {zone_id}")
    g = uP.grid
    n = g.nx * g.ny
    lines = [
        VTK_HEADER,
        f"stressnet zone {zone_id} t={_fmt(state.t)}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {g.nx} {g.ny} 1",
        f"ORIGIN {_fmt(g.x0 + 0.5 * g.hx)} {_fmt(g.y0 + 0.5 * g.hy)} 0",
        f"SPACING {_fmt(g.hx)} {_fmt(g.hy)} 1",
        f"POINT_DATA {n}",
    ]
    for name, f in (("u_P", uP), ("u_N", uN)):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        # row-major (ny, nx) storage is already x-fastest
        lines.extend(_fmt(v) for v in f.values.ravel())
    text = "\n".join(lines) + "\n"
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write snapshot {os.fspath(path)}: {exc.strerror}") \
            from None
    return path


def read_snapshot(path):
    """Parse a snapshot written by ``write_snapshot``.

    Returns a dict with ``dimensions``, ``origin``, ``spacing`` and one
    ``(ny, nx)`` array per scalar name.
    """
    lines = Path(path).read_text().splitlines()
    if lines[0] != VTK_HEADER:
        raise ValueError(f"{path} is not a legacy VTK 3.0 file")
    out = {}
    k = 2
    while k < len(lines):
        words = lines[k].split()
        if not words:
            k += 1
            continue
        if words[0] == "DIMENSIONS":
            out["dimensions"] = tuple(int(w) for w in words[1:])
        elif words[0] in ("ORIGIN", "SPACING"):
            out[words[0].lower()] = tuple(float(w) for w in words[1:])
        elif words[0] == "SCALARS":
            nx, ny, _ = out["dimensions"]
            vals = np.array([float(v) for v in lines[k + 2:k + 2 + nx * ny]])
            out[words[1]] = vals.reshape(ny, nx)
            k += 2 + nx * ny
            continue
        k += 1
    return out
