"""Mass functionals recorded along a run."""

from __future__ import annotations

from dataclasses import astuple, dataclass

from .grid import integrate


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    M_P1: float
    M_N1: float
    M_P2: float
    M_N2: float
    M_P: float
    M_N: float
    V: float
    min_val: float
    dt_used: float

    def as_tuple(self):
        return astuple(self)


def record(state, dt_used=0.0) -> ObservableRecord:
    """Zone and network masses of ``state`` plus its smallest cell value."""
    mp1 = integrate(state.uP1)
    mn1 = integrate(state.uN1)
    mp2 = integrate(state.uP2)
    mn2 = integrate(state.uN2)
    mp = mp1 + mp2
    mn = mn1 + mn2
    lowest = min(float(f.values.min()) for f in state.fields())
    return ObservableRecord(float(state.t), mp1, mn1, mp2, mn2, mp, mn, mp + mn, lowest,
                            float(dt_used))
