"""Local behavioral exchange between stressed and non-stressed densities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import Field, check_same_grid


@dataclass(frozen=True)
class ZoneKineticsParams:
    """Transition and imitation rates of one zone.

    ``a`` converts non-stressed to stressed, ``b`` the reverse; ``alpha_P``
    and ``alpha_N`` weight imitation toward each behavior. ``eps_guard``
    keeps the density ratios finite.
    """

    a: float = 0.01
    b: float = 0.005
    alpha_P: float = 0.7
    alpha_N: float = 0.4
    eps_guard: float = 1e-6

    def __post_init__(self):
        for name in ("a", "b", "alpha_P", "alpha_N"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0 < self.eps_guard < 1:
            raise ValueError(f"eps_guard must lie in (0, 1), got {self.eps_guard}")

    @property
    def max_rate(self):
        return self.a + self.b + self.alpha_P + self.alpha_N


def xi(s):
    """Saturating imitation weight ``s^2 / (1 + s^2)``."""
    if isinstance(s, (float, int)):
        s2 = s * s
        return s2 / (1.0 + s2)
    s = np.asarray(s, dtype=np.float64)
    s2 = s * s
    return s2 / (1.0 + s2)


def imitation_coefficient(uP, uN, p: ZoneKineticsParams):
    """Net imitation pull toward stress; positive when stress dominates locally.

    Works on scalars and on arrays of densities.
    """
    if not isinstance(uP, (float, int)) or not isinstance(uN, (float, int)):
        uP = np.asarray(uP, dtype=np.float64)
        uN = np.asarray(uN, dtype=np.float64)
    return p.alpha_P * xi(uP / (uN + p.eps_guard)) - p.alpha_N * xi(uN / (uP + p.eps_guard))


def reaction_rhs(uP: Field, uN: Field, p: ZoneKineticsParams):
    """Pointwise exchange rates ``(dP, dN)`` with ``dN == -dP`` exactly."""
    grid = check_same_grid(uP, uN)
    outp = np.empty(grid.shape)
    outn = np.empty(grid.shape)
    _kernels.reaction(uP.values, uN.values, p.a, p.b, p.alpha_P, p.alpha_N, p.eps_guard,
                      outp, outn)
    return Field(grid, outp), Field(grid, outn)
