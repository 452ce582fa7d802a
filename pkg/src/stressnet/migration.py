"""Nonlocal migration between the two zones.

Each directed channel removes ``m * p(x) * u(x)`` from the source zone and
redistributes the same total, ``m * integral(p u)``, over the destination
with a reception profile of unit integral. Stressed and non-stressed
densities migrate independently through the same channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import Field, integrate


@dataclass
class MigrationKernel:
    """One directed channel ``source -> destination``."""

    p_out: Field
    eps_in: Field
    m: float

    def __post_init__(self):
        if not 0 <= self.m <= 1:
            raise ValueError(f"migration proportion m must lie in [0, 1], got {self.m}")
        p = self.p_out.values
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("departure kernel must take values in [0, 1]")
        if np.any(self.eps_in.values < 0):
            raise ValueError("reception kernel must be nonnegative")
        total = integrate(self.eps_in)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"reception kernel integrates to {total!r}, expected 1")

    @property
    def source(self):
        return self.p_out.grid

    @property
    def destination(self):
        return self.eps_in.grid


def gaussian_kernel(grid, center, radius) -> Field:
    """``exp(-|x - center|^2 / radius^2)`` at the cell centers.

    ``radius = inf`` gives the constant kernel 1.
    """
    if not radius > 0:
        raise ValueError(f"kernel radius must be positive, got {radius}")
    if np.isinf(radius):
        return Field.constant(grid, 1.0)
    X, Y = grid.centers()
    r2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    return Field(grid, np.exp(-r2 / radius**2))


def normalize_reception(raw: Field) -> Field:
    total = integrate(raw)
    if not total > 0:
        raise ValueError(f"reception profile must have a positive integral, got {total}")
    return Field(raw.grid, raw.values / total)


def transfer_rate(u_src: Field, kernel: MigrationKernel) -> float:
    """Migrating mass per unit time ``m * integral(p_out * u_src)``."""
    if u_src.grid != kernel.source:
        raise ValueError("source density is not on the kernel's source grid")
    return kernel.m * kernel.source.cell_area * _kernels.weighted_sum(kernel.p_out.values,
                                                                     u_src.values)


def migration_rhs(u_src: Field, u_dst: Field, out_kernel: MigrationKernel,
                  in_kernel: MigrationKernel | None = None):
    """Migration contributions ``(on source grid, on destination grid)``.

    ``out_kernel`` drives ``src -> dst``; an optional ``in_kernel`` adds the
    reverse channel ``dst -> src``.
    """
    if u_src.grid != out_kernel.source or u_dst.grid != out_kernel.destination:
        raise ValueError("densities do not match the migration kernel's grids")
    src = np.zeros(u_src.grid.shape)
    dst = np.zeros(u_dst.grid.shape)
    _kernels.add_migration(u_src.values, out_kernel.p_out.values, float(out_kernel.m),
                           out_kernel.source.cell_area, out_kernel.eps_in.values, src, dst)
    if in_kernel is not None:
        if in_kernel.source != u_dst.grid or in_kernel.destination != u_src.grid:
            raise ValueError("reverse kernel does not connect destination back to source")
        _kernels.add_migration(u_dst.values, in_kernel.p_out.values, float(in_kernel.m),
                               in_kernel.source.cell_area, in_kernel.eps_in.values, dst, src)
    return Field(u_src.grid, src), Field(u_dst.grid, dst)
