"""Uniform cell-centered grids and the scalar fields that live on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered rectangular mesh for one zone.

    Values on the grid are stored as ``(ny, nx)`` arrays so that a C-order
    flatten runs x-fastest.
    """

    nx: int
    ny: int
    x0: float = 0.0
    y0: float = 0.0
    hx: float = 1.0 / 64
    hy: float = 1.0 / 64
    zone_id: int = 1

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid needs at least 4x4 cells, got {self.nx}x{self.ny}")
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError(f"cell spacings must be positive, got hx={self.hx}, hy={self.hy}")
        if self.zone_id not in (1, 2):
            raise ValueError(f"zone_id must be 1 or 2, got {self.zone_id}")

    @classmethod
    def rectangle(cls, nx, ny, origin=(0.0, 0.0), size=(1.0, 1.0), zone_id=1):
        """Grid covering ``[x0, x0 + width] x [y0, y0 + height]``."""
        return cls(nx, ny, float(origin[0]), float(origin[1]),
                   size[0] / nx, size[1] / ny, zone_id)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def cell_area(self):
        return self.hx * self.hy

    @property
    def width(self):
        return self.nx * self.hx

    @property
    def height(self):
        return self.ny * self.hy

    @property
    def area(self):
        return self.width * self.height

    def cell_center(self, i, j):
        return (self.x0 + (i + 0.5) * self.hx, self.y0 + (j + 0.5) * self.hy)

    def centers(self):
        """Cell-center coordinate arrays ``(X, Y)``, each shaped ``(ny, nx)``."""
        x = self.x0 + (np.arange(self.nx) + 0.5) * self.hx
        y = self.y0 + (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y, indexing="xy")

    def contains(self, point):
        x, y = point
        return (self.x0 <= x <= self.x0 + self.width
                and self.y0 <= y <= self.y0 + self.height)

    def locate(self, point):
        """Index ``(i, j)`` of the cell containing ``point`` (upper faces belong to the last cell)."""
        x, y = point
        i = min(int(np.floor((x - self.x0) / self.hx)), self.nx - 1)
        j = min(int(np.floor((y - self.y0) / self.hy)), self.ny - 1)
        return i, j

    def refined(self, factor=2):
        return Grid(self.nx * factor, self.ny * factor, self.x0, self.y0,
                    self.hx / factor, self.hy / factor, self.zone_id)


@dataclass
class Field:
    """Scalar density sampled at the cell centers of one grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size != self.grid.nx * self.grid.ny:
            raise ValueError(
                f"field has {values.size} values, grid needs {self.grid.nx * self.grid.ny}")
        self.values = values.reshape(self.grid.shape)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid, func):
        X, Y = grid.centers()
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape).copy())

    def copy(self):
        return Field(self.grid, self.values.copy())

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def _check(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._check(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._check(other))

    def __mul__(self, other):
        return Field(self.grid, self.values * self._check(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)


def check_same_grid(*fields):
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError(f"grid mismatch: {f.grid} vs {grid}")
    return grid


def integrate(f):
    """Midpoint-rule integral ``hx * hy * sum(values)`` over the zone."""
    return f.grid.cell_area * float(np.sum(f.values))


def neumann_extend(f):
    """Return a ``(ny + 2, nx + 2)`` array padded with one mirrored ghost layer.

    Ghost values copy the adjacent interior cell, giving a zero normal
    gradient across every boundary face. Corner ghosts are filled too but no
    5-point stencil reads them.
    """
    return np.pad(f.values, 1, mode="edge")
