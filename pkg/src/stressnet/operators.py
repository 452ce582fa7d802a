"""Spatial transport operators: Neumann diffusion and density-limited upwind advection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import Field, Grid, check_same_grid


@dataclass
class DirectionField:
    """Desired walking direction per cell, unit length or zero."""

    grid: Grid
    fx: np.ndarray
    fy: np.ndarray

    def __post_init__(self):
        self.fx = np.asarray(self.fx, dtype=np.float64).reshape(self.grid.shape)
        self.fy = np.asarray(self.fy, dtype=np.float64).reshape(self.grid.shape)

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    @classmethod
    def uniform(cls, grid, direction):
        """Same unit vector in every cell (boundary cells included)."""
        v = np.asarray(direction, dtype=np.float64)
        v = v / np.hypot(*v)
        return cls(grid, np.full(grid.shape, v[0]), np.full(grid.shape, v[1]))

    def face_components(self):
        """Face-normal direction components averaged from the two adjacent cells.

        Returns ``(nux, nuy)`` shaped ``(ny, nx + 1)`` and ``(ny + 1, nx)``;
        boundary faces are zero.
        """
        ny, nx = self.grid.shape
        nux = np.zeros((ny, nx + 1))
        nuy = np.zeros((ny + 1, nx))
        nux[:, 1:-1] = 0.5 * (self.fx[:, :-1] + self.fx[:, 1:])
        nuy[1:-1, :] = 0.5 * (self.fy[:-1, :] + self.fy[1:, :])
        return nux, nuy


@dataclass(frozen=True)
class AdvectionParams:
    v_max: float

    def __post_init__(self):
        if not self.v_max >= 0:
            raise ValueError(f"v_max must be >= 0, got {self.v_max}")


def laplacian(f: Field, d: float) -> Field:
    """``d * Laplacian(f)`` on the 5-point stencil with zero-gradient boundaries."""
    if d < 0:
        raise ValueError(f"diffusion coefficient must be >= 0, got {d}")
    out = np.zeros(f.grid.shape)
    _kernels.add_laplacian(f.values, float(d), f.grid.hx, f.grid.hy, out)
    return Field(f.grid, out)


def build_direction_field(grid: Grid, target) -> DirectionField:
    """Unit vectors pointing from each cell center toward ``target``.

    Cells touching the boundary and the cell containing the target get the
    zero vector.
    """
    if not grid.contains(target):
        raise ValueError(f"target {tuple(target)} lies outside zone {grid.zone_id}")
    X, Y = grid.centers()
    dx = target[0] - X
    dy = target[1] - Y
    norm = np.hypot(dx, dy)
    fx = np.zeros(grid.shape)
    fy = np.zeros(grid.shape)
    ok = norm > 0
    fx[ok] = dx[ok] / norm[ok]
    fy[ok] = dy[ok] / norm[ok]
    for arr in (fx, fy):
        arr[0, :] = arr[-1, :] = 0.0
        arr[:, 0] = arr[:, -1] = 0.0
    i, j = grid.locate(target)
    fx[j, i] = fy[j, i] = 0.0
    return DirectionField(grid, fx, fy)


def face_velocities(total: Field, direction: DirectionField, params: AdvectionParams):
    """Face-normal velocities ``v_max * max(1 - mean(total), 0) * nu_face``."""
    nux, nuy = direction.face_components()
    velx = np.zeros_like(nux)
    vely = np.zeros_like(nuy)
    _kernels.face_velocities(total.values, nux, nuy, float(params.v_max), velx, vely)
    return velx, vely


def upwind_divergence(f: Field, velx, vely) -> Field:
    """``-div(vel * f)`` from prescribed face velocities, first-order upwind."""
    out = np.zeros(f.grid.shape)
    _kernels.add_upwind_divergence(f.values, np.asarray(velx, dtype=np.float64),
                                   np.asarray(vely, dtype=np.float64),
                                   f.grid.hx, f.grid.hy, out)
    return Field(f.grid, out)


def advective_divergence(f: Field, total: Field, direction: DirectionField,
                         params: AdvectionParams) -> Field:
    """``-div(v(total) nu f)`` with the linear speed closure ``v(u) = v_max (1 - u)``.

    ``total`` is the density that sets the walking speed (normally
    ``u_P + u_N`` of the same zone).
    """
    check_same_grid(f, total)
    if direction.grid != f.grid:
        raise ValueError("direction field lives on a different grid")
    if params.v_max == 0:
        return Field.zeros(f.grid)
    velx, vely = face_velocities(total, direction, params)
    return upwind_divergence(f, velx, vely)


def advective_cfl(grid: Grid, v_max: float) -> float:
    """Largest step for which an isolated upwind update stays positive.

    A cell can lose mass through all four faces, each at speed at most
    ``v_max``.
    """
    if v_max == 0:
        return np.inf
    return 1.0 / (2.0 * v_max * (1.0 / grid.hx + 1.0 / grid.hy))
