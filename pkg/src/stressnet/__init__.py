"""Two-zone advection-diffusion-reaction simulator for stress propagation in crowds."""

from .grid import Field, Grid, integrate, neumann_extend
from .io import SimulationConfig, load_config, parse_config
from .stepper import (InvariantViolation, Model, NetworkState, compute_dt, initial_state,
                      rhs, run, step)

__all__ = [
    "Field", "Grid", "integrate", "neumann_extend",
    "SimulationConfig", "load_config", "parse_config",
    "InvariantViolation", "Model", "NetworkState", "compute_dt", "initial_state", "rhs",
    "run", "step",
]
