"""Walk-through: checking the solver against independent references.

1. A spatially uniform config collapses to a 4-variable ODE; the PDE run
   is compared with a pure-Python RK4 integration of that ODE.
2. A pure-diffusion cosine profile is refined three times to read off the
   observed spatial order (expected: 2).
"""

from pathlib import Path

from stressnet import cli
from stressnet.io import load_config
from stressnet.oracle import compare_with_pde

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

# %% uniform config vs ODE, first 10 time units
cmp = compare_with_pde(load_config(CONFIGS / "uniform.cfg"), t_end=10.0)
print(f"max relative deviation PDE vs ODE over [0, 10]: {cmp.max_rel_deviation:.2e}")
for s in cmp.trajectory[::5]:
    print(f"  t={s.t:5g}  P1={s.P1:.6f}  N1={s.N1:.6f}  P2={s.P2:.6f}  N2={s.N2:.6f}")

# %% diffusion self-convergence on 32, 64, 128
study = cli.convergence(load_config(CONFIGS / "diffusion.cfg"), 3)
for (nx, ny), diff in zip(study.sizes[1:], study.field_differences):
    print(f"  {nx}x{ny}: L1 difference to previous level {diff:.3e}")
print(f"observed order {study.order:.3f}")
