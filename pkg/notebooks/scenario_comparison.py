"""Walk-through: how the two controls change the stressed population.

Runs the three scenarios on a coarse 16x16 grid over t in [0, 20] (a few
seconds) and prints the stressed masses side by side.  Pass a config path
as the first argument to use something else, e.g. configs/default.cfg for
the full-length reference run (about 6 minutes).
"""

import sys
import tempfile
from pathlib import Path

from stressnet import cli
from stressnet.io import load_config

ROOT = Path(__file__).resolve().parents[1]

# %% load a config
path = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "configs" / "quick.cfg"
cfg = load_config(path)
print(f"config {path.name}: {cfg.zone1.nx}x{cfg.zone1.ny} per zone, t_end={cfg.numerics.t_end:g}")

# %% run wc, sc1, sc2
with tempfile.TemporaryDirectory() as out:
    results, verdicts = cli.compare(cfg, out)
    table = (Path(out) / "comparison.csv").read_text().splitlines()

# %% stressed mass in both zones over time
print()
print(f"{'t':>6} {'M_P wc':>12} {'M_P sc1':>12} {'M_P sc2':>12}")
for line in table[1::max(1, len(table) // 10)]:
    t, wc, sc1, sc2 = (float(v) for v in line.split(",")[:4])
    print(f"{t:6g} {wc:12.6f} {sc1:12.6f} {sc2:12.6f}")

# %% terminal orderings
print()
for v in verdicts:
    print(v.line())
