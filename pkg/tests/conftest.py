from pathlib import Path

import numpy as np
import pytest

from stressnet.io import SimulationConfig, load_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def config_path(name):
    return CONFIG_DIR / name


@pytest.fixture
def uniform_cfg():
    return load_config(config_path("uniform.cfg"))


@pytest.fixture
def small_cfg():
    """Default model on 16x16 grids over a short horizon."""
    return SimulationConfig().with_values(
        zone1={"nx": 16, "ny": 16}, zone2={"nx": 16, "ny": 16},
        numerics={"t_end": 2.0}, output={"snapshot_times": ()})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance results keyed by criterion number: (title, [(ok, detail), ...])
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, parts = ACCEPTANCE_RESULTS[number]
        if not parts:
            terminalreporter.write_line(f"NOT RUN [{number}] {title}")
            continue
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(detail for _, detail in parts)
        terminalreporter.write_line(f"{status} [{number}] {title}: {details}")
