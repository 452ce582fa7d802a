import io as _io

import pytest

from stressnet import cli, stepper
from stressnet.io import read_observables, read_snapshot

from conftest import config_path


def call(*argv):
    out, err = _io.StringIO(), _io.StringIO()
    code = cli.main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


QUICK = str(config_path("quick.cfg"))


class TestUsage:
    def test_missing_config_file(self, tmp_path):
        code, _, err = call("simulate", "--config", str(tmp_path / "none.cfg"),
                            "--out", str(tmp_path))
        assert code == cli.EXIT_CONFIG
        assert "cannot read" in err

    def test_bad_config_reports_line(self, tmp_path):
        cfg = write_cfg(tmp_path, "[zone1]\nd_P = -1\n")
        code, _, err = call("simulate", "--config", cfg, "--out", str(tmp_path / "o"))
        assert code == cli.EXIT_CONFIG
        assert "line 2" in err and "zone1.d_P" in err

    def test_levels_below_three(self, tmp_path):
        code, _, err = call("convergence", "--config", QUICK, "--levels", "2")
        assert code == cli.EXIT_CONFIG
        assert "--levels" in err

    def test_unknown_scenario(self, tmp_path, capsys):
        code, _, _ = call("simulate", "--config", QUICK, "--scenario", "sc9", "--out",
                          str(tmp_path))
        assert code == cli.EXIT_CONFIG

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, err = call("simulate", "--config", QUICK, "--out", str(blocker / "sub"))
        assert code == cli.EXIT_CONFIG
        assert "output error" in err

    def test_no_subcommand(self, capsys):
        assert call()[0] == cli.EXIT_CONFIG


class TestSimulate:
    def test_writes_observables_and_snapshots(self, tmp_path):
        code, out, _ = call("simulate", "--config", QUICK, "--scenario", "sc1",
                            "--out", str(tmp_path))
        assert code == 0
        assert "t=20" in out
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["observables.csv", "zone1_t0.vtk", "zone1_t10.vtk", "zone1_t20.vtk",
                         "zone2_t0.vtk", "zone2_t10.vtk", "zone2_t20.vtk"]
        records = read_observables((tmp_path / "observables.csv").read_text())
        assert [r.t for r in records] == [float(t) for t in range(21)]
        assert read_snapshot(tmp_path / "zone1_t10.vtk")["u_P"].shape == (16, 16)

    def test_invariant_violation_exit_code(self, tmp_path, monkeypatch):
        monkeypatch.setattr(stepper, "compute_dt", lambda state, model: 0.5)
        code, _, err = call("simulate", "--config", QUICK, "--out", str(tmp_path))
        assert code == cli.EXIT_INVARIANT
        assert "invariant violation" in err and "cell (i=" in err


class TestCompare:
    def test_controls_off_gives_identical_curves(self, tmp_path):
        cfg = write_cfg(tmp_path, (config_path("quick.cfg").read_text()
                                   + "\n[control]\nK1 = 0\nK2 = 0\n"))
        code, out, _ = call("compare", "--config", cfg, "--out", str(tmp_path / "cmp"))
        assert code == 0
        lines = (tmp_path / "cmp" / "comparison.csv").read_text().splitlines()
        assert lines[0] == "t,M_P_wc,M_P_sc1,M_P_sc2,M_P2_wc,M_P2_sc1,M_P2_sc2"
        for line in lines[1:]:
            values = line.split(",")
            assert values[1] == values[2] == values[3]
            assert values[4] == values[5] == values[6]
        assert out.count("FAIL") == 4        # strict orderings cannot hold for equal curves
        for sc in cli.SCENARIOS:
            assert (tmp_path / "cmp" / sc / "observables.csv").exists()


class TestOracle:
    def test_uniform_config_passes(self, tmp_path):
        code, out, _ = call("oracle", "--config", str(config_path("uniform.cfg")),
                            "--out", str(tmp_path))
        assert code == 0
        assert out.startswith("PASS")
        assert (tmp_path / "oracle.csv").read_text().startswith("t,P1,N1,P2,N2\n")

    def test_gaussian_config_rejected_with_key(self):
        code, _, err = call("oracle", "--config", QUICK)
        assert code == cli.EXIT_CONFIG
        assert "zone1.v_P_max" in err

    def test_t_end_zero(self, tmp_path):
        cfg = write_cfg(tmp_path, config_path("uniform.cfg").read_text().replace(
            "t_end = 50", "t_end = 0"))
        code, out, _ = call("oracle", "--config", cfg)
        assert code == 0 and "0.000e+00" in out


class TestConvergence:
    def test_reports_orders(self, tmp_path):
        text = config_path("diffusion.cfg").read_text()
        text = text.replace("nx = 32", "nx = 8").replace("ny = 32", "ny = 8")
        code, out, _ = call("convergence", "--config", write_cfg(tmp_path, text))
        assert code == 0
        assert "level 2: 32x32" in out
        assert "order M_P1 nan" in out          # conserved under pure diffusion
        assert "PASS observed order" in out

    def test_failing_threshold(self, tmp_path):
        text = config_path("diffusion.cfg").read_text()
        text = text.replace("nx = 32", "nx = 8").replace("ny = 32", "ny = 8")
        code, out, _ = call("convergence", "--config", write_cfg(tmp_path, text),
                            "--min-order", "5")
        assert code == cli.EXIT_VERDICT
        assert "FAIL" in out


class TestHelpers:
    def test_restrict_averages_blocks(self):
        import numpy as np
        fine = np.arange(16.0).reshape(4, 4)
        np.testing.assert_array_equal(cli.restrict(fine, 2), [[2.5, 4.5], [10.5, 12.5]])

    def test_observed_orders(self):
        assert cli.observed_orders([4.0, 1.0, 0.25]) == [2.0, 2.0]
        assert cli.observed_orders([1.0, 0.0])[0] != cli.observed_orders([1.0, 0.0])[0]

    def test_snapshot_name(self):
        assert cli.snapshot_name(1, 0.0) == "zone1_t0.vtk"
        assert cli.snapshot_name(2, 2.5) == "zone2_t2.5.vtk"
