import os

import pytest

import cgl.cli as cli
from cgl.grid import read_snapshot
from cgl.operators import ResolventError
from cgl.timestepper import StepError

QUICK_RUN = """
model.theta = 0.3
model.m = 1
model.p = 3
model.a = 1
model.gamma = 0.2
kernel.epsilon = 0
grid.n = 16
time.tau = 0.01
time.t_end = 0.1
init.kind = modal
init.k = 1
forcing.kind = modal
forcing.k = 2
forcing.amplitude = 0.2
seed = 5
"""

BAD_THETA = QUICK_RUN.replace("model.theta = 0.3", "model.theta = 1.5707963267948966")


@pytest.fixture()
def quick_cfg(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(QUICK_RUN)
    return path


class TestCheckParams:
    def test_admissible_exits_zero(self, quick_cfg, capsys):
        assert cli.main(["check-params", "--config", str(quick_cfg)]) == 0
        assert "admissible" in capsys.readouterr().out

    def test_violation_exits_one_and_names_theta(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text(BAD_THETA)
        assert cli.main(["check-params", "--config", str(path)]) == 1
        assert "theta" in capsys.readouterr().out

    def test_unreadable_config_exits_two(self, tmp_path):
        assert cli.main(["check-params", "--config", str(tmp_path / "none.cfg")]) == 2
        broken = tmp_path / "broken.cfg"
        broken.write_text("model.theta 0.3\n")
        assert cli.main(["check-params", "--config", str(broken)]) == 2


class TestRun:
    def test_writes_ledger_and_snapshots(self, quick_cfg, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["run", "--config", str(quick_cfg), "--out", str(out)]) == 0
        ledger = (out / "ledger.csv").read_text().splitlines()
        assert len(ledger) == 1 + 11  # header + rows 0..10
        snaps = sorted(os.listdir(out / "snapshots"))
        assert snaps[0] == "snap_000000.cglf"
        field = read_snapshot(out / "snapshots" / snaps[-1])
        assert field.grid.n == 16

    def test_deterministic_ledger_bytes(self, quick_cfg, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert cli.main(["run", "--config", str(quick_cfg), "--out", str(out1)]) == 0
        assert cli.main(["run", "--config", str(quick_cfg), "--out", str(out2)]) == 0
        assert (out1 / "ledger.csv").read_bytes() == (out2 / "ledger.csv").read_bytes()

    def test_solver_failure_exits_three(self, quick_cfg, tmp_path, monkeypatch, capsys):
        def boom(u0, forcing, time, spec, tol=1e-10):
            raise StepError(1, ResolventError("forced", u0, [1.0]))

        monkeypatch.setattr(cli, "run", boom)
        code = cli.main(["run", "--config", str(quick_cfg), "--out", str(tmp_path / "o")])
        assert code == 3
        assert "step 1" in capsys.readouterr().err


class TestVerify:
    def test_quick_kernels_suite_passes(self, capsys, tmp_path):
        out = tmp_path / "certs.txt"
        code = cli.main(["verify", "kernels", "--quick", "--seed", "0",
                         "--out", str(out)])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert all(" PASS " in line and "worst_margin=" in line for line in lines)
        assert out.read_text().strip().splitlines() == lines

    def test_failing_certificate_flips_exit_code(self, monkeypatch):
        from cgl.diagnostics import Certificate

        class FakeRunner:
            def __init__(self, **kwargs):
                pass

            def suite(self, name):
                return [Certificate("fake", False, -1.0, 0)]

        monkeypatch.setattr(cli, "SuiteRunner", FakeRunner)
        assert cli.main(["verify", "kernels"]) == 1


class TestSweep:
    def test_epsilon_sweep_serial(self, quick_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("CGL_THREADS", "1")
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(QUICK_RUN.replace("model.m = 1", "model.m = 0.5"))
        out = tmp_path / "sweep"
        code = cli.main(["sweep", "--config", str(cfg), "--axis", "kernel.epsilon",
                         "--values", "1e-2,1e-3,1e-4", "--out", str(out)])
        assert code == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0].startswith("kernel.epsilon,")
        assert len(lines) == 4
        assert all(",ok," in line for line in lines[1:])
        assert (out / "cell_000" / "ledger.csv").exists()

    def test_cell_failure_recorded_sweep_continues(self, quick_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("CGL_THREADS", "1")
        out = tmp_path / "sweep"
        code = cli.main(["sweep", "--config", str(quick_cfg), "--axis", "model.theta",
                         "--values", "0.3,99,0.5", "--out", str(out)])
        assert code == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        statuses = [line.split(",")[1] for line in lines[1:]]
        assert statuses[0] == "ok" and statuses[2] == "ok"
        assert statuses[1] == "error"

    def test_theta_sweep_reports_h1_margins(self, quick_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("CGL_THREADS", "1")
        out = tmp_path / "sweep"
        assert cli.main(["sweep", "--config", str(quick_cfg), "--axis", "model.theta",
                         "--values", "0.1,0.5,0.9", "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0].split(",")[4] == "h1_margin"
        margins = [float(line.split(",")[4]) for line in lines[1:]]
        assert all(m > 0.0 for m in margins)

    def test_epsilon_sweep_cells_converge(self, tmp_path, monkeypatch):
        # successive cells approach the eps -> 0 limit: final masses Cauchy
        monkeypatch.setenv("CGL_THREADS", "1")
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(QUICK_RUN.replace("model.m = 1", "model.m = 0.5"))
        out = tmp_path / "sweep"
        assert cli.main(["sweep", "--config", str(cfg), "--axis", "kernel.epsilon",
                         "--values", "1e-1,1e-2,1e-3,1e-4,1e-5", "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()[1:]
        masses = [float(line.split(",")[2]) for line in lines]
        diffs = [abs(a - b) for a, b in zip(masses, masses[1:])]
        assert all(b < a for a, b in zip(diffs, diffs[1:]))

    def test_parallel_matches_serial(self, quick_cfg, tmp_path, monkeypatch):
        outs = {}
        for threads, tag in (("1", "serial"), ("2", "parallel")):
            monkeypatch.setenv("CGL_THREADS", threads)
            out = tmp_path / tag
            assert cli.main(["sweep", "--config", str(quick_cfg), "--axis",
                             "time.tau", "--values", "0.01,0.02",
                             "--out", str(out)]) == 0
            outs[tag] = (out / "sweep.csv").read_bytes()
        assert outs["serial"] == outs["parallel"]


class TestReport:
    def test_renders_columns_and_figures(self, quick_cfg, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli.main(["run", "--config", str(quick_cfg), "--out", str(out)]) == 0
        report_dir = tmp_path / "report"
        code = cli.main(["report", "--ledger", str(out / "ledger.csv"),
                         "--out", str(report_dir)])
        assert code == 0
        names = sorted(os.listdir(report_dir))
        assert names == ["mass.dat", "mass.png", "residual.dat", "residual.png",
                         "terms.dat", "terms.png"]
        first = (report_dir / "mass.dat").read_text().splitlines()
        assert first[0].startswith("# t")
        assert len(first) == 1 + 11

    def test_snapshot_profiles(self, quick_cfg, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["run", "--config", str(quick_cfg), "--out", str(out)]) == 0
        report_dir = tmp_path / "report"
        assert cli.main(["report", "--ledger", str(out / "ledger.csv"),
                         "--out", str(report_dir),
                         "--snapshots", str(out / "snapshots")]) == 0
        assert (report_dir / "profile.png").exists()
        profile = (report_dir / "profile.dat").read_text().splitlines()
        assert profile[0].startswith("# x")
        assert len(profile) == 1 + 16  # grid.n rows

    def test_missing_ledger_exits_two(self, tmp_path):
        assert cli.main(["report", "--ledger", str(tmp_path / "none.csv"),
                         "--out", str(tmp_path)]) == 2
