import csv
import subprocess
import sys

import pytest

from palh import cli
from palh.errors import SolverError

SMALL_WG = "[problem]\nthickness = 0.5\n[discretization]\ndegrees = 6, 10\ninterior_degree = 30\n"


def _run(args, env=None):
    return subprocess.run([sys.executable, "-m", "palh.cli", *args], capture_output=True, text=True, env=env)


def test_success_writes_csv(tmp_path):
    cfgp = tmp_path / "wg.ini"
    cfgp.write_text(SMALL_WG)
    out = tmp_path / "out"
    r = _run(["waveguide", "--config", str(cfgp), "--out", str(out)])
    assert r.returncode == 0, r.stderr
    with open(out / "waveguide_pal_d0.5.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["N", "max_error", "l2_error", "seconds"]
    assert [int(row[0]) for row in rows[1:]] == [6, 10]
    assert (out / "waveguide_report.json").exists()
    assert "pal_d0.5" in r.stdout


def test_config_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\nbogus = 1\n")
    assert cli.main(["waveguide", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert cli.main(["waveguide", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 2
    assert cli.main(["waveguide"]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["waveguide", "--out", str(blocker / "sub")]) == 2


def test_geometry_config_error_exit_2(tmp_path):
    cfgp = tmp_path / "sc.ini"
    cfgp.write_text("[problem]\nlayer = circle 0.5\nrho = 1.2\n")
    assert cli.main(["scatter", "--config", str(cfgp), "--out", str(tmp_path / "o")]) == 2


def test_solver_error_exit_3(tmp_path, monkeypatch):
    def boom(cfg, out):
        raise SolverError("singular")

    monkeypatch.setitem(cli.COMMANDS, "waveguide", ("waveguide_compare", boom))
    assert cli.main(["waveguide", "--out", str(tmp_path)]) == 3


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("PALH_THREADS", "zero")
    assert cli.main(["circular", "--out", str(tmp_path)]) == 2
    seen = {}

    def fake(cfg, out, workers=None):
        from palh.experiments import worker_count

        seen["w"] = worker_count()
        return {}

    monkeypatch.setenv("PALH_THREADS", "3")
    monkeypatch.setitem(cli.COMMANDS, "circular", ("circular_compare", fake))
    assert cli.main(["circular", "--out", str(tmp_path)]) == 0
    assert seen["w"] == 3


def test_print_config(capsys):
    assert cli.main(["scatter", "--print-config"]) == 0
    assert "[discretization]" in capsys.readouterr().out


def test_unknown_command():
    with pytest.raises(SystemExit) as exc:
        cli.main(["nope"])
    assert exc.value.code == 2
