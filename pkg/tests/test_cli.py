import json
import subprocess
import sys

import numpy as np

from bbcs import fileio
from bbcs.cli import main
from bbcs.operators import DenseOperator


def test_solve_from_files(tmp_path, capsys):
    fileio.save_operator(tmp_path / "a.csv", DenseOperator(np.eye(4)))
    fileio.save_vector(tmp_path / "b.bin", [3.0, 0.2, -2.0, 0.0])
    code = main(["solve", "--matrix", str(tmp_path / "a.csv"), "--obs", str(tmp_path / "b.bin"),
                 "--lambda", "1.0", "--out", str(tmp_path / "r.json"),
                 "--x-out", str(tmp_path / "x.csv")])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["converged"] and summary["lambda"] == 1.0
    x = fileio.load_vector(tmp_path / "x.csv")
    np.testing.assert_allclose(x, [2.5, 0.0, -1.5, 0.0], atol=1e-5)
    assert fileio.load_report(tmp_path / "r.json").converged


def test_solve_with_generator_and_auto_lambda(tmp_path, capsys):
    fileio.save_vector(tmp_path / "b.csv", np.linspace(-1, 1, 16))
    for solver in ("bbcs", "bbcs-m", "fista"):
        code = main(["solve", "--matrix", "gen:dct:16:64:3", "--obs", str(tmp_path / "b.csv"),
                     "--lambda", "auto:0.2", "--solver", solver])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert out["converged"]


def test_error_is_json_with_nonzero_exit(tmp_path, capsys):
    fileio.save_vector(tmp_path / "b.csv", np.ones(5))
    code = main(["solve", "--matrix", "gen:dct:16:64", "--obs", str(tmp_path / "b.csv")])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "DimensionError"
    code = main(["solve", "--matrix", "gen:bogus:1:2", "--obs", str(tmp_path / "b.csv")])
    assert code == 1


def test_bench_signal(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code = main(["bench-signal", "--n", "256", "--m", "64", "--k", "6", "--trials", "2",
                 "--out", str(out)])
    assert code == 0
    assert len(out.read_text().splitlines()) == 3
    assert json.loads(capsys.readouterr().out)["converged"] == 2


def test_bench_scale(tmp_path, capsys):
    code = main(["bench-scale", "--sizes", "256,512", "--trials", "1",
                 "--out", str(tmp_path / "s.csv")])
    assert code == 0
    assert "alpha = " in capsys.readouterr().out
    assert (tmp_path / "s.csv").exists()


def test_demo_oversparse(capsys):
    code = main(["demo-oversparse", "--n", "200", "--trials", "2"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].endswith("true_objective")
    summary = json.loads(lines[-1])
    assert summary["objective_below_truth"] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bbcs", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "bench-scale" in proc.stdout
