import struct

import numpy as np
import pytest

from bbcs import fileio
from bbcs.model import Problem
from bbcs.operators import DenseOperator, PartialDCT, gen_gaussian_orthonormal_rows, make_rng
from bbcs.solver import solve


def test_dense_operator_round_trip(tmp_path):
    op = gen_gaussian_orthonormal_rows(5, 12, make_rng(0))
    path = tmp_path / "a.csv"
    fileio.save_operator(path, op)
    back = fileio.load_operator(path)
    assert isinstance(back, DenseOperator)
    assert np.array_equal(back.matrix, op.matrix)


def test_single_row_dense_operator(tmp_path):
    path = tmp_path / "row.csv"
    fileio.save_operator(path, DenseOperator([[1.0, 2.0, 3.0]]))
    assert fileio.load_operator(path).shape == (1, 3)


def test_partial_dct_round_trip(tmp_path):
    op = PartialDCT(64, [3, 9, 40])
    path = tmp_path / "a.json"
    fileio.save_operator(path, op)
    back = fileio.load_operator(path)
    assert isinstance(back, PartialDCT)
    assert back.cols == 64 and list(back.row_indices) == [3, 9, 40]


def test_unknown_operator_kind(tmp_path):
    path = tmp_path / "a.json"
    path.write_text('{"kind": "wavelet", "n": 4}')
    with pytest.raises(ValueError):
        fileio.load_operator(path)


@pytest.mark.parametrize("name", ["v.csv", "v.bin"])
def test_vector_round_trip(tmp_path, name):
    vec = make_rng(1).standard_normal(17) * 1e-7
    fileio.save_vector(tmp_path / name, vec)
    assert np.array_equal(fileio.load_vector(tmp_path / name), vec)


def test_binary_layout(tmp_path):
    path = tmp_path / "v.bin"
    fileio.save_vector_bin(path, [1.5, -2.0])
    raw = path.read_bytes()
    assert struct.unpack("<Q", raw[:8]) == (2,)
    assert struct.unpack("<2d", raw[8:]) == (1.5, -2.0)


def test_binary_truncated(tmp_path):
    path = tmp_path / "v.bin"
    path.write_bytes(struct.pack("<Q", 3) + struct.pack("<d", 1.0))
    with pytest.raises(ValueError):
        fileio.load_vector_bin(path)


def test_problem_meta(tmp_path):
    path = tmp_path / "p.json"
    fileio.save_problem_meta(path, 4, 16, 0.25, "a.csv")
    assert fileio.load_problem_meta(path) == {"m": 4, "n": 16, "lambda": 0.25, "operator_ref": "a.csv"}
    path.write_text('{"m": 4}')
    with pytest.raises(ValueError):
        fileio.load_problem_meta(path)


def test_report_round_trip(tmp_path):
    rep = solve(Problem(DenseOperator(np.eye(3)), [2.0, -1.0, 0.1], 1.0))
    path = tmp_path / "r.json"
    fileio.save_report(path, rep)
    back = fileio.load_report(path)
    assert np.array_equal(back.x, rep.x)
    assert back.iterations == rep.iterations and back.converged == rep.converged
