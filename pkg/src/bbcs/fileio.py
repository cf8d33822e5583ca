"""On-disk formats for operators, vectors, problems and reports.

* dense operator: CSV, one matrix row per line
* partial-DCT operator: JSON ``{"kind": "partial-dct", "n": ..., "rows": [...]}``
* vector: CSV (one value per line) or binary (little-endian uint64 length
  header followed by that many little-endian float64 values)
* problem metadata: JSON ``{"m", "n", "lambda", "operator_ref"}``
* solve report: JSON, see :meth:`bbcs.solver.SolveReport.to_dict`
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .operators import DenseOperator, LinearOperator, PartialDCT
from .solver import SolveReport

__all__ = [
    "save_operator",
    "load_operator",
    "save_vector",
    "load_vector",
    "save_vector_csv",
    "load_vector_csv",
    "save_vector_bin",
    "load_vector_bin",
    "save_problem_meta",
    "load_problem_meta",
    "save_report",
    "load_report",
]

_BIN_HEADER = struct.Struct("<Q")


def save_operator(path, op: LinearOperator):
    """Dense operators go to CSV, partial-DCT operators to JSON."""
    if isinstance(op, PartialDCT):
        with open(path, "w") as fh:
            json.dump({"kind": "partial-dct", "n": op.cols,
                       "rows": [int(i) for i in op.row_indices]}, fh)
    elif isinstance(op, DenseOperator):
        np.savetxt(path, op.matrix, delimiter=",", fmt="%.17g")
    else:
        raise TypeError(f"cannot serialize {type(op).__name__}")


def load_operator(path) -> LinearOperator:
    """Load by content: a JSON object is a partial DCT, anything else dense CSV."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        meta = json.loads(text)
        kind = meta.get("kind")
        if kind != "partial-dct":
            raise ValueError(f"unsupported operator kind {kind!r} in {path}")
        return PartialDCT(int(meta["n"]), meta["rows"])
    mat = np.loadtxt(path, delimiter=",", ndmin=2)
    return DenseOperator(mat)


def save_vector_csv(path, vec):
    np.savetxt(path, np.asarray(vec, dtype=float).ravel(), fmt="%.17g")


def load_vector_csv(path) -> np.ndarray:
    return np.loadtxt(path, dtype=float, ndmin=1)


def save_vector_bin(path, vec):
    vec = np.ascontiguousarray(vec, dtype="<f8").ravel()
    with open(path, "wb") as fh:
        fh.write(_BIN_HEADER.pack(vec.size))
        fh.write(vec.tobytes())


def load_vector_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_BIN_HEADER.size)
        if len(head) != _BIN_HEADER.size:
            raise ValueError(f"{path}: truncated header")
        (count,) = _BIN_HEADER.unpack(head)
        body = fh.read()
    if len(body) != 8 * count:
        raise ValueError(f"{path}: header says {count} values, found {len(body) / 8:g}")
    return np.frombuffer(body, dtype="<f8").astype(float)


def _is_bin(path):
    return os.fspath(path).lower().endswith((".bin", ".f64", ".raw"))


def save_vector(path, vec):
    """CSV unless the extension is ``.bin``, ``.f64`` or ``.raw``."""
    (save_vector_bin if _is_bin(path) else save_vector_csv)(path, vec)


def load_vector(path) -> np.ndarray:
    return (load_vector_bin if _is_bin(path) else load_vector_csv)(path)


def save_problem_meta(path, m: int, n: int, lam: float, operator_ref: str):
    with open(path, "w") as fh:
        json.dump({"m": int(m), "n": int(n), "lambda": float(lam),
                   "operator_ref": str(operator_ref)}, fh, indent=2)


def load_problem_meta(path) -> dict:
    with open(path) as fh:
        meta = json.load(fh)
    missing = {"m", "n", "lambda", "operator_ref"} - meta.keys()
    if missing:
        raise ValueError(f"{path}: missing keys {sorted(missing)}")
    return meta


def save_report(path, report: SolveReport, include_x: bool = True):
    with open(path, "w") as fh:
        fh.write(report.to_json(include_x=include_x, indent=2))


def load_report(path) -> SolveReport:
    with open(path) as fh:
        return SolveReport.from_json(fh.read())
