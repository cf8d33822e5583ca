"""Matrix-free sensing operators.

Two kinds are provided: a dense matrix and a row subset of the orthonormal
DCT-II. Both expose ``forward`` (``A @ x``) and ``adjoint`` (``A.T @ y``)
and are immutable once built, so one instance may be shared between
threads.

All randomness goes through :func:`make_rng`, a seeded PCG64 generator.
There is no module-level RNG state.
"""

from __future__ import annotations

import numpy as np
from scipy import fft

__all__ = [
    "DimensionError",
    "LinearOperator",
    "DenseOperator",
    "PartialDCT",
    "CountingOperator",
    "make_rng",
    "apply_forward",
    "apply_adjoint",
    "dct_matrix",
    "gen_gaussian_orthonormal_rows",
    "gen_partial_dct",
]

_ORTHO_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when vector lengths do not match an operator's shape."""


def make_rng(seed: int) -> np.random.Generator:
    """Return the repo-wide generator (PCG64) for a 64-bit unsigned seed."""
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def _check_length(vec, expected, what):
    vec = np.asarray(vec, dtype=float)
    if vec.ndim != 1 or vec.shape[0] != expected:
        raise DimensionError(
            f"{what}: expected a vector of length {expected}, got shape {vec.shape}"
        )
    return vec


class LinearOperator:
    """Base class for an ``m x n`` real operator with ``m <= n``.

    Subclasses implement ``_forward`` and ``_adjoint`` on validated float
    vectors. ``row_orthonormal`` is True when ``A @ A.T == I`` is known to
    hold, which lets callers replace a Gram solve by a plain adjoint.
    """

    kind = "abstract"

    def __init__(self, rows: int, cols: int, row_orthonormal: bool = False):
        rows, cols = int(rows), int(cols)
        if rows < 1 or cols < 1:
            raise ValueError(f"operator dimensions must be positive, got {rows}x{cols}")
        if rows > cols:
            raise ValueError(f"operator must have rows <= cols, got {rows}x{cols}")
        self._rows = rows
        self._cols = cols
        self._row_orthonormal = bool(row_orthonormal)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def row_orthonormal(self) -> bool:
        return self._row_orthonormal

    def forward(self, x) -> np.ndarray:
        """Return ``A @ x``."""
        return self._forward(_check_length(x, self._cols, "forward"))

    def adjoint(self, y) -> np.ndarray:
        """Return ``A.T @ y``."""
        return self._adjoint(_check_length(y, self._rows, "adjoint"))

    def to_dense(self) -> np.ndarray:
        """Explicit ``m x n`` matrix. Intended for small test instances."""
        raise NotImplementedError

    def _forward(self, x):
        raise NotImplementedError

    def _adjoint(self, y):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self._rows}x{self._cols})"


class DenseOperator(LinearOperator):
    """Operator backed by an explicit matrix.

    Parameters
    ----------
    matrix : array_like, shape (m, n)
        Copied and frozen; later changes to the caller's array have no effect.
    row_orthonormal : bool, optional
        Declare ``A @ A.T == I``. When omitted it is detected numerically.
    """

    kind = "dense"

    def __init__(self, matrix, row_orthonormal: bool | None = None):
        mat = np.array(matrix, dtype=float, copy=True)
        if mat.ndim != 2:
            raise DimensionError(f"matrix must be 2-D, got shape {mat.shape}")
        if row_orthonormal is None:
            gram = mat @ mat.T
            row_orthonormal = bool(
                np.max(np.abs(gram - np.eye(mat.shape[0]))) < _ORTHO_TOL
            )
        super().__init__(mat.shape[0], mat.shape[1], row_orthonormal)
        mat.setflags(write=False)
        self._matrix = mat

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def _forward(self, x):
        return self._matrix @ x

    def _adjoint(self, y):
        return self._matrix.T @ y

    def to_dense(self):
        return self._matrix.copy()


def dct_matrix(n: int, rows=None) -> np.ndarray:
    """Orthonormal DCT-II matrix built from the closed form, O(n^2).

    ``C[k, j] = s_k * cos(pi * (2j + 1) * k / (2n))`` with ``s_0 = sqrt(1/n)``
    and ``s_k = sqrt(2/n)`` otherwise. ``rows`` restricts to a subset of k.
    """
    k = np.arange(n) if rows is None else np.asarray(rows, dtype=np.int64)
    j = np.arange(n)
    scale = np.where(k == 0, np.sqrt(1.0 / n), np.sqrt(2.0 / n))
    return scale[:, None] * np.cos(np.pi * np.outer(k, 2 * j + 1) / (2 * n))


class PartialDCT(LinearOperator):
    """Selected rows of the ``n x n`` orthonormal DCT-II.

    Products run in O(n log n) through :mod:`scipy.fft`, which accepts any
    length ``n`` (powers of two are fastest). With ``fast=False`` the
    products use the explicit closed-form rows instead; that path is
    O(m n) and exists for cross-checking.

    Parameters
    ----------
    n : int
        Signal length.
    rows : sequence of int
        Distinct DCT frequency indices in ``[0, n)``; stored sorted.
    """

    kind = "partial-dct"

    def __init__(self, n: int, rows, fast: bool = True):
        idx = np.asarray(rows, dtype=np.int64).ravel()
        n = int(n)
        if idx.size == 0:
            raise ValueError("partial DCT needs at least one row")
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError(f"row indices must lie in [0, {n}), got range "
                             f"[{idx.min()}, {idx.max()}]")
        idx = np.sort(idx)
        if np.any(np.diff(idx) == 0):
            raise ValueError("row indices must be distinct")
        super().__init__(idx.size, n, row_orthonormal=True)
        idx.setflags(write=False)
        self._idx = idx
        self._fast = bool(fast)
        self._dense = None if fast else dct_matrix(n, idx)

    @property
    def row_indices(self) -> np.ndarray:
        return self._idx

    @property
    def fast(self) -> bool:
        return self._fast

    def with_fast(self, fast: bool) -> "PartialDCT":
        """Same operator, switched between the FFT and explicit paths."""
        return PartialDCT(self._cols, self._idx, fast=fast)

    def _forward(self, x):
        if not self._fast:
            return self._dense @ x
        return fft.dct(x, type=2, norm="ortho")[self._idx]

    def _adjoint(self, y):
        if not self._fast:
            return self._dense.T @ y
        full = np.zeros(self._cols)
        full[self._idx] = y
        return fft.idct(full, type=2, norm="ortho")

    def to_dense(self):
        return dct_matrix(self._cols, self._idx)


class CountingOperator(LinearOperator):
    """Wrap an operator and count forward/adjoint applications.

    Not thread-safe; meant for instrumentation in tests and benchmarks.
    """

    def __init__(self, inner: LinearOperator):
        super().__init__(inner.rows, inner.cols, inner.row_orthonormal)
        self.inner = inner
        self.kind = inner.kind
        self.n_forward = 0
        self.n_adjoint = 0

    def reset(self):
        self.n_forward = 0
        self.n_adjoint = 0

    def _forward(self, x):
        self.n_forward += 1
        return self.inner._forward(x)

    def _adjoint(self, y):
        self.n_adjoint += 1
        return self.inner._adjoint(y)

    def to_dense(self):
        return self.inner.to_dense()


def apply_forward(op: LinearOperator, x) -> np.ndarray:
    return op.forward(x)


def apply_adjoint(op: LinearOperator, y) -> np.ndarray:
    return op.adjoint(y)


def _check_mn(m, n):
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise ValueError(f"m and n must be positive, got m={m}, n={n}")
    if m > n:
        raise ValueError(f"need m <= n, got m={m}, n={n}")
    return m, n


def gen_gaussian_orthonormal_rows(m: int, n: int, rng: np.random.Generator) -> DenseOperator:
    """Gaussian ``m x n`` draw with rows orthonormalized by a thin QR of its transpose."""
    m, n = _check_mn(m, n)
    gauss = rng.standard_normal((m, n))
    q, _ = np.linalg.qr(gauss.T, mode="reduced")
    return DenseOperator(q.T, row_orthonormal=True)


def gen_partial_dct(m: int, n: int, rng: np.random.Generator, fast: bool = True) -> PartialDCT:
    """``m`` distinct DCT-II rows sampled uniformly without replacement.

    The DC row is eligible like any other.
    """
    m, n = _check_mn(m, n)
    rows = rng.choice(n, size=m, replace=False)
    return PartialDCT(n, rows, fast=fast)
