"""The l1-regularized least-squares problem and its split/dual forms.

The primal problem is ``min_x ||A x - b||^2 + lam * ||x||_1`` (squared
residual, no 1/2). Writing ``x = u - v`` with ``u, v >= 0`` gives a smooth
bound-constrained quadratic over ``z = (u; v)``. The dual is
``max_nu -nu.nu/4 - nu.b`` subject to ``||A.T nu||_inf <= lam``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import DimensionError, LinearOperator

__all__ = [
    "Problem",
    "SplitPoint",
    "DualPoint",
    "InfeasibleDualError",
    "objective",
    "objective_split",
    "gradient",
    "dual_objective",
    "dual_feasible_point",
    "is_dual_feasible",
    "duality_gap",
    "soft_threshold",
    "orthogonal_oracle",
    "split",
    "merge",
    "mse",
]

_FEAS_RTOL = 1e-12


class InfeasibleDualError(ValueError):
    """Raised when a duality gap is requested for an infeasible dual point."""


def _vec(a, n=None, what="vector"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise DimensionError(f"{what} must be 1-D, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise DimensionError(f"{what}: expected length {n}, got {a.shape[0]}")
    return a


@dataclass(frozen=True)
class Problem:
    """Operator ``A``, observations ``b`` and weight ``lam > 0``."""

    op: LinearOperator
    b: np.ndarray
    lam: float

    def __post_init__(self):
        b = _vec(self.b, self.op.rows, "b").copy()
        b.setflags(write=False)
        object.__setattr__(self, "b", b)
        lam = float(self.lam)
        if not lam > 0 or not np.isfinite(lam):
            raise ValueError(f"lam must be positive and finite, got {self.lam}")
        object.__setattr__(self, "lam", lam)

    @property
    def m(self) -> int:
        return self.op.rows

    @property
    def n(self) -> int:
        return self.op.cols


@dataclass(frozen=True)
class SplitPoint:
    """Nonnegative pair with ``x = u - v``."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = _vec(self.u, what="u")
        v = _vec(self.v, u.shape[0], "v")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def z(self) -> np.ndarray:
        """The stacked ``2n`` vector ``(u; v)``."""
        return np.concatenate([self.u, self.v])

    @classmethod
    def from_z(cls, z) -> "SplitPoint":
        z = _vec(z, what="z")
        if z.shape[0] % 2:
            raise DimensionError(f"z must have even length, got {z.shape[0]}")
        n = z.shape[0] // 2
        return cls(z[:n].copy(), z[n:].copy())

    def shifted(self, delta: float) -> "SplitPoint":
        return SplitPoint(self.u + delta, self.v + delta)


@dataclass(frozen=True)
class DualPoint:
    nu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nu", _vec(self.nu, what="nu"))


def objective(p: Problem, x) -> float:
    """``||A x - b||^2 + lam * ||x||_1``."""
    x = _vec(x, p.n, "x")
    r = p.op.forward(x) - p.b
    return float(r @ r + p.lam * np.abs(x).sum())


def objective_split(p: Problem, z: SplitPoint) -> float:
    """``||A(u - v) - b||^2 + lam * (sum(u) + sum(v))`` for ``u, v >= 0``."""
    if z.n != p.n:
        raise DimensionError(f"split point has n={z.n}, problem has n={p.n}")
    if np.any(z.u < 0) or np.any(z.v < 0):
        raise ValueError("split point has a negative component")
    r = p.op.forward(z.u - z.v) - p.b
    return float(r @ r + p.lam * (z.u.sum() + z.v.sum()))


def gradient(p: Problem, z: SplitPoint) -> np.ndarray:
    """Gradient of :func:`objective_split` with respect to ``(u; v)``.

    One forward and one adjoint application.
    """
    if z.n != p.n:
        raise DimensionError(f"split point has n={z.n}, problem has n={p.n}")
    w = 2.0 * p.op.adjoint(p.op.forward(z.u - z.v) - p.b)
    return np.concatenate([w + p.lam, -w + p.lam])


def dual_objective(nu: DualPoint, b) -> float:
    """``-nu.nu / 4 - nu.b``."""
    b = _vec(b, nu.nu.shape[0], "b")
    return float(-0.25 * (nu.nu @ nu.nu) - nu.nu @ b)


def _scaled_residual_dual(lam, residual, at_residual):
    # nu = s * 2r, shrunk so that ||A.T nu||_inf <= lam
    peak = 2.0 * np.max(np.abs(at_residual)) if at_residual.size else 0.0
    scale = 1.0 if peak == 0.0 else min(1.0, lam / peak)
    return scale * 2.0 * residual


def dual_feasible_point(p: Problem, x) -> DualPoint:
    """Dual point from the residual at ``x``, scaled into the feasible set.

    Returns ``nu = s * 2 (A x - b)`` with ``s = min(1, lam / ||2 A.T (A x - b)||_inf)``
    (``s = 1`` for a zero residual).
    """
    x = _vec(x, p.n, "x")
    r = p.op.forward(x) - p.b
    return DualPoint(_scaled_residual_dual(p.lam, r, p.op.adjoint(r)))


def is_dual_feasible(p: Problem, nu: DualPoint) -> bool:
    nu_vec = _vec(nu.nu, p.m, "nu")
    return bool(np.max(np.abs(p.op.adjoint(nu_vec))) <= p.lam * (1.0 + _FEAS_RTOL))


def duality_gap(p: Problem, x, nu: DualPoint) -> float:
    """Primal objective at ``x`` minus dual objective at ``nu``.

    Raises
    ------
    InfeasibleDualError
        If ``nu`` violates ``||A.T nu||_inf <= lam``.
    """
    if not is_dual_feasible(p, nu):
        raise InfeasibleDualError("dual point is infeasible; the gap is not a bound")
    return objective(p, x) - dual_objective(nu, p.b)


def soft_threshold(w, tau: float) -> np.ndarray:
    """Componentwise ``sign(w) * max(|w| - tau, 0)``."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)


def orthogonal_oracle(p: Problem) -> np.ndarray:
    """Exact minimizer for a square orthogonal ``A``.

    With ``A`` orthogonal, ``||A x - b||^2 = ||x - A.T b||^2`` and the
    problem separates into scalar problems ``(t - c)^2 + lam |t|`` whose
    minimizer is ``soft_threshold(c, lam / 2)``.
    """
    if p.m != p.n:
        raise ValueError(f"orthogonal oracle needs a square operator, got {p.m}x{p.n}")
    mat = p.op.to_dense()
    if np.max(np.abs(mat @ mat.T - np.eye(p.m))) >= 1e-10:
        raise ValueError("orthogonal oracle needs A @ A.T == I")
    return soft_threshold(p.op.adjoint(p.b), p.lam / 2.0)


def split(x) -> SplitPoint:
    """Canonical split ``u = max(x, 0)``, ``v = max(-x, 0)``."""
    x = _vec(x, what="x")
    return SplitPoint(np.maximum(x, 0.0), np.maximum(-x, 0.0))


def merge(z: SplitPoint) -> np.ndarray:
    return z.u - z.v


def mse(x_true, x) -> float:
    """``||x_true - x||^2 / n``."""
    x_true = _vec(x_true, what="x_true")
    x = _vec(x, x_true.shape[0], "x")
    d = x_true - x
    return float(d @ d) / x_true.shape[0]
