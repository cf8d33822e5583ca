"""Reference reconstructions: minimum-energy interpolant and FISTA."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .model import Problem, _scaled_residual_dual, soft_threshold
from .operators import LinearOperator, make_rng
from .solver import NumericalBreakdown, SolveReport, relative_gap

__all__ = ["FistaConfig", "min_energy", "estimate_lipschitz", "fista_solve"]


@dataclass(frozen=True)
class FistaConfig:
    """FISTA settings.

    When ``lipschitz`` is None it is 2 for row-orthonormal operators and a
    power-iteration estimate otherwise.
    """

    tol: float = 1e-6
    max_iter: int = 20000
    lipschitz: Optional[float] = None
    gap_floor: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if self.lipschitz is not None and not self.lipschitz > 0:
            raise ValueError(f"lipschitz must be positive, got {self.lipschitz}")


def min_energy(p: Problem) -> np.ndarray:
    """Least-norm interpolant ``A.T (A A.T)^{-1} b``.

    Reduces to ``A.T b`` when the operator is row-orthonormal. Other
    operators go through a Cholesky solve on the explicit Gram matrix.
    """
    if p.op.row_orthonormal:
        return p.op.adjoint(p.b)
    mat = p.op.to_dense()
    try:
        factor = linalg.cho_factor(mat @ mat.T)
    except linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("A A.T is singular; A is not of full row rank") from exc
    return mat.T @ linalg.cho_solve(factor, p.b)


def estimate_lipschitz(op: LinearOperator, rng=None, n_iter: int = 50,
                       safety: float = 1.01) -> float:
    """Power-iteration estimate of ``2 ||A||_2^2``, times ``safety``.

    That is the Lipschitz constant of the gradient of ``||A x - b||^2``.
    """
    rng = make_rng(0) if rng is None else rng
    x = rng.standard_normal(op.cols)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max(int(n_iter), 50)):
        y = op.adjoint(op.forward(x))
        est = float(np.linalg.norm(y))
        if est == 0.0:
            break
        x = y / est
    return 2.0 * est * safety


def fista_solve(
    p: Problem,
    cfg: Optional[FistaConfig] = None,
    x0=None,
    callback: Optional[Callable] = None,
) -> SolveReport:
    """Accelerated proximal gradient (FISTA) on the primal problem.

    Stops on the same relative duality gap as :func:`bbcs.solver.solve`.
    ``A`` and ``A.T`` are applied once per iteration, to the new iterate.
    The extrapolated point's residual is formed by linearity.
    """
    cfg = cfg or FistaConfig()
    op, b, lam = p.op, p.b, p.lam
    n = p.n
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"x0 must have length {n}, got shape {x.shape}")

    t_start = time.perf_counter()
    if cfg.lipschitz is not None:
        lip = cfg.lipschitz
    elif op.row_orthonormal:
        lip = 2.0  # ||A||_2 = 1 exactly
    else:
        lip = estimate_lipschitz(op, make_rng(cfg.seed))
    report = SolveReport(x=x.copy(), iterations=0, solver="fista")

    r = op.forward(x) - b
    atr = op.adjoint(r)

    def record(x, r, atr):
        obj = float(r @ r) + lam * float(np.abs(x).sum())
        nu = _scaled_residual_dual(lam, r, atr)
        g_val = float(-0.25 * (nu @ nu) - nu @ b)
        rel = relative_gap(obj - g_val, g_val, cfg.gap_floor)
        report.objective_history.append(obj)
        report.gap_history.append(rel)
        return obj, rel

    obj, rel = record(x, r, atr)
    if callback is not None:
        callback(0, obj, rel, 1.0 / lip, 0)
    converged = rel < cfg.tol

    # extrapolated point y and A.T (A y - b)
    y, atry = x, atr
    t = 1.0
    k = 0
    while not converged and k < cfg.max_iter:
        k += 1
        x_new = soft_threshold(y - (2.0 / lip) * atry, lam / lip)
        r_new = op.forward(x_new) - b
        atr_new = op.adjoint(r_new)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        mom = (t - 1.0) / t_new
        y = x_new + mom * (x_new - x)
        atry = atr_new + mom * (atr_new - atr)
        x, r, atr, t = x_new, r_new, atr_new, t_new

        obj, rel = record(x, r, atr)
        if not math.isfinite(obj):
            report.x = x
            report.iterations = k
            report.wall_time = time.perf_counter() - t_start
            report.message = "breakdown"
            raise NumericalBreakdown(f"non-finite objective at iteration {k}", report=report)
        if callback is not None:
            callback(k, obj, rel, 1.0 / lip, 0)
        converged = rel < cfg.tol

    report.x = x
    report.iterations = k
    report.converged = converged
    report.wall_time = time.perf_counter() - t_start
    report.message = "converged" if converged else "max_iter reached"
    return report
