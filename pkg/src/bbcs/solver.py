"""Projected alternating Barzilai-Borwein solver (BBCS).

Minimizes the split objective over the box ``0 <= u, v <= b.b / lam`` with
BB step lengths, an adaptive non-monotone line search and a relative
duality-gap stopping rule. Reported objective values are the primal
``||A x - b||^2 + lam ||x||_1`` at ``x = u - v``.

Each iteration applies ``A`` once, to the projected search direction, and
``A.T`` once, to the image of that direction. The residual ``A x - b`` and
``A.T (A x - b)`` are then updated by linearity. That keeps the per-step
cost at one forward and one adjoint product and gives the gradient
difference ``y_k`` without cancellation. Backtracking trials evaluate the
residual at the trial point directly (one extra forward each).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .model import Problem, SplitPoint, _scaled_residual_dual, split

__all__ = [
    "BBConfig",
    "LineSearchState",
    "SolveReport",
    "SearchStalled",
    "NumericalBreakdown",
    "step_length_bb1",
    "step_length_bb2",
    "project_box",
    "solution_bound",
    "linesearch_update",
    "backtrack",
    "relative_gap",
    "solve",
]


class SearchStalled(RuntimeError):
    """Backtracking could not beat the reference value.

    ``best_point`` holds the trial point with the lowest split objective.
    When raised from :func:`solve`, ``report`` holds the run so far.
    """

    def __init__(self, message, best_point=None, best_value=None, report=None):
        super().__init__(message)
        self.best_point = best_point
        self.best_value = best_value
        self.report = report


class NumericalBreakdown(FloatingPointError):
    """A non-finite objective or iterate appeared."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class BBConfig:
    """Solver settings.

    ``L`` is the line-search memory. ``bb2_period`` selects the second BB
    rule on every ``bb2_period``-th iteration (1-indexed). ``monotone``
    requires every accepted step to decrease the split objective.
    ``gap_floor`` guards the relative-gap denominator.
    """

    L: int = 4
    tol: float = 1e-6
    beta: float = 0.5
    bb2_period: int = 4
    max_iter: int = 10000
    max_backtracks: int = 50
    alpha_init: float = 1.0
    alpha_min: float = 1e-30
    alpha_max: float = 1e30
    monotone: bool = False
    gap_floor: float = 1e-12

    def __post_init__(self):
        if int(self.L) < 1:
            raise ValueError(f"L must be a positive integer, got {self.L}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.bb2_period) < 1 or int(self.max_iter) < 1 or int(self.max_backtracks) < 1:
            raise ValueError("bb2_period, max_iter and max_backtracks must be positive")
        if not 0 < self.alpha_min <= self.alpha_init <= self.alpha_max:
            raise ValueError(
                "need 0 < alpha_min <= alpha_init <= alpha_max, got "
                f"{self.alpha_min}, {self.alpha_init}, {self.alpha_max}"
            )

    @property
    def memory(self) -> int:
        return 1 if self.monotone else int(self.L)


@dataclass(frozen=True)
class LineSearchState:
    """Reference values of the adaptive non-monotone line search."""

    f_r: float
    f_c: float
    f_best: float
    l: int = 0

    @classmethod
    def initial(cls, f1: float) -> "LineSearchState":
        return cls(math.inf, f1, f1, 0)


def linesearch_update(st: LineSearchState, f_k: float, L: int) -> LineSearchState:
    """Advance the reference values after accepting a point with value ``f_k``.

    ``f_r`` drops to the worst value seen since the last improvement when
    ``f_best`` has not improved for ``L`` consecutive accepted points.
    """
    if f_k < st.f_best:
        return LineSearchState(st.f_r, f_k, f_k, 0)
    f_c = max(st.f_c, f_k)
    l = st.l + 1
    if l == L:
        return LineSearchState(f_c, f_k, st.f_best, 0)
    return LineSearchState(st.f_r, f_c, st.f_best, l)


def _bb_ratio(num, den, alpha_min, alpha_max):
    if not (num > 0 and den > 0):
        return alpha_max
    return min(max(num / den, alpha_min), alpha_max)


def step_length_bb1(s, y, alpha_min: float = 1e-30, alpha_max: float = 1e30) -> float:
    """``s.s / s.y`` clamped to ``[alpha_min, alpha_max]``; ``alpha_max`` if ``s.y <= 0``."""
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    sty = float(s @ y)
    if sty <= 0:
        return alpha_max
    return _bb_ratio(float(s @ s), sty, alpha_min, alpha_max)


def step_length_bb2(s, y, alpha_min: float = 1e-30, alpha_max: float = 1e30) -> float:
    """``s.y / y.y`` clamped; ``alpha_max`` if ``s.y <= 0`` or ``y = 0``."""
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    return _bb_ratio(float(s @ y), float(y @ y), alpha_min, alpha_max)


def project_box(w, lb: float, ub: float) -> np.ndarray:
    """Componentwise median of ``lb``, ``w`` and ``ub``."""
    if lb > ub:
        raise ValueError(f"empty box: lb={lb} > ub={ub}")
    return np.clip(np.asarray(w, dtype=float), lb, ub)


def solution_bound(p: Problem) -> float:
    """A priori bound ``b.b / lam`` on every ``|x*_i|``.

    Follows from ``lam ||x*||_1 <= f(x*) <= f(0) = b.b``.
    """
    return float(p.b @ p.b) / p.lam


def relative_gap(eta: float, dual_value: float, floor: float = 1e-12) -> float:
    """``eta / |G|``, or the absolute gap when ``|G|`` is below ``floor``."""
    g = abs(dual_value)
    return eta / g if g >= floor else eta


@dataclass
class SolveReport:
    """Outcome of a solver run.

    ``objective_history`` and ``gap_history`` start with the initial point
    (entry 0), so they hold ``iterations + 1`` values. ``alpha_history`` and
    ``step_rules`` hold the step length used at iterations 1, 2, ... and the
    rule that produced it (``"init"``, ``"bb1"`` or ``"bb2"``).
    """

    x: np.ndarray
    iterations: int
    objective_history: list = field(default_factory=list)
    gap_history: list = field(default_factory=list)
    backtrack_count: int = 0
    converged: bool = False
    wall_time: float = 0.0
    solver: str = "bbcs"
    message: str = ""
    alpha_history: list = field(default_factory=list)
    step_rules: list = field(default_factory=list)
    split_objective_history: list = field(default_factory=list)
    reference_history: list = field(default_factory=list)
    best_history: list = field(default_factory=list)
    iterates: Optional[list] = None

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else math.nan

    @property
    def final_gap(self) -> float:
        return self.gap_history[-1] if self.gap_history else math.nan

    def to_dict(self, include_x: bool = True) -> dict:
        d = asdict(replace(self, iterates=None))
        d.pop("iterates")
        d["x"] = np.asarray(self.x).tolist() if include_x else None
        d["final_objective"] = self.final_objective
        d["final_gap"] = self.final_gap
        return d

    def to_json(self, include_x: bool = True, **kwargs) -> str:
        return json.dumps(self.to_dict(include_x), default=_json_default, **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "SolveReport":
        d = dict(d)
        d.pop("final_objective", None)
        d.pop("final_gap", None)
        x = d.pop("x")
        return cls(x=np.asarray(x if x is not None else [], dtype=float), **d)

    @classmethod
    def from_json(cls, text: str) -> "SolveReport":
        return cls.from_dict(json.loads(text))


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def _split_value(r, lam, u, v):
    return float(r @ r) + lam * (float(u.sum()) + float(v.sum()))


def _backtrack(p, u, v, pu, pv, f_r, cfg, ub):
    """Halve along ``(pu, pv)`` from ``(u, v)`` until the split value beats ``f_r``.

    Returns ``(step, u_new, v_new, residual, value, count)``.
    """
    best = None
    step = 1.0
    for count in range(1, cfg.max_backtracks + 1):
        step *= cfg.beta
        ut = np.clip(u + step * pu, 0.0, ub)
        vt = np.clip(v + step * pv, 0.0, ub)
        rt = p.op.forward(ut - vt) - p.b
        ft = _split_value(rt, p.lam, ut, vt)
        if best is None or ft < best[1]:
            best = (SplitPoint(ut, vt), ft)
        if ft < f_r:
            return step, ut, vt, rt, ft, count
    raise SearchStalled(
        f"no trial point beat the reference value {f_r:.6g} after "
        f"{cfg.max_backtracks} halvings",
        best_point=best[0],
        best_value=best[1],
    )


def backtrack(z: SplitPoint, p_dir, f_r: float, cfg: BBConfig, p: Problem):
    """Backtracking safeguard along a feasible direction.

    Tries ``z + beta**j * p_dir`` for ``j = 1, 2, ...`` and returns the first
    point whose split objective is below ``f_r`` together with ``j``.

    Raises
    ------
    SearchStalled
        After ``cfg.max_backtracks`` unsuccessful halvings.
    """
    p_dir = np.asarray(p_dir, dtype=float)
    n = z.n
    if p_dir.shape != (2 * n,):
        raise ValueError(f"direction must have length {2 * n}, got {p_dir.shape}")
    ub = max(solution_bound(p), float(np.max(z.z, initial=0.0)),
             float(np.max(z.z + p_dir, initial=0.0)))
    _, ut, vt, _, _, count = _backtrack(p, z.u, z.v, p_dir[:n], p_dir[n:], f_r, cfg, ub)
    return SplitPoint(ut, vt), count


def solve(
    p: Problem,
    cfg: Optional[BBConfig] = None,
    x0=None,
    callback: Optional[Callable] = None,
    keep_iterates: bool = False,
) -> SolveReport:
    """Run BBCS on ``p`` from ``x0`` (zeros by default).

    Parameters
    ----------
    p : Problem
    cfg : BBConfig, optional
    x0 : array_like, optional
        Starting point; it is split canonically and clipped into the box.
    callback : callable, optional
        Called synchronously as ``callback(k, objective, rel_gap, alpha,
        backtracks)`` for ``k = 0`` (the start point) and after every
        iteration; ``alpha`` is the step length used at iteration ``k``.
    keep_iterates : bool
        Store a copy of every accepted ``(u, v)`` in ``report.iterates``.

    Returns
    -------
    SolveReport

    Raises
    ------
    SearchStalled, NumericalBreakdown
        With the partial run attached as ``exc.report``.
    """
    cfg = cfg or BBConfig()
    n = p.n
    lam, b, op = p.lam, p.b, p.op
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ValueError(f"x0 must have length {n}, got shape {x0.shape}")
    ub = solution_bound(p)
    L = cfg.memory
    bb2_period = int(cfg.bb2_period)

    t_start = time.perf_counter()
    z0 = split(x0)
    u = np.clip(z0.u, 0.0, ub)
    v = np.clip(z0.v, 0.0, ub)
    r = op.forward(u - v) - b
    atr = op.adjoint(r)
    f = _split_value(r, lam, u, v)

    report = SolveReport(x=u - v, iterations=0, solver="bbcs-m" if cfg.monotone else "bbcs")
    if keep_iterates:
        report.iterates = [(u.copy(), v.copy())]

    def record(x, r, atr):
        obj = float(r @ r) + lam * float(np.abs(x).sum())
        nu = _scaled_residual_dual(lam, r, atr)
        g_val = float(-0.25 * (nu @ nu) - nu @ b)
        rel = relative_gap(obj - g_val, g_val, cfg.gap_floor)
        report.objective_history.append(obj)
        report.gap_history.append(rel)
        return obj, rel

    def fail(exc, msg, done=0):
        report.x = u - v
        report.iterations = done
        report.wall_time = time.perf_counter() - t_start
        report.message = msg
        exc.report = report
        return exc

    if not math.isfinite(f):
        raise fail(NumericalBreakdown("non-finite objective at the start point"), "breakdown")

    state = LineSearchState.initial(f)
    obj, rel = record(u - v, r, atr)
    report.split_objective_history.append(f)
    report.reference_history.append(state.f_r)
    report.best_history.append(state.f_best)
    if callback is not None:
        callback(0, obj, rel, cfg.alpha_init, 0)

    alpha = cfg.alpha_init
    rule = "init"
    converged = rel < cfg.tol
    k = 0
    while not converged and k < cfg.max_iter:
        k += 1
        w = 2.0 * atr
        # projected steepest-descent trial and the feasible direction it defines
        u_proj = np.clip(u - alpha * (w + lam), 0.0, ub)
        v_proj = np.clip(v - alpha * (lam - w), 0.0, ub)
        pu = u_proj - u
        pv = v_proj - v
        d = pu - pv
        ad = op.forward(d)

        f_ref = f if cfg.monotone else state.f_r
        u_new = u_proj
        v_new = v_proj
        r_new = r + ad
        f_new = _split_value(r_new, lam, u_new, v_new)
        step = 1.0
        nback = 0
        if not f_new < f_ref:
            try:
                step, u_new, v_new, r_new, f_new, nback = _backtrack(
                    p, u, v, pu, pv, f_ref, cfg, ub
                )
            except SearchStalled as exc:
                report.backtrack_count += cfg.max_backtracks
                raise fail(exc, "search stalled", k - 1)
            report.backtrack_count += nback
        if not math.isfinite(f_new):
            raise fail(NumericalBreakdown(f"non-finite objective at iteration {k}"), "breakdown", k - 1)

        # gradient change y = (dw; -dw) with dw = 2 A.T A (step * d)
        atad = op.adjoint(ad)
        datr = step * atad
        dw = 2.0 * datr
        su = step * pu
        sv = step * pv
        sts = float(su @ su) + float(sv @ sv)
        sty = step * float(d @ dw)
        yty = 2.0 * float(dw @ dw)

        report.reference_history.append(f_ref)
        report.alpha_history.append(alpha)
        report.step_rules.append(rule)
        if cfg.monotone:
            # canonical split: x, residual and gradient unchanged, split value
            # drops to the primal value so primal decrease follows
            overlap = np.minimum(u_new, v_new)
            if overlap.any():
                u_new = u_new - overlap
                v_new = v_new - overlap
                f_new = _split_value(r_new, lam, u_new, v_new)
        state = linesearch_update(state, f_new, L)
        u, v, r, f = u_new, v_new, r_new, f_new
        atr = atr + datr

        x = u - v
        obj, rel = record(x, r, atr)
        report.split_objective_history.append(f)
        report.best_history.append(state.f_best)
        if keep_iterates:
            report.iterates.append((u.copy(), v.copy()))
        if callback is not None:
            callback(k, obj, rel, alpha, nback)
        converged = rel < cfg.tol

        if (k + 1) % bb2_period == 0:
            rule = "bb2"
            alpha = _bb_ratio(sty, yty, cfg.alpha_min, cfg.alpha_max)
        else:
            rule = "bb1"
            alpha = _bb_ratio(sts, sty, cfg.alpha_min, cfg.alpha_max)

    report.x = u - v
    report.iterations = k
    report.converged = converged
    report.wall_time = time.perf_counter() - t_start
    report.message = "converged" if converged else "max_iter reached"
    return report
