"""Experiment generation and reproduction.

Every trial owns one generator seeded with ``base_seed + trial``. Draws
come off it in a fixed order: spike positions, spike signs, the sensing
matrix, then the observation noise. Wall time covers the solver call only.
"""

from __future__ import annotations

import csv
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .baselines import FistaConfig, fista_solve, min_energy
from .model import Problem, mse, objective
from .operators import (LinearOperator, gen_gaussian_orthonormal_rows,
                        gen_partial_dct, make_rng)
from .solver import BBConfig, NumericalBreakdown, SearchStalled, solve

__all__ = [
    "SignalSpec",
    "ExperimentConfig",
    "TrialResult",
    "ScalingReport",
    "TRIAL_COLUMNS",
    "SOLVERS",
    "gen_sparse_signal",
    "observe",
    "lambda_rule",
    "make_operator",
    "run_solver",
    "run_trial",
    "run_signal_experiment",
    "oversparse_config",
    "run_oversparse_demo",
    "run_scaling",
    "fit_exponent",
    "format_exponent",
    "parse_sizes",
    "write_trials_csv",
    "write_scaling_csv",
    "summarize",
]

TRIAL_COLUMNS = (
    "trial", "n", "m", "k", "lambda", "iterations", "converged",
    "final_objective", "final_gap", "mse", "mse_min_energy", "wall_time_s",
)

SOLVERS = ("bbcs", "bbcs-monotone", "fista")
_SOLVER_ALIASES = {"bbcs-m": "bbcs-monotone"}
MATRIX_KINDS = ("gaussian-orthonormal", "partial-dct")


@dataclass(frozen=True)
class SignalSpec:
    n: int
    k: int
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError(f"need 0 <= k <= n, got k={self.k}, n={self.n}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")


@dataclass(frozen=True)
class ExperimentConfig:
    signal: SignalSpec
    m: int
    matrix_kind: str = "gaussian-orthonormal"
    noise_variance: float = 1e-4
    lambda_factor: float = 0.1
    solver: str = "bbcs"
    solver_overrides: dict = field(default_factory=dict)
    trials: int = 1
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        solver = _SOLVER_ALIASES.get(self.solver, self.solver)
        object.__setattr__(self, "solver", solver)
        if solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.matrix_kind not in MATRIX_KINDS:
            raise ValueError(f"unknown matrix kind {self.matrix_kind!r}")
        if not 1 <= self.m <= self.signal.n:
            raise ValueError(f"need 1 <= m <= n, got m={self.m}, n={self.signal.n}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be nonnegative")
        if not self.lambda_factor > 0:
            raise ValueError("lambda factor must be positive")

    @property
    def n(self) -> int:
        return self.signal.n


@dataclass
class TrialResult:
    trial: int
    seed: int
    n: int
    m: int
    k: int
    lam: float
    iterations: int
    converged: bool
    final_objective: float
    final_gap: float
    mse: float
    mse_min_energy: float
    wall_time: float
    true_objective: float = math.nan
    solver: str = "bbcs"
    error: str = ""

    def row(self) -> dict:
        return {
            "trial": self.trial, "n": self.n, "m": self.m, "k": self.k,
            "lambda": self.lam, "iterations": self.iterations,
            "converged": self.converged, "final_objective": self.final_objective,
            "final_gap": self.final_gap, "mse": self.mse,
            "mse_min_energy": self.mse_min_energy, "wall_time_s": self.wall_time,
        }


@dataclass
class ScalingReport:
    sizes: list
    mean_times: list
    alpha_exponent: float
    fit_residual: float
    trials: list = field(default_factory=list)

    def table(self) -> str:
        lines = [f"{'n':>10}  {'mean time (s)':>14}"]
        lines += [f"{n:>10d}  {t:>14.6f}" for n, t in zip(self.sizes, self.mean_times)]
        lines.append(f"alpha = {format_exponent(self.alpha_exponent)}  "
                     f"(rms log residual {self.fit_residual:.3g})")
        return "\n".join(lines)


def gen_sparse_signal(spec: SignalSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """``k`` spikes of height ``+-amplitude`` at distinct uniform positions.

    Positions are drawn before signs. ``rng`` defaults to a fresh stream
    seeded with ``spec.seed``.
    """
    rng = make_rng(spec.seed) if rng is None else rng
    x = np.zeros(spec.n)
    if spec.k == 0:
        return x
    pos = rng.choice(spec.n, size=spec.k, replace=False)
    signs = np.where(rng.integers(0, 2, size=spec.k) == 1, 1.0, -1.0)
    x[pos] = spec.amplitude * signs
    return x


def observe(op: LinearOperator, x, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """``A x + v`` with ``v ~ N(0, sigma2 I)``."""
    if sigma2 < 0:
        raise ValueError(f"noise variance must be nonnegative, got {sigma2}")
    clean = op.forward(x)
    if sigma2 == 0:
        return clean
    return clean + math.sqrt(sigma2) * rng.standard_normal(op.rows)


def lambda_rule(op: LinearOperator, b, factor: float) -> float:
    """``factor * ||A.T b||_inf``."""
    if not factor > 0:
        raise ValueError(f"factor must be positive, got {factor}")
    peak = float(np.max(np.abs(op.adjoint(b))))
    if peak == 0.0:
        raise ValueError("A.T b is zero, so the rule would give lambda = 0")
    return factor * peak


def make_operator(kind: str, m: int, n: int, rng: np.random.Generator) -> LinearOperator:
    if kind == "gaussian-orthonormal":
        return gen_gaussian_orthonormal_rows(m, n, rng)
    if kind == "partial-dct":
        return gen_partial_dct(m, n, rng)
    raise ValueError(f"unknown matrix kind {kind!r}")


def run_solver(name: str, p: Problem, overrides: Optional[dict] = None, x0=None, tol=None):
    """Dispatch to BBCS, monotone BBCS or FISTA by name."""
    name = _SOLVER_ALIASES.get(name, name)
    overrides = dict(overrides or {})
    if tol is not None:
        overrides.setdefault("tol", tol)
    if name == "fista":
        return fista_solve(p, FistaConfig(**overrides), x0)
    if name == "bbcs-monotone":
        overrides["monotone"] = True
    elif name != "bbcs":
        raise ValueError(f"unknown solver {name!r}")
    return solve(p, BBConfig(**overrides), x0)


def run_trial(cfg: ExperimentConfig, trial: int, solver: Optional[str] = None) -> TrialResult:
    seed = cfg.base_seed + trial
    rng = make_rng(seed)
    spec = replace(cfg.signal, seed=seed)
    x_true = gen_sparse_signal(spec, rng)
    op = make_operator(cfg.matrix_kind, cfg.m, cfg.n, rng)
    b = observe(op, x_true, cfg.noise_variance, rng)
    lam = lambda_rule(op, b, cfg.lambda_factor)
    p = Problem(op, b, lam)
    solver = solver or cfg.solver
    error = ""
    try:
        rep = run_solver(solver, p, cfg.solver_overrides)
    except (SearchStalled, NumericalBreakdown) as exc:
        rep = exc.report
        error = f"{type(exc).__name__}: {exc}"
    x_hat = rep.x
    return TrialResult(
        trial=trial, seed=seed, n=cfg.n, m=cfg.m, k=cfg.signal.k, lam=lam,
        iterations=rep.iterations, converged=bool(rep.converged) and not error,
        final_objective=rep.final_objective, final_gap=rep.final_gap,
        mse=mse(x_true, x_hat), mse_min_energy=mse(x_true, min_energy(p)),
        wall_time=rep.wall_time, true_objective=objective(p, x_true),
        solver=_SOLVER_ALIASES.get(solver, solver), error=error,
    )


def _run_trials(cfg, solver=None):
    if cfg.workers <= 1 or cfg.trials == 1:
        return [run_trial(cfg, t, solver) for t in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        # map preserves trial order regardless of completion order
        return list(pool.map(lambda t: run_trial(cfg, t, solver), range(cfg.trials)))


def run_signal_experiment(cfg: ExperimentConfig) -> list:
    """Sparse-spike reconstruction trials from ``x0 = 0``; one result per trial.

    Solver failures are recorded as ``converged=False`` with the message in
    ``error``; the remaining trials still run.
    """
    return _run_trials(cfg)


def oversparse_config(n: int = 1000, trials: int = 10, base_seed: int = 0,
                      solver: str = "bbcs", lambda_factor: float = 0.01,
                      k: Optional[int] = None, m: Optional[int] = None) -> ExperimentConfig:
    """Scaled-down over-sparse setup: ``k = n/4`` spikes, ``m = n/10`` rows."""
    k = n // 4 if k is None else k
    m = n // 10 if m is None else m
    return ExperimentConfig(
        signal=SignalSpec(n=n, k=k), m=m, matrix_kind="gaussian-orthonormal",
        noise_variance=1e-4, lambda_factor=lambda_factor, solver=solver,
        trials=trials, base_seed=base_seed,
    )


def run_oversparse_demo(cfg: ExperimentConfig, check: bool = True) -> list:
    """Trials where the true signal has more spikes than the l1 fit will keep.

    Each result carries ``true_objective``. The optimizer is expected to
    reach a strictly lower objective than the true signal. With ``check``,
    a converged trial that does not raises ``RuntimeError``.
    """
    results = _run_trials(cfg)
    if check:
        for res in results:
            if res.converged and not res.final_objective < res.true_objective:
                raise RuntimeError(
                    f"trial {res.trial}: solver objective {res.final_objective:.6g} "
                    f"is not below the true signal's {res.true_objective:.6g}"
                )
    return results


def fit_exponent(sizes: Sequence[int], times: Sequence[float]) -> tuple:
    """Least-squares slope of ``log(time)`` against ``log(n)``.

    Returns ``(alpha, rms_residual)`` with the residual measured in log space.
    """
    sizes = np.asarray(sizes, dtype=float)
    times = np.asarray(times, dtype=float)
    if sizes.shape != times.shape or sizes.ndim != 1:
        raise ValueError("sizes and times must be 1-D sequences of equal length")
    if np.any(times <= 0) or np.any(sizes <= 0):
        raise ValueError("sizes and times must all be positive")
    if np.unique(sizes).size < 2:
        raise ValueError("need at least two distinct sizes")
    ln, lt = np.log(sizes), np.log(times)
    slope, intercept = np.polyfit(ln, lt, 1)
    resid = lt - (slope * ln + intercept)
    return float(slope), float(np.sqrt(np.mean(resid ** 2)))


def format_exponent(alpha: float) -> str:
    return f"{alpha:.3f}"


def run_scaling(cfg: ExperimentConfig, sizes: Sequence[int]) -> ScalingReport:
    """Time the solver on partial-DCT problems of growing size.

    For each ``n``: ``m = n/8`` rows, ``n/64`` spikes; noise, lambda factor,
    solver and trial count come from ``cfg``. The signal size in ``cfg`` is
    ignored.
    """
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    trials, means = [], []
    for n in sizes:
        if n % 64:
            raise ValueError(f"size {n} is not divisible by 64")
        sub = replace(cfg, signal=SignalSpec(n=n, k=n // 64, amplitude=cfg.signal.amplitude),
                      m=n // 8, matrix_kind="partial-dct")
        res = _run_trials(sub)
        trials.extend(res)
        means.append(float(np.mean([r.wall_time for r in res])))
    alpha, resid = fit_exponent(sizes, means)
    return ScalingReport(sizes=sizes, mean_times=means, alpha_exponent=alpha,
                         fit_residual=resid, trials=trials)


def parse_sizes(text: str) -> list:
    """Parse ``"2^10..2^16"`` (every power of two in range) or ``"1024,2048"``."""
    text = text.strip()
    m = re.fullmatch(r"2\^(\d+)\s*\.\.\s*2\^(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise ValueError(f"empty size range {text!r}")
        return [2 ** e for e in range(lo, hi + 1)]
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok.startswith("2^"):
            out.append(2 ** int(tok[2:]))
        else:
            out.append(int(tok))
    return out


def _fmt(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trials_csv(path_or_file, results: Sequence[TrialResult], extra_columns=()):
    """Write one row per trial with the fixed column set plus ``extra_columns``.

    Floats are written with ``repr`` so reruns compare bit-for-bit.
    """
    columns = list(TRIAL_COLUMNS) + list(extra_columns)

    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for res in results:
            row = res.row()
            full = asdict(res)
            writer.writerow([_fmt(row[c] if c in row else full[c]) for c in columns])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def write_scaling_csv(path_or_file, report: ScalingReport):
    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "mean_time_s", "trials"])
        counts = {}
        for t in report.trials:
            counts[t.n] = counts.get(t.n, 0) + 1
        for n, t in zip(report.sizes, report.mean_times):
            writer.writerow([n, repr(t), counts.get(n, 0)])
        writer.writerow(["alpha", format_exponent(report.alpha_exponent), ""])
        writer.writerow(["fit_residual", repr(report.fit_residual), ""])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


def summarize(results: Sequence[TrialResult]) -> dict:
    """Trial averages: MSEs, wall time, iterations, convergence count."""
    return {
        "trials": len(results),
        "converged": sum(r.converged for r in results),
        "mean_mse": float(np.mean([r.mse for r in results])),
        "mean_mse_min_energy": float(np.mean([r.mse_min_energy for r in results])),
        "mean_wall_time_s": float(np.mean([r.wall_time for r in results])),
        "mean_iterations": float(np.mean([r.iterations for r in results])),
    }
