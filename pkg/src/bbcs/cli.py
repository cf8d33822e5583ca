"""Command-line entry point: ``bbcs <subcommand> ...``.

Subcommands: ``solve``, ``bench-signal``, ``bench-scale``, ``demo-oversparse``.
On failure the process exits with status 1 and prints a JSON object
``{"error": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import fileio, harness
from .model import Problem
from .operators import make_rng

_GEN_KINDS = {
    "gaussian": "gaussian-orthonormal",
    "gaussian-orthonormal": "gaussian-orthonormal",
    "dct": "partial-dct",
    "partial-dct": "partial-dct",
}


def _matrix(spec: str):
    """A file path, or ``gen:<kind>:<m>:<n>[:<seed>]`` with kind gaussian|dct."""
    if spec.startswith("gen:"):
        parts = spec.split(":")[1:]
        if len(parts) not in (3, 4) or parts[0] not in _GEN_KINDS:
            raise ValueError(f"bad generator spec {spec!r}; expected gen:<gaussian|dct>:<m>:<n>[:<seed>]")
        m, n = int(parts[1]), int(parts[2])
        seed = int(parts[3]) if len(parts) == 4 else 0
        return harness.make_operator(_GEN_KINDS[parts[0]], m, n, make_rng(seed))
    return fileio.load_operator(spec)


def _lambda(text: str, op, b) -> float:
    if text.startswith("auto"):
        factor = float(text.split(":", 1)[1]) if ":" in text else 0.1
        return harness.lambda_rule(op, b, factor)
    return float(text)


def cmd_solve(args):
    op = _matrix(args.matrix)
    b = fileio.load_vector(args.obs)
    lam = _lambda(args.lam, op, b)
    p = Problem(op, b, lam)
    overrides = {"max_iter": args.max_iter} if args.max_iter else {}
    rep = harness.run_solver(args.solver, p, overrides, tol=args.tol)
    if args.out:
        fileio.save_report(args.out, rep)
    if args.x_out:
        fileio.save_vector(args.x_out, rep.x)
    print(json.dumps({"solver": rep.solver, "converged": rep.converged,
                      "iterations": rep.iterations, "lambda": lam,
                      "final_objective": rep.final_objective,
                      "final_gap": rep.final_gap, "wall_time_s": rep.wall_time}))


def _overrides(args):
    out = {}
    if getattr(args, "tol", None):
        out["tol"] = args.tol
    if getattr(args, "max_iter", None):
        out["max_iter"] = args.max_iter
    return out


def cmd_bench_signal(args):
    cfg = harness.ExperimentConfig(
        signal=harness.SignalSpec(n=args.n, k=args.k), m=args.m,
        matrix_kind=args.matrix_kind, noise_variance=args.sigma2,
        lambda_factor=args.lambda_factor, solver=args.solver,
        solver_overrides=_overrides(args), trials=args.trials,
        base_seed=args.seed, workers=args.workers,
    )
    results = harness.run_signal_experiment(cfg)
    _emit_trials(args.out, results)
    print(json.dumps(harness.summarize(results)))


def cmd_bench_scale(args):
    sizes = harness.parse_sizes(args.sizes)
    cfg = harness.ExperimentConfig(
        signal=harness.SignalSpec(n=sizes[0], k=sizes[0] // 64), m=sizes[0] // 8,
        matrix_kind="partial-dct", noise_variance=args.sigma2,
        lambda_factor=args.lambda_factor, solver=args.solver,
        solver_overrides=_overrides(args), trials=args.trials, base_seed=args.seed,
    )
    report = harness.run_scaling(cfg, sizes)
    if args.out:
        harness.write_scaling_csv(args.out, report)
    print(report.table())


def cmd_demo_oversparse(args):
    cfg = harness.oversparse_config(n=args.n, trials=args.trials, base_seed=args.seed,
                                    solver=args.solver, lambda_factor=args.lambda_factor,
                                    k=args.k, m=args.m)
    results = harness.run_oversparse_demo(cfg, check=False)
    _emit_trials(args.out, results, extra=("true_objective",))
    below = sum(r.final_objective < r.true_objective for r in results)
    print(json.dumps({"trials": len(results), "objective_below_truth": below,
                      "mean_mse": harness.summarize(results)["mean_mse"]}))


def _emit_trials(path, results, extra=()):
    if path:
        harness.write_trials_csv(path, results, extra_columns=extra)
    else:
        harness.write_trials_csv(sys.stdout, results, extra_columns=extra)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbcs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one problem from files or a generator spec")
    s.add_argument("--matrix", required=True,
                   help="operator file (.csv dense, .json partial DCT) or gen:<gaussian|dct>:<m>:<n>[:<seed>]")
    s.add_argument("--obs", required=True, help="observation vector (.csv or .bin)")
    s.add_argument("--lambda", dest="lam", default="auto:0.1",
                   help="regularization weight, or auto:<factor> for factor*||A.T b||_inf")
    s.add_argument("--solver", default="bbcs", choices=["bbcs", "bbcs-m", "fista"])
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--max-iter", type=int, default=None)
    s.add_argument("--out", help="report JSON path")
    s.add_argument("--x-out", help="solution vector path (.csv or .bin)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("bench-signal", help="sparse-spike reconstruction trials")
    s.add_argument("--n", type=int, default=4096)
    s.add_argument("--m", type=int, default=1024)
    s.add_argument("--k", type=int, default=160)
    s.add_argument("--sigma2", type=float, default=1e-4)
    s.add_argument("--lambda-factor", type=float, default=0.1)
    s.add_argument("--matrix-kind", default="gaussian-orthonormal", choices=list(harness.MATRIX_KINDS))
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--solver", default="bbcs", choices=["bbcs", "bbcs-m", "fista"])
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--max-iter", type=int, default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="CSV path (stdout if omitted)")
    s.set_defaults(func=cmd_bench_signal)

    s = sub.add_parser("bench-scale", help="partial-DCT timing study with exponent fit")
    s.add_argument("--sizes", default="2^10..2^16")
    s.add_argument("--trials", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sigma2", type=float, default=1e-4)
    s.add_argument("--lambda-factor", type=float, default=0.1)
    s.add_argument("--solver", default="bbcs", choices=["bbcs", "bbcs-m", "fista"])
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--max-iter", type=int, default=None)
    s.add_argument("--out", help="CSV path")
    s.set_defaults(func=cmd_bench_scale)

    s = sub.add_parser("demo-oversparse", help="true signal denser than the l1 fit keeps")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--m", type=int, default=None, help="default n/10")
    s.add_argument("--k", type=int, default=None, help="default n/4")
    s.add_argument("--lambda-factor", type=float, default=0.01)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--solver", default="bbcs", choices=["bbcs", "bbcs-m", "fista"])
    s.add_argument("--out", help="CSV path (stdout if omitted)")
    s.set_defaults(func=cmd_demo_oversparse)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # reported to the caller as JSON
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
