"""The second Barzilai-Borwein step is always 1/4 when A A^T = I.

The split problem has gradient change y = (w; -w) with w = 2 A^T A (s_u - s_v),
and A^T A is a projection. So s^T y / y^T y collapses to 1/4 whatever the
iterates are. This script prints every BB2 step of a few runs.
"""

import numpy as np

from bbcs import harness
from bbcs.harness import SignalSpec
from bbcs.model import Problem
from bbcs.operators import (DenseOperator, gen_gaussian_orthonormal_rows, gen_partial_dct,
                            make_rng)
from bbcs.solver import BBConfig, solve

for seed, gen in enumerate([gen_gaussian_orthonormal_rows, gen_partial_dct] * 2):
    rng = make_rng(seed)
    x = harness.gen_sparse_signal(SignalSpec(n=128, k=4), rng)
    op = gen(32, 128, rng)
    b = harness.observe(op, x, 1e-4, rng)
    rep = solve(Problem(op, b, harness.lambda_rule(op, b, 0.1)))
    bb2 = np.array([a for a, r in zip(rep.alpha_history, rep.step_rules) if r == "bb2"])
    print(f"{type(op).__name__:>14}  {len(bb2):2d} BB2 steps, "
          f"max |alpha - 1/4| = {np.abs(bb2 - 0.25).max():.1e}")

# a general Gaussian matrix has no such property
rng = make_rng(7)
op = DenseOperator(rng.standard_normal((32, 128)))
b = rng.standard_normal(32)
rep = solve(Problem(op, b, harness.lambda_rule(op, b, 0.1)), BBConfig(max_iter=40))
bb2 = [a for a, r in zip(rep.alpha_history, rep.step_rules) if r == "bb2"]
print("unnormalized Gaussian A, BB2 steps:", ", ".join(f"{a:.4f}" for a in bb2))
