"""Barzilai-Borwein compressed sensing: l1-regularized least squares with
matrix-free sensing operators, a FISTA baseline and a benchmark harness."""

from .baselines import FistaConfig, estimate_lipschitz, fista_solve, min_energy
from .model import (DualPoint, InfeasibleDualError, Problem, SplitPoint,
                    dual_feasible_point, dual_objective, duality_gap, gradient,
                    is_dual_feasible, merge, mse, objective, objective_split,
                    orthogonal_oracle, soft_threshold, split)
from .operators import (CountingOperator, DenseOperator, DimensionError,
                        LinearOperator, PartialDCT, apply_adjoint, apply_forward,
                        dct_matrix, gen_gaussian_orthonormal_rows, gen_partial_dct,
                        make_rng)
from .solver import (BBConfig, LineSearchState, NumericalBreakdown, SearchStalled,
                     SolveReport, backtrack, linesearch_update, project_box,
                     solution_bound, solve, step_length_bb1, step_length_bb2)

__version__ = "0.1.0"
