"""Inexact proximal-gradient methods with certified errors and their
theoretical convergence guarantees.

The library solves composite problems f = g + h where the gradient of g
and/or the proximity operator of h are computed approximately, records
the errors actually achieved at every iteration, and evaluates the
matching theoretical bound so each run can be checked against its
guarantee.
"""

from ._kernels import backend as kernel_backend
from .bounds import (BoundInputs, BoundSeries, bound_accel_convex,
                     bound_accel_strong, bound_basic_convex,
                     bound_basic_strong, fit_rate_slope, inputs_from_trace,
                     sequence_recursion_bound)
from .core import (CompositeProblem, Constant, ConvergenceError,
                   DivergenceError, ErrorSchedule, Exact, FixedSweeps,
                   GapBelow, GeometricDecay, IterateTrace, NonsmoothTerm,
                   PolyDecay, ProxResult, SmoothTerm, Sweeps,
                   evaluate_objective, proximal_objective)
from .problems import (CurInstance, LassoInstance, cur_from_csv, gen_cur,
                       gen_lasso, load_matrix_csv, solve_reference)
from .prox import (DykstraState, GroupStructure, RowColGroups, duality_gap,
                   group_l2_term, inject_prox_error, iter_dykstra_states,
                   l1_term, prox_group_l2, prox_l1, prox_overlap_bcd,
                   rowcol_term, zero_term)
from .solvers import (DoublingL, FixedL, RunResult, SolverConfig,
                      estimate_lipschitz_doubling, make_error_vector, run,
                      run_accel_pg_convex, run_accel_pg_strong, run_basic_pg,
                      step_inexact_pg)

__version__ = "0.1.0"
