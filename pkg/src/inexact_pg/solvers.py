"""Inexact proximal-gradient solvers: basic and accelerated, convex and
strongly convex, with gradient-error injection, inner-prox stopping
strategies, and Lipschitz-constant doubling.

Every variant iterates

    x_k = prox_L[ y_{k-1} - (1/L) (g'(y_{k-1}) + e_k) ]

where e_k is a prescribed gradient error and the prox is solved to the
schedule's tolerance; they differ only in the extrapolation y_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .core import (CompositeProblem, DivergenceError, ErrorSchedule,
                   IterateTrace, evaluate_objective)

DIVERGENCE_LIMIT = 1e12   # abort when f(x_k) exceeds f(x0) by this much
L_OVERFLOW = 1e30

VARIANTS = ("basic_convex", "accel_convex", "basic_strong", "accel_strong")


@dataclass(frozen=True)
class FixedL:
    """Use a fixed Lipschitz constant for the whole run."""

    L: float

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")


@dataclass(frozen=True)
class DoublingL:
    """Start from L0 and double whenever the descent inequality fails."""

    L0: float = 1.0

    def __post_init__(self):
        if self.L0 <= 0:
            raise ValueError("L0 must be positive")


@dataclass
class SolverConfig:
    """Everything a run needs besides the problem itself.

    ``mu`` is the user-supplied strong-convexity modulus (never estimated);
    it is required positive for the *_strong variants.  ``x_star`` is an
    optional reference optimum used only to record iterate distances in the
    trace.  ``inner_budget`` stops the run once the cumulative inner-solver
    iterations reach the budget, which is the cost model used to compare
    stopping strategies.
    """

    variant: str
    max_outer: int
    schedule: ErrorSchedule
    L_mode: FixedL | DoublingL
    x0: np.ndarray
    mu: float = 0.0
    seed: int = 0
    x_star: Optional[np.ndarray] = None
    inner_budget: Optional[int] = None
    record_iterates: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.variant.endswith("_strong") and self.mu <= 0:
            raise ValueError(f"{self.variant} requires mu > 0")
        self.x0 = np.asarray(self.x0, dtype=np.float64)


@dataclass
class RunResult:
    trace: IterateTrace
    final_x: np.ndarray
    final_avg_x: np.ndarray
    L_history: list[float]
    iterates: list[np.ndarray] = field(default_factory=list)


class StepResult(NamedTuple):
    x: np.ndarray
    eps_achieved: float
    e_norm: float
    inner_iterations: int


def make_error_vector(schedule: ErrorSchedule, k: int, grad: np.ndarray,
                      seed: int) -> np.ndarray:
    """Gradient-error vector e_k with the scheduled norm.

    Direction follows the schedule's rule: "fixed" uses one unit vector
    drawn from a generator seeded with ``seed`` (the same direction at
    every k), "ascent" points along the current gradient and is the zero
    vector when the gradient vanishes.  Deterministic given
    (schedule, k, seed, grad).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    grad = np.asarray(grad, dtype=np.float64)
    magnitude = schedule.gradient_error_magnitude(k)
    if magnitude == 0.0:
        return np.zeros_like(grad)
    if schedule.direction == "ascent":
        gn = float(np.linalg.norm(grad))
        if gn == 0.0:
            return np.zeros_like(grad)
        return (magnitude / gn) * grad
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(grad.size)
    u /= np.linalg.norm(u)
    return magnitude * u


def step_inexact_pg(problem: CompositeProblem, y_prev: np.ndarray, k: int,
                    schedule: ErrorSchedule, L: float,
                    seed: int = 0) -> StepResult:
    """One inexact proximal-gradient step from the extrapolated point.

    Forms y_prev - (1/L)(g'(y_prev) + e_k) with e_k drawn from the
    schedule, then calls the prox with the schedule's stop rule for
    iteration k.  Returns the prox point, the certified gap it achieved,
    the injected error norm, and the inner-solver effort.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    grad = problem.g.gradient(y_prev)
    e = make_error_vector(schedule, k, grad, seed)
    step_point = y_prev - (grad + e) / L
    pr = problem.h.prox(step_point, L, schedule.prox_stop_at(k))
    return StepResult(x=pr.point, eps_achieved=pr.certified_gap,
                      e_norm=float(np.linalg.norm(e)),
                      inner_iterations=pr.inner_iterations)


def estimate_lipschitz_doubling(problem: CompositeProblem, x_k: np.ndarray,
                                y_prev: np.ndarray, L: float) -> float:
    """Return 2L if the quadratic descent inequality fails at x_k, else L.

    The inequality checked is
    g(x_k) <= g(y_prev) + <g'(y_prev), x_k - y_prev> + (L/2)||x_k - y_prev||^2,
    with a tiny relative slack so that curvature exactly equal to L does
    not trigger a spurious doubling through rounding.  The caller is
    expected to recompute the step at the doubled L before accepting it.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    gx = float(problem.g.value(x_k))
    d = x_k - y_prev
    model = (float(problem.g.value(y_prev))
             + float(problem.g.gradient(y_prev) @ d)
             + 0.5 * L * float(d @ d))
    if gx > model + 1e-12 * (1.0 + abs(gx)):
        if 2.0 * L > L_OVERFLOW:
            raise RuntimeError(f"Lipschitz estimate overflow beyond {L_OVERFLOW}")
        return 2.0 * L
    return L


def _momentum(variant: str, k: int, mu: float, L: float) -> float:
    if variant in ("basic_convex", "basic_strong"):
        return 0.0
    if variant == "accel_convex":
        return (k - 1.0) / (k + 2.0)
    # accel_strong: constant coefficient from the curvature ratio mu/L
    gamma = mu / L
    if gamma > 1.0:
        raise ValueError("mu exceeds the Lipschitz estimate")
    sg = np.sqrt(gamma)
    return (1.0 - sg) / (1.0 + sg)


def _run(problem: CompositeProblem, config: SolverConfig) -> RunResult:
    x_cur = config.x0.astype(np.float64, copy=True)
    y = x_cur.copy()
    if isinstance(config.L_mode, FixedL):
        L, doubling = config.L_mode.L, False
    else:
        L, doubling = config.L_mode.L0, True
    if config.variant.endswith("_strong") and config.mu > L and not doubling:
        raise ValueError("mu exceeds the fixed Lipschitz constant")

    f0 = evaluate_objective(problem, x_cur)
    sum_x = np.zeros_like(x_cur)
    trace = IterateTrace()
    iterates: list[np.ndarray] = []
    cum_inner = 0

    for k in range(1, config.max_outer + 1):
        while True:
            step = step_inexact_pg(problem, y, k, config.schedule, L,
                                   seed=config.seed)
            if not doubling:
                break
            L_new = estimate_lipschitz_doubling(problem, step.x, y, L)
            if L_new == L:
                break
            L = L_new

        x_new = step.x
        f_x = evaluate_objective(problem, x_new)
        if f_x > f0 + DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"objective blew up at iteration {k}: f={f_x:.6g} vs f0={f0:.6g}")

        sum_x += x_new
        f_avg = evaluate_objective(problem, sum_x / k)
        dist = (float(np.linalg.norm(x_new - config.x_star))
                if config.x_star is not None else np.nan)
        trace.append(f_x=f_x, f_avg=f_avg, dist_to_opt=dist,
                     eps_used=step.eps_achieved, grad_err_norm=step.e_norm,
                     inner_iters=step.inner_iterations, L_estimate=L)
        if config.record_iterates:
            iterates.append(x_new.copy())

        beta = _momentum(config.variant, k, config.mu, L)
        y = x_new + beta * (x_new - x_cur)
        x_cur = x_new

        cum_inner += step.inner_iterations
        if config.inner_budget is not None and cum_inner >= config.inner_budget:
            break

    return RunResult(trace=trace, final_x=x_cur,
                     final_avg_x=sum_x / len(trace),
                     L_history=list(trace.L_estimate), iterates=iterates)


def run_basic_pg(problem: CompositeProblem, config: SolverConfig) -> RunResult:
    """Basic method: no extrapolation, y_k = x_k."""
    if config.variant not in ("basic_convex", "basic_strong"):
        raise ValueError("run_basic_pg requires a basic_* variant")
    return _run(problem, config)


def run_accel_pg_convex(problem: CompositeProblem,
                        config: SolverConfig) -> RunResult:
    """Accelerated method with y_k = x_k + (k-1)/(k+2) (x_k - x_{k-1})."""
    if config.variant != "accel_convex":
        raise ValueError("run_accel_pg_convex requires variant accel_convex")
    return _run(problem, config)


def run_accel_pg_strong(problem: CompositeProblem,
                        config: SolverConfig) -> RunResult:
    """Accelerated strongly convex method with constant momentum.

    y_k = x_k + beta (x_k - x_{k-1}) with
    beta = (1 - sqrt(gamma)) / (1 + sqrt(gamma)) and gamma = mu/L.
    """
    if config.variant != "accel_strong":
        raise ValueError("run_accel_pg_strong requires variant accel_strong")
    return _run(problem, config)


def run(problem: CompositeProblem, config: SolverConfig) -> RunResult:
    """Dispatch on config.variant."""
    if config.variant.startswith("basic"):
        return run_basic_pg(problem, config)
    if config.variant == "accel_convex":
        return run_accel_pg_convex(problem, config)
    return run_accel_pg_strong(problem, config)
