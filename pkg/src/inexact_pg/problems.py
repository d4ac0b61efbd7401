"""Synthetic problem generators and high-precision reference optima.

Lasso instances are built from a prescribed singular spectrum so the
gradient Lipschitz constant and strong-convexity modulus are known
analytically.  The matrix-factorization instances use a seeded random
target matrix normalized to unit spectral norm.  ``solve_reference``
provides the near-exact (x*, f*) every bound check needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (CompositeProblem, ConvergenceError, ErrorSchedule,
                   EXACT_SCHEDULE, Exact, SmoothTerm, evaluate_objective)
from .prox import (RowColGroups, inject_prox_error, l1_term, rowcol_term)
from .solvers import step_inexact_pg


@dataclass(frozen=True)
class LassoInstance:
    """(1/2)||Ax - b||^2 + lam*||x||_1 with known curvature constants."""

    A: np.ndarray
    b: np.ndarray
    lam: float
    mu_known: float
    L_known: float

    @property
    def dimension(self) -> int:
        return self.A.shape[1]

    def problem(self, loose_prox_seed: Optional[int] = None) -> CompositeProblem:
        """Composite problem; pass a seed to inject controlled prox errors.

        With ``loose_prox_seed`` set, gap-based prox requests are served by
        deliberately perturbing the exact soft threshold to a certified
        suboptimality just under the target, so prox-error sequences can be
        prescribed even though the true operator is exact.
        """
        A, b = self.A, self.b
        G = A.T @ A
        c = A.T @ b

        def value(x):
            r = A @ x - b
            return 0.5 * float(r @ r)

        g = SmoothTerm(value=value, gradient=lambda x: G @ x - c,
                       lipschitz=self.L_known,
                       strong_convexity=self.mu_known)
        h = l1_term(self.lam)
        if loose_prox_seed is not None:
            h = inject_prox_error(h, seed=loose_prox_seed)
        return CompositeProblem(g=g, h=h, dimension=self.dimension)


@dataclass(frozen=True)
class CurInstance:
    """(1/2)||W - W X W||_F^2 plus row/column group-l2 penalties on X.

    For W of shape (p, q) the variable X has shape (q, p); it is handled
    flat row-major.  gen_cur picks W so that X is n_rows x n_cols.
    """

    W: np.ndarray
    lambda_row: float
    lambda_col: float

    @property
    def x_shape(self) -> tuple[int, int]:
        return (self.W.shape[1], self.W.shape[0])

    @property
    def dimension(self) -> int:
        return self.W.shape[0] * self.W.shape[1]

    @property
    def groups(self) -> RowColGroups:
        nr, nc = self.x_shape
        return RowColGroups(n_rows=nr, n_cols=nc, lambda_row=self.lambda_row,
                            lambda_col=self.lambda_col)

    @property
    def lipschitz(self) -> float:
        return float(np.linalg.norm(self.W, 2)) ** 4

    def problem(self) -> CompositeProblem:
        W = self.W
        nr, nc = self.x_shape

        def value(x_flat):
            R = W - W @ x_flat.reshape(nr, nc) @ W
            return 0.5 * float(np.einsum("ij,ij->", R, R))

        def gradient(x_flat):
            R = W - W @ x_flat.reshape(nr, nc) @ W
            return (-(W.T @ R @ W.T)).reshape(-1)

        g = SmoothTerm(value=value, gradient=gradient,
                       lipschitz=self.lipschitz, strong_convexity=0.0)
        return CompositeProblem(g=g, h=rowcol_term(self.groups),
                                dimension=self.dimension)


def gen_lasso(seed: int, n: int, d: int, condition_number: float,
              lam: float = 0.1) -> LassoInstance:
    """Seeded lasso with A^T A spectrum spanning exactly [1, condition_number].

    A = U diag(s) V^T with orthonormal factors drawn from the seed and
    singular values s_i = sqrt(linspace(1, condition_number)), so
    L = condition_number and (for d <= n) mu = 1 analytically.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if condition_number < 1:
        raise ValueError("condition_number must be >= 1")
    rng = np.random.default_rng(seed)
    r = min(n, d)
    U, _ = np.linalg.qr(rng.standard_normal((n, r)))
    V, _ = np.linalg.qr(rng.standard_normal((d, r)))
    s = np.sqrt(np.linspace(1.0, condition_number, r))
    A = (U * s) @ V.T
    b = rng.standard_normal(n)
    mu = 1.0 if d <= n else 0.0
    return LassoInstance(A=A, b=b, lam=lam, mu_known=mu,
                         L_known=float(condition_number))


def gen_cur(seed: int, n_r: int, n_c: int, lambda_row: float = 0.01,
            lambda_col: float = 0.01) -> CurInstance:
    """Seeded factorization target with unit spectral norm.

    The variable X is n_r x n_c; W is drawn (n_c x n_r) standard normal
    and rescaled so sigma_max(W) = 1, keeping the gradient Lipschitz
    constant sigma_max(W)^4 at 1.
    """
    if n_r < 1 or n_c < 1:
        raise ValueError("dimensions must be positive")
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((n_c, n_r))
    W /= np.linalg.norm(W, 2)
    return CurInstance(W=W, lambda_row=lambda_row, lambda_col=lambda_col)


def load_matrix_csv(path) -> np.ndarray:
    """Plain CSV of reals, rows = lines, comma-separated."""
    m = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return m


def cur_from_csv(path, lambda_row: float, lambda_col: float) -> CurInstance:
    """Factorization instance over a matrix read from CSV (used as-is)."""
    return CurInstance(W=load_matrix_csv(path), lambda_row=lambda_row,
                       lambda_col=lambda_col)


def solve_reference(problem: CompositeProblem, tol: float = 1e-12,
                    x0: Optional[np.ndarray] = None,
                    max_iter: int = 10 ** 6) -> tuple[np.ndarray, float]:
    """High-precision (x*, f*) via the error-free accelerated method.

    Runs with exact prox requests (closed forms, or duality gap at the
    1e-14 floor) until the composite gradient-mapping norm drops below
    tol and the objective stabilizes within tol^2 (scaled by the problem
    magnitude, with a floor at the float64 resolution of f).  The
    returned point is the last exact prox-gradient step, so it satisfies
    the subgradient optimality condition up to a small multiple of tol.
    Pick tol commensurate with the problem scale; with the default 1e-12
    the minimum value is exact to machine precision for desk-scale
    problems.  Uses the strongly convex momentum when the problem
    declares mu > 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = problem.dimension
    x = np.zeros(d) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    y = x.copy()
    L = problem.g.lipschitz
    mu = problem.g.strong_convexity
    if mu > 0:
        sg = np.sqrt(mu / L)
        beta_at = lambda k: (1.0 - sg) / (1.0 + sg)
    else:
        beta_at = lambda k: (k - 1.0) / (k + 2.0)

    f_prev = evaluate_objective(problem, x)
    tol_f = tol * tol * (1.0 + abs(f_prev))

    schedule: ErrorSchedule = EXACT_SCHEDULE
    for k in range(1, max_iter + 1):
        step = step_inexact_pg(problem, y, k, schedule, L)
        x_new = step.x
        f_new = evaluate_objective(problem, x_new)

        # composite gradient mapping at the new iterate
        gm = problem.h.prox(x_new - problem.g.gradient(x_new) / L, L, Exact())
        res = L * float(np.linalg.norm(x_new - gm.point))
        df = abs(f_new - f_prev)
        if res <= tol and df <= max(tol_f, 4e-16 * (1.0 + abs(f_new))):
            # the prox point is one further exact step: never worse, and it
            # carries the subgradient certificate of the prox subproblem
            return gm.point, evaluate_objective(problem, gm.point)

        y = x_new + beta_at(k) * (x_new - x)
        x, f_prev = x_new, f_new

    raise ConvergenceError(
        f"reference solve did not reach tol {tol} in {max_iter} iterations",
        last_gap=res)
