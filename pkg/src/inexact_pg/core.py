"""Problem abstractions, the inexact-prox contract, error schedules and traces.

Everything here is plain numpy over dense float64 vectors.  A composite
problem is ``f = g + h`` with ``g`` smooth (known Lipschitz gradient,
optionally strongly convex) and ``h`` convex but possibly non-smooth and
extended-real-valued.  The proximity operator of ``h`` may be solved
inexactly; its result always carries a certified optimality gap so that
solver traces record the error actually achieved at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class DivergenceError(RuntimeError):
    """Raised when a solver run blows up instead of descending."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative routine hits its iteration cap.

    The ``last_gap`` attribute holds the most recent certified gap (or
    residual) when one is available.
    """

    def __init__(self, message, last_gap=None):
        super().__init__(message)
        self.last_gap = last_gap


# ---------------------------------------------------------------------------
# Stopping rules for inexact proximity operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapBelow:
    """Stop the inner solver once its certified duality gap is <= eps."""

    eps: float

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError(f"gap threshold must be positive, got {self.eps}")


@dataclass(frozen=True)
class Sweeps:
    """Run the inner solver for exactly n full sweeps."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"sweep count must be >= 1, got {self.n}")


@dataclass(frozen=True)
class Exact:
    """Request the exact minimizer (or gap at numerical floor, 1e-14)."""


ProxStop = GapBelow | Sweeps | Exact


@dataclass(frozen=True)
class ProxResult:
    """Approximate proximity-operator output with a certified gap.

    ``certified_gap`` upper-bounds the suboptimality of ``point`` on the
    proximal objective (L/2)||x - y||^2 + h(x); it is the error actually
    achieved by the inner solve.  ``inner_iterations`` counts inner-solver
    effort (1 for closed-form operators).
    """

    point: np.ndarray
    certified_gap: float
    inner_iterations: int

    def __post_init__(self):
        if self.certified_gap < 0:
            raise ValueError("certified_gap must be nonnegative")
        if self.inner_iterations < 0:
            raise ValueError("inner_iterations must be nonnegative")


# ---------------------------------------------------------------------------
# Problem terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothTerm:
    """Smooth convex term: value/gradient closures plus curvature constants.

    ``lipschitz`` is the Lipschitz constant L of the gradient;
    ``strong_convexity`` is the modulus mu (0 for merely convex terms).
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    strong_convexity: float = 0.0

    def __post_init__(self):
        if self.lipschitz <= 0:
            raise ValueError("lipschitz must be positive")
        if self.strong_convexity < 0:
            raise ValueError("strong_convexity must be nonnegative")
        if self.strong_convexity > self.lipschitz:
            raise ValueError("strong_convexity cannot exceed lipschitz")


@dataclass(frozen=True)
class NonsmoothTerm:
    """Convex (possibly extended-real) term with an inexact prox procedure.

    ``prox(y, L, stop)`` approximately minimizes (L/2)||x - y||^2 + h(x)
    and returns a :class:`ProxResult` whose certified gap satisfies the
    requested :class:`ProxStop` rule.  Closed-form operators ignore the
    stop rule and certify a zero gap.
    """

    value: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float, ProxStop], ProxResult]


@dataclass(frozen=True)
class CompositeProblem:
    """f = g + h over R^d."""

    g: SmoothTerm
    h: NonsmoothTerm
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")


# ---------------------------------------------------------------------------
# Error schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyDecay:
    """Magnitude c / k**alpha at outer iteration k (k starts at 1)."""

    c: float
    alpha: float

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def at(self, k: int) -> float:
        return self.c / float(k) ** self.alpha


@dataclass(frozen=True)
class Constant:
    """Fixed magnitude eps at every iteration."""

    eps: float

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    def at(self, k: int) -> float:
        return self.eps


@dataclass(frozen=True)
class GeometricDecay:
    """Magnitude c * q**k at outer iteration k, with 0 < q < 1."""

    c: float
    q: float

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")

    def at(self, k: int) -> float:
        return self.c * self.q ** k


@dataclass(frozen=True)
class FixedSweeps:
    """Run the inner solver for a fixed number of sweeps each step."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


ProxTolerance = PolyDecay | Constant | FixedSweeps | Exact
GradientError = PolyDecay | GeometricDecay


@dataclass(frozen=True)
class ErrorSchedule:
    """Per-iteration prescriptions for the prox tolerance and gradient error.

    ``direction`` picks the gradient-error direction rule: "fixed" draws a
    single unit vector from a seeded generator, "ascent" points along the
    current gradient (the worst case for the step).
    """

    prox_tolerance: ProxTolerance = Exact()
    gradient_error: Optional[GradientError] = None
    direction: str = "fixed"

    def __post_init__(self):
        if self.direction not in ("fixed", "ascent"):
            raise ValueError(f"unknown direction rule {self.direction!r}")

    def prox_stop_at(self, k: int) -> ProxStop:
        """Stop rule for the inner solver at outer iteration k >= 1."""
        tol = self.prox_tolerance
        if isinstance(tol, Exact):
            return Exact()
        if isinstance(tol, FixedSweeps):
            return Sweeps(tol.n)
        target = tol.at(k)
        if target <= 0:
            return Exact()
        return GapBelow(target)

    def gradient_error_magnitude(self, k: int) -> float:
        """Prescribed ||e_k|| at outer iteration k >= 1."""
        if self.gradient_error is None:
            return 0.0
        return self.gradient_error.at(k)


EXACT_SCHEDULE = ErrorSchedule()


# ---------------------------------------------------------------------------
# Iterate traces
# ---------------------------------------------------------------------------

@dataclass
class IterateTrace:
    """Per-iteration record of a solver run.

    Columns are parallel lists indexed by outer iteration k = 1, 2, ...:
    objective at the iterate and at the running average of iterates
    (x0 excluded), min objective so far, distance to a reference optimum
    (nan when unknown), the certified prox gap actually achieved, the
    injected gradient-error norm, inner-solver iterations, and the
    Lipschitz estimate used for the accepted step.
    """

    f_x: list[float] = field(default_factory=list)
    f_avg: list[float] = field(default_factory=list)
    f_min: list[float] = field(default_factory=list)
    dist_to_opt: list[float] = field(default_factory=list)
    eps_used: list[float] = field(default_factory=list)
    grad_err_norm: list[float] = field(default_factory=list)
    inner_iters: list[int] = field(default_factory=list)
    L_estimate: list[float] = field(default_factory=list)

    def append(self, f_x, f_avg, dist_to_opt, eps_used, grad_err_norm,
               inner_iters, L_estimate):
        self.f_x.append(float(f_x))
        self.f_avg.append(float(f_avg))
        prev = self.f_min[-1] if self.f_min else np.inf
        self.f_min.append(min(prev, float(f_x)))
        self.dist_to_opt.append(float(dist_to_opt))
        self.eps_used.append(float(eps_used))
        self.grad_err_norm.append(float(grad_err_norm))
        self.inner_iters.append(int(inner_iters))
        self.L_estimate.append(float(L_estimate))

    def __len__(self):
        return len(self.f_x)

    @property
    def k(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def cumulative_inner(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.inner_iters, dtype=np.int64))


# ---------------------------------------------------------------------------
# Objective evaluation
# ---------------------------------------------------------------------------

def evaluate_objective(problem: CompositeProblem, x: np.ndarray) -> float:
    """Composite objective g(x) + h(x); +inf where h is +inf."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (problem.dimension,):
        raise ValueError(
            f"point has shape {x.shape}, expected ({problem.dimension},)")
    hx = problem.h.value(x)
    if np.isposinf(hx):
        return np.inf
    return float(problem.g.value(x)) + float(hx)


def proximal_objective(h: NonsmoothTerm, y: np.ndarray, L: float,
                       x: np.ndarray) -> float:
    """Proximal objective (L/2)||x - y||^2 + h(x) at scale L > 0."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: x {x.shape} vs y {y.shape}")
    if L <= 0:
        raise ValueError(f"scale L must be positive, got {L}")
    hx = h.value(x)
    if np.isposinf(hx):
        return np.inf
    d = x - y
    return 0.5 * L * float(d @ d) + float(hx)
