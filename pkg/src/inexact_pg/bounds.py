"""Theoretical convergence-bound calculators for the four solver variants.

Each calculator consumes the realized per-iteration error sequences (the
certified prox gaps eps_i and gradient-error norms ||e_i|| actually
achieved, as recorded in a trace) together with L, mu and the starting
distances, and returns the per-k guarantee:

  basic, convex       f(avg_k) - f*   <= (L/2k) (dist0 + 2A_k + sqrt(2B_k))^2
                      A_k = sum_i (||e_i||/L + sqrt(2 eps_i/L)),
                      B_k = sum_i eps_i/L
  accelerated, convex f(x_k) - f*     <= (2L/(k+1)^2) (dist0 + 2A_k + sqrt(2B_k))^2
                      with weights i and i^2 inside A_k and B_k
  basic, strong       ||x_k - x*||    <= (1-gamma)^k (dist0 + A_k)
                      A_k = sum_i (1-gamma)^{-i} (||e_i||/L + sqrt(2 eps_i/L))
  accel, strong       f(x_k) - f*     <= (1-sqrt(gamma))^k
                          (sqrt(2 f0_gap) + A_k sqrt(2/mu) + sqrt(B_k))^2
                      A_k = sum_i (||e_i|| + sqrt(2 L eps_i)) (1-sqrt(gamma))^{-i/2},
                      B_k = sum_i eps_i (1-sqrt(gamma))^{-i}

with gamma = mu/L.  Bound values for the strongly convex cases are
evaluated with the decay factor folded into each summand (exponents
(k-i) >= 0 only), which is exactly equal to the stated expressions but
never overflows and remains defined at gamma = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import IterateTrace


@dataclass(frozen=True)
class BoundInputs:
    """Realized error sequences plus the constants every bound needs."""

    L: float
    mu: float
    dist0: float
    f0_gap: float
    eps: np.ndarray
    e_norms: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eps", np.asarray(self.eps, dtype=np.float64))
        object.__setattr__(self, "e_norms",
                           np.asarray(self.e_norms, dtype=np.float64))
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.mu < 0 or self.mu > self.L:
            raise ValueError("mu must lie in [0, L]")
        if self.dist0 < 0 or self.f0_gap < 0:
            raise ValueError("dist0 and f0_gap must be nonnegative")
        if self.eps.size != self.e_norms.size:
            raise ValueError("eps and e_norms must have the same length")
        if self.eps.size == 0:
            raise ValueError("error sequences must be nonempty")
        if np.any(self.eps < 0) or np.any(self.e_norms < 0):
            raise ValueError("error magnitudes must be nonnegative")


@dataclass(frozen=True)
class BoundSeries:
    """Cumulative error series and per-k bound values for one variant.

    ``error_sum`` is the combined-error series (the A-type sum above) and
    ``eps_sum`` the prox-error series (B-type; absent for the basic
    strongly convex bound).  ``bound`` holds the guarantee at k = 1..K.
    For the strongly convex variants the raw series can overflow to inf
    for long horizons; ``bound`` is computed by the folded form and stays
    finite regardless.
    """

    kind: str
    error_sum: np.ndarray
    eps_sum: Optional[np.ndarray]
    bound: np.ndarray


def inputs_from_trace(trace: IterateTrace, L: float, mu: float, dist0: float,
                      f0_gap: float) -> BoundInputs:
    """Bound inputs from the errors a run actually achieved."""
    return BoundInputs(L=L, mu=mu, dist0=dist0, f0_gap=f0_gap,
                       eps=np.asarray(trace.eps_used),
                       e_norms=np.asarray(trace.grad_err_norm))


def bound_basic_convex(inputs: BoundInputs) -> BoundSeries:
    """Per-k bound on the objective gap of the averaged iterate."""
    L = inputs.L
    a = np.cumsum(inputs.e_norms / L + np.sqrt(2.0 * inputs.eps / L))
    b = np.cumsum(inputs.eps / L)
    k = np.arange(1, a.size + 1, dtype=np.float64)
    bound = (L / (2.0 * k)) * (inputs.dist0 + 2.0 * a + np.sqrt(2.0 * b)) ** 2
    return BoundSeries(kind="basic_convex", error_sum=a, eps_sum=b, bound=bound)


def bound_accel_convex(inputs: BoundInputs) -> BoundSeries:
    """Per-k bound on the objective gap of the last iterate."""
    L = inputs.L
    i = np.arange(1, inputs.eps.size + 1, dtype=np.float64)
    a = np.cumsum(i * (inputs.e_norms / L + np.sqrt(2.0 * inputs.eps / L)))
    b = np.cumsum(i * i * inputs.eps / L)
    bound = (2.0 * L / (i + 1.0) ** 2) * (
        inputs.dist0 + 2.0 * a + np.sqrt(2.0 * b)) ** 2
    return BoundSeries(kind="accel_convex", error_sum=a, eps_sum=b, bound=bound)


def bound_basic_strong(inputs: BoundInputs) -> BoundSeries:
    """Per-k bound on the iterate distance ||x_k - x*||, linear rate 1-gamma."""
    if inputs.mu <= 0:
        raise ValueError("basic strong bound needs mu > 0 "
                         "(use bound_basic_convex when mu = 0)")
    L = inputs.L
    rho = 1.0 - inputs.mu / L
    t = inputs.e_norms / L + np.sqrt(2.0 * inputs.eps / L)
    n = t.size
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        w = rho ** (-np.arange(1, n + 1, dtype=np.float64))
        a = np.cumsum(np.where(t == 0.0, 0.0, w * t))
    bound = np.empty(n)
    for k in range(1, n + 1):
        w = rho ** np.arange(k - 1, -1, -1, dtype=np.float64)   # rho^(k-i)
        bound[k - 1] = rho ** k * inputs.dist0 + float(w @ t[:k])
    return BoundSeries(kind="basic_strong", error_sum=a, eps_sum=None,
                       bound=bound)


def bound_accel_strong(inputs: BoundInputs) -> BoundSeries:
    """Per-k bound on the objective gap, linear rate 1-sqrt(gamma)."""
    if inputs.mu <= 0:
        raise ValueError("accelerated strong bound needs mu > 0 "
                         "(use bound_accel_convex when mu = 0)")
    L, mu = inputs.L, inputs.mu
    rho = 1.0 - np.sqrt(mu / L)
    amp = inputs.e_norms + np.sqrt(2.0 * L * inputs.eps)
    n = amp.size
    idx = np.arange(1, n + 1, dtype=np.float64)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        wa = rho ** (-idx / 2.0)
        wb = rho ** (-idx)
        a = np.cumsum(np.where(amp == 0.0, 0.0, amp * wa))
        b = np.cumsum(np.where(inputs.eps == 0.0, 0.0, inputs.eps * wb))
    srho = np.sqrt(rho)
    bound = np.empty(n)
    root0 = np.sqrt(2.0 * inputs.f0_gap)
    for k in range(1, n + 1):
        half = srho ** np.arange(k - 1, -1, -1, dtype=np.float64)  # rho^((k-i)/2)
        term_a = float(half @ amp[:k])
        term_b = float((half * half) @ inputs.eps[:k])
        bound[k - 1] = (srho ** k * root0
                        + np.sqrt(2.0 / mu) * term_a
                        + np.sqrt(term_b)) ** 2
    return BoundSeries(kind="accel_strong", error_sum=a, eps_sum=b, bound=bound)


def sequence_recursion_bound(S, lam, k: int) -> float:
    """Envelope for sequences satisfying u_k^2 <= S_k + sum_{i<=k} lam_i u_i.

    ``S`` holds S_0..S_K (nondecreasing, S_0 >= u_0^2), ``lam`` holds
    lam_1..lam_K (nonnegative).  Any nonnegative sequence satisfying the
    recursion obeys

        u_k <= (1/2) sum_{i<=k} lam_i
               + sqrt(S_k + ((1/2) sum_{i<=k} lam_i)^2).
    """
    S = np.asarray(S, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    if k < 1:
        raise ValueError("k must be >= 1")
    if S.size < k + 1 or lam.size < k:
        raise ValueError("need S_0..S_k and lam_1..lam_k")
    if np.any(np.diff(S[:k + 1]) < 0):
        raise ValueError("S must be nondecreasing")
    if np.any(lam[:k] < 0):
        raise ValueError("lam must be nonnegative")
    half = 0.5 * float(lam[:k].sum())
    return half + np.sqrt(float(S[k]) + half * half)


def fit_rate_slope(trace: IterateTrace, k_min: int, k_max: int, mode: str, *,
                   f_star: float, series: str = "last") -> float:
    """Least-squares decay slope of the suboptimality over a k-window.

    ``mode`` is "power_law" (slope of log(f - f*) against log k; -1 means
    a 1/k decay) or "geometric" (slope of log(f - f*) against k, i.e. the
    per-iteration log-contraction).  ``series`` selects which objective
    column to fit: "last" for f(x_k), "avg" for the averaged iterate,
    "min" for the best value so far.  Raises if the window contains a
    nonpositive suboptimality (already at the numerical optimum; shrink
    the window).
    """
    if not 1 <= k_min < k_max:
        raise ValueError("need k_max > k_min >= 1")
    if k_max > len(trace):
        raise ValueError(f"trace has only {len(trace)} iterations")
    cols = {"last": trace.f_x, "avg": trace.f_avg, "min": trace.f_min}
    try:
        values = np.asarray(cols[series], dtype=np.float64)
    except KeyError:
        raise ValueError(f"unknown series {series!r}") from None
    sub = values[k_min - 1:k_max] - f_star
    if np.any(sub <= 0):
        raise ValueError("nonpositive suboptimality in window; iterate is at "
                         "machine-precision optimum, shrink the window")
    k = np.arange(k_min, k_max + 1, dtype=np.float64)
    if mode == "power_law":
        return float(np.polyfit(np.log(k), np.log(sub), 1)[0])
    if mode == "geometric":
        return float(np.polyfit(k, np.log(sub), 1)[0])
    raise ValueError(f"unknown mode {mode!r}")
