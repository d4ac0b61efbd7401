"""Experiment runner: compare prox stopping strategies, verify bounds, fit rates.

Subcommands
-----------
run     one CSV trace per stopping strategy plus a ranking summary at an
        equal inner-iteration budget
bounds  run a solver, compute its theoretical guarantee from the realized
        errors, and fail (exit 1) if the measurement ever exceeds it
rates   fit decay slopes of the suboptimality for each strategy

Exit codes: 0 all checks passed, 1 bound/validation violation, 2 usage error.
Options may come from a config file of ``key = value`` lines (repeated
``strategy`` keys accumulate); command-line flags override the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bounds import (bound_accel_convex, bound_accel_strong,
                     bound_basic_convex, bound_basic_strong, fit_rate_slope,
                     inputs_from_trace)
from .core import (Constant, ErrorSchedule, Exact, FixedSweeps, GeometricDecay,
                   PolyDecay, evaluate_objective)
from .problems import cur_from_csv, gen_cur, gen_lasso, solve_reference
from .solvers import DoublingL, FixedL, SolverConfig, run

_SOLVER_NAMES = {
    "basic": "basic_convex",
    "accel": "accel_convex",
    "basic-strong": "basic_strong",
    "accel-strong": "accel_strong",
}


class UsageError(Exception):
    pass


def _parse_kv(body, caster, required=(), defaults=None):
    out = dict(defaults or {})
    if body:
        for item in body.split(","):
            if "=" not in item:
                raise UsageError(f"expected key=value, got {item!r}")
            key, val = item.split("=", 1)
            key = key.strip()
            if key not in caster:
                raise UsageError(f"unknown parameter {key!r}")
            out[key] = caster[key](val)
    for key in required:
        if key not in out:
            raise UsageError(f"missing required parameter {key!r}")
    return out


def parse_problem(spec: str, seed: int):
    """Problem spec -> (name, instance).  Forms:

    lasso:n=100,d=50,cond=10,lam=0.1
    cur:nr=30,nc=30,lrow=0.01,lcol=0.01
    csv:path=W.csv,lrow=0.01,lcol=0.01
    """
    kind, _, body = spec.partition(":")
    if kind == "lasso":
        p = _parse_kv(body, {"n": int, "d": int, "cond": float, "lam": float},
                      defaults={"n": 100, "d": 50, "cond": 10.0, "lam": 0.1})
        return "lasso", gen_lasso(seed, p["n"], p["d"], p["cond"], lam=p["lam"])
    if kind == "cur":
        p = _parse_kv(body, {"nr": int, "nc": int, "lrow": float, "lcol": float},
                      defaults={"nr": 30, "nc": 30, "lrow": 0.01, "lcol": 0.01})
        return "cur", gen_cur(seed, p["nr"], p["nc"], p["lrow"], p["lcol"])
    if kind == "csv":
        p = _parse_kv(body, {"path": str, "lrow": float, "lcol": float},
                      required=("path",), defaults={"lrow": 0.01, "lcol": 0.01})
        return "cur", cur_from_csv(p["path"], p["lrow"], p["lcol"])
    raise UsageError(f"unknown problem kind {kind!r}")


def parse_strategy(spec: str):
    """Stopping strategy -> prox tolerance.  Forms: poly:3 (eps_k = 1/k^3),
    poly:c=0.5,alpha=3, const:1e-6, sweeps:3, exact."""
    kind, _, body = spec.partition(":")
    if kind == "exact":
        return Exact()
    if kind == "const":
        try:
            return Constant(float(body))
        except ValueError as exc:
            raise UsageError(f"bad constant tolerance {body!r}") from exc
    if kind == "sweeps":
        try:
            return FixedSweeps(int(body))
        except ValueError as exc:
            raise UsageError(f"bad sweep count {body!r}") from exc
    if kind == "poly":
        if "=" in body:
            p = _parse_kv(body, {"c": float, "alpha": float},
                          required=("alpha",), defaults={"c": 1.0})
            return PolyDecay(p["c"], p["alpha"])
        try:
            return PolyDecay(1.0, float(body))
        except ValueError as exc:
            raise UsageError(f"bad poly exponent {body!r}") from exc
    raise UsageError(f"unknown strategy kind {kind!r}")


def parse_grad_error(spec: str):
    if spec == "none":
        return None
    kind, _, body = spec.partition(":")
    if kind == "poly":
        p = _parse_kv(body, {"c": float, "alpha": float}, required=("c", "alpha"))
        return PolyDecay(p["c"], p["alpha"])
    if kind == "geom":
        p = _parse_kv(body, {"c": float, "q": float}, required=("c", "q"))
        return GeometricDecay(p["c"], p["q"])
    raise UsageError(f"unknown gradient-error kind {kind!r}")


def parse_budget(spec: str):
    kind, _, body = spec.partition(":")
    try:
        n = int(body)
    except ValueError as exc:
        raise UsageError(f"bad budget {spec!r}") from exc
    if n < 1:
        raise UsageError("budget must be positive")
    if kind == "outer":
        return n, None
    if kind == "inner":
        return n, n
    raise UsageError(f"unknown budget kind {kind!r}")


def parse_lmode(spec: str):
    kind, _, body = spec.partition(":")
    try:
        val = float(body) if body else 1.0
    except ValueError as exc:
        raise UsageError(f"bad L value {body!r}") from exc
    if kind == "fixed":
        return FixedL(val)
    if kind == "doubling":
        return DoublingL(val)
    raise UsageError(f"unknown L mode {kind!r}")


def strategy_slug(spec: str) -> str:
    return spec.replace(":", "_").replace(",", "_").replace("=", "")


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _build(args, strategy, reference=None):
    """Assemble (problem, config, instance meta) for one strategy."""
    kind, instance = parse_problem(args.problem, args.seed)
    variant = _SOLVER_NAMES[args.solver]
    schedule = ErrorSchedule(prox_tolerance=strategy,
                             gradient_error=parse_grad_error(args.grad_error),
                             direction=args.grad_dir)
    if kind == "lasso":
        needs_loose = isinstance(strategy, (PolyDecay, Constant))
        problem = instance.problem(
            loose_prox_seed=args.seed if needs_loose else None)
        mu = instance.mu_known
        L = instance.L_known
    else:
        problem = instance.problem()
        mu = 0.0
        L = instance.lipschitz
    if variant.endswith("_strong") and mu <= 0:
        raise UsageError(f"problem has no known mu > 0; {args.solver} "
                         "needs strong convexity")
    max_outer, inner_budget = parse_budget(args.budget)
    config = SolverConfig(
        variant=variant, max_outer=max_outer, schedule=schedule,
        L_mode=parse_lmode(args.lmode), x0=np.zeros(problem.dimension),
        mu=mu if variant.endswith("_strong") else 0.0, seed=args.seed,
        x_star=None if reference is None else reference[0],
        inner_budget=inner_budget)
    return problem, config, L, mu


def trace_rows(trace):
    cum = trace.cumulative_inner
    for i in range(len(trace)):
        yield (i + 1, int(cum[i]), trace.f_x[i], trace.f_avg[i],
               trace.eps_used[i], trace.grad_err_norm[i], trace.L_estimate[i],
               trace.dist_to_opt[i])


_TRACE_HEADER = ("k", "cumulative_inner_iters", "f_xk", "f_avg", "eps_used",
                 "grad_err_norm", "L_estimate", "dist_to_opt")


def cmd_run(args) -> int:
    if not args.strategy:
        raise UsageError("at least one --strategy is required")
    out = Path(args.out)
    _, inner_budget = parse_budget(args.budget)
    summary = []
    for spec in args.strategy:
        strategy = parse_strategy(spec)
        problem, config, _, _ = _build(args, strategy)
        result = run(problem, config)
        trace = result.trace
        write_csv(out / f"run_{strategy_slug(spec)}.csv", _TRACE_HEADER,
                  trace_rows(trace))
        cum = trace.cumulative_inner
        budget = inner_budget if inner_budget is not None else int(cum[-1])
        within = np.nonzero(cum <= budget)[0]
        at = int(within[-1]) if within.size else 0
        summary.append((spec, at + 1, int(cum[at]), trace.f_x[at]))
    summary.sort(key=lambda r: r[3])
    write_csv(out / "summary.csv",
              ("strategy", "k_at_budget", "cumulative_inner_iters", "final_f"),
              summary)
    print(f"wrote {len(args.strategy)} trace file(s) and summary.csv to {out}")
    return 0


_MEASURES = {
    "basic_convex": ("objective gap of averaged iterate", bound_basic_convex),
    "accel_convex": ("objective gap of last iterate", bound_accel_convex),
    "basic_strong": ("distance to optimum", bound_basic_strong),
    "accel_strong": ("objective gap of last iterate", bound_accel_strong),
}


def cmd_bounds(args) -> int:
    if not args.strategy:
        raise UsageError("at least one --strategy is required")
    strategy = parse_strategy(args.strategy[0])
    kind, instance = parse_problem(args.problem, args.seed)
    x_star, f_star = solve_reference(instance.problem(), tol=args.ref_tol)

    problem, config, L, mu = _build(args, strategy, reference=(x_star, f_star))
    if args.corrupt_bound_l:
        L /= 2.0   # negative-control hook: pretend the constant is smaller
    config.L_mode = FixedL(L)   # guarantees are stated for the true constant
    result = run(problem, config)
    trace = result.trace

    x0 = config.x0
    dist0 = float(np.linalg.norm(x0 - x_star))
    f0_gap = max(evaluate_objective(problem, x0) - f_star, 0.0)
    inputs = inputs_from_trace(trace, L=L, mu=mu, dist0=dist0, f0_gap=f0_gap)
    label, calculator = _MEASURES[config.variant]
    series = calculator(inputs)

    if config.variant == "basic_convex":
        measured = np.asarray(trace.f_avg) - f_star
    elif config.variant == "basic_strong":
        measured = np.asarray(trace.dist_to_opt)
    else:
        measured = np.asarray(trace.f_x) - f_star
    margin = series.bound - measured

    write_csv(Path(args.out) / "bounds.csv",
              ("k", "measured_subopt", "bound_value", "margin"),
              zip(range(1, len(trace) + 1), measured, series.bound, margin))
    slack = 1e-9 * (1.0 + abs(f_star))
    worst = float(margin.min())
    ok = worst >= -slack
    print(f"checked {label} against its guarantee at {len(trace)} iterations: "
          f"worst margin {worst:.6g} ({'OK' if ok else 'VIOLATED'})")
    return 0 if ok else 1


def expected_regime(variant: str, tol) -> str:
    """Label the theoretical regime of a prox-tolerance schedule."""
    accel = variant.startswith("accel")
    if isinstance(tol, Exact):
        return "exact-rate"
    if isinstance(tol, (Constant, FixedSweeps)):
        return "fixed-accuracy-floor"
    # sqrt(eps_k) ~ k^(-alpha/2): the rate is preserved when the weighted
    # series of sqrt(eps) is summable, i.e. alpha > 2 (basic) / 4 (accel)
    threshold = 4.0 if accel else 2.0
    if tol.alpha > threshold:
        return "rate-preserved"
    if tol.alpha == threshold:
        return "polylog-degradation"
    if tol.alpha > threshold / 2.0:
        return "degraded-rate"
    return "no-guarantee"


def cmd_rates(args) -> int:
    if not args.strategy:
        raise UsageError("at least one --strategy is required")
    kind, instance = parse_problem(args.problem, args.seed)
    x_star, f_star = solve_reference(instance.problem(), tol=args.ref_tol)
    k_min, _, k_max = args.window.partition(":")
    k_min, k_max = int(k_min), int(k_max)

    rows = []
    for spec in args.strategy:
        strategy = parse_strategy(spec)
        problem, config, L, _ = _build(args, strategy,
                                       reference=(x_star, f_star))
        config.L_mode = FixedL(L)
        result = run(problem, config)
        slope = fit_rate_slope(result.trace, k_min, min(k_max, len(result.trace)),
                               "power_law", f_star=f_star, series=args.series)
        rows.append((spec, slope, expected_regime(config.variant, strategy)))
        print(f"{spec}: slope {slope:+.4f} ({rows[-1][2]})")
    write_csv(Path(args.out) / "rates.csv",
              ("strategy", "power_law_slope", "expected_regime"), rows)
    return 0


def load_config_file(path):
    """``key = value`` lines; '#' comments; repeated strategy keys accumulate."""
    values: dict = {"strategy": []}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key == "strategy":
            values["strategy"].append(val)
        else:
            values[key] = val
    return values


def make_parser():
    parser = argparse.ArgumentParser(
        prog="ipg",
        description="Inexact proximal-gradient experiments and bound checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("bounds", cmd_bounds),
                     ("rates", cmd_rates)):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--config", default=None,
                       help="config file of key = value lines")
        p.add_argument("--problem", default="lasso:")
        p.add_argument("--solver", choices=sorted(_SOLVER_NAMES), default="basic")
        p.add_argument("--strategy", action="append", default=None,
                       help="repeatable: poly:3 | const:1e-6 | sweeps:3 | exact")
        p.add_argument("--budget", default="outer:500",
                       help="outer:N or inner:N (cumulative prox iterations)")
        p.add_argument("--grad-error", default="none",
                       help="none | poly:c=..,alpha=.. | geom:c=..,q=..")
        p.add_argument("--grad-dir", choices=("fixed", "ascent"),
                       default="fixed")
        p.add_argument("--lmode", default="doubling:1",
                       help="fixed:L or doubling:L0")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="out")
        p.add_argument("--ref-tol", type=float, default=1e-12)
        if name == "bounds":
            p.add_argument("--corrupt-bound-l", action="store_true",
                           help=argparse.SUPPRESS)   # negative-control test hook
        if name == "rates":
            p.add_argument("--window", default="50:500")
            p.add_argument("--series", choices=("last", "avg", "min"),
                           default="last")
    return parser


def _inject_config(argv):
    """Expand --config into flags placed right after the subcommand.

    Injected flags come first, so flags typed on the command line override
    them (argparse keeps the last occurrence; --strategy from the file is
    dropped entirely when the command line carries its own).
    """
    if "--config" not in argv:
        return argv
    path = argv[argv.index("--config") + 1]
    values = load_config_file(path)
    strategies = values.pop("strategy")
    injected = []
    for key, val in values.items():
        injected += [f"--{key.replace('_', '-')}", val]
    if "--strategy" not in argv:
        for s in strategies:
            injected += ["--strategy", s]
    sub_at = next((i for i, tok in enumerate(argv)
                   if not tok.startswith("-")), 0)
    return argv[:sub_at + 1] + injected + argv[sub_at + 1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = make_parser()
    try:
        args = parser.parse_args(_inject_config(argv))
        if args.strategy is None:
            args.strategy = []
        return args.fn(args)
    except (UsageError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
