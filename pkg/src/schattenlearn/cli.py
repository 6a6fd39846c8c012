"""Command-line front end.

Subcommands: gen, fit, project, risk-curve, rademacher, plot-bounds. Every
subcommand accepts ``--seed``, ``--threads`` and ``--out``; outputs are
written inside ``--out``. Exit status is 0 on success, 2 for invalid
input or configuration and 3 when ``fit`` does not converge.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import formats
from .complexity import RademacherConfig, mc_growth
from .datagen import ScenarioSpec, make_ground_truth, sample_pairs
from .erm import TrainingSet, fit
from .errors import ConfigError, ConvergenceError, SchattenError
from .experiments import (
    RiskCurveConfig,
    RiskCurveRow,
    bound_table,
    risk_curve,
    slope_fit,
    write_bounds_svg,
)
from .operators import SchattenBall, schatten_norm
from .projection import LpBall, project_lp, project_schatten

log = logging.getLogger("schattenlearn")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 2, 3

SCENARIO_KEYS = {
    "d_x": int, "d_y": int, "alpha": float, "scale": float, "sample_dist": str,
    "C_x": float, "noise_sigma": float, "C_y": float, "seed": int,
}
BALL_KEYS = {"p": float, "B": float}
RISK_KEYS = {"N_grid": formats.parse_int_list, "seeds": formats.parse_int_list,
             "test_size": int, "delta": float, "oracle_budget": int,
             "max_iter": int, "method": str}
RADEMACHER_KEYS = {"N_grid": formats.parse_int_list, "trials": int,
                   "q": formats.parse_float_list, "design": str}


def _load_settings(args, allowed: dict) -> dict:
    raw = formats.read_config(args.config) if args.config else {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for k, v in raw.items():
        try:
            out[k] = allowed[k](v)
        except ValueError:
            raise ConfigError(f"bad value for {k}: {v!r}") from None
    return out


def _scenario(settings: dict, seed) -> ScenarioSpec:
    kw = {k: settings[k] for k in SCENARIO_KEYS if k in settings}
    if seed is not None:
        kw["seed"] = seed
    return ScenarioSpec(**kw)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(args) -> int:
    settings = _load_settings(args, SCENARIO_KEYS)
    spec = _scenario(settings, args.seed)
    truth = make_ground_truth(spec)
    xs, ys = sample_pairs(truth, spec, args.count)
    out = _out_dir(args)
    formats.write_dataset(xs, ys, out / args.name)
    formats.write_operator(truth, out / "truth.svnop")
    log.info("wrote %d samples to %s", args.count, out / args.name)
    return EXIT_OK


def cmd_fit(args) -> int:
    xs, ys = formats.read_dataset(args.data)
    ball = SchattenBall(args.p, args.B)
    op, report = fit(TrainingSet(xs, ys), ball, max_iter=args.max_iter, method=args.method)
    out = _out_dir(args)
    formats.write_operator(op, out / "operator.svnop")
    formats.write_csv(
        out / "fit_report.csv",
        ["iterations", "final_risk", "converged", "active_constraint", "schatten_norm"],
        [[report.iterations, report.final_risk, report.converged,
          report.active_constraint, schatten_norm(op, ball.p)]],
    )
    if not report.converged:
        log.error("solver stopped at the iteration cap without converging")
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_project(args) -> int:
    out = _out_dir(args)
    if args.vector is not None:
        v = formats.parse_float_list(args.vector)
        u = project_lp(v, LpBall(args.p, args.radius))
        line = ",".join(formats.fmt(x) for x in u)
        (out / "projected.csv").write_text(line + "\n", encoding="utf-8")
        print(line)
    else:
        T = formats.read_operator(args.operator)
        P = project_schatten(T, SchattenBall(args.p, args.radius))
        formats.write_operator(P, out / "projected.svnop")
        print(formats.fmt(schatten_norm(P, args.p)))
    return EXIT_OK


def risk_config_from_args(args) -> RiskCurveConfig:
    allowed = {**SCENARIO_KEYS, **BALL_KEYS, **RISK_KEYS}
    s = _load_settings(args, allowed)
    missing = [k for k in ("p", "B", "N_grid", "seeds", "test_size") if k not in s]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    solver = {k: s[k] for k in ("max_iter", "method") if k in s}
    return RiskCurveConfig(
        scenario=_scenario(s, args.seed),
        ball=SchattenBall(s["p"], s["B"]),
        N_grid=tuple(s["N_grid"]),
        seeds=tuple(s["seeds"]),
        test_size=s["test_size"],
        delta=s.get("delta", 0.05),
        oracle_budget=s.get("oracle_budget"),
        solver=solver,
    )


def cmd_risk_curve(args) -> int:
    config = risk_config_from_args(args)
    rows = risk_curve(config, threads=args.threads)
    out = _out_dir(args)
    formats.write_csv(out / "risk_curve.csv", RiskCurveRow.FIELDS,
                      [dataclasses.astuple(r) for r in rows])
    flagged = sum(not r.converged for r in rows)
    if flagged:
        log.warning("%d cells stopped at the iteration cap", flagged)
    try:
        fits = slope_fit(rows)
    except SchattenError as exc:
        log.warning("no slope fit: %s", exc)
        fits = {}
    formats.write_csv(out / "risk_curve_slope.csv", ["p", "slope", "r2", "dropped_N"],
                      [[f.p, f.slope, f.r2, " ".join(map(str, f.dropped))] for f in fits.values()])
    for f in fits.values():
        print(f"p={formats.fmt(f.p)} slope={f.slope:.4f} r2={f.r2:.4f}")
    return EXIT_OK


def cmd_rademacher(args) -> int:
    allowed = {**SCENARIO_KEYS, **RADEMACHER_KEYS}
    s = _load_settings(args, allowed)
    for key in ("N_grid", "trials", "q", "design"):
        if getattr(args, key) is not None:
            s[key] = getattr(args, key)
    missing = [k for k in ("N_grid", "q") if k not in s]
    if missing:
        raise ConfigError(f"missing settings: {', '.join(missing)}")
    scenario = _scenario(s, args.seed)
    seed = args.seed if args.seed is not None else scenario.seed
    rows, comments, violations = [], [], 0
    for q in s["q"]:
        cfg = RademacherConfig(tuple(s["N_grid"]), s.get("trials", 200), q,
                               s.get("design", "iid"), scenario, seed)
        g = mc_growth(cfg)
        for i, N in enumerate(g.Ns):
            rows.append([g.design, q, N, g.trials, g.mean_xx[i], g.mean_yx[i],
                         g.bound_xx[i], g.bound_yx[i], g.violated[i]])
        violations += sum(g.violated)
        status = "reliable" if g.reliable else "unreliable"
        comments.append(f"fit design={g.design} q={formats.fmt(q)} exponent={formats.fmt(g.exponent)} "
                        f"r2={formats.fmt(g.r2)} exponent_yx={formats.fmt(g.exponent_yx)} "
                        f"r2_yx={formats.fmt(g.r2_yx)} {status}")
        print(comments[-1])
    out = _out_dir(args)
    formats.write_csv(out / "rademacher.csv",
                      ["design", "q", "N", "trials", "mean_norm_xx", "mean_norm_yx",
                       "lemma_bound_xx", "lemma_bound_yx", "violated"], rows, comments)
    if violations:
        log.error("%d cells exceed the growth bound", violations)
    return EXIT_OK


def cmd_plot_bounds(args) -> int:
    p_list = formats.parse_float_list(args.p)
    N_grid = formats.parse_int_list(args.N_grid)
    rows = bound_table(p_list, N_grid, args.B, args.C_x, args.C_y, args.delta)
    out = _out_dir(args)
    formats.write_csv(out / "bounds.csv", ["p", "N", "bound"], rows)
    write_bounds_svg(rows, out / "bounds.svg",
                     title=f"B={args.B:g}, C_x={args.C_x:g}, C_y={args.C_y:g}, delta={args.delta:g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    configurable = argparse.ArgumentParser(add_help=False)
    configurable.add_argument("--config", help="key = value configuration file")
    configurable.add_argument("--set", action="append", metavar="KEY=VALUE",
                              help="override a configuration key (repeatable)")

    parser = argparse.ArgumentParser(prog="schattenlearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common, configurable], help="write a synthetic dataset")
    p.add_argument("-n", "--count", type=int, required=True)
    p.add_argument("--name", default="data.csv")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", parents=[common], help="fit an operator to a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--B", type=float, required=True)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--method", choices=("pgd", "fista"), default="pgd")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("project", parents=[common], help="project onto an l_p or Schatten ball")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--vector", help="comma-separated coordinates")
    src.add_argument("--operator", help="SVNOP operator file")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("risk-curve", parents=[common, configurable], help="excess risk over N")
    p.set_defaults(func=cmd_risk_curve)

    p = sub.add_parser("rademacher", parents=[common, configurable],
                       help="Monte-Carlo growth of random operator norms")
    p.add_argument("--design", choices=("fixed-vector", "orthonormal", "iid"), default=None)
    p.add_argument("--q", type=formats.parse_float_list, dest="q", default=None)
    p.add_argument("--N-grid", type=formats.parse_int_list, dest="N_grid", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(func=cmd_rademacher)

    p = sub.add_parser("plot-bounds", parents=[common], help="tabulate and plot the excess-risk bound")
    p.add_argument("--p", default="1,1.5,2,3,4")
    p.add_argument("--N-grid", dest="N_grid", default="10..1000000*10")
    p.add_argument("--B", type=float, required=True)
    p.add_argument("--C-x", dest="C_x", type=float, required=True)
    p.add_argument("--C-y", dest="C_y", type=float, required=True)
    p.add_argument("--delta", type=float, default=1e-3)
    p.set_defaults(func=cmd_plot_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads < 1:
        log.error("--threads must be at least 1")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NONCONVERGED
    except (SchattenError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
