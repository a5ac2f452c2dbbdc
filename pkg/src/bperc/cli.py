"""Command line interface.

Exit codes: 0 success, 1 a stage came back inconclusive, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .analysis import Budget, Direction, analyze
from .droplets import DropletError, droplet_from_json, span
from .energy import ANALYTIC, HFunction, SolverConfig, SolverError, minimize_lambda
from .engine import sample_tau
from .experiments import (PipelineConfig, ScalingConfig, _clean, canonical_json,
                          direction_classes, full_pipeline, h_per_direction,
                          lambda_result_json, run_scaling_experiment, scaling_svg,
                          solver_frame)
from .rules import (Disc, Ellipse, RuleError, is_symmetric, make_convex_neighbourhood,
                    make_threshold_family, load_family, serialize_family)
from .scaling import (HTable, PreconditionError, envelope_feasibility, estimate_h,
                      h_limit_table)

OK, INCONCLUSIVE, INVALID = 0, 1, 2


class InvalidInput(Exception):
    pass


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _family(path):
    try:
        return load_family(path)
    except OSError as e:
        raise InvalidInput(f"cannot read rules file: {e}") from None
    except RuleError as e:
        raise InvalidInput(f"invalid rules file {path}: {e}") from None


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _prob(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("p must lie in (0, 1)")
    return v


def _direction(text):
    try:
        a, b = (int(t) for t in text.split(","))
        return Direction.of(a, b)
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError("direction must look like a,b with coprime integers")


def _grid(text):
    """lo:hi:steps, log spaced."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like lo:hi:steps")
    if not (0 < lo < hi and n >= 2):
        raise argparse.ArgumentTypeError("grid needs 0 < lo < hi and steps >= 2")
    return tuple(float(x) for x in np.geomspace(lo, hi, n))


def _floats(text):
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated numbers")


# ---------------------------------------------------------------------------
# subcommands


def cmd_rules(args):
    if args.action == "validate":
        F = _family(args.file)
        info = {"name": F.name, "rules": len(F), "symmetric": is_symmetric(F),
                "diameter": F.diameter}
        _emit(json.dumps(info, sort_keys=True) + "\n", None)
        return OK
    try:
        if args.ellipse:
            a, b, ang = args.ellipse
            region = Ellipse(a, b, ang)
        elif args.disc_radius is not None:
            region = Disc(args.disc_radius)
        else:
            raise InvalidInput("give --disc-radius or --ellipse")
        K = make_convex_neighbourhood(region)
        F = make_threshold_family(K, args.theta, name=args.name)
    except RuleError as e:
        raise InvalidInput(str(e)) from None
    fmt = "toml" if (args.output or "").endswith(".toml") else "json"
    text = serialize_family(F, fmt)
    _emit(text if fmt == "toml" else text + "\n", args.output)
    return OK


def cmd_analyze(args):
    F = _family(args.rules)
    budget = Budget(max_size=args.budget_size, window=args.budget_window, time_cap=args.time_cap)
    rep = analyze(F, budget)
    _emit(canonical_json(_clean(rep.to_json())), args.output)
    unsure = rep.issues or rep.voracious == "inconclusive" or rep.isotropic is None
    return INCONCLUSIVE if unsure else OK


def cmd_tau(args):
    F = _family(args.rules)
    if args.L < 1 or args.reps < 1:
        raise InvalidInput("L and reps must be positive")
    out = []
    for r in range(args.reps):
        t = sample_tau(F, args.p, args.L, args.seed, r)
        out.append([r, args.seed, "inf" if math.isinf(t) else int(t)])
    fh = open(args.output, "w", newline="\n") if args.output else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rep", "seed", "tau"])
        w.writerows(out)
    finally:
        if args.output:
            fh.close()
    return OK


def cmd_estimate_h(args):
    F = _family(args.rules)
    n = None if args.n in (None, "auto") else int(args.n)
    if n is not None and n < 1:
        raise InvalidInput("n must be positive")
    try:
        T = estimate_h(F, args.direction, args.p, args.x_grid, n, args.reps, args.seed,
                       estimator=args.estimator, site_budget=args.site_budget)
    except (PreconditionError, ValueError) as e:
        raise InvalidInput(str(e)) from None
    data = T.to_json()
    env = envelope_feasibility(T)
    data["envelope"] = {"feasible": env.feasible, "c_best": env.c_best}
    _emit(canonical_json(_clean(data)), args.output)
    return OK if all(e.usable for e in T.entries) else INCONCLUSIVE


def _load_tables(paths):
    out = []
    for p in paths:
        try:
            with open(p, encoding="utf-8") as fh:
                out.append(HTable.from_json(json.load(fh)))
        except (OSError, ValueError, KeyError, TypeError) as e:
            raise InvalidInput(f"cannot read h table {p}: {e}") from None
    return out


def _tables_to_h(tables):
    """One HFunction per direction; three or more finite-p tables are extrapolated first."""
    by_dir = {}
    for T in tables:
        by_dir.setdefault(T.direction, []).append(T)
    out, notes = {}, []
    for u, ts in by_dir.items():
        if len(ts) == 1:
            T = ts[0]
            if T.p > 0:
                notes.append(f"direction {u.primitive}: using the p={T.p} table without extrapolation")
        else:
            ex = h_limit_table(ts)
            if ex.table is None:
                return None, [f"direction {u.primitive}: {ex.refused}"]
            T = ex.table
        out[u] = HFunction.from_table(T, envelope_c=envelope_feasibility(T).c_best)
    return out, notes


def cmd_solve_lambda(args):
    F = _family(args.rules)
    rep = analyze(F)
    if rep.alpha is None or not rep.S_alpha:
        _emit(canonical_json({"lambda": None, "reason": "global difficulty unknown"}), args.output)
        return INCONCLUSIVE
    frame, featured = solver_frame(rep)
    classes = direction_classes(F, rep.S_alpha)
    notes = []
    if args.h_table:
        by_dir, notes = _tables_to_h(_load_tables(args.h_table))
        if by_dir is None:
            _emit(canonical_json({"lambda": None, "reason": notes[0]}), args.output)
            return INCONCLUSIVE
        by_class = {}
        for u, h in by_dir.items():
            by_class[classes.get(u, u)] = h
        try:
            hs = h_per_direction(frame, featured, by_class, classes)
        except KeyError as e:
            raise InvalidInput(str(e.args[0])) from None
    else:
        h = HFunction.analytic(args.h_analytic)
        hs = [h if f else None for f in featured]
    cfg = SolverConfig(N=args.N, starts=args.starts, seed=args.seed, workers=args.workers)
    try:
        res = minimize_lambda(frame, hs, cfg)
    except SolverError as e:
        _emit(canonical_json({"lambda": None, "reason": str(e)}), args.output)
        return INCONCLUSIVE
    data = lambda_result_json(res, _clean(dict(asdict(cfg), rules=args.rules,
                                               h_table=args.h_table, h_analytic=args.h_analytic)))
    data["notes"] = notes
    _emit(canonical_json(data), args.output)
    return OK if math.isfinite(res.value) else INCONCLUSIVE


def cmd_droplet(args):
    ds = []
    for p in args.files:
        try:
            with open(p, encoding="utf-8") as fh:
                ds.append(droplet_from_json(fh.read()))
        except (OSError, DropletError, ValueError) as e:
            raise InvalidInput(f"cannot read droplet {p}: {e}") from None
    try:
        if args.action == "metrics":
            out = []
            for D in ds:
                m = D.metrics()
                out.append({"dimension": [str(x) for x in m.dimension], "perimeter": str(m.perimeter),
                            "dimension_float": m.as_floats()[0], "perimeter_float": m.as_floats()[1]})
            data = out if len(out) > 1 else out[0]
        elif args.action == "sum":
            D = ds[0]
            for E in ds[1:]:
                D = D + E
            data = D.to_json()
        else:
            data = span(*ds).to_json()
    except DropletError as e:
        raise InvalidInput(str(e)) from None
    _emit(canonical_json(data), args.output)
    return OK


def cmd_scaling(args):
    F = _family(args.rules)
    alpha = args.alpha
    if alpha is None:
        rep = analyze(F)
        if rep.alpha is None:
            raise InvalidInput("family has no finite global difficulty; pass --alpha")
        alpha = rep.alpha
    cfg = ScalingConfig(tuple(args.p_grid), args.L, args.reps, args.seed, alpha,
                        not args.independent, args.lambda_ref, args.workers)
    try:
        rep = run_scaling_experiment(F, cfg)
    except ValueError as e:
        raise InvalidInput(str(e)) from None
    prefix = args.output
    _emit(canonical_json(rep.to_json()), prefix + ".json")
    _emit(rep.csv(), prefix + ".csv")
    if args.svg:
        scaling_svg(rep, prefix + ".svg")
    return OK


def cmd_pipeline(args):
    F = _family(args.rules)
    cfg = PipelineConfig(seed=args.seed, reps=args.reps, site_budget=args.site_budget,
                         starts=args.starts, N=args.N, scaling_L=args.scaling_L,
                         scaling_reps=args.scaling_reps, workers=args.workers)
    if args.p_grid:
        cfg.p_grid = tuple(args.p_grid)
    if args.x_grid:
        cfg.x_grid = tuple(args.x_grid)
    man = full_pipeline(F, cfg, args.out, svg=args.svg)
    bad = any(s["status"] != "ok" for s in man["stages"].values())
    return INCONCLUSIVE if bad else OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bperc", description="Bootstrap percolation toolkit")
    ap.add_argument("--version", action="version", version=f"bperc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rules", help="validate or generate rule files")
    rsub = r.add_subparsers(dest="action", required=True)
    v = rsub.add_parser("validate")
    v.add_argument("file")
    t = rsub.add_parser("threshold", help="threshold family of a convex region")
    t.add_argument("--disc-radius", type=float)
    t.add_argument("--ellipse", type=_floats, help="a,b,angle_degrees")
    t.add_argument("--theta", type=int, required=True)
    t.add_argument("--name")
    t.add_argument("-o", "--output")
    r.set_defaults(func=cmd_rules)

    a = sub.add_parser("analyze", help="stable directions, difficulty, isotropy, voracity")
    a.add_argument("--rules", required=True)
    a.add_argument("--budget-size", type=int, default=4)
    a.add_argument("--budget-window", type=int)
    a.add_argument("--time-cap", type=int, default=64)
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("tau", help="sample infection times of the origin on a torus")
    t.add_argument("--rules", required=True)
    t.add_argument("--p", type=_prob, required=True)
    t.add_argument("--L", type=int, required=True)
    t.add_argument("--reps", type=int, default=1)
    t.add_argument("--seed", type=_u64, required=True)
    t.add_argument("-o", "--output")
    t.set_defaults(func=cmd_tau)

    e = sub.add_parser("estimate-h", help="Monte Carlo table of the traversability function")
    e.add_argument("--rules", required=True)
    e.add_argument("--direction", type=_direction, required=True)
    e.add_argument("--p", type=_prob, required=True)
    e.add_argument("--x-grid", type=_grid, required=True)
    e.add_argument("--n", default="auto", help="rectangle height, or 'auto'")
    e.add_argument("--reps", type=int, default=1000)
    e.add_argument("--site-budget", type=int)
    e.add_argument("--estimator", choices=["direct", "ratio"], default="ratio")
    e.add_argument("--seed", type=_u64, required=True)
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_estimate_h)

    s = sub.add_parser("solve-lambda", help="minimize the droplet-sequence energy")
    s.add_argument("--rules", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--h-table", action="append", help="h table JSON (repeat for several p)")
    g.add_argument("--h-analytic", choices=sorted(ANALYTIC))
    s.add_argument("--starts", type=int, default=8)
    s.add_argument("--N", type=int, default=48)
    s.add_argument("--seed", type=_u64, required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve_lambda)

    d = sub.add_parser("droplet", help="droplet metrics, Minkowski sum and span")
    d.add_argument("action", choices=["metrics", "sum", "span"])
    d.add_argument("files", nargs="+")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_droplet)

    c = sub.add_parser("scaling", help="p^alpha log tau over a p grid")
    c.add_argument("--rules", required=True)
    c.add_argument("--p-grid", type=_floats, required=True)
    c.add_argument("--L", type=int, default=256)
    c.add_argument("--reps", type=int, default=10)
    c.add_argument("--seed", type=_u64, required=True)
    c.add_argument("--alpha", type=int)
    c.add_argument("--lambda-ref", type=float)
    c.add_argument("--independent", action="store_true", help="fresh uniforms for every p")
    c.add_argument("--svg", action="store_true")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("-o", "--output", required=True, help="output prefix")
    c.set_defaults(func=cmd_scaling)

    p = sub.add_parser("pipeline", help="analyze, estimate h, solve lambda, scaling study")
    p.add_argument("--rules", required=True)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--p-grid", type=_floats)
    p.add_argument("--x-grid", type=_grid)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--site-budget", type=int, default=5_000_000)
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--N", type=int, default=48)
    p.add_argument("--scaling-L", type=int, default=256)
    p.add_argument("--scaling-reps", type=int, default=10)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return INVALID if e.code else OK
    try:
        return args.func(args)
    except InvalidInput as e:
        print(f"bperc: error: {e}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
