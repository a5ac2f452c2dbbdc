"""Experiment drivers behind the command line: tau scaling studies and the full pipeline.

Every output is a pure function of the configuration, so JSON and CSV
files are byte-identical across runs with the same config and seed.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .analysis import Budget, Direction, _apply, analyze, family_symmetries
from .droplets import DirectionFrame
from .energy import HFunction, SolverConfig, minimize_lambda
from .engine import sample_tau, sample_tau_coupled
from .rules import UpdateFamily, family_to_dict
from .scaling import (envelope_feasibility, estimate_h, h_limit_table,
                      monotone_violations)

SCALING_SCHEMA = "bperc.scaling-report/1"
MANIFEST_SCHEMA = "bperc.manifest/1"
LAMBDA_SCHEMA = "bperc.lambda-result/1"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def finite_or_str(x):
    """JSON has no infinity; write it as the string 'infinity'."""
    if isinstance(x, float) and math.isinf(x):
        return "infinity" if x > 0 else "-infinity"
    if isinstance(x, float) and math.isnan(x):
        return None
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    return finite_or_str(obj)


# ---------------------------------------------------------------------------
# tau scaling


@dataclass
class ScalingConfig:
    p_grid: tuple = (0.12, 0.10, 0.08)
    L: int = 256
    reps: int = 10
    seed: int = 0
    alpha: int = 1
    coupled: bool = True
    lambda_ref: float | None = None
    workers: int = 1


@dataclass
class ScalingReport:
    rows: list
    trend: dict | None
    alpha: int
    lambda_ref: float | None
    config: dict
    samples: list = field(default_factory=list)

    def to_json(self) -> dict:
        return _clean({"schema": SCALING_SCHEMA, "version": __version__, "rows": self.rows,
                       "trend": self.trend, "alpha": self.alpha, "lambda_ref": self.lambda_ref,
                       "config": self.config, "config_hash": config_hash(self.config)})

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "L", "rep", "seed", "tau"])
        for p, L, rep, seed, tau in self.samples:
            w.writerow([repr(p), L, rep, seed, "inf" if math.isinf(tau) else int(tau)])
        return buf.getvalue()


def _seed_for(cfg: ScalingConfig, i: int) -> int:
    return cfg.seed if cfg.coupled else (cfg.seed + 1_000_003 * (i + 1)) % 2 ** 64


def _map(fn, items, workers):
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def run_scaling_experiment(F: UpdateFamily, cfg: ScalingConfig) -> ScalingReport:
    """Sample tau on L x L tori over a decreasing p grid.

    Reports per-p quartiles of tau and of ``p^alpha log tau`` (with
    ``log tau`` read as 0 when the origin starts infected).  Rows with
    infinite tau are flagged, not dropped.  In coupled mode every p uses
    the same uniform field per replicate, so tau is nonincreasing in p.
    """
    ps = [float(p) for p in cfg.p_grid]
    if any(not 0 < p <= 1 for p in ps):
        raise ValueError("p values must lie in (0, 1]")
    if any(b >= a for a, b in zip(ps, ps[1:])):
        raise ValueError("p grid must be strictly decreasing")
    if cfg.L < 1 or cfg.reps < 1:
        raise ValueError("L and reps must be positive")
    taus = np.zeros((len(ps), cfg.reps))
    if cfg.coupled:
        res = _map(lambda r: sample_tau_coupled(F, ps, cfg.L, cfg.seed, r), range(cfg.reps),
                   cfg.workers)
        for r, ts in enumerate(res):
            taus[:, r] = ts
    else:
        for i, p in enumerate(ps):
            s = _seed_for(cfg, i)
            taus[i] = _map(lambda r: sample_tau(F, p, cfg.L, s, r), range(cfg.reps), cfg.workers)
    rows, samples = [], []
    for i, p in enumerate(ps):
        t = taus[i]
        seed = _seed_for(cfg, i)
        samples.extend((p, cfg.L, r, seed, t[r]) for r in range(cfg.reps))
        scaled = p ** cfg.alpha * np.log(np.maximum(t, 1.0))
        q = lambda a, k: float(np.quantile(a, k, method="inverted_cdf"))  # noqa: E731
        rows.append({"p": p, "L": cfg.L, "reps": cfg.reps, "seed": seed,
                     "median": q(t, 0.5), "q1": q(t, 0.25), "q3": q(t, 0.75),
                     "infinite": int(np.isinf(t).sum()),
                     "scaled_median": q(scaled, 0.5), "scaled_q1": q(scaled, 0.25),
                     "scaled_q3": q(scaled, 0.75)})
    good = [r for r in rows if math.isfinite(r["scaled_median"])]
    trend = None
    if len(good) >= 2:
        slope, icpt = np.polyfit([r["p"] for r in good], [r["scaled_median"] for r in good], 1)
        trend = {"model": "scaled_median = intercept + slope * p", "slope": float(slope),
                 "intercept": float(icpt), "points": len(good)}
    return ScalingReport(rows, trend, cfg.alpha, cfg.lambda_ref, _clean(asdict(cfg)), samples)


def scaling_svg(report: ScalingReport, path: str):
    """Plot p^alpha log tau against p with the lambda reference line."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "bperc"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    p = [r["p"] for r in report.rows]
    med = [r["scaled_median"] for r in report.rows]
    lo = [r["scaled_median"] - r["scaled_q1"] for r in report.rows]
    hi = [r["scaled_q3"] - r["scaled_median"] for r in report.rows]
    ax.errorbar(p, med, yerr=[lo, hi], fmt="o-", capsize=3, label="median, quartiles")
    if report.lambda_ref is not None:
        ax.axhline(report.lambda_ref, color="k", ls="--", lw=1, label="lambda estimate")
    ax.set_xlabel("p")
    ax.set_ylabel(f"p^{report.alpha} log tau")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ---------------------------------------------------------------------------
# helpers shared with the CLI


def direction_classes(F: UpdateFamily, dirs) -> dict:
    """Map each direction to the representative of its symmetry orbit within ``dirs``."""
    syms = family_symmetries(F)
    rep = {}
    for u in dirs:
        if u in rep:
            continue
        rep[u] = u
        for g in syms:
            v = Direction(*_apply(g, u.primitive))
            if v in dirs and v not in rep:
                rep[v] = u
    return rep


def solver_frame(report):
    """The quasi-stable frame with h featured on S_alpha only."""
    frame = DirectionFrame.of(report.quasi_stable)
    return frame, [u in set(report.S_alpha) for u in frame]


def h_per_direction(frame, featured, by_class: dict, classes: dict):
    """h list aligned with the frame; ``by_class`` maps orbit representatives to h."""
    out = []
    for u, f in zip(frame, featured):
        if not f:
            out.append(None)
            continue
        r = classes.get(u, u)
        if r not in by_class:
            raise KeyError(f"no h for direction {u.primitive}")
        out.append(by_class[r])
    return out


def lambda_result_json(res, config: dict) -> dict:
    out = res.to_json()
    out.update({"schema": LAMBDA_SCHEMA, "version": __version__, "config": config,
                "config_hash": config_hash(config)})
    return _clean(out)


# ---------------------------------------------------------------------------
# the pipeline


NOT_VORACIOUS_NOTE = (
    "family is not voracious: the variational constant solved here can differ from the "
    "true metastability constant, so the value is reported but not compared to it")


@dataclass
class PipelineConfig:
    seed: int = 0
    p_grid: tuple = (0.08, 0.05, 0.03)
    x_grid: tuple = tuple(float(x) for x in np.geomspace(0.1, 4.0, 12))
    reps: int = 1000
    site_budget: int = 5_000_000
    min_count: int = 400
    estimator: str = "ratio"
    starts: int = 8
    N: int = 48
    scaling_p: tuple = (0.12, 0.10, 0.08)
    scaling_L: int = 256
    scaling_reps: int = 10
    budget_size: int = 4
    time_cap: int = 64
    workers: int = 1


def _write(outdir, name, text) -> str:
    path = os.path.join(outdir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return name


def full_pipeline(F: UpdateFamily, cfg: PipelineConfig, outdir: str, svg: bool = False) -> dict:
    """analyze, estimate h, extrapolate, solve for lambda, then a tau scaling study.

    Writes every artifact into ``outdir`` together with ``manifest.json``.
    A stage whose input is inconclusive is recorded as skipped with the
    reason; the manifest is returned.
    """
    os.makedirs(outdir, exist_ok=True)
    conf = _clean(asdict(cfg))
    stages, results, notes = {}, {}, []

    def skip(name, why):
        stages[name] = {"status": "skipped", "reason": why, "outputs": []}

    report = analyze(F, Budget(max_size=cfg.budget_size, time_cap=cfg.time_cap))
    stages["analyze"] = {"status": "ok" if not report.issues else "inconclusive",
                         "reason": "; ".join(report.issues),
                         "outputs": [_write(outdir, "family_report.json",
                                            canonical_json(_clean(report.to_json())))]}
    results.update({"alpha": report.alpha, "isotropic": report.isotropic,
                    "voracious": report.voracious})
    if report.voracious == "no":
        notes.append(NOT_VORACIOUS_NOTE)

    problem = None
    if report.alpha is None or not report.S_alpha:
        problem = "global difficulty unknown"
    elif report.isotropic is not True:
        problem = "family is not isotropic"
    frame = featured = None
    if problem is None:
        frame, featured = solver_frame(report)
        if not frame.bounded:
            problem = "quasi-stable directions do not bound droplets"

    limits = {}
    if problem is not None:
        skip("estimate_h", problem)
        skip("extrapolate", problem)
    else:
        classes = direction_classes(F, report.S_alpha)
        reps_dirs = sorted(set(classes.values()))
        outs, ext_outs, why = [], [], []
        for k, u in enumerate(reps_dirs):
            tables = []
            for j, p in enumerate(cfg.p_grid):
                seed = (cfg.seed + 7_919 * (k + 1) + 104_729 * (j + 1)) % 2 ** 63
                T = estimate_h(F, u, p, cfg.x_grid, None, cfg.reps, seed,
                               estimator=cfg.estimator, site_budget=cfg.site_budget,
                               min_count=cfg.min_count)
                tables.append(T)
                outs.append(_write(outdir, f"htable_{u.a}_{u.b}_p{p:g}.json",
                                   canonical_json(_clean(T.to_json()))))
            ex = h_limit_table(tables)
            if ex.table is None:
                why.append(f"{u.primitive}: {ex.refused}")
                continue
            viol = monotone_violations(ex.table)
            env = envelope_feasibility(ex.table)
            limits[u] = (ex.table, env.c_best)
            ext_outs.append(_write(outdir, f"htable_{u.a}_{u.b}_limit.json",
                                   canonical_json(_clean(dict(
                                       ex.table.to_json(), residuals=ex.residuals,
                                       monotone_violations=viol,
                                       envelope={"feasible": env.feasible,
                                                 "c_best": env.c_best})))))
        stages["estimate_h"] = {"status": "ok", "reason": "", "outputs": outs}
        stages["extrapolate"] = {"status": "ok" if not why else "inconclusive",
                                 "reason": "; ".join(why), "outputs": ext_outs}
        if why:
            problem = "extrapolation refused for some direction"

    lam = None
    if problem is not None:
        skip("solve_lambda", problem)
    else:
        by_class = {u: HFunction.from_table(t, envelope_c=c) for u, (t, c) in limits.items()}
        hs = h_per_direction(frame, featured, by_class, classes)
        scfg = SolverConfig(N=cfg.N, starts=cfg.starts, seed=cfg.seed, workers=cfg.workers)
        res = minimize_lambda(frame, hs, scfg)
        lam = res.value if math.isfinite(res.value) else None
        stages["solve_lambda"] = {
            "status": "ok" if lam is not None else "inconclusive",
            "reason": "" if lam is not None else res.diagnostics.get("reason", "infinite energy"),
            "outputs": [_write(outdir, "lambda.json",
                               canonical_json(lambda_result_json(res, _clean(asdict(scfg)))))]}
        results["lambda"] = lam

    if report.alpha is None:
        skip("scaling", "global difficulty unknown")
    else:
        scfg = ScalingConfig(tuple(cfg.scaling_p), cfg.scaling_L, cfg.scaling_reps, cfg.seed,
                             report.alpha, True, lam, cfg.workers)
        rep = run_scaling_experiment(F, scfg)
        outs = [_write(outdir, "scaling.json", canonical_json(rep.to_json())),
                _write(outdir, "scaling.csv", rep.csv())]
        if svg:
            scaling_svg(rep, os.path.join(outdir, "scaling.svg"))
            outs.append("scaling.svg")
        stages["scaling"] = {"status": "ok", "reason": "", "outputs": outs}

    manifest = {"schema": MANIFEST_SCHEMA, "version": __version__, "seed": cfg.seed,
                "family": family_to_dict(F), "config": conf, "config_hash": config_hash(conf),
                "stages": stages, "results": results, "notes": notes}
    manifest = _clean(manifest)
    _write(outdir, "manifest.json", canonical_json(manifest))
    return manifest
