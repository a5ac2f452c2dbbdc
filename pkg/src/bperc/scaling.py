"""Rectangles, occupied lines and the traversability functions.

For an isolated stable direction ``u`` with primitive vector ``v`` the
rectangle ``R(m, n)`` is the set of sites with ``0 <= <x, perp> < m*|v|^2``
and ``0 <= <x, v> < n``.  In line coordinates ``(s, t)`` its line ``t``
holds the ``m`` sites ``s = off(t), ..., off(t) + m - 1`` where ``off`` is a
ceiling shear; all arrays below store a rectangle row by row in that
sheared layout, so column ``j`` of row ``t`` is ``s = off(t) + j``.

A line is occupied when a translate of a helping set, anchored on the
line, sits inside the infected sites of the (infinitely tall) rectangle.
``A(m, n)`` asks for lines ``0..n-1`` to be occupied.  Its probability
decays like ``exp(-h_p(p^alpha m) n)`` which is what ``estimate_h``
measures.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import __version__
from .analysis import Budget, Direction, analyze_direction
from .droplets import Droplet
from .engine import HalfPlane, box, compile_clauses, compile_family, run_array
from .rng import stream_id, uniform_block
from .rules import UpdateFamily

HTABLE_SCHEMA = "bperc.htable/1"
ESTIMATOR_VERSION = "occupied-lines-mc/1"


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# geometry


def _shear(u: Direction):
    c, d = u._bezout()
    return c * u.b - d * u.a, u.norm2


def line_offset(u: Direction, t):
    """First s-coordinate of line ``t`` of the rectangle anchored at the origin."""
    e, N = _shear(u)
    t = np.asarray(t)
    return -((t * e) // N)


@dataclass(frozen=True)
class Rectangle:
    u: Direction
    m: int
    n: int
    anchor: tuple = (0, 0)

    def __post_init__(self):
        if self.m < 1 or self.n < 0:
            raise ValueError("need m >= 1 and n >= 0")

    def line_sites(self, t: int):
        off = int(line_offset(self.u, t))
        return [_add(self.anchor, self.u.from_line(off + j, t)) for j in range(self.m)]

    def sites(self):
        return [x for t in range(self.n) for x in self.line_sites(t)]

    def __contains__(self, x) -> bool:
        rel = (x[0] - self.anchor[0], x[1] - self.anchor[1])
        N = self.u.norm2
        along = self.u.b * rel[0] - self.u.a * rel[1]
        t = self.u.dot(rel)
        return 0 <= along < self.m * N and 0 <= t < self.n

    def occupancy(self, A, rows: int | None = None) -> np.ndarray:
        """Boolean array (rows, m) of the sites of ``A`` in the sheared layout."""
        rows = self.n if rows is None else rows
        A = A if isinstance(A, (set, frozenset)) else set(map(tuple, A))
        out = np.zeros((rows, self.m), bool)
        for t in range(rows):
            for j, x in enumerate(self.line_sites(t)):
                out[t, j] = x in A
        return out


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


# ---------------------------------------------------------------------------
# per-direction data from the analysis


@dataclass(frozen=True)
class DirectionData:
    u: Direction
    alpha: int
    classes: tuple  # helping sets in line coordinates, min s = 0
    height: int  # max t over helping-set sites
    width: int  # max s-extent of a helping set
    W: int | None
    V: int | None
    voracious: str


@lru_cache(maxsize=128)
def direction_data(F: UpdateFamily, u: Direction, budget: Budget = Budget()) -> DirectionData:
    rep = analyze_direction(F, u, budget)
    if not rep.stable:
        raise PreconditionError(f"{u} is unstable; occupied lines need a stable direction")
    if not rep.isolated or not rep.difficulty.finite:
        raise PreconditionError(f"{u} has no certified finite difficulty")
    if not rep.helping_sets or rep.helping_sets == [()]:
        raise PreconditionError(f"no helping sets recorded for {u}")
    classes = []
    for Z in rep.helping_sets:
        pts = [u.line_coords(z) for z in Z]
        m0 = min(s for s, _ in pts)
        classes.append(tuple(sorted((s - m0, t) for s, t in pts)))
    classes = tuple(sorted(set(classes)))
    height = max(t for H in classes for _, t in H)
    width = max(max(s for s, _ in H) + 1 for H in classes)
    vor = rep.voracious.verdict if rep.voracious else "inconclusive"
    return DirectionData(u, rep.difficulty.value, classes, height, width, rep.w_width,
                         rep.v_estimate, vor)


def _gather_plan(dd: DirectionData, n: int, m: int):
    """Index arrays to test occupancy of lines 0..n-1 of an (n + height, m) array."""
    off = line_offset(dd.u, np.arange(n + dd.height + 1))
    pad = dd.width + int(np.abs(np.diff(off)).max(initial=0)) * (dd.height + 1) + 2
    sig = np.arange(-pad, m + pad)
    plans = []
    j = np.arange(n)
    for H in dd.classes:
        rows = np.stack([j + t for _, t in H], axis=1)  # (n, k)
        shift = np.stack([off[j + t] - off[j] for _, t in H], axis=1)  # (n, k)
        sg = np.array([s for s, _ in H])
        cols = sig[None, :, None] + sg[None, None, :] - shift[:, None, :] + pad  # (n, S, k)
        plans.append((rows, cols))
    return plans, pad


def occupied_lines(occ: np.ndarray, dd: DirectionData, n: int) -> np.ndarray:
    """(B, n) array: whether each line 0..n-1 is occupied inside the window.

    ``occ`` has shape (B, T, m) with T >= n + height; sites beyond the
    array count as healthy.
    """
    B, T, m = occ.shape
    if T < n + dd.height:
        occ = np.concatenate([occ, np.zeros((B, n + dd.height - T, m), bool)], axis=1)
    plans, pad = _gather_plan(dd, n, m)
    occp = np.pad(occ, ((0, 0), (0, 0), (pad, pad)))
    out = np.zeros((B, n), bool)
    for rows, cols in plans:
        k = rows.shape[1]
        acc = None
        for i in range(k):
            g = occp[:, rows[:, i][:, None], cols[:, :, i]]  # (B, n, S)
            acc = g if acc is None else acc & g
        out |= acc.any(axis=2)
    return out


def line_occupied(F: UpdateFamily, u: Direction, n: int, A, width_window: int,
                  anchor=(0, 0)) -> bool:
    """Whether line ``n`` of the rectangle at ``anchor`` is occupied in A within the window."""
    dd = direction_data(F, u)
    rect = Rectangle(u, width_window, n + dd.height + 1, anchor)
    occ = rect.occupancy(A)
    return bool(occupied_lines(occ[None], dd, n + 1)[0, n])


# ---------------------------------------------------------------------------
# Monte Carlo


def wilson(k: int, n: int, z: float = 1.96):
    if n == 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class MCResult:
    estimate: float
    ci: tuple
    count: int
    reps: int
    curve: np.ndarray | None = None  # counts of A(m, j) for j = 0..n

    @property
    def se(self) -> float:
        p = self.estimate
        return math.sqrt(max(p * (1 - p), 0.0) / self.reps) if self.reps else float("inf")


def _check_width(dd: DirectionData, m: int):
    e, _ = _shear(dd.u)
    need = dd.width + (1 if e else 0)
    if m < need:
        widest = max(dd.classes, key=lambda H: max(s for s, _ in H))
        raise PreconditionError(f"m={m} is too narrow for the helping set {widest} (needs {need})")


def occupied_curve(F: UpdateFamily, u: Direction, m: int, n: int, p: float, reps: int,
                   seed: int, chunk_sites: int = 1 << 22) -> np.ndarray:
    """Counts of replicates with lines 0..j-1 all occupied, for j = 0..n."""
    dd = direction_data(F, u)
    _check_width(dd, m)
    T = n + dd.height
    size = T * m
    stream = stream_id("A", u.a, u.b, m, n)
    per = max(1, chunk_sites // max(1, size * (2 * dd.width + m + 8) // m))
    counts = np.zeros(n + 1, np.int64)
    counts[0] = reps
    for first in range(0, reps, per):
        cnt = min(per, reps - first)
        occ = (uniform_block(seed, stream, first, cnt, size) < p).reshape(cnt, T, m)
        lines = occupied_lines(occ, dd, n)
        prefix = np.logical_and.accumulate(lines, axis=1)
        counts[1:] += prefix.sum(axis=0)
    return counts


def prob_A_mc(F: UpdateFamily, u: Direction, m: int, n: int, p: float, reps: int,
              seed: int) -> MCResult:
    """Estimate of P_p(A(m, n)) with a Wilson interval."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    dd = direction_data(F, u)
    _check_width(dd, m)
    if n == 0:
        return MCResult(1.0, (1.0, 1.0), reps, reps, np.array([reps]))
    curve = occupied_curve(F, u, m, n, p, reps, seed)
    k = int(curve[n])
    return MCResult(k / reps, wilson(k, reps), k, reps, curve)


# ---------------------------------------------------------------------------
# h tables


@dataclass
class HEntry:
    x: float
    m: int
    n: int
    h: float | None
    ci: tuple | None
    count: int
    reps: int
    usable: bool = True
    note: str = ""
    x_eff: float | None = None


@dataclass
class HTable:
    direction: Direction
    p: float
    alpha: int
    entries: list
    estimator: str = "direct"
    metadata: dict = field(default_factory=dict)

    @property
    def xs(self):
        return np.array([e.x for e in self.entries if e.usable])

    @property
    def hs(self):
        return np.array([e.h for e in self.entries if e.usable])

    def to_json(self) -> dict:
        return {
            "schema": HTABLE_SCHEMA,
            "direction": list(self.direction.primitive),
            "p": self.p,
            "alpha": self.alpha,
            "estimator": self.estimator,
            "entries": [
                {"x": e.x, "m": e.m, "n": e.n, "h": e.h,
                 "ci": list(e.ci) if e.ci is not None else None,
                 "count": e.count, "reps": e.reps, "usable": e.usable, "note": e.note,
                 "x_eff": e.x_eff}
                for e in self.entries
            ],
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data) -> "HTable":
        if isinstance(data, str):
            data = json.loads(data)
        entries = [HEntry(e["x"], e["m"], e["n"], e["h"],
                          tuple(e["ci"]) if e.get("ci") is not None else None,
                          e["count"], e["reps"], e.get("usable", True), e.get("note", ""),
                          e.get("x_eff"))
                   for e in data["entries"]]
        return cls(Direction(*data["direction"]), data["p"], data["alpha"], entries,
                   data.get("estimator", "direct"), data.get("metadata", {}))


def _rate_guess(F, u, m, p, seed, reps=64, n_cap=1 << 16) -> float:
    """Rough decay rate of P(A(m, n)) in n from a small pilot run."""
    n = 4
    while True:
        curve = occupied_curve(F, u, m, n, p, reps, seed ^ 0x9E3779B97F4A7C15)
        if curve[n] <= reps / 2 or n >= n_cap:
            break
        n *= 4
    j = max(int(np.nonzero(curve >= reps / 2)[0].max()), 1)
    frac = max(curve[j] / reps, 1e-9)
    return max(-math.log(frac) / j, 1e-9)


def estimate_h(F: UpdateFamily, u: Direction, p: float, x_grid, n: int | None, reps: int,
               seed: int, estimator: str = "direct", V: int | None = None,
               site_budget: int | None = None, min_count: int = 400,
               n_cap: int = 1 << 16) -> HTable:
    """Monte Carlo table of h_p at the rescaled widths ``x_grid``.

    ``estimator='direct'`` uses ``-log P(A(m, n)) / n``.  ``'ratio'``
    uses ``-log(P(A(m, n)) / P(A(m, n/2))) / (n - n/2)`` from the same
    replicates, which cancels the boundary prefactor; with ``n=None`` it
    takes the largest n still reached by ``min_count`` replicates.  With
    ``n=None`` the direct estimator aims at P close to 0.1.
    ``site_budget`` raises the replicate count of narrow entries so each
    entry simulates about that many sites.  Entries record the width
    actually used as ``x_eff = m * p^alpha``.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    xs = [float(x) for x in x_grid]
    if not xs or any(x <= 0 for x in xs) or any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("x grid must be positive and increasing")
    if estimator not in ("direct", "ratio"):
        raise ValueError(f"unknown estimator {estimator!r}")
    dd = direction_data(F, u)
    V = (dd.V if V is None else V) or 0
    scale = p ** (-dd.alpha)
    e, _ = _shear(u)
    m_min = dd.width + (1 if e else 0)
    entries = []
    for i, x in enumerate(xs):
        m = max(int(round(x * scale)), m_min)
        rate = None
        if n is None:
            rate = _rate_guess(F, u, m, p, seed + i)
            if estimator == "direct":
                nn = int(min(max(math.ceil(math.log(10.0) / rate), 1), n_cap))
            else:
                nn = None
        else:
            nn = n
        r = reps
        if site_budget is not None:
            rows = (nn if nn is not None else 8) + dd.height
            r = max(reps, site_budget // max(1, rows * m))
        if nn is None:
            target = math.log(max(r / min_count, 2.0)) / rate
            nn = int(min(max(math.ceil(1.5 * target), 2), n_cap))
            if site_budget is not None:
                r = max(reps, min(r, site_budget // max(1, (nn + dd.height) * m)))
        curve = occupied_curve(F, u, m, nn, p, r, seed + 7919 * i)
        x_eff = m / scale
        if estimator == "direct":
            k, base, top, half = int(curve[nn]), r, nn, 0
        else:
            reached = np.nonzero(curve >= min_count)[0] if n is None else np.array([nn])
            top = int(max(reached.max(), 2)) if len(reached) else nn
            half = top // 2
            k, base = int(curve[top]), int(curve[half])
        length = top - half
        if k == 0 or base == 0:
            entries.append(HEntry(x, m, nn, None, None, k, r, False,
                                  "no replicate survived; use more reps or a smaller n", x_eff))
            continue
        ph = k / base
        lo, hi = wilson(k, base)
        h = -math.log(ph) / length
        h_lo = -math.log(hi) / length
        h_hi = -math.log(lo) / length if lo > 0 else math.inf
        sysband = h * V / top if estimator == "direct" else 0.0
        note = ""
        if estimator == "direct" and not 1e-3 <= ph <= 0.9:
            note = "probability outside [1e-3, 0.9]"
        entries.append(HEntry(x, m, top, h, (max(h_lo - sysband, 0.0), h_hi + sysband),
                              k, r, h > 0, note, x_eff))
    meta = {"seed": seed, "reps": reps, "site_budget": site_budget,
            "estimator_version": ESTIMATOR_VERSION, "V": V, "family": F.name,
            "version": __version__}
    return HTable(u, p, dd.alpha, entries, estimator, meta)


def monotone_violations(table: HTable) -> list:
    """Pairs of consecutive usable entries whose CIs show h increasing in x."""
    good = [e for e in table.entries if e.usable]
    return [(a.x, b.x) for a, b in zip(good, good[1:]) if b.ci[0] > a.ci[1]]


# ---------------------------------------------------------------------------
# envelope and extrapolation


def lower_envelope(x, c):
    return -c * np.log1p(-np.exp(-np.asarray(x, float) / c))


def upper_envelope(x, c):
    return -np.log1p(-np.exp(-c * np.asarray(x, float)))


@dataclass
class EnvelopeResult:
    feasible: bool
    c_values: list
    c_best: float | None


def envelope_feasibility(table: HTable, c_grid=None) -> EnvelopeResult:
    """Constants c with lower_envelope <= h <= upper_envelope on the sampled grid.

    For a given c the bounds are only claimed at widths x >= p^alpha / c,
    so entries below that are left out; c is accepted only if at least
    two entries remain. Entries are placed at the width actually
    simulated (``x_eff``) and compared through their CI.
    """
    good = [e for e in table.entries if e.usable]
    if not good:
        return EnvelopeResult(False, [], None)
    xs = np.array([e.x_eff if e.x_eff else e.x for e in good])
    lo = np.array([e.ci[0] for e in good])
    hi = np.array([e.ci[1] for e in good])
    scale = table.p ** table.alpha
    if c_grid is None:
        c_grid = np.geomspace(1e-3, 100.0, 400)
    ok = []
    for c in c_grid:
        keep = xs >= scale / c * (1 - 1e-12)
        if keep.sum() < 2:
            continue
        x = xs[keep]
        if np.all(lower_envelope(x, c) <= hi[keep]) and np.all(upper_envelope(x, c) >= lo[keep]):
            ok.append(float(c))
    return EnvelopeResult(bool(ok), ok, max(ok) if ok else None)


@dataclass
class Extrapolation:
    table: HTable | None
    raw: list
    residuals: list
    refused: str = ""


def _resample(table: HTable, xs, z: float):
    """(h, se) of ``table`` at ``xs``, by PCHIP in log x over the widths used.

    Rounding m to an integer shifts the effective width away from the
    nominal one, differently for each p; resampling removes that shift.
    Points outside the usable range come back as NaN.
    """
    pts = sorted((e.x_eff if e.x_eff is not None else e.x, e.h,
                  max((e.ci[1] - e.ci[0]) / (2 * z), 1e-12))
                 for e in table.entries if e.usable and e.h is not None and e.ci is not None
                 and math.isfinite(e.ci[1]))
    xs = np.asarray(xs, float)
    if not pts:
        return np.full(len(xs), np.nan), np.full(len(xs), np.nan)
    xe = np.array([q[0] for q in pts])
    keep = np.concatenate([[True], np.diff(xe) > 0])
    xe, he, se = (np.array([q[k] for q in pts])[keep] for k in range(3))
    if len(xe) == 1:
        hit = np.isclose(xs, xe[0])
        return np.where(hit, he[0], np.nan), np.where(hit, se[0], np.nan)
    lx = np.log(xe)
    h = PchipInterpolator(lx, np.log(he), extrapolate=False)(np.log(xs))
    rel = np.interp(np.log(xs), lx, se / he, left=np.nan, right=np.nan)
    h = np.exp(h)
    return h, h * rel


def h_limit_table(tables, z: float = 1.96) -> Extrapolation:
    """Per-x weighted linear fit of h_p in p, evaluated at p = 0.

    Each table is first resampled onto the x grid of the table with the
    largest p, so tables whose integer widths differ still line up.  An x
    whose estimates move non-monotonically in p beyond their CIs gets an
    unusable entry; the whole extrapolation is refused (``table=None``)
    when fewer than two x values survive.
    """
    tables = sorted(tables, key=lambda t: -t.p)
    if len(tables) < 3:
        raise ValueError("need at least three values of p")
    ps = [t.p for t in tables]
    if len(set(ps)) != len(ps):
        raise ValueError("p values must be distinct")
    u, alpha = tables[0].direction, tables[0].alpha
    if any(t.direction != u or t.alpha != alpha for t in tables):
        raise ValueError("tables must share direction and alpha")
    xs = [e.x for e in tables[0].entries]
    cols = [_resample(t, xs, z) for t in tables]
    H = np.array([c[0] for c in cols])
    S = np.array([c[1] for c in cols])
    entries, residuals, refused_at = [], [], []
    for i, x in enumerate(xs):
        h, se = H[:, i], np.maximum(S[:, i], 1e-12)
        if not np.all(np.isfinite(h)):
            entries.append(HEntry(x, 0, 0, None, None, 0, 0, False,
                                  "outside the usable range of some input table"))
            residuals.append(None)
            continue
        d = np.diff(h)
        dse = np.sqrt(se[1:] ** 2 + se[:-1] ** 2)
        signs = {int(np.sign(v)) for v, s in zip(d, dse) if abs(v) > z * s}
        if len(signs) > 1:
            entries.append(HEntry(x, 0, 0, None, None, 0, 0, False,
                                  "estimates are not monotone in p beyond their CIs"))
            residuals.append(None)
            refused_at.append(x)
            continue
        P = np.array(ps)
        coef, cov = np.polyfit(P, h, 1, w=1.0 / se, cov="unscaled")
        c0 = float(coef[1])
        s0 = float(math.sqrt(max(cov[1, 1], 0.0)))
        residuals.append((h - np.polyval(coef, P)).tolist())
        entries.append(HEntry(x, 0, 0, c0, (c0 - z * s0, c0 + z * s0), 0, 0, c0 > 0,
                              "" if c0 > 0 else "non-positive extrapolated value", x))
    if sum(e.usable for e in entries) < 2:
        why = "fewer than two x values admit an extrapolation"
        if refused_at:
            why += f"; estimates not monotone in p at x={refused_at}"
        return Extrapolation(None, tables, residuals, why)
    meta = {"extrapolated_from": ps, "model": "linear in p", "version": __version__,
            "refused_x": refused_at}
    return Extrapolation(HTable(u, 0.0, alpha, entries, "extrapolated", meta), tables, residuals)


# ---------------------------------------------------------------------------
# traversability and growth


def w_runs(occ: np.ndarray, W: int) -> np.ndarray:
    """Per row: whether some W consecutive entries are all True."""
    T, m = occ.shape
    if W > m:
        return np.zeros(T, bool)
    c = np.concatenate([np.zeros((T, 1), np.int64), np.cumsum(occ, axis=1)], axis=1)
    return ((c[:, W:] - c[:, :-W]) == W).any(axis=1)


def traversable_occupancy(occ: np.ndarray, dd: DirectionData, V: int, W: int) -> bool:
    """Traversability of a rectangle given its sheared occupancy array (n, m)."""
    n, m = occ.shape
    if m <= 2 * V:
        raise PreconditionError(f"rectangle width {m} must exceed 2V = {2 * V}")
    if n == 0:
        return True
    runs = w_runs(occ, W)
    if n <= V:
        return bool(runs.all())
    if not runs[n - V:].all():
        return False
    inner = occ[:, V:m - V]
    lines = occupied_lines(inner[None], dd, n - V)
    return bool(lines.all())


def _dd_params(F, u, V, W):
    dd = direction_data(F, u)
    V = dd.V if V is None else V
    W = dd.W if W is None else W
    if V is None or W is None:
        raise PreconditionError(f"no V or W estimate for {u}")
    return dd, V, W


def is_traversable(F: UpdateFamily, u: Direction, rect: Rectangle, A, V: int | None = None,
                   W: int | None = None) -> bool:
    dd, V, W = _dd_params(F, u, V, W)
    if rect.m <= 2 * V:
        raise PreconditionError(f"rectangle width {rect.m} must exceed 2V = {2 * V}")
    return traversable_occupancy(rect.occupancy(A), dd, V, W)


def rectangle_filled(F: UpdateFamily, rect: Rectangle, A, margin: int | None = None) -> bool:
    """Whether the closure of the half-plane below ``rect`` plus A inside it covers it."""
    u = rect.u
    G = F.transformed(u.to_line())
    prog = compile_clauses(G.clauses())
    R = max(1, prog.reach)
    margin = 4 * R + 2 * rect.n + 8 if margin is None else margin
    off = line_offset(u, np.arange(rect.n))
    lo = int(off.min()) - margin
    hi = int(off.max()) + rect.m + margin
    win = box(lo, hi, 0, rect.n + margin - 1, HalfPlane(0, 1, 0))
    state = np.zeros(win.shape, np.uint8)
    occ = rect.occupancy(A)
    for t in range(rect.n):
        for j in np.nonzero(occ[t])[0]:
            state[t, off[t] + j - lo] = 1
    run_array(prog, state, win)
    for t in range(rect.n):
        if not state[t, off[t] - lo: off[t] - lo + rect.m].all():
            return False
    return True


class GrowthError(ValueError):
    pass


@dataclass
class GrowthCheck:
    traversable: bool
    filled: bool | None
    counterexample: list | None = None

    @property
    def consistent(self) -> bool:
        return not self.traversable or bool(self.filled)


def _line_interval(D: Droplet, u: Direction, t: int):
    """Integer s-range of line t of u inside D, ignoring the constraints of +-u."""
    c, d = u._bezout()
    lo, hi = -math.inf, math.inf
    for w, b in zip(D.frame, D.radii):
        k = u.b * w.a - u.a * w.b
        const = t * (c * w.a + d * w.b)
        if k > 0:
            hi = min(hi, math.floor(Fraction(b - const) / k))
        elif k < 0:
            lo = max(lo, math.ceil(Fraction(b - const) / k))
        elif const > b:
            return None
    if lo > hi:
        return None
    return int(lo), int(hi)


def growth_rectangles(D1: Droplet, D2: Droplet):
    """The rectangle of each direction with positive location, inside the extension strip."""
    out = []
    for i, u in enumerate(D1.frame):
        a, b = D1.radii[i], D2.radii[i]
        if b < a:
            raise GrowthError(f"D1 is not inside D2 in direction {u}")
        t0 = math.floor(a) + 1
        t1 = math.floor(b)
        s = t1 - t0 + 1
        if s <= 0:
            continue
        ext = list(D1.radii)
        ext[i] = b
        Dext = Droplet(D1.frame, tuple(ext))
        e, N = _shear(u)
        los, his = [], []
        for t in range(t0, t1 + 1):
            iv = _line_interval(Dext, u, t)
            if iv is None:
                raise GrowthError(f"empty line {t} in direction {u}")
            off = int(-(((t - t0) * e) // N))
            los.append(iv[0] - off)
            his.append(iv[1] - off)
        sigma = max(los)
        m = min(his) - sigma + 1
        if m < 1:
            raise GrowthError(f"no rectangle fits in direction {u}: location too large for the dimension")
        anchor = u.from_line(sigma, t0)
        out.append((u, Rectangle(u, m, s, anchor)))
    return out


def lattice_sites(D: Droplet):
    xs = [v[0] for v in D.vertices]
    ys = [v[1] for v in D.vertices]
    return [(x, y) for x in range(math.floor(min(xs)), math.ceil(max(xs)) + 1)
            for y in range(math.floor(min(ys)), math.ceil(max(ys)) + 1)
            if D.contains_point((x, y))]


def verify_growth_event(F: UpdateFamily, D1: Droplet, D2: Droplet, A, V: int | None = None,
                        W: int | None = None) -> GrowthCheck:
    """Check that traversable rectangles around D1 let it grow to fill D2."""
    A = set(map(tuple, A))
    rects = growth_rectangles(D1, D2)
    trav = True
    for u, rect in rects:
        dd, Vu, Wu = _dd_params(F, u, V, W)
        if rect.m <= 2 * Vu:
            raise GrowthError(f"rectangle in direction {u} has width {rect.m} <= 2V = {2 * Vu}")
        if not traversable_occupancy(rect.occupancy(A), dd, Vu, Wu):
            trav = False
            break
    if not trav:
        return GrowthCheck(False, None)
    s1 = set(lattice_sites(D1))
    s2 = lattice_sites(D2)
    init = s1 | (A & set(s2))
    xs = [x for x, _ in s2]
    ys = [y for _, y in s2]
    g = 4 * max(1, compile_family(F).reach) + 4
    win = box(min(xs) - g, max(xs) + g, min(ys) - g, max(ys) + g)
    state = np.zeros(win.shape, np.uint8)
    for x, y in init:
        state[y - win.y0, x - win.x0] = 1
    run_array(compile_family(F), state, win)
    filled = all(state[y - win.y0, x - win.x0] for x, y in s2)
    return GrowthCheck(True, filled, None if filled else sorted(init))
