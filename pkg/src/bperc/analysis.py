"""Direction-level theory of an update family.

Directions are primitive integer vectors ``(a, b)``; the half-plane of a
direction is ``{a*x + b*y < 0}`` and its n-th line is ``{a*x + b*y = n}``.

Most computations run in *line coordinates* ``(s, t)`` where ``t`` is the
line index ``a*x + b*y`` and ``s`` counts steps of ``perp = (b, -a)``
along the line.  The change of basis is unimodular, so the dynamics of
the transformed family in line coordinates are exactly the original
dynamics, and every half-plane question becomes one about ``{t < 0}``.

Infinite growth is never assumed.  A set ``Z`` is certified to grow
forever when a finite piece ``X`` of its (window-truncated, hence
under-estimated) closure infects its own translate along the line; by
translation invariance of the half-plane the translates then march off
to infinity.  It is certified finite when its closure settles strictly
inside the window.  Everything else is reported as unknown.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cmp_to_key

import numpy as np

from .engine import HalfPlane, Program, box, compile_clauses, run_array
from .rules import UpdateFamily, is_symmetric, iota


def _bezout(a: int, b: int):
    """(c, d) with a*c + b*d = gcd(|a|, |b|)."""
    old_r, r = abs(a), abs(b)
    old_c, c = 1, 0
    old_d, d = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_c, c = c, old_c - q * c
        old_d, d = d, old_d - q * d
    return old_c * (1 if a >= 0 else -1), old_d * (1 if b >= 0 else -1)


@dataclass(frozen=True, order=True)
class Direction:
    a: int
    b: int

    def __post_init__(self):
        if (self.a, self.b) == (0, 0):
            raise ValueError("zero vector is not a direction")
        if math.gcd(self.a, self.b) != 1:
            raise ValueError(f"({self.a}, {self.b}) is not primitive")

    @classmethod
    def of(cls, x: int, y: int) -> "Direction":
        g = math.gcd(x, y)
        if g == 0:
            raise ValueError("zero vector is not a direction")
        return cls(x // g, y // g)

    @property
    def primitive(self):
        return (self.a, self.b)

    @property
    def rho(self) -> float:
        return 1.0 / math.hypot(self.a, self.b)

    @property
    def norm2(self) -> int:
        return self.a * self.a + self.b * self.b

    @property
    def perp(self):
        return (self.b, -self.a)

    @property
    def angle(self) -> float:
        return math.atan2(self.b, self.a) % (2 * math.pi)

    def __neg__(self):
        return Direction(-self.a, -self.b)

    def dot(self, v) -> int:
        return self.a * v[0] + self.b * v[1]

    def _bezout(self):
        return _bezout(self.a, self.b)

    def line_rep(self, n: int):
        """A site on the line ``a*x + b*y = n``."""
        c, d = self._bezout()
        return (n * c, n * d)

    def to_line(self):
        """Matrix (rows) sending a site to its line coordinates (s, t)."""
        c, d = self._bezout()
        return ((d, -c), (self.a, self.b))

    def from_line(self, s: int, t: int):
        c, d = self._bezout()
        return (s * self.b + t * c, -s * self.a + t * d)

    def line_coords(self, v):
        c, d = self._bezout()
        return (d * v[0] - c * v[1], self.a * v[0] + self.b * v[1])

    def __repr__(self):
        return f"Direction({self.a}, {self.b})"


def _half(u: Direction) -> int:
    return 0 if (u.b > 0 or (u.b == 0 and u.a > 0)) else 1


def _ccw_cmp(u: Direction, v: Direction) -> int:
    hu, hv = _half(u), _half(v)
    if hu != hv:
        return hu - hv
    cr = u.a * v.b - u.b * v.a
    return -1 if cr > 0 else (1 if cr < 0 else 0)


def sort_ccw(dirs) -> list[Direction]:
    return sorted(set(dirs), key=cmp_to_key(_ccw_cmp))


def cross(u: Direction, v: Direction) -> int:
    return u.a * v.b - u.b * v.a


def mediant(u: Direction, v: Direction) -> Direction:
    """A rational direction strictly inside the counterclockwise arc from u to v."""
    if cross(u, v) > 0:
        return Direction.of(u.a + v.a, u.b + v.b)
    # arc of at least a half turn: a quarter turn from u lies inside it
    return Direction(-u.b, u.a)


def all_gaps_below_half_turn(dirs) -> bool:
    """Whether every open semicircle contains one of ``dirs``."""
    ds = sort_ccw(dirs)
    if len(ds) < 3:
        return False
    return all(cross(ds[i], ds[(i + 1) % len(ds)]) > 0 for i in range(len(ds)))


# ---------------------------------------------------------------------------
# stability


def is_stable(F: UpdateFamily, u: Direction) -> bool:
    """False iff some rule lies inside the open half-plane of ``u``."""
    if F.threshold is not None:
        inside = sum(1 for v in F.threshold.offsets if u.dot(v) < 0)
        return inside < F.threshold.theta
    return not any(all(u.dot(v) < 0 for v in r) for r in F.explicit)


def quasi_stable_set(F: UpdateFamily) -> list[Direction]:
    dirs = set()
    for x, y in F.sites:
        d = Direction.of(y, -x)
        dirs.add(d)
        dirs.add(-d)
    return sort_ccw(dirs)


@dataclass(frozen=True)
class StableArc:
    start: Direction
    end: Direction
    full: bool = False


def stable_directions(F: UpdateFamily):
    """Isolated stable directions and maximal closed stable arcs."""
    S = quasi_stable_set(F)
    n = len(S)
    at = [is_stable(F, u) for u in S]
    arc = [is_stable(F, mediant(S[i], S[(i + 1) % n])) for i in range(n)]
    isolated = [S[i] for i in range(n) if at[i] and not arc[i - 1] and not arc[i]]
    arcs = []
    if all(arc):
        arcs.append(StableArc(S[0], S[0], True))
    elif any(arc):
        i0 = arc.index(False)
        i = 1
        while i <= n:
            k = (i0 + i) % n
            if arc[k]:
                j = i
                while arc[(i0 + j) % n]:
                    j += 1
                arcs.append(StableArc(S[k], S[(i0 + j) % n]))
                i = j
            else:
                i += 1
    return isolated, arcs


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Difficulty:
    kind: str  # "finite", "infinite" or "unknown"
    value: int | None = None
    bound: int | None = None

    @property
    def finite(self) -> bool:
        return self.kind == "finite"

    def to_json(self):
        if self.kind == "finite":
            return self.value
        if self.kind == "infinite":
            return "infinity"
        return {"unknown": True, "bound": self.bound}


@dataclass(frozen=True)
class Voracity:
    verdict: str  # "yes", "no", "inconclusive"
    witness: tuple | None = None
    reason: str = ""


@dataclass(frozen=True)
class Budget:
    max_size: int = 4
    window: int | None = None  # candidate range; default 3 * diameter
    time_cap: int = 64
    w_cap: int = 16
    period_cap: int = 4


@dataclass
class DirectionReport:
    direction: Direction
    stable: bool
    isolated: bool
    difficulty: Difficulty
    helping_sets: list = field(default_factory=list)
    voracious: Voracity | None = None
    w_width: int | None = None
    v_estimate: int | None = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        """Helping sets and witnesses are lattice sites with smallest line coordinate 0."""
        v = self.voracious
        out = {"direction": list(self.direction.primitive), "stable": self.stable,
               "isolated": self.isolated, "difficulty": self.difficulty.to_json(),
               "helping_sets": [[list(x) for x in H] for H in self.helping_sets],
               "voracious": None if v is None else {
                   "verdict": v.verdict, "reason": v.reason,
                   "witness": None if v.witness is None else [list(x) for x in v.witness]},
               "notes": list(self.notes)}
        if self.w_width is not None:
            out["w_width"] = self.w_width
        if self.v_estimate is not None:
            out["v_estimate"] = self.v_estimate
        return out


FAMILY_REPORT_SCHEMA = "bperc.family-report/1"


@dataclass
class FamilyReport:
    isolated: list
    arcs: list
    quasi_stable: list
    S_alpha: list
    alpha: int | None
    isotropic: bool | None
    symmetric: bool
    voracious: str
    directions: dict
    issues: list = field(default_factory=list)

    def report(self, u: Direction) -> DirectionReport:
        return self.directions[u]

    def to_json(self) -> dict:
        return {
            "schema": FAMILY_REPORT_SCHEMA,
            "stable_set": {"isolated": [list(u.primitive) for u in self.isolated],
                           "arcs": [[list(a.start.primitive), list(a.end.primitive)] for a in self.arcs]},
            "quasi_stable": [list(u.primitive) for u in self.quasi_stable],
            "S_alpha": [list(u.primitive) for u in self.S_alpha],
            "alpha": self.alpha,
            "isotropic": self.isotropic,
            "symmetric": self.symmetric,
            "voracious": self.voracious,
            "directions": [self.directions[u].to_json() for u in self.quasi_stable
                           if u in self.directions],
            "issues": list(self.issues),
        }


# ---------------------------------------------------------------------------
# half-plane simulations in line coordinates


UNKNOWN, FINITE, INFINITE = 0, 1, 2


class LineFrame:
    """The family seen from direction ``u`` in line coordinates."""

    def __init__(self, F: UpdateFamily, u: Direction, budget: Budget | None = None):
        self.F = F
        self.u = u
        self.budget = budget or Budget()
        self.G = F.transformed(u.to_line())
        self._rows = {}  # line-0 infection times of certified helping sets
        self.prog: Program = compile_clauses(self.G.clauses())
        self.R = max(1, self.prog.reach)
        w = self.budget.window
        self.cand = int(w) if w is not None else int(math.ceil(3 * F.diameter))
        if self.G.threshold is not None and is_symmetric(self.G):
            # candidates come from the neighbourhood itself, no search box needed
            self.half_width = 8 * self.R + 8
            self.height = 4 * self.R + 4
        else:
            self.half_width = 2 * self.cand + 6 * self.R + 8
            self.height = self.cand + 3 * self.R + 4

    # -- raw simulation -------------------------------------------------
    def run(self, sites, half_width=None, height=None, max_rounds=-1):
        """Closure of half-plane + sites on [-hw, hw] x [0, height)."""
        hw = self.half_width if half_width is None else half_width
        ht = self.height if height is None else height
        win = box(-hw, hw, 0, ht - 1, HalfPlane(0, 1, 0))
        state = np.zeros(win.shape, np.uint8)
        for s, t in sites:
            if t >= 0:
                state[t, s + hw] = 1
        times, rounds, sat = run_array(self.prog, state, win, max_rounds=max_rounds)
        return state, times

    # -- certificates ----------------------------------------------------
    def _settled_inside(self, state) -> bool:
        ny, nx = state.shape
        R = self.R
        if state[ny - R:, :].any():
            return False
        if state[:, :R].any() or state[:, nx - R:].any():
            return False
        return True

    def _translates(self, X, shift, height) -> bool:
        """Whether closure(half-plane + X) contains X shifted by ``shift`` along the line."""
        lo = min(s for s, _ in X)
        X = [(s - lo, t) for s, t in X]
        hw = max(s for s, _ in X) + abs(shift) + 3 * self.R + 2
        state, _ = self.run(X, half_width=hw, height=height)
        for s, t in X:
            if not state[t, s + shift + hw]:
                return False
        return True

    def propagates(self, state) -> bool:
        """Look for a band of the closure that infects its own translate."""
        ny, nx = state.shape
        R = self.R
        bw = 2 * R + 2
        hw = nx // 2
        ys, xs = np.nonzero(state)
        if len(xs) == 0:
            return False
        for side in (1, -1):
            for shift in range(1, self.budget.period_cap + 1):
                if side > 0:
                    b1 = nx - 2 * R - shift
                    b0 = b1 - bw
                else:
                    b0 = 2 * R + shift
                    b1 = b0 + bw
                if b0 < 0 or b1 > nx:
                    continue
                sel = (xs >= b0) & (xs < b1)
                if not sel.any():
                    continue
                X = [(int(x) - hw, int(y)) for x, y in zip(xs[sel], ys[sel])]
                if self._translates(X, side * shift, ny):
                    return True
        return False

    def verdict(self, Z):
        state, times = self.run(Z)
        if self._settled_inside(state):
            return FINITE, state, times
        if self.propagates(state):
            return INFINITE, state, times
        return UNKNOWN, state, times

    # -- enumeration -----------------------------------------------------
    def candidate_sets(self, k: int):
        """k-subsets of the candidate box with leftmost site at s = 0."""
        W = self.cand
        cells = [(s, t) for s in range(W + 1) for t in range(W + 1)]
        first = [c for c in cells if c[0] == 0]
        for f in first:
            rest = [c for c in cells if c > f]
            for combo in itertools.combinations(rest, k - 1):
                yield (f,) + combo

    @staticmethod
    def canonical(Z):
        m = min(s for s, _ in Z)
        return tuple(sorted((s - m, t) for s, t in Z))

    def to_sites(self, Z):
        return tuple(sorted(self.u.from_line(s, t) for s, t in Z))

    def threshold_candidates(self, k: int):
        """Candidate helping sets of size ``k`` for a symmetric threshold family.

        The first site infected outside the half-plane sees at most
        ``theta - k`` half-plane sites (exactly that many on line 0), so
        all ``k`` extra sites lie in its translated neighbourhood.
        """
        offs = self.G.threshold.offsets
        theta = self.G.threshold.theta
        tmax = max(t for _, t in offs)
        for line in range(0, tmax + 1):
            below = sum(1 for _, t in offs if t < -line)
            if theta - below > k:
                break
            pool = sorted({(s, t + line) for s, t in offs if t + line >= 0})
            for combo in itertools.combinations(pool, k):
                yield combo

    def search(self, max_size: int, exact: int | None = None):
        """Smallest certified size with the classes found at that size.

        Returns (difficulty, classes, complete).
        """
        sizes = [exact] if exact is not None else range(1, max_size + 1)
        undetermined_below = False
        for k in sizes:
            if k == 0:
                return Difficulty("finite", 0), [()], True
            found = {}
            unknown = 0
            use_threshold = self.G.threshold is not None and is_symmetric(self.G) and exact is not None
            gen = self.threshold_candidates(k) if use_threshold else self.candidate_sets(k)
            seen = set()
            for Z in gen:
                key = self.canonical(Z)
                if key in seen:
                    continue
                seen.add(key)
                v, _, times = self.verdict(key)
                if v == INFINITE:
                    found[key] = True
                    self._rows[key] = times[0].copy()
                elif v == UNKNOWN:
                    unknown += 1
            if found:
                classes = sorted(found)
                if undetermined_below:
                    return Difficulty("unknown", bound=k), classes, False
                return Difficulty("finite", k), classes, unknown == 0
            if unknown:
                undetermined_below = True
        return Difficulty("unknown", bound=max_size), [], False

    # -- W-helping sets and voracity ------------------------------------
    def w_width(self, cap: int) -> int | None:
        for W in range(1, cap + 1):
            seg = [(s, 0) for s in range(1, W + 1)]
            hw = W + 3 * self.R + 4
            state, _ = self.run(seg, half_width=hw, height=2 * self.R + 2)
            if state[0, 0 + hw] and state[0, W + 1 + hw]:
                return W
        return None

    @staticmethod
    def earliest_run(row_times: np.ndarray, W: int, time_cap: int) -> int | None:
        """Earliest time at which W consecutive sites of the row are infected."""
        t = np.where(row_times >= 0, row_times, np.iinfo(np.int64).max)
        if len(t) < W:
            return None
        worst = np.lib.stride_tricks.sliding_window_view(t, W).max(axis=1)
        best = int(worst.min())
        return best if best <= time_cap else None

    def stable_superset(self, state):
        """A stable periodic set containing ``state``, or None.

        Columns near each side of the window are repeated periodically to
        infinity; the result is checked to be a fixed point of one step,
        which by periodicity covers the whole half-plane complement.
        """
        ny, nx = state.shape
        R = self.R
        if state[ny - R:, :].any():
            return None
        for P in range(1, self.budget.period_cap + 1):
            g = 2 * R + P
            if nx <= 2 * g + 2 * P:
                return None
            ext = R + P
            G = np.zeros((ny, nx + 2 * ext), np.uint8)
            for c in range(G.shape[1]):
                oc = c - ext
                if oc < g:
                    src = g + (oc - g) % P
                elif oc >= nx - g:
                    base = nx - g - P
                    src = base + (oc - base) % P
                else:
                    src = oc
                G[:, c] = state[:, src]
            before = G.copy()
            hw = G.shape[1] // 2
            win = box(-hw, G.shape[1] - 1 - hw, 0, ny - 1, HalfPlane(0, 1, 0))
            run_array(self.prog, G, win, max_rounds=1)
            if np.array_equal(G[:, R:G.shape[1] - R], before[:, R:G.shape[1] - R]):
                return before
        return None

    def voracity(self, classes, W: int | None, time_cap: int):
        """(verdict, per-class generation times)."""
        if W is None:
            return Voracity("inconclusive", reason="no W-helping width within cap"), []
        gen_times = []
        for Z in classes:
            row = self._rows.get(Z)
            if row is None:
                row = self.run(Z)[1][0]
            gen = self.earliest_run(row, W, time_cap)
            if gen is not None:
                gen_times.append(gen)
                continue
            Y = self.stable_superset(self.run(Z)[0])
            if Y is not None and not Y[0].all():
                return Voracity("no", witness=self.to_sites(Z),
                                reason="closure stays inside a stable set missing part of the line"), []
            return Voracity("inconclusive", witness=self.to_sites(Z),
                            reason="no W-helping set within the time cap"), []
        return Voracity("yes"), gen_times


# ---------------------------------------------------------------------------
# public operations


def closed_form_difficulty(F: UpdateFamily, u: Direction) -> int:
    """max(0, theta - |K minus the line|/2) for a symmetric threshold family."""
    K = F.threshold.neighbourhood
    off_line = sum(1 for v in K if u.dot(v) != 0)
    return max(0, F.threshold.theta - off_line // 2)


def _is_isolated(F: UpdateFamily, u: Direction) -> bool:
    isolated, _ = stable_directions(F)
    return u in isolated


def difficulty(F: UpdateFamily, u: Direction, budget: Budget | None = None,
               method: str = "auto") -> Difficulty:
    """Difficulty of ``u``: 0 if unstable, infinity on stable arcs.

    ``method='search'`` forces the budgeted brute-force search even for
    threshold families.
    """
    budget = budget or Budget()
    if not is_stable(F, u):
        return Difficulty("finite", 0)
    if not _is_isolated(F, u):
        return Difficulty("infinite")
    if method == "auto" and F.threshold is not None and is_symmetric(F):
        return Difficulty("finite", closed_form_difficulty(F, u))
    d, _, _ = LineFrame(F, u, budget).search(budget.max_size)
    return d


def helping_sets(F: UpdateFamily, u: Direction, alpha: int | None = None,
                 budget: Budget | None = None) -> list:
    """Translation classes of helping sets, as sorted site tuples."""
    budget = budget or Budget()
    if not is_stable(F, u):
        return [()]
    if alpha is None:
        d = difficulty(F, u, budget)
        if not d.finite:
            raise ValueError(f"difficulty of {u} is not certified: {d}")
        alpha = d.value
    frame = LineFrame(F, u, budget)
    d, classes, _ = frame.search(budget.max_size, exact=alpha)
    if not d.finite:
        raise ValueError(f"no certified helping set of size {alpha} for {u}")
    return [frame.to_sites(Z) for Z in classes]


def w_helping_width(F: UpdateFamily, u: Direction, cap: int = 16) -> int | None:
    if cap < 1:
        return None
    return LineFrame(F, u).w_width(cap)


def check_voracity(F: UpdateFamily, u: Direction, time_cap: int = 64,
                   budget: Budget | None = None) -> Voracity:
    budget = budget or Budget()
    rep = analyze_direction(F, u, budget, time_cap=time_cap)
    return rep.voracious


def analyze_direction(F: UpdateFamily, u: Direction, budget: Budget | None = None,
                      isolated: bool | None = None, time_cap: int | None = None) -> DirectionReport:
    budget = budget or Budget()
    time_cap = budget.time_cap if time_cap is None else time_cap
    stable = is_stable(F, u)
    if not stable:
        return DirectionReport(u, False, False, Difficulty("finite", 0), [()])
    if isolated is None:
        isolated = _is_isolated(F, u)
    if not isolated:
        return DirectionReport(u, True, False, Difficulty("infinite"))
    frame = LineFrame(F, u, budget)
    threshold = F.threshold is not None and is_symmetric(F)
    if threshold:
        d = Difficulty("finite", closed_form_difficulty(F, u))
        d2, classes, complete = frame.search(budget.max_size, exact=d.value)
        if not d2.finite:
            rep = DirectionReport(u, True, True, d)
            rep.voracious = Voracity("inconclusive", reason="helping sets not certified")
            rep.notes.append("closed-form size gave no certified helping set")
            return rep
    else:
        d, classes, complete = frame.search(budget.max_size)
    rep = DirectionReport(u, True, True, d, [frame.to_sites(Z) for Z in classes])
    if not d.finite:
        rep.voracious = Voracity("inconclusive", reason="difficulty not certified")
        return rep
    if not complete:
        rep.notes.append("some candidate sets of this size were undetermined")
    rep.w_width = frame.w_width(budget.w_cap)
    rep.voracious, gen = frame.voracity(classes, rep.w_width, time_cap)
    if rep.voracious.verdict == "yes" and classes:
        side = max(max(max(s for s, _ in Z) + 1, max(t for _, t in Z) + 1) for Z in classes)
        rep.v_estimate = side + rep.w_width + max(gen)
    elif rep.w_width is not None and classes:
        side = max(max(max(s for s, _ in Z) + 1, max(t for _, t in Z) + 1) for Z in classes)
        rep.v_estimate = side + rep.w_width
    return rep


LATTICE_SYMMETRIES = [
    ((1, 0), (0, 1)), ((-1, 0), (0, -1)), ((0, -1), (1, 0)), ((0, 1), (-1, 0)),
    ((1, 0), (0, -1)), ((-1, 0), (0, 1)), ((0, 1), (1, 0)), ((0, -1), (-1, 0)),
]


def _apply(g, v):
    return (g[0][0] * v[0] + g[0][1] * v[1], g[1][0] * v[0] + g[1][1] * v[1])


def family_symmetries(F: UpdateFamily) -> list:
    """Signed permutations of the axes mapping the family to itself."""
    return [g for g in LATTICE_SYMMETRIES[1:] if F.transformed(g) == F]


def canonical_sites(u: Direction, Z) -> tuple:
    """Representative of the translation class of Z along the lines of u."""
    if not Z:
        return ()
    pts = [u.line_coords(v) for v in Z]
    m = min(s for s, _ in pts)
    return tuple(sorted(u.from_line(s - m, t) for s, t in pts))


def _map_report(rep: DirectionReport, g, v: Direction) -> DirectionReport:
    hs = sorted(canonical_sites(v, [_apply(g, z) for z in Z]) for Z in rep.helping_sets)
    vor = rep.voracious
    if vor is not None and vor.witness is not None:
        vor = Voracity(vor.verdict, canonical_sites(v, [_apply(g, z) for z in vor.witness]),
                       vor.reason)
    return DirectionReport(v, rep.stable, rep.isolated, rep.difficulty, hs, vor,
                           rep.w_width, rep.v_estimate, list(rep.notes) + ["mapped by symmetry"])


def analyze(F: UpdateFamily, budget: Budget | None = None) -> FamilyReport:
    budget = budget or Budget()
    S = quasi_stable_set(F)
    isolated, arcs = stable_directions(F)
    iso = set(isolated)
    reports = {}
    syms = family_symmetries(F)
    for u in S:
        if u in reports:
            continue
        rep = analyze_direction(F, u, budget, isolated=u in iso)
        reports[u] = rep
        for g in syms:
            v = Direction(*_apply(g, u.primitive))
            if v not in reports:
                reports[v] = _map_report(rep, g, v)
    issues = []
    diffs = {}
    for u in isolated:
        d = reports[u].difficulty
        if d.finite:
            diffs[u] = d.value
        else:
            issues.append(f"difficulty of {u} is {d.kind}")
    alpha = max(diffs.values()) if diffs and len(diffs) == len(isolated) else None
    S_alpha = [u for u in isolated if alpha is not None and diffs.get(u) == alpha]
    if arcs or not isolated:
        isotropic = False
    elif alpha is None:
        isotropic = None
    else:
        isotropic = all_gaps_below_half_turn(S_alpha)
    verdicts = [reports[u].voracious.verdict if reports[u].voracious else "inconclusive"
                for u in isolated]
    if any(v == "no" for v in verdicts):
        vor = "no"
    elif verdicts and all(v == "yes" for v in verdicts):
        vor = "yes"
    else:
        vor = "inconclusive"
        if verdicts:
            issues.append("voracity inconclusive for some direction")
    return FamilyReport(isolated, arcs, S, S_alpha, alpha, isotropic, is_symmetric(F),
                        vor, reports, issues)


def lemma_2_2(K, theta: int, u: Direction) -> bool:
    """Line conditions for an isolated stable direction of a convex threshold rule."""
    line = lambda n: [v for v in K if u.dot(v) == n]
    if not line(1):
        return False
    off_line = sum(1 for v in K if u.dot(v) != 0)
    alpha_u = max(0, theta - off_line // 2)
    if line(2) and len(line(1)) < alpha_u:
        return False
    return True


def threshold_isotropic(K, theta: int) -> bool:
    """|K| - iota < 2 theta < |K| with the maximum attained on two lines."""
    K = list(K)
    io = iota(K)
    counts: dict = {}
    for x, y in K:
        if (x, y) == (0, 0):
            continue
        d = Direction.of(x, y)
        if _half(d):
            d = -d
        counts[d] = counts.get(d, 0) + 1
    lines = sum(1 for c in counts.values() if c + 1 == io)
    return lines >= 2 and len(K) - io < 2 * theta < len(K)
