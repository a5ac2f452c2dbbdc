"""Work along droplet sequences and the variational constant lambda.

The work of growing ``D`` into ``D'`` is ``sum_u h^u(m_u) s_u`` over the
featured directions, where ``m`` is the dimension of ``D`` and ``s`` the
location of ``D`` in ``D'``.  The energy of a sequence is half the total
work, and lambda is the infimum of the energy over sequences that grow
from a point to the whole plane.

A finite sequence stands for a bi-infinite one: before its first droplet
the sequence continues by halving (``D/2, D/4, ...``) and after its last
by doubling.  ``sequence_energy`` sums both dyadic corrections until the
terms drop below ``1e-12``.

Arithmetic follows the degenerate-edge convention: ``h(0) = inf`` but an
edge with ``m_u = s_u = 0`` contributes exactly 0.  Directions whose
h is ``None`` are not featured and contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import isotonic_regression

from .droplets import (Droplet, DirectionFrame, DropletError, FloatGeometry, NotContained,
                       location, metrics, symmetric_droplet, normalize)

HEAD_TAIL_TOL = 1e-12
MAX_DYADIC = 4000


class DivergentTail(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, message, traces=None):
        super().__init__(message)
        self.traces = traces or []


# ---------------------------------------------------------------------------
# h functions


def _beta(w):
    return (w + np.sqrt(w * (4 - 3 * w))) / 2


def _two_neighbour(x, **_):
    return -np.log(_beta(-np.expm1(-x)))


def _log1mexp(x, c=1.0, **_):
    return -np.log(-np.expm1(-c * x))


def _constant(x, value=1.0, **_):
    return np.full_like(x, float(value))


ANALYTIC = {"two_neighbour": _two_neighbour, "log1mexp": _log1mexp, "constant": _constant}


class HFunction:
    """A positive nonincreasing function on (0, inf) with h(0) = inf.

    Build one with :meth:`analytic` or :meth:`from_table`.
    """

    def __init__(self, fn, source: dict):
        self._fn = fn
        self.source = source

    @classmethod
    def analytic(cls, name: str, **params) -> "HFunction":
        if name not in ANALYTIC:
            raise ValueError(f"unknown analytic h {name!r}; known: {sorted(ANALYTIC)}")
        f = ANALYTIC[name]
        return cls(lambda x: f(x, **params), {"analytic": name, "params": params})

    @classmethod
    def from_table(cls, table, envelope_c: float | None = None) -> "HFunction":
        """Monotone cubic interpolation of ``log h`` against ``log x``.

        The data are first made nonincreasing by weighted isotonic
        regression.  Below the sampled range h continues linearly in
        ``log x``; above it, h decays exponentially at the rate of the last
        two points.  Both extrapolations are clamped to the envelope
        ``-c log(1 - e^(-x/c)) <= h <= -log(1 - e^(-c x))`` when ``envelope_c``
        is given.
        """
        pts = sorted((e.x_eff if getattr(e, "x_eff", None) else e.x, e.h, e.ci)
                     for e in table.entries if e.usable and e.h is not None and e.h > 0)
        xs = np.array([p[0] for p in pts])
        if len(xs) < 2 or np.any(np.diff(xs) <= 0):
            raise ValueError("an h table needs at least two usable entries at distinct x")
        hs = np.array([p[1] for p in pts])
        w = np.array([1.0 / max((p[2][1] - p[2][0]) ** 2, 1e-12) if p[2] and math.isfinite(p[2][1])
                      else 1.0 for p in pts])
        w = w / w.max()
        hs = isotonic_regression(hs, weights=w, increasing=False).x
        hs = np.maximum(hs, 1e-300)
        lx, lh = np.log(xs), np.log(hs)
        spline = PchipInterpolator(lx, lh, extrapolate=False)
        slope = max((hs[0] - hs[1]) / (lx[1] - lx[0]), 0.0)
        rate = max((lh[-2] - lh[-1]) / (xs[-1] - xs[-2]), 1e-3)
        x0, h0, x1, h1 = xs[0], hs[0], xs[-1], hs[-1]

        def fn(x):
            out = np.empty_like(x)
            lo, hi = x < x0, x > x1
            mid = ~(lo | hi)
            out[mid] = np.exp(spline(np.log(x[mid])))
            out[lo] = h0 + slope * (np.log(x0) - np.log(x[lo]))
            out[hi] = h1 * np.exp(-rate * (x[hi] - x1))
            if envelope_c is not None:
                c = envelope_c
                ext = lo | hi
                lower = -c * np.log(-np.expm1(-x[ext] / c))
                upper = -np.log(-np.expm1(-c * x[ext]))
                out[ext] = np.minimum(np.maximum(out[ext], lower), upper)
            return out

        src = {"table": {"direction": list(table.direction.primitive), "p": table.p,
                         "x": xs.tolist(), "h": hs.tolist()},
               "interpolation": "pchip log-log, log-linear head, exponential tail",
               "envelope_c": envelope_c}
        return cls(fn, src)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        out = np.full(flat.shape, np.inf)
        pos = flat > 0
        if pos.any():
            out[pos] = self._fn(flat[pos])
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def integral(self, a: float = 0.0, b: float = math.inf) -> float:
        return integrate(self, a, b)

    def check(self, grid=None) -> list:
        """Problems with positivity, monotonicity or the tail; empty if fine."""
        grid = np.geomspace(1e-4, 50, 400) if grid is None else np.asarray(grid, float)
        v = self(grid)
        issues = []
        if not np.all(v > 0):
            issues.append("h is not positive on the grid")
        if np.any(np.diff(v) > 1e-12 * np.maximum(1, np.abs(v[:-1]))):
            issues.append("h is not nonincreasing on the grid")
        tail = self.integral(1.0, math.inf)
        if not math.isfinite(tail):
            issues.append("h is not integrable on [1, inf)")
        return issues

    def to_json(self):
        return self.source


def integrate(h, a: float = 0.0, b: float = math.inf) -> float:
    """Adaptive quadrature of a scalar function, splitting at 1 for the log singularity."""
    f = lambda x: float(h(np.array([x]))[0]) if x > 0 else math.inf  # noqa: E731
    total = 0.0
    pieces = [(a, min(b, 1.0)), (max(a, 1.0), b)]
    for lo, hi in pieces:
        if hi <= lo:
            continue
        val, _ = quad(f, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
        total += val
    return total


def _per_direction(frame: DirectionFrame, h):
    """List aligned with the frame; None marks an unfeatured direction."""
    if isinstance(h, HFunction) or callable(h) and not isinstance(h, (dict, list, tuple)):
        return [h] * len(frame)
    if isinstance(h, dict):
        return [h.get(u) for u in frame]
    hs = list(h)
    if len(hs) != len(frame):
        raise ValueError("one h per frame direction is required")
    return hs


# ---------------------------------------------------------------------------
# work


def _edge_cost(hu, m, s) -> float:
    if hu is None or s == 0:
        return 0.0
    if m == 0:
        return math.inf
    return float(hu(float(m))) * float(s)


def work(D1: Droplet, D2: Droplet, h) -> float:
    """``sum_u h^u(m_u) s_u`` for ``D1`` inside ``D2``."""
    if not D1 <= D2:
        bad = next(u for u, a, b in zip(D1.frame, D1.radii, D2.radii) if a > b)
        raise NotContained(bad, "first droplet is not inside the second")
    hs = _per_direction(D1.frame, h)
    s, _ = location(D1, D2)
    m = metrics(D1).dimension
    return math.fsum(_edge_cost(hu, mu, su) for hu, mu, su in zip(hs, m, s))


def work_p(D1: Droplet, D2: Droplet, h_p, p: float, alpha: float) -> float:
    """``p^alpha sum_u h_p^u(p^alpha m_u) s_u``."""
    if not D1 <= D2:
        bad = next(u for u, a, b in zip(D1.frame, D1.radii, D2.radii) if a > b)
        raise NotContained(bad, "first droplet is not inside the second")
    scale = p ** alpha
    hs = _per_direction(D1.frame, h_p)
    s, _ = location(D1, D2)
    m = metrics(D1).dimension
    return scale * math.fsum(_edge_cost(hu, scale * mu if mu else 0, su)
                             for hu, mu, su in zip(hs, m, s))


# ---------------------------------------------------------------------------
# float geometry shared by the sequence code


class _Geometry:
    def __init__(self, frame: DirectionFrame):
        self.frame = frame
        self.fg = FloatGeometry(frame)
        i, j, k, lam, mu = frame.dual_arrays
        order = np.argsort(i, kind="stable")
        self.i, self.j, self.k = i[order], j[order], k[order]
        self.lam, self.mu = lam[order], mu[order]
        self.targets, self.starts = np.unique(self.i, return_index=True)

    def normalize(self, A: np.ndarray) -> np.ndarray:
        out = A.copy()
        if len(self.i):
            cand = self.lam * A[..., self.j] + self.mu * A[..., self.k]
            best = np.minimum.reduceat(cand, self.starts, axis=-1)
            out[..., self.targets] = np.minimum(out[..., self.targets], best)
        return out

    def dimensions(self, A: np.ndarray) -> np.ndarray:
        return self.fg.dimensions(self.normalize(A))


def _hvals(hs, M: np.ndarray) -> np.ndarray:
    """h_u(M[..., u]) with unfeatured directions set to 0."""
    out = np.zeros_like(M)
    groups = {}
    for u, hu in enumerate(hs):
        if hu is not None:
            groups.setdefault(id(hu), (hu, []))[1].append(u)
    for hu, cols in groups.values():
        out[..., cols] = hu(M[..., cols])
    return out


def _costs(H: np.ndarray, S: np.ndarray, featured: np.ndarray) -> np.ndarray:
    """Elementwise h*s with 0*inf = 0 on s = 0 and unfeatured edges."""
    with np.errstate(invalid="ignore"):
        c = H * S
    return np.where((S == 0) | ~featured, 0.0, c)


# ---------------------------------------------------------------------------
# sequences


@dataclass
class DropletSequence:
    """Nondecreasing radii rows ``a^(0) <= ... <= a^(N)`` over one frame.

    ``shrink`` and ``growth`` are the homothety factors of the implicit
    head (before the first row) and tail (after the last).
    """

    frame: DirectionFrame
    radii: np.ndarray
    growth: float = 2.0
    shrink: float = 0.5

    def __post_init__(self):
        self.radii = np.atleast_2d(np.asarray(self.radii, dtype=float))
        if self.radii.shape[1] != len(self.frame):
            raise DropletError("radii rows do not match the frame")
        if np.any(np.diff(self.radii, axis=0) < 0):
            raise DropletError("sequence radii must be componentwise nondecreasing")
        if not (self.growth > 1 and 0 < self.shrink < 1):
            raise DropletError("need growth > 1 and 0 < shrink < 1")
        normalize(self.frame, [float(a) for a in self.radii[0]])

    def __len__(self):
        return len(self.radii)

    def droplet(self, i: int) -> Droplet:
        return Droplet(self.frame, tuple(_exact(a) for a in self.radii[i]))

    def to_json(self):
        return {"frame": self.frame.to_json(), "radii": self.radii.tolist(),
                "growth": self.growth, "shrink": self.shrink}

    @classmethod
    def from_json(cls, data) -> "DropletSequence":
        return cls(DirectionFrame.of([tuple(v) for v in data["frame"]]), np.array(data["radii"]),
                   data.get("growth", 2.0), data.get("shrink", 0.5))


def _exact(a: float):
    from fractions import Fraction
    return Fraction(a)


def _row_work(geo: _Geometry, hs, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    featured = np.array([hu is not None for hu in hs])
    M = geo.dimensions(A)
    return _costs(_hvals(hs, M), B - A, featured).sum(axis=-1)


def _homothety_sum(geo, hs, a, factor: float) -> float:
    """Work of continuing the droplet ``a`` by powers of ``factor``.

    ``factor < 1`` gives the head ``... f^2 a, f a, a`` and ``factor > 1``
    the tail ``a, f a, f^2 a, ...``.  Terms are summed until they fall
    below ``HEAD_TAIL_TOL`` (and, for tails, stop growing).
    """
    if np.any(a < 0):
        raise DropletError("dyadic continuation needs the droplet to contain the origin")
    if not np.any(a > 0):
        return 0.0
    featured = np.array([hu is not None for hu in hs])
    m1 = geo.dimensions(a[None])[0]
    total, k, prev = 0.0, 1.0, math.inf
    for _ in range(MAX_DYADIC):
        lo, hi = (k * factor, k) if factor < 1 else (k, k * factor)
        H = _hvals(hs, (lo * m1)[None])[0]
        term = float(_costs(H, ((hi - lo) * a)[None], featured[None]).sum())
        if not math.isfinite(term):
            return math.inf
        total += term
        if term < HEAD_TAIL_TOL and (factor < 1 or term <= prev):
            return total
        prev = term
        k *= factor
    raise DivergentTail("dyadic continuation does not converge; is h integrable?")


def sequence_energy(seq: DropletSequence, h) -> float:
    """Half the total work of the bi-infinite sequence represented by ``seq``."""
    hs = _per_direction(seq.frame, h)
    geo = _Geometry(seq.frame)
    A = seq.radii
    finite = float(_row_work(geo, hs, A[:-1], A[1:]).sum()) if len(A) > 1 else 0.0
    head = _homothety_sum(geo, hs, A[0], seq.shrink)
    tail = _homothety_sum(geo, hs, A[-1], seq.growth)
    return 0.5 * (head + finite + tail)


def lambda_upper_certificate(seq: DropletSequence, h) -> float:
    """Energy of an admissible sequence, an upper bound on lambda.

    The bound is rigorous up to the accuracy of h and of the floating
    point sums; the dyadic tails stop once terms fall below 1e-12.
    """
    return sequence_energy(seq, h)


def refine(seq: DropletSequence, t: float, relative: bool = False) -> DropletSequence:
    """Split every step into single-direction moves of size at most ``t``.

    Each move picks, round robin, a direction that still has to grow and
    whose current dimension is at least its dimension at the start of the
    step.  Move sizes are proportional to each direction's total growth so
    all directions finish together.  With h nonincreasing this never
    increases the energy.  With
    ``relative=True`` the move size is ``t`` times the current mean radius.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    geo = _Geometry(seq.frame)
    A = seq.radii
    n = A.shape[1]
    rows = [A[0].copy()]
    for a, b in zip(A[:-1], A[1:]):
        m0 = geo.dimensions(a[None])[0]
        share = (b - a) / max(float((b - a).max()), 1e-300)
        cur = a.copy()
        u = 0
        while True:
            rem = b - cur
            if not np.any(rem > 0):
                break
            m = geo.dimensions(cur[None])[0]
            ok = (rem > 0) & (m >= m0 - 1e-12 * np.maximum(1.0, m0))
            if not ok.any():
                rows.append(b.copy())
                break
            order = [(u + k) % n for k in range(n)]
            u = next(k for k in order if ok[k])
            step = t * max(float(np.abs(cur).mean()), 1e-300) if relative else t
            cur = cur.copy()
            cur[u] = min(b[u], cur[u] + step * share[u])
            if b[u] - cur[u] <= 1e-15 * max(1.0, abs(b[u])):
                cur[u] = b[u]
            rows.append(cur)
            u = (u + 1) % n
        if not np.array_equal(rows[-1], b):
            rows.append(b.copy())
    return DropletSequence(seq.frame, np.array(rows), seq.growth, seq.shrink)


# ---------------------------------------------------------------------------
# the optimizer


@dataclass
class SolverConfig:
    N: int = 48
    starts: int = 8
    seed: int = 0
    head_scale: float = 2.0 ** -20
    tail_scale: float | None = None  # default: smallest 2^k with negligible tail
    quad_nodes: int = 8
    max_sweeps: int = 100
    sweep_tol: float = 1e-7
    golden_iters: int = 32
    restarts: int = 2
    refine_t: float = 0.002
    workers: int = 1


@dataclass
class LambdaResult:
    value: float
    sequence: DropletSequence | None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        return {"lambda": self.value if math.isfinite(self.value) else "infinity",
                "sequence": self.sequence.to_json() if self.sequence is not None else None,
                "per_start_energies": self.diagnostics.get("per_start", []),
                "diagnostics": {k: v for k, v in self.diagnostics.items() if k != "per_start"}}


class _PathEnergy:
    """Energy of the piecewise linear radius path through the waypoints."""

    def __init__(self, geo, hs, nodes):
        self.geo, self.hs = geo, hs
        self.featured = np.array([hu is not None for hu in hs])
        s, w = np.polynomial.legendre.leggauss(nodes)
        self.s = (s + 1) / 2
        self.w = w / 2

    def segments(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Work of linear segments A -> B, shapes (..., n) -> (...)."""
        S = B - A
        R = A[..., None, :] + self.s[:, None] * S[..., None, :]
        H = _hvals(self.hs, self.geo.dimensions(R))
        avg = np.einsum("...qn,q->...n", np.where(np.isfinite(H), H, np.inf), self.w)
        return _costs(avg, S, self.featured).sum(axis=-1)

    def total(self, A: np.ndarray) -> float:
        return float(self.segments(A[:-1], A[1:]).sum())


def _subframe_radii(frame: DirectionFrame, featured, base_fn):
    """Radii over ``frame`` of a droplet built on the featured directions only."""
    sub = DirectionFrame.of([u for u, f in zip(frame, featured) if f])
    D = base_fn(sub)
    V = D.vertices
    return np.array([float(max(u.a * x + u.b * y for x, y in V)) for u in frame]), sub


def _support_rows(frame: DirectionFrame, sub: DirectionFrame, R: np.ndarray) -> np.ndarray:
    """Radii over ``frame`` of the ``sub``-droplets with radii rows ``R``."""
    geo = _Geometry(sub)
    X = geo.fg.vertices(geo.normalize(R))
    V = np.array([u.primitive for u in frame], dtype=float)
    out = (X @ V.T).max(axis=-2)
    return np.maximum.accumulate(out, axis=0)


def _base_droplet(sub: DirectionFrame):
    if sub.symmetric:
        return symmetric_droplet(sub, 1)
    return normalize(sub, [1] * len(sub))


def _start(k, base, geo, featured_idx, N, variant, rng):
    """Waypoint radii for start ``variant``: circular, then stretched ones."""
    i = np.arange(N + 2)
    A = k[:, None] * base[None, :]
    if variant > 0:
        bump = np.sin(np.pi * i / (N + 1))
        nf = len(featured_idx)
        amp = 0.25 * (1 + (variant - 1) // max(nf, 1))
        j0 = (variant - 1) % nf
        for off, d in enumerate(featured_idx):
            phase = math.cos(2 * math.pi * (off - j0) / nf)
            A[:, d] *= 1 + amp * phase * bump
        A[1:-1] *= np.exp(0.02 * rng.standard_normal(A[1:-1].shape))
    return _project(A)


def _project(A):
    A = A.copy()
    A[1:-1] = np.maximum(A[1:-1], 0)
    A = np.maximum.accumulate(A, axis=0)
    A = np.minimum(A, A[-1][None, :])
    return A


def _descend(A, energy: _PathEnergy, cfg: SolverConfig, featured_idx):
    N = len(A) - 2
    trace = [energy.total(A)]
    for _ in range(cfg.max_sweeps):
        for d in featured_idx + [u for u in range(A.shape[1]) if u not in featured_idx]:
            for parity in (1, 2):
                idx = np.arange(parity, N + 1, 2)
                if not len(idx):
                    continue
                prev, nxt = A[idx - 1], A[idx + 1]

                def local(x, idx=idx, prev=prev, nxt=nxt, d=d):
                    cur = A[idx].copy()
                    cur[:, d] = x
                    return energy.segments(prev, cur) + energy.segments(cur, nxt)

                lo, hi = prev[:, d], nxt[:, d]
                x = _golden_min(local, lo, hi, cfg.golden_iters)
                old = local(A[idx, d])
                new = local(x)
                better = new < old
                A[idx[better], d] = x[better]
        trace.append(energy.total(A))
        if trace[-2] - trace[-1] <= cfg.sweep_tol * max(1.0, abs(trace[-1])):
            break
    return A, trace


def _golden_min(f, lo, hi, iters):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo.astype(float).copy(), hi.astype(float).copy()
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc <= fd
        # left: keep [a, d], new c; right: keep [c, b], new d
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        new_c = b - g * (b - a)
        new_d = a + g * (b - a)
        x = np.where(left, new_c, new_d)
        fx = f(x)
        fd, fc = np.where(left, fc, fx), np.where(left, fx, fd)
        c, d = np.where(left, new_c, d), np.where(left, c, new_d)
    best = np.where(fc <= fd, c, d)
    return best


def _tail_scale(hs, featured_idx, geo, base, head):
    for k in 2.0 ** np.arange(0, 12):
        m = geo.dimensions((k * base)[None])[0]
        vals = [hs[u](max(m[u], 1e-300)) * k * base[u] for u in featured_idx]
        if max(vals) < 1e-10:
            return float(k)
    return float(2.0 ** 11)


def _run_start(j, frame, hs, cfg, base, featured_idx, k):
    geo = _Geometry(frame)
    energy = _PathEnergy(geo, hs, cfg.quad_nodes)
    rng = np.random.default_rng([cfg.seed, j])
    A = _start(k, base, geo, featured_idx, cfg.N, j, rng)
    A, trace = _descend(A, energy, cfg, featured_idx)
    best = trace[-1]
    for _ in range(cfg.restarts):
        B = A.copy()
        B[1:-1] *= np.exp(0.05 * rng.standard_normal(B[1:-1].shape))
        B, tr = _descend(_project(B), energy, cfg, featured_idx)
        trace.extend(tr)
        if tr[-1] < best:
            A, best = B, tr[-1]
    head = _homothety_sum(geo, hs, A[0], 0.5)
    tail = _homothety_sum(geo, hs, A[-1], 2.0)
    return A, 0.5 * (head + best + tail), trace


def minimize_lambda(frame: DirectionFrame, h, config: SolverConfig | None = None) -> LambdaResult:
    """Numerical infimum of the sequence energy over the frame.

    Waypoints between a tiny and a huge circular droplet are moved by
    coordinate descent with golden-section line searches; each coordinate
    stays between its neighbours so the radii remain nondecreasing.  The
    starts are the circular dyadic path and stretched variants, each
    followed by randomized restarts.  The best path is refined into
    single-direction moves and its exact sequence energy is returned.
    """
    cfg = config or SolverConfig()
    hs = _per_direction(frame, h)
    featured = [hu is not None for hu in hs]
    featured_idx = [i for i, f in enumerate(featured) if f]
    cfg_echo = asdict(cfg)
    if not featured_idx:
        return LambdaResult(math.inf, None, {"reason": "no featured directions", "config": cfg_echo})
    sub_dirs = [u for u, f in zip(frame, featured) if f]
    sub = DirectionFrame.of(sub_dirs)
    if not frame.bounded or not sub.bounded:
        return LambdaResult(math.inf, None, {
            "reason": "featured directions leave droplets unbounded; every sequence has infinite work",
            "config": cfg_echo})
    if len(sub) < len(frame):
        # unfeatured radii carry no work: solve over the featured directions
        # and report the smallest frame droplets containing each waypoint
        res = minimize_lambda(sub, [hu for hu in hs if hu is not None], cfg)
        rows = _support_rows(frame, sub, res.sequence.radii)
        seq = DropletSequence(frame, rows, res.sequence.growth, res.sequence.shrink)
        diag = dict(res.diagnostics, solved_on=sub.to_json())
        return LambdaResult(sequence_energy(seq, hs), seq, diag)
    base, _ = _subframe_radii(frame, featured, _base_droplet)
    geo = _Geometry(frame)
    head = cfg.head_scale
    tail = cfg.tail_scale or _tail_scale(hs, featured_idx, geo, base, head)
    k = head * (tail / head) ** (np.arange(cfg.N + 2) / (cfg.N + 1))

    jobs = range(cfg.starts)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            runs = list(ex.map(lambda j: _run_start(j, frame, hs, cfg, base, featured_idx, k), jobs))
    else:
        runs = [_run_start(j, frame, hs, cfg, base, featured_idx, k) for j in jobs]
    energies = [r[1] for r in runs]
    finite = [j for j, e in enumerate(energies) if math.isfinite(e)]
    if not finite:
        raise SolverError("every start has infinite energy", [r[2] for r in runs])
    j = min(finite, key=lambda i: (energies[i], i))
    A = runs[j][0]
    seq = refine(DropletSequence(frame, A), cfg.refine_t, relative=True)
    value = sequence_energy(seq, hs)
    diag = {"per_start": energies, "best_start": j, "path_energy": energies[j],
            "sweeps": [len(r[2]) for r in runs], "head_scale": head, "tail_scale": tail,
            "waypoints": A.tolist(), "refined_length": len(seq), "config": cfg_echo}
    return LambdaResult(value, seq, diag)
