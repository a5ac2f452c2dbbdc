"""Polygonal droplets over a fixed set of directions.

A droplet is ``{x : <x, v> <= a_v for every frame direction v}`` where
``v`` is the primitive integer vector of the direction, so radii are
measured in line indices.  The dimension ``m_v`` of the ``v``-edge is its
length in units of the integer step ``perp(v)`` along the edge, a lattice
site count for lattice edges.

Everything is exact: radii are Fractions and vertices are solved by
Cramer's rule.  Points and segments are legal droplets (the polygon is
closed), so the sequence ``D[k]`` really starts at ``{0}``.

Normalization uses LP duality.  The support value of the polygon in a
frame direction ``v_i`` is attained with at most two active constraints,
so it equals ``min(a_i, min lam*a_j + mu*a_k)`` over frame pairs with
``v_i = lam*v_j + mu*v_k``, ``lam, mu >= 0``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .analysis import Direction, all_gaps_below_half_turn, cross, sort_ccw


class DropletError(ValueError):
    pass


class EmptyDroplet(DropletError):
    pass


class FrameMismatch(DropletError):
    pass


class NotContained(DropletError):
    def __init__(self, direction, message=""):
        super().__init__(message or f"containment fails in direction {direction}")
        self.direction = direction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DropletError("radii must be finite")
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class DirectionFrame:
    dirs: tuple
    tag: str = "S"

    def __post_init__(self):
        if not self.dirs:
            raise DropletError("empty direction frame")
        if len(set(self.dirs)) != len(self.dirs):
            raise DropletError("repeated direction in frame")
        if list(self.dirs) != sort_ccw(self.dirs):
            raise DropletError("frame directions must be in counterclockwise order")

    @classmethod
    def of(cls, dirs, tag: str = "S") -> "DirectionFrame":
        ds = [d if isinstance(d, Direction) else Direction.of(*d) for d in dirs]
        return cls(tuple(sort_ccw(set(ds))), tag)

    @classmethod
    def axes(cls, tag: str = "S") -> "DirectionFrame":
        return cls.of([(1, 0), (0, 1), (-1, 0), (0, -1)], tag)

    @classmethod
    def octagonal(cls, tag: str = "S") -> "DirectionFrame":
        return cls.of([(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)], tag)

    def __len__(self):
        return len(self.dirs)

    def __iter__(self):
        return iter(self.dirs)

    def index(self, u) -> int:
        return self.dirs.index(u if isinstance(u, Direction) else Direction.of(*u))

    @property
    def symmetric(self) -> bool:
        return all(-u in self.dirs for u in self.dirs)

    @property
    def bounded(self) -> bool:
        """Every droplet over the frame is bounded."""
        return len(self.dirs) >= 3 and all_gaps_below_half_turn(self.dirs)

    @cached_property
    def dual_pairs(self):
        """(i, j, k, lam, mu) with v_i = lam*v_j + mu*v_k and lam, mu >= 0."""
        out = []
        n = len(self.dirs)
        for i, vi in enumerate(self.dirs):
            for j in range(n):
                for k in range(j + 1, n):
                    vj, vk = self.dirs[j], self.dirs[k]
                    det = cross(vj, vk)
                    if det == 0 or i in (j, k):
                        continue
                    lam = Fraction(vi.a * vk.b - vi.b * vk.a, det)
                    mu = Fraction(vj.a * vi.b - vj.b * vi.a, det)
                    if lam >= 0 and mu >= 0:
                        out.append((i, j, k, lam, mu))
        return out

    @cached_property
    def dual_arrays(self):
        if not self.dual_pairs:
            e = np.zeros(0, np.int64)
            return e, e, e, np.zeros(0), np.zeros(0)
        i, j, k, lam, mu = zip(*self.dual_pairs)
        return (np.array(i), np.array(j), np.array(k),
                np.array([float(x) for x in lam]), np.array([float(x) for x in mu]))

    def to_json(self):
        return [list(u.primitive) for u in self.dirs]


def _intersect(u: Direction, a, v: Direction, b):
    """The point with <x,u> = a and <x,v> = b (u, v not parallel)."""
    det = cross(u, v)
    return (Fraction(a * v.b - b * u.b, det), Fraction(u.a * b - v.a * a, det))


def _support(frame: DirectionFrame, radii) -> list:
    out = list(radii)
    for i, j, k, lam, mu in frame.dual_pairs:
        val = lam * radii[j] + mu * radii[k]
        if val < out[i]:
            out[i] = val
    return out


def _vertices(frame: DirectionFrame, radii) -> list:
    """Consecutive-line intersections of normalized radii (with repeats)."""
    n = len(frame)
    return [_intersect(frame.dirs[i], radii[i], frame.dirs[(i + 1) % n], radii[(i + 1) % n])
            for i in range(n)]


@dataclass(frozen=True)
class DropletMetrics:
    dimension: tuple
    perimeter: Fraction

    def as_floats(self):
        return [float(m) for m in self.dimension], float(self.perimeter)


@dataclass(frozen=True)
class Droplet:
    frame: DirectionFrame
    radii: tuple

    def __post_init__(self):
        if len(self.radii) != len(self.frame):
            raise DropletError("radii length does not match the frame")

    @cached_property
    def vertices(self) -> list:
        return _vertices(self.frame, self.radii)

    def contains_point(self, x) -> bool:
        return all(u.a * x[0] + u.b * x[1] <= a for u, a in zip(self.frame, self.radii))

    def __le__(self, other: "Droplet") -> bool:
        _same_frame(self, other)
        return all(a <= b for a, b in zip(self.radii, other.radii))

    def __add__(self, other: "Droplet") -> "Droplet":
        return minkowski_sum(self, other)

    def metrics(self) -> DropletMetrics:
        return metrics(self)

    def to_json(self):
        return {"frame": self.frame.to_json(), "radii": [_frac_json(a) for a in self.radii]}


def _frac_json(a: Fraction):
    return a.numerator if a.denominator == 1 else f"{a.numerator}/{a.denominator}"


def _same_frame(*ds):
    f = ds[0].frame.dirs
    for d in ds[1:]:
        if d.frame.dirs != f:
            raise FrameMismatch("droplets use different frames")


def normalize(frame: DirectionFrame, radii) -> Droplet:
    """The droplet with tight radii; raises EmptyDroplet if the polygon is empty."""
    if not frame.bounded:
        raise DropletError("frame has a gap of at least a half turn; droplets are unbounded")
    radii = [_frac(a) for a in radii]
    if len(radii) != len(frame):
        raise DropletError("radii length does not match the frame")
    tight = _support(frame, radii)
    for x in _vertices(frame, tight):
        for u, a in zip(frame, radii):
            if u.a * x[0] + u.b * x[1] > a:
                raise EmptyDroplet("the half-planes have empty intersection")
    return Droplet(frame, tuple(tight))


def metrics(D: Droplet) -> DropletMetrics:
    n = len(D.frame)
    V = D.vertices
    dims = []
    for i, u in enumerate(D.frame):
        p, q = V[i - 1], V[i]  # ends of the edge of u, walked counterclockwise
        dims.append(((q[0] - p[0]) * -u.b + (q[1] - p[1]) * u.a) / u.norm2)
    if n and any(m < 0 for m in dims):
        raise DropletError("radii are not normalized")
    return DropletMetrics(tuple(dims), sum(dims, Fraction(0)))


def minkowski_sum(D1: Droplet, D2: Droplet) -> Droplet:
    _same_frame(D1, D2)
    return Droplet(D1.frame, tuple(a + b for a, b in zip(D1.radii, D2.radii)))


def span(*ds: Droplet) -> Droplet:
    """Smallest droplet containing all arguments."""
    if not ds:
        raise DropletError("span of nothing")
    _same_frame(*ds)
    return normalize(ds[0].frame, [max(col) for col in zip(*(d.radii for d in ds))])


def point_droplet(frame: DirectionFrame, x=(0, 0)) -> Droplet:
    return Droplet(frame, tuple(Fraction(u.a * x[0] + u.b * x[1]) for u in frame))


def covering_droplet(frame: DirectionFrame, sites) -> Droplet:
    """Smallest droplet containing a finite set of points."""
    sites = list(sites)
    if not sites:
        raise EmptyDroplet("no sites to cover")
    return normalize(frame, [max(Fraction(u.a * x + u.b * y) for x, y in sites) for u in frame])


def symmetric_droplet(frame: DirectionFrame, k) -> Droplet:
    """The centred droplet whose every edge has dimension ``k``."""
    if not frame.symmetric:
        raise DropletError("symmetric droplets need a frame closed under negation")
    k = _frac(k)
    if k < 0:
        raise DropletError("k must be nonnegative")
    x = (Fraction(0), Fraction(0))
    pts = []
    for u in frame:
        pts.append(x)
        x = (x[0] - k * u.b, x[1] + k * u.a)
    if x != (0, 0):
        raise DropletError("vertex walk does not close")
    c = (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))
    return normalize(frame, [max(u.a * (p[0] - c[0]) + u.b * (p[1] - c[1]) for p in pts)
                             for u in frame])


def location(D1: Droplet, D2: Droplet):
    """(s, Psi) for D1 inside D2."""
    _same_frame(D1, D2)
    s = []
    for u, a, b in zip(D1.frame, D1.radii, D2.radii):
        if a > b:
            raise NotContained(u)
        s.append(b - a)
    return tuple(s), sum(s, Fraction(0))


def droplet_from_json(data) -> Droplet:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        frame = DirectionFrame.of([tuple(v) for v in data["frame"]], data.get("tag", "S"))
        pairs = sorted(zip([Direction.of(*v) for v in data["frame"]],
                           [Fraction(str(r)) for r in data["radii"]]),
                       key=lambda p: frame.index(p[0]))
    except (KeyError, TypeError, ValueError) as e:
        raise DropletError(f"malformed droplet: {e}") from e
    if len(pairs) != len(frame):
        raise DropletError("frame and radii lengths differ")
    return normalize(frame, [r for _, r in pairs])


# ---------------------------------------------------------------------------
# float fast path for the optimizer


def normalize_float(frame: DirectionFrame, radii: np.ndarray) -> np.ndarray:
    """Tight radii in floating point (assumes a non-empty droplet)."""
    a = np.array(radii, dtype=float)
    i, j, k, lam, mu = frame.dual_arrays
    if len(i):
        np.minimum.at(a, i, lam * a[j] + mu * a[k])
    return a


class FloatGeometry:
    """Vectorized dimensions for many radii rows over one frame."""

    def __init__(self, frame: DirectionFrame):
        self.frame = frame
        V = np.array([u.primitive for u in frame], dtype=float)
        self.V = V
        self.n = len(V)
        nxt = np.roll(np.arange(self.n), -1)
        self.nxt = nxt
        self.prv = np.roll(np.arange(self.n), 1)
        self.det = V[:, 0] * V[nxt, 1] - V[:, 1] * V[nxt, 0]
        self.norm2 = (V ** 2).sum(axis=1)

    def vertices(self, A: np.ndarray) -> np.ndarray:
        """Array (..., n, 2): intersection of lines i and i+1."""
        V, nxt = self.V, self.nxt
        a, b = A, A[..., nxt]
        x = (a * V[nxt, 1] - b * V[:, 1]) / self.det
        y = (V[:, 0] * b - V[nxt, 0] * a) / self.det
        return np.stack([x, y], axis=-1)

    def dimensions(self, A: np.ndarray) -> np.ndarray:
        X = self.vertices(A)
        d = X - X[..., self.prv, :]
        m = (-d[..., 0] * self.V[:, 1] + d[..., 1] * self.V[:, 0]) / self.norm2
        return np.maximum(m, 0.0)


# ---------------------------------------------------------------------------
# spanning diagnostics


def _components(sites: np.ndarray, radius: float):
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components
    from scipy.spatial import cKDTree

    n = len(sites)
    pairs = cKDTree(sites).query_pairs(radius + 1e-9, output_type="ndarray") if n else np.zeros((0, 2), int)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    return labels, pairs


def _closed_sites(F, A, margin: int):
    from .engine import box, Configuration, closure

    A = list(A)
    xs = [x for x, _ in A]
    ys = [y for _, y in A]
    win = box(min(xs) - margin, max(xs) + margin, min(ys) - margin, max(ys) + margin)
    return sorted(closure(F, Configuration.from_sites(win, A)).sites())


def spanned_diagnostics(F, A, frame: DirectionFrame, K_conn: float, margin: int | None = None):
    """Connected pieces of the closure of A with their covering droplets.

    The closure is computed on a box around A with the given margin
    (default: four times the family diameter).
    """
    A = list(A)
    if not A:
        return []
    margin = int(math.ceil(4 * F.diameter)) if margin is None else margin
    sites = _closed_sites(F, A, margin)
    arr = np.array(sites, dtype=float)
    labels, _ = _components(arr, K_conn)
    out = []
    for c in sorted(set(labels.tolist())):
        comp = [sites[i] for i in np.nonzero(labels == c)[0]]
        out.append((comp, covering_droplet(frame, comp)))
    out.sort(key=lambda p: p[0][0])
    return out


def is_spanned(diagnostics, D: Droplet) -> bool:
    return any(D <= cover for _, cover in diagnostics)


def merge_hierarchy(sites, frame: DirectionFrame, K_conn: float) -> list:
    """Droplets created while merging K-connected clusters of ``sites``.

    Every returned droplet is the covering droplet of a K-connected subset
    of the sites, hence spanned by it.  Merges follow the sorted list of
    close pairs, so the output is deterministic.
    """
    sites = sorted(set(map(tuple, sites)))
    if not sites:
        return []
    _, pairs = _components(np.array(sites, dtype=float), K_conn)
    parent = list(range(len(sites)))
    drops = [point_droplet(frame, s) for s in sites]

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    made = list(drops)
    for i, j in sorted(map(tuple, pairs.tolist())):
        ri, rj = root(i), root(j)
        if ri == rj:
            continue
        parent[rj] = ri
        drops[ri] = span(drops[ri], drops[rj])
        made.append(drops[ri])
    return made
