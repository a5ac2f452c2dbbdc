"""Bootstrap dynamics on boxes and tori.

A site becomes infected at time t+1 when, for some rule, every rule site
translated to it is infected at time t.  Rules are compiled into clauses
``(offsets, need)``: a site activates when at least ``need`` of the
clause offsets are infected.  An explicit rule is the clause
``(rule, len(rule))`` and a threshold family is the single clause
``(K minus the origin, theta)``, so both share the same kernel.

Closure uses a frontier: after the first full scan only sites within
reach of a newly infected site are re-tested.  Configurations are stored
bit-packed; kernels work on one byte per site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .rng import stream_id, uniform_field
from .rules import UpdateFamily

INF = math.inf


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# windows and configurations


@dataclass(frozen=True)
class HalfPlane:
    """Sites with ``a*x + b*y < offset`` count as infected."""

    a: int
    b: int
    offset: int = 0

    def contains(self, x, y):
        return self.a * x + self.b * y < self.offset


@dataclass(frozen=True)
class Window:
    kind: str  # "box" or "torus"
    x0: int = 0
    x1: int = 0
    y0: int = 0
    y1: int = 0
    boundary: HalfPlane | None = None

    def __post_init__(self):
        if self.kind == "box":
            if self.x1 < self.x0 or self.y1 < self.y0:
                raise ValueError("box bounds must be ordered")
        elif self.kind == "torus":
            if self.x1 < 0 or self.y1 < 0:
                raise ValueError("torus sides must be >= 1")
            if self.boundary is not None:
                raise ValueError("a torus has no half-plane boundary")
        else:
            raise ValueError(f"unknown window kind {self.kind!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.y1 - self.y0 + 1, self.x1 - self.x0 + 1)

    def __contains__(self, site) -> bool:
        x, y = site
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


def box(x0: int, x1: int, y0: int, y1: int, boundary: HalfPlane | None = None) -> Window:
    return Window("box", x0, x1, y0, y1, boundary)


def torus(Lx: int, Ly: int | None = None) -> Window:
    Ly = Lx if Ly is None else Ly
    if Lx < 1 or Ly < 1:
        raise ValueError("torus sides must be >= 1")
    return Window("torus", 0, Lx - 1, 0, Ly - 1)


@dataclass(frozen=True)
class Configuration:
    window: Window
    bits: bytes

    @classmethod
    def from_array(cls, window: Window, arr) -> "Configuration":
        arr = np.asarray(arr, dtype=bool)
        if arr.shape != window.shape:
            raise ValueError(f"array shape {arr.shape} does not match window {window.shape}")
        return cls(window, np.packbits(arr, axis=None).tobytes())

    @classmethod
    def from_sites(cls, window: Window, sites) -> "Configuration":
        arr = np.zeros(window.shape, dtype=bool)
        for x, y in sites:
            if (x, y) not in window:
                raise DomainError(f"site {(x, y)} outside the window")
            arr[y - window.y0, x - window.x0] = True
        return cls.from_array(window, arr)

    @classmethod
    def empty(cls, window: Window) -> "Configuration":
        return cls.from_array(window, np.zeros(window.shape, dtype=bool))

    def to_array(self) -> np.ndarray:
        n = self.window.shape[0] * self.window.shape[1]
        flat = np.unpackbits(np.frombuffer(self.bits, dtype=np.uint8), count=n)
        return flat.reshape(self.window.shape).astype(bool)

    def sites(self) -> set:
        ys, xs = np.nonzero(self.to_array())
        return {(int(x) + self.window.x0, int(y) + self.window.y0) for x, y in zip(xs, ys)}

    def __contains__(self, site) -> bool:
        x, y = site
        if site in self.window:
            if self.to_array()[y - self.window.y0, x - self.window.x0]:
                return True
        hp = self.window.boundary
        return hp is not None and hp.contains(x, y)

    def __len__(self) -> int:
        return int(self.to_array().sum())


# ---------------------------------------------------------------------------
# compiled rules


@dataclass(frozen=True)
class Program:
    ox: np.ndarray
    oy: np.ndarray
    start: np.ndarray
    need: np.ndarray
    cx: np.ndarray  # candidate deltas: negated union of offsets
    cy: np.ndarray
    reach: int


def compile_clauses(clauses) -> Program:
    ox, oy, start, need = [], [], [0], []
    union = set()
    for offs, k in clauses:
        for x, y in offs:
            ox.append(x)
            oy.append(y)
            union.add((x, y))
        start.append(len(ox))
        need.append(k)
    cand = sorted((-x, -y) for x, y in union)
    reach = max((max(abs(x), abs(y)) for x, y in union), default=0)
    return Program(
        np.array(ox, np.int64), np.array(oy, np.int64), np.array(start, np.int64),
        np.array(need, np.int64), np.array([c[0] for c in cand], np.int64),
        np.array([c[1] for c in cand], np.int64), reach,
    )


@lru_cache(maxsize=256)
def compile_family(F: UpdateFamily) -> Program:
    return compile_clauses(F.clauses())


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _infected(state, jx, jy, torus, x0, y0, hp_on, ha, hb, hc):
    ny, nx = state.shape
    if torus:
        return state[jy % ny, jx % nx] != 0
    if 0 <= jx < nx and 0 <= jy < ny and state[jy, jx] != 0:
        return True
    if hp_on:
        return ha * (jx + x0) + hb * (jy + y0) < hc
    return False


@njit(cache=True)
def _active(state, ix, iy, torus, x0, y0, hp_on, ha, hb, hc, ox, oy, start, need):
    for c in range(need.shape[0]):
        lo = start[c]
        hi = start[c + 1]
        k = need[c]
        got = 0
        left = hi - lo
        for j in range(lo, hi):
            if _infected(state, ix + ox[j], iy + oy[j], torus, x0, y0, hp_on, ha, hb, hc):
                got += 1
                if got >= k:
                    return True
            left -= 1
            if got + left < k:
                break
    return False


@njit(cache=True)
def _run(state, times, torus, x0, y0, hp_on, ha, hb, hc, ox, oy, start, need,
         cx, cy, max_rounds, tx, ty):
    """Synchronous dynamics in place.  Returns (rounds, saturated).

    ``times`` receives the infection round of each new site.  Stops at the
    fixed point, after ``max_rounds`` rounds, or once (tx, ty) is infected
    (pass tx < 0 to disable).  ``saturated`` is True when a fixed point
    was reached.
    """
    ny, nx = state.shape
    if tx >= 0 and state[ty, tx] != 0:
        return 0, False
    mark = np.zeros((ny, nx), np.int64)
    nxt = np.empty(nx * ny, np.int64)
    cur = np.empty(nx * ny, np.int64)
    nn = 0
    for iy in range(ny):
        for ix in range(nx):
            if state[iy, ix] != 0:
                continue
            if hp_on and ha * (ix + x0) + hb * (iy + y0) < hc:
                continue
            if _active(state, ix, iy, torus, x0, y0, hp_on, ha, hb, hc, ox, oy, start, need):
                nxt[nn] = iy * nx + ix
                nn += 1
    t = 0
    while nn > 0:
        if t >= max_rounds:
            return t, False
        t += 1
        hit = False
        for k in range(nn):
            idx = nxt[k]
            iy = idx // nx
            ix = idx - iy * nx
            state[iy, ix] = 1
            times[iy, ix] = t
            cur[k] = idx
            if iy == ty and ix == tx:
                hit = True
        if hit:
            return t, False
        nc = nn
        nn = 0
        for k in range(nc):
            idx = cur[k]
            iy = idx // nx
            ix = idx - iy * nx
            for j in range(cx.shape[0]):
                jx = ix + cx[j]
                jy = iy + cy[j]
                if torus:
                    jx %= nx
                    jy %= ny
                elif jx < 0 or jx >= nx or jy < 0 or jy >= ny:
                    continue
                if state[jy, jx] != 0 or mark[jy, jx] == t:
                    continue
                mark[jy, jx] = t
                if hp_on and ha * (jx + x0) + hb * (jy + y0) < hc:
                    continue
                if _active(state, jx, jy, torus, x0, y0, hp_on, ha, hb, hc, ox, oy, start, need):
                    nxt[nn] = jy * nx + jx
                    nn += 1
    return t, True


def run_array(prog: Program, state: np.ndarray, window: Window, max_rounds: int = -1,
              target=None):
    """Run the dynamics in place on a uint8 array; returns (times, rounds, saturated).

    ``times`` holds 0 for initially infected sites, the infection round for
    later ones and -1 for sites never infected.
    """
    times = np.where(state != 0, 0, -1).astype(np.int64)
    hp = window.boundary
    tx = ty = -1
    if target is not None:
        tx, ty = target[0] - window.x0, target[1] - window.y0
    rounds, saturated = _run(
        state, times, window.kind == "torus", window.x0, window.y0,
        hp is not None, hp.a if hp else 0, hp.b if hp else 0, hp.offset if hp else 0,
        prog.ox, prog.oy, prog.start, prog.need, prog.cx, prog.cy,
        np.int64(max_rounds if max_rounds >= 0 else 2**62), tx, ty,
    )
    return times, rounds, saturated


def _state(C: Configuration) -> np.ndarray:
    return C.to_array().astype(np.uint8)


# ---------------------------------------------------------------------------
# public operations


def step(F: UpdateFamily, C: Configuration) -> Configuration:
    """One synchronous update."""
    state = _state(C)
    run_array(compile_family(F), state, C.window, max_rounds=1)
    return Configuration.from_array(C.window, state)


def closure(F: UpdateFamily, C: Configuration) -> Configuration:
    """Least fixed point of :func:`step` above ``C``."""
    state = _state(C)
    run_array(compile_family(F), state, C.window)
    return Configuration.from_array(C.window, state)


def infection_times(F: UpdateFamily, C: Configuration) -> np.ndarray:
    state = _state(C)
    times, _, _ = run_array(compile_family(F), state, C.window)
    return times


def infection_time(F: UpdateFamily, C: Configuration, target=(0, 0)):
    """First time ``target`` is infected, or ``inf`` if it never is."""
    target = tuple(target)
    if target not in C.window:
        raise DomainError(f"target {target} outside the window")
    if target in C:
        return 0
    state = _state(C)
    times, _, _ = run_array(compile_family(F), state, C.window, target=target)
    t = times[target[1] - C.window.y0, target[0] - C.window.x0]
    return int(t) if t >= 0 else INF


def tau_from_uniforms(F: UpdateFamily, u: np.ndarray, p: float):
    """Infection time of the origin on the torus of ``u.shape`` with A = {u < p}."""
    if p >= 1.0:
        return 0
    ny, nx = u.shape
    state = (u < p).astype(np.uint8)
    if state[0, 0]:
        return 0
    times, _, _ = run_array(compile_family(F), state, torus(nx, ny), target=(0, 0))
    return int(times[0, 0]) if times[0, 0] >= 0 else INF


def tau_uniforms(seed: int, rep: int, L: int) -> np.ndarray:
    return uniform_field(seed, rep, (L, L), stream=stream_id("tau"))


def sample_tau(F: UpdateFamily, p: float, L: int, seed: int, rep: int = 0):
    """Infection time of the origin for Bernoulli(p) infections on the L x L torus.

    The uniform field depends only on (seed, rep), so calls at different
    p with the same (seed, rep) are coupled.
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if L < 1:
        raise ValueError("L must be >= 1")
    if p >= 1.0:
        return 0
    return tau_from_uniforms(F, tau_uniforms(seed, rep, L), p)


def sample_tau_coupled(F: UpdateFamily, ps, L: int, seed: int, rep: int = 0) -> list:
    u = tau_uniforms(seed, rep, L)
    return [tau_from_uniforms(F, u, p) for p in ps]
