"""Independent reference values used by the tests."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def two_neighbour_transfer(m: int, n: int, p: float) -> float:
    """P(no two adjacent all-healthy columns among columns 0..n) for m-site columns.

    This is the occupied-lines event of the two-neighbour family in
    direction (1, 0): line j is occupied iff column j or j+1 has an
    infection.
    """
    if n == 0:
        return 1.0
    q = (1 - p) ** m
    M = np.array([[1 - q, q], [1 - q, 0.0]])
    v = np.array([1 - q, q])
    return float(v @ np.linalg.matrix_power(M, n) @ np.ones(2))


def two_neighbour_enumerate(m: int, n: int, p: float) -> float:
    """Same probability by brute force over all (n+1) x m configurations."""
    total = 0.0
    cells = (n + 1) * m
    for bits in itertools.product((0, 1), repeat=cells):
        cols = [any(bits[c * m:(c + 1) * m]) for c in range(n + 1)]
        if all(cols[j] or cols[j + 1] for j in range(n)):
            k = sum(bits)
            total += p ** k * (1 - p) ** (cells - k)
    return total


def two_neighbour_hp(x: float, p: float) -> float:
    """-log of the top eigenvalue of the transfer matrix at width round(x/p)."""
    q = (1 - p) ** round(x / p)
    return -math.log(((1 - q) + math.sqrt((1 - q) * (1 + 3 * q))) / 2)


def beta(w: float) -> float:
    return (w + math.sqrt(w * (4 - 3 * w))) / 2


def two_neighbour_h(x: float) -> float:
    return -math.log(beta(1 - math.exp(-x)))


def basel(terms: int = 10**6) -> float:
    """Partial sum of 1/k^2 plus the integral tail estimate."""
    k = np.arange(1, terms + 1, dtype=float)
    return float(np.sum(1.0 / k[::-1] ** 2) + 1.0 / terms - 0.5 / terms**2)


def naive_closure(F, state: np.ndarray, torus: bool = False) -> np.ndarray:
    """Full-rescan fixed point with numpy shifts; cells outside count healthy."""
    state = state.astype(bool).copy()
    ny, nx = state.shape
    rules = F.rules

    def shifted(a, dx, dy):
        if torus:
            return np.roll(np.roll(a, -dy, axis=0), -dx, axis=1)
        out = np.zeros_like(a)
        ys = slice(max(0, -dy), min(ny, ny - dy))
        xs = slice(max(0, -dx), min(nx, nx - dx))
        yd = slice(max(0, dy), min(ny, ny + dy))
        xd = slice(max(0, dx), min(nx, nx + dx))
        out[ys, xs] = a[yd, xd]
        return out

    while True:
        new = state.copy()
        for U in rules:
            acc = np.ones_like(state)
            for dx, dy in U:
                acc &= shifted(state, dx, dy)
            new |= acc
        if np.array_equal(new, state):
            return state
        state = new


def naive_threshold_closure(K, theta: int, state: np.ndarray) -> np.ndarray:
    """Full-rescan closure counting infected neighbours in K; box window."""
    state = state.astype(bool).copy()
    ny, nx = state.shape
    offsets = [v for v in K if v != (0, 0)]
    while True:
        pad = np.pad(state, 8).astype(np.int32)
        count = np.zeros_like(state, dtype=np.int32)
        for dx, dy in offsets:
            count += pad[8 + dy:8 + dy + ny, 8 + dx:8 + dx + nx]
        new = state | (count >= theta)
        if np.array_equal(new, state):
            return state
        state = new


def polygon_vertices(dirs, radii):
    """All feasible pairwise intersections of the lines <x,u> = a_u (exact)."""
    pts = set()
    for (u, a), (v, b) in itertools.combinations(zip(dirs, radii), 2):
        det = u[0] * v[1] - u[1] * v[0]
        if det == 0:
            continue
        x = (Fraction(a * v[1] - b * u[1], det), Fraction(u[0] * b - v[0] * a, det))
        if all(w[0] * x[0] + w[1] * x[1] <= c for w, c in zip(dirs, radii)):
            pts.add(x)
    return sorted(pts)


def brute_support(dirs, radii):
    """Tight radii by vertex enumeration, or None for an empty polygon."""
    V = polygon_vertices(dirs, radii)
    if not V:
        return None
    return [max(u[0] * x + u[1] * y for x, y in V) for u in dirs]


def brute_dimensions(dirs, radii):
    """Edge lengths in units of the direction norm, from the vertex list."""
    V = polygon_vertices(dirs, radii)
    out = []
    for u, a in zip(dirs, radii):
        on = [u[1] * x - u[0] * y for x, y in V if u[0] * x + u[1] * y == a]
        out.append(Fraction(max(on) - min(on), u[0] ** 2 + u[1] ** 2) if on else Fraction(0))
    return out
