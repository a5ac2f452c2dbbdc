import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bperc.analysis import Direction, stable_directions
from bperc.engine import (Configuration, DomainError, HalfPlane, box, closure, infection_time,
                          sample_tau, sample_tau_coupled, step, torus)
from bperc.fixtures import diagonal_family, ellipse_family, modified_two_neighbour, two_neighbour
from oracles import naive_closure, naive_threshold_closure

F2 = two_neighbour()


def test_step_examples():
    W = box(-2, 3, -2, 3)
    C = step(F2, Configuration.from_sites(W, [(0, 0), (1, 1)]))
    assert C.sites() == {(0, 0), (1, 1), (1, 0), (0, 1)}
    assert step(F2, Configuration.empty(W)).sites() == set()
    full = Configuration.from_array(W, np.ones(W.shape, bool))
    assert step(F2, full) == full


def test_closure_examples():
    W = box(-4, 4, -4, 4)
    C = closure(F2, Configuration.from_sites(W, [(0, 0), (1, 1)]))
    assert C.sites() == {(0, 0), (1, 0), (0, 1), (1, 1)}
    assert closure(F2, Configuration.empty(W)).sites() == set()


def test_halfplane_strip():
    # sites with x < 0 are infected; one extra site on column 0
    W = box(0, 5, -10, 9, boundary=HalfPlane(1, 0, 0))
    C = Configuration.from_sites(W, [(0, 0)])
    after = step(F2, C)
    assert {(0, 1), (0, -1)} <= after.sites()
    final = closure(F2, C).sites()
    assert all((0, y) in final for y in range(-10, 10))
    assert not any((1, y) in final for y in range(-10, 10))
    # adding one site on column 1 fills that column too
    final = closure(F2, Configuration.from_sites(W, [(0, 0), (1, 3)])).sites()
    assert all((1, y) in final for y in range(-10, 10))


def test_infection_time_examples():
    W = box(-6, 6, -6, 6)
    assert infection_time(F2, Configuration.from_sites(W, [(0, 0)])) == 0
    assert infection_time(F2, Configuration.from_sites(W, [(1, 0), (-1, 0)])) == 1
    assert infection_time(F2, Configuration.from_sites(W, [(5, 5)])) == math.inf
    with pytest.raises(DomainError):
        infection_time(F2, Configuration.empty(W), (7, 0))


def test_sample_tau_contract():
    assert sample_tau(F2, 1.0, 16, seed=3) == 0
    t = sample_tau(F2, 0.2, 256, seed=11)
    assert t == sample_tau(F2, 0.2, 256, seed=11)
    hi, lo = sample_tau_coupled(F2, [0.15, 0.10], 256, seed=11)
    assert hi <= lo
    assert sample_tau_coupled(F2, [0.15], 256, seed=11, rep=2)[0] == sample_tau(F2, 0.15, 256, 11, rep=2)


@pytest.mark.parametrize("F", [two_neighbour(), modified_two_neighbour(), diagonal_family()],
                         ids=["2nb", "mod2nb", "diag"])
def test_frontier_matches_naive(F):
    rng = np.random.default_rng(5)
    W = box(0, 63, 0, 63)
    for _ in range(5):
        arr = rng.random(W.shape) < 0.08
        got = closure(F, Configuration.from_array(W, arr)).to_array()
        assert np.array_equal(got, naive_closure(F, arr))


def test_frontier_matches_naive_threshold():
    F = ellipse_family()
    K = F.threshold.neighbourhood
    rng = np.random.default_rng(7)
    W = box(0, 63, 0, 63)
    for p in (0.3, 0.4, 0.45):
        arr = rng.random(W.shape) < p
        got = closure(F, Configuration.from_array(W, arr)).to_array()
        assert np.array_equal(got, naive_threshold_closure(K, F.threshold.theta, arr))


def test_frontier_matches_naive_torus():
    rng = np.random.default_rng(6)
    W = torus(48, 40)
    for _ in range(5):
        arr = rng.random(W.shape) < 0.06
        got = closure(F2, Configuration.from_array(W, arr)).to_array()
        assert np.array_equal(got, naive_closure(F2, arr, torus=True))


grids = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).random((24, 24)))


@given(grids, st.floats(0.0, 0.3))
@settings(max_examples=60, deadline=None)
def test_closure_monotone_and_idempotent(u, p):
    W = box(0, 23, 0, 23)
    A = u < p
    B = u < p + 0.05
    cA = closure(F2, Configuration.from_array(W, A))
    cB = closure(F2, Configuration.from_array(W, B))
    a, b = cA.to_array(), cB.to_array()
    assert not np.any(a & ~b)
    assert closure(F2, cA) == cA
    assert step(F2, cA) == cA
    assert np.all(a >= A)


def test_stable_halfplanes_are_fixed_points():
    F = ellipse_family()
    isolated, _ = stable_directions(F)
    for u in isolated:
        W = box(-20, 20, -20, 20)
        arr = np.zeros(W.shape, bool)
        ys, xs = np.mgrid[-20:21, -20:21]
        arr[(u.a * xs + u.b * ys) < 0] = True
        after = step(F, Configuration.from_array(W, arr)).to_array()
        r = F.diameter
        interior = (np.abs(xs) <= 20 - r) & (np.abs(ys) <= 20 - r)
        assert np.array_equal(after[interior], arr[interior]), u


def test_unstable_direction_spreads():
    u = Direction(1, 1)
    W = box(-10, 10, -10, 10)
    ys, xs = np.mgrid[-10:11, -10:11]
    arr = (u.a * xs + u.b * ys) < 0
    after = step(F2, Configuration.from_array(W, arr)).to_array()
    assert after.sum() > arr.sum()
