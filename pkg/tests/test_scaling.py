import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bperc.analysis import Direction
from bperc.droplets import DirectionFrame, normalize
from bperc.fixtures import two_neighbour
from bperc.scaling import (HEntry, HTable, PreconditionError, Rectangle, direction_data,
                           envelope_feasibility, estimate_h, growth_rectangles, h_limit_table,
                           is_traversable, lattice_sites, line_occupied, monotone_violations,
                           occupied_curve, prob_A_mc, rectangle_filled, verify_growth_event)
from oracles import two_neighbour_h, two_neighbour_hp, two_neighbour_transfer

F2 = two_neighbour()
E1 = Direction(1, 0)


@given(st.integers(-4, 4).filter(lambda a: a != 0), st.integers(-4, 4), st.integers(1, 6),
       st.integers(0, 5))
def test_rectangle_lines(a, b, m, n):
    if math.gcd(a, b) != 1:
        return
    u = Direction(a, b)
    R = Rectangle(u, m, n, anchor=(2, -1))
    sites = R.sites()
    assert len(set(sites)) == m * n
    assert all(x in R for x in sites)
    for t in range(n):
        assert all(u.dot((x - 2, y + 1)) == t for x, y in R.line_sites(t))


def test_line_occupied_width_two():
    # line 0 is occupied iff one of the 4 sites of columns 0-1 in the window is infected
    R = Rectangle(E1, 2, 2)
    window = R.line_sites(0) + R.line_sites(1)
    for bits in itertools.product((0, 1), repeat=4):
        A = {s for s, b in zip(window, bits) if b}
        assert line_occupied(F2, E1, 0, A, 2) == bool(A)
    assert not line_occupied(F2, E1, 0, set(), 2)


def test_prob_small_cases():
    assert prob_A_mc(F2, E1, 5, 0, 0.3, 10, seed=0).estimate == 1.0
    r = prob_A_mc(F2, E1, 2, 1, 0.5, 20000, seed=0)
    assert abs(r.estimate - 0.9375) <= 3 * math.sqrt(0.9375 * 0.0625 / r.reps)
    assert r.ci[0] <= 0.9375 <= r.ci[1]


def test_prob_against_transfer():
    r = prob_A_mc(F2, E1, 10, 60, 0.1, 40000, seed=4)
    ref = two_neighbour_transfer(10, 60, 0.1)
    se = math.sqrt(ref * (1 - ref) / r.reps)
    assert abs(r.estimate - ref) <= 3 * se


def test_width_precondition():
    with pytest.raises(PreconditionError):
        prob_A_mc(F2, Direction(1, 1), 4, 2, 0.1, 10, seed=0)


def test_curve_is_reproducible_and_nonincreasing():
    c1 = occupied_curve(F2, E1, 8, 30, 0.1, 500, seed=9)
    assert np.array_equal(c1, occupied_curve(F2, E1, 8, 30, 0.1, 500, seed=9))
    assert np.all(np.diff(c1) <= 0)


def test_multiplicativity():
    # v(n) v(n') <= v(n + n') <= v(n - C) v(n') with reach C = helping-set height
    reps = 40000
    v = occupied_curve(F2, E1, 6, 40, 0.15, reps, seed=5) / reps
    se = np.sqrt(v * (1 - v) / reps)
    C = direction_data(F2, E1).height + 1
    for n, k in [(5, 5), (10, 8), (12, 15)]:
        tol = 3 * (se[n + k] + se[n] + se[k])
        assert v[n] * v[k] <= v[n + k] + tol
        assert v[n + k] <= v[n - C] * v[k] + tol


def test_estimate_h_matches_transfer():
    T = estimate_h(F2, E1, 0.1, [1.0], None, 2000, seed=1)
    e = T.entries[0]
    ref = two_neighbour_hp(1.0, 0.1)
    assert ref == pytest.approx(0.102, abs=5e-4)
    assert e.ci[0] <= ref <= e.ci[1]


def test_estimate_h_ratio_and_envelope():
    xs = np.geomspace(0.2, 3, 6)
    T = estimate_h(F2, E1, 0.05, xs, None, 400, seed=3, estimator="ratio", site_budget=10**6)
    assert all(e.usable for e in T.entries)
    assert monotone_violations(T) == []
    for e in T.entries:
        assert e.ci[0] - 0.05 * e.h <= two_neighbour_hp(e.x_eff, 0.05) <= e.ci[1] + 0.05 * e.h
    env = envelope_feasibility(T)
    assert env.feasible and env.c_best > 0
    assert HTable.from_json(T.to_json()).to_json() == T.to_json()


def test_envelope_exact_finite_p_table():
    # exact h_p at the simulated widths, including the single-column entry
    p = 0.08
    ms = [1, 2, 3, 5, 7, 9, 13, 18, 26, 36, 50]
    entries = []
    for m in ms:
        h = two_neighbour_hp(m * p, p)
        entries.append(HEntry(m * p, m, 1, h, (h * 0.99, h * 1.01), 1, 1, True, "", m * p))
    env = envelope_feasibility(HTable(E1, p, 1, entries))
    assert env.feasible
    # every accepted c leaves the narrowest entry outside its claimed range
    assert all(ms[0] * p < p / c for c in env.c_values) or env.c_best >= 1


def test_envelope_rejects_rising_and_single_entry():
    # large h at x=4 needs a tiny c, which the near-zero h at x=0.001 rules out
    pts = [(0.001, 1e-6), (1.0, 1.0), (4.0, 5.0)]
    rising = [HEntry(x, 1, 1, h, (h * 0.99, h * 1.01), 1, 1, True, "", x) for x, h in pts]
    assert not envelope_feasibility(HTable(E1, 0.0, 1, rising)).feasible
    assert not envelope_feasibility(HTable(E1, 0.05, 1, rising[1:2])).feasible


def test_unusable_entry_when_nothing_survives():
    T = estimate_h(F2, E1, 0.1, [0.1], 5000, 20, seed=0)
    assert not T.entries[0].usable and "reps" in T.entries[0].note


def synthetic(p, fn, xs=(0.5, 1.0, 2.0), se=1e-3):
    return HTable(E1, p, 1, [HEntry(x, 1, 1, fn(x, p), (fn(x, p) - 1.96 * se, fn(x, p) + 1.96 * se),
                                    1, 1, True, "", x) for x in xs])


def test_extrapolation_synthetic():
    ps = [0.08, 0.05, 0.03]
    ex = h_limit_table([synthetic(p, lambda x, p: 0.7) for p in ps])
    assert np.allclose(ex.table.hs, 0.7)
    ex = h_limit_table([synthetic(p, lambda x, p: 1 / x + 2 * p) for p in ps])
    assert np.allclose(ex.table.hs, [2.0, 1.0, 0.5], atol=1e-9)
    assert ex.table.metadata["refused_x"] == []


def test_extrapolation_refuses_non_monotone():
    wobble = {0.08: 1.0, 0.05: 1.2, 0.03: 1.0}
    ex = h_limit_table([synthetic(p, lambda x, p: wobble[p]) for p in wobble])
    assert ex.table is None and ex.refused and len(ex.raw) == 3
    with pytest.raises(ValueError):
        h_limit_table([synthetic(p, lambda x, p: 1.0) for p in (0.1, 0.05)])


def test_extrapolation_two_neighbour():
    xs = [0.3, 0.6, 1.2, 2.4]
    tables = [estimate_h(F2, E1, p, xs, None, 300, seed=11, estimator="ratio", site_budget=10**6)
              for p in (0.08, 0.05, 0.03)]
    ex = h_limit_table(tables)
    for e in ex.table.entries:
        if e.usable:
            ref = two_neighbour_h(e.x)
            assert abs(e.h - ref) <= max(e.ci[1] - e.ci[0], 0.1 * ref)


def test_traversability_examples():
    V, W = 4, 1
    rect = Rectangle(E1, 12, 3)
    one_per_line = {rect.line_sites(t)[5] for t in range(3)}
    assert is_traversable(F2, E1, rect, one_per_line, V, W)
    assert not is_traversable(F2, E1, rect, set(), V, W)
    with pytest.raises(PreconditionError):
        is_traversable(F2, E1, Rectangle(E1, 8, 3), set(), V, W)


def test_traversable_implies_filled():
    rng = np.random.default_rng(12)
    hits = 0
    for _ in range(200):
        n = int(rng.integers(1, 10))
        rect = Rectangle(E1, 12, n)
        A = {x for x in rect.sites() if rng.random() < 0.25}
        if is_traversable(F2, E1, rect, A):
            hits += 1
            assert rectangle_filled(F2, rect, A)
    assert hits > 20


def test_growth_event_examples():
    AX = DirectionFrame.axes()
    D1 = normalize(AX, [5, 5, 5, 5])
    D2 = normalize(AX, [8, 8, 8, 8])
    assert len(growth_rectangles(D1, D2)) == 4
    chk = verify_growth_event(F2, D1, D2, set(lattice_sites(D2)))
    assert chk.traversable and chk.filled
    chk = verify_growth_event(F2, D1, D2, set())
    assert not chk.traversable and chk.consistent
