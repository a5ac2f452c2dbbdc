import math

import pytest
from hypothesis import given, strategies as st

from bperc.analysis import (Budget, Direction, analyze, check_voracity, closed_form_difficulty,
                            difficulty, helping_sets, is_stable, lemma_2_2, quasi_stable_set,
                            stable_directions, w_helping_width)
from bperc.fixtures import (disc_family, diagonal_family, east_erosion, ellipse_family,
                            modified_two_neighbour, one_dimensional, two_neighbour)
from bperc.rules import family_from_rules, is_symmetric, iota

F2 = two_neighbour()
AXES = [(1, 0), (0, 1), (-1, 0), (0, -1)]


def prims(dirs):
    return [u.primitive for u in dirs]


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-50, 50))
def test_direction_invariants(a, b, n):
    if math.gcd(a, b) != 1:
        return
    u = Direction(a, b)
    assert u.a * u.perp[0] + u.b * u.perp[1] == 0
    assert math.isclose(math.hypot(*u.perp), 1 / u.rho)
    assert u.dot(u.line_rep(n)) == n
    s, t = u.line_coords(u.from_line(n, 3))
    assert (s, t) == (n, 3)


def test_is_stable_examples():
    assert is_stable(F2, Direction(1, 0))
    assert not is_stable(F2, Direction(1, 1))
    assert not is_stable(family_from_rules([[(1, 0)]]), Direction(-1, 0))


def test_quasi_stable_examples():
    assert prims(quasi_stable_set(F2)) == AXES
    # counterclockwise from angle 0: (-2, 1) sits at about 153 degrees, (2, -1) at 333
    assert prims(quasi_stable_set(family_from_rules([[(1, 2)]]))) == [(-2, 1), (2, -1)]


@pytest.mark.parametrize("F", [two_neighbour(), diagonal_family(), ellipse_family(), disc_family(2.3, 9)])
def test_quasi_stable_closed_under_negation(F):
    S = set(quasi_stable_set(F))
    assert is_symmetric(F)
    assert all(-u in S for u in S)


def test_stable_sets():
    iso, arcs = stable_directions(F2)
    assert prims(iso) == AXES and arcs == []
    iso, arcs = stable_directions(east_erosion())
    assert iso == [] and len(arcs) == 1
    assert {arcs[0].start.primitive, arcs[0].end.primitive} == {(0, 1), (0, -1)}
    assert is_stable(east_erosion(), Direction(1, 0))
    assert not is_stable(east_erosion(), Direction(-1, 0))


def test_difficulty_examples():
    u = Direction(1, 0)
    assert difficulty(F2, u).value == 1
    assert difficulty(F2, u, method="search").value == 1
    assert difficulty(F2, Direction(1, 1)).value == 0
    assert difficulty(east_erosion(), u).kind == "infinite"


def test_helping_sets_two_neighbour():
    u = Direction(1, 0)
    classes = helping_sets(F2, u)
    assert sorted(classes) == [((0, 0),), ((1, 0),)]
    assert helping_sets(F2, Direction(1, 1)) == [()]


def test_w_width():
    u = Direction(1, 0)
    assert w_helping_width(F2, u) == 1
    assert w_helping_width(modified_two_neighbour(), u) == 1
    assert w_helping_width(F2, u, cap=0) is None


def test_voracity():
    assert check_voracity(F2, Direction(1, 0)).verdict == "yes"
    v = check_voracity(diagonal_family(), Direction(1, 1))
    assert v.verdict == "no" and v.witness


def test_two_neighbour_report():
    r = analyze(F2)
    assert r.alpha == 1 and r.isotropic and r.symmetric and r.voracious == "yes"
    assert prims(r.quasi_stable) == AXES
    assert prims(r.isolated) == AXES and prims(r.S_alpha) == AXES


def test_ellipse_report():
    F = ellipse_family()
    r = analyze(F)
    assert r.isotropic and r.alpha == 2 and not r.arcs
    diffs = sorted(r.directions[u].difficulty.value for u in r.isolated)
    assert len(diffs) == 8 and diffs == [1, 1] + [2] * 6
    # the two easy directions are each other's negation
    easy = [u for u in r.isolated if r.directions[u].difficulty.value == 1]
    assert easy[0] == -easy[1]
    # every easy direction has its helping sets inside the search window
    for u in easy:
        assert all(len(Z) == 1 for Z in r.directions[u].helping_sets)


def test_one_dimensional_not_isotropic():
    r = analyze(one_dimensional())
    assert r.isotropic is False


def test_diagonal_family_not_voracious():
    r = analyze(diagonal_family())
    assert r.isotropic and r.voracious == "no"


@pytest.mark.parametrize("radius,theta", [(1.5, 4), (2.0, 5), (2.0, 6), (2.3, 9), (2.3, 10), (2.9, 11)])
def test_closed_form_matches_search(radius, theta):
    F = disc_family(radius, theta)
    budget = Budget(max_size=5)
    for u in stable_directions(F)[0]:
        assert difficulty(F, u, budget, method="search").value == closed_form_difficulty(F, u)


@pytest.mark.parametrize("radius,theta", [(2.0, 5), (2.3, 9), (3.0, 13), (3.2, 17)])
def test_global_formula_and_symmetry(radius, theta):
    F = disc_family(radius, theta)
    r = analyze(F)
    K = F.threshold.neighbourhood
    assert r.isotropic
    assert r.alpha == theta - (len(K) - iota(K)) // 2
    for u in r.isolated:
        assert r.directions[u].difficulty == r.directions[-u].difficulty


def test_lemma_2_2_on_discs():
    for radius, theta in [(1.5, 4), (2.3, 9), (3.0, 12), (3.2, 16)]:
        F = disc_family(radius, theta)
        K = F.threshold.neighbourhood
        for u in stable_directions(F)[0]:
            assert lemma_2_2(K, theta, u)


def test_report_json_roundtrip_fields():
    js = analyze(F2).to_json()
    assert js["alpha"] == 1 and js["voracious"] == "yes"
    assert js["stable_set"]["isolated"] == [list(v) for v in AXES]
    assert len(js["directions"]) == 4
    assert js["directions"][0]["difficulty"] == 1
