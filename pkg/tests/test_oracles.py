"""The reference values themselves, checked against brute force or closed forms."""
import math

import pytest

from oracles import basel, beta, two_neighbour_enumerate, two_neighbour_h, two_neighbour_hp, two_neighbour_transfer


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("p", [0.1, 0.5])
def test_transfer_matches_enumeration(m, n, p):
    if (n + 1) * m > 16:
        pytest.skip("enumeration too large")
    assert two_neighbour_transfer(m, n, p) == pytest.approx(two_neighbour_enumerate(m, n, p), abs=1e-12)


def test_small_case_closed_form():
    assert two_neighbour_transfer(2, 1, 0.5) == pytest.approx(0.9375)


def test_rate_matches_transfer_decay():
    p, m = 0.1, 10
    r = two_neighbour_transfer(m, 401, p) / two_neighbour_transfer(m, 400, p)
    assert -math.log(r) == pytest.approx(two_neighbour_hp(m * p, p), rel=1e-9)


def test_limit_function():
    assert beta(1.0) == 1.0 and beta(0.0) == 0.0
    for x in (0.1, 1.0, 3.0):
        assert two_neighbour_hp(x, 1e-4) == pytest.approx(two_neighbour_h(x), rel=1e-3)


def test_basel():
    assert basel() == pytest.approx(math.pi ** 2 / 6, abs=1e-12)
