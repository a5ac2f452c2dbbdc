"""Named update families used throughout the tests and the CLI."""

from __future__ import annotations

import json
from importlib import resources

from .rules import (
    Disc,
    Ellipse,
    UpdateFamily,
    family_from_rules,
    load_family,
    make_convex_neighbourhood,
    make_threshold_family,
)

VON_NEUMANN = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))

# the isotropic example: closed ellipse, semi-axes 4.5 and 2.9, major axis at -45 degrees
ELLIPSE_REGION = Ellipse(4.5, 2.9, -45.0)
ELLIPSE_THETA = 18


def two_neighbour() -> UpdateFamily:
    return make_threshold_family(VON_NEUMANN, 2, name="two-neighbour")


def modified_two_neighbour() -> UpdateFamily:
    rules = [[(-1, 0), (0, -1)], [(-1, 0), (0, 1)], [(1, 0), (0, -1)], [(1, 0), (0, 1)]]
    return family_from_rules(rules, "modified-two-neighbour")


def ellipse_neighbourhood():
    return make_convex_neighbourhood(ELLIPSE_REGION)


def ellipse_family() -> UpdateFamily:
    return make_threshold_family(ellipse_neighbourhood(), ELLIPSE_THETA, name="ellipse-18")


_DIAGONAL_RULES = [
    [(1, 1), (-1, 1)],
    [(1, 1), (1, -1)],
    [(-1, -1), (-1, 1)],
    [(-1, -1), (1, -1)],
]
_EVEN_RING = [(2, 2), (2, -2), (-2, 2), (-2, -2), (0, 2), (0, -2), (2, 0), (-2, 0)]
_BOX_RING = [(x, y) for x in range(-2, 3) for y in range(-2, 3) if max(abs(x), abs(y)) == 2]


def diagonal_family() -> UpdateFamily:
    """Four two-site diagonal rules; isotropic but not voracious."""
    return family_from_rules(_DIAGONAL_RULES, "diagonal")


def diagonal_even_ring_family() -> UpdateFamily:
    return family_from_rules(_DIAGONAL_RULES + [_EVEN_RING], "diagonal-even-ring")


def diagonal_box_ring_family() -> UpdateFamily:
    return family_from_rules(_DIAGONAL_RULES + [_BOX_RING], "diagonal-box-ring")


def east_erosion() -> UpdateFamily:
    return family_from_rules([[(1, 0)]], "east")


def one_dimensional() -> UpdateFamily:
    return family_from_rules([[(1, 0)], [(-1, 0)]], "one-dimensional")


def disc_family(radius: float, theta: int) -> UpdateFamily:
    return make_threshold_family(make_convex_neighbourhood(Disc(radius)), theta,
                                 name=f"disc-{radius:g}-{theta}")


BUILTIN = {
    "two-neighbour": two_neighbour,
    "modified-two-neighbour": modified_two_neighbour,
    "ellipse-18": ellipse_family,
    "diagonal": diagonal_family,
    "diagonal-even-ring": diagonal_even_ring_family,
    "diagonal-box-ring": diagonal_box_ring_family,
}


def data_path(name: str):
    return resources.files("bperc") / "data" / name


def load_builtin_file(name: str) -> UpdateFamily:
    return load_family(str(data_path(f"{name}.json")))


def recorded_ellipse_sites() -> list[tuple[int, int]]:
    with open(str(data_path("ellipse_neighbourhood.json")), encoding="utf-8") as fh:
        return [tuple(s) for s in json.load(fh)["sites"]]
