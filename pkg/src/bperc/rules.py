"""Update families, threshold rules and convex symmetric neighbourhoods.

Sites are plain ``(x, y)`` integer tuples.  Families are immutable and
compare by value after canonical ordering: sites lexicographically, rules
lexicographically by their sorted site lists.

Threshold families ("at least theta of K minus the origin") are stored by
their ``(K, theta)`` description.  The explicit rule list is only built on
request, because the number of theta-subsets explodes quickly (the ellipse
rule used for the isotropic fixture has more than 10^11 of them).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

Site = tuple[int, int]

MAX_RULES = 10**6
ELLIPSE_TOL = 1e-12


class RuleError(ValueError):
    """Base class for invalid rule input."""


class InvalidThreshold(RuleError):
    pass


class AsymmetricRegion(RuleError):
    pass


class UnboundedRegion(RuleError):
    pass


class RuleSetTooLarge(RuleError):
    pass


class ParseError(RuleError):
    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


def _site(v) -> Site:
    x, y = v
    if int(x) != x or int(y) != y:
        raise RuleError(f"site {v!r} is not integral")
    return (int(x), int(y))


def canonical_rule(sites: Iterable) -> tuple[Site, ...]:
    rule = tuple(sorted({_site(s) for s in sites}))
    if not rule:
        raise RuleError("empty rule")
    if (0, 0) in rule:
        raise RuleError("origin in rule")
    return rule


def negate_sites(sites: Iterable[Site]) -> tuple[Site, ...]:
    return tuple(sorted((-x, -y) for x, y in sites))


# ---------------------------------------------------------------------------
# convex regions and neighbourhoods


@dataclass(frozen=True)
class Ellipse:
    """Closed ellipse centred at the origin.

    ``angle`` (degrees) is the direction of the first semi-axis ``a``.
    """

    a: float
    b: float
    angle: float = 0.0

    def describe(self) -> dict:
        return {"kind": "ellipse", "a": self.a, "b": self.b, "angle": self.angle}

    def validate(self) -> None:
        for v in (self.a, self.b, self.angle):
            if not math.isfinite(v):
                raise UnboundedRegion(f"ellipse parameter {v!r} is not finite")
        if self.a <= 0 or self.b <= 0:
            raise RuleError("ellipse semi-axes must be positive")

    def bound(self) -> int:
        return int(math.floor(max(self.a, self.b))) + 1

    def contains(self, x: int, y: int) -> bool:
        th = math.radians(self.angle)
        c, s = math.cos(th), math.sin(th)
        xi = x * c + y * s
        eta = -x * s + y * c
        return (xi / self.a) ** 2 + (eta / self.b) ** 2 <= 1 + ELLIPSE_TOL


def Disc(radius: float) -> Ellipse:
    return Ellipse(radius, radius, 0.0)


@dataclass(frozen=True)
class Polygon:
    """Closed convex polygon given by its vertices (exact rationals)."""

    vertices: tuple[tuple[Fraction, Fraction], ...]

    @classmethod
    def of(cls, vertices: Sequence[Sequence]) -> "Polygon":
        return cls(tuple((Fraction(x), Fraction(y)) for x, y in vertices))

    def describe(self) -> dict:
        return {"kind": "polygon", "vertices": [[str(x), str(y)] for x, y in self.vertices]}

    def validate(self) -> None:
        vs = set(self.vertices)
        if len(vs) < 3:
            raise UnboundedRegion("polygon needs at least three vertices")
        for x, y in vs:
            if (-x, -y) not in vs:
                raise AsymmetricRegion(f"vertex ({x}, {y}) has no opposite vertex")
        hull = self._ordered()
        n = len(hull)
        for i in range(n):
            (x0, y0), (x1, y1), (x2, y2) = hull[i], hull[(i + 1) % n], hull[(i + 2) % n]
            if (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1) < 0:
                raise RuleError("polygon vertices are not in convex position")

    def _ordered(self):
        return sorted(set(self.vertices), key=lambda v: math.atan2(v[1], v[0]))

    def bound(self) -> int:
        return int(max(max(abs(x), abs(y)) for x, y in self.vertices)) + 1

    def contains(self, x: int, y: int) -> bool:
        hull = self._ordered()
        n = len(hull)
        for i in range(n):
            (x0, y0), (x1, y1) = hull[i], hull[(i + 1) % n]
            if (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) < 0:
                return False
        return True


@dataclass(frozen=True)
class Neighbourhood:
    sites: tuple[Site, ...]
    generator: object = None
    symmetric: bool = True

    def __post_init__(self):
        if (0, 0) not in self.sites:
            raise RuleError("neighbourhood must contain the origin")

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, v):
        return tuple(v) in set(self.sites)

    @classmethod
    def from_sites(cls, sites: Iterable, generator=None) -> "Neighbourhood":
        s = tuple(sorted({_site(v) for v in sites}))
        sym = all((-x, -y) in set(s) for x, y in s)
        return cls(s, generator, sym)


def make_convex_neighbourhood(region) -> Neighbourhood:
    """All lattice points of a bounded convex region symmetric about 0."""
    region.validate()
    r = region.bound()
    pts = [
        (x, y)
        for x in range(-r, r + 1)
        for y in range(-r, r + 1)
        if region.contains(x, y)
    ]
    nb = Neighbourhood.from_sites(pts, region)
    if not nb.symmetric:
        raise AsymmetricRegion("region is not symmetric about the origin")
    return nb


def iota(sites: Iterable[Site]) -> int:
    """Largest number of sites of K on a single line through the origin."""
    counts: dict[Site, int] = {}
    for x, y in sites:
        if (x, y) == (0, 0):
            continue
        g = math.gcd(x, y)
        a, b = x // g, y // g
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        counts[(a, b)] = counts.get((a, b), 0) + 1
    return 1 + max(counts.values(), default=0)


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class Threshold:
    neighbourhood: tuple[Site, ...]
    theta: int

    @property
    def offsets(self) -> tuple[Site, ...]:
        return tuple(s for s in self.neighbourhood if s != (0, 0))


@dataclass(frozen=True, eq=False)
class UpdateFamily:
    """A finite non-empty set of update rules.

    Use :func:`family_from_rules` or :func:`make_threshold_family` rather
    than the constructor.
    """

    explicit: tuple[tuple[Site, ...], ...] | None
    threshold: Threshold | None = None
    name: str | None = None
    max_rules: int = field(default=MAX_RULES, compare=False)

    @property
    def provenance(self) -> str:
        if self.threshold is not None:
            return "threshold"
        return f"fixture:{self.name}" if self.name else "generic"

    def __len__(self) -> int:
        if self.threshold is not None:
            return math.comb(len(self.threshold.offsets), self.threshold.theta)
        return len(self.explicit)

    @cached_property
    def rules(self) -> tuple[tuple[Site, ...], ...]:
        if self.explicit is not None:
            return self.explicit
        n = len(self)
        if n > self.max_rules:
            raise RuleSetTooLarge(
                f"threshold family has {n} rules, above the guard {self.max_rules}"
            )
        offs = self.threshold.offsets
        return tuple(sorted(itertools.combinations(offs, self.threshold.theta)))

    @cached_property
    def sites(self) -> tuple[Site, ...]:
        """Union of all rule sites."""
        if self.threshold is not None:
            return self.threshold.offsets if self.threshold.theta >= 1 else ()
        return tuple(sorted({s for r in self.explicit for s in r}))

    @cached_property
    def diameter(self) -> float:
        return max(math.hypot(x, y) for x, y in self.sites)

    def clauses(self) -> list[tuple[tuple[Site, ...], int]]:
        """Rules as (offsets, required count) pairs."""
        if self.threshold is not None:
            return [(self.threshold.offsets, self.threshold.theta)]
        return [(r, len(r)) for r in self.explicit]

    def transformed(self, matrix) -> "UpdateFamily":
        """Image of the family under an integer linear map (rows of ``matrix``)."""
        (p, q), (r, s) = matrix

        def f(v):
            return (p * v[0] + q * v[1], r * v[0] + s * v[1])

        if self.threshold is not None:
            nb = tuple(sorted(f(v) for v in self.threshold.neighbourhood))
            return UpdateFamily(None, Threshold(nb, self.threshold.theta), self.name, self.max_rules)
        return family_from_rules([[f(v) for v in r] for r in self.explicit], self.name)

    def __eq__(self, other):
        if not isinstance(other, UpdateFamily):
            return NotImplemented
        if self.threshold is not None and other.threshold is not None:
            return self.threshold == other.threshold
        if len(self) != len(other) or self.sites != other.sites:
            return False
        return self.rules == other.rules

    def __hash__(self):
        return hash((self.sites, len(self)))

    def __repr__(self):
        if self.threshold is not None:
            return f"UpdateFamily(threshold |K|={len(self.threshold.neighbourhood)}, theta={self.threshold.theta})"
        return f"UpdateFamily({len(self.explicit)} rules{', ' + self.name if self.name else ''})"


def family_from_rules(rules: Iterable[Iterable], name: str | None = None) -> UpdateFamily:
    canon = sorted({canonical_rule(r) for r in rules})
    if not canon:
        raise RuleError("family has no rules")
    return UpdateFamily(tuple(canon), None, name)


def make_threshold_family(K, theta: int, max_rules: int = MAX_RULES,
                          name: str | None = None) -> UpdateFamily:
    """Family of all ``theta``-subsets of ``K`` minus the origin.

    ``K`` is a :class:`Neighbourhood` or any iterable of sites containing
    the origin.  The rules are enumerated lazily; ``len(family)`` is the
    binomial count and ``family.rules`` raises :class:`RuleSetTooLarge`
    above ``max_rules``.
    """
    sites = tuple(sorted({_site(v) for v in K}))
    if (0, 0) not in sites:
        raise RuleError("neighbourhood must contain the origin")
    if not isinstance(theta, int) or not 1 <= theta <= len(sites) - 1:
        raise InvalidThreshold(f"theta={theta!r} outside 1..{len(sites) - 1}")
    return UpdateFamily(None, Threshold(sites, theta), name, max_rules)


def negate(F: UpdateFamily) -> UpdateFamily:
    return F.transformed(((-1, 0), (0, -1)))


def is_symmetric(F: UpdateFamily) -> bool:
    if F.threshold is not None:
        nb = set(F.threshold.neighbourhood)
        return all((-x, -y) in nb for x, y in nb)
    rules = set(F.explicit)
    return all(negate_sites(r) in rules for r in rules)


# ---------------------------------------------------------------------------
# serialization


def _read_sites(obj, where: str) -> list[Site]:
    if not isinstance(obj, list):
        raise ParseError("expected a list of [x, y] pairs", where)
    out = []
    for i, v in enumerate(obj):
        if (not isinstance(v, list) or len(v) != 2
                or not all(isinstance(c, int) and not isinstance(c, bool) for c in v)):
            raise ParseError("expected an integer pair [x, y]", f"{where}[{i}]")
        out.append((v[0], v[1]))
    return out


def family_from_dict(data) -> UpdateFamily:
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise ParseError("name must be a string", "name")
    thr = data.get("threshold")
    rules_obj = data.get("rules")
    if thr is None and rules_obj is None:
        raise ParseError("missing 'rules'", "rules")
    explicit = None
    if rules_obj is not None:
        if not isinstance(rules_obj, list):
            raise ParseError("expected a list of rules", "rules")
        explicit = []
        for i, r in enumerate(rules_obj):
            sites = _read_sites(r, f"rules[{i}]")
            if not sites:
                raise ParseError("empty rule", f"rules[{i}]")
            if (0, 0) in sites:
                raise ParseError("origin in rule", f"rules[{i}]")
            explicit.append(sites)
    if thr is not None:
        if not isinstance(thr, dict):
            raise ParseError("expected an object", "threshold")
        nb = _read_sites(thr.get("neighbourhood"), "threshold.neighbourhood")
        theta = thr.get("theta")
        if not isinstance(theta, int) or isinstance(theta, bool):
            raise ParseError("theta must be an integer", "threshold.theta")
        try:
            F = make_threshold_family(nb, theta, name=name)
        except RuleError as e:
            raise ParseError(str(e), "threshold") from None
        if explicit:
            G = family_from_rules(explicit, name)
            if len(F) != len(G) or F.rules != G.rules:
                raise ParseError("rules disagree with the threshold description", "rules")
        return F
    if not explicit:
        raise ParseError("family has no rules", "rules")
    return family_from_rules(explicit, name)


def family_to_dict(F: UpdateFamily) -> dict:
    d: dict = {}
    if F.name:
        d["name"] = F.name
    if F.threshold is not None:
        d["threshold"] = {
            "neighbourhood": [list(s) for s in F.threshold.neighbourhood],
            "theta": F.threshold.theta,
        }
    else:
        d["rules"] = [[list(s) for s in r] for r in F.explicit]
    return d


def parse_family(text: str, fmt: str | None = None) -> UpdateFamily:
    """Parse a rule file (JSON, or TOML when ``fmt='toml'`` or JSON fails)."""
    if fmt not in (None, "json", "toml"):
        raise ValueError(f"unknown format {fmt!r}")
    if fmt == "toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise ParseError(f"malformed TOML: {e}") from None
        return family_from_dict(data)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        if fmt == "json":
            raise ParseError(f"malformed JSON: {e.msg}", f"line {e.lineno} column {e.colno}") from None
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError:
            raise ParseError(f"malformed JSON: {e.msg}", f"line {e.lineno} column {e.colno}") from None
    return family_from_dict(data)


def serialize_family(F: UpdateFamily, fmt: str = "json") -> str:
    d = family_to_dict(F)
    if fmt == "json":
        return json.dumps(d, separators=(",", ":"), sort_keys=True)
    if fmt == "toml":
        lines = []
        if "name" in d:
            lines.append(f"name = {json.dumps(d['name'])}")
        if "rules" in d:
            lines.append(f"rules = {json.dumps(d['rules'])}")
        if "threshold" in d:
            lines.append("[threshold]")
            lines.append(f"neighbourhood = {json.dumps(d['threshold']['neighbourhood'])}")
            lines.append(f"theta = {d['threshold']['theta']}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def load_family(path) -> UpdateFamily:
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_family(text, "toml" if path.endswith(".toml") else None)
