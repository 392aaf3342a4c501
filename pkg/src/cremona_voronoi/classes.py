"""Picard-Manin classes with exact rational coefficients.

A class ``n*l - sum(lam_p * e_p)`` is stored as its degree ``n`` and the sparse
map ``p -> lam_p``.  Representatives are never normalized: every predicate is
invariant under positive scaling, so arithmetic stays in the rationals.
"""

from __future__ import annotations

import enum
import math
import re
from collections.abc import Callable, Iterable, Mapping
from fractions import Fraction
from typing import Union

from .config import Configuration, PointId
from .errors import NonPositiveClass, SchemaError

Rational = Union[int, Fraction]

_NUM = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


def to_fraction(x: object, where: str = "value") -> Fraction:
    """Parse an int, a Fraction or a ``"p/q"`` string."""
    if isinstance(x, bool):
        raise SchemaError(f"{where}: expected a rational, got a boolean")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str) and _NUM.match(x):
        try:
            return Fraction(x.replace(" ", ""))
        except ZeroDivisionError:
            raise SchemaError(f"{where}: zero denominator in {x!r}") from None
    raise SchemaError(f"{where}: expected a fraction string like '7/5', got {x!r}")


def fraction_str(x: Fraction) -> str:
    return str(Fraction(x))


class PMClass:
    """An element of the Picard-Manin space with finite support."""

    __slots__ = ("degree", "_mults", "_hash")

    def __init__(self, degree: Rational = 0, mults: Mapping[PointId, Rational] | None = None):
        self.degree = Fraction(degree)
        clean = {}
        for p, v in (mults or {}).items():
            v = Fraction(v)
            if v:
                clean[p] = v
        self._mults = clean
        self._hash: int | None = None

    @classmethod
    def line(cls) -> PMClass:
        return cls(1)

    @classmethod
    def exceptional(cls, p: PointId) -> PMClass:
        """The class ``e_p``."""
        return cls(0, {p: -1})

    @classmethod
    def from_pairs(cls, degree: Rational, pairs: Iterable[tuple[PointId, Rational]]) -> PMClass:
        acc: dict[PointId, Fraction] = {}
        for p, v in pairs:
            acc[p] = acc.get(p, Fraction(0)) + Fraction(v)
        return cls(degree, acc)

    @property
    def mults(self) -> dict[PointId, Fraction]:
        return dict(self._mults)

    def mult(self, p: PointId) -> Fraction:
        return self._mults.get(p, Fraction(0))

    def support(self) -> frozenset[PointId]:
        return frozenset(self._mults)

    def items(self):
        return self._mults.items()

    # arithmetic ---------------------------------------------------------

    def __add__(self, other: PMClass) -> PMClass:
        if not isinstance(other, PMClass):
            return NotImplemented
        acc = dict(self._mults)
        for p, v in other._mults.items():
            acc[p] = acc.get(p, Fraction(0)) + v
        return PMClass(self.degree + other.degree, acc)

    def __neg__(self) -> PMClass:
        return PMClass(-self.degree, {p: -v for p, v in self._mults.items()})

    def __sub__(self, other: PMClass) -> PMClass:
        if not isinstance(other, PMClass):
            return NotImplemented
        return self + (-other)

    def __mul__(self, k: Rational) -> PMClass:
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        k = Fraction(k)
        return PMClass(self.degree * k, {p: v * k for p, v in self._mults.items()})

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PMClass):
            return NotImplemented
        return self.degree == other.degree and self._mults == other._mults

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.degree, frozenset(self._mults.items())))
        return self._hash

    def __repr__(self) -> str:
        terms = [f"{self.degree}l"]
        for p, v in sorted(self._mults.items(), key=lambda kv: (-kv[1], kv[0])):
            terms.append(f"{'-' if v > 0 else '+'}{abs(v)}e[{p}]")
        return "PMClass(" + " ".join(terms) + ")"

    # serialization ------------------------------------------------------

    def to_json(self, config: Configuration | None = None) -> dict:
        keys = config.sorted(self._mults) if config is not None else sorted(self._mults)
        return {
            "degree": fraction_str(self.degree),
            "mults": {p: fraction_str(self._mults[p]) for p in keys},
        }

    @classmethod
    def from_json(cls, data: object, config: Configuration | None = None) -> PMClass:
        if not isinstance(data, dict) or "degree" not in data:
            raise SchemaError("class: expected an object with a degree")
        degree = to_fraction(data["degree"], "class.degree")
        mults = data.get("mults", {})
        if not isinstance(mults, dict):
            raise SchemaError("class.mults: expected a map")
        out = {}
        for p, v in mults.items():
            if config is not None and p not in config:
                raise SchemaError(f"class.mults.{p}: unknown point")
            out[p] = to_fraction(v, f"class.mults.{p}")
        return cls(degree, out)


# pairings ---------------------------------------------------------------


def intersect(c1: PMClass, c2: PMClass) -> Fraction:
    small, big = (c1, c2) if len(c1._mults) <= len(c2._mults) else (c2, c1)
    total = c1.degree * c2.degree
    for p, v in small._mults.items():
        w = big._mults.get(p)
        if w is not None:
            total -= v * w
    return total


def self_intersect(c: PMClass) -> Fraction:
    return intersect(c, c)


def anti_canonical(c: PMClass) -> Fraction:
    return 3 * c.degree - sum(c._mults.values(), Fraction(0))


def excess(c: PMClass, config: Configuration, p: PointId) -> Fraction:
    return c.mult(p) - sum((c.mult(q) for q in config.children(p)), Fraction(0))


def is_boundary(c: PMClass) -> bool:
    return self_intersect(c) == 0 and c.degree > 0


def natural_key(p: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", p)]


def order_multiplicities(
    c: PMClass, key: Callable[[PointId], object] | Configuration | None = None
) -> list[tuple[PointId, Fraction]]:
    """Multiplicities in decreasing order, ties broken by point order.

    ``key`` is a configuration (its creation order is used) or a sort key on
    ids; without one, ids are compared in natural order ("p2" < "p10").
    """
    if isinstance(key, Configuration):
        key = key.rank
    elif key is None:
        key = natural_key
    return sorted(c._mults.items(), key=lambda kv: (-kv[1], key(kv[0])))


# distances --------------------------------------------------------------


class DistanceOrder(enum.Enum):
    CloserToFirst = "CloserToFirst"
    Equidistant = "Equidistant"
    CloserToSecond = "CloserToSecond"


def cmp_dist(c: PMClass, a: PMClass, b: PMClass) -> DistanceOrder:
    """Which of ``a`` and ``b`` is closer to ``c`` on the hyperboloid."""
    cc, aa, bb = self_intersect(c), self_intersect(a), self_intersect(b)
    if cc <= 0 or aa <= 0 or bb <= 0:
        raise NonPositiveClass("distance comparison needs classes of positive self-intersection")
    ca, cb = intersect(c, a), intersect(c, b)
    if ca <= 0 or cb <= 0:
        raise NonPositiveClass("classes must lie on the same sheet of the hyperboloid")
    lhs, rhs = ca * ca * bb, cb * cb * aa
    if lhs < rhs:
        return DistanceOrder.CloserToFirst
    if lhs > rhs:
        return DistanceOrder.CloserToSecond
    return DistanceOrder.Equidistant


def distance(c: PMClass, a: PMClass) -> float:
    """Hyperbolic distance between the normalized classes, for display only."""
    cc, aa = self_intersect(c), self_intersect(a)
    if cc <= 0 or aa <= 0:
        raise NonPositiveClass("distance needs classes of positive self-intersection")
    x = float(intersect(c, a)) / math.sqrt(float(cc) * float(aa))
    return math.acosh(max(x, 1.0))
