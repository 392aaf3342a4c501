"""Finite models of the bubble space over the plane.

A :class:`Configuration` stores points together with their adherence parents
(0 parents for a point of the plane, 1 for a free point, 2 for a satellite
point) and a list of declared curves.  Incidences are never computed: two
points are on a common line only if such a line was declared, with one
exception, the lines that exist through any two points (see
:meth:`Configuration.pair_lines`).
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    ExcessViolation,
    IncidenceConflict,
    SatelliteViolation,
    SchemaError,
    UnknownParent,
    UnknownPoint,
)

PointId = str


@dataclass(frozen=True)
class PointRecord:
    id: PointId
    parents: frozenset[PointId] = frozenset()

    @property
    def is_root(self) -> bool:
        return not self.parents

    @property
    def is_satellite(self) -> bool:
        return len(self.parents) == 2


@dataclass(frozen=True)
class CurveRecord:
    """A curve of given degree passing through points with given multiplicities.

    ``implicit`` marks the lines that are not declared but always exist
    (through two points of the plane, or a point and a direction at it).
    """

    degree: int
    mults: tuple[tuple[PointId, int], ...]
    implicit: bool = False

    def mult(self, p: PointId) -> int:
        for q, m in self.mults:
            if q == p:
                return m
        return 0

    def support(self) -> frozenset[PointId]:
        return frozenset(q for q, m in self.mults if m > 0)

    def as_dict(self) -> dict[PointId, int]:
        return dict(self.mults)

    def to_json(self) -> dict:
        return {"degree": self.degree, "mults": dict(self.mults)}


@dataclass(frozen=True)
class PositionReport:
    """Outcome of :meth:`Configuration.almost_general_position`."""

    ok: bool
    violation: str | None = None
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class Configuration:
    _points: dict[PointId, PointRecord] = field(default_factory=dict)
    _rank: dict[PointId, int] = field(default_factory=dict)
    _children: dict[PointId, list[PointId]] = field(default_factory=dict)
    curves: list[CurveRecord] = field(default_factory=list)
    _fresh: int = 0

    # points -------------------------------------------------------------

    def add_point(self, parents: Iterable[PointId] = (), name: PointId | None = None) -> PointId:
        """Add a point adherent to ``parents`` and return its id."""
        ps = frozenset(parents)
        for p in ps:
            if p not in self._points:
                raise UnknownParent(f"unknown parent {p!r}")
        if len(ps) > 2:
            raise SatelliteViolation(f"a point has at most two parents, got {sorted(ps)}")
        if len(ps) == 2:
            a, b = sorted(ps, key=self.rank)
            if a not in self._points[b].parents and b not in self._points[a].parents:
                raise SatelliteViolation(f"parents {a!r} and {b!r} are not adherent to one another")
        if name is None:
            name = self._next_name()
        elif name in self._points:
            raise SchemaError(f"duplicate point id {name!r}")
        self._points[name] = PointRecord(name, ps)
        self._rank[name] = len(self._rank)
        self._children[name] = []
        for p in ps:
            self._children[p].append(name)
        return name

    def fresh_point(self, parents: Iterable[PointId] = ()) -> PointId:
        """A new point with no declared incidence."""
        return self.add_point(parents)

    def _next_name(self) -> PointId:
        while True:
            self._fresh += 1
            name = f"_f{self._fresh}"
            if name not in self._points:
                return name

    def __contains__(self, p: object) -> bool:
        return p in self._points

    def __len__(self) -> int:
        return len(self._points)

    @property
    def points(self) -> list[PointId]:
        return list(self._points)

    def record(self, p: PointId) -> PointRecord:
        try:
            return self._points[p]
        except KeyError:
            raise UnknownPoint(f"unknown point {p!r}") from None

    def rank(self, p: PointId) -> int:
        try:
            return self._rank[p]
        except KeyError:
            raise UnknownPoint(f"unknown point {p!r}") from None

    def parents(self, p: PointId) -> frozenset[PointId]:
        return self.record(p).parents

    def children(self, p: PointId) -> list[PointId]:
        """Points adherent to ``p``, in creation order."""
        self.record(p)
        return list(self._children[p])

    def is_root(self, p: PointId) -> bool:
        return self.record(p).is_root

    def is_adherent(self, q: PointId, p: PointId) -> bool:
        """True when ``q`` is adherent to ``p``."""
        return p in self.parents(q)

    def ancestors(self, p: PointId) -> set[PointId]:
        out: set[PointId] = set()
        stack = list(self.parents(p))
        while stack:
            q = stack.pop()
            if q not in out:
                out.add(q)
                stack.extend(self.parents(q))
        return out

    def depth(self, p: PointId) -> int:
        ps = self.parents(p)
        return 0 if not ps else 1 + max(self.depth(q) for q in ps)

    def sorted(self, pts: Iterable[PointId]) -> list[PointId]:
        return sorted(pts, key=self.rank)

    def is_pre_consistent(self, pts: Iterable[PointId]) -> bool:
        s = set(pts)
        return all(self.parents(p) <= s for p in s)

    # curves -------------------------------------------------------------

    def declare_curve(self, degree: int, mults: Mapping[PointId, int]) -> CurveRecord:
        if degree < 1:
            raise SchemaError(f"curve degree must be positive, got {degree}")
        clean = {}
        for p, m in mults.items():
            self.record(p)
            if m < 0:
                raise ExcessViolation(f"negative multiplicity {m} at {p!r}")
            if m > 0:
                clean[p] = int(m)
        for p in set(clean) | {q for p in clean for q in self.parents(p)}:
            below = sum(clean.get(q, 0) for q in self._children[p])
            if clean.get(p, 0) < below:
                raise ExcessViolation(
                    f"curve multiplicity {clean.get(p, 0)} at {p!r} is smaller than "
                    f"the {below} carried by points adherent to it"
                )
        if degree == 1:
            if len(clean) < 2:
                raise SchemaError("a declared line needs two points")
            for other in self.lines():
                common = other.support() & set(clean)
                if len(common) >= 2:
                    raise IncidenceConflict(
                        f"points {self.sorted(common)[:2]} already lie on a declared line"
                    )
        rec = CurveRecord(degree, tuple((p, clean[p]) for p in self.sorted(clean)))
        self.curves.append(rec)
        return rec

    def lines(self) -> list[CurveRecord]:
        return [c for c in self.curves if c.degree == 1]

    def conics(self) -> list[CurveRecord]:
        return [c for c in self.curves if c.degree == 2]

    def aligned(self, pts: Iterable[PointId]) -> bool:
        s = set(pts)
        for p in s:
            self.record(p)
        if len(s) < 3:
            raise ValueError("alignment is asked of at least three points")
        return any(s <= line.support() for line in self.lines())

    def on_conic(self, pts: Iterable[PointId]) -> bool:
        s = set(pts)
        for p in s:
            self.record(p)
        return any(s <= conic.support() for conic in self.conics())

    def line_through(self, pts: Iterable[PointId]) -> CurveRecord | None:
        s = set(pts)
        for line in self.lines():
            if s <= line.support():
                return line
        return None

    def pair_lines(self, pts: Iterable[PointId]) -> Iterator[CurveRecord]:
        """Lines that exist without being declared.

        Through two points of the plane there is a line, and through a point
        of the plane and a free point adherent to it (a tangent direction)
        there is one as well.  Satellite points never lie on a line.
        """
        s = self.sorted(set(pts))
        for a, b in itertools.combinations(s, 2):
            ra, rb = self.parents(a), self.parents(b)
            if (
                (not ra and not rb)
                or (not ra and rb == {a})
                or (not rb and ra == {b})
            ):
                yield CurveRecord(1, ((a, 1), (b, 1)), implicit=True)

    def bezout_curves(self, pts: Iterable[PointId]) -> list[CurveRecord]:
        """Declared curves followed by the undeclared lines through pairs of ``pts``."""
        return list(self.curves) + list(self.pair_lines(pts))

    # position -----------------------------------------------------------

    def almost_general_position(self, pts: Iterable[PointId]) -> PositionReport:
        s = set(pts)
        for p in s:
            self.record(p)
        if not self.is_pre_consistent(s):
            missing = next(p for p in self.sorted(s) if not self.parents(p) <= s)
            return PositionReport(False, "NotPreConsistent", (missing,))
        for line in self.lines():
            on = line.support() & s
            if len(on) >= 4:
                return PositionReport(False, "Aligned4", tuple(self.sorted(on)[:4]))
        for conic in self.conics():
            on = conic.support() & s
            if len(on) >= 7:
                return PositionReport(False, "Conic7", tuple(self.sorted(on)[:7]))
        for p in self.points:
            kids = [q for q in self._children[p] if q in s]
            if len(kids) >= 2:
                return PositionReport(False, "TwoAdherent", (p, kids[0], kids[1]))
        return PositionReport(True)

    # json ---------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "points": [
                {"id": p, "parents": self.sorted(r.parents)} for p, r in self._points.items()
            ],
            "curves": [c.to_json() for c in self.curves],
        }

    @classmethod
    def from_json(cls, data: object) -> Configuration:
        if not isinstance(data, dict):
            raise SchemaError("configuration: expected an object")
        cfg = cls()
        points = data.get("points", [])
        if not isinstance(points, list):
            raise SchemaError("configuration.points: expected a list")
        for i, item in enumerate(points):
            where = f"configuration.points[{i}]"
            if not isinstance(item, dict) or not isinstance(item.get("id"), str):
                raise SchemaError(f"{where}: expected an object with a string id")
            parents = item.get("parents", [])
            if not isinstance(parents, list) or not all(isinstance(p, str) for p in parents):
                raise SchemaError(f"{where}.parents: expected a list of ids")
            try:
                cfg.add_point(parents, name=item["id"])
            except (UnknownParent, SatelliteViolation, SchemaError) as exc:
                raise type(exc)(f"{where}: {exc}") from None
        curves = data.get("curves", [])
        if not isinstance(curves, list):
            raise SchemaError("configuration.curves: expected a list")
        for i, item in enumerate(curves):
            where = f"configuration.curves[{i}]"
            if not isinstance(item, dict) or not isinstance(item.get("degree"), int):
                raise SchemaError(f"{where}: expected an object with an integer degree")
            mults = item.get("mults", {})
            if not isinstance(mults, dict) or not all(isinstance(v, int) for v in mults.values()):
                raise SchemaError(f"{where}.mults: expected a map of integers")
            try:
                cfg.declare_curve(item["degree"], mults)
            except (UnknownPoint, ExcessViolation, IncidenceConflict, SchemaError) as exc:
                raise type(exc)(f"{where}: {exc}") from None
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> Configuration:
        return cls.from_json(json.loads(Path(path).read_text()))


def add_point(config: Configuration, parents: Iterable[PointId] = ()) -> PointId:
    return config.add_point(parents)


def is_pre_consistent(config: Configuration, pts: Iterable[PointId]) -> bool:
    return config.is_pre_consistent(pts)


def aligned(config: Configuration, pts: Iterable[PointId]) -> bool:
    return config.aligned(pts)


def almost_general_position(config: Configuration, pts: Iterable[PointId]) -> PositionReport:
    return config.almost_general_position(pts)


def declare_curve(config: Configuration, degree: int, mults: Mapping[PointId, int]) -> CurveRecord:
    return config.declare_curve(degree, mults)
