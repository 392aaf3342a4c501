"""Descent into the identity cell, owning cells, and segment scans.

Cells are identified by their centre, the image of the line under the germ.
Centres are exact classes, so two cells coincide exactly when their centres
are equal, whatever fresh points were created while building the germs.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .classes import PMClass, fraction_str, intersect, order_multiplicities, self_intersect
from .config import Configuration, PointId
from .cells import (
    MembershipReport,
    _require_E,
    _top_values,
    in_V_id,
    is_special,
    tight_subsets,
    top_triples,
    triple_kind,
)
from .errors import IterationCap, NonPositiveClass, NotInVId, ValidationFailure
from .maps import (
    CharMatrix,
    _weights_realizable,
    apply,
    homaloidal_types,
    inverse,
    jonquieres,
    jonquieres_shape_error,
    quadratic,
)


# descent ----------------------------------------------------------------------


def _pad_support(config: Configuration, p0: PointId, S: Sequence[PointId]) -> list[PointId]:
    """Complete ``S`` with fresh points to ``delta`` adherent and ``delta`` other small points."""
    a = sum(1 for q in S if config.is_adherent(q, p0))
    b = len(S) - a
    delta = max(a, b)
    smalls = list(S)
    smalls += [config.fresh_point([p0]) for _ in range(delta - a)]
    smalls += [config.fresh_point() for _ in range(delta - b)]
    return smalls


def violating_map(c: PMClass, config: Configuration, check_e: bool = True) -> CharMatrix | None:
    """A germ whose centre is strictly closer to ``c`` than the line, or None.

    The returned germ ``F`` satisfies ``c . F(l) < c . l``.
    """
    rep = in_V_id(c, config, check_e=check_e)
    if rep.verdict:
        return None
    if rep.violated == "TopTriple":
        return inverse(quadratic(config, *rep.witness))
    p0, S = rep.witness
    return inverse(jonquieres(config, p0, _pad_support(config, p0, S)))


@dataclass(frozen=True)
class Step:
    germ: CharMatrix
    value: Fraction


@dataclass
class ReductionTrace:
    start: PMClass
    steps: list[Step]
    terminal: PMClass
    terminal_report: MembershipReport
    config: Configuration = field(repr=False, default=None)

    @property
    def values(self) -> list[Fraction]:
        return [s.value for s in self.steps]

    def translate(self, c: PMClass) -> PMClass:
        """Carry a class from the terminal frame back to the frame of ``start``."""
        for step in reversed(self.steps):
            c = apply(step.germ, c, self.config)
        return c

    def center(self) -> PMClass:
        """Centre of a cell containing ``start``."""
        return self.translate(PMClass.line())

    def to_json(self) -> dict:
        return {
            "start": self.start.to_json(self.config),
            "steps": [
                {
                    "characteristic": _char_str(s.germ),
                    "inverse_base": list(s.germ.inv_base),
                    "center": apply(s.germ, PMClass.line(), self.config).to_json(self.config),
                    "value": fraction_str(s.value),
                }
                for s in self.steps
            ],
            "terminal": self.terminal.to_json(self.config),
            "terminal_report": self.terminal_report.to_json(),
            "cell_center": self.center().to_json(self.config),
        }


def _char_str(M: CharMatrix) -> str:
    d, m = M.characteristic()
    return f"({d};" + ",".join(str(x) for x in m) + ")"


def voronoi_reduce(c: PMClass, config: Configuration, cap: int | None = None) -> ReductionTrace:
    _require_E(c, config)
    if cap is None:
        cap = 10 * max(1, math.ceil(c.degree))
    cur = c
    steps: list[Step] = []
    while True:
        F = violating_map(cur, config, check_e=False)
        if F is None:
            break
        nxt = apply(inverse(F), cur, config)
        if nxt.degree >= cur.degree:
            raise ValidationFailure(f"step did not decrease the degree ({cur.degree} -> {nxt.degree})")
        steps.append(Step(F, nxt.degree))
        cur = nxt
        if len(steps) > cap:
            raise IterationCap(f"more than {cap} descent steps")
    return ReductionTrace(c, steps, cur, in_V_id(cur, config, check_e=False), config)


# owning cells -------------------------------------------------------------------


@dataclass(frozen=True)
class CellGerm:
    """A cell meeting the identity cell at a class.

    ``center`` is the image of the line under the germ.  For a family,
    ``center`` omits the fresh points: the actual centres are
    ``center - sum e_x`` over ``free_adherent`` generic points adherent to
    ``anchor`` and ``free_roots`` generic points of the plane.
    """

    kind: str
    center: PMClass
    family: bool = False
    anchor: PointId | None = None
    free_adherent: int = 0
    free_roots: int = 0

    def key(self) -> tuple:
        return (self.center, self.family, self.anchor, self.free_adherent, self.free_roots)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CellGerm):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def translated(self, trace: ReductionTrace) -> CellGerm:
        anchor = self.anchor
        if anchor is not None and trace.steps:
            img = trace.translate(PMClass.exceptional(anchor))
            pts = list(img.items())
            anchor = pts[0][0] if img.degree == 0 and len(pts) == 1 else None
        center = trace.translate(self.center)
        kind = self.kind if self.family else _kind_of(center)
        return CellGerm(kind, center, self.family, anchor, self.free_adherent, self.free_roots)

    def to_json(self, config: Configuration | None = None) -> dict:
        out = {"kind": self.kind, "center": self.center.to_json(config)}
        if self.family:
            out["family"] = {
                "anchor": self.anchor,
                "free_adherent": self.free_adherent,
                "free_roots": self.free_roots,
            }
        return out

    def build(self, config: Configuration) -> CharMatrix | None:
        """A germ for this cell, creating fresh points for families and inverse points."""
        if self.kind == "identity":
            return None
        if self.kind not in ("quadratic", "jonquieres"):
            raise ValueError(f"no constructor for {self.kind} germs")
        order = order_multiplicities(self.center, config)
        pts = [p for p, _ in order]
        if self.family:
            pts += [config.fresh_point([self.anchor]) for _ in range(self.free_adherent)]
            pts += [config.fresh_point() for _ in range(self.free_roots)]
        if self.center.degree == 2 and len(pts) == 3:
            return inverse(quadratic(config, *pts))
        return inverse(jonquieres(config, pts[0], pts[1:]))


def _kind_of(center: PMClass) -> str:
    d = center.degree
    top = max((v for _, v in center.items()), default=0)
    if d == 1:
        return "identity"
    if d == 2:
        return "quadratic"
    if top == d - 1:
        return "jonquieres"
    return "homaloidal"


IDENTITY = CellGerm("identity", PMClass.line())


def _multiset_permutations(values: Sequence[int]) -> Iterator[tuple[int, ...]]:
    counts: dict[int, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    keys = sorted(counts, reverse=True)
    n = len(values)
    out: list[int] = []

    def rec() -> Iterator[tuple[int, ...]]:
        if len(out) == n:
            yield tuple(out)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                out.append(k)
                yield from rec()
                out.pop()
                counts[k] += 1

    return rec()


def owning_cells(c: PMClass, config: Configuration) -> list[CellGerm]:
    """Cells containing ``c``, for ``c`` in the identity cell."""
    rep = in_V_id(c, config)
    if not rep.verdict:
        raise NotInVId(f"class is not in the identity cell ({rep.violated})")
    n = c.degree
    found: dict[tuple, CellGerm] = {IDENTITY.key(): IDENTITY}

    def add(g: CellGerm) -> None:
        found.setdefault(g.key(), g)

    order = order_multiplicities(c, config)
    vals = _top_values(c, config)

    if is_special(c, config):
        p0 = top_triples(c, config)[0][0]
        for S in tight_subsets(c, config, p0):
            a = sum(1 for q in S if config.is_adherent(q, p0))
            delta = max(a, len(S) - a)
            center = PMClass(delta + 1, {p0: delta, **{q: 1 for q in S}})
            kind = "quadratic" if delta == 1 else "jonquieres"
            if 2 * delta == len(S):
                add(CellGerm(kind, center))
            else:
                add(CellGerm(kind, center, True, p0, delta - a, delta - (len(S) - a)))
        return _sorted_cells(found.values(), config)

    if n == sum(vals):
        if len(order) == 2 or (len(order) > 2 and vals[2] == 0):
            p0, p1 = order[0][0], order[1][0]
            add(CellGerm("quadratic", PMClass(2, {p0: 1, p1: 1}), True, None, 0, 1))
        for t in top_triples(c, config):
            if triple_kind(config, t) == "quadratic":
                add(CellGerm("quadratic", PMClass(2, {q: 1 for q in t})))

    # Jonquières germs of degree at least three
    v0 = vals[0]
    mu = (n - v0) / 2
    if mu > 0:
        for p0 in [p for p, v in order if v == v0]:
            T = [p for p, v in order if v == mu and p != p0]
            for k in range(4, len(T) + 1, 2):
                for S in itertools.combinations(T, k):
                    if jonquieres_shape_error(config, p0, S) is None:
                        delta = k // 2
                        add(CellGerm("jonquieres", PMClass(delta + 1, {p0: delta, **{q: 1 for q in S}})))

    # symmetric supports: all homaloidal types on six to eight points
    if 3 * v0 == n:
        T = [p for p, v in order if v == v0]
        for r in range(6, min(8, len(T)) + 1):
            types = [(d, m) for d, m in homaloidal_types(8) if len(m) == r and m[0] != d - 1]
            for R in itertools.combinations(T, r):
                if not config.almost_general_position(R):
                    continue
                for d, m in types:
                    for assign in _multiset_permutations(m):
                        if _weights_realizable(config, d, R, assign) is None:
                            add(CellGerm("homaloidal", PMClass(d, dict(zip(R, assign)))))

    return _sorted_cells(found.values(), config)


def _sorted_cells(cells, config: Configuration) -> list[CellGerm]:
    def key(g: CellGerm):
        pts = order_multiplicities(g.center, config)
        return (g.center.degree, g.kind, g.family, [(-v, config.rank(p)) for p, v in pts])

    return sorted(cells, key=key)


def verify_cells(c: PMClass, cells: Sequence[CellGerm]) -> bool:
    """Every listed cell has its centre exactly as close to ``c`` as the line."""
    return all(intersect(c, g.center) == c.degree for g in cells)


# segment scan ---------------------------------------------------------------------


@dataclass(frozen=True)
class ScanSample:
    t: Fraction
    point: PMClass
    cells: frozenset

    def to_json(self, config: Configuration | None = None) -> dict:
        return {
            "t": fraction_str(self.t),
            "class": self.point.to_json(config),
            "cells": [g.to_json(config) for g in sorted(self.cells, key=lambda g: repr(g.key()))],
        }


def owning_cells_anywhere(c: PMClass, config: Configuration) -> tuple[ReductionTrace, list[CellGerm]]:
    """Reduce ``c`` and carry the cells of its reduced form back to ``c``."""
    trace = voronoi_reduce(c, config)
    cells = owning_cells(trace.terminal, config)
    return trace, [g.translated(trace) for g in cells]


def segment_scan(a: PMClass, b: PMClass, config: Configuration, samples: int) -> list[ScanSample]:
    if samples < 2:
        raise ValueError("a scan needs at least two samples")
    _require_E(a, config)
    _require_E(b, config)
    out = []
    for k in range(samples):
        t = Fraction(k, samples - 1)
        u = a * (1 - t) + b * t
        if self_intersect(u) <= 0:
            raise NonPositiveClass(f"sample at t={t} has non-positive self-intersection")
        _, cells = owning_cells_anywhere(u, config)
        out.append(ScanSample(t, u, frozenset(cells)))
    return out


def scan_regions(samples: Sequence[ScanSample]) -> list[tuple[Fraction, Fraction, frozenset]]:
    """Maximal runs of consecutive samples with the same set of cells."""
    out: list[tuple[Fraction, Fraction, frozenset]] = []
    for s in samples:
        if out and out[-1][2] == s.cells:
            out[-1] = (out[-1][0], s.t, s.cells)
        else:
            out.append((s.t, s.t, s.cells))
    return out
