"""Voronoi predicates: the convex set E, the identity cell and its neighbours.

Classes are unnormalized representatives; every predicate here is invariant
under positive rational scaling.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .classes import (
    PMClass,
    anti_canonical,
    excess,
    fraction_str,
    intersect,
    is_boundary,
    order_multiplicities,
    self_intersect,
)
from .config import Configuration, CurveRecord, PointId
from .errors import (
    HypothesisViolated,
    NonPositiveClass,
    NotBoundaryClass,
    NotInE,
    SupportNotContained,
    ValidationFailure,
)
from .maps import CharMatrix, apply, inverse


@dataclass(frozen=True)
class MembershipReport:
    verdict: bool
    violated: str | None = None
    witness: object = None
    slack: Fraction | None = None

    def __bool__(self) -> bool:
        return self.verdict

    def to_json(self) -> dict:
        w = self.witness
        if isinstance(w, CurveRecord):
            w = {"curve": w.to_json(), "implicit": w.implicit}
        elif isinstance(w, (tuple, list)):
            w = list(w)
        return {
            "verdict": self.verdict,
            "violated": self.violated,
            "witness": w,
            "slack": None if self.slack is None else fraction_str(self.slack),
        }


# the set E --------------------------------------------------------------------


def e_conditions(c: PMClass, config: Configuration) -> MembershipReport:
    """The four conditions cutting out E, without the positivity requirement."""
    for p in config.sorted(c.support()):
        if c.mult(p) < 0:
            return MembershipReport(False, "NegativeMult", p, c.mult(p))
    k = anti_canonical(c)
    if k < 0:
        return MembershipReport(False, "AntiCanonical", None, k)
    pts = set(c.support())
    for p in list(pts):
        pts |= config.parents(p)
    for p in config.sorted(pts):
        x = excess(c, config, p)
        if x < 0:
            return MembershipReport(False, "Excess", p, x)
    for curve in config.bezout_curves(c.support()):
        val = c.degree * curve.degree - sum((c.mult(q) * mu for q, mu in curve.mults), Fraction(0))
        if val < 0:
            return MembershipReport(False, "Bezout", curve, val)
    return MembershipReport(True)


def in_E(c: PMClass, config: Configuration) -> MembershipReport:
    if self_intersect(c) <= 0 or c.degree <= 0:
        raise NonPositiveClass("membership in E is asked of classes with c.c > 0 and positive degree")
    return e_conditions(c, config)


def _require_E(c: PMClass, config: Configuration) -> None:
    rep = in_E(c, config)
    if not rep.verdict:
        raise NotInE(f"class is not in E: {rep.violated} at {rep.witness}")


# top triples ------------------------------------------------------------------


def _top_values(c: PMClass, config: Configuration) -> list[Fraction]:
    vals = [v for _, v in order_multiplicities(c, config)[:3]]
    return vals + [Fraction(0)] * (3 - len(vals))


def top_triples(c: PMClass, config: Configuration) -> list[tuple[PointId, PointId, PointId]]:
    """Every way of choosing points carrying the three largest multiplicities.

    Only pre-consistent choices are kept; empty when the support has fewer
    than three points.
    """
    order = order_multiplicities(c, config)
    if len(order) < 3:
        return []
    v0, v1, v2 = (v for _, v in order[:3])
    groups: dict[Fraction, list[PointId]] = {}
    for p, v in order:
        groups.setdefault(v, []).append(p)
    out = []
    seen = set()
    for p0 in groups[v0]:
        for p1 in groups[v1]:
            if p1 == p0:
                continue
            for p2 in groups[v2]:
                if p2 in (p0, p1):
                    continue
                key = (p0, frozenset((p1, p2)))
                if key in seen:
                    continue
                seen.add(key)
                a, b = config.sorted((p1, p2))
                if config.is_pre_consistent((p0, a, b)):
                    out.append((p0, a, b))
    return out


def triple_kind(config: Configuration, triple: Sequence[PointId]) -> str:
    """One of ``aligned``, ``adherent`` (two points adherent to the third) or ``quadratic``."""
    if config.aligned(triple):
        return "aligned"
    for x in triple:
        others = [y for y in triple if y != x]
        if all(config.is_adherent(y, x) for y in others):
            return "adherent"
    return "quadratic"


def is_special(c: PMClass, config: Configuration) -> bool:
    triples = top_triples(c, config)
    if not triples:
        return False
    if c.degree >= sum(_top_values(c, config)):
        return False
    return all(triple_kind(config, t) == "adherent" and _adherent_head(config, t) == t[0] for t in triples)


def _adherent_head(config: Configuration, triple: Sequence[PointId]) -> PointId | None:
    for x in triple:
        if all(config.is_adherent(y, x) for y in triple if y != x):
            return x
    return None


# Jonquières subset search -------------------------------------------------------


def _pair_conflicts(config: Configuration, p0: PointId, pts: Sequence[PointId]) -> set[frozenset]:
    """Pairs of points that cannot both be small points of a map with maximal point ``p0``."""
    bad: set[frozenset] = set()
    for a, b in itertools.combinations(pts, 2):
        if config.line_through([p0, a, b]) is not None:
            bad.add(frozenset((a, b)))
        elif (config.parents(a) & config.parents(b)) - {p0}:
            bad.add(frozenset((a, b)))
    return bad


def admissible_subset(config: Configuration, p0: PointId, S: Sequence[PointId]) -> bool:
    """Conditions on small points: pre-consistent with ``p0``, no pair aligned with
    ``p0``, no two adherent to a common third point other than ``p0``."""
    s = set(S)
    if not S or p0 in s:
        return False
    if not config.is_pre_consistent(s | {p0}):
        return False
    for a, b in itertools.combinations(config.sorted(s), 2):
        if config.line_through([p0, a, b]) is not None:
            return False
    for x in config.points:
        if x != p0 and sum(1 for q in config.children(x) if q in s) >= 2:
            return False
    return True


def subset_slack(c: PMClass, config: Configuration, p0: PointId, S: Sequence[PointId]) -> Fraction:
    """``max(a, |S|-a)*(n - lam_0) - sum_S lam`` with ``a`` the points of S adherent to ``p0``."""
    a = sum(1 for q in S if config.is_adherent(q, p0))
    return max(a, len(S) - a) * (c.degree - c.mult(p0)) - sum((c.mult(q) for q in S), Fraction(0))


def _witness_key(config: Configuration, S: Sequence[PointId]) -> tuple:
    return (len(S), [config.rank(q) for q in config.sorted(S)])


def brute_force_subset_search(
    c: PMClass, config: Configuration, p0: PointId
) -> tuple[Fraction, tuple[PointId, ...]] | None:
    """Minimal slack over all admissible subsets, by enumeration."""
    pool = config.sorted(q for q in c.support() if q != p0)
    best = None
    for k in range(1, len(pool) + 1):
        for S in itertools.combinations(pool, k):
            if not admissible_subset(config, p0, S):
                continue
            s = subset_slack(c, config, p0, S)
            if best is None or (s, _witness_key(config, S)) < (best[0], _witness_key(config, best[1])):
                best = (s, tuple(S))
    return best


def _search(c: PMClass, config: Configuration, p0: PointId, collect_zero: bool = False):
    """Branch and bound over subsets of the support.

    Points are visited parents first so that pre-consistency is decided
    when a point is reached; the bound assumes the best remaining points can
    be added while the padding term only grows.
    """
    K = c.degree - c.mult(p0)
    pool = [q for q in c.support() if q != p0]
    pool.sort(key=lambda q: (config.depth(q), -c.mult(q), config.rank(q)))
    lam = [c.mult(q) for q in pool]
    adh = [config.is_adherent(q, p0) for q in pool]
    idx = {q: i for i, q in enumerate(pool)}
    need = [[idx[x] for x in config.parents(q) if x in idx] for q in pool]
    # parents outside the support can never be included
    blocked_parent = [any(x != p0 and x not in idx for x in config.parents(q)) for q in pool]
    conflicts = _pair_conflicts(config, p0, pool)
    conflict_idx = [set() for _ in pool]
    for pair in conflicts:
        a, b = (idx[x] for x in pair)
        conflict_idx[a].add(b)
        conflict_idx[b].add(a)
    N = len(pool)
    # for each suffix, the remaining values sorted decreasingly, as prefix sums
    suffix_prefix: list[list[Fraction]] = []
    for i in range(N + 1):
        vals = sorted(lam[i:], reverse=True)
        acc = [Fraction(0)]
        for v in vals:
            acc.append(acc[-1] + v)
        suffix_prefix.append(acc)

    best: list = [None, None]  # gain, subset
    zeros: list[tuple[PointId, ...]] = []
    chosen: list[int] = []
    chosen_set: set[int] = set()

    def bound(i: int, total: Fraction, a: int, b: int) -> Fraction:
        pref = suffix_prefix[i]
        top = None
        for k in range(len(pref)):
            # k more points: at best they split to keep max(a, b) small
            pad = max(a, b, -(-(a + b + k) // 2))
            g = total + pref[k] - K * pad
            if top is None or g > top:
                top = g
        return top

    def record(total: Fraction, a: int, b: int) -> None:
        if not chosen:
            return
        gain = total - K * max(a, b)
        S = tuple(pool[j] for j in chosen)
        if collect_zero:
            if gain == 0:
                zeros.append(S)
            return
        if best[0] is None or gain > best[0] or (
            gain == best[0] and _witness_key(config, S) < _witness_key(config, best[1])
        ):
            best[0], best[1] = gain, S

    def rec(i: int, total: Fraction, a: int, b: int) -> None:
        if i == N:
            record(total, a, b)
            return
        ub = bound(i, total, a, b)
        if collect_zero:
            if ub < 0:
                return
        elif best[0] is not None and ub < best[0]:
            return
        ok = (
            not blocked_parent[i]
            and all(j in chosen_set for j in need[i])
            and not (conflict_idx[i] & chosen_set)
        )
        if ok:
            chosen.append(i)
            chosen_set.add(i)
            if adh[i]:
                rec(i + 1, total + lam[i], a + 1, b)
            else:
                rec(i + 1, total + lam[i], a, b + 1)
            chosen.pop()
            chosen_set.discard(i)
        rec(i + 1, total, a, b)

    rec(0, Fraction(0), 0, 0)
    if collect_zero:
        return [tuple(config.sorted(S)) for S in zeros]
    if best[0] is None:
        return None
    return -best[0], tuple(config.sorted(best[1]))


def jonquieres_subset_search(
    c: PMClass, config: Configuration, p0: PointId
) -> tuple[Fraction, tuple[PointId, ...]] | None:
    """Minimal slack over admissible subsets and a subset attaining it."""
    return _search(c, config, p0)


def tight_subsets(c: PMClass, config: Configuration, p0: PointId) -> list[tuple[PointId, ...]]:
    """All admissible subsets of slack exactly zero."""
    return _search(c, config, p0, collect_zero=True)


# the identity cell --------------------------------------------------------------


def in_V_id(c: PMClass, config: Configuration, check_e: bool = True) -> MembershipReport:
    """Membership in the Voronoi cell of the identity."""
    if check_e:
        _require_E(c, config)
    n = c.degree
    vals = _top_values(c, config)
    s3 = sum(vals)
    triples = top_triples(c, config)
    if n >= s3:
        return MembershipReport(True, None, triples[0] if triples else None, n - s3)
    kinds = [(t, triple_kind(config, t)) for t in triples]
    for t, kind in kinds:
        if kind == "aligned":
            return MembershipReport(True, None, t, n - s3)
    if not is_special(c, config):
        for t, kind in kinds:
            if kind == "quadratic":
                return MembershipReport(False, "TopTriple", t, n - s3)
        return MembershipReport(False, "TopTriple", triples[0] if triples else None, n - s3)
    p0 = triples[0][0]
    found = jonquieres_subset_search(c, config, p0)
    if found is None:
        return MembershipReport(True, None, (p0, ()), None)
    slack, S = found
    if slack >= 0:
        return MembershipReport(True, None, (p0, S), slack)
    return MembershipReport(False, "JonquieresWitness", (p0, S), slack)


def in_cell(c: PMClass, config: Configuration, F: CharMatrix) -> bool:
    """Whether ``c`` lies in the cell whose centre is the image of the line under ``F``."""
    _require_E(c, config)
    pulled = apply(inverse(F), c, config)
    return in_V_id(pulled, config, check_e=False).verdict


def is_tight_with(c: PMClass, center: PMClass) -> bool:
    """For ``c`` in the identity cell: it also lies in the cell centred at ``center``."""
    return intersect(c, center) == c.degree


# adjacency --------------------------------------------------------------------------


class AdjacencyClass(enum.Enum):
    JonquieresCharacteristic = "JonquieresCharacteristic"
    AlmostGeneralAtMost8 = "AlmostGeneral<=8"
    AlmostGeneral9Only = "AlmostGeneral9Only"
    NotAdjacent = "NotAdjacent"
    NotQuasiAdjacent = "NotQuasiAdjacent"

    @property
    def adjacent(self) -> bool:
        return self in (AdjacencyClass.JonquieresCharacteristic, AdjacencyClass.AlmostGeneralAtMost8)

    @property
    def quasi_adjacent(self) -> bool:
        return self.adjacent or self is AdjacencyClass.AlmostGeneral9Only


def _both_sides_general(F: CharMatrix, config: Configuration) -> bool:
    # a declared violation on either side is decisive, since the two
    # properties are equivalent for maps with at most nine base points
    return bool(config.almost_general_position(F.inv_base)) and bool(
        config.almost_general_position(F.base)
    )


def _classify(F: CharMatrix, config: Configuration, allow_nine: bool) -> AdjacencyClass:
    if F.d < 2:
        raise ValueError("a linear germ indexes the identity cell itself")
    if F.is_jonquieres_characteristic():
        return AdjacencyClass.JonquieresCharacteristic
    if F.r <= 8 and _both_sides_general(F, config):
        if F.d > 17:
            raise ValidationFailure(f"degree {F.d} exceeds 17 with {F.r} base points")
        return AdjacencyClass.AlmostGeneralAtMost8
    if allow_nine:
        if F.r == 9 and _both_sides_general(F, config):
            return AdjacencyClass.AlmostGeneral9Only
        return AdjacencyClass.NotQuasiAdjacent
    return AdjacencyClass.NotAdjacent


def adjacency_classify(F: CharMatrix, config: Configuration) -> AdjacencyClass:
    return _classify(F, config, allow_nine=False)


def quasi_adjacency_classify(F: CharMatrix, config: Configuration) -> AdjacencyClass:
    return _classify(F, config, allow_nine=True)


def _max_inverse_points(F: CharMatrix) -> list[PointId]:
    top = max(F.m_prime)
    return [q for q, mp in zip(F.inv_base, F.m_prime) if mp == top]


def intersection_witness(F: CharMatrix, config: Configuration) -> PMClass | None:
    """A class lying in both the identity cell and the cell of ``F``, if they meet."""
    kind = adjacency_classify(F, config)
    if kind is AdjacencyClass.JonquieresCharacteristic:
        q0 = config.sorted(_max_inverse_points(F))[0]
        mults = {q: 1 for q in F.inv_base}
        mults[q0] = F.d - 1
        u = PMClass(F.d + 1, mults)
    elif kind is AdjacencyClass.AlmostGeneralAtMost8:
        u = PMClass(3, {q: 1 for q in F.inv_base})
    else:
        return None
    if not (in_E(u, config) and in_V_id(u, config, check_e=False) and in_cell(u, config, F)):
        raise ValidationFailure("declared incidences prevent the expected witness from lying in both cells")
    return u


# boundary at infinity ------------------------------------------------------------


class BoundaryClassKind(enum.Enum):
    OneSymmetricPure = "OneSymmetricPure"
    NineSymmetricPure = "NineSymmetricPure"
    SpecialCandidate = "SpecialCandidate"
    NotBoundary = "NotBoundary"


def _nine_symmetric_pure(c: PMClass) -> bool:
    return len(c.support()) == 9 and all(v * 3 == c.degree for _, v in c.items())


def boundary_classify(c: PMClass, config: Configuration) -> BoundaryClassKind:
    if not is_boundary(c):
        raise NotBoundaryClass("class is not isotropic with positive degree")
    if not e_conditions(c, config):
        return BoundaryClassKind.NotBoundary
    items = list(c.items())
    if len(items) == 1 and items[0][1] == c.degree:
        return BoundaryClassKind.OneSymmetricPure
    if _nine_symmetric_pure(c):
        if config.almost_general_position(c.support()):
            return BoundaryClassKind.NineSymmetricPure
        return BoundaryClassKind.NotBoundary
    if is_special(c, config):
        return BoundaryClassKind.SpecialCandidate
    return BoundaryClassKind.NotBoundary


def boundary_pushforward(F: CharMatrix, c: PMClass, config: Configuration | None = None) -> PMClass:
    """Pull the nine-point class ``c`` back along ``F``."""
    if not _nine_symmetric_pure(c):
        raise HypothesisViolated("expected a class 3l - sum of nine e_p, up to scaling")
    missing = set(F.inv_base) - c.support()
    if missing:
        raise SupportNotContained(f"inverse base points {sorted(missing)} are outside the support")
    out = apply(inverse(F), c, config)
    if not (_nine_symmetric_pure(out) and is_boundary(out)):
        raise ValidationFailure("pullback is not nine-symmetric pure")
    return out


def common_boundary(F: CharMatrix, G: CharMatrix, config: Configuration) -> PMClass | None:
    """A null class at infinity shared by the cells of ``F`` and ``G``, when one exists."""
    if F.is_jonquieres_characteristic() and G.is_jonquieres_characteristic():
        common = set(_max_inverse_points(F)) & set(_max_inverse_points(G))
        if common:
            p0 = config.sorted(common)[0]
            return PMClass(1, {p0: 1})
    union = set(F.inv_base) | set(G.inv_base)
    if len(union) > 9 or not config.almost_general_position(union):
        return None
    pts = config.sorted(union)
    while len(pts) < 9:
        pts.append(config.fresh_point())
    return PMClass(3, {p: 1 for p in pts})


@dataclass(frozen=True)
class SymmetricBound:
    r: int
    pure: bool
    kind: str  # "interior" or "boundary"


def symmetric_r_bound(c: PMClass, config: Configuration) -> SymmetricBound:
    """Count the points of multiplicity a third of the degree, and check the bounds."""
    top = max((v for _, v in c.items()), default=Fraction(0))
    if 3 * top != c.degree or c.degree <= 0:
        raise HypothesisViolated("largest multiplicity must be a third of the degree")
    r = sum(1 for _, v in c.items() if v == top)
    pure = len(c.support()) == r
    s = self_intersect(c)
    if s < 0:
        raise NonPositiveClass(f"self-intersection {s} is negative")
    if s > 0:
        _require_E(c, config)
        if r > 8:
            raise ValidationFailure(f"{r} points of multiplicity n/3 in E")
        return SymmetricBound(r, pure, "interior")
    rep = e_conditions(c, config)
    if not rep:
        raise NotInE(f"boundary class violates {rep.violated}")
    if r != 9 or not pure:
        raise ValidationFailure("boundary class with multiplicity n/3 must be nine-symmetric pure")
    return SymmetricBound(r, pure, "boundary")
