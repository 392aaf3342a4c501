"""Characteristic matrices of plane Cremona maps and their action on classes.

A matrix ``(d; m; m'; A)`` describes ``f`` through

    f(l)     = d l   - sum_i m'_i e_{q_i}
    f(e_pj)  = m_j l - sum_i a_ij e_{q_i}

where ``p_j`` are the base points of ``f`` and ``q_i`` those of its inverse.
Points outside the base locus are carried to single points; that
correspondence is the *pushforward*, stored as a pair of dictionaries shared
between a matrix and its inverse so that extending one extends the other.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .classes import PMClass
from .config import Configuration, PointId
from .errors import (
    AdherencePairViolation,
    AlignedSupport,
    AlignedWithMaximal,
    NotPreConsistent,
    SatelliteViolation,
    SchemaError,
    ShapeUnsupported,
    StepUnavailable,
    ValidationFailure,
)


@dataclass(eq=False)
class CharMatrix:
    d: int
    base: tuple[PointId, ...]
    m: tuple[int, ...]
    inv_base: tuple[PointId, ...]
    m_prime: tuple[int, ...]
    A: tuple[tuple[int, ...], ...]  # A[i][j]: row i over inv_base, column j over base
    config: Configuration | None = field(default=None, repr=False)
    _fwd: dict[PointId, PointId] = field(default_factory=dict, repr=False)
    _bwd: dict[PointId, PointId] = field(default_factory=dict, repr=False)
    _heads: dict[PointId, PointId | None] = field(default_factory=dict, repr=False)
    # (outer, inner) for a composite; unknown pushforwards are read through them
    _factors: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        self.base = tuple(self.base)
        self.m = tuple(int(x) for x in self.m)
        self.inv_base = tuple(self.inv_base)
        self.m_prime = tuple(int(x) for x in self.m_prime)
        self.A = tuple(tuple(int(x) for x in row) for row in self.A)
        r = len(self.base)
        if len(self.m) != r or len(self.inv_base) != r or len(self.m_prime) != r:
            raise SchemaError("matrix: base, m, inv_base and m_prime must have equal length")
        if len(self.A) != r or any(len(row) != r for row in self.A):
            raise SchemaError(f"matrix: A must be {r}x{r}")
        if len(set(self.base)) != r or len(set(self.inv_base)) != r:
            raise SchemaError("matrix: repeated base point")

    @property
    def r(self) -> int:
        return len(self.base)

    @property
    def pushforward(self) -> dict[PointId, PointId]:
        return dict(self._fwd)

    def characteristic(self) -> tuple[int, tuple[int, ...]]:
        return self.d, tuple(sorted(self.m, reverse=True))

    def is_jonquieres_characteristic(self) -> bool:
        return self.d >= 2 and max(self.m, default=0) == self.d - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CharMatrix):
            return NotImplemented
        return (
            self.d == other.d
            and self.base == other.base
            and self.m == other.m
            and self.inv_base == other.inv_base
            and self.m_prime == other.m_prime
            and self.A == other.A
            and self._fwd == other._fwd
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        mults = ",".join(str(x) for x in sorted(self.m, reverse=True))
        return f"CharMatrix(({self.d};{mults}) on {list(self.base)} -> {list(self.inv_base)})"

    # serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "base": list(self.base),
            "m": list(self.m),
            "inv_base": list(self.inv_base),
            "m_prime": list(self.m_prime),
            "A": [list(row) for row in self.A],
            "pushforward": dict(sorted(self._fwd.items())),
        }

    @classmethod
    def from_json(cls, data: object, config: Configuration | None = None) -> CharMatrix:
        if not isinstance(data, dict):
            raise SchemaError("matrix: expected an object")
        try:
            d = int(data["d"])
            fields_ = {k: list(data[k]) for k in ("base", "m", "inv_base", "m_prime", "A")}
        except KeyError as exc:
            raise SchemaError(f"matrix: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError):
            raise SchemaError("matrix: malformed field") from None
        push = data.get("pushforward", {}) or {}
        if not isinstance(push, dict):
            raise SchemaError("matrix.pushforward: expected a map")
        if config is not None:
            for key in ("base", "inv_base"):
                for i, p in enumerate(fields_[key]):
                    if p not in config:
                        raise SchemaError(f"matrix.{key}[{i}]: unknown point {p!r}")
            for p, q in push.items():
                if p not in config or q not in config:
                    raise SchemaError(f"matrix.pushforward.{p}: unknown point")
        M = cls(
            d,
            fields_["base"],
            fields_["m"],
            fields_["inv_base"],
            fields_["m_prime"],
            fields_["A"],
            config,
        )
        for p, q in push.items():
            M._fwd[p] = q
            M._bwd[q] = p
        return M


# identities ---------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    index: int
    name: str
    ok: bool | None  # None when the data needed is absent
    detail: str = ""


@dataclass(frozen=True)
class CharacteristicReport:
    checks: tuple[IdentityCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok is not False for c in self.checks)

    def failing(self) -> list[int]:
        return [c.index for c in self.checks if c.ok is False]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "failing": self.failing(),
            "checks": [
                {"index": c.index, "name": c.name, "ok": c.ok, "detail": c.detail}
                for c in self.checks
            ],
        }


def check_identities(
    d: int,
    m: Sequence[int],
    m_prime: Sequence[int] | None = None,
    A: Sequence[Sequence[int]] | None = None,
) -> CharacteristicReport:
    """Check the eight relations between a degree, multiplicities and ``A``.

    Checks 9 and 10 are the derived bounds ``d >= 4 => r >= 6`` and
    ``r <= 8 => d <= 17``.  Without ``A`` (or ``m_prime``), checks 5 to 8 are
    reported as not evaluated.
    """
    r = len(m)
    out: list[IdentityCheck] = []

    s1 = sum(m)
    out.append(IdentityCheck(1, "sum m = 3d-3", s1 == 3 * d - 3, f"{s1} vs {3 * d - 3}"))
    s2 = sum(x * x for x in m)
    out.append(IdentityCheck(2, "sum m^2 = d^2-1", s2 == d * d - 1, f"{s2} vs {d * d - 1}"))
    bad = [j for j, x in enumerate(m) if x > d - 1 or x < 1]
    out.append(IdentityCheck(3, "1 <= m_j <= d-1", not bad, f"offending columns {bad}" if bad else ""))
    top = max(m, default=0)
    if d >= 2 and top == d - 1:
        ok4 = sorted(m, reverse=True) == [d - 1] + [1] * (2 * d - 2)
    else:
        ok4 = True
    out.append(IdentityCheck(4, "m_0 = d-1 => (d; d-1, 1^(2d-2))", ok4))

    if A is None or m_prime is None:
        for k, name in (
            (5, "sum_i a_ij = 3m_j-1"),
            (6, "sum_i a_ij^2 = m_j^2+1"),
            (7, "sum_i a_ij a_ik = m_j m_k"),
            (8, "sum_i m'_i a_ij = d m_j"),
        ):
            out.append(IdentityCheck(k, name, None, "matrix not supplied"))
    else:
        cols = [[A[i][j] for i in range(r)] for j in range(r)]
        neg = any(x < 0 for row in A for x in row)
        bad5 = [j for j in range(r) if sum(cols[j]) != 3 * m[j] - 1]
        out.append(
            IdentityCheck(
                5, "sum_i a_ij = 3m_j-1", not bad5 and not neg,
                ("negative entry; " if neg else "") + (f"columns {bad5}" if bad5 else ""),
            )
        )
        bad6 = [j for j in range(r) if sum(x * x for x in cols[j]) != m[j] ** 2 + 1]
        out.append(IdentityCheck(6, "sum_i a_ij^2 = m_j^2+1", not bad6, f"columns {bad6}" if bad6 else ""))
        bad7 = [
            (j, k)
            for j, k in itertools.combinations(range(r), 2)
            if sum(a * b for a, b in zip(cols[j], cols[k])) != m[j] * m[k]
        ]
        out.append(IdentityCheck(7, "sum_i a_ij a_ik = m_j m_k", not bad7, f"pairs {bad7}" if bad7 else ""))
        bad8 = [j for j in range(r) if sum(mp * a for mp, a in zip(m_prime, cols[j])) != d * m[j]]
        out.append(IdentityCheck(8, "sum_i m'_i a_ij = d m_j", not bad8, f"columns {bad8}" if bad8 else ""))

    out.append(IdentityCheck(9, "d >= 4 => r >= 6", not (d >= 4 and r < 6), f"d={d}, r={r}"))
    out.append(IdentityCheck(10, "r <= 8 => d <= 17", not (r <= 8 and d > 17), f"d={d}, r={r}"))
    return CharacteristicReport(tuple(out))


def validate_characteristic(M: CharMatrix) -> CharacteristicReport:
    return check_identities(M.d, M.m, M.m_prime, M.A)


# action -------------------------------------------------------------------


def inverse(M: CharMatrix) -> CharMatrix:
    r = M.r
    At = tuple(tuple(M.A[i][j] for i in range(r)) for j in range(r))
    return CharMatrix(
        M.d,
        M.inv_base,
        M.m_prime,
        M.base,
        M.m,
        At,
        M.config,
        _fwd=M._bwd,
        _bwd=M._fwd,
        _factors=tuple(inverse(X) for X in reversed(M._factors)),
    )


def _apply_on_base(M: CharMatrix, c: PMClass) -> PMClass:
    """Action on a class supported on base points of ``M``."""
    n = c.degree
    deg = n * M.d
    col_weight = {}
    for j, p in enumerate(M.base):
        lam = c.mult(p)
        if lam:
            deg -= lam * M.m[j]
            col_weight[j] = lam
    out = {}
    for i, q in enumerate(M.inv_base):
        v = n * M.m_prime[i] - sum((lam * M.A[i][j] for j, lam in col_weight.items()), Fraction(0))
        if v:
            out[q] = v
    return PMClass(deg, out)


def _strict_head(M: CharMatrix, p: PointId, config: Configuration) -> PointId | None:
    """Where the strict transform of the exceptional curve of base point ``p`` goes.

    If that curve is contracted it becomes the strict transform of the
    exceptional curve of some inverse base point, which is returned.
    """
    if p in M._heads:
        return M._heads[p]
    base = set(M.base)
    strict = PMClass.exceptional(p)
    for k in config.children(p):
        if k in base:
            strict = strict + PMClass(0, {k: 1})
    img = _apply_on_base(M, strict)
    head = None
    if img.degree == 0:
        heads = [q for q, v in img.items() if v == -1]
        if len(heads) == 1 and all(v in (-1, 1) for _, v in img.items()):
            head = heads[0]
    M._heads[p] = head
    return head


def _push(M: CharMatrix, p: PointId, config: Configuration | None) -> PointId:
    if p in M._fwd:
        return M._fwd[p]
    if M._factors:
        outer, inner = M._factors
        img = apply(outer, apply(inner, PMClass.exceptional(p), config), config)
        pts = list(img.items())
        if img.degree == 0 and len(pts) == 1 and pts[0][1] == -1:
            q = pts[0][0]
            M._fwd[p] = q
            M._bwd[q] = p
            return q
    if config is None:
        raise ValueError(f"no configuration to create the image of {p!r}")
    base = set(M.base)
    parents: list[PointId] = []
    for x in config.sorted(config.parents(p)):
        img = _strict_head(M, x, config) if x in base else _push(M, x, config)
        if img is not None and img not in parents:
            parents.append(img)
    try:
        q = config.add_point(parents)
    except SatelliteViolation:
        q = config.add_point(parents[:1])
    M._fwd[p] = q
    M._bwd[q] = p
    return q


def apply(M: CharMatrix, c: PMClass, config: Configuration | None = None) -> PMClass:
    """The image of ``c`` under the isometry induced by ``M``.

    Support points outside the base locus follow the pushforward; points it
    does not know yet get a fresh image point, recorded in ``M``.
    """
    cfg = config if config is not None else M.config
    base = set(M.base)
    on_base = PMClass(c.degree, {p: v for p, v in c.items() if p in base})
    out = _apply_on_base(M, on_base)
    rest = [(p, v) for p, v in c.items() if p not in base]
    if cfg is not None:
        rest.sort(key=lambda kv: cfg.rank(kv[0]))
    if not rest:
        return out
    extra = PMClass(0, {_push(M, p, cfg): v for p, v in rest})
    return out + extra


# constructors -------------------------------------------------------------


def _weights_realizable(config: Configuration, d: int, pts: Sequence[PointId], m: Sequence[int]) -> str | None:
    """Reason the weighted points cannot carry a homaloidal net of degree ``d``."""
    w = dict(zip(pts, m))
    if not config.is_pre_consistent(pts):
        return "base points are not pre-consistent"
    for p in pts:
        below = sum(w.get(q, 0) for q in config.children(p))
        if w[p] < below:
            return f"negative excess at {p!r}"
    for curve in config.bezout_curves(pts):
        val = d * curve.degree - sum(w.get(q, 0) * mu for q, mu in curve.mults)
        if val < 0:
            return f"curve {curve.to_json()} meets the net negatively ({val})"
    return None


def _inverse_parents(
    base: Sequence[PointId], A: Sequence[Sequence[int]], m: Sequence[int], config: Configuration
) -> list[set[int]]:
    """Adherence among inverse base points, read from contracted exceptional curves."""
    r = len(base)
    index = {p: j for j, p in enumerate(base)}
    parents: list[set[int]] = [set() for _ in range(r)]
    for j, p in enumerate(base):
        kids = [index[k] for k in config.children(p) if k in index]
        deg = m[j] - sum(m[k] for k in kids)
        if deg != 0:
            continue
        coeff = [A[i][j] - sum(A[i][k] for k in kids) for i in range(r)]
        heads = [i for i in range(r) if coeff[i] == -1]
        tails = [i for i in range(r) if coeff[i] == 1]
        if len(heads) != 1 or len(heads) + len(tails) != sum(1 for x in coeff if x):
            raise ShapeUnsupported("cannot read the inverse configuration from the matrix")
        for t in tails:
            parents[t].add(heads[0])
    return parents


def _create_inverse(
    config: Configuration, base: Sequence[PointId], A: Sequence[Sequence[int]], m: Sequence[int]
) -> list[PointId]:
    parents = _inverse_parents(base, A, m, config)
    r = len(base)
    names: list[PointId | None] = [None] * r
    pending = set(range(r))
    while pending:
        ready = sorted(i for i in pending if all(names[k] is not None for k in parents[i]))
        if not ready:
            raise ShapeUnsupported("inverse adherence would be cyclic")
        for i in ready:
            try:
                names[i] = config.add_point([names[k] for k in sorted(parents[i])])
            except SatelliteViolation as exc:
                raise ShapeUnsupported(f"inverse configuration is not realizable: {exc}") from None
            pending.discard(i)
    return [n for n in names if n is not None]


def _build(
    config: Configuration,
    d: int,
    base: Sequence[PointId],
    m: Sequence[int],
    m_prime: Sequence[int],
    A: Sequence[Sequence[int]],
    inverse_pts: Sequence[PointId] | None,
) -> CharMatrix:
    if inverse_pts is None:
        inverse_pts = _create_inverse(config, base, A, m)
    else:
        inverse_pts = list(inverse_pts)
        for q in inverse_pts:
            config.record(q)
        if len(inverse_pts) != len(base) or len(set(inverse_pts)) != len(base):
            raise SchemaError("supplied inverse base points do not match the base points")
    return CharMatrix(d, base, m, inverse_pts, m_prime, A, config)


def _distinct(config: Configuration, pts: Sequence[PointId]) -> None:
    for p in pts:
        config.record(p)
    if len(set(pts)) != len(pts):
        raise SchemaError(f"repeated point among {list(pts)}")


def quadratic(
    config: Configuration,
    p0: PointId,
    p1: PointId,
    p2: PointId,
    inverse: Sequence[PointId] | None = None,
) -> CharMatrix:
    """The quadratic map with base points ``p0, p1, p2``."""
    pts = [p0, p1, p2]
    _distinct(config, pts)
    if not config.is_pre_consistent(pts):
        raise NotPreConsistent(f"{pts} is not closed under adherence")
    if config.aligned(pts):
        raise AlignedSupport(f"{pts} lie on a declared line")
    for x in pts:
        others = [y for y in pts if y != x]
        if all(config.is_adherent(y, x) for y in others):
            raise AdherencePairViolation(f"{others} are both adherent to {x!r}")
    A = [[0 if i == j else 1 for j in range(3)] for i in range(3)]
    return _build(config, 2, pts, [1, 1, 1], [1, 1, 1], A, inverse)


def jonquieres_shape_error(config: Configuration, p0: PointId, smalls: Sequence[PointId]) -> Exception | None:
    """Why ``p0`` with ``smalls`` is not a supported Jonquières support (None if it is)."""
    pts = [p0, *smalls]
    _distinct(config, pts)
    if not smalls or len(smalls) % 2:
        return ShapeUnsupported("a Jonquières support needs an even positive number of small points")
    delta = len(smalls) // 2
    if not config.is_pre_consistent(pts):
        return ShapeUnsupported(f"{pts} is not closed under adherence")
    for a, b in itertools.combinations(smalls, 2):
        if config.line_through([p0, a, b]) is not None:
            return AlignedWithMaximal(f"{a!r} and {b!r} are aligned with {p0!r}")
    sset = set(smalls)
    for x in config.points:
        if x == p0:
            continue
        kids = [q for q in config.children(x) if q in sset]
        if len(kids) >= 2:
            return AdherencePairViolation(f"{kids[:2]} are both adherent to {x!r}")
    adherent = [q for q in smalls if config.is_adherent(q, p0)]
    shape_i = len(adherent) == delta
    shape_ii = all(config.is_root(q) for q in smalls)
    if not (shape_i or shape_ii):
        return ShapeUnsupported(
            f"{len(adherent)} of {2 * delta} small points are adherent to {p0!r}; "
            f"supported shapes have exactly {delta} or only points of the plane"
        )
    d = delta + 1
    why = _weights_realizable(config, d, pts, [d - 1] + [1] * (2 * delta))
    if why:
        return ShapeUnsupported(why)
    return None


def jonquieres(
    config: Configuration,
    p0: PointId,
    smalls: Sequence[PointId],
    inverse: Sequence[PointId] | None = None,
) -> CharMatrix:
    """The Jonquières map of degree ``len(smalls)/2 + 1`` with maximal base point ``p0``."""
    err = jonquieres_shape_error(config, p0, smalls)
    if err is not None:
        raise err
    r = len(smalls) + 1
    d = len(smalls) // 2 + 1
    A = [[0] * r for _ in range(r)]
    A[0][0] = d - 2
    for i in range(1, r):
        A[i][0] = 1
        A[0][i] = 1
        A[i][i] = 1
    m = [d - 1] + [1] * (r - 1)
    return _build(config, d, [p0, *smalls], m, list(m), A, inverse)


_SYMMETRIC = {6: (5, 2, 1, 0), 7: (8, 3, 1, 2), 8: (17, 6, 2, 3)}


def symmetric(
    config: Configuration, pts: Sequence[PointId], inverse: Sequence[PointId] | None = None
) -> CharMatrix:
    """The symmetric maps (5;2^6), (8;3^7) and (17;6^8) on 6, 7 or 8 points."""
    pts = list(pts)
    _distinct(config, pts)
    if len(pts) not in _SYMMETRIC:
        raise ShapeUnsupported("symmetric maps have 6, 7 or 8 base points")
    d, mult, off, diag = _SYMMETRIC[len(pts)]
    pos = config.almost_general_position(pts)
    if not pos:
        raise ShapeUnsupported(f"base points not in almost general position ({pos.violation})")
    why = _weights_realizable(config, d, pts, [mult] * len(pts))
    if why:
        raise ShapeUnsupported(why)
    r = len(pts)
    A = [[diag if i == j else off for j in range(r)] for i in range(r)]
    return _build(config, d, pts, [mult] * r, [mult] * r, A, inverse)


def compose(G: CharMatrix, F: CharMatrix, config: Configuration | None = None) -> CharMatrix:
    """The matrix of ``G o F``, computed through the action on classes."""
    cfg = config or F.config or G.config
    Fi, Gi = inverse(F), inverse(G)

    def forward(c: PMClass) -> PMClass:
        return apply(G, apply(F, c, cfg), cfg)

    def backward(c: PMClass) -> PMClass:
        return apply(Fi, apply(Gi, c, cfg), cfg)

    ell = PMClass.line()
    pre = backward(ell)
    img = forward(ell)
    if pre.degree.denominator != 1 or pre.degree != img.degree:
        raise ValidationFailure("composite degrees disagree")
    d = int(pre.degree)

    def ordered(c: PMClass) -> list[tuple[PointId, int]]:
        items = []
        for p, v in c.items():
            if v <= 0 or v.denominator != 1:
                raise ValidationFailure(f"composite has multiplicity {v} at {p!r}")
            items.append((p, int(v)))
        key = cfg.rank if cfg is not None else (lambda p: p)
        return sorted(items, key=lambda kv: (-kv[1], key(kv[0])))

    base = ordered(pre)
    inv = ordered(img)
    inv_index = {q: i for i, (q, _) in enumerate(inv)}
    r = len(base)
    A = [[0] * r for _ in range(r)]
    for j, (p, mj) in enumerate(base):
        col = forward(PMClass.exceptional(p))
        if col.degree != mj:
            raise ValidationFailure(f"column {p!r} has degree {col.degree}, expected {mj}")
        for q, v in col.items():
            if q not in inv_index or v.denominator != 1:
                raise ValidationFailure(f"column {p!r} leaves the inverse base locus at {q!r}")
            A[inv_index[q]][j] = int(v)

    out = CharMatrix(
        d, [p for p, _ in base], [x for _, x in base], [q for q, _ in inv], [x for _, x in inv], A, cfg, _factors=(G, F)
    )
    base_set = set(out.base)
    domain = set(F.base) | set(F._fwd)
    g_dom = set(G.base) | set(G._fwd)
    for x in g_dom & (set(F.inv_base) | set(F._bwd)):
        y = apply(Fi, PMClass.exceptional(x), cfg)
        if y.degree == 0 and len(y.support()) == 1:
            domain |= y.support()
    for p in sorted(domain - base_set, key=cfg.rank if cfg is not None else None):
        y = forward(PMClass.exceptional(p))
        pts = list(y.items())
        if y.degree == 0 and len(pts) == 1 and pts[0][1] == -1:
            out._fwd[p] = pts[0][0]
            out._bwd[pts[0][0]] = p
    report = validate_characteristic(out)
    if not report.ok:
        raise ValidationFailure(f"composite fails identities {report.failing()}")
    return out


def identity_matrix(config: Configuration | None = None) -> CharMatrix:
    return CharMatrix(1, (), (), (), (), (), config)


# majors and the degree-decreasing step ------------------------------------


@dataclass(frozen=True)
class MajorReport:
    p0: PointId | None
    complexity: Fraction
    majors: tuple[PointId, ...]

    @property
    def h(self) -> int:
        return len(self.majors)


def _max_base_point(M: CharMatrix, config: Configuration | None) -> int:
    key = (lambda j: (-M.m[j], config.rank(M.base[j]))) if config is not None else (lambda j: (-M.m[j], j))
    return min(range(M.r), key=key)


def majors_and_complexity(M: CharMatrix, config: Configuration | None = None) -> MajorReport:
    cfg = config or M.config
    if M.r == 0:
        return MajorReport(None, Fraction(0), ())
    j0 = _max_base_point(M, cfg)
    complexity = Fraction(M.d - M.m[j0], 2)
    majors = tuple(p for j, p in enumerate(M.base) if j != j0 and M.m[j] > complexity)
    return MajorReport(M.base[j0], complexity, majors)


def _candidate_supports(config: Configuration, p0: PointId, pool: Sequence[PointId]) -> Iterable[list[PointId]]:
    """Greedy prefixes of supported Jonquières shapes drawn from ``pool`` in order."""
    roots: list[PointId] = []
    if config.is_root(p0) or all(q in pool for q in config.parents(p0)):
        for q in pool:
            if config.is_root(q) and all(config.line_through([p0, q, x]) is None for x in roots):
                roots.append(q)
    for k in range(1, len(roots) // 2 + 1):
        yield roots[: 2 * k]
    adh = [q for q in pool if config.is_adherent(q, p0)]
    non = [q for q in pool if not config.is_adherent(q, p0)]
    for k in range(1, min(len(adh), len(non)) + 1):
        for a_pick in itertools.combinations(adh, k) if len(adh) <= 8 else [tuple(adh[:k])]:
            chosen = list(a_pick)
            for q in non:
                if len(chosen) == 2 * k:
                    break
                trial = chosen + [q]
                if config.parents(q) <= set(trial) | {p0} and jonquieres_shape_error_partial(config, p0, trial) is None:
                    chosen = trial
            if len(chosen) == 2 * k:
                yield chosen


def jonquieres_shape_error_partial(config: Configuration, p0: PointId, smalls: Sequence[PointId]) -> str | None:
    """Pairwise conditions only, used while growing a support."""
    for a, b in itertools.combinations(smalls, 2):
        if config.line_through([p0, a, b]) is not None:
            return "aligned"
    sset = set(smalls)
    for x in config.points:
        if x != p0 and sum(1 for q in config.children(x) if q in sset) >= 2:
            return "adherent pair"
    return None


def castelnuovo_step(config: Configuration, M: CharMatrix) -> tuple[CharMatrix, CharMatrix]:
    """One degree-decreasing step ``M -> M o J^-1`` with ``J`` a Jonquières map."""
    if M.d <= 1:
        raise StepUnavailable("the map is already linear")
    rep = majors_and_complexity(M, config)
    p0 = rep.p0
    j0 = M.base.index(p0)
    m0 = M.m[j0]
    weight = dict(zip(M.base, M.m))
    pool = sorted((p for p in M.base if p != p0), key=lambda p: (-weight[p], config.rank(p)))
    best: tuple[Fraction, int, list[PointId]] | None = None
    for S in _candidate_supports(config, p0, pool):
        if jonquieres_shape_error(config, p0, S) is not None:
            continue
        delta = len(S) // 2
        gain = sum(weight[q] for q in S) - delta * (M.d - m0)
        if gain > 0 and (best is None or (gain, -delta) > (best[0], -best[1])):
            best = (gain, delta, S)
    if best is None:
        raise StepUnavailable("no supported Jonquières support among the base points lowers the degree")
    J = jonquieres(config, p0, best[2])
    M2 = compose(M, inverse(J), config)
    if M2.d >= M.d:
        raise ValidationFailure("degree did not decrease")
    return J, M2


# homaloidal types -----------------------------------------------------------


def _hudson_reduces(d: int, m: Sequence[int]) -> bool:
    """Repeated quadratic reduction on the three largest multiplicities ends at (1)."""
    cur = sorted((x for x in m if x), reverse=True)
    while True:
        if any(x < 0 for x in cur) or d < 1:
            return False
        if d == 1:
            return not cur
        top = (cur + [0, 0, 0])[:3]
        s = sum(top)
        if s <= d:
            return False
        new = [d - top[1] - top[2], d - top[0] - top[2], d - top[0] - top[1]] + cur[3:]
        d = 2 * d - s
        cur = sorted((x for x in new if x), reverse=True)


@lru_cache(maxsize=None)
def homaloidal_types(max_points: int = 8) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """All characteristics ``(d; m)`` of plane Cremona maps with at most ``max_points`` base points.

    Candidates solve the two degree equations and are confirmed by the
    quadratic reduction test; the degree is bounded by 17 for eight points.
    """
    out = []
    dmax = 17 if max_points <= 8 else 3 * max_points
    for d in range(2, dmax + 1):
        target1, target2 = 3 * d - 3, d * d - 1

        def rec(prefix: list[int], cap: int, s1: int, s2: int) -> Iterable[list[int]]:
            if s1 == target1 and s2 == target2:
                yield list(prefix)
                return
            if len(prefix) == max_points or s1 >= target1:
                return
            for x in range(min(cap, target1 - s1), 0, -1):
                if s2 + x * x > target2:
                    continue
                prefix.append(x)
                yield from rec(prefix, x, s1 + x, s2 + x * x)
                prefix.pop()

        for m in rec([], d - 1, 0, 0):
            if _hudson_reduces(d, m):
                out.append((d, tuple(m)))
    return tuple(out)


def parse_characteristic(text: str) -> tuple[int, tuple[int, ...]]:
    """Parse ``"(5;2^6)"`` or ``"(6;4,2^4,1^3)"``."""
    body = text.strip().strip("()")
    try:
        head, tail = body.split(";")
        d = int(head)
        m: list[int] = []
        for part in tail.split(","):
            part = part.strip()
            if not part:
                continue
            if "^" in part:
                v, k = part.split("^")
                m.extend([int(v)] * int(k))
            else:
                m.append(int(part))
    except ValueError:
        raise SchemaError(f"cannot parse characteristic {text!r}") from None
    return d, tuple(m)


