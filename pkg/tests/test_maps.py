from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import L, example_config, roots
from oracles import apply_oracle, meets_exceptional_curves_nonnegatively, noether_failures
from test_acceptance import _bounded_noether_solutions
from cremona_voronoi.classes import PMClass, anti_canonical, intersect
from cremona_voronoi.config import Configuration
from cremona_voronoi.errors import (
    AdherencePairViolation,
    AlignedSupport,
    AlignedWithMaximal,
    NotPreConsistent,
    SchemaError,
    ShapeUnsupported,
    StepUnavailable,
)
from cremona_voronoi.maps import (
    CharMatrix,
    apply,
    castelnuovo_step,
    check_identities,
    compose,
    homaloidal_types,
    identity_matrix,
    inverse,
    jonquieres,
    majors_and_complexity,
    parse_characteristic,
    quadratic,
    symmetric,
    validate_characteristic,
)


def excess_ok(M: CharMatrix) -> bool:
    w = dict(zip(M.base, M.m))
    cfg = M.config
    return all(w[p] >= sum(w.get(q, 0) for q in cfg.children(p)) for p in M.base)


# identities ----------------------------------------------------------------------


@pytest.mark.parametrize("text", ["(2;1^3)", "(5;2^6)", "(8;3^7)", "(17;6^8)", "(3;2,1^4)", "(6;4,2^4,1^3)"])
def test_characteristics_pass(text):
    d, m = parse_characteristic(text)
    rep = check_identities(d, m)
    assert rep.ok
    assert [c.ok for c in rep.checks if c.index in (5, 6, 7, 8)] == [None] * 4


def test_rejects_three_two_two_one():
    rep = check_identities(3, [2, 2, 1])
    assert not rep.ok
    assert 1 in rep.failing()
    first = next(c for c in rep.checks if c.index == 1)
    assert "5" in first.detail and "6" in first.detail


def test_degree_bounds_reported():
    assert check_identities(4, [2, 2, 2, 1, 1, 1]).ok
    rep = check_identities(4, [3, 3, 2, 2, 1])
    assert 9 in rep.failing()


def test_parse_characteristic():
    assert parse_characteristic("(6;4,2^4,1^3)") == (6, (4, 2, 2, 2, 2, 1, 1, 1))
    with pytest.raises(SchemaError):
        parse_characteristic("6:4")


def test_homaloidal_types_on_at_most_eight_points():
    types = set(homaloidal_types(8))
    solutions = set(_bounded_noether_solutions(17, 8))
    # kept exactly when no exceptional curve through the points is forced
    # to meet the net negatively
    assert types == {t for t in solutions if meets_exceptional_curves_nonnegatively(*t)}
    assert len(solutions - types) == 6
    for d, m in types:
        assert not noether_failures(d, list(m), list(m), [[0] * len(m)] * len(m)) - {5, 6, 7, 8}
    assert {(2, (1, 1, 1)), (4, (2, 2, 2, 1, 1, 1)), (6, (4, 2, 2, 2, 2, 1, 1, 1))} <= types
    assert (5, (3, 3, 1, 1, 1, 1, 1, 1)) not in types


# quadratic -----------------------------------------------------------------------


def test_quadratic_matrix():
    cfg = Configuration()
    a, b, c = roots(cfg, 3)
    q = quadratic(cfg, a, b, c)
    assert q.characteristic() == (2, (1, 1, 1))
    assert q.A == ((0, 1, 1), (1, 0, 1), (1, 1, 0))
    assert validate_characteristic(q).ok
    q0, q1, q2 = q.inv_base
    assert apply(q, L) == PMClass(2, {q0: 1, q1: 1, q2: 1})


def test_quadratic_errors():
    cfg = example_config(cubic=False)
    a, b, c = roots(cfg, 3)
    cfg.declare_curve(1, {a: 1, b: 1, c: 1})
    with pytest.raises(AlignedSupport):
        quadratic(cfg, a, b, c)
    with pytest.raises(AdherencePairViolation):
        quadratic(cfg, "p0", "p1", "p2")
    with pytest.raises(NotPreConsistent):
        quadratic(cfg, "p1", a, b)


def test_quadratic_with_adherent_point_has_adherent_inverse():
    cfg = example_config(cubic=False)
    x = cfg.add_point()
    q = quadratic(cfg, "p0", "p1", x)
    assert validate_characteristic(q).ok
    # exactly one inverse base point is infinitely near another
    assert sum(1 for p in q.inv_base if not cfg.is_root(p)) == 1


# Jonquieres ----------------------------------------------------------------------


def test_jonquieres_degree_two_with_adherent_small():
    cfg = example_config(cubic=False)
    J = jonquieres(cfg, "p0", ["p1", cfg.add_point()])
    assert J.characteristic() == (2, (1, 1, 1))
    assert validate_characteristic(J).ok


def test_jonquieres_degree_three_major_configuration():
    cfg = example_config(cubic=False)
    J = jonquieres(cfg, "p0", ["p1", "p2", *roots(cfg, 2)])
    assert J.characteristic() == (3, (2, 1, 1, 1, 1))
    assert validate_characteristic(J).ok and excess_ok(J)


def test_jonquieres_action_formulas():
    cfg = Configuration()
    P = roots(cfg, 7)
    J = jonquieres(cfg, P[0], P[1:])
    d = 4
    q0, *qs = J.inv_base
    assert apply(J, L) == PMClass(d, {q0: d - 1, **{q: 1 for q in qs}})
    assert apply(J, PMClass.exceptional(P[0])) == PMClass(d - 1, {q0: d - 2, **{q: 1 for q in qs}})
    for p, q in zip(P[1:], qs):
        assert apply(J, PMClass.exceptional(p)) == PMClass(1, {q0: 1, q: 1})


def test_jonquieres_errors():
    cfg = example_config(cubic=False)
    a, b, c, d = roots(cfg, 4)
    cfg.declare_curve(1, {"p0": 1, a: 1, b: 1})
    with pytest.raises(AlignedWithMaximal):
        jonquieres(cfg, "p0", [a, b])
    with pytest.raises(ShapeUnsupported):
        jonquieres(cfg, "p0", ["p1", c, d, a])
    with pytest.raises(ShapeUnsupported):
        jonquieres(cfg, "p0", [c])
    s = cfg.add_point(["p0", "p1"])
    t = cfg.add_point(["p1"])
    with pytest.raises(AdherencePairViolation):
        jonquieres(cfg, "p0", ["p1", "p2", s, t])


def test_symmetric_matrices():
    cfg = Configuration()
    for r, (d, mult) in {6: (5, 2), 7: (8, 3), 8: (17, 6)}.items():
        M = symmetric(cfg, roots(cfg, r))
        assert M.characteristic() == (d, (mult,) * r)
        assert validate_characteristic(M).ok
    with pytest.raises(ShapeUnsupported):
        symmetric(cfg, roots(cfg, 5))
    pts = roots(cfg, 6)
    cfg.declare_curve(1, {p: 1 for p in pts[:3]})
    with pytest.raises(ShapeUnsupported):
        symmetric(cfg, pts)


# inverse, apply, compose --------------------------------------------------------


def test_inverse_involution_and_shapes():
    cfg = Configuration()
    q = quadratic(cfg, *roots(cfg, 3))
    assert inverse(inverse(q)) == q
    assert inverse(q).characteristic() == q.characteristic()
    assert inverse(q).A == q.A
    P = roots(cfg, 5)
    J = jonquieres(cfg, P[0], P[1:])
    assert inverse(J).is_jonquieres_characteristic()
    assert validate_characteristic(inverse(J)).ok


def test_apply_outside_base_creates_fresh_point():
    cfg = Configuration()
    a, b, c, x = roots(cfg, 4)
    q = quadratic(cfg, a, b, c)
    before = len(cfg)
    img = apply(q, PMClass.exceptional(x))
    assert img.degree == 0 and len(img.support()) == 1
    (y,) = img.support()
    assert len(cfg) == before + 1 and q.pushforward == {x: y}
    assert inverse(q).pushforward == {y: x}
    assert apply(inverse(q), img) == PMClass.exceptional(x)


def test_pushforward_of_point_adherent_to_base_point():
    cfg = Configuration()
    a, b, c = roots(cfg, 3)
    t = cfg.add_point([a])
    q = quadratic(cfg, a, b, c)
    (u,) = apply(q, PMClass.exceptional(t)).support()
    # the exceptional curve of a goes to the line through the other two
    # inverse points, so the image of t is a point of the plane
    assert cfg.is_root(u)


def test_compose_matched_quadratics_is_identity():
    cfg = Configuration()
    q = quadratic(cfg, *roots(cfg, 3))
    back = quadratic(cfg, *q.inv_base, inverse=q.base)
    idm = compose(back, q, cfg)
    assert idm.d == 1 and idm.r == 0
    assert apply(idm, PMClass(5, {q.base[0]: 2})) == PMClass(5, {q.base[0]: 2})


def test_compose_disjoint_quadratics():
    cfg = Configuration()
    q1 = quadratic(cfg, *roots(cfg, 3))
    q2 = quadratic(cfg, *roots(cfg, 3))
    F = compose(q2, q1, cfg)
    assert F.characteristic() == (4, (2, 2, 2, 1, 1, 1))
    assert validate_characteristic(F).ok
    for p in [*q1.base, *q2.base]:
        e = PMClass.exceptional(p)
        assert apply(F, e, cfg) == apply(q2, apply(q1, e, cfg), cfg)
    # points created after the composition agree in both directions
    z = PMClass.exceptional(cfg.add_point())
    assert apply(F, z, cfg) == apply(q2, apply(q1, z, cfg), cfg)
    w = PMClass.exceptional(cfg.add_point())
    assert apply(inverse(F), w, cfg) == apply(inverse(q1), apply(inverse(q2), w, cfg), cfg)


def test_compose_with_inverse_is_identity():
    cfg = Configuration()
    P = roots(cfg, 5)
    J = jonquieres(cfg, P[0], P[1:])
    assert compose(inverse(J), J, cfg).d == 1
    assert identity_matrix(cfg).characteristic() == (1, ())


def test_matrix_json_round_trip():
    cfg = Configuration()
    q = quadratic(cfg, *roots(cfg, 3))
    apply(q, PMClass.exceptional(cfg.add_point()))
    again = CharMatrix.from_json(q.to_json(), cfg)
    assert again == q
    with pytest.raises(SchemaError):
        CharMatrix.from_json({"d": 2}, cfg)
    bad = q.to_json()
    bad["base"] = ["zz", *bad["base"][1:]]
    with pytest.raises(SchemaError):
        CharMatrix.from_json(bad, cfg)
    bad = q.to_json()
    bad["A"] = bad["A"][:2]
    with pytest.raises(SchemaError):
        CharMatrix.from_json(bad, cfg)


# majors and the degree-decreasing step -----------------------------------------


def test_majors():
    cfg = Configuration()
    q = quadratic(cfg, *roots(cfg, 3))
    rep = majors_and_complexity(q)
    assert rep.complexity == Fraction(1, 2) and rep.h == 2
    P = roots(cfg, 5)
    rep = majors_and_complexity(jonquieres(cfg, P[0], P[1:]))
    assert rep.complexity == Fraction(1, 2) and rep.h == 4 and rep.p0 == P[0]
    rep = majors_and_complexity(symmetric(cfg, roots(cfg, 6)))
    assert rep.complexity == Fraction(3, 2) and rep.h == 5


def test_castelnuovo_step():
    cfg = Configuration()
    q = quadratic(cfg, *roots(cfg, 3))
    _, M = castelnuovo_step(cfg, q)
    assert M.d == 1
    P = roots(cfg, 7)
    J = jonquieres(cfg, P[0], P[1:])
    _, M = castelnuovo_step(cfg, J)
    assert M.d == 1
    s = symmetric(cfg, roots(cfg, 6))
    J, M = castelnuovo_step(cfg, s)
    assert M.d < s.d and validate_characteristic(M).ok
    assert J.base[0] in s.base
    with pytest.raises(StepUnavailable):
        castelnuovo_step(cfg, identity_matrix(cfg))


def test_castelnuovo_descends_to_identity():
    cfg = Configuration()
    M = symmetric(cfg, roots(cfg, 8))
    degrees = [M.d]
    while M.d > 1:
        _, M = castelnuovo_step(cfg, M)
        degrees.append(M.d)
    assert degrees == sorted(degrees, reverse=True) and degrees[-1] == 1


# properties ---------------------------------------------------------------------


@st.composite
def germ_and_classes(draw):
    cfg = Configuration()
    kind = draw(st.sampled_from(["q", "j", "s", "qq"]))
    if kind == "q":
        F = quadratic(cfg, *roots(cfg, 3))
    elif kind == "j":
        d = draw(st.integers(2, 5))
        P = roots(cfg, 2 * d - 1)
        F = jonquieres(cfg, P[0], P[1:])
    elif kind == "s":
        F = symmetric(cfg, roots(cfg, draw(st.sampled_from([6, 7, 8]))))
    else:
        q1 = quadratic(cfg, *roots(cfg, 3))
        F = compose(quadratic(cfg, q1.inv_base[0], *roots(cfg, 2)), q1, cfg)
    pool = list(F.base) + roots(cfg, 2)
    rat = st.fractions(min_value=-9, max_value=9, max_denominator=6)

    def one():
        mults = draw(st.dictionaries(st.sampled_from(pool), rat, max_size=len(pool)))
        return PMClass(draw(rat), mults)

    return cfg, F, one(), one()


@settings(max_examples=80, deadline=None)
@given(germ_and_classes())
def test_action_is_an_isometry(data):
    cfg, F, c1, c2 = data
    f1, f2 = apply(F, c1, cfg), apply(F, c2, cfg)
    assert intersect(f1, f2) == intersect(c1, c2)
    assert anti_canonical(f1) == anti_canonical(c1)
    assert apply(inverse(F), f1, cfg) == c1
    assert f1 == apply_oracle(F, c1, F.pushforward)
    assert intersect(apply(F, L, cfg), L) == F.d
    assert validate_characteristic(F).ok and excess_ok(F)
