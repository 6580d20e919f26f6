from fractions import Fraction

import pytest

from orbint.affine import (
    ApartmentPoint, UnboundedRegion, enum_double_cosets, mp_log_index,
    mp_root_count, mw_pair, point_denominator, stabilizer,
)
from orbint.cells import OPEN01, TWO
from orbint.numerics import ext
from orbint.rootdata import build_root_datum


D1 = build_root_datum("A", 1)
D2 = build_root_datum("A", 2)


def a1_point(alpha_value):
    """A1 point with the given alpha-coordinate (coroot coord = value/2)."""
    return ApartmentPoint((Fraction(alpha_value) / 2,))


def a1_alpha(datum, v):
    return datum.root_value((1,), v)


def test_point_denominator():
    assert point_denominator(D1, a1_point(Fraction(1, 2)).coords) == 2
    assert point_denominator(D1, a1_point(0).coords) == 1
    x3 = ApartmentPoint((Fraction(1, 3), Fraction(1, 3)))
    # A2 barycenter-type point: alpha values 1/3, 1/3, theta 2/3
    d3 = build_root_datum("A", 2)
    assert point_denominator(d3, x3.coords) == 3


def test_stabilizer_examples():
    # hyperspecial origin: the full finite Weyl group
    st0 = stabilizer(D1, a1_point(0))
    assert len(st0) == 2
    # alcove interior point: trivial
    st_half = stabilizer(D1, a1_point(Fraction(1, 2)))
    assert len(st_half) == 1
    # alcove vertex at alpha-value 1: {1, v -> 2 - v} in alpha-coordinates
    st1 = stabilizer(D1, a1_point(1))
    assert len(st1) == 2
    refl = next(w for w in st1 if w.matrix != ((1,),))
    moved = refl.apply(a1_point(Fraction(1, 2)).coords)
    assert a1_alpha(D1, moved) == Fraction(3, 2)  # alpha: u -> 2 - u


def test_stabilizer_fixes_point():
    for letter, rank, coords in (("A", 2, (Fraction(1, 3), Fraction(1, 3))),
                                 ("B", 2, (Fraction(1, 2), Fraction(0)))):
        datum = build_root_datum(letter, rank)
        p = ApartmentPoint(coords)
        for w in stabilizer(datum, p):
            assert w.apply(p.coords) == p.coords


def test_mp_log_index_examples():
    x = a1_point(Fraction(1, 2)).coords
    y0 = a1_point(0).coords
    assert mp_log_index(D1, x, ext(0, True), y0, ext(0)) == 0
    ym2 = a1_point(-2).coords
    assert mp_log_index(D1, x, ext(0, True), ym2, ext(0)) == 2
    assert mp_log_index(D1, x, ext(Fraction(1, 2)), x, ext(Fraction(1, 2))) == 0


def test_mp_log_index_monotone_in_s():
    x = a1_point(Fraction(1, 2)).coords
    y = a1_point(-2).coords
    vals = [mp_log_index(D1, x, ext(0, True), y, ext(s, p))
            for s in (-3, -2, -1, 0, 1, 2) for p in (False, True)]
    assert vals == sorted(vals)


def test_mw_pair_examples():
    x = a1_point(Fraction(1, 2)).coords
    # v_w = 1/2 (alpha-coordinate), d_x = 1/2, d_y = -2
    v = a1_point(Fraction(1, 2)).coords
    assert mw_pair(D1, x, v, Fraction(1, 2), -2) == (0, 0)
    # v_w = 0: identical filtrations
    assert mw_pair(D1, x, (Fraction(0),), Fraction(1, 2), -2) == (0, 0)
    # v_w = 3/2: m_w - m_w' = 1
    v32 = a1_point(Fraction(3, 2)).coords
    m, mp_ = mw_pair(D1, x, v32, Fraction(1, 2), -2)
    assert m - mp_ == 1


def test_esti_bound_per_root_same_point():
    # |m - rho * max(d2 - d1, 0)| < rho for the lattice window [d1, d2) at a
    # single point z, every root: the half-open count never strays by 1
    import random
    rng = random.Random(21)
    for _ in range(120):
        datum = D2
        z = tuple(Fraction(rng.randint(-6, 6), rng.choice((1, 2, 3)))
                  for _ in range(2))
        d1 = Fraction(rng.randint(-6, 6), rng.choice((1, 2)))
        d2 = Fraction(rng.randint(-6, 6), rng.choice((1, 2)))
        for root in datum.roots:
            m = mp_root_count(datum, root, z, ext(d1), z, ext(d2))
            assert abs(m - max(d2 - d1, 0)) < 1


def test_enum_double_cosets_a1():
    x = ApartmentPoint(a1_point(Fraction(1, 2)).coords)
    y = ApartmentPoint(a1_point(0).coords)
    # d_x - d_y = 5/2: achievable alpha-values are 1/2 + 2Z; the bounded cells
    # are the two open intervals on either side of 0 plus the wall point at
    # alpha(v) = d_x - d_y; W_x is trivial so nothing folds
    reps = enum_double_cosets(D1, x, y, Fraction(1, 2), -2)
    vals = sorted(a1_alpha(D1, r.v_w) for r in reps)
    assert vals == [Fraction(-3, 2), Fraction(1, 2), Fraction(5, 2)]
    open_rep = next(r for r in reps if a1_alpha(D1, r.v_w) == Fraction(1, 2))
    wall_rep = next(r for r in reps if a1_alpha(D1, r.v_w) == Fraction(5, 2))
    ai = D1.root_index[(1,)]
    assert open_rep.cell.signs[ai] == OPEN01
    assert wall_rep.cell.signs[ai] == TWO


def test_enum_double_cosets_identity_present():
    for letter, rank, coords in (("A", 1, (Fraction(1, 4),)),
                                 ("A", 2, (Fraction(1, 3), Fraction(1, 3)))):
        datum = build_root_datum(letter, rank)
        x = ApartmentPoint(coords)
        reps = enum_double_cosets(datum, x, x, Fraction(1, 2), Fraction(-3, 2))
        assert any(all(c == 0 for c in r.v_w) for r in reps)


def test_enum_double_cosets_requires_positive_gap():
    x = ApartmentPoint(a1_point(Fraction(1, 2)).coords)
    y = ApartmentPoint(a1_point(0).coords)
    with pytest.raises(UnboundedRegion):
        enum_double_cosets(D1, x, y, Fraction(0), Fraction(0))


def test_enum_stable_under_extra_margin():
    x = ApartmentPoint(a1_point(Fraction(1, 2)).coords)
    y = ApartmentPoint(a1_point(0).coords)
    a = enum_double_cosets(D1, x, y, Fraction(1, 2), -4)
    b = enum_double_cosets(D1, x, y, Fraction(1, 2), -4, extra_margin=3)
    assert {r.v_w for r in a} == {r.v_w for r in b}
    a2 = enum_double_cosets(D2, ApartmentPoint((Fraction(1, 3), Fraction(1, 3))),
                            ApartmentPoint((0, 0)), Fraction(1, 3), -2)
    b2 = enum_double_cosets(D2, ApartmentPoint((Fraction(1, 3), Fraction(1, 3))),
                            ApartmentPoint((0, 0)), Fraction(1, 3), -2, extra_margin=2)
    assert {r.v_w for r in a2} == {r.v_w for r in b2}


def test_enum_aggregated_esti_invariant():
    datum = D2
    x = ApartmentPoint((Fraction(1, 3), Fraction(1, 3)))
    y = ApartmentPoint((0, 0))
    d_x, d_y = Fraction(1, 3), Fraction(-4)
    for rep in enum_double_cosets(datum, x, y, d_x, d_y):
        expected = Fraction(0)
        for root, rho in zip(datum.roots, datum.rho):
            av = datum.root_value(root, rep.v_w)
            expected += rho * (max(av, 0) - max(av - (d_x - d_y), 0))
        bound = sum(datum.rho)
        assert abs((rep.m_w - rep.m_wp) - expected) < bound
