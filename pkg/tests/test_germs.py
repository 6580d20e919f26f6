from fractions import Fraction

import pytest

from orbint.affine import ApartmentPoint
from orbint.classes import CosetSetup, stabilize
from orbint.finitegeom import GradedSetup
from orbint.germs import (
    DegreeAnomalyError, GeometryContext, InvalidPartition, NilpotentSpec,
    assemble, choose_ell, degree_filter, orbit_dim, prune,
)
from orbint.numerics import QuasiPoly, RatFuncQ, Poly
from orbint.rootdata import build_root_datum

D1 = build_root_datum("A", 1)
D2 = build_root_datum("A", 2)


def test_orbit_dim_examples():
    assert orbit_dim([1, 1, 1]) == 0
    assert orbit_dim([2]) == 2
    assert orbit_dim([3]) == 6
    assert orbit_dim([2, 1]) == 4
    with pytest.raises(InvalidPartition):
        orbit_dim([])
    with pytest.raises(InvalidPartition):
        orbit_dim([0, 2])


def test_choose_ell():
    x2 = ApartmentPoint((Fraction(1, 4),))     # denominator 2
    y0 = ApartmentPoint((Fraction(0),))
    assert choose_ell(D1, x2, y0) == 2
    x3 = ApartmentPoint((Fraction(1, 3), Fraction(1, 3)))
    assert choose_ell(D2, x3, ApartmentPoint((0, 0))) == 6


def sl2_scs():
    setup = CosetSetup(D1, ApartmentPoint((Fraction(1, 4),)),
                       ApartmentPoint((Fraction(0),)), Fraction(1, 2),
                       Fraction(0), 2)
    return stabilize(setup)


def sl2_spec(q=3):
    ys = GradedSetup(2, q, (Fraction(0),), Fraction(0))
    phi_y = [0, 0, 0]
    phi_y[ys.vx_index[("root", (1,))]] = 1
    return NilpotentSpec(partition=(2,), y=ApartmentPoint((Fraction(0),)),
                         d_y_star=Fraction(0), phi_y_star=tuple(phi_y),
                         hypothesis_asserted=True)


def sl2_phi_x(q=3):
    gs = GradedSetup(2, q, (Fraction(1, 4),), Fraction(1, 2))
    vec = [0, 0]
    vec[gs.vx_index[("root", (1,))]] = 1
    vec[gs.vx_index[("root", (-1,))]] = 2   # non-square mod 3 (and mod 5)
    return tuple(vec)


def test_prune_logic():
    scs = sl2_scs()
    pruned = {scs.cells[k].key(): prune(scs, k, 2) for k in scs.keys}
    # the wall cell has its single vertex at tau = 2 = dim: not pruned;
    # both open cells touch the origin (tau = 0 < 2): pruned
    assert sorted(pruned.values()) == [False, True, True]
    # dim 0 orbit: nothing is pruned
    assert not any(prune(scs, k, 0) for k in scs.keys)


def test_degree_filter_and_anomaly():
    scs = sl2_scs()
    from orbint.classes import p_poly
    for k in scs.keys:
        fit = p_poly(scs, k)
        present = degree_filter(scs, k, fit, 2)
        assert present  # all three classes carry the degree-2 term
    bogus = QuasiPoly({(Fraction(1), 0): RatFuncQ(Poly((1,)))})
    with pytest.raises(DegreeAnomalyError):
        degree_filter(scs, scs.keys[0], bogus, 2)


def test_assemble_sl2_full():
    scs = sl2_scs()
    spec = sl2_spec()
    report = assemble(scs, spec, (3, 5), phi_x_vec=sl2_phi_x(), nsize=2,
                      mu_base={3: Fraction(4), 5: Fraction(12)})
    assert report.target_degree == 2
    # Gamma-tilde = 2q at the target degree
    assert report.gamma_tilde == {3: 6, 5: 10}
    # degree-0 coefficient assembles to zero: the zero orbit misses the coset
    assert report.degree_values[3].get(Fraction(0), Fraction(0)) == 0
    assert report.degree_values[5].get(Fraction(0), Fraction(0)) == 0
    # pruned classes computed explicitly give J = 0 (vanishing check)
    ctx3 = GeometryContext(scs, spec, 2, 3, sl2_phi_x())
    for rec, key in zip(report.classes, scs.keys):
        if rec.pruned:
            assert ctx3.class_J(key) == 0
        else:
            assert rec.J[3] == 6 and rec.J[5] == 10
    # normalized germ against the supplied base measures
    assert report.gamma == {3: Fraction(6, 4), 5: Fraction(10, 12)}


def test_assemble_combinatorics_only():
    scs = sl2_scs()
    spec = sl2_spec()
    report = assemble(scs, spec, (), combinatorics_only=True)
    assert len(report.classes) == 3
    assert all(r.fit.qn_degrees() for r in report.classes)
    assert report.gamma_tilde == {}


def test_assemble_requires_hypothesis():
    scs = sl2_scs()
    spec = sl2_spec()
    bad = NilpotentSpec(spec.partition, spec.y, spec.d_y_star, spec.phi_y_star,
                        hypothesis_asserted=False)
    from orbint.germs import MissingGeometry
    with pytest.raises(MissingGeometry):
        assemble(scs, bad, (3,), phi_x_vec=sl2_phi_x(), nsize=2)
