"""Affine Weyl group machinery: point stabilizers, double-coset enumeration
for a pair of apartment points, and exact Moy-Prasad lattice indices.

The affine Weyl group of a split, semisimple, simply connected group is the
semidirect product of the coroot lattice (integer vectors in the coroot
basis) with the finite Weyl group.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cells import (
    Cell, arrangement_radius, classify_point, is_bounded, wx_orbit,
    _root_functional,
)
from .numerics import ExtReal, count_integers_ge_lt, ext
from .rootdata import RootDatum, WeylElt, weyl_elements


class UnboundedRegion(ValueError):
    pass


_WEYL_CACHE = {}


def cached_weyl(datum: RootDatum):
    key = datum.cartan_type
    if key not in _WEYL_CACHE:
        _WEYL_CACHE[key] = weyl_elements(datum)
    return _WEYL_CACHE[key]


def point_denominator(datum: RootDatum, coords) -> int:
    """Smallest m with m * alpha(x) integral for every root."""
    m = 1
    for i in range(datum.rank):
        a = datum.root_value(datum.roots[datum.simple_indices[i]], coords)
        m = m * a.denominator // _gcd(m, a.denominator)
    return m


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class ApartmentPoint:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    def denominator(self, datum: RootDatum) -> int:
        return point_denominator(datum, self.coords)


@dataclass(frozen=True)
class AffWeylElt:
    """v -> matrix(v) + translation; translation in the coroot lattice."""

    matrix: tuple
    translation: tuple

    def apply(self, v):
        n = len(self.translation)
        return tuple(
            sum(self.matrix[i][j] * v[j] for j in range(n)) + self.translation[i]
            for i in range(n)
        )

    def compose(self, other: "AffWeylElt") -> "AffWeylElt":
        n = len(self.translation)
        mat = tuple(
            tuple(sum(self.matrix[i][l] * other.matrix[l][j] for l in range(n))
                  for j in range(n))
            for i in range(n)
        )
        tr = tuple(
            sum(self.matrix[i][l] * other.translation[l] for l in range(n))
            + self.translation[i]
            for i in range(n)
        )
        return AffWeylElt(mat, tr)

    def inverse(self) -> "AffWeylElt":
        n = len(self.translation)
        inv = _int_matrix_inverse(self.matrix)
        tr = tuple(-sum(inv[i][l] * self.translation[l] for l in range(n))
                   for i in range(n))
        return AffWeylElt(inv, tr)


def _int_matrix_inverse(mat):
    n = len(mat)
    A = [[Fraction(mat[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col])
        A[col], A[piv] = A[piv], A[col]
        f = A[col][col]
        A[col] = [v / f for v in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                g = A[r][col]
                A[r] = [v - g * w for v, w in zip(A[r], A[col])]
    out = []
    for i in range(n):
        row = A[i][n:]
        assert all(v.denominator == 1 for v in row)
        out.append(tuple(int(v) for v in row))
    return tuple(out)


def stabilizer(datum: RootDatum, p: ApartmentPoint):
    """All affine Weyl elements fixing p: pairs (sigma, p - sigma p) with
    integral translation."""
    out = []
    for w in cached_weyl(datum):
        wp = w.apply(p.coords)
        t = tuple(a - b for a, b in zip(p.coords, wp))
        if all(x.denominator == 1 for x in t):
            out.append(AffWeylElt(w.matrix, tuple(int(x) for x in t)))
    return out


def stabilizer_linear_parts(datum: RootDatum, p: ApartmentPoint):
    """The finite Weyl elements underlying the stabilizer of p."""
    mats = {w.matrix for w in stabilizer(datum, p)}
    return [w for w in cached_weyl(datum) if w.matrix in mats]


# ---------------------------------------------------------------------------
# Moy-Prasad indices
# ---------------------------------------------------------------------------

def mp_log_index(datum: RootDatum, x, r: ExtReal, y, s: ExtReal) -> int:
    """log_q of [g_{x,r} : g_{x,r} cap g_{y,s}], by affine-root counting.

    x, y are coordinate tuples (coroot basis).  For each root alpha, counts
    integers j with j + alpha(x) >= r and not j + alpha(y) >= s; the Cartan
    part contributes rank * #{j : j >= r, not j >= s}.
    """
    total = 0
    for root in datum.roots:
        ax = datum.root_value(root, x)
        ay = datum.root_value(root, y)
        lo = ExtReal(r.value - ax, r.plus)
        hi = ExtReal(s.value - ay, s.plus)
        total += count_integers_ge_lt(lo, hi)
    total += datum.rank * count_integers_ge_lt(r, s)
    return total


def mp_root_count(datum: RootDatum, root, x, r: ExtReal, y, s: ExtReal) -> int:
    """Per-root contribution to mp_log_index."""
    ax = datum.root_value(root, x)
    ay = datum.root_value(root, y)
    return count_integers_ge_lt(ExtReal(r.value - ax, r.plus),
                                ExtReal(s.value - ay, s.plus))


def mw_pair(datum: RootDatum, x, v_w, d_x, d_y):
    """(m_w, m_w') for the coset with vector v_w = x - w^{-1} y."""
    z = tuple(a - b for a, b in zip(x, v_w))
    m_w = mp_log_index(datum, x, ext(0, True), z, ext(0))
    m_wp = mp_log_index(datum, x, ext(d_x, True), z, ext(d_y, True))
    return m_w, m_wp


# ---------------------------------------------------------------------------
# double cosets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DoubleCosetRep:
    """One representative of W_y w W_x: its apartment vector, derivative
    double-coset key, index exponents, cell data, and W_x-orbit size."""

    v_w: tuple
    d_key: tuple            # canonical matrix of W_y^lin sigma^{-1} W_x^lin
    m_w: int
    m_wp: int
    cell: Cell
    orbit_size: int


def _matrix_inverse_int(mat):
    return _int_matrix_inverse(mat)


def enum_double_cosets(datum: RootDatum, x: ApartmentPoint, y: ApartmentPoint,
                       d_x, d_y, extra_margin=0):
    """All double cosets whose rescaled vector lands in a bounded cell.

    Enumerates v on the union over sigma in W of the lattice cosets
    x - sigma(y) + Q^vee inside the region |alpha(v)| <= R (d_x - d_y)/2 plus
    one lattice step, classifies the rescaled vector, keeps bounded cells,
    and reduces by the right W_x-action.  Completeness: bounded cells lie in
    the convex hull of the arrangement vertices, so the radius R bound covers
    every bounded-cell coset.
    """
    d_x, d_y = Fraction(d_x), Fraction(d_y)
    if d_x <= d_y:
        raise UnboundedRegion("need d_x > d_y")
    rank = datum.rank
    W = cached_weyl(datum)
    wy_lin = stabilizer_linear_parts(datum, y)
    wx_lin = stabilizer_linear_parts(datum, x)
    scale = Fraction(2) / (d_x - d_y)

    funcs = [_root_functional(datum, r) for r in datum.roots]
    maxstep = max(sum(abs(v) for v in f) for f in funcs)
    B = arrangement_radius(datum) * (d_x - d_y) / 2 + maxstep + extra_margin

    # box bounds on coroot coordinates from |alpha_i(v)| <= B
    inv = _rational_matrix_inverse([[Fraction(datum.cartan[i][j]) for j in range(rank)]
                                    for i in range(rank)])
    cbound = [sum(abs(inv[j][i]) for i in range(rank)) * B for j in range(rank)]

    achieved = {}
    for si, sigma in enumerate(W):
        sy = sigma.apply(y.coords)
        base = tuple(a - b for a, b in zip(x.coords, sy))
        ranges = []
        for j in range(rank):
            lo = -cbound[j] - base[j]
            hi = cbound[j] - base[j]
            ranges.append(range(_ceil(lo), _floor(hi) + 1))
        for t in _product_ranges(ranges):
            v = tuple(b + k for b, k in zip(base, t))
            if any(abs(sum(f[j] * v[j] for j in range(rank))) > B for f in funcs):
                continue
            achieved.setdefault(v, set()).add(si)

    bounded_cache = {}
    cosets = {}
    for v, sigmas in achieved.items():
        u = tuple(scale * c for c in v)
        cell = classify_point(datum, u)
        if cell.signs not in bounded_cache:
            bounded_cache[cell.signs] = is_bounded(datum, cell)
        if not bounded_cache[cell.signs]:
            continue
        cosets[v] = (cell, sigmas)

    # verify each v is achieved by exactly one W_y^lin coset of sigma^{-1}
    def d_double_key(sigmas):
        mats = set()
        for si in sigmas:
            s_inv = _matrix_inverse_int(W[si].matrix)
            for u_elt in wy_lin:
                m1 = _mat_mul(u_elt.matrix, s_inv)
                for w_elt in wx_lin:
                    mats.add(_mat_mul(m1, w_elt.matrix))
        return min(mats)

    def d_single_cosets(sigmas):
        reps = set()
        for si in sigmas:
            s_inv = _matrix_inverse_int(W[si].matrix)
            reps.add(min(_mat_mul(u_elt.matrix, s_inv) for u_elt in wy_lin))
        return reps

    for v, (cell, sigmas) in cosets.items():
        assert len(d_single_cosets(sigmas)) == 1, "v determines one W_y-coset"

    # reduce by the right W_x action: v -> lin(sigma_x^{-1}) v
    seen = set()
    out = []
    for v in sorted(cosets):
        if v in seen:
            continue
        orbit = {tuple(w.apply(v)) for w in wx_lin} | {v}
        orbit = {o for o in orbit if o in cosets}
        seen |= orbit
        rep = min(orbit)
        cell, sigmas = cosets[rep]
        m_w, m_wp = mw_pair(datum, x.coords, rep, d_x, d_y)
        out.append(DoubleCosetRep(
            v_w=rep,
            d_key=d_double_key(sigmas),
            m_w=m_w,
            m_wp=m_wp,
            cell=cell,
            orbit_size=len(orbit),
        ))
    return out


def _mat_mul(a, b):
    n = len(a)
    return tuple(tuple(sum(a[i][l] * b[l][j] for l in range(n)) for j in range(n))
                 for i in range(n))


def _rational_matrix_inverse(M):
    n = len(M)
    A = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col])
        A[col], A[piv] = A[piv], A[col]
        f = A[col][col]
        A[col] = [v / f for v in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                g = A[r][col]
                A[r] = [v - g * w for v, w in zip(A[r], A[col])]
    return [row[n:] for row in A]


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _product_ranges(ranges):
    if not ranges:
        yield ()
        return
    head, tail = ranges[0], ranges[1:]
    for h in head:
        for t in _product_ranges(tail):
            yield (h,) + t
