"""Independent brute-force verification over the truncated field F_q[[t]]:
direct orbital sums over finite quotients of the group, lift-independence,
the coset-count identity behind the transversality argument, base measures of
nilpotent orbits, and a direct linear solve of the expansion coefficients.

Everything here recomputes from the raw group action: the only ingredients
shared with the quasi-polynomial engine are the double-coset skeleton and the
finiteness of the bounded region.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .affine import ApartmentPoint, enum_double_cosets
from .cells import classify_point, is_bounded
from .classes import CosetSetup
from .finitegeom import (
    GradedSetup, group_closure, orbit_alpha_vectors, coset_transversal,
    parabolic_gens, translation_matrix, weyl_matrix,
)
from .fqpoly import (
    ent_mono, mat_from, mat_id, mat_inv, mat_mul, mat_sub,
)
from .numerics import ExtReal, ext
from .rootdata import build_root_datum


class TruncationTooCoarse(RuntimeError):
    pass


class SingularSystem(ValueError):
    pass


class EnumerationCap(RuntimeError):
    pass


ENUM_CAP = 10 ** 7


@dataclass(frozen=True)
class TruncField:
    """Laurent arithmetic over F_q modulo t^T."""

    q: int
    T: int


@dataclass(frozen=True)
class OrbitalTest:
    """One evaluation of the orbital integral: the moving datum (x, d_x,
    a lift of phi_x) against the target coset (y, d_y, a lift of phi_y)."""

    nsize: int
    q: int
    x: tuple
    d_x: Fraction
    phi_x_mat: tuple
    y: tuple
    d_y: Fraction
    phi_y_mat: tuple
    trunc: int = 24


def _alpha_values(nsize, coords):
    datum = build_root_datum("A", nsize - 1)
    vals = {}
    for i in range(nsize):
        for j in range(nsize):
            if i != j:
                root = [0] * (nsize - 1)
                lo, hi, s = (i, j, 1) if i < j else (j, i, -1)
                for k in range(lo, hi):
                    root[k] = s
                vals[(i, j)] = datum.root_value(tuple(root), coords)
    return vals


def _ge_ext(value: Fraction, s: ExtReal) -> bool:
    return value > s.value or (value == s.value and not s.plus)


def mat_in_lattice(M, alpha_z, s: ExtReal) -> bool:
    """Entrywise valuation test for membership in g_{z,s}."""
    n = len(M)
    for i in range(n):
        for j in range(n):
            a = alpha_z[(i, j)] if i != j else Fraction(0)
            for e, c in M[i][j]:
                if c and not _ge_ext(e + a, s):
                    return False
    return True


def u_element(nsize, q, i, j, k, c):
    M = [[(() if a != b else ent_mono(0, 1, q)) for b in range(nsize)]
         for a in range(nsize)]
    M[i][j] = ent_mono(k, c, q)
    return mat_from(M)


def torus_congruence_rep(nsize, q, l, k, c, trunc):
    """diag representative of exp(c H_l t^k) modulo depth above k."""
    series = []
    term = 1
    inv_entry = {}
    # (1 + c t^k)^{-1} = sum (-c)^m t^{km} truncated
    m = 0
    while k * m < trunc:
        inv_entry[k * m] = pow(-c % q, m, q) if m else 1
        m += 1
    M = [[(() if a != b else ent_mono(0, 1, q)) for b in range(nsize)]
         for a in range(nsize)]
    M[l][l] = tuple(sorted({0: 1, k: c % q}.items()))
    M[l + 1][l + 1] = tuple(sorted((e, v % q) for e, v in inv_entry.items() if v % q))
    return mat_from(M)


# ---------------------------------------------------------------------------
# finite quotient transversals
# ---------------------------------------------------------------------------

def lattice_component_window(nsize, x, z, r_x: ExtReal, s_z: ExtReal):
    """Root components (i, j, k) in g_{x,r_x} but not in g_{z,s_z}."""
    ax = _alpha_values(nsize, x)
    az = _alpha_values(nsize, z)
    out = []
    for (i, j), a in ax.items():
        b = az[(i, j)]
        # k + a >= r_x and not k + b >= s_z
        k_lo = r_x.value - a
        k_min = -((-k_lo.numerator) // k_lo.denominator)
        if r_x.plus and k_min + a == r_x.value:
            k_min += 1
        k_hi = s_z.value - b
        k_max = k_hi.numerator // k_hi.denominator
        if not s_z.plus and k_max + b == s_z.value:
            k_max -= 1
        for k in range(k_min, k_max + 1):
            out.append((i, j, k))
    return sorted(out, key=lambda t: (Fraction(t[2]) + ax[(t[0], t[1])], t))


def cartan_component_window(nsize, r_x: ExtReal, s_z: ExtReal):
    """Cartan levels k in the window [r_x, s_z) (integer jumps)."""
    k_min = -((-r_x.value.numerator) // r_x.value.denominator)
    if r_x.plus and k_min == r_x.value:
        k_min += 1
    k_max = s_z.value.numerator // s_z.value.denominator
    if not s_z.plus and k_max == s_z.value:
        k_max -= 1
    return [(l, k) for k in range(k_min, k_max + 1) for l in range(nsize - 1)]


def group_window_transversal(nsize, q, x, z, r_x: ExtReal, s_z: ExtReal, trunc,
                             cap=ENUM_CAP):
    """Transversal of (G_{x,r_x} cap G_{z,s_z}) \\ G_{x,r_x} as products of
    root-group and torus-congruence elements over the component window."""
    roots = lattice_component_window(nsize, x, z, r_x, s_z)
    cartans = cartan_component_window(nsize, r_x, s_z)
    size = q ** (len(roots) + len(cartans))
    if size > cap:
        raise EnumerationCap(f"window transversal of size {size}")
    reps = [mat_id(nsize)]
    for (i, j, k) in roots:
        reps = [mat_mul(g, u_element(nsize, q, i, j, k, c), q, trunc)
                for g in reps for c in range(q)]
    for (l, k) in cartans:
        reps = [mat_mul(g, torus_congruence_rep(nsize, q, l, k, c, trunc), q, trunc)
                for g in reps for c in range(q)]
    return reps


# ---------------------------------------------------------------------------
# the orbital sum
# ---------------------------------------------------------------------------

def _realize_w_inverse(nsize, q, datum, x, y, v_w):
    """Matrix realization of w^{-1} for the double coset with vector v_w:
    Ad of the result carries g_{y,r} to g_{z,r}, z = x - v_w."""
    from .affine import cached_weyl
    z = tuple(a - b for a, b in zip(x, v_w))
    for sigma in cached_weyl(datum):
        sy = sigma.apply(y)
        lam = tuple(a - b for a, b in zip(sy, z))
        if all(c.denominator == 1 for c in lam):
            T = translation_matrix(nsize, tuple(int(c) for c in lam), q)
            P = weyl_matrix(datum, sigma, nsize, q)
            return mat_mul(T, P, q), z
    raise ValueError("no affine Weyl element carries y to z")


def quotient_orbital_sum(test: OrbitalTest, check_margin: bool = True) -> Fraction:
    """Count of cosets in G_{y,0+} \\ G moving the lift of phi_x into the
    target coset: the raw Cartan-decomposition triple sum.

    The double cosets outside the bounded cells do not contribute (vanishing
    theorem); when check_margin is set, an extra shell of cosets is verified
    to contribute zero.
    """
    nsize, q = test.nsize, test.q
    datum = build_root_datum("A", nsize - 1)
    x = ApartmentPoint(test.x)
    y = ApartmentPoint(test.y)
    if test.d_x <= test.d_y:
        raise ValueError("need d_x > d_y")
    reps = enum_double_cosets(datum, x, y, test.d_x, test.d_y)
    bounded_vs = {r.v_w for r in reps}
    shell = []
    if check_margin:
        bigger = enum_double_cosets(datum, x, y, test.d_x, test.d_y,
                                    extra_margin=1)
        margin_all = _all_achievable(datum, x, y, test.d_x, test.d_y)
        shell = [v for v in margin_all if v not in bounded_vs]

    ly = GradedSetup(nsize, q, test.y, Fraction(0))
    ly_elems = sorted(ly.lx_elements())
    lx = GradedSetup(nsize, q, test.x, test.d_x)

    total = 0
    for rep in reps:
        total += _coset_contribution(test, datum, lx, ly_elems, rep.v_w)
    if check_margin:
        for v in shell:
            extra = _coset_contribution(test, datum, lx, ly_elems, v)
            if extra:
                raise TruncationTooCoarse(
                    f"margin coset at {v} contributes {extra}; "
                    f"the bounded region was not exhaustive")
    return Fraction(total)


def _all_achievable(datum, x, y, d_x, d_y, pad=1):
    """Achievable W_x-reduced vectors within the enumeration box plus a pad."""
    from .affine import cached_weyl, stabilizer_linear_parts, _ceil, _floor, \
        _rational_matrix_inverse
    from .cells import arrangement_radius, _root_functional
    rank = datum.rank
    W = cached_weyl(datum)
    wx_lin = stabilizer_linear_parts(datum, x)
    funcs = [_root_functional(datum, r) for r in datum.roots]
    maxstep = max(sum(abs(v) for v in f) for f in funcs)
    B = arrangement_radius(datum) * (d_x - d_y) / 2 + maxstep + pad
    inv = _rational_matrix_inverse([[Fraction(datum.cartan[i][j]) for j in range(rank)]
                                    for i in range(rank)])
    out = set()
    for sigma in W:
        sy = sigma.apply(y.coords)
        base = tuple(a - b for a, b in zip(x.coords, sy))
        ranges = []
        for j in range(rank):
            bound = sum(abs(inv[j][i]) for i in range(rank)) * B
            ranges.append(range(_ceil(-bound - base[j]), _floor(bound - base[j]) + 1))
        idx = [0] * rank

        def rec(pos, acc):
            if pos == rank:
                v = tuple(acc)
                if all(abs(sum(f[j] * v[j] for j in range(rank))) <= B for f in funcs):
                    orbit = sorted({tuple(w.apply(v)) for w in wx_lin} | {v})
                    out.add(orbit[0])
                return
            for k in ranges[pos]:
                rec(pos + 1, acc + [base[pos] + k])

        rec(0, [])
    return sorted(out)


def _coset_contribution(test: OrbitalTest, datum, lx: GradedSetup, ly_elems, v_w):
    nsize, q, trunc = test.nsize, test.q, test.trunc
    Winv, z = _realize_w_inverse(nsize, q, datum, test.x, test.y, v_w)
    alpha_z = _alpha_values(nsize, z)
    s_plus = ext(test.d_y, True)

    # transversal of (G_x cap G_z)\G_x: pro-unipotent window times P\L
    u_reps = group_window_transversal(nsize, q, test.x, z, ext(0, True),
                                      ext(0), trunc)
    p_gens = parabolic_gens(lx, v_w)
    l_reps = coset_transversal(lx, p_gens)
    gammas = [mat_mul(u, l, q, trunc) for u in u_reps for l in l_reps]

    conj_phis = []
    for g in gammas:
        gi = mat_inv(g, q, trunc)
        conj_phis.append(mat_mul(mat_mul(g, test.phi_x_mat, q, trunc), gi, q, trunc))

    count = 0
    for h in ly_elems:
        hw = mat_mul(Winv, mat_inv(h, q, trunc), q, trunc)
        hwi = mat_inv(hw, q, trunc)
        target = mat_mul(mat_mul(hw, test.phi_y_mat, q, trunc), hwi, q, trunc)
        for cp in conj_phis:
            if mat_in_lattice(mat_sub(cp, target, q), alpha_z, s_plus):
                count += 1
    return count


def orbital_sum_with_stability(test: OrbitalTest) -> Fraction:
    """Run the orbital sum, re-running at a finer truncation to confirm the
    value is truncation-stable."""
    a = quotient_orbital_sum(test)
    b = quotient_orbital_sum(replace(test, trunc=test.trunc + 2))
    if a != b:
        c = quotient_orbital_sum(replace(test, trunc=test.trunc + 4))
        if b != c:
            raise TruncationTooCoarse(f"values {a}, {b}, {c} keep moving")
        return c
    return a


def verify_transv(test: OrbitalTest, lifts) -> bool:
    """Lift-independence: the orbital sum is equal across all provided lifts
    of phi_x (exact equality of counts)."""
    values = {quotient_orbital_sum(replace(test, phi_x_mat=lift))
              for lift in lifts}
    return len(values) == 1


# ---------------------------------------------------------------------------
# the coset-count identity
# ---------------------------------------------------------------------------

def verify_cosetcount(test: OrbitalTest, v_w, r: Fraction, r_next: Fraction) -> bool:
    """Exhaustive check of the induction identity at one filtration jump:
    the number of classes in G_{x,r}/G_{x,r'} whose translate of phi_x meets
    the target coset equals the predicted ratio of lattice indices."""
    nsize, q, trunc = test.nsize, test.q, test.trunc
    datum = build_root_datum("A", nsize - 1)
    Winv, z = _realize_w_inverse(nsize, q, datum, test.x, test.y, v_w)
    alpha_x = _alpha_values(nsize, test.x)
    alpha_z = _alpha_values(nsize, z)
    target = mat_mul(mat_mul(Winv, test.phi_y_mat, q, trunc),
                     mat_inv(Winv, q, trunc), q, trunc)

    # is the global intersection (phi_x + g_{x,d_x+r}) cap (target + g_{z,d_y+})
    # nonempty?  Componentwise compatibility of the difference.
    def compatible(M, x_thresh: ExtReal, z_thresh: ExtReal) -> bool:
        for i in range(nsize):
            for j in range(nsize):
                ax = alpha_x[(i, j)] if i != j else Fraction(0)
                az = alpha_z[(i, j)] if i != j else Fraction(0)
                for e, c in M[i][j]:
                    if not c:
                        continue
                    if not (_ge_ext(e + ax, x_thresh) or _ge_ext(e + az, z_thresh)):
                        return False
        return True

    diff0 = mat_sub(test.phi_x_mat, target, q)
    dy_plus = ext(test.d_y, True)
    if not compatible(diff0, ext(test.d_x + r), dy_plus):
        lhs_expected = 0
    else:
        lhs_expected = None

    reps = group_window_transversal(nsize, q, test.x, test.x,
                                    ext(r), ext(r_next), trunc)
    lhs = 0
    for h in reps:
        hi = mat_inv(h, q, trunc)
        moved = mat_mul(mat_mul(h, test.phi_x_mat, q, trunc), hi, q, trunc)
        if compatible(mat_sub(moved, target, q), ext(test.d_x + r_next), dy_plus):
            lhs += 1

    if lhs_expected == 0:
        return lhs == 0

    # RHS exponent: |G_{x,r}:G_{x,r'}| / |g_{x,d_x+r}:g_{x,d_x+r'}| times
    # |g_{x,d_x+r} cap g_{z,d_y+} : g_{x,d_x+r'} cap g_{z,d_y+}|
    e_grp = len(lattice_component_window(nsize, test.x, test.x, ext(r), ext(r_next)))
    e_grp += len(cartan_component_window(nsize, ext(r), ext(r_next)))
    e_lie = len(lattice_component_window(nsize, test.x, test.x,
                                         ext(test.d_x + r), ext(test.d_x + r_next)))
    e_lie += len(cartan_component_window(nsize, ext(test.d_x + r),
                                         ext(test.d_x + r_next)))
    e_int = _window_intersection_count(nsize, test.x, z,
                                       ext(test.d_x + r), ext(test.d_x + r_next),
                                       dy_plus)
    rhs = q ** (e_grp - e_lie + e_int)
    return lhs == rhs


def _window_intersection_count(nsize, x, z, lo: ExtReal, hi: ExtReal,
                               z_thresh: ExtReal) -> int:
    """Components with x-grade in [lo, hi) that also lie in g_{z, z_thresh}."""
    ax = _alpha_values(nsize, x)
    az = _alpha_values(nsize, z)
    count = 0
    for (i, j), a in ax.items():
        b = az[(i, j)]
        k_min = -((-(lo.value - a)).numerator // ((lo.value - a)).denominator)
        if lo.plus and k_min + a == lo.value:
            k_min += 1
        k_max = (hi.value - a).numerator // (hi.value - a).denominator
        if not hi.plus and k_max + a == hi.value:
            k_max -= 1
        for k in range(k_min, k_max + 1):
            if _ge_ext(k + b, z_thresh):
                count += 1
    # Cartan: x-grade k in [lo, hi), z-grade = k as well
    for (l, k) in cartan_component_window(nsize, lo, hi):
        if l == 0 and _ge_ext(Fraction(k), z_thresh):
            count += nsize - 1
    return count


# ---------------------------------------------------------------------------
# nilpotent measures and the direct germ solve
# ---------------------------------------------------------------------------

def nilpotent_measure(nsize, q, y, d_y_star, phi_y_star_vec) -> Fraction:
    """Base measure of the nilpotent coset under the declared convention: the
    size of the L_y-orbit of the coset reduction (the zero orbit gives 1)."""
    gs = GradedSetup(nsize, q, y, d_y_star)
    if all(c % q == 0 for c in phi_y_star_vec):
        return Fraction(1)
    orbit, _stab = orbit_alpha_vectors(gs, phi_y_star_vec)
    return Fraction(len(orbit))


def solve_germs(test_base: OrbitalTest, ell: int, orbit_specs, n_values):
    """Solve sum over orbits of q^(dim/2 * ell * n) * mu_O(base) * Gamma_O =
    (orbital sum at level n) for the germ vector Gamma.

    orbit_specs: list of (dim, mu_base) pairs, target first.  The system must
    be square or overdetermined; inconsistency raises SingularSystem.
    """
    q = test_base.q
    rows = []
    rhs = []
    for n in n_values:
        d_y_n = test_base.d_y - ell * n
        shift = -ell * n
        phi_y_n = tuple(tuple(tuple((e + shift, c) for e, c in entry)
                              for entry in row) for row in test_base.phi_y_mat)
        t = replace(test_base, d_y=d_y_n, phi_y_mat=phi_y_n,
                    trunc=test_base.trunc + ell * n)
        lhs = quotient_orbital_sum(t)
        row = [Fraction(q) ** (Fraction(dim, 2) * ell * n) * mu
               for dim, mu in orbit_specs]
        rows.append(row)
        rhs.append(lhs)
    m = len(orbit_specs)
    if len(rows) < m:
        raise SingularSystem("fewer equations than orbits")
    sol = _solve_overdetermined(rows, rhs, m)
    return sol


def _solve_overdetermined(rows, rhs, m):
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv = 0
    for col in range(m):
        p = next((i for i in range(piv, len(aug)) if aug[i][col]), None)
        if p is None:
            raise SingularSystem(f"no pivot for unknown {col}")
        aug[piv], aug[p] = aug[p], aug[piv]
        f = aug[piv][col]
        aug[piv] = [v / f for v in aug[piv]]
        for i in range(len(aug)):
            if i != piv and aug[i][col]:
                g = aug[i][col]
                aug[i] = [a - g * b for a, b in zip(aug[i], aug[piv])]
        piv += 1
    for i in range(piv, len(aug)):
        if aug[i][m]:
            raise SingularSystem("inconsistent overdetermined system")
    return [aug[i][m] for i in range(m)]
