"""Linked and strongly linked classes of double cosets, their stabilization
across the depth family d_y = d_y* - ell*n, and the class sums
S(n) = sum over members of q^(m_w - m_w') fitted as quasi-polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .affine import (
    ApartmentPoint, UnboundedRegion, _mat_mul, _int_matrix_inverse,
    cached_weyl, stabilizer_linear_parts,
)
from .cells import (
    Cell, arrangement_radius, classify_point, in_closure, is_bounded, tau,
    vertices, _root_functional,
)
from .numerics import LaurentQ, NoFit, QuasiPoly, qp_fit
from .rootdata import RootDatum


class NotSplit(NotImplementedError):
    pass


class NoStabilization(RuntimeError):
    pass


@dataclass(frozen=True)
class CosetSetup:
    """The fixed data (x, y, d_x, d_y*, ell) behind a depth family."""

    datum: RootDatum
    x: ApartmentPoint
    y: ApartmentPoint
    d_x: Fraction
    d_y_star: Fraction
    ell: int

    def d_y(self, n: int) -> Fraction:
        # sign convention: d_y = d_y* - ell*n, so that d_x - d_y grows with n
        return self.d_y_star - self.ell * n

    def gap(self, n: int) -> Fraction:
        return self.d_x - self.d_y(n)


@dataclass
class LinkedClass:
    """Members of one (cell orbit, derivative coset) group at a given n."""

    key: tuple                  # (canonical cell signs, canonical D matrix)
    cell: Cell                  # canonical representative cell
    d_key: tuple
    n: int
    members: tuple              # W_x-canonical vectors v_w, sorted
    exponents: tuple            # m_w - m_w' per member, aligned with members
    orbit_sizes: tuple

    def sum_laurent(self) -> LaurentQ:
        return LaurentQ([(e, 1) for e in self.exponents])


@dataclass
class StrongClass:
    linked: LinkedClass
    certified_pairs: int        # member pairs related by a coroot translation
    split_collapse: bool        # identification forced by the split case


@dataclass
class StableClassSet:
    setup: CosetSetup
    n_start: int                # N: stabilization threshold
    period: int                 # P: sampling step in n
    keys: tuple                 # sorted class keys
    cells: dict                 # key -> canonical Cell
    d_keys: dict                # key -> canonical D matrix
    vertex_data: dict           # key -> tuple of (vertex, tau value)
    members_ref: dict           # key -> members at the reference n
    sums: dict = field(default_factory=dict)    # key -> {n: {exponent: count}}
    fits: dict = field(default_factory=dict)    # key -> QuasiPoly

    def sampled_ns(self):
        any_key = self.keys[0]
        return sorted(self.sums[any_key])

    def class_sum(self, key, n) -> LaurentQ:
        return LaurentQ(self.sums[key][n])


# ---------------------------------------------------------------------------
# per-n enumeration (integer fast path)
# ---------------------------------------------------------------------------

def _lcm(a, b):
    from math import gcd
    return a * b // gcd(a, b)


def _setup_tables(setup: CosetSetup):
    """Precomputed integer data shared by all n."""
    datum = setup.datum
    rank = datum.rank
    W = cached_weyl(datum)
    wy_lin = stabilizer_linear_parts(datum, setup.y)
    wx_lin = stabilizer_linear_parts(datum, setup.x)
    funcs = [_root_functional(datum, r) for r in datum.roots]

    M = 1
    for r in datum.roots:
        M = _lcm(M, datum.root_value(r, setup.x.coords).denominator)
        M = _lcm(M, datum.root_value(r, setup.y.coords).denominator)
    M = _lcm(M, setup.d_x.denominator)
    M = _lcm(M, setup.d_y_star.denominator)

    # bases x - sigma(y) grouped modulo the coroot lattice
    bases = {}
    wy_mats = {w.matrix for w in wy_lin}
    wx_mats = {w.matrix for w in wx_lin}
    for sigma in W:
        sy = sigma.apply(setup.y.coords)
        base = tuple(a - b for a, b in zip(setup.x.coords, sy))
        frac = tuple(c - (c.numerator // c.denominator) for c in base)
        s_inv = _int_matrix_inverse(sigma.matrix)
        dmats = set()
        for u in wy_mats:
            m1 = _mat_mul(u, s_inv)
            for w in wx_mats:
                dmats.add(_mat_mul(m1, w))
        dkey = min(dmats)
        entry = bases.setdefault(frac, (base, set()))
        entry[1].add(dkey)
    base_list = []
    for frac, (base, dkeys) in sorted(bases.items()):
        assert len(dkeys) == 1, "one derivative double-coset per lattice coset"
        base_list.append((base, dkeys.pop()))

    wx_perms = [w.root_perm for w in wx_lin]
    wx_acts = [w for w in wx_lin]
    return {
        "M": M, "funcs": funcs, "bases": base_list, "wx_acts": wx_acts,
        "wx_perms": wx_perms, "radius": arrangement_radius(datum),
        "maxstep": max(sum(abs(v) for v in f) for f in funcs),
    }


_TABLE_CACHE = {}


def _tables(setup: CosetSetup):
    key = (setup.datum.cartan_type, setup.x.coords, setup.y.coords,
           setup.d_x, setup.d_y_star, setup.ell)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = _setup_tables(setup)
    return _TABLE_CACHE[key]


def enumerate_classes_at_n(setup: CosetSetup, n: int):
    """Partition of the bounded-cell double cosets at level n into linked
    classes keyed by (canonical cell orbit, derivative double coset)."""
    datum = setup.datum
    rank = datum.rank
    gap = setup.gap(n)
    if gap <= 0:
        raise UnboundedRegion(f"d_x - d_y = {gap} <= 0 at n = {n}")
    T = _tables(setup)
    M = T["M"]
    funcs = T["funcs"]
    nroots = len(funcs)
    DX = int(M * setup.d_x)
    DY = int(M * setup.d_y(n))
    G = DX - DY
    B = T["radius"] * gap / 2 + T["maxstep"]
    MB = int(M * B) + 1

    x = setup.x.coords
    AX = [int(M * datum.root_value(r, x)) for r in datum.roots]
    SF = [[M * f[j] for j in range(rank)] for f in funcs]

    wx_acts = T["wx_acts"]
    nontrivial_wx = len(wx_acts) > 1
    wx_perms = T["wx_perms"]

    bounded_cache = {}
    out = {}

    for base, dkey in T["bases"]:
        ABASE = [int(M * datum.root_value(r, base)) for r in datum.roots]
        # coordinate bounds: |alpha_i(v)| <= B for simple roots gives a box
        # after inverting the Cartan pairing; iterate integer offsets
        ranges = _offset_ranges(datum, base, B)
        for t in _iter_box(ranges):
            AV = [ABASE[i] + sum(SF[i][j] * t[j] for j in range(rank))
                  for i in range(nroots)]
            if any(v > MB or v < -MB for v in AV):
                continue
            # cell symbols against thresholds 0 and G (scaled by M)
            signs = tuple(
                0 if v < 0 else (1 if v == 0 else (2 if v < G else (3 if v == G else 4)))
                for v in AV)
            bd = bounded_cache.get(signs)
            if bd is None:
                bd = is_bounded(datum, Cell(signs))
                bounded_cache[signs] = bd
            if not bd:
                continue
            v_w = tuple(b + k for b, k in zip(base, t))
            # canonical W_x-orbit handling
            if nontrivial_wx:
                orbit = sorted({tuple(w.apply(v_w)) for w in wx_acts})
                if v_w != orbit[0]:
                    continue
                orbit_size = len(orbit)
                canon_signs = min(_permute_signs(signs, p) for p in wx_perms)
            else:
                orbit_size = 1
                canon_signs = signs
            expo = 0
            for i in range(nroots):
                av = AV[i]
                ax = AX[i]
                # m_w part: count j with j > -ax/M and j < (av-ax)/M
                if av > 0:
                    c_w = (av - ax - 1) // M - (-ax) // M
                    if c_w < 0:
                        c_w = 0
                else:
                    c_w = 0
                # m_w' part: count j with j > (DX-ax)/M and j <= (DY-ax+av)/M
                if av > G:
                    c_wp = (DY - ax + av) // M - (DX - ax) // M
                    if c_wp < 0:
                        c_wp = 0
                else:
                    c_wp = 0
                expo += c_w - c_wp
            key = (canon_signs, dkey)
            rec = out.get(key)
            if rec is None:
                rec = out[key] = {"members": [], "exponents": [], "orbits": [],
                                  "signs": canon_signs}
            rec["members"].append(v_w)
            rec["exponents"].append(expo)
            rec["orbits"].append(orbit_size)

    classes = {}
    for (canon_signs, dkey), rec in out.items():
        order = sorted(range(len(rec["members"])), key=lambda i: rec["members"][i])
        classes[(canon_signs, dkey)] = LinkedClass(
            key=(canon_signs, dkey),
            cell=Cell(canon_signs),
            d_key=dkey,
            n=n,
            members=tuple(rec["members"][i] for i in order),
            exponents=tuple(rec["exponents"][i] for i in order),
            orbit_sizes=tuple(rec["orbits"][i] for i in order),
        )
    return classes


def _permute_signs(signs, perm):
    out = [0] * len(signs)
    for i, s in enumerate(signs):
        out[perm[i]] = s
    return tuple(out)


def class_sums_at_n(setup: CosetSetup, n: int):
    """Exponent histograms {key: {m_w - m_w': count}} at level n.

    Vectorized integer sweep; a nontrivial W_x action is folded in exactly by
    averaging fixed-point counts over the group (orbit counting).
    """
    return _class_sums_numpy(setup, n)


_BOUNDED_CODE_CACHE = {}


def _class_sums_numpy(setup: CosetSetup, n: int):
    import numpy as np

    datum = setup.datum
    rank = datum.rank
    gap = setup.gap(n)
    if gap <= 0:
        raise UnboundedRegion(f"d_x - d_y = {gap} <= 0 at n = {n}")
    T = _tables(setup)
    M = T["M"]
    funcs = T["funcs"]
    nroots = len(funcs)
    DX = int(M * setup.d_x)
    DY = int(M * setup.d_y(n))
    G = DX - DY
    B = T["radius"] * gap / 2 + T["maxstep"]
    MB = int(M * B) + 1
    x = setup.x.coords
    AX = np.array([int(M * datum.root_value(r, x)) for r in datum.roots], dtype=np.int64)
    SF = np.array([[M * f[j] for j in range(rank)] for f in funcs], dtype=np.int64)

    bcache_key = datum.cartan_type
    bcache = _BOUNDED_CODE_CACHE.setdefault(bcache_key, {})

    expo_bound = nroots * (G // M + 4) + 8
    out = {}
    for base, dkey in T["bases"]:
        ABASE = np.array([int(M * datum.root_value(r, base)) for r in datum.roots],
                         dtype=np.int64)
        ranges = _offset_ranges(datum, base, B)
        if rank == 1:
            grids = [np.array(list(ranges[0]), dtype=np.int64)]
            tcols = [grids[0]]
        else:
            mesh = np.meshgrid(*[np.arange(r.start, r.stop, dtype=np.int64)
                                 for r in ranges], indexing="ij")
            tcols = [m.ravel() for m in mesh]
        AV = ABASE[:, None] + SF @ np.vstack(tcols)
        keep = (np.abs(AV) <= MB).all(axis=0)
        AV = AV[:, keep]
        if AV.shape[1] == 0:
            continue
        signs = 2 * (AV > 0) + (AV == 0) + (AV == G) + 2 * (AV > G)
        code = np.zeros(AV.shape[1], dtype=np.int64)
        for i in range(nroots):
            code = code * 5 + signs[i]
        # exponents m_w - m_w'
        expo = np.zeros(AV.shape[1], dtype=np.int64)
        for i in range(nroots):
            av = AV[i]
            ax = int(AX[i])
            c_w = np.where(av > 0,
                           np.maximum((av - ax - 1) // M - (-ax) // M, 0), 0)
            c_wp = np.where(av > G,
                            np.maximum((DY - ax + av) // M - (DX - ax) // M, 0), 0)
            expo += c_w - c_wp
        assert np.abs(expo).max(initial=0) < expo_bound
        pair = code * (2 * expo_bound) + (expo + expo_bound)
        uniq, counts = np.unique(pair, return_counts=True)
        for u, cnt in zip(uniq.tolist(), counts.tolist()):
            cd, ev = divmod(u, 2 * expo_bound)
            ev -= expo_bound
            sgn = []
            c = cd
            for _ in range(nroots):
                c, s = divmod(c, 5)
                sgn.append(s)
            sgn = tuple(reversed(sgn))
            bd = bcache.get(sgn)
            if bd is None:
                bd = is_bounded(datum, Cell(sgn))
                bcache[sgn] = bd
            if not bd:
                continue
            hist = out.setdefault((sgn, dkey), {})
            hist[ev] = hist.get(ev, 0) + cnt
    return out


def _offset_ranges(datum, base, B):
    from .affine import _rational_matrix_inverse, _ceil, _floor
    rank = datum.rank
    inv = _rational_matrix_inverse([[Fraction(datum.cartan[i][j]) for j in range(rank)]
                                    for i in range(rank)])
    ranges = []
    for j in range(rank):
        bound = sum(abs(inv[j][i]) for i in range(rank)) * B
        lo = -bound - base[j]
        hi = bound - base[j]
        ranges.append(range(_ceil(lo), _floor(hi) + 1))
    return ranges


def _iter_box(ranges):
    if not ranges:
        yield ()
        return
    if len(ranges) == 1:
        for a in ranges[0]:
            yield (a,)
        return
    for a in ranges[0]:
        for rest in _iter_box(ranges[1:]):
            yield (a,) + rest


def linked_classes(setup: CosetSetup, n: int):
    """Sorted list of linked classes at level n."""
    return [cls for _k, cls in sorted(enumerate_classes_at_n(setup, n).items())]


def related(c1: LinkedClass, c2: LinkedClass) -> bool:
    """Relatedness across levels: same derivative coset and equal cells.

    Equal sign vectors of alpha(v_w) against {0, d_x - d_y} at the two levels
    is exactly equality of the rescaled cells.
    """
    return c1.d_key == c2.d_key and c1.cell == c2.cell


def strong_refine(setup: CosetSetup, cls: LinkedClass):
    """Split case: a linked class is a single strongly linked class.

    The coroot-translation certificate is still computed: pairs of members
    whose vectors differ by a coroot lattice element are related by a central
    translation acting trivially on the boundary root spaces.
    """
    if any(rho != 1 for rho in setup.datum.rho):
        raise NotSplit("strong refinement beyond the split case is not implemented")
    if not cls.members:
        return []
    certified = 0
    base = cls.members[0]
    wx_acts = _tables(setup)["wx_acts"]
    for other in cls.members[1:]:
        images = [tuple(w.apply(other)) for w in wx_acts] or [other]
        if any(all((a - b).denominator == 1 for a, b in zip(img, base))
               for img in images):
            certified += 1
    return [StrongClass(linked=cls, certified_pairs=certified,
                        split_collapse=certified + 1 < len(cls.members))]


# ---------------------------------------------------------------------------
# stabilization across n
# ---------------------------------------------------------------------------

def base_period(ell: int) -> int:
    """Sampling period making every candidate q^n-degree integral: the grids
    live in (ell/4)Z plus midpoints, so even n always suffices."""
    return 2


def stabilize(setup: CosetSetup, n_floor: int = 1, probe: int = 5,
              n_cap: int = 60) -> StableClassSet:
    """Find N and period P with identical class key sets along n = N + P*i,
    verify the relatedness bijections on the probe window, and return the
    stabilized class set with the probe sums recorded."""
    P = base_period(setup.ell)
    while True:
        n0 = P * ((n_floor + P - 1) // P)
        while n0 + P * probe <= n_cap:
            ns = [n0 + P * i for i in range(probe + 1)]
            if setup.gap(ns[0]) <= 0:
                n0 += P
                continue
            snaps = {n: enumerate_classes_at_n(setup, n) for n in ns}
            keysets = [frozenset(s.keys()) for s in snaps.values()]
            if all(k == keysets[0] for k in keysets):
                scs = _build_stable(setup, n0, P, snaps)
                return scs
            n0 += P
        if P < 8:
            P *= 2
            continue
        raise NoStabilization(
            f"class key sets keep changing up to n = {n_cap} (ell = {setup.ell})")


def _build_stable(setup, n0, P, snaps):
    any_n = min(snaps)
    keys = tuple(sorted(snaps[any_n].keys()))
    cells_ = {}
    d_keys = {}
    vertex_data = {}
    members_ref = {}
    sums = {k: {} for k in keys}
    for k in keys:
        cls = snaps[any_n][k]
        cells_[k] = cls.cell
        d_keys[k] = cls.d_key
        vs = vertices(setup.datum, cls.cell)
        vertex_data[k] = tuple((v, tau(setup.datum, v)) for v in vs)
        members_ref[k] = cls.members
    for n, snap in snaps.items():
        for k in keys:
            sums[k][n] = _exponent_histogram(snap[k])
    return StableClassSet(setup=setup, n_start=n0, period=P, keys=keys,
                          cells=cells_, d_keys=d_keys, vertex_data=vertex_data,
                          members_ref=members_ref, sums=sums)


def _exponent_histogram(cls: LinkedClass):
    h = {}
    for e in cls.exponents:
        h[e] = h.get(e, 0) + 1
    return h


def extend_samples(scs: StableClassSet, upto_index: int):
    """Ensure sums exist for n = N + P*i, i = 0..upto_index; verifies that the
    stabilized key set persists at every newly sampled level."""
    have = set(scs.sampled_ns())
    for i in range(upto_index + 1):
        n = scs.n_start + scs.period * i
        if n in have:
            continue
        sums = class_sums_at_n(scs.setup, n)
        if frozenset(sums.keys()) != frozenset(scs.keys):
            raise NoStabilization(
                f"class key set changed at n = {n}; stabilization from "
                f"N = {scs.n_start}, P = {scs.period} was premature")
        for k in scs.keys:
            scs.sums[k][n] = sums[k]


# ---------------------------------------------------------------------------
# quasi-polynomial class sums
# ---------------------------------------------------------------------------

def candidate_degrees(scs: StableClassSet, key, full_grid: bool = False):
    """Candidate q^n-degrees for the class: the vertex degrees ell*tau(v)/2,
    their midpoints, and a margin step, all within [0, max]; the full grid
    (quarter-ell steps up to the max) is the escalation fallback."""
    ell = scs.setup.ell
    tau_degs = sorted({Fraction(ell) * t / 2 for _v, t in scs.vertex_data[key]})
    step = Fraction(ell, 4)
    if not tau_degs:
        return [Fraction(0), step]
    top = tau_degs[-1]
    if full_grid:
        out = set()
        j = Fraction(0)
        while j <= top + step:
            out.add(j)
            j += step
        out.update(tau_degs)
        return sorted(out)
    grid = set(tau_degs)
    for a, b in zip(tau_degs, tau_degs[1:]):
        grid.add((a + b) / 2)
    grid.add(top + step)
    if tau_degs[0] > 0:
        grid.add(tau_degs[0] / 2)
    return sorted(grid)


def p_poly(scs: StableClassSet, key, held_out: int = 4) -> QuasiPoly:
    """Fit the class sum S(n) = sum q^(m_w - m_w') as a QuasiPoly, with the
    trailing held-out samples entering only the verification."""
    if key in scs.fits:
        return scs.fits[key]
    E = scs.setup.datum.rank
    for full in (False, True):
        degs = candidate_degrees(scs, key, full_grid=full)
        need = len(degs) * (E + 1) + (E + 1) + 2 + held_out
        extend_samples(scs, need - 1)
        ns = [scs.n_start + scs.period * i for i in range(need)]
        samples = [(n, scs.class_sum(key, n)) for n in ns]
        try:
            fit = qp_fit(samples, degs, E)
            scs.fits[key] = fit
            return fit
        except NoFit:
            if full:
                raise
    raise AssertionError("unreachable")
