"""Residue-field geometry for split type A (SL_n over F_q((t))): graded
pieces of the Moy-Prasad filtration as spaces of Laurent-matrix monomials,
the reductive quotient L_x and its action, parabolic coset spaces, Hessenberg
point sets, the orbit-counting weights j and J, and the surjectivity rank
check used by the transversality argument.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .cells import NEG, OPEN01, TWO, ZERO, BIG
from .fqpoly import (
    charpoly_laurent, ent_add, ent_mono, ent_mul, ent_neg, is_semisimple_charpoly,
    mat_bracket, mat_conj, mat_from, mat_id, mat_inv, mat_is_zero, mat_mul,
    mat_sub, mat_trace,
)
from .rootdata import RootDatum, build_root_datum


class IncompatibleDepth(ValueError):
    pass


class BadCharacteristic(ValueError):
    pass


class NotInVx(ValueError):
    pass


class OrbitTooLarge(RuntimeError):
    pass


ORBIT_CAP = 10 ** 7


def _primitive_root(p: int) -> int:
    for g in range(2, p):
        seen = set()
        v = 1
        for _ in range(p - 1):
            v = v * g % p
            seen.add(v)
        if len(seen) == p - 1:
            return g
    raise BadCharacteristic(f"{p} is not prime")


@dataclass(frozen=True)
class Component:
    """Basis line of a graded piece: a root space E_ij t^k or a Cartan line
    H_l t^k with H_l = E_ll - E_(l+1)(l+1)."""

    kind: str        # "root" or "cartan"
    root: tuple      # simple-root coordinates ("root") or (l,) ("cartan")
    i: int
    j: int
    k: int


class GradedSetup:
    """Residue data of SL_n at an apartment point z and depth d: the graded
    piece V_z = g_{z,d:d+}, generators of L_z(F_q), and index tables."""

    def __init__(self, nsize: int, p: int, coords, depth):
        self.n = nsize
        self.p = p
        self.datum = build_root_datum("A", nsize - 1)
        self.coords = tuple(Fraction(c) for c in coords)
        self.depth = Fraction(depth)
        datum = self.datum

        m = 1
        for r in datum.roots:
            m = _lcm(m, datum.root_value(r, self.coords).denominator)
        self.denominator = m
        if (m * self.depth).denominator != 1:
            raise IncompatibleDepth(
                f"m*d = {m}*{self.depth} not integral; the graded piece is 0")
        if p < 2 or any(p % d == 0 for d in range(2, p)):
            raise BadCharacteristic(f"q = {p} must be prime")
        if m % p == 0:
            raise BadCharacteristic(f"q = {p} divides the point denominator {m}")

        # matrix positions of the roots
        pos = {}
        for i in range(nsize):
            for j in range(nsize):
                if i == j:
                    continue
                root = [0] * (nsize - 1)
                lo, hi, s = (i, j, 1) if i < j else (j, i, -1)
                for k in range(lo, hi):
                    root[k] = s
                pos[(i, j)] = tuple(root)
        self.position_root = pos
        self.root_position = {r: ij for ij, r in pos.items()}

        self.alpha_x = {r: datum.root_value(r, self.coords) for r in datum.roots}

        basis = []
        for r in datum.roots:
            k = self.depth - self.alpha_x[r]
            if k.denominator == 1:
                i, j = self.root_position[r]
                basis.append(Component("root", r, i, j, int(k)))
        if self.depth.denominator == 1:
            for l in range(nsize - 1):
                basis.append(Component("cartan", (l,), l, l, int(self.depth)))
        self.vx_basis = tuple(basis)
        self.vx_index = {(c.kind, c.root): idx for idx, c in enumerate(basis)}

        # L_z generators: torus plus affine root groups vanishing at z
        g = _primitive_root(p)
        gens = []
        for l in range(nsize - 1):
            diag = [[() for _ in range(nsize)] for _ in range(nsize)]
            for a in range(nsize):
                c = g if a == l else (pow(g, p - 2, p) if a == l + 1 else 1)
                diag[a][a] = ent_mono(0, c, p)
            gens.append(mat_from(diag))
        lroots = []
        for r in datum.roots:
            if self.alpha_x[r].denominator == 1:
                k = -int(self.alpha_x[r])
                i, j = self.root_position[r]
                u = [[(() if a != b else ent_mono(0, 1, p)) for b in range(nsize)]
                     for a in range(nsize)]
                u[i][j] = ent_mono(k, 1, p)
                gens.append(mat_from(u))
                lroots.append(r)
        self.lx_gens = tuple(gens)
        self.lx_roots = tuple(lroots)
        self._lx_elements = None

    # -- orders and element enumeration --------------------------------

    def lx_order(self) -> int:
        """|L_z(F_q)| from the block structure S(prod GL_m)."""
        p = self.p
        blocks = _integral_blocks(self)
        total = 1
        for b in blocks:
            m = len(b)
            gl = 1
            for i in range(m):
                gl *= p ** m - p ** i
            total *= gl
        return total // (p - 1)

    def lx_elements(self, cap: int = 10 ** 6):
        if self._lx_elements is None:
            order = self.lx_order()
            if order > cap:
                raise OrbitTooLarge(f"|L| = {order} exceeds the cap {cap}")
            self._lx_elements = group_closure(self.lx_gens, self.p, cap=cap)
            assert len(self._lx_elements) == order
        return self._lx_elements

    # -- vectors in the graded piece ------------------------------------

    def vec_to_mat(self, vec):
        n, p = self.n, self.p
        M = [[() for _ in range(n)] for _ in range(n)]
        for coef, comp in zip(vec, self.vx_basis):
            if not coef % p:
                continue
            if comp.kind == "root":
                M[comp.i][comp.j] = ent_add(M[comp.i][comp.j],
                                            ent_mono(comp.k, coef, p), p)
            else:
                l = comp.root[0]
                M[l][l] = ent_add(M[l][l], ent_mono(comp.k, coef, p), p)
                M[l + 1][l + 1] = ent_add(M[l + 1][l + 1],
                                          ent_mono(comp.k, -coef, p), p)
        return mat_from(M)

    def mat_to_vec(self, M):
        n, p = self.n, self.p
        vec = [0] * len(self.vx_basis)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for e, c in M[i][j]:
                    idx = self.vx_index.get(("root", self.position_root[(i, j)]))
                    comp = self.vx_basis[idx] if idx is not None else None
                    if comp is None or e != comp.k:
                        raise NotInVx(f"component E_{i}{j} t^{e} not in the graded piece")
                    vec[idx] = c
        diag = [dict(M[i][i]) for i in range(n)]
        exps = {e for d in diag for e in d}
        for e in exps:
            coefs = [d.get(e, 0) for d in diag]
            if all(c == 0 for c in coefs):
                continue
            if sum(coefs) % p:
                raise NotInVx("diagonal part has nonzero trace")
            idx0 = self.vx_index.get(("cartan", (0,)))
            if idx0 is None or e != self.vx_basis[idx0].k:
                raise NotInVx(f"Cartan component at t^{e} not in the graded piece")
            acc = 0
            for l in range(n - 1):
                acc = (acc + coefs[l]) % p
                vec[self.vx_index[("cartan", (l,))]] = acc
        return tuple(vec)

    def ad_vector(self, g, vec):
        return self.mat_to_vec(mat_conj(g, self.vec_to_mat(vec), self.p))


def _lcm(a, b):
    from math import gcd
    return a * b // gcd(a, b)


def _integral_blocks(setup: GradedSetup):
    n = setup.n
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (i, j), r in setup.position_root.items():
        if setup.alpha_x[r].denominator == 1:
            parent[find(i)] = find(j)
    blocks = {}
    for a in range(n):
        blocks.setdefault(find(a), []).append(a)
    return list(blocks.values())


def build_setup(x_coords, d_x, nsize: int, q: int) -> GradedSetup:
    return GradedSetup(nsize, q, x_coords, d_x)


def group_closure(gens, p, cap=10 ** 7):
    seen = {mat_id(len(gens[0]))}
    frontier = list(seen)
    while frontier:
        new = []
        for g in frontier:
            for h in gens:
                gh = mat_mul(g, h, p)
                if gh not in seen:
                    seen.add(gh)
                    new.append(gh)
                    if len(seen) > cap:
                        raise OrbitTooLarge(f"group closure exceeds {cap}")
        frontier = new
    return seen


# ---------------------------------------------------------------------------
# structural checks on phi_x
# ---------------------------------------------------------------------------

@dataclass
class PhiReport:
    semisimple: bool
    stabilizer_order: int
    cocharacter_free: bool

    @property
    def accepted(self) -> bool:
        return self.semisimple and self.cocharacter_free


def check_phi_x(setup: GradedSetup, vec, element_cap: int = 10 ** 6) -> PhiReport:
    """Closed-orbit check (squarefree characteristic polynomial over F_q(t))
    and the anisotropy surrogate (finite stabilizer in L_x(F_q), and no
    nontrivial diagonal cocharacter in a weight box fixing phi)."""
    M = setup.vec_to_mat(vec)
    semi = is_semisimple_charpoly(charpoly_laurent(M, setup.p), setup.p)
    stab = 0
    for g in setup.lx_elements(cap=element_cap):
        if setup.ad_vector(g, vec) == tuple(c % setup.p for c in vec):
            stab += 1
    coch_free = _no_fixing_cocharacter(setup, vec)
    return PhiReport(semisimple=semi, stabilizer_order=stab,
                     cocharacter_free=coch_free)


def _no_fixing_cocharacter(setup: GradedSetup, vec) -> bool:
    n = setup.n
    B = 2 * max(abs(e) for row in setup.datum.cartan for e in row) * n
    support_pairs = [(c.i, c.j) for c, coef in zip(setup.vx_basis, vec)
                     if coef % setup.p and c.kind == "root"]
    if not support_pairs:
        return False  # the full torus fixes phi
    for a in product(range(-B, B + 1), repeat=n - 1):
        full = a + (-sum(a),)
        if all(v == 0 for v in full):
            continue
        if all(full[i] == full[j] for i, j in support_pairs):
            return False
    return True


# ---------------------------------------------------------------------------
# parabolic subgroups and Hessenberg point sets
# ---------------------------------------------------------------------------

def parabolic_gens(setup: GradedSetup, v_w):
    """Generators of P_{x,w}: the torus together with the L_x root groups of
    roots alpha with alpha(v_w) <= 0."""
    gens = list(setup.lx_gens[: setup.n - 1])
    for g, r in zip(setup.lx_gens[setup.n - 1:], setup.lx_roots):
        if setup.datum.root_value(r, v_w) <= 0:
            gens.append(g)
    return tuple(gens)


def coset_transversal(setup: GradedSetup, subgroup_gens, cap: int = 10 ** 6):
    """Left-coset transversal of P\\L, with P the subgroup generated by
    subgroup_gens inside the enumerated L_x(F_q)."""
    L = sorted(setup.lx_elements(cap=cap))
    p = setup.p
    seen = set()
    reps = []
    for g in L:
        if g in seen:
            continue
        reps.append(g)
        frontier = [g]
        seen.add(g)
        while frontier:
            cur = frontier.pop()
            for h in subgroup_gens:
                hg = mat_mul(h, cur, p)
                if hg not in seen:
                    seen.add(hg)
                    frontier.append(hg)
    return reps


def hessenberg_points(setup: GradedSetup, allowed_indices, phi_vec, transversal):
    """Coset representatives whose conjugate of phi lies in the prescribed
    span of graded components."""
    allowed = set(allowed_indices)
    out = []
    for g in transversal:
        w = setup.ad_vector(g, phi_vec)
        if all(idx in allowed for idx, c in enumerate(w) if c % setup.p):
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# orbits at the second point and the weights j, J
# ---------------------------------------------------------------------------

def orbit_alpha_vectors(setup: GradedSetup, vec, cap: int = ORBIT_CAP):
    """The L-orbit of a graded-piece vector, each element recorded by its
    coefficients on root components (keyed by the root) and Cartan lines.

    Returns (orbit, stabilizer_order); the stabilizer order is derived from
    orbit-stabilizer against the closed-form group order.
    """
    p = setup.p
    start = tuple(c % p for c in vec)
    seen = {start}
    frontier = [start]
    while frontier:
        new = []
        for v in frontier:
            for g in setup.lx_gens:
                w = setup.ad_vector(g, v)
                if w not in seen:
                    seen.add(w)
                    new.append(w)
                    if len(seen) > cap:
                        raise OrbitTooLarge(f"orbit exceeds the cap {cap}")
        frontier = new
    order = setup.lx_order()
    assert order % len(seen) == 0, "orbit size must divide the group order"
    stab = order // len(seen)
    keyed = []
    for v in seen:
        root_part = {}
        cartan = False
        for coef, comp in zip(v, setup.vx_basis):
            if not coef % p:
                continue
            if comp.kind == "root":
                root_part[comp.root] = coef % p
            else:
                cartan = True
        keyed.append((tuple(sorted(root_part.items())), cartan))
    return keyed, stab


def j_counts_by_boundary(datum: RootDatum, orbit_keyed, v_w, gap):
    """Histogram of orbit elements by boundary signature.

    Keeps orbit elements supported (root components only) on roots with
    alpha(v_w) >= gap and records their restriction to the boundary roots
    alpha(v_w) == gap.
    """
    counts = {}
    cache = {}
    for root_part, cartan in orbit_keyed:
        if cartan:
            continue
        ok = True
        sig = []
        for r, coef in root_part:
            cls = cache.get(r)
            if cls is None:
                val = datum.root_value(r, v_w)
                cls = 0 if val < gap else (1 if val == gap else 2)
                cache[r] = cls
            if cls == 0:
                ok = False
                break
            if cls == 1:
                sig.append((r, coef))
        if ok:
            key = tuple(sorted(sig))
            counts[key] = counts.get(key, 0) + 1
    return counts


def boundary_signature(setup: GradedSetup, vec, v_w, gap):
    """Restriction of a V_x vector to the boundary components alpha(v_w) == gap."""
    sig = []
    for coef, comp in zip(vec, setup.vx_basis):
        if comp.kind != "root" or not coef % setup.p:
            continue
        if setup.datum.root_value(comp.root, v_w) == gap:
            sig.append((comp.root, coef % setup.p))
    return tuple(sorted(sig))


def J_value(setup: GradedSetup, phi_vec, v_w, gap, orbit_keyed, stab_order,
            transversal=None):
    """Sum over the Hessenberg point set of the matching weight j."""
    datum = setup.datum
    if transversal is None:
        transversal = coset_transversal(setup, parabolic_gens(setup, v_w))
    allowed = [idx for idx, comp in enumerate(setup.vx_basis)
               if comp.kind == "cartan"
               or datum.root_value(comp.root, v_w) <= gap]
    H = hessenberg_points(setup, allowed, phi_vec, transversal)
    counts = j_counts_by_boundary(datum, orbit_keyed, v_w, gap)
    total = 0
    for g in H:
        a = setup.ad_vector(g, phi_vec)
        total += stab_order * counts.get(boundary_signature(setup, a, v_w, gap), 0)
    return total


# ---------------------------------------------------------------------------
# surjectivity rank check
# ---------------------------------------------------------------------------

def filtration_jumps(setup: GradedSetup):
    """Sorted fractional positions of the Lie-algebra filtration jumps at x."""
    fr = {Fraction(0)}
    for r in setup.datum.roots:
        v = setup.alpha_x[r]
        fr.add(v - (v.numerator // v.denominator))
    return sorted(fr)


def next_jump(setup: GradedSetup, r: Fraction) -> Fraction:
    """Smallest filtration jump strictly above r."""
    best = None
    for f in filtration_jumps(setup):
        d = r - f
        cand = f + (d.numerator // d.denominator) + 1
        if best is None or cand < best:
            best = cand
    return best


def graded_piece_basis(setup: GradedSetup, lo: Fraction, hi: Fraction):
    """Components of g_{x, lo:hi}: root monomials and Cartan lines with grade
    in [lo, hi)."""
    out = []
    for r in setup.datum.roots:
        a = setup.alpha_x[r]
        k = _ceil(lo - a)
        while k + a < hi:
            i, j = setup.root_position[r]
            out.append(Component("root", r, i, j, k))
            k += 1
    k = _ceil(lo)
    while k < hi:
        for l in range(setup.n - 1):
            out.append(Component("cartan", (l,), l, l, k))
        k += 1
    return out


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _component_matrix(setup: GradedSetup, comp: Component):
    n, p = setup.n, setup.p
    M = [[() for _ in range(n)] for _ in range(n)]
    if comp.kind == "root":
        M[comp.i][comp.j] = ent_mono(comp.k, 1, p)
    else:
        l = comp.root[0]
        M[l][l] = ent_mono(comp.k, 1, p)
        M[l + 1][l + 1] = ent_mono(comp.k, -1, p)
    return mat_from(M)


def ellipsurj_check(setup: GradedSetup, phi_vec, v_w, d_y, r: Fraction) -> bool:
    """Rank check: X in g_{x,r:r'} -> projection of [X, phi] onto the window
    components alpha(v_w) >= d_x + r - d_y of g_{x,d_x+r:d_x+r'} is onto."""
    p = setup.p
    r = Fraction(r)
    rp = next_jump(setup, r)
    dom = graded_piece_basis(setup, r, rp)
    tgt_lo, tgt_hi = setup.depth + r, setup.depth + rp
    threshold = setup.depth + r - Fraction(d_y)
    w2 = [c for c in graded_piece_basis(setup, tgt_lo, tgt_hi)
          if c.kind == "root"
          and setup.datum.root_value(c.root, v_w) >= threshold]
    if not w2:
        return True
    w2_index = {(c.kind, c.root, c.k): i for i, c in enumerate(w2)}
    phi = setup.vec_to_mat(phi_vec)
    rows = []
    for comp in dom:
        X = _component_matrix(setup, comp)
        br = mat_bracket(X, phi, p)
        row = [0] * len(w2)
        for i in range(setup.n):
            for j in range(setup.n):
                if i == j:
                    continue
                for e, c in br[i][j]:
                    key = ("root", setup.position_root[(i, j)], e)
                    if key in w2_index:
                        row[w2_index[key]] = c
        rows.append(row)
    return _fp_rank(rows, p) == len(w2)


def _fp_rank(rows, p):
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] % p), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], p - 2, p)
        rows[rank] = [v * inv % p for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] % p:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# realizations of affine Weyl elements as loop matrices
# ---------------------------------------------------------------------------

def coroot_to_e(coords):
    """Coroot-basis coordinates -> e-basis coordinates (sum zero)."""
    c = [Fraction(x) for x in coords]
    n = len(c) + 1
    out = []
    prev = Fraction(0)
    for i in range(n):
        cur = c[i] if i < n - 1 else Fraction(0)
        out.append(cur - prev)
        prev = cur
    return out


def translation_matrix(n: int, lam_coroot, p: int):
    """diag(t^mu) with mu the e-coordinates of the coroot lattice element;
    Ad by this matrix carries g_{z,r} to g_{z - lam, r}."""
    mu = coroot_to_e(lam_coroot)
    assert all(x.denominator == 1 for x in mu)
    M = [[() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        M[i][i] = ent_mono(int(mu[i]), 1, p)
    return mat_from(M)


def weyl_matrix(datum: RootDatum, weyl_elt, n: int, p: int):
    """An SL_n representative of a finite Weyl element, found by decomposing
    it into simple reflections."""
    from .rootdata import weyl_elements
    gens = []
    for k in range(n - 1):
        M = [[(() if a != b else ent_mono(0, 1, p)) for b in range(n)]
             for a in range(n)]
        M[k][k] = ()
        M[k + 1][k + 1] = ()
        M[k][k + 1] = ent_mono(0, p - 1, p)
        M[k + 1][k] = ent_mono(0, 1, p)
        gens.append(mat_from(M))
    # BFS word search
    target = weyl_elt.matrix
    ident = tuple(tuple(int(i == j) for j in range(datum.rank)) for i in range(datum.rank))
    if target == ident:
        return mat_id(n)
    simple = []
    for k in range(datum.rank):
        mat = tuple(
            tuple((1 if i == kk else 0) - (datum.cartan[k][kk] if i == k else 0)
                  for kk in range(datum.rank))
            for i in range(datum.rank))
        simple.append(mat)
    from collections import deque
    seen = {ident: mat_id(n)}
    queue = deque([ident])
    while queue:
        cur = queue.popleft()
        for k in range(datum.rank):
            nxt = tuple(tuple(sum(simple[k][i][l] * cur[l][j] for l in range(datum.rank))
                              for j in range(datum.rank)) for i in range(datum.rank))
            if nxt not in seen:
                seen[nxt] = mat_mul(gens[k], seen[cur], p)
                if nxt == target:
                    return seen[nxt]
                queue.append(nxt)
    raise ValueError("Weyl element not reached from the simple reflections")
