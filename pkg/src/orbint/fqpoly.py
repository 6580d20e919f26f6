"""Exact arithmetic over F_p: Laurent-polynomial matrices in the uniformizer
t, dense polynomials over F_p, and univariate polynomial gcds over the
rational function field F_p(t).

Matrix entries are dicts {t-exponent: coefficient in 1..p-1}; matrices are
tuples of row-tuples of frozen entries (sorted (exp, coef) tuples), which
makes group elements hashable for orbit and coset enumeration.
"""
from __future__ import annotations


# ---------------------------------------------------------------------------
# Laurent entries
# ---------------------------------------------------------------------------

def ent(pairs=()) -> tuple:
    """Frozen entry from (exp, coef) pairs."""
    return tuple(sorted((e, c) for e, c in pairs if c))


def ent_mono(exp: int, coef: int, p: int) -> tuple:
    c = coef % p
    return ((exp, c),) if c else ()


def ent_add(a, b, p):
    d = dict(a)
    for e, c in b:
        v = (d.get(e, 0) + c) % p
        if v:
            d[e] = v
        elif e in d:
            del d[e]
    return tuple(sorted(d.items()))


def ent_neg(a, p):
    return tuple((e, (-c) % p) for e, c in a)


def ent_mul(a, b, p, trunc=None):
    d = {}
    for e1, c1 in a:
        for e2, c2 in b:
            e = e1 + e2
            if trunc is not None and e >= trunc:
                continue
            v = (d.get(e, 0) + c1 * c2) % p
            if v:
                d[e] = v
            elif e in d:
                del d[e]
    return tuple(sorted(d.items()))


def ent_scale(a, k, p):
    k %= p
    if not k:
        return ()
    return tuple((e, (c * k) % p) for e, c in a)


def ent_min_val(a):
    return a[0][0] if a else None


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

def mat_id(n: int) -> tuple:
    return tuple(tuple(((0, 1),) if i == j else () for j in range(n)) for i in range(n))


def mat_from(entries) -> tuple:
    return tuple(tuple(ent(e) if not isinstance(e, tuple) else e for e in row)
                 for row in entries)


def mat_mul(A, B, p, trunc=None):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = ()
            for l in range(n):
                if A[i][l] and B[l][j]:
                    acc = ent_add(acc, ent_mul(A[i][l], B[l][j], p, trunc), p)
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_add(A, B, p):
    return tuple(tuple(ent_add(a, b, p) for a, b in zip(ra, rb))
                 for ra, rb in zip(A, B))


def mat_neg(A, p):
    return tuple(tuple(ent_neg(a, p) for a in row) for row in A)


def mat_sub(A, B, p):
    return mat_add(A, mat_neg(B, p), p)


def mat_scale(A, k, p):
    return tuple(tuple(ent_scale(a, k, p) for a in row) for row in A)


def mat_bracket(A, B, p, trunc=None):
    return mat_sub(mat_mul(A, B, p, trunc), mat_mul(B, A, p, trunc), p)


def mat_det(A, p, trunc=None):
    n = len(A)
    if n == 1:
        return A[0][0]
    acc = ()
    for j in range(n):
        minor = tuple(tuple(A[i][l] for l in range(n) if l != j) for i in range(1, n))
        term = ent_mul(A[0][j], mat_det(minor, p, trunc), p, trunc)
        acc = ent_add(acc, term if j % 2 == 0 else ent_neg(term, p), p)
    return acc


def ent_series_inverse(a, p, trunc):
    """Inverse of a Laurent entry with unit lowest term, modulo t^trunc."""
    (k0, c0) = a[0]
    c0inv = pow(c0, p - 2, p)
    # a = c0 t^k0 (1 + u) with u of positive valuation; invert the series
    tail = tuple((e - k0, (c * c0inv) % p) for e, c in a[1:])
    inv = {0: 1}
    cur = ((0, 1),)
    bound = trunc - (-k0) if trunc is not None else None
    for _ in range(64):
        cur = ent_mul(cur, ent_neg(tail, p), p, bound)
        if not cur:
            break
        for e, c in cur:
            inv[e] = (inv.get(e, 0) + c) % p
    else:
        raise AssertionError("series inversion needs a truncation bound")
    return tuple(sorted((e - k0, (c * c0inv) % p) for e, c in inv.items()
                        if c % p))


def mat_inv(A, p, trunc=None):
    """Inverse via the adjugate; the determinant must be a monomial or, when
    a truncation bound is given, a unit power series inverted modulo t^trunc."""
    n = len(A)
    det = mat_det(A, p)
    assert det, "singular matrix"
    if len(det) == 1:
        (dexp, dcoef), = det
        dinv_ent = ((-dexp, pow(dcoef, p - 2, p)),)
    else:
        assert trunc is not None, f"determinant {det} is not a monomial"
        dinv_ent = ent_series_inverse(det, p, trunc)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = tuple(tuple(A[r][c] for c in range(n) if c != j)
                          for r in range(n) if r != i)
            cof = mat_det(minor, p) if n > 1 else ((0, 1),)
            if (i + j) % 2:
                cof = ent_neg(cof, p)
            out[j][i] = ent_mul(cof, dinv_ent, p, trunc)
    return tuple(tuple(r) for r in out)


def mat_conj(g, X, p, trunc=None):
    """Ad(g) X = g X g^{-1}."""
    return mat_mul(mat_mul(g, X, p, trunc), mat_inv(g, p, trunc), p, trunc)


def mat_is_zero(A):
    return all(not e for row in A for e in row)


def mat_trace(A, p):
    acc = ()
    for i in range(len(A)):
        acc = ent_add(acc, A[i][i], p)
    return acc


# ---------------------------------------------------------------------------
# dense polynomials over F_p (in t) and gcds over F_p(t) in X
# ---------------------------------------------------------------------------

def fp_trim(c):
    while c and not c[-1]:
        c.pop()
    return c


def fp_add(a, b, p):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, v in enumerate(b):
        out[i] = (out[i] + v) % p
    return fp_trim(out)


def fp_neg(a, p):
    return [(-v) % p for v in a]


def fp_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return fp_trim(out)


def fp_divmod(a, b, p):
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        k = len(a) - len(b)
        f = a[-1] * inv % p
        q[k] = f
        for i, v in enumerate(b):
            a[k + i] = (a[k + i] - f * v) % p
        fp_trim(a)
        if not a:
            break
    return q, a


def fp_gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        a, b = b, fp_divmod(a, b, p)[1]
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [v * inv % p for v in a]
    return a


def fp_deriv(a, p):
    return fp_trim([(i * v) % p for i, v in enumerate(a)][1:])


def charpoly_laurent(A, p):
    """Characteristic polynomial det(X - A): list of Laurent entries, index i
    holding the coefficient of X^i."""
    n = len(A)
    # interference-free expansion over permutations (n <= 4 here)
    from itertools import permutations
    coeffs = [() for _ in range(n + 1)]
    # build det(X I - A) by expanding the product over permutations of
    # entries e_{i,sigma(i)} where diagonal entries are (X - A_ii)
    def sign(perm):
        s = 1
        seen = [False] * len(perm)
        for i in range(len(perm)):
            if seen[i]:
                continue
            l = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                l += 1
            if l % 2 == 0:
                s = -s
        return s

    for perm in permutations(range(n)):
        sgn = sign(perm)
        # product over i of: (X*delta - A[i][perm[i]])
        # expand as polynomial in X with Laurent coefficients
        prod = {0: ((0, sgn % p),)}
        for i in range(n):
            a = ent_neg(A[i][perm[i]], p)
            new = {}
            for xd, c in prod.items():
                t1 = ent_mul(c, a, p)
                if t1:
                    new[xd] = ent_add(new.get(xd, ()), t1, p)
                if perm[i] == i:
                    new[xd + 1] = ent_add(new.get(xd + 1, ()), c, p)
            prod = new
        for xd, c in prod.items():
            coeffs[xd] = ent_add(coeffs[xd], c, p)
    return coeffs


def is_semisimple_charpoly(coeffs, p):
    """Squarefree test of the characteristic polynomial over F_p(t).

    The coefficients are Laurent entries; after clearing t powers the test is
    gcd(f, df/dX) constant, carried out with rational-function coefficients
    represented by numerator/denominator pairs over F_p[t].
    """
    shift = min((ent_min_val(c) for c in coeffs if c), default=0)
    shift = min(shift, 0)
    polys = []
    for c in coeffs:
        dense = [0] * (max((e for e, _ in c), default=0) - shift + 1)
        for e, v in c:
            dense[e - shift] = v
        polys.append(fp_trim(dense))
    f = polys
    df = [fp_mul(c, [i % p], p) for i, c in enumerate(f)][1:]
    g = _xgcd_over_fpt(f, df, p)
    return len(g) == 1


def _xgcd_over_fpt(f, g, p):
    """Monic gcd in X of polynomials with F_p[t] coefficients, computed over
    the fraction field F_p(t).  Returns the list of X-coefficients, each an
    F_p[t] polynomial, normalized to be primitive."""
    def trim(h):
        while h and not h[-1]:
            h.pop()
        return h

    f, g = trim([list(c) for c in f]), trim([list(c) for c in g])
    while g:
        # pseudo-division: multiply f by lead(g)^(deg f - deg g + 1)
        lead = g[-1]
        while len(f) >= len(g):
            k = len(f) - len(g)
            c = f[-1]
            # f <- lead * f - c * X^k * g
            f = [fp_mul(h, lead, p) for h in f]
            for i, gc in enumerate(g):
                f[k + i] = fp_add(f[k + i], fp_neg(fp_mul(c, gc, p), p), p)
            trim(f)
            if not f:
                break
        f, g = g, f
        # strip content to keep degrees small
        if g:
            cont = []
            for h in g:
                cont = fp_gcd(cont, h, p) if cont or h else cont
            if cont and len(cont) > 1:
                g = [fp_divmod(h, cont, p)[0] if h else [] for h in g]
    return f
