"""Exact arithmetic core: the ordered depth set {r, r+}, Laurent polynomials
in q, rational functions in q, and quasi-polynomials in the pair (q^n, n).

Everything is exact: integers, fractions.Fraction, and integer-coefficient
polynomial arithmetic.  No floating point anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd


class DenominatorVanishes(ArithmeticError):
    """A rational-function denominator vanishes at the evaluation point."""


class NonIntegralExponent(ValueError):
    """An exponent d*n of q^(d*n) is not an integer."""


class NoFit(ValueError):
    """The sample data is inconsistent with the candidate model space."""


class Underdetermined(ValueError):
    """Not enough samples to determine and validate a fit."""


# ---------------------------------------------------------------------------
# ExtReal: the totally ordered set of symbols {r, r+}
# ---------------------------------------------------------------------------

def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ExtReal:
    """Element r or r+ of the ordered depth set; ``plus`` encodes "r+"."""

    value: Fraction
    plus: bool = False

    def __post_init__(self):
        object.__setattr__(self, "value", _frac(self.value))

    def _key(self):
        return (self.value, self.plus)

    def __lt__(self, other: "ExtReal"):
        return self._key() < other._key()

    def __le__(self, other: "ExtReal"):
        return self._key() <= other._key()

    def __gt__(self, other: "ExtReal"):
        return self._key() > other._key()

    def __ge__(self, other: "ExtReal"):
        return self._key() >= other._key()

    def __repr__(self):
        return f"{self.value}+" if self.plus else f"{self.value}"


def ext(value, plus: bool = False) -> ExtReal:
    return ExtReal(_frac(value), plus)


def ext_cmp(a: ExtReal, b: ExtReal) -> int:
    """-1, 0, 1 according to the total order (r, False) < (r, True) < (s, ...)."""
    ka, kb = a._key(), b._key()
    return -1 if ka < kb else (1 if ka > kb else 0)


def count_integers_ge_lt(lo: ExtReal, hi: ExtReal) -> int:
    """Number of integers j with j >= lo and NOT j >= hi, in ExtReal order.

    j >= (a, False) means j >= a;  j >= (a, True) means j > a.
    """
    # smallest admissible j
    a = lo.value
    if lo.plus:
        j_min = a.numerator // a.denominator + 1  # j > a
    else:
        j_min = -((-a.numerator) // a.denominator)  # ceil(a)
    # largest admissible j: NOT (j >= hi)
    b = hi.value
    if hi.plus:
        j_max = b.numerator // b.denominator  # j <= b
    else:
        j_max = -((-b.numerator) // b.denominator) - 1  # j < b
    return max(0, j_max - j_min + 1)


# ---------------------------------------------------------------------------
# LaurentQ: integer-coefficient Laurent polynomials in q
# ---------------------------------------------------------------------------

class LaurentQ:
    """Finite map from integer q-exponent to integer coefficient."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for e, v in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
                if v:
                    c[e] = c.get(e, 0) + v
                    if not c[e]:
                        del c[e]
        self.c = c

    @classmethod
    def monomial(cls, exp: int, coef: int = 1) -> "LaurentQ":
        return cls({exp: coef} if coef else {})

    @classmethod
    def zero(cls) -> "LaurentQ":
        return cls()

    def is_zero(self) -> bool:
        return not self.c

    def __add__(self, other: "LaurentQ") -> "LaurentQ":
        c = dict(self.c)
        for e, v in other.c.items():
            w = c.get(e, 0) + v
            if w:
                c[e] = w
            elif e in c:
                del c[e]
        out = LaurentQ.__new__(LaurentQ)
        out.c = c
        return out

    def __neg__(self) -> "LaurentQ":
        out = LaurentQ.__new__(LaurentQ)
        out.c = {e: -v for e, v in self.c.items()}
        return out

    def __sub__(self, other: "LaurentQ") -> "LaurentQ":
        return self + (-other)

    def __mul__(self, other: "LaurentQ") -> "LaurentQ":
        c = {}
        for e1, v1 in self.c.items():
            for e2, v2 in other.c.items():
                e = e1 + e2
                w = c.get(e, 0) + v1 * v2
                if w:
                    c[e] = w
                elif e in c:
                    del c[e]
        out = LaurentQ.__new__(LaurentQ)
        out.c = c
        return out

    def shift(self, k: int, coef: int = 1) -> "LaurentQ":
        """Multiply by coef * q^k."""
        out = LaurentQ.__new__(LaurentQ)
        out.c = {e + k: v * coef for e, v in self.c.items()} if coef else {}
        return out

    def eval_at(self, q0: Fraction) -> Fraction:
        q0 = _frac(q0)
        if not q0:
            raise ZeroDivisionError("q0 must be nonzero")
        return sum((Fraction(v) * q0 ** e for e, v in self.c.items()), Fraction(0))

    def min_exp(self) -> int:
        return min(self.c) if self.c else 0

    def max_exp(self) -> int:
        return max(self.c) if self.c else 0

    def __eq__(self, other):
        return isinstance(other, LaurentQ) and self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{v}*q^{e}" for e, v in sorted(self.c.items()))

    def items_sorted(self):
        return sorted(self.c.items())


# ---------------------------------------------------------------------------
# Polynomials over Q (dense, for rational functions in q)
# ---------------------------------------------------------------------------

_GCD_PRIME = (1 << 31) - 1


class Poly:
    """Dense polynomial in q with Fraction coefficients, trimmed."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = [(_frac(x)) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def const(cls, x) -> "Poly":
        return cls((x,))

    @classmethod
    def monomial(cls, exp: int, coef=1) -> "Poly":
        return cls((0,) * exp + (coef,))

    def degree(self) -> int:
        return len(self.c) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.c

    def __add__(self, o: "Poly") -> "Poly":
        a, b = self.c, o.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly([-v for v in self.c])

    def __sub__(self, o: "Poly") -> "Poly":
        return self + (-o)

    def __mul__(self, o: "Poly") -> "Poly":
        if not self.c or not o.c:
            return Poly()
        out = [Fraction(0)] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        out[i + j] += a * b
        return Poly(out)

    def scale(self, k) -> "Poly":
        k = _frac(k)
        return Poly([v * k for v in self.c])

    def divmod(self, o: "Poly"):
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        q = [Fraction(0)] * max(0, len(r) - len(o.c) + 1)
        dlead = o.c[-1]
        while len(r) >= len(o.c):
            k = len(r) - len(o.c)
            f = r[-1] / dlead
            q[k] = f
            for i, v in enumerate(o.c):
                r[k + i] -= f * v
            while r and not r[-1]:
                r.pop()
            if not r:
                break
        return Poly(q), Poly(r)

    def monic(self) -> "Poly":
        if not self.c:
            return self
        lead = self.c[-1]
        return Poly([v / lead for v in self.c])

    def eval_at(self, q0) -> Fraction:
        q0 = _frac(q0)
        acc = Fraction(0)
        for v in reversed(self.c):
            acc = acc * q0 + v
        return acc

    def derivative(self) -> "Poly":
        return Poly([i * v for i, v in enumerate(self.c)][1:])

    def __eq__(self, o):
        return isinstance(o, Poly) and self.c == o.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{v}*q^{i}" for i, v in enumerate(self.c) if v)


def _poly_gcd_degree_modp(a: Poly, b: Poly, p: int = _GCD_PRIME):
    """Degree of gcd(a, b) mod p, or None if the reduction degenerates."""
    def red(P):
        out = []
        for v in P.c:
            if v.denominator % p == 0:
                return None
            out.append(v.numerator * pow(v.denominator, p - 2, p) % p)
        while out and not out[-1]:
            out.pop()
        return out

    ra, rb = red(a), red(b)
    if ra is None or rb is None:
        return None
    if len(ra) < len(a.c) or len(rb) < len(b.c):
        return None  # leading coefficient vanished mod p
    while rb:
        # ra mod rb
        inv = pow(rb[-1], p - 2, p)
        while len(ra) >= len(rb):
            k = len(ra) - len(rb)
            f = ra[-1] * inv % p
            for i, v in enumerate(rb):
                ra[k + i] = (ra[k + i] - f * v) % p
            while ra and not ra[-1]:
                ra.pop()
        ra, rb = rb, ra
    return len(ra) - 1


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over Q, with a mod-p coprimality pretest."""
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    d = _poly_gcd_degree_modp(a, b)
    if d == 0:
        return Poly((1,))
    x, y = a, b
    while not y.is_zero():
        x, y = y, x.divmod(y)[1]
    return x.monic()


class RatFuncQ:
    """Rational function in q: num/den with den monic and gcd(num, den) = 1."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = Poly((1,))):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num, self.den = Poly(), Poly((1,))
            return
        g = poly_gcd(num, den)
        if g.degree() > 0:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
        lead = den.c[-1]
        if lead != 1:
            num = num.scale(Fraction(1) / lead)
            den = den.scale(Fraction(1) / lead)
        self.num, self.den = num, den

    @classmethod
    def const(cls, x) -> "RatFuncQ":
        return cls(Poly((x,)))

    @classmethod
    def from_laurent(cls, L: LaurentQ) -> "RatFuncQ":
        if L.is_zero():
            return cls(Poly())
        m = min(L.min_exp(), 0)
        coeffs = [Fraction(0)] * (L.max_exp() - m + 1)
        for e, v in L.c.items():
            coeffs[e - m] = Fraction(v)
        return cls(Poly(coeffs), Poly.monomial(-m))

    @classmethod
    def q_power(cls, e: int) -> "RatFuncQ":
        if e >= 0:
            return cls(Poly.monomial(e))
        return cls(Poly((1,)), Poly.monomial(-e))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, o: "RatFuncQ") -> "RatFuncQ":
        return RatFuncQ(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self) -> "RatFuncQ":
        r = RatFuncQ.__new__(RatFuncQ)
        r.num, r.den = -self.num, self.den
        return r

    def __sub__(self, o: "RatFuncQ") -> "RatFuncQ":
        return self + (-o)

    def __mul__(self, o: "RatFuncQ") -> "RatFuncQ":
        return RatFuncQ(self.num * o.num, self.den * o.den)

    def __truediv__(self, o: "RatFuncQ") -> "RatFuncQ":
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFuncQ(self.num * o.den, self.den * o.num)

    def eval_at(self, q0) -> Fraction:
        q0 = _frac(q0)
        d = self.den.eval_at(q0)
        if d == 0:
            raise DenominatorVanishes(f"denominator vanishes at q={q0}")
        return self.num.eval_at(q0) / d

    def __eq__(self, o):
        return isinstance(o, RatFuncQ) and self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        if self.den == Poly((1,)):
            return repr(self.num)
        return f"({self.num})/({self.den})"

    def to_jsonable(self):
        def mono_list(p: Poly):
            return [[i, f"{v.numerator}/{v.denominator}"] for i, v in enumerate(p.c) if v]
        return {"num": mono_list(self.num), "den": mono_list(self.den)}


RF_ZERO = RatFuncQ(Poly())
RF_ONE = RatFuncQ(Poly((1,)))


# ---------------------------------------------------------------------------
# QuasiPoly: polynomials in (q^n, n) with RatFuncQ coefficients
# ---------------------------------------------------------------------------

class QuasiPoly:
    """Finite map (d, e) -> RatFuncQ giving the coefficient of q^(d*n) * n^e."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            items = coeffs.items() if isinstance(coeffs, dict) else coeffs
            for (d, e), v in items:
                if not v.is_zero():
                    c[(_frac(d), int(e))] = v
        self.c = c

    def is_zero(self) -> bool:
        return not self.c

    def support(self):
        return sorted(self.c)

    def qn_degrees(self):
        return sorted({d for (d, _e) in self.c})

    def eval(self, q0, n0: int) -> Fraction:
        """Evaluate at a prime power q0 and natural n0."""
        q0 = _frac(q0)
        total = Fraction(0)
        for (d, e), coef in self.c.items():
            dn = d * n0
            if dn.denominator != 1:
                raise NonIntegralExponent(f"exponent {d}*{n0} is not integral")
            total += coef.eval_at(q0) * q0 ** int(dn) * n0 ** e
        return total

    def coeff_in_qn(self, d) -> dict:
        """All coefficients at q^(d*n): a map e -> RatFuncQ (polynomial in n)."""
        d = _frac(d)
        return {e: v for (dd, e), v in self.c.items() if dd == d}

    def __eq__(self, o):
        return isinstance(o, QuasiPoly) and self.c == o.c

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"[{v}]*q^({d}n)*n^{e}" for (d, e), v in sorted(self.c.items()))

    def to_jsonable(self):
        out = []
        for (d, e) in sorted(self.c):
            out.append([f"{d.numerator}/{d.denominator}", e, self.c[(d, e)].to_jsonable()])
        return out


def qp_eval(p: QuasiPoly, q0, n0: int) -> Fraction:
    return p.eval(q0, n0)


def qp_coeff(p: QuasiPoly, d) -> dict:
    return p.coeff_in_qn(d)


# ---------------------------------------------------------------------------
# Dense integer Laurent helpers (internal to the fitter)
# ---------------------------------------------------------------------------
# A dense value is a pair (off, cs): the Laurent polynomial sum cs[i] q^(off+i),
# canonicalized so cs is [] for zero and has nonzero first/last entries.

def _dz(off, cs):
    lo = 0
    hi = len(cs)
    while hi > lo and not cs[hi - 1]:
        hi -= 1
    while lo < hi and not cs[lo]:
        lo += 1
    if lo == hi:
        return (0, [])
    return (off + lo, cs[lo:hi])


def _dz_from_laurent(L: LaurentQ):
    if L.is_zero():
        return (0, [])
    m, M = L.min_exp(), L.max_exp()
    cs = [0] * (M - m + 1)
    for e, v in L.c.items():
        cs[e - m] = v
    return (m, cs)


def _dz_to_laurent(a) -> LaurentQ:
    off, cs = a
    return LaurentQ({off + i: v for i, v in enumerate(cs) if v})


def _dz_is_zero(a):
    return not a[1]


def _dz_sub_shift(a, b, k, coef=1):
    """a - coef * q^k * b."""
    offa, ca = a
    offb, cb = b
    offb += k
    if not cb:
        return a if ca else (0, [])
    if not ca:
        return _dz(offb, [-coef * v for v in cb])
    lo = min(offa, offb)
    hi = max(offa + len(ca), offb + len(cb))
    out = [0] * (hi - lo)
    for i, v in enumerate(ca):
        out[offa - lo + i] = v
    for i, v in enumerate(cb):
        out[offb - lo + i] -= coef * v
    return _dz(lo, out)


def _dz_add_shift(a, b, k, coef=1):
    return _dz_sub_shift(a, b, k, -coef)


def _dz_scale(a, coef):
    if not coef:
        return (0, [])
    return (a[0], [v * coef for v in a[1]])


def _dz_shift(a, k):
    if not a[1]:
        return a
    return (a[0] + k, a[1])


def _dz_mul(a, b):
    offa, ca = a
    offb, cb = b
    if not ca or not cb:
        return (0, [])
    out = [0] * (len(ca) + len(cb) - 1)
    for i, x in enumerate(ca):
        if x:
            for j, y in enumerate(cb):
                if y:
                    out[i + j] += x * y
    return _dz(offa + offb, out)


def _apply_factors(seq, exps):
    """Apply the shift-operator product of (T - q^k) for k in exps to a sequence."""
    for k in exps:
        seq = [_dz_sub_shift(seq[i + 1], seq[i], k) for i in range(len(seq) - 1)]
    return seq


def _dz_to_ratfunc(a) -> RatFuncQ:
    return RatFuncQ.from_laurent(_dz_to_laurent(a))


# ---------------------------------------------------------------------------
# qp_fit: exact interpolation of quasi-polynomials from samples
# ---------------------------------------------------------------------------

def qp_fit(samples, degrees, max_npow: int) -> QuasiPoly:
    """Fit the unique QuasiPoly supported on degrees x {0..max_npow} that
    reproduces every (n, LaurentQ) sample exactly.

    Samples must be taken at distinct n; when the n values form an arithmetic
    progression a fast shift-operator cascade is used, otherwise a dense
    elimination over rational functions.  Raises NoFit if the data is not in
    the model space (every sample, including the trailing held-out ones, is
    checked), Underdetermined if there are too few samples.
    """
    degs = sorted({_frac(d) for d in degrees}, reverse=True)
    E = int(max_npow)
    samples = sorted(((int(n), s) for n, s in samples), key=lambda t: t[0])
    ns = [n for n, _s in samples]
    if len(set(ns)) != len(ns):
        raise ValueError("sample n values must be distinct")
    K = len(degs)
    unknowns = K * (E + 1)
    if len(samples) < unknowns + 2:
        raise Underdetermined(
            f"need at least {unknowns + 2} samples for {unknowns} unknowns, got {len(samples)}")
    for d in degs:
        for n in ns:
            if (d * n).denominator != 1:
                raise NonIntegralExponent(f"degree {d} at n={n} gives non-integral q-exponent")
    if all(s.is_zero() for _n, s in samples):
        return QuasiPoly()
    steps = {ns[i + 1] - ns[i] for i in range(len(ns) - 1)}
    if len(steps) == 1:
        fit = _qp_fit_ap(samples, degs, E, steps.pop())
    else:
        fit = _qp_fit_dense(samples, degs, E)
    _verify_fit(fit, samples)
    return fit


def _qp_fit_ap(samples, degs, E, P):
    n0 = samples[0][0]
    seq = [_dz_from_laurent(s) for _n, s in samples]
    nodes = [int(d * P) for d in degs]
    if len(set(nodes)) != len(nodes):
        raise NoFit("candidate degrees collide at the sampling period")
    # full cascade: the residual of the model recurrence must vanish
    resid = _apply_factors(seq, [k for k in nodes for _ in range(E + 1)])
    if any(not _dz_is_zero(r) for r in resid):
        raise NoFit("samples do not satisfy the model recurrence")
    pure = _all_but_one(seq, nodes, E + 1)
    coeffs = {}
    for d, k, r in zip(degs, nodes, pure):
        others = [kk for kk in nodes if kk != k for _ in range(E + 1)]
        for e, c in _extract_node(r, k, others, E, n0, P, d).items():
            if not c.is_zero():
                coeffs[(d, e)] = c
    return QuasiPoly(coeffs)


def _all_but_one(seq, nodes, mult):
    """For each node, the sequence with every other node's factors applied."""
    if len(nodes) == 1:
        return [seq]
    mid = len(nodes) // 2
    left, right = nodes[:mid], nodes[mid:]
    seq_for_right = _apply_factors(seq, [k for k in left for _ in range(mult)])
    seq_for_left = _apply_factors(seq, [k for k in right for _ in range(mult)])
    return _all_but_one(seq_for_left, left, mult) + _all_but_one(seq_for_right, right, mult)


def _extract_node(r, k, other_exps, E, n0, P, d):
    """Recover coefficients c_e of q^(d*n) n^e from a single-node sequence.

    r[i] = z^i * (polynomial of degree <= E in i) where z = q^k, after the
    operator prod (T - q^j) over other_exps has been applied to the component
    sum_e c_e q^(d*n0) z^i (n0+iP)^e.
    """
    # values of the residual polynomial rho(i) = r[i] / z^i, i = 0..E
    vals = [_dz_shift(r[i], -k * i) for i in range(E + 1)]
    # rho coefficients in powers of i via the inverse integer Vandermonde
    Vinv = _invert_rational_matrix([[Fraction(i ** m) for m in range(E + 1)] for i in range(E + 1)])
    rho = []
    den_scale = 1
    for row in Vinv:
        den_scale = max(den_scale, *(f.denominator for f in row))
    for m in range(E + 1):
        acc = (0, [])
        for i in range(E + 1):
            f = Vinv[m][i] * den_scale
            assert f.denominator == 1
            acc = _dz_add_shift(acc, vals[i], 0, int(f))
        rho.append(acc)  # den_scale * rho_m
    # images of the basis z^i * i^m under the operator, as i-polynomials
    # basis[m] = list of dense Laurent coefficients of powers i^0..i^E
    basis = []
    for m in range(E + 1):
        p = [(0, []) for _ in range(E + 1)]
        p[m] = (0, [1])
        basis.append(p)
    for j in other_exps:
        for m in range(E + 1):
            p = basis[m]
            q = []
            for rr in range(E + 1):
                # q^k * p(i+1)[r] - q^j * p(i)[r]
                acc = (0, [])
                for s in range(rr, E + 1):
                    acc = _dz_add_shift(acc, p[s], k, comb(s, rr))
                acc = _dz_sub_shift(acc, p[rr], j)
                q.append(acc)
            basis[m] = q
    # upper-triangular solve: sum_m gamma_m * basis[m] = rho (coefficient-wise)
    gamma = [None] * (E + 1)
    for m in range(E, -1, -1):
        rhs = _dz_to_ratfunc(rho[m]) * RatFuncQ.const(Fraction(1, den_scale))
        for s in range(m + 1, E + 1):
            rhs = rhs - _dz_to_ratfunc(basis[s][m]) * gamma[s]
        gamma[m] = rhs / _dz_to_ratfunc(basis[m][m])
    # gamma_m = q^(d*n0) * sum_e c_e * C(e, m) * n0^(e-m) * P^m
    shift = RatFuncQ.q_power(int(d * n0))
    coeffs = {}
    for e in range(E, -1, -1):
        acc = gamma[e]
        for s in range(e + 1, E + 1):
            t = RatFuncQ.const(Fraction(comb(s, e) * n0 ** (s - e) * P ** e))
            acc = acc - t * shift * coeffs[s]
        coeffs[e] = acc / (RatFuncQ.const(Fraction(P ** e)) * shift)
    return coeffs


def _invert_rational_matrix(M):
    n = len(M)
    A = [[_frac(M[i][j]) for j in range(n)] + [Fraction(i == j) for j in range(n)]
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


def _qp_fit_dense(samples, degs, E):
    """Dense elimination over RatFuncQ; fallback for non-AP sample grids."""
    unknowns = [(d, e) for d in degs for e in range(E + 1)]
    U = len(unknowns)
    rows = []
    for n, s in samples[:U + 1]:
        row = [RatFuncQ.q_power(int(d * n)) * RatFuncQ.const(n ** e) for d, e in unknowns]
        row.append(RatFuncQ.from_laurent(s))
        rows.append(row)
    sol = _solve_ratfunc_system(rows, U)
    return QuasiPoly({unknowns[i]: sol[i] for i in range(U)})


def _solve_ratfunc_system(rows, U):
    m = len(rows)
    piv_cols = []
    r = 0
    for col in range(U):
        piv = next((i for i in range(r, m) if not rows[i][col].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        f = rows[r][col]
        rows[r] = [v / f for v in rows[r]]
        for i in range(m):
            if i != r and not rows[i][col].is_zero():
                g = rows[i][col]
                rows[i] = [v - g * w for v, w in zip(rows[i], rows[r])]
        piv_cols.append(col)
        r += 1
    sol = [RF_ZERO] * U
    for i, col in enumerate(piv_cols):
        sol[col] = rows[i][U]
    for i in range(r, m):
        if not rows[i][U].is_zero():
            raise NoFit("inconsistent linear system")
    if len(piv_cols) < U:
        # non-pivot unknowns are fixed to zero; consistency is re-checked later
        pass
    return sol


def _verify_fit(fit: QuasiPoly, samples):
    """Exact verification of the fit against every sample.

    Clears the common denominator once and compares integer Laurent data.
    """
    dens = []
    for v in fit.c.values():
        if all(not (v.den == d) for d in dens):
            dens.append(v.den)
    D = Poly((1,))
    for d in dens:
        D = D * d
    scaled = {}
    scalar = 1
    for (d, e), v in fit.c.items():
        numpoly = v.num * D.divmod(v.den)[0]
        scaled[(d, e)] = (numpoly, e)
        for coef in numpoly.c:
            scalar = scalar * coef.denominator // gcd(scalar, coef.denominator)
    for coef in D.c:
        scalar = scalar * coef.denominator // gcd(scalar, coef.denominator)
    D_l = _poly_to_dz(D, scalar)
    for n, s in samples:
        lhs = (0, [])
        for (d, _e), (numpoly, e) in scaled.items():
            k = int(d * n)
            lhs = _dz_add_shift(lhs, _poly_to_dz(numpoly, scalar), k, n ** e)
        rhs = _dz_mul(_dz_from_laurent(s), D_l)
        if not _dz_is_zero(_dz_sub_shift(lhs, rhs, 0)):
            raise NoFit(f"fit fails to reproduce the sample at n={n}")


def _poly_to_dz(p: Poly, scalar: int = 1):
    cs = []
    for v in p.c:
        w = v * scalar
        assert w.denominator == 1, "scalar does not clear denominators"
        cs.append(int(w))
    return _dz(0, cs)
