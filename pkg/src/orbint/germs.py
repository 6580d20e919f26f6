"""Assembly of the orbital-integral expansion: the scaling exponent ell,
vanishing-based pruning, degree filtering, and the extraction of germ values
from the fitted class sums and the geometric point counts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .affine import ApartmentPoint, point_denominator
from .cells import arrangement_vertices, tau
from .classes import CosetSetup, StableClassSet, p_poly
from .finitegeom import GradedSetup, J_value, orbit_alpha_vectors
from .numerics import RF_ZERO, QuasiPoly, RatFuncQ
from .rootdata import RootDatum


class InvalidPartition(ValueError):
    pass


class DegreeAnomalyError(AssertionError):
    pass


class NIndependenceViolation(AssertionError):
    pass


class MissingGeometry(RuntimeError):
    pass


def orbit_dim(partition) -> int:
    """Dimension of the type-A nilpotent orbit with the given partition:
    n^2 - sum of squared dual-partition parts."""
    parts = sorted((int(p) for p in partition), reverse=True)
    if not parts or any(p <= 0 for p in parts):
        raise InvalidPartition(f"{partition} is not a partition")
    n = sum(parts)
    dual = [sum(1 for p in parts if p > i) for i in range(parts[0])]
    return n * n - sum(d * d for d in dual)


@dataclass(frozen=True)
class NilpotentSpec:
    """User-supplied test-coset datum isolating one nilpotent orbit."""

    partition: tuple
    y: ApartmentPoint
    d_y_star: Fraction
    phi_y_star: tuple          # coefficient vector over the V_y basis
    hypothesis_asserted: bool
    dim_override: int = 0      # orbit dimension for non-type-A runs

    @property
    def dim_orbit(self) -> int:
        if self.dim_override:
            return self.dim_override
        return orbit_dim(self.partition)


def choose_ell(datum: RootDatum, x: ApartmentPoint, y: ApartmentPoint) -> int:
    """Smallest even scaling exponent compatible with the point denominators
    and with integrality of ell*tau(v)/2 at every arrangement vertex."""
    ell = 2
    ell = _lcm(ell, point_denominator(datum, x.coords))
    ell = _lcm(ell, point_denominator(datum, y.coords))
    for v in arrangement_vertices(datum):
        ell = _lcm(ell, 2 * tau(datum, v).denominator)
    return ell


def _lcm(a, b):
    from math import gcd
    return a * b // gcd(a, b)


def prune(scs: StableClassSet, key, dim_orbit: int) -> bool:
    """True iff some vertex of the class cell closure has tau(v) < dim of the
    target orbit, in which case the geometric weight vanishes."""
    return any(t < dim_orbit for _v, t in scs.vertex_data[key])


def degree_filter(scs: StableClassSet, key, fit: QuasiPoly, dim_orbit: int) -> bool:
    """Assert the fitted degrees all lie in the vertex degree set, and report
    whether the target degree ell*dim/2 appears."""
    ell = scs.setup.ell
    allowed = {Fraction(ell) * t / 2 for _v, t in scs.vertex_data[key]}
    bad = [d for d in fit.qn_degrees() if d not in allowed]
    if bad:
        raise DegreeAnomalyError(
            f"class {key_id(scs, key)}: fitted degrees {bad} outside the "
            f"vertex degree set {sorted(allowed)}")
    return Fraction(ell * dim_orbit, 2) in fit.qn_degrees()


def key_id(scs: StableClassSet, key) -> str:
    return f"c{scs.keys.index(key):03d}"


# ---------------------------------------------------------------------------
# geometry per class
# ---------------------------------------------------------------------------

class GeometryContext:
    """Residue data shared by every class at one prime q."""

    def __init__(self, scs: StableClassSet, spec: NilpotentSpec, nsize: int,
                 q: int, phi_x_vec):
        setup = scs.setup
        self.q = q
        self.nsize = nsize
        self.scs = scs
        self.spec = spec
        self.gs_x = GradedSetup(nsize, q, setup.x.coords, setup.d_x)
        self.phi_x = tuple(phi_x_vec)
        self.gs_y = GradedSetup(nsize, q, spec.y.coords, spec.d_y_star)
        self.orbit, self.stab = orbit_alpha_vectors(self.gs_y, spec.phi_y_star)
        self.n_ref = scs.n_start

    def class_J(self, key) -> int:
        scs = self.scs
        setup = scs.setup
        v_w = scs.members_ref[key][0]
        gap = setup.gap(self.n_ref)
        if not _sigma_trivial(setup, v_w):
            raise MissingGeometry(
                "class reached through a nontrivial Weyl twist of y; "
                "only the translation case is implemented")
        return J_value(self.gs_x, self.phi_x, v_w, gap, self.orbit, self.stab)


def _sigma_trivial(setup: CosetSetup, v_w) -> bool:
    # v_w in x - y + Q^vee  <=>  x - v_w - y integral
    return all((a - b - c).denominator == 1
               for a, b, c in zip(setup.x.coords, v_w, setup.y.coords))


# ---------------------------------------------------------------------------
# the assembled report
# ---------------------------------------------------------------------------

@dataclass
class ClassRecord:
    cid: str
    cell_key: str
    members_at_ref: int
    vertices: tuple            # ((coords, tau), ...)
    dim: int
    fit: QuasiPoly
    pruned: bool
    prune_reason: str
    target_degree_present: bool
    J: dict                    # q -> int, empty in combinatorics-only mode


@dataclass
class GermReport:
    ell: int
    n_start: int
    period: int
    dim_orbit: int
    target_degree: Fraction
    classes: list
    degree_values: dict        # q -> {degree: Fraction}, constants in n
    degree_symbolic: dict      # q -> {degree: RatFuncQ}
    gamma_tilde: dict          # q -> Fraction: sum c_target(p) * J
    mu_base: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)


def assemble(scs: StableClassSet, spec: NilpotentSpec, q_values,
             phi_x_vec=None, nsize=None, mu_base=None,
             combinatorics_only=False) -> GermReport:
    """Run prune/degree/geometry over the stabilized classes and assemble the
    expansion coefficients per q^n-degree, asserting n-independence."""
    if not spec.hypothesis_asserted:
        raise MissingGeometry(
            "the isolation hypothesis on the test coset must be asserted")
    setup = scs.setup
    dim = spec.dim_orbit
    target = Fraction(setup.ell * dim, 2)
    from .cells import cell_dimension

    records = []
    contexts = {}
    if not combinatorics_only:
        if phi_x_vec is None or nsize is None:
            raise MissingGeometry("geometry requires phi_x and the matrix size")
        for q in q_values:
            contexts[q] = GeometryContext(scs, spec, nsize, q, phi_x_vec)

    for key in scs.keys:
        fit = p_poly(scs, key)
        pruned = prune(scs, key, dim)
        present = degree_filter(scs, key, fit, dim)
        J = {}
        if not combinatorics_only:
            for q in q_values:
                if pruned and not present:
                    # both filters kill the contribution; geometry not needed
                    continue
                J[q] = contexts[q].class_J(key)
        records.append(ClassRecord(
            cid=key_id(scs, key),
            cell_key=scs.cells[key].key(),
            members_at_ref=len(scs.members_ref[key]),
            vertices=scs.vertex_data[key],
            dim=cell_dimension(setup.datum, scs.cells[key]),
            fit=fit,
            pruned=pruned,
            prune_reason=("vertex with tau < dim orbit" if pruned else ""),
            target_degree_present=present,
            J=J,
        ))

    degree_values = {}
    degree_symbolic = {}
    gamma_tilde = {}
    if not combinatorics_only:
        all_degrees = sorted({d for r in records for d in r.fit.qn_degrees()})
        for q in q_values:
            per_deg_val = {}
            per_deg_sym = {}
            for d in all_degrees:
                sym_by_e = {}
                for r in records:
                    Jq = r.J.get(q)
                    if Jq is None:
                        Jq = 0 if (r.pruned or not r.fit.qn_degrees()) else None
                    if Jq is None:
                        raise MissingGeometry(f"missing J for class {r.cid}")
                    if Jq == 0:
                        continue
                    for e, coef in r.fit.coeff_in_qn(d).items():
                        cur = sym_by_e.get(e, RF_ZERO)
                        sym_by_e[e] = cur + coef * RatFuncQ.const(Jq)
                for e, sym in sym_by_e.items():
                    if e >= 1 and not sym.is_zero():
                        raise NIndependenceViolation(
                            f"degree {d}: coefficient of n^{e} is {sym}, "
                            f"nonzero at q = {q}")
                sym0 = sym_by_e.get(0, RF_ZERO)
                per_deg_sym[d] = sym0
                per_deg_val[d] = sym0.eval_at(Fraction(q))
            degree_values[q] = per_deg_val
            degree_symbolic[q] = per_deg_sym
            gamma_tilde[q] = per_deg_val.get(target, Fraction(0))

    report = GermReport(
        ell=setup.ell, n_start=scs.n_start, period=scs.period,
        dim_orbit=dim, target_degree=target, classes=records,
        degree_values=degree_values, degree_symbolic=degree_symbolic,
        gamma_tilde=gamma_tilde)
    if mu_base:
        for q, mu in mu_base.items():
            report.mu_base[q] = mu
            if q in gamma_tilde:
                report.gamma[q] = gamma_tilde[q] / mu
    return report
