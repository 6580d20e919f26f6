"""Configuration ingestion, pipeline orchestration, and deterministic report
emission.

Config files are INI text with dotted values parsed exactly (rationals as
"p/q", field elements as integer combinations of named basis vectors with
explicit t-powers).  Reports are JSON with canonical key order and all
rationals rendered as strings, so equal configs produce identical bytes.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import re
import sys
from fractions import Fraction

from . import __version__
from .affine import ApartmentPoint, point_denominator
from .classes import (
    CosetSetup, NoStabilization, class_sums_at_n, p_poly, stabilize,
)
from .finitegeom import GradedSetup, OrbitTooLarge
from .germs import (
    DegreeAnomalyError, GeometryContext, NilpotentSpec, NIndependenceViolation,
    assemble, choose_ell,
)
from .numerics import LaurentQ, NoFit
from .oracle import (
    EnumerationCap, OrbitalTest, SingularSystem, nilpotent_measure,
    quotient_orbital_sum, solve_germs,
)
from .rootdata import InvalidType, build_root_datum


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    pass


# Appendix condition: bad primes per type, and the extra type-A divisibility
_BAD_PRIMES = {"A": (), "B": (2,), "C": (2,), "D": (2,),
               "E": (2, 3), "F": (2, 3), "G": (2, 3)}


def prime_is_very_good(letter: str, rank: int, q: int) -> bool:
    bad = _BAD_PRIMES[letter]
    if letter == "E" and rank == 8:
        bad = (2, 3, 5)
    if q in bad:
        return False
    if letter == "A" and (rank + 1) % q == 0:
        return False
    return True


def _parse_fraction(text: str, where: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: cannot parse rational {text!r}: {exc}")


def _parse_vector(text: str, where: str):
    return tuple(_parse_fraction(part, where) for part in text.split(","))


_TERM_RE = re.compile(
    r"^\s*(?:(?P<coef>-?\d+)\s*\*\s*)?(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"(?:\s*\*\s*t(?:\^(?P<tpow>-?\d+))?)?\s*$")


def parse_field_element(text: str, setup: GradedSetup, where: str):
    """Parse an integer combination of named basis vectors into a coefficient
    vector over the graded-piece basis of ``setup``."""
    names = _basis_names(setup)
    vec = [0] * len(setup.vx_basis)
    body = text.replace("-", "+-").replace("++-", "+-")
    for raw in body.split("+"):
        term = raw.strip()
        if not term:
            continue
        neg = term.startswith("-")
        if neg:
            term = term[1:].strip()
        m = _TERM_RE.match(term)
        if not m:
            raise ParseError(f"{where}: cannot parse term {raw.strip()!r}")
        coef = int(m.group("coef") or 1) * (-1 if neg else 1)
        name = m.group("name")
        tpow = int(m.group("tpow")) if m.group("tpow") else (
            1 if "*" in term and term.rstrip().endswith("t") else 0)
        if name not in names:
            raise ParseError(f"{where}: unknown basis name {name!r}; "
                             f"known: {sorted(names)}")
        i, j = names[name]
        idx = None
        for pos, comp in enumerate(setup.vx_basis):
            if comp.kind == "root" and (comp.i, comp.j) == (i, j) and comp.k == tpow:
                idx = pos
            if comp.kind == "cartan" and (i, j) == (comp.root[0], comp.root[0]) \
                    and comp.k == tpow and name.startswith("h"):
                idx = pos
        if idx is None:
            raise ParseError(
                f"{where}: {name}*t^{tpow} is not a graded component at this "
                f"point and depth")
        vec[idx] = (vec[idx] + coef) % setup.p
    return tuple(vec)


def _basis_names(setup: GradedSetup):
    n = setup.n
    names = {}
    for i in range(n - 1):
        names[f"e_alpha_{i + 1}"] = (i, i + 1)
        names[f"f_alpha_{i + 1}"] = (i + 1, i)
    if n == 2:
        names["e_alpha"] = (0, 1)
        names["f_alpha"] = (1, 0)
    names["e_theta"] = (0, n - 1)
    names["f_theta"] = (n - 1, 0)
    for i in range(n):
        for j in range(n):
            if i != j:
                names[f"E{i + 1}{j + 1}"] = (i, j)
    for l in range(n - 1):
        names[f"h{l + 1}"] = (l, l)
    return names


# ---------------------------------------------------------------------------
# RunConfig
# ---------------------------------------------------------------------------

class RunConfig:
    def __init__(self, **kw):
        self.__dict__.update(kw)


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
        cp.read_string(raw, source=path)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}")

    def need(section, key):
        if not cp.has_option(section, key):
            raise ParseError(f"{path}: missing {section}.{key}")
        return cp.get(section, key)

    letter = need("group", "type").strip().upper()
    rank = int(need("group", "rank"))
    try:
        datum = build_root_datum(letter, rank)
    except InvalidType as exc:
        raise ParseError(f"{path}: {exc}")

    x_coords = _parse_vector(need("x", "coords"), "x.coords")
    d_x = _parse_fraction(need("x", "d_x"), "x.d_x")
    if len(x_coords) != rank:
        raise ParseError(f"{path}: x.coords must have {rank} entries")

    y_coords = _parse_vector(need("nilpotent", "y_coords"), "nilpotent.y_coords")
    d_y_star = _parse_fraction(need("nilpotent", "d_y_star"), "nilpotent.d_y_star")
    if letter == "A":
        partition = tuple(int(p) for p in need("nilpotent", "partition").split(","))
        dim_override = 0
    else:
        partition = (1,)
        dim_override = cp.getint("nilpotent", "dim_orbit", fallback=0)
        if not dim_override:
            raise ParseError(f"{path}: non type-A runs need nilpotent.dim_orbit")
    hyp = cp.getboolean("nilpotent", "hypothesis_nil_asserted", fallback=False)

    qs = tuple(int(s) for s in need("run", "q").split(","))
    mode = cp.get("run", "mode", fallback="full").strip()
    if mode not in ("combinatorics-only", "full", "oracle-verify"):
        raise ParseError(f"{path}: unknown mode {mode!r}")
    n_range = cp.get("run", "n_range", fallback="1:60")
    try:
        n_floor, n_cap = (int(v) for v in n_range.split(":"))
    except ValueError:
        raise ParseError(f"{path}: run.n_range must be like 1:60")
    ell_override = cp.getint("run", "ell", fallback=0) or None
    out = cp.get("run", "out", fallback=None)

    phi_x_text = cp.get("phi_x", "value", fallback=None)
    phi_y_text = cp.get("nilpotent", "phi_y_star", fallback=None)
    if mode != "combinatorics-only":
        if phi_x_text is None:
            raise ParseError(f"{path}: missing phi_x.value")
        if phi_y_text is None:
            raise ParseError(f"{path}: missing nilpotent.phi_y_star")

    cfg = RunConfig(
        path=path, sha256=hashlib.sha256(raw.encode()).hexdigest(),
        letter=letter, rank=rank, datum=datum,
        x=ApartmentPoint(x_coords), d_x=d_x,
        y=ApartmentPoint(y_coords), d_y_star=d_y_star,
        partition=partition, dim_override=dim_override, hypothesis=hyp,
        qs=qs, mode=mode, n_floor=n_floor, n_cap=n_cap,
        ell_override=ell_override, out=out,
        phi_x_text=phi_x_text, phi_y_text=phi_y_text,
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig):
    ell = cfg.ell_override or choose_ell(cfg.datum, cfg.x, cfg.y)
    for q in cfg.qs:
        if any(q % d == 0 for d in range(2, q)) or q < 2:
            raise ValidationError(f"q = {q} is not prime")
        if not prime_is_very_good(cfg.letter, cfg.rank, q):
            raise ValidationError(
                f"q = {q} is not very good for {cfg.letter}{cfg.rank} "
                f"(bad-prime / type-A divisibility condition)")
        m = point_denominator(cfg.datum, cfg.x.coords)
        if m % q == 0:
            raise ValidationError(
                f"q = {q} divides the denominator {m} of the point x")
    if not cfg.d_x > cfg.d_y_star - ell * max(1, cfg.n_floor):
        raise ValidationError(
            f"d_x = {cfg.d_x} must exceed d_y* - ell*n_min = "
            f"{cfg.d_y_star - ell * max(1, cfg.n_floor)}")
    if cfg.mode != "combinatorics-only":
        if cfg.letter != "A" or cfg.rank > 3:
            raise ValidationError(
                "geometry is implemented for split type A with rank <= 3; "
                "use mode = combinatorics-only")
    cfg.ell = ell


# ---------------------------------------------------------------------------
# report rendering
# ---------------------------------------------------------------------------

def _fr(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _vec(coords):
    return [_fr(c) for c in coords]


def build_report(cfg: RunConfig, scs, germ_report, oracle_block=None):
    classes = []
    for rec in germ_report.classes:
        classes.append({
            "id": rec.cid,
            "cell": rec.cell_key,
            "dim": rec.dim,
            "members_at_reference": rec.members_at_ref,
            "vertices": [{"coords": _vec(v), "tau": _fr(t)}
                         for v, t in rec.vertices],
            "p_poly": rec.fit.to_jsonable(),
            "pruned": rec.pruned,
            "prune_reason": rec.prune_reason,
            "target_degree_present": rec.target_degree_present,
            "J": {str(q): v for q, v in sorted(rec.J.items())},
        })
    report = {
        "provenance": {
            "tool": "orbint",
            "version": __version__,
            "config_sha256": cfg.sha256,
        },
        "group": {"type": cfg.letter, "rank": cfg.rank},
        "mode": cfg.mode,
        "x": {"coords": _vec(cfg.x.coords), "d_x": _fr(cfg.d_x)},
        "nilpotent": {
            "partition": list(cfg.partition),
            "y_coords": _vec(cfg.y.coords),
            "d_y_star": _fr(cfg.d_y_star),
            "dim_orbit": germ_report.dim_orbit,
        },
        "ell": germ_report.ell,
        "stabilization": {"n_start": germ_report.n_start,
                          "period": germ_report.period},
        "target_degree": _fr(germ_report.target_degree),
        "classes": classes,
        "degree_values": {str(q): {_fr(d): _fr(v) for d, v in sorted(vals.items())}
                          for q, vals in sorted(germ_report.degree_values.items())},
        "gamma_tilde": {str(q): _fr(v)
                        for q, v in sorted(germ_report.gamma_tilde.items())},
        "mu_base": {str(q): _fr(v) for q, v in sorted(germ_report.mu_base.items())},
        "gamma": {str(q): _fr(v) for q, v in sorted(germ_report.gamma.items())},
    }
    if oracle_block is not None:
        report["oracle"] = oracle_block
    return report


def report_bytes(report) -> bytes:
    return (json.dumps(report, sort_keys=True, indent=1) + "\n").encode()


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def run_pipeline(cfg: RunConfig):
    setup = CosetSetup(cfg.datum, cfg.x, cfg.y, cfg.d_x, cfg.d_y_star, cfg.ell)
    scs = stabilize(setup, n_floor=cfg.n_floor, n_cap=cfg.n_cap)

    nsize = cfg.rank + 1
    phi_y_vecs = {}
    phi_x_vecs = {}
    if cfg.mode != "combinatorics-only":
        for q in cfg.qs:
            ys = GradedSetup(nsize, q, cfg.y.coords, cfg.d_y_star)
            phi_y_vecs[q] = parse_field_element(cfg.phi_y_text, ys,
                                                "nilpotent.phi_y_star")
            xs = GradedSetup(nsize, q, cfg.x.coords, cfg.d_x)
            phi_x_vecs[q] = parse_field_element(cfg.phi_x_text, xs, "phi_x.value")

    # NilpotentSpec needs one coefficient vector; coefficients are plain
    # integers so any configured q gives the same abstract vector length
    spec_q = cfg.qs[0] if cfg.qs else 3
    ys0 = GradedSetup(nsize, spec_q, cfg.y.coords, cfg.d_y_star) \
        if cfg.mode != "combinatorics-only" else None
    spec = NilpotentSpec(
        partition=cfg.partition, y=cfg.y, d_y_star=cfg.d_y_star,
        phi_y_star=phi_y_vecs.get(spec_q, ()),
        hypothesis_asserted=cfg.hypothesis or cfg.mode == "combinatorics-only",
        dim_override=cfg.dim_override,
    )

    if cfg.mode == "combinatorics-only":
        report = assemble(scs, spec, (), combinatorics_only=True)
        return scs, report, None

    mu = {}
    for q in cfg.qs:
        mu[q] = nilpotent_measure(nsize, q, cfg.y.coords, cfg.d_y_star,
                                  phi_y_vecs[q])
    # per-q geometry: assemble supports a single phi vector; run per q
    reports = {}
    for q in cfg.qs:
        reports[q] = assemble(scs, NilpotentSpec(cfg.partition, cfg.y,
                                                 cfg.d_y_star, phi_y_vecs[q],
                                                 spec.hypothesis_asserted,
                                                 cfg.dim_override),
                              (q,), phi_x_vec=phi_x_vecs[q], nsize=nsize,
                              mu_base={q: mu[q]})
    germ = _merge_reports(reports, cfg.qs)

    oracle_block = None
    if cfg.mode == "oracle-verify":
        oracle_block = run_oracle_checks(cfg, scs, reports, phi_x_vecs,
                                         phi_y_vecs, mu)
    return scs, germ, oracle_block


def _merge_reports(per_q, qs):
    first = per_q[qs[0]]
    merged = first
    for q in qs[1:]:
        other = per_q[q]
        for rec, rec2 in zip(merged.classes, other.classes):
            rec.J.update(rec2.J)
        merged.degree_values.update(other.degree_values)
        merged.degree_symbolic.update(other.degree_symbolic)
        merged.gamma_tilde.update(other.gamma_tilde)
        merged.mu_base.update(other.mu_base)
        merged.gamma.update(other.gamma)
    return merged


def run_oracle_checks(cfg, scs, reports, phi_x_vecs, phi_y_vecs, mu,
                      n_values=(1, 2)):
    """Engine-vs-oracle agreement at small n plus the direct germ solve."""
    nsize = cfg.rank + 1
    out = {}
    for q in cfg.qs:
        gr = reports[q]
        ctx = GeometryContext(scs, NilpotentSpec(cfg.partition, cfg.y,
                                                 cfg.d_y_star, phi_y_vecs[q], True,
                                                 cfg.dim_override),
                              nsize, q, phi_x_vecs[q])
        xs = ctx.gs_x
        ys = ctx.gs_y
        phi_x_mat = xs.vec_to_mat(phi_x_vecs[q])
        phi_y_base = ys.vec_to_mat(phi_y_vecs[q])
        agreements = {}
        for n in n_values:
            shift = -cfg.ell * n
            phi_y_n = tuple(tuple(tuple((e + shift, c) for e, c in entry)
                                  for entry in row) for row in phi_y_base)
            test = OrbitalTest(
                nsize=nsize, q=q, x=cfg.x.coords, d_x=cfg.d_x,
                phi_x_mat=phi_x_mat, y=cfg.y.coords,
                d_y=cfg.d_y_star - cfg.ell * n, phi_y_mat=phi_y_n,
                trunc=16 + 2 * cfg.ell * n)
            oracle_val = quotient_orbital_sum(test)
            engine_val = Fraction(0)
            sums = class_sums_at_n(scs.setup, n)
            for key in scs.keys:
                Jq = _class_J_for(gr, scs, key, q)
                if Jq:
                    engine_val += LaurentQ(sums[key]).eval_at(Fraction(q)) * Jq
            agreements[str(n)] = {
                "oracle": _fr(oracle_val), "engine": _fr(engine_val),
                "equal": oracle_val == engine_val,
            }
        base = OrbitalTest(
            nsize=nsize, q=q, x=cfg.x.coords, d_x=cfg.d_x,
            phi_x_mat=phi_x_mat, y=cfg.y.coords, d_y=cfg.d_y_star,
            phi_y_mat=phi_y_base, trunc=16)
        gammas = solve_germs(base, cfg.ell, [(gr.dim_orbit, mu[q])],
                             list(n_values))
        engine_gamma = gr.gamma.get(q)
        out[str(q)] = {
            "orbital_sums": agreements,
            "solved_gamma": _fr(gammas[0]),
            "engine_gamma": _fr(engine_gamma) if engine_gamma is not None else None,
            "gamma_equal": engine_gamma == gammas[0],
        }
    return out


def _class_J_for(germ_report, scs, key, q):
    from .germs import key_id
    cid = key_id(scs, key)
    for rec in germ_report.classes:
        if rec.cid == cid:
            if rec.pruned and q not in rec.J:
                return 0
            return rec.J.get(q, 0)
    return 0


# ---------------------------------------------------------------------------
# CLI entry points
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    scs, germ, oracle_block = run_pipeline(cfg)
    report = build_report(cfg, scs, germ, oracle_block)
    data = report_bytes(report)
    if cfg.out:
        with open(cfg.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode())
    if oracle_block is not None:
        ok = all(blk["gamma_equal"] and
                 all(a["equal"] for a in blk["orbital_sums"].values())
                 for blk in oracle_block.values())
        if not ok:
            return 3
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    cfg.mode = "oracle-verify"
    validate_config(cfg)
    scs, germ, oracle_block = run_pipeline(cfg)
    for q, blk in sorted(oracle_block.items()):
        for n, a in sorted(blk["orbital_sums"].items()):
            print(f"q={q} n={n}: oracle={a['oracle']} engine={a['engine']} "
                  f"equal={a['equal']}")
        print(f"q={q}: solved gamma={blk['solved_gamma']} "
              f"engine gamma={blk['engine_gamma']} equal={blk['gamma_equal']}")
    ok = all(blk["gamma_equal"] and
             all(a["equal"] for a in blk["orbital_sums"].values())
             for blk in oracle_block.values())
    return 0 if ok else 3


def cmd_explain_class(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    setup = CosetSetup(cfg.datum, cfg.x, cfg.y, cfg.d_x, cfg.d_y_star, cfg.ell)
    scs = stabilize(setup, n_floor=cfg.n_floor, n_cap=cfg.n_cap)
    from .germs import key_id
    target = None
    for key in scs.keys:
        if key_id(scs, key) == args.class_id:
            target = key
            break
    if target is None:
        ids = [key_id(scs, k) for k in scs.keys]
        print(f"unknown class id {args.class_id}; available: {', '.join(ids)}")
        return 2
    fit = p_poly(scs, target)
    info = {
        "id": args.class_id,
        "cell": scs.cells[target].key(),
        "derivative_coset": [list(r) for r in scs.d_keys[target]],
        "vertices": [{"coords": _vec(v), "tau": _fr(t)}
                     for v, t in scs.vertex_data[target]],
        "members_at_reference_n": [
            _vec(m) for m in scs.members_ref[target]],
        "reference_n": scs.n_start,
        "samples": {str(n): sorted(h.items())
                    for n, h in sorted(scs.sums[target].items())[:8]},
        "p_poly": fit.to_jsonable(),
    }
    print(json.dumps(info, sort_keys=True, indent=1))
    return 0


def _apply_overrides(cfg, args):
    if getattr(args, "mode", None):
        cfg.mode = args.mode
    if getattr(args, "q", None):
        cfg.qs = tuple(int(s) for s in args.q.split(","))
    if getattr(args, "n_range", None):
        cfg.n_floor, cfg.n_cap = (int(v) for v in args.n_range.split(":"))
    if getattr(args, "out", None):
        cfg.out = args.out
    validate_config(cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="orbint",
        description="exact orbital-integral expansions and Shalika germs "
                    "for split groups over F_q((t))")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("verify", cmd_verify)):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--mode", choices=("combinatorics-only", "full",
                                          "oracle-verify"))
        p.add_argument("--q")
        p.add_argument("--n-range", dest="n_range")
        p.add_argument("--out")
        p.set_defaults(fn=fn)
    p = sub.add_parser("explain-class")
    p.add_argument("config")
    p.add_argument("class_id")
    p.add_argument("--mode", choices=("combinatorics-only", "full",
                                      "oracle-verify"))
    p.add_argument("--q")
    p.add_argument("--n-range", dest="n_range")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_explain_class)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NIndependenceViolation, DegreeAnomalyError, NoFit,
            SingularSystem) as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return 3
    except (OrbitTooLarge, EnumerationCap, NoStabilization) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
