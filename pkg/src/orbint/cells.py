"""Polyhedral cells of the wall arrangement alpha(v) = 0, alpha(v) = 2 on V:
sign-vector classification, boundedness, vertices, the weight tau, and orbits
under a point stabilizer.

All geometry is exact over the rationals; boundedness is decided by linear
programming with Fraction pivoting.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .rootdata import RootDatum

NEG, ZERO, OPEN01, TWO, BIG = 0, 1, 2, 3, 4
_SYMBOL_NAMES = ("NEG", "ZERO", "OPEN01", "TWO", "BIG")
# symbols a point may carry while staying in the closure of a cell with the
# given symbol (sign-vector coarsening, per wall pair)
_CLOSURE_OK = {
    NEG: {NEG, ZERO},
    ZERO: {ZERO},
    OPEN01: {OPEN01, ZERO, TWO},
    TWO: {TWO},
    BIG: {BIG, TWO},
}


class InconsistentCell(ValueError):
    pass


class NotBounded(ValueError):
    pass


@dataclass(frozen=True)
class Cell:
    """Sign vector over the full root list of a datum."""

    signs: tuple

    def key(self) -> str:
        return "".join("nzotb"[s] for s in self.signs)

    def __repr__(self):
        return f"Cell({self.key()})"


@dataclass(frozen=True)
class CellOrbit:
    representative: Cell
    size: int


def _root_functional(datum: RootDatum, root):
    """Coordinates of a root as a functional on coroot coordinates."""
    return tuple(
        sum(root[i] * datum.cartan[i][j] for i in range(datum.rank))
        for j in range(datum.rank)
    )


def classify_value(val: Fraction) -> int:
    if val < 0:
        return NEG
    if val == 0:
        return ZERO
    if val < 2:
        return OPEN01
    if val == 2:
        return TWO
    return BIG


def classify_point(datum: RootDatum, v) -> Cell:
    """Sign symbols of alpha(v) against the thresholds {0, 2}, every root."""
    return Cell(tuple(classify_value(datum.root_value(r, v)) for r in datum.roots))


def cell_dimension(datum: RootDatum, cell: Cell) -> int:
    rows = [_root_functional(datum, r)
            for r, s in zip(datum.roots, cell.signs) if s in (ZERO, TWO)]
    return datum.rank - _matrix_rank(rows)


def _matrix_rank(rows) -> int:
    rows = [list(map(Fraction, r)) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        f = rows[rank][col]
        rows[rank] = [v / f for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                g = rows[i][col]
                rows[i] = [a - g * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# exact feasibility LP (phase-1 simplex, Bland's rule)
# ---------------------------------------------------------------------------

def _feasible_nonneg_combination(columns, target) -> bool:
    """Is target in the nonnegative span of the given column vectors?  Exact
    phase-1 simplex with Bland's rule."""
    m = len(target)
    n = len(columns)
    A = [[Fraction(columns[j][i]) for j in range(n)] for i in range(m)]
    b = [Fraction(t) for t in target]
    for i in range(m):
        if b[i] < 0:
            b[i] = -b[i]
            A[i] = [-v for v in A[i]]
    ncols = n + m
    T = [A[i] + [Fraction(int(j == i)) for j in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]

    def reduced_costs():
        # minimize sum of artificials: z_j - c_j with c = 1 on artificials
        out = []
        for j in range(ncols):
            zj = sum(T[i][j] for i in range(m) if basis[i] >= n)
            out.append(zj - (Fraction(1) if j >= n else Fraction(0)))
        val = sum(T[i][ncols] for i in range(m) if basis[i] >= n)
        return out, val

    while True:
        red, val = reduced_costs()
        enter = next((j for j in range(ncols) if red[j] > 0), None)
        if enter is None:
            return val == 0
        ratios = [(T[i][ncols] / T[i][enter], basis[i], i)
                  for i in range(m) if T[i][enter] > 0]
        if not ratios:
            return False
        _, _, leave = min(ratios)
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for i in range(m):
            if i != leave and T[i][enter]:
                g = T[i][enter]
                T[i] = [a - g * bb for a, bb in zip(T[i], T[leave])]
        basis[leave] = enter


def is_bounded(datum: RootDatum, cell: Cell) -> bool:
    """True iff the recession cone of the cell is {0}.

    Equivalent criterion: the positive span of the functionals of
    Phi_flat = {alpha : alpha(v) <= 2 on the cell} is the whole dual space.
    """
    if datum.rank == 0:
        return True
    flat = [_root_functional(datum, r)
            for r, s in zip(datum.roots, cell.signs) if s != BIG]
    if not flat:
        return False
    for j in range(datum.rank):
        for sign in (1, -1):
            target = tuple(Fraction(sign * int(i == j)) for i in range(datum.rank))
            if not _feasible_nonneg_combination(flat, target):
                return False
    return True


# ---------------------------------------------------------------------------
# arrangement vertices
# ---------------------------------------------------------------------------

_VERTEX_CACHE = {}


def arrangement_vertices(datum: RootDatum):
    """All 0-dimensional intersections of walls, exact rational points."""
    key = datum.cartan_type
    if key in _VERTEX_CACHE:
        return _VERTEX_CACHE[key]
    walls = []
    for r in datum.positive_roots():
        walls.append((_root_functional(datum, r), Fraction(0)))
    for r in datum.roots:
        walls.append((_root_functional(datum, r), Fraction(2)))
    verts = set()
    for subset in combinations(range(len(walls)), datum.rank):
        rows = [list(walls[i][0]) + [walls[i][1]] for i in subset]
        sol = _solve_square(rows, datum.rank)
        if sol is not None:
            verts.add(sol)
    out = tuple(sorted(verts))
    _VERTEX_CACHE[key] = out
    return out


def _solve_square(rows, n):
    A = [list(map(Fraction, row)) for row in rows]
    for col in range(n):
        piv = next((i for i in range(col, n) if A[i][col]), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        f = A[col][col]
        A[col] = [v / f for v in A[col]]
        for i in range(n):
            if i != col and A[i][col]:
                g = A[i][col]
                A[i] = [a - g * b for a, b in zip(A[i], A[col])]
    return tuple(A[i][n] for i in range(n))


def arrangement_radius(datum: RootDatum) -> Fraction:
    """Max |alpha(v)| over arrangement vertices; bounded cells live within."""
    verts = arrangement_vertices(datum)
    best = Fraction(2)
    for v in verts:
        for r in datum.roots:
            best = max(best, abs(datum.root_value(r, v)))
    return best


def in_closure(datum: RootDatum, cell: Cell, point) -> bool:
    for r, s in zip(datum.roots, cell.signs):
        if classify_value(datum.root_value(r, point)) not in _CLOSURE_OK[s]:
            return False
    return True


def vertices(datum: RootDatum, cell: Cell):
    """All 0-dimensional faces of the closure of a bounded cell."""
    if not is_bounded(datum, cell):
        raise NotBounded(f"cell {cell.key()} is unbounded")
    return [v for v in arrangement_vertices(datum) if in_closure(datum, cell, v)]


def tau(datum: RootDatum, v) -> Fraction:
    """Sum over roots of rho_alpha * clamp(alpha(v), 0, 2)."""
    total = Fraction(0)
    for r, rho in zip(datum.roots, datum.rho):
        val = datum.root_value(r, v)
        total += rho * min(max(val, Fraction(0)), Fraction(2))
    return total


def act_on_cell(datum: RootDatum, weyl_elt, cell: Cell) -> Cell:
    """Image of a cell under a finite Weyl element (acting on V)."""
    out = [None] * len(cell.signs)
    for i, s in enumerate(cell.signs):
        out[weyl_elt.root_perm[i]] = s
    return Cell(tuple(out))


def wx_orbit(datum: RootDatum, cell: Cell, wx_lin) -> CellOrbit:
    """Canonical representative and orbit size under the W_x action."""
    orbit = {act_on_cell(datum, w, cell).signs for w in wx_lin} or {cell.signs}
    rep = Cell(min(orbit))
    return CellOrbit(rep, len(orbit))
