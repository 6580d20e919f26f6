"""Split root data for the simple types A-G: roots, coroots, pairing, and the
finite Weyl group.

Coordinates: vectors in V = X_*(S) (x) R are written in the simple-coroot
basis (Fraction tuples); roots are written in the simple-root basis (integer
tuples).  The pairing is mediated by the Cartan matrix
cartan[i][j] = <alpha_i, alpha_j^vee>.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial


class InvalidType(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class TooLarge(ValueError):
    pass


# Cartan matrices, Bourbaki numbering; entry [i][j] = <alpha_i, alpha_j^vee>.
def _cartan_matrix(letter: str, rank: int):
    def base(n):
        M = [[0] * n for _ in range(n)]
        for i in range(n):
            M[i][i] = 2
            if i + 1 < n:
                M[i][i + 1] = -1
                M[i + 1][i] = -1
        return M

    if letter == "A" and rank >= 1:
        return base(rank)
    if letter == "B" and rank >= 2:
        M = base(rank)
        M[rank - 2][rank - 1] = -2
        return M
    if letter == "C" and rank >= 2:
        M = base(rank)
        M[rank - 1][rank - 2] = -2
        return M
    if letter == "D" and rank >= 3:
        M = base(rank)
        M[rank - 2][rank - 1] = 0
        M[rank - 1][rank - 2] = 0
        M[rank - 3][rank - 1] = -1
        M[rank - 1][rank - 3] = -1
        return M
    if letter == "E" and rank in (6, 7, 8):
        # Bourbaki: node 2 attaches to node 4
        M = [[0] * rank for _ in range(rank)]
        for i in range(rank):
            M[i][i] = 2
        chain = [0, 2, 3, 4, 5, 6, 7][: rank - 1]
        for a, b in zip(chain, chain[1:]):
            M[a][b] = M[b][a] = -1
        M[1][3] = M[3][1] = -1
        return M
    if letter == "F" and rank == 4:
        M = base(4)
        M[1][2] = -2
        M[2][1] = -1
        return M
    if letter == "G" and rank == 2:
        return [[2, -1], [-3, 2]]
    raise InvalidType(f"no simple type {letter}{rank}")


_WEYL_ORDER = {
    "A": lambda n: factorial(n + 1),
    "B": lambda n: 2 ** n * factorial(n),
    "C": lambda n: 2 ** n * factorial(n),
    "D": lambda n: 2 ** (n - 1) * factorial(n),
    "E": lambda n: {6: 51840, 7: 2903040, 8: 696729600}[n],
    "F": lambda n: 1152,
    "G": lambda n: 12,
}


@dataclass(frozen=True)
class WeylElt:
    """Finite Weyl element: matrix on V (coroot coordinates, rows) plus the
    induced permutation of the root list."""

    matrix: tuple          # tuple of row-tuples of ints
    root_perm: tuple       # root_perm[i] = index of the image of roots[i]

    def apply(self, v):
        return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in self.matrix)


@dataclass(frozen=True)
class RootDatum:
    cartan_type: str
    rank: int
    cartan: tuple              # cartan[i][j] = <alpha_i, alpha_j^vee>
    roots: tuple               # all roots, integer tuples in simple-root basis
    coroots: tuple             # coroots[i] = coroot of roots[i], coroot basis
    simple_indices: tuple      # indices of the simple roots inside ``roots``
    root_index: dict
    rho: tuple                 # root-space multiplicities, all 1 in the split case

    def root_value(self, root, v) -> Fraction:
        """Evaluate a root (simple-root coordinates) on v (coroot coordinates)."""
        if len(v) != self.rank:
            raise DimensionMismatch(f"vector of length {len(v)}, rank {self.rank}")
        total = Fraction(0)
        for i, m in enumerate(root):
            if m:
                total += m * sum(self.cartan[i][j] * Fraction(v[j]) for j in range(self.rank))
        return total

    def positive_roots(self):
        return [r for r in self.roots if sum(r) > 0]

    def reflect_root(self, root, j):
        """Image of a root under the simple reflection s_j."""
        pair = sum(root[i] * self.cartan[i][j] for i in range(self.rank))
        out = list(root)
        out[j] -= pair
        return tuple(out)


def build_root_datum(letter: str, rank: int) -> RootDatum:
    """Split, semisimple, simply connected root datum of the given type."""
    letter = letter.upper()
    M = _cartan_matrix(letter, rank)
    n = rank
    simple = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    simple_co = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]

    def reflect_root(root, j):
        pair = sum(root[i] * M[i][j] for i in range(n))
        out = list(root)
        out[j] -= pair
        return tuple(out)

    def reflect_coroot(cro, j):
        # s_j on the coroot lattice: c -> c - alpha_j(c) * alpha_j^vee
        val = sum(M[j][k] * cro[k] for k in range(n))
        out = list(cro)
        out[j] -= val
        return tuple(out)

    seen = {}
    frontier = list(zip(simple, simple_co))
    for r, c in frontier:
        seen[r] = c
    while frontier:
        new = []
        for r, c in frontier:
            for j in range(n):
                r2, c2 = reflect_root(r, j), reflect_coroot(c, j)
                if r2 not in seen:
                    seen[r2] = c2
                    new.append((r2, c2))
        frontier = new
    roots = tuple(sorted(seen))
    coroots = tuple(seen[r] for r in roots)
    datum = RootDatum(
        cartan_type=f"{letter}{rank}",
        rank=rank,
        cartan=tuple(tuple(row) for row in M),
        roots=roots,
        coroots=coroots,
        simple_indices=tuple(roots.index(s) for s in simple),
        root_index={r: i for i, r in enumerate(roots)},
        rho=tuple(1 for _ in roots),
    )
    return datum


def pairing(datum: RootDatum, root, v) -> Fraction:
    return datum.root_value(root, v)


def weyl_elements(datum: RootDatum):
    """The full finite Weyl group by closure of the simple reflections."""
    if datum.rank > 6:
        raise TooLarge("Weyl enumeration capped at rank 6")
    n = datum.rank
    roots = datum.roots
    idx = datum.root_index

    gens = []
    for j in range(n):
        mat = tuple(
            tuple((1 if i == k else 0) - (datum.cartan[j][k] if i == j else 0)
                  for k in range(n))
            for i in range(n)
        )
        perm = tuple(idx[datum.reflect_root(r, j)] for r in roots)
        gens.append(WeylElt(mat, perm))

    ident = WeylElt(tuple(tuple(int(i == k) for k in range(n)) for i in range(n)),
                    tuple(range(len(roots))))
    seen = {ident.matrix: ident}
    frontier = [ident]
    while frontier:
        new = []
        for w in frontier:
            for g in gens:
                mat = tuple(
                    tuple(sum(g.matrix[i][l] * w.matrix[l][k] for l in range(n))
                          for k in range(n))
                    for i in range(n)
                )
                if mat not in seen:
                    perm = tuple(g.root_perm[w.root_perm[i]] for i in range(len(roots)))
                    elt = WeylElt(mat, perm)
                    seen[mat] = elt
                    new.append(elt)
        frontier = new
    out = sorted(seen.values(), key=lambda w: w.matrix)
    expected = _WEYL_ORDER[datum.cartan_type[0]](datum.rank)
    assert len(out) == expected, (datum.cartan_type, len(out), expected)
    return out
