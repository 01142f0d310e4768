"""Rational points of Grassmannians: canonical subspaces and Pluecker coordinates.

A Subspace is stored as the reduced row echelon form of its spanning set, so
equal subspaces are equal objects coordinate by coordinate.  PlueckerVector
holds the projective embedding as a primitive integer tuple (first nonzero
entry positive); `unpluecker` inverts the embedding and rejects inputs that
are not decomposable by round-trip verification.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from .linalg import frac_det, frac_rref


class NotDecomposableError(ValueError):
    """The given Pluecker coordinates do not describe any subspace."""


class ZeroDimError(ValueError):
    """Pluecker coordinates were requested for the zero subspace."""


class Subspace:
    """A linear subspace of Q^n in canonical (RREF) form."""

    __slots__ = ("n", "rows", "pivots")

    def __init__(self, n: int, vectors: Iterable[Sequence[Fraction]]):
        vecs = [list(v) for v in vectors]
        for v in vecs:
            if len(v) != n:
                raise ValueError(f"vector of length {len(v)} in Q^{n}")
        rows, pivots = frac_rref(vecs)
        self.n = n
        self.rows = tuple(tuple(row) for row in rows)
        self.pivots = tuple(pivots)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.n, self.rows))

    def __repr__(self) -> str:
        return f"Subspace({self.n}, dim={self.dim})"

    def contains(self, vector: Sequence[Fraction]) -> bool:
        if len(vector) != self.n:
            return False
        residual = [Fraction(x) for x in vector]
        for row, c in zip(self.rows, self.pivots):
            if residual[c] != 0:
                f = residual[c]
                residual = [x - f * y for x, y in zip(residual, row)]
        return all(x == 0 for x in residual)

    def contains_subspace(self, other: "Subspace") -> bool:
        return self.n == other.n and all(self.contains(r) for r in other.rows)

    def basis(self) -> list[list[Fraction]]:
        return [list(r) for r in self.rows]

    def pluecker(self) -> "PlueckerVector":
        k = self.dim
        coords = [
            frac_det([[row[c] for c in cols] for row in self.rows])
            for cols in combinations(range(self.n), k)
        ]
        return PlueckerVector.from_fractions(self.n, k, coords)


class PlueckerVector:
    """Projective Pluecker coordinates of a k-plane in Q^n.

    ``coords`` lists the k-by-k minors over column subsets in lexicographic
    order, scaled to coprime integers with the first nonzero entry positive.
    """

    __slots__ = ("n", "k", "coords")

    def __init__(self, n: int, k: int, coords: Sequence[int]):
        expected = len(list(combinations(range(n), k)))
        if len(coords) != expected:
            raise ValueError(
                f"expected {expected} coordinates for Gr({k}, {n}), got {len(coords)}"
            )
        if not any(coords):
            raise ValueError("a Pluecker vector cannot be identically zero")
        g = 0
        for c in coords:
            g = gcd(g, abs(int(c)))
        first = next(c for c in coords if c)
        sign = 1 if first > 0 else -1
        self.n = n
        self.k = k
        self.coords = tuple(sign * int(c) // g for c in coords)

    @classmethod
    def from_fractions(
        cls, n: int, k: int, coords: Sequence[Fraction]
    ) -> "PlueckerVector":
        den = 1
        for c in coords:
            f = Fraction(c)
            den = den * f.denominator // gcd(den, f.denominator)
        return cls(n, k, [int(Fraction(c) * den) for c in coords])

    def column_sets(self) -> list[tuple[int, ...]]:
        return list(combinations(range(self.n), self.k))

    def first_nonzero(self) -> int:
        return next(i for i, c in enumerate(self.coords) if c)

    def affine_chart(self, index: int) -> tuple[Fraction, ...]:
        """Coordinates divided by coords[index]; requires that entry nonzero."""
        pivot = self.coords[index]
        if pivot == 0:
            raise ValueError(f"coordinate {index} vanishes, not an affine chart")
        return tuple(Fraction(c, pivot) for c in self.coords)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PlueckerVector):
            return NotImplemented
        return (self.n, self.k, self.coords) == (other.n, other.k, other.coords)

    def __hash__(self) -> int:
        return hash((self.n, self.k, self.coords))

    def __lt__(self, other: "PlueckerVector") -> bool:
        return (self.n, self.k, self.coords) < (other.n, other.k, other.coords)

    def __repr__(self) -> str:
        return f"PlueckerVector({self.n}, {self.k}, {list(self.coords)})"


def pluecker(v: Subspace) -> PlueckerVector:
    """Pluecker coordinates of a positive-dimensional subspace.

    The Subspace method itself is total (the zero subspace gets the single
    coordinate [1], which the fiber sampler relies on for full-rank anchors);
    this entry point enforces dim >= 1 for callers that need a genuine
    projective point.
    """
    if v.dim == 0:
        raise ZeroDimError("the zero subspace has no projective coordinates")
    return v.pluecker()


def unpluecker(pv: PlueckerVector) -> Subspace:
    """Invert the Pluecker embedding.

    Uses the affine chart at the lexicographically first nonvanishing
    coordinate: with I = (i_0 < ... < i_{k-1}) that column set, row a of the
    basis is e_{i_a} plus, at each column j outside I, the ratio
    (-1)^(a+q) p_J / p_I where J is (I minus i_a) with j inserted and q is the
    position of j inside J.  The result is round-trip verified; coordinates
    failing verification do not lie on the Grassmannian and raise
    NotDecomposableError.
    """
    n, k = pv.n, pv.k
    sets = pv.column_sets()
    index_of = {cols: i for i, cols in enumerate(sets)}
    first = pv.first_nonzero()
    icols = sets[first]
    p_i = pv.coords[first]
    rows = []
    for a in range(k):
        row = [Fraction(0)] * n
        row[icols[a]] = Fraction(1)
        rest = icols[:a] + icols[a + 1 :]
        for j in range(n):
            if j in icols:
                continue
            jset = tuple(sorted(rest + (j,)))
            q = jset.index(j)
            row[j] = Fraction((-1) ** (a + q) * pv.coords[index_of[jset]], p_i)
        rows.append(row)
    sub = Subspace(n, rows)
    if sub.dim != k or sub.pluecker() != pv:
        raise NotDecomposableError(
            f"coordinates {list(pv.coords)} fail the Grassmannian relations"
        )
    return sub


def span_of_integer_vectors(n: int, vectors: Iterable[Sequence[int]]) -> Subspace:
    return Subspace(n, [[Fraction(x) for x in v] for v in vectors])
