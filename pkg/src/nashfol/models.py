"""Constructors for the worked models the test corpus revolves around.

Each function builds an algebroid (or bivector) from scratch; the scenario
JSON files in nashfol/scenarios mirror these and a corpus test keeps the two
in sync.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement

from .algebroid import AlmostLieAlgebroid, AnchoredBundle, Section
from .poisson import Bivector, jacobian_bivector
from .poly import MultiPoly, grlex_key, parse_poly


def _polys(variables, rows):
    return [[parse_poly(e, variables) for e in row] for row in rows]


def special_linear_2_algebroid() -> AlmostLieAlgebroid:
    """Rank-3 algebroid on the plane: scaling flow plus the two shears.

    Frame order: the diagonal flow, then the upper and lower triangular
    generators; singular exactly at the origin.
    """
    vs = ("x", "y")
    bundle = AnchoredBundle(vs, _polys(vs, [["x", "0", "y"], ["-y", "x", "0"]]))
    c = {
        (0, 1): [parse_poly(e, vs) for e in ("0", "2", "0")],
        (0, 2): [parse_poly(e, vs) for e in ("0", "0", "-2")],
        (1, 2): [parse_poly(e, vs) for e in ("1", "0", "0")],
    }
    return AlmostLieAlgebroid(bundle, c)


def matrix_action_algebroid(d: int) -> AlmostLieAlgebroid:
    """Action algebroid of all d-by-d matrices acting on affine d-space.

    Basis section (k, j), listed with k outer, acts as the field x_k d/dx_j;
    brackets are the matrix-unit commutation relations.
    """
    vs = tuple(f"x{i + 1}" for i in range(d))
    zero = MultiPoly.zero(vs)
    one = MultiPoly.constant(vs, 1)
    n = d * d

    def idx(k: int, j: int) -> int:
        return k * d + j

    anchor = [[zero] * n for _ in range(d)]
    for k in range(d):
        for j in range(d):
            anchor[j][idx(k, j)] = MultiPoly.variable(vs, vs[k])
    structure: dict[tuple[int, int], Section] = {}
    pairs = [(k, j) for k in range(d) for j in range(d)]
    for p in range(n):
        for q in range(p + 1, n):
            (i, j), (k, l) = pairs[p], pairs[q]
            sec = [zero] * n
            if j == k:
                sec[idx(i, l)] = sec[idx(i, l)] + one
            if l == i:
                sec[idx(k, j)] = sec[idx(k, j)] - one
            structure[(p, q)] = sec
    return AlmostLieAlgebroid(AnchoredBundle(vs, anchor), structure)


def degree_monomials(variables, degree: int):
    """Exponent vectors of the given total degree, graded-lex descending."""
    d = len(variables)
    exps = set()
    for combo in combinations_with_replacement(range(d), degree):
        e = [0] * d
        for i in combo:
            e[i] += 1
        exps.add(tuple(e))
    return sorted(exps, key=grlex_key, reverse=True)


def vanishing_order_bundle(order: int, d: int) -> AnchoredBundle:
    """Bundle of the foliation of all fields vanishing to the given order.

    Frame sections are monomial multiples of the coordinate fields: slot
    j * (#monomials) + m carries the m-th degree-`order` monomial times
    d/dx_j, monomials in graded-lex descending order.
    """
    vs = tuple("xyzw"[i] if d <= 4 else f"x{i + 1}" for i in range(d))
    monos = degree_monomials(vs, order)
    zero = MultiPoly.zero(vs)
    n = d * len(monos)
    anchor = [[zero] * n for _ in range(d)]
    for j in range(d):
        for m, e in enumerate(monos):
            anchor[j][j * len(monos) + m] = MultiPoly(vs, {e: 1})
    return AnchoredBundle(vs, anchor)


def vanishing_order_algebroid(order: int, d: int) -> AlmostLieAlgebroid:
    """The bundle above with the candidate monomial bracket.

    The bracket sends a frame pair to the monomial transvections with the
    convention that a non-divisible monomial quotient contributes nothing.
    For order 1 this is the matrix-action bracket and the anchor-morphism
    axiom holds; for order >= 2 validation reports nonzero defects, so
    consumers should fall back to anchor-only computations.
    """
    bundle = vanishing_order_bundle(order, d)
    vs = bundle.base_vars
    monos = degree_monomials(vs, order)
    nm = len(monos)
    mono_index = {e: m for m, e in enumerate(monos)}
    zero = MultiPoly.zero(vs)
    n = bundle.fiber_rank

    def decompose(slot: int):
        return slot // nm, monos[slot % nm]

    def shrink(exps, j):
        if exps[j] == 0:
            return None
        out = list(exps)
        out[j] -= 1
        return tuple(out)

    structure: dict[tuple[int, int], Section] = {}
    for p in range(n):
        for q in range(p + 1, n):
            j, i_exps = decompose(p)
            l, j_exps = decompose(q)
            sec = [zero] * n
            down = shrink(j_exps, j)
            if down is not None:
                target = l * nm + mono_index[i_exps]
                sec[target] = sec[target] + MultiPoly(vs, {down: 1})
            down = shrink(i_exps, l)
            if down is not None:
                target = j * nm + mono_index[j_exps]
                sec[target] = sec[target] - MultiPoly(vs, {down: 1})
            structure[(p, q)] = sec
    return AlmostLieAlgebroid(bundle, structure)


def rotation_action_algebroid() -> AlmostLieAlgebroid:
    """Action algebroid of the rotation algebra on 3-space (cyclic frame)."""
    vs = ("x", "y", "z")
    bundle = AnchoredBundle(
        vs, _polys(vs, [["0", "-z", "y"], ["z", "0", "-x"], ["-y", "x", "0"]])
    )
    c = {
        (0, 1): [parse_poly(e, vs) for e in ("0", "0", "1")],
        (0, 2): [parse_poly(e, vs) for e in ("0", "-1", "0")],
        (1, 2): [parse_poly(e, vs) for e in ("1", "0", "0")],
    }
    return AlmostLieAlgebroid(bundle, c)


def sphere_generators_algebroid() -> AlmostLieAlgebroid:
    """The concentric-spheres foliation by its three tangential generators.

    Columns are the fields z d/dy - y d/dz, z d/dx - x d/dz, y d/dx - x d/dy;
    structure sections are their actual commutators.
    """
    vs = ("x", "y", "z")
    bundle = AnchoredBundle(
        vs, _polys(vs, [["0", "z", "y"], ["z", "0", "-x"], ["-y", "-x", "0"]])
    )
    c = {
        (0, 1): [parse_poly(e, vs) for e in ("0", "0", "-1")],
        (0, 2): [parse_poly(e, vs) for e in ("0", "1", "0")],
        (1, 2): [parse_poly(e, vs) for e in ("-1", "0", "0")],
    }
    return AlmostLieAlgebroid(bundle, c)


def linear_poisson_so3() -> Bivector:
    """The linear bivector whose symplectic leaves are concentric spheres."""
    vs = ("x", "y", "z")
    return Bivector.from_upper_entries(
        vs,
        {
            (0, 1): parse_poly("-z", vs),
            (0, 2): parse_poly("y", vs),
            (1, 2): parse_poly("-x", vs),
        },
    )


def surface_function(n: int) -> MultiPoly:
    """xy - z^(n+1)/(n+1), the family of isolated surface singularities."""
    vs = ("x", "y", "z")
    return parse_poly("x*y", vs) - parse_poly("z", vs) ** (n + 1) * Fraction(1, n + 1)


def surface_bivector(n: int) -> Bivector:
    """Exact bivector of the surface singularity family."""
    return jacobian_bivector(surface_function(n))
