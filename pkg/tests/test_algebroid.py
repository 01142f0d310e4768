import random
from fractions import Fraction

import pytest

from nashfol.algebroid import (
    AlmostLieAlgebroid,
    AnchoredBundle,
    NotInKernelError,
    NotInKernelModuleError,
    WellDefinednessFailureError,
    anchor_rank_generic,
    generic_kernel_sections,
    is_lie_algebroid,
    isotropy_algebra_at,
    jacobiator,
    kernel_at,
    linear_lift,
    morphism_defect_pairs,
    pointwise_kernel_bracket,
    rank_at,
    section_bracket,
    singular_locus,
    strong_kernel_at,
    validate_anchor_morphism,
    vf_bracket,
)
from nashfol.grassmann import Subspace
from nashfol.models import (
    matrix_action_algebroid,
    special_linear_2_algebroid,
    sphere_generators_algebroid,
)
from nashfol.poly import MultiPoly, parse_poly

XYZ = ("x", "y", "z")


def V(variables, *comps):
    return [parse_poly(c, variables) for c in comps]


def test_vf_bracket_basics():
    assert vf_bracket(V(("x",), "1"), V(("x",), "x")) == V(("x",), "1")
    x_field = V(XYZ, "0", "z", "-y")
    y_field = V(XYZ, "z", "0", "-x")
    assert vf_bracket(x_field, y_field) == V(XYZ, "-y", "x", "0")
    assert all(p.is_zero() for p in vf_bracket(x_field, x_field))


def test_section_bracket_on_basis_gives_structure():
    alg = special_linear_2_algebroid()
    e = alg.bundle.basis_section
    assert section_bracket(alg, e(0), e(1)) == alg.structure_section(0, 1)
    # [h, e] = 2e in the frame order (h, e, f)
    assert section_bracket(alg, e(0), e(1)) == V(("x", "y"), "0", "2", "0")


def test_section_bracket_leibniz_random():
    alg = special_linear_2_algebroid()
    rng = random.Random(404)
    vs = alg.bundle.base_vars

    def rand_poly():
        terms = {}
        for _ in range(rng.randrange(1, 4)):
            e = (rng.randrange(0, 3), rng.randrange(0, 3))
            terms[e] = Fraction(rng.randrange(-3, 4))
        return MultiPoly(vs, terms)

    for _ in range(10):
        a = [rand_poly() for _ in range(3)]
        b = [rand_poly() for _ in range(3)]
        f = rand_poly()
        lhs = section_bracket(alg, a, [f * bk for bk in b])
        rho_a = alg.bundle.anchor_of_section(a)
        from nashfol.algebroid import lie_derivative

        deriv = lie_derivative(rho_a, f)
        rhs = [f * c + deriv * bk for c, bk in zip(section_bracket(alg, a, b), b)]
        assert lhs == rhs


def test_anchor_morphism_for_golden_models():
    for alg in (
        special_linear_2_algebroid(),
        matrix_action_algebroid(2),
        sphere_generators_algebroid(),
    ):
        assert morphism_defect_pairs(alg) == []


def test_anchor_morphism_detects_corruption():
    alg = special_linear_2_algebroid()
    bad = dict(alg.structure)
    bad[(0, 1)] = V(("x", "y"), "0", "3", "0")  # should be (0, 2, 0)
    corrupted = AlmostLieAlgebroid(alg.bundle, bad)
    assert morphism_defect_pairs(corrupted) == [(0, 1)]
    defects = validate_anchor_morphism(corrupted)
    assert any(not p.is_zero() for p in defects[0])


def test_morphism_transfers_to_random_sections():
    alg = matrix_action_algebroid(2)
    rng = random.Random(7)
    vs = alg.bundle.base_vars

    def rand_poly():
        terms = {
            (rng.randrange(0, 2), rng.randrange(0, 2)): Fraction(rng.randrange(-2, 3))
            for _ in range(2)
        }
        return MultiPoly(vs, terms)

    for _ in range(5):
        a = [rand_poly() for _ in range(4)]
        b = [rand_poly() for _ in range(4)]
        lhs = alg.bundle.anchor_of_section(section_bracket(alg, a, b))
        rhs = vf_bracket(alg.bundle.anchor_of_section(a), alg.bundle.anchor_of_section(b))
        assert lhs == rhs


def test_jacobiator_vanishes_for_lie_models():
    gl2 = matrix_action_algebroid(2)
    for i, j, k in ((0, 1, 2), (0, 2, 3), (1, 2, 3)):
        assert all(p.is_zero() for p in jacobiator(gl2, i, j, k))
    assert is_lie_algebroid(gl2)
    assert is_lie_algebroid(special_linear_2_algebroid())


def test_jacobiator_detects_broken_jacobi():
    vs = ("x", "y")
    zero = MultiPoly.zero(vs)
    one = MultiPoly.constant(vs, 1)
    bundle = AnchoredBundle(vs, [[zero] * 3 for _ in range(2)])
    # zero anchor passes the morphism axiom trivially; brackets chosen to
    # break Jacobi: [e0,e1]=e2, [e0,e2]=e0, [e1,e2]=0
    alg = AlmostLieAlgebroid(
        bundle,
        {
            (0, 1): [zero, zero, one],
            (0, 2): [one, zero, zero],
        },
    )
    assert morphism_defect_pairs(alg) == []
    assert any(not p.is_zero() for p in jacobiator(alg, 0, 1, 2))
    assert not is_lie_algebroid(alg)


def test_generic_rank_and_singular_locus():
    sl2 = special_linear_2_algebroid()
    assert anchor_rank_generic(sl2) == 2
    locus = singular_locus(sl2)
    vs = ("x", "y")
    assert locus == [parse_poly(t, vs) for t in ("x^2", "y^2", "-x*y")]

    gl2 = matrix_action_algebroid(2)
    assert anchor_rank_generic(gl2) == 2
    nonzero = sorted(str(p) for p in singular_locus(gl2) if not p.is_zero())
    assert nonzero == ["-x1*x2", "x1*x2", "x1^2", "x2^2"]


def test_kernel_at_points():
    gl2 = matrix_action_algebroid(2)
    ker = kernel_at(gl2, [Fraction(1), Fraction(0)])
    assert ker == Subspace(4, [[0, 0, 1, 0], [0, 0, 0, 1]])
    assert rank_at(gl2, [Fraction(1), Fraction(0)]) == 2
    assert kernel_at(gl2, [Fraction(0), Fraction(0)]).dim == 4
    # semicontinuity: kernel dim is n - r exactly off the singular locus
    locus = singular_locus(gl2)
    for pt in ([1, 2], [3, 0], [0, 0], [0, 5]):
        point = [Fraction(c) for c in pt]
        on_locus = all(p.eval(point) == 0 for p in locus)
        assert (kernel_at(gl2, point).dim == 2) == (not on_locus)
        assert kernel_at(gl2, point).dim >= 2


def test_generic_kernel_sections():
    gl2 = matrix_action_algebroid(2)
    gens = generic_kernel_sections(gl2)
    vs = ("x1", "x2")
    assert gens == [
        V(vs, "-x2", "0", "x1", "0"),
        V(vs, "0", "-x2", "0", "x1"),
    ]
    rot = sphere_generators_algebroid()
    assert generic_kernel_sections(rot) == [V(XYZ, "x", "-y", "z")]


def test_strong_kernel_validation_and_span():
    gl2 = matrix_action_algebroid(2)
    gens = generic_kernel_sections(gl2)
    origin = [Fraction(0), Fraction(0)]
    assert strong_kernel_at(gl2, gens, origin).dim == 0
    at_reg = strong_kernel_at(gl2, gens, [Fraction(1), Fraction(0)])
    assert at_reg == kernel_at(gl2, [Fraction(1), Fraction(0)])
    bad = [V(("x1", "x2"), "1", "0", "0", "0")]
    with pytest.raises(NotInKernelModuleError) as exc:
        strong_kernel_at(gl2, bad, origin)
    assert exc.value.index == 0


def test_pointwise_kernel_bracket_gl2():
    gl2 = matrix_action_algebroid(2)
    origin = [Fraction(0), Fraction(0)]
    e12 = [Fraction(0), Fraction(1), Fraction(0), Fraction(0)]
    e21 = [Fraction(0), Fraction(0), Fraction(1), Fraction(0)]
    got = pointwise_kernel_bracket(gl2, origin, e12, e21)
    assert got == [Fraction(1), Fraction(0), Fraction(0), Fraction(-1)]
    assert pointwise_kernel_bracket(gl2, origin, e12, e12) == [Fraction(0)] * 4
    with pytest.raises(NotInKernelError):
        pointwise_kernel_bracket(gl2, [Fraction(1), Fraction(0)], e12, e21)


def test_isotropy_at_origin_is_full_matrix_algebra():
    gl2 = matrix_action_algebroid(2)
    origin = [Fraction(0), Fraction(0)]
    iso = isotropy_algebra_at(gl2, [], origin)
    assert iso.dim == 4
    # representatives are the standard basis; constants are the commutators
    assert iso.structure[(1, 2)] == (Fraction(1), Fraction(0), Fraction(0), Fraction(-1))
    assert iso.structure[(0, 1)] == (Fraction(0), Fraction(1), Fraction(0), Fraction(0))


def test_isotropy_trivial_at_regular_points():
    gl2 = matrix_action_algebroid(2)
    gens = generic_kernel_sections(gl2)
    iso = isotropy_algebra_at(gl2, gens, [Fraction(1), Fraction(0)])
    assert iso.dim == 0
    assert iso.structure == {}


def test_isotropy_well_definedness_guard():
    # scaling-by-x algebroid on the line: anchor (x, x), kernel section
    # (1, -1); feeding a wrong-but-valid generator set stays fine, while a
    # bracket pushing Sker outside itself must be flagged
    vs = ("x",)
    x = parse_poly("x", vs)
    zero = MultiPoly.zero(vs)
    one = MultiPoly.constant(vs, 1)
    bundle = AnchoredBundle(vs, [[x, x, zero]])
    # c_01 = e_2, c_02 = c_12 = 0; anchor of e_2 is 0, and
    # [rho(e0), rho(e1)] = [x d/dx, x d/dx] = 0 so the morphism axiom holds
    alg = AlmostLieAlgebroid(bundle, {(0, 1): [zero, zero, one]})
    assert morphism_defect_pairs(alg) == []
    gens = [[one, -one, zero]]
    with pytest.raises(WellDefinednessFailureError):
        isotropy_algebra_at(alg, gens, [Fraction(0)], check_jacobi=False)


def test_linear_lift_of_constant_sections():
    gl2 = matrix_action_algebroid(2)
    e = gl2.bundle.basis_section
    x_field, b = linear_lift(gl2, e(0))
    assert x_field == gl2.bundle.anchor_of_section(e(0))
    # B is the negative adjoint: entry (k, j) = -coeff_k([e_0, e_j])
    for j in range(4):
        col = section_bracket(gl2, e(0), e(j))
        for k in range(4):
            assert b[k][j] == -col[k]


def test_linear_lift_bracket_contract():
    # for Lie algebroids the lift is bracket-compatible; with the negative
    # orientation of B the matrix part composes contravariantly:
    # B_[a,b] = B_b B_a - B_a B_b + X_a[B_b] - X_b[B_a]
    from nashfol.algebroid import lie_derivative
    from nashfol.linalg import poly_mat_mul

    for alg in (special_linear_2_algebroid(), matrix_action_algebroid(2)):
        n = alg.bundle.fiber_rank
        rng = random.Random(99 + n)
        vs = alg.bundle.base_vars

        def rand_poly():
            terms = {
                tuple(rng.randrange(0, 2) for _ in vs): Fraction(rng.randrange(-2, 3))
                for _ in range(2)
            }
            return MultiPoly(vs, terms)

        for _ in range(3):
            a = [rand_poly() for _ in range(n)]
            b = [rand_poly() for _ in range(n)]
            xa, ba = linear_lift(alg, a)
            xb, bb = linear_lift(alg, b)
            xab, bab = linear_lift(alg, section_bracket(alg, a, b))
            assert xab == vf_bracket(xa, xb)
            commutator = poly_mat_mul(bb, ba)
            neg = poly_mat_mul(ba, bb)
            expected = [
                [
                    commutator[k][j]
                    - neg[k][j]
                    + lie_derivative(xa, bb[k][j])
                    - lie_derivative(xb, ba[k][j])
                    for j in range(n)
                ]
                for k in range(n)
            ]
            assert bab == expected


def test_zero_anchor_rank():
    vs = ("x",)
    zero = MultiPoly.zero(vs)
    bundle = AnchoredBundle(vs, [[zero, zero]])
    assert anchor_rank_generic(bundle) == 0
    assert singular_locus(bundle) == []
