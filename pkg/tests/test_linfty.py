import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torfol.linfty import (
    DeformationPath,
    NotACocycle,
    OutsideGaugeDomain,
    RegularPoissonStructure,
    anchor_rho,
    audit_exponential,
    audit_jacobi,
    bracket_gamma_vector_fields,
    certified_rank,
    dirac_exponential,
    gauge_transform_bivector,
    gauge_transform_poisson,
    jacobi_defect,
    kuranishi_cochain,
    l1,
    l2,
    l3,
    mc_residual,
    multibracket,
    poisson_gauge_velocity,
    random_good_multivector,
    random_multivector,
    verify_path,
    wedge_power,
)
from torfol.multivector import DifferentialForm, Multivector, lie_derivative, schouten
from torfol.splitting import Splitting
from torfol.trig import TorusFunction, TrigPoly


def mv(dim, idx, f=1):
    return Multivector.monomial(dim, idx, f)


def form(dim, idx, f=1):
    return DifferentialForm.monomial(dim, idx, f)


def sin(dim, k):
    return TrigPoly.sin(dim, k)


def cos(dim, k):
    return TrigPoly.cos(dim, k)


def tf(p):
    return TorusFunction.of(p)


def fn(f, dim=4):
    return Multivector.function(f, dim)


TILTED = RegularPoissonStructure.build(
    mv(4, (1, 2)), Splitting(4, (1, 2), {(3, 2): sin(4, 4)})
)
SCALED = RegularPoissonStructure.build(
    mv(4, (1, 2), sin(4, 4) + TrigPoly.constant(4, 2)), Splitting(4, (1, 2), {})
)
CORANK = RegularPoissonStructure.build(
    mv(3, (1, 2)), Splitting(3, (1, 2), {(3, 2): sin(3, 3)})
)
Y3 = TILTED.splitting.frame_vector(3)
Y4 = TILTED.splitting.frame_vector(4)


# -- structure construction ---------------------------------------------------------


def test_build_records_symplectic_gamma_and_curvature():
    assert TILTED.gamma == form(4, (1, 2)) + form(4, (1, 3), -sin(4, 4))
    assert TILTED.courant == form(4, (1, 3, 4), -cos(4, 4))
    assert TILTED.symp == form(4, (1, 2))
    assert TILTED.dim == 4
    assert TILTED.half_rank == 1
    assert TILTED.checks.self_commute
    assert TILTED.checks.leaf_block_nondegenerate


def test_build_rejects_bad_inputs():
    with pytest.raises(ValueError):
        RegularPoissonStructure.build(
            mv(4, (1, 2), sin(4, 3)) + mv(4, (3, 4)), Splitting(4, (1, 2, 3, 4), {})
        )
    with pytest.raises(ValueError):
        RegularPoissonStructure.build(mv(4, (1, 3)), Splitting(4, (1, 2), {}))
    with pytest.raises(ValueError):
        RegularPoissonStructure.build(mv(4, (1, 2, 3)), Splitting(4, (1, 2), {}))
    with pytest.raises(ValueError):
        RegularPoissonStructure.build(mv(3, (1, 2)), Splitting(4, (1, 2), {}))


def test_flat_frames_carry_no_curvature():
    assert SCALED.courant.is_zero()
    assert CORANK.courant.is_zero()
    involutive = RegularPoissonStructure.build(
        mv(4, (1, 2)), Splitting(4, (1, 2), {(3, 2): TrigPoly.constant(4, 1)})
    )
    assert involutive.courant.is_zero()


# -- unary bracket ------------------------------------------------------------------


def test_unary_on_functions_is_hamiltonian():
    for p in (sin(4, 2), cos(4, 1)):
        f = tf(p)
        got = l1(TILTED, fn(f))
        assert got == -TILTED.pi.sharp(DifferentialForm.function(f, 4).d())
    assert l1(TILTED, fn(tf(sin(4, 2)))) == mv(4, (1,), cos(4, 2))


def test_unary_matches_cotangent_algebroid_differential():
    pi = TILTED.pi

    def koszul(al, be):
        return lie_derivative(pi.sharp(al), be) - al.d().interior(pi.sharp(be))

    covs = [form(4, (1,)), form(4, (2,), sin(4, 4)), form(4, (3,), cos(4, 2)), form(4, (4,))]
    for v in (mv(4, (2,)), mv(4, (3,), sin(4, 1)), Y3):
        dv = l1(TILTED, v)
        for al in covs:
            for be in covs:
                want = (
                    pi.sharp(al).apply_function(v.evaluate([be]))
                    - pi.sharp(be).apply_function(v.evaluate([al]))
                    - v.evaluate([koszul(al, be)])
                )
                assert dv.evaluate([al, be]) == want


def test_unary_respects_the_leaf_grading():
    s = TILTED.splitting
    assert s.is_leafwise(l1(TILTED, fn(tf(cos(4, 4)))))
    assert s.is_leafwise(l1(TILTED, mv(4, (2,), sin(4, 1))))
    parts = s.bigrade(l1(TILTED, Y3 * tf(sin(4, 2))))
    assert all(q <= 1 for (_, q), c in parts.items() if not c.is_zero())


# -- binary bracket -----------------------------------------------------------------


def test_frame_fields_bracket_through_the_tilt():
    assert bracket_gamma_vector_fields(TILTED, Y3, Y4) == mv(4, (2,), -cos(4, 4))
    assert l2(TILTED, Y3, Y4) == mv(4, (2,), cos(4, 4))
    assert l2(TILTED, Y4, Y3) == mv(4, (2,), -cos(4, 4))


def test_binary_vanishes_on_leaf_generators():
    leaf = [mv(4, (1,)), mv(4, (2,), sin(4, 1))]
    for x in leaf:
        assert l2(TILTED, fn(tf(sin(4, 2))), x).is_zero()
        for y in leaf:
            assert l2(TILTED, x, y).is_zero()
        assert TILTED.splitting.is_leafwise(l2(TILTED, x, Y3))


def test_scaled_plane_has_an_obstructed_direction():
    xi = mv(4, (1, 3)) + mv(4, (2, 4))
    assert l1(SCALED, xi).is_zero()
    h = tf(sin(4, 4) + TrigPoly.constant(4, 2))
    want = mv(4, (1, 2, 3), (tf(cos(4, 4)) * 2) / h)
    assert l2(SCALED, xi, xi) == want
    assert kuranishi_cochain(SCALED, xi) == want


def test_corank_one_obstruction_value():
    z = mv(3, (1, 3)) + mv(3, (2, 3), sin(3, 3))
    assert l1(CORANK, z).is_zero()
    assert kuranishi_cochain(CORANK, z) == mv(3, (1, 2, 3), tf(cos(3, 3)) * 2)


def test_obstruction_requires_a_cocycle():
    with pytest.raises(NotACocycle):
        kuranishi_cochain(SCALED, mv(4, (3, 4)))


# -- ternary bracket ----------------------------------------------------------------


def test_ternary_pairs_into_the_curvature():
    d1 = mv(4, (1,))
    want = tf(cos(4, 4)) * Fraction(-1)
    assert TILTED.courant.evaluate([Y3, Y4, d1]) == want
    assert l3(TILTED, Y3, Y4, d1) == fn(want)
    assert TILTED.courant.evaluate([d1, mv(4, (2,)), Y3]).is_zero()


def test_ternary_mixed_degree_instance():
    a = mv(4, (1,), sin(4, 2))
    b = mv(4, (3,))
    c = mv(4, (2, 4))
    assert l3(TILTED, a, b, c) == mv(4, (2,), tf(sin(4, 2)) * tf(cos(4, 4)))


def test_ternary_vanishing_patterns():
    leaf = [mv(4, (1,)), mv(4, (2,), sin(4, 1))]
    frames = [Y3, Y4]
    for a in leaf:
        for b in leaf:
            for c in leaf + frames:
                assert l3(TILTED, a, b, c).is_zero()
    for a in frames:
        for b in frames:
            for c in frames:
                assert l3(TILTED, a, b, c).is_zero()
    mixed = [l3(TILTED, x, ya, yb) for x in leaf for ya in frames for yb in frames]
    assert all(v.degree == 0 for v in mixed)
    assert any(not v.is_zero() for v in mixed)


def test_ternary_dies_without_curvature():
    args = [mv(4, (1,)), mv(4, (3,)), mv(4, (2, 4)), mv(4, (1, 3), sin(4, 2))]
    for a in args:
        for b in args:
            for c in args:
                assert l3(SCALED, a, b, c).is_zero()


def test_ternary_leibniz_in_the_last_slot():
    pool = [
        fn(tf(sin(4, 2))),
        mv(4, (1,), cos(4, 4)),
        mv(4, (3,)),
        mv(4, (2, 4)),
        mv(4, (1, 3), sin(4, 2)),
    ]
    for a in pool[1:4]:
        for b in pool[1:4]:
            for c in pool:
                for w in pool[1:4]:
                    lhs = l3(TILTED, a, b, c.wedge(w))
                    flip = (c.degree % 2) and ((1 + a.degree + b.degree) % 2)
                    tail = c.wedge(l3(TILTED, a, b, w))
                    rhs = l3(TILTED, a, b, c).wedge(w) + (-tail if flip else tail)
                    assert lhs == rhs


# -- graded symmetry ----------------------------------------------------------------

_ATOMS = [
    lambda: fn(tf(sin(4, 2))),
    lambda: mv(4, (1,), cos(4, 4)),
    lambda: mv(4, (3,)),
    lambda: mv(4, (2, 4)),
    lambda: mv(4, (1, 3), sin(4, 2)),
    lambda: mv(4, (1, 2, 4)),
]


@given(st.sampled_from(_ATOMS), st.sampled_from(_ATOMS))
@settings(max_examples=36, deadline=None)
def test_binary_graded_symmetry(pa, qa):
    p, q = pa(), qa()
    sign = -1 if (p.degree % 2) and (q.degree % 2) else 1
    assert l2(TILTED, p, q) == l2(TILTED, q, p) * sign


@given(st.sampled_from(_ATOMS), st.sampled_from(_ATOMS), st.sampled_from(_ATOMS))
@settings(max_examples=36, deadline=None)
def test_ternary_graded_symmetry(pa, qa, ra):
    p, q, r = pa(), qa(), ra()
    sign_last = -1 if (q.degree % 2) and (r.degree % 2) else 1
    assert l3(TILTED, p, q, r) == l3(TILTED, p, r, q) * sign_last
    sign_first = -1 if (p.degree % 2) and (q.degree % 2) else 1
    assert l3(TILTED, p, q, r) == l3(TILTED, q, p, r) * sign_first


def test_binary_leibniz_in_the_last_slot():
    pool = [p() for p in _ATOMS[:5]]
    for p in pool:
        for q in pool:
            for w in pool[1:4]:
                lhs = l2(TILTED, p, q.wedge(w))
                flip = (q.degree % 2) and ((1 + p.degree) % 2)
                tail = q.wedge(l2(TILTED, p, w))
                rhs = l2(TILTED, p, q).wedge(w) + (-tail if flip else tail)
                assert lhs == rhs


# -- homotopy relations -------------------------------------------------------------


def test_nested_brackets_cancel_on_a_curved_instance():
    a = mv(4, (1,), sin(4, 2))
    b = mv(4, (3,))
    c = mv(4, (2, 4))
    assert not l3(TILTED, a, b, c).is_zero()
    assert jacobi_defect(TILTED, [a, b, c], 3).is_zero()
    assert jacobi_defect(TILTED, [a, b], 2).is_zero()
    assert jacobi_defect(TILTED, [a, b, c, Y3], 4).is_zero()


def test_relation_audit_statistics_are_stable():
    assert audit_jacobi(TILTED, seed=11, rounds=32) == {
        "rounds": 32,
        "arity_1": 8,
        "arity_2": 8,
        "arity_3": 8,
        "arity_4": 8,
        "ternary_nonzero": 3,
    }
    assert audit_jacobi(SCALED, seed=11, rounds=16) == {
        "rounds": 16,
        "arity_1": 4,
        "arity_2": 4,
        "arity_3": 4,
        "arity_4": 4,
        "ternary_nonzero": 0,
    }


def test_multibracket_dispatch_and_truncation():
    args = [mv(4, (1,)), mv(4, (3,)), mv(4, (2, 4)), mv(4, (1, 2))]
    assert multibracket(TILTED, 2, args[:2]) == l2(TILTED, args[0], args[1])
    assert multibracket(TILTED, 4, args).is_zero()
    with pytest.raises(ValueError):
        multibracket(TILTED, 3, args[:2])


# -- flatness and the exponential --------------------------------------------------


def test_flat_deformation_has_zero_curvature():
    z = mv(4, (1, 3), sin(4, 4)) * Fraction(1, 3)
    report = mc_residual(TILTED, z)
    assert all(part.is_zero() for part in report.parts)
    assert report.is_mc
    image = dirac_exponential(TILTED, z)
    assert schouten(image, image).is_zero()


def test_pullback_balances_quadratic_and_cubic_parts():
    target = (mv(4, (1,)) + mv(4, (3,)) * Fraction(1, 2)).wedge(
        mv(4, (2,)) + mv(4, (4,)) * Fraction(1, 3)
    )
    assert schouten(target, target).is_zero()
    z = gauge_transform_bivector(target - TILTED.pi, -TILTED.gamma)
    assert dirac_exponential(TILTED, z) == target
    report = mc_residual(TILTED, z)
    assert report.is_mc
    first, second, third = report.parts
    assert first.is_zero()
    assert not second.is_zero()
    assert third == mv(4, (1, 2, 4), tf(cos(4, 4)) * Fraction(1, 18))
    assert report.residual.is_zero()


def test_curved_residual_detects_non_poisson_image():
    z = mv(4, (1, 3), sin(4, 4)) * Fraction(1, 3) + mv(4, (2, 4)) * Fraction(1, 5)
    report = mc_residual(TILTED, z)
    assert not report.is_mc
    image = dirac_exponential(TILTED, z)
    assert not schouten(image, image).is_zero()


def test_exponential_audit_statistics_are_stable():
    assert audit_exponential(TILTED, seed=20260816, rounds=25) == {
        "rounds": 25,
        "outside": 0,
        "mc": 24,
        "non_mc": 1,
    }
    assert audit_exponential(SCALED, seed=7, rounds=25) == {
        "rounds": 8,
        "outside": 17,
        "mc": 7,
        "non_mc": 1,
    }


# -- gauge transformations ----------------------------------------------------------


def test_gauge_of_the_half_plane():
    got = gauge_transform_bivector(mv(2, (1, 2), Fraction(1, 2)), form(2, (1, 2)))
    assert got == mv(2, (1, 2))


def test_gauge_round_trip():
    z = mv(4, (1, 2), sin(4, 4)) * Fraction(1, 8) + mv(4, (1, 3)) * Fraction(1, 16)
    moved = gauge_transform_bivector(z, TILTED.gamma)
    assert moved != z
    assert gauge_transform_bivector(moved, -TILTED.gamma) == z


def test_gauge_outside_domain_and_validation():
    with pytest.raises(OutsideGaugeDomain):
        gauge_transform_bivector(mv(2, (1, 2)), form(2, (1, 2)))
    with pytest.raises(ValueError):
        gauge_transform_bivector(mv(2, (1,)), form(2, (1, 2)))
    with pytest.raises(ValueError):
        gauge_transform_bivector(mv(2, (1, 2)), form(3, (1, 2)))


def test_gauge_flow_of_the_structure_matches_closed_form():
    rp2 = RegularPoissonStructure.build(mv(2, (1, 2)), Splitting(2, (1, 2), {}))
    beta = form(2, (1, 2))
    assert gauge_transform_poisson(rp2, beta, Fraction(1, 2)) == mv(2, (1, 2), 2)
    assert gauge_transform_poisson(rp2, beta, Fraction(1, 3)) == mv(
        2, (1, 2), Fraction(3, 2)
    )
    assert gauge_transform_poisson(rp2, beta, -1) == mv(2, (1, 2), Fraction(1, 2))
    with pytest.raises(OutsideGaugeDomain):
        gauge_transform_poisson(rp2, beta, 1)
    assert poisson_gauge_velocity(rp2, beta) == mv(2, (1, 2))


def test_gauge_velocity_sees_only_leafwise_directions():
    assert poisson_gauge_velocity(TILTED, form(4, (3, 4), cos(4, 1))).is_zero()
    assert poisson_gauge_velocity(TILTED, form(4, (2, 3))).is_zero()
    assert poisson_gauge_velocity(TILTED, form(4, (1, 2))) == mv(4, (1, 2))


# -- wedge powers and rank certificates ---------------------------------------------


def test_certified_rank_of_decomposable_and_split_planes():
    assert certified_rank(TILTED.pi) == 2
    pair = mv(5, (1, 2)) + mv(5, (3, 4))
    assert certified_rank(pair) == 4
    assert wedge_power(pair, 2) == mv(5, (1, 2, 3, 4), 2)
    assert certified_rank(Multivector.zero(4, 2)) == 0
    assert certified_rank(mv(3, (1, 2), sin(3, 3))) is None
    with pytest.raises(ValueError):
        wedge_power(TILTED.pi, -1)


# -- deformation paths --------------------------------------------------------------


def test_path_construction_normalizes():
    p = DeformationPath.of([mv(4, (1, 2)), mv(4, (3, 4)), Multivector.zero(4, 2)])
    assert len(p.coeffs) == 2
    assert p.tangent() == mv(4, (3, 4))
    assert p.at(Fraction(1, 2)) == mv(4, (1, 2)) + mv(4, (3, 4), Fraction(1, 2))
    with pytest.raises(ValueError):
        DeformationPath.of([])
    with pytest.raises(ValueError):
        DeformationPath.of([mv(4, (1, 2)), mv(3, (1, 2))])
    with pytest.raises(ValueError):
        DeformationPath.of([mv(4, (1, 2)), mv(4, (1, 2, 3))])


def test_constant_rotation_path_keeps_rank_two():
    rp = RegularPoissonStructure.build(mv(4, (1, 2)), Splitting(4, (1, 2), {}))
    path = DeformationPath.of(
        [mv(4, (1, 2)), mv(4, (1, 3)) + mv(4, (2, 4)), mv(4, (3, 4))]
    )
    results = verify_path(
        rp,
        path,
        [
            ("poisson",),
            ("wedge_power_vanishes", 2),
            ("tangent_equals", mv(4, (1, 3)) + mv(4, (2, 4))),
            ("rank_cert_at", [0, Fraction(1, 2), -3, Fraction(7, 5)]),
        ],
    )
    assert all(r.ok for r in results)


def test_scaled_plane_path_certificate_window():
    path = DeformationPath.of([SCALED.pi, mv(4, (1, 2), sin(4, 4))])
    okay, cert_in, cert_out = verify_path(
        SCALED,
        path,
        [
            ("poisson",),
            ("rank_cert_at", [0, Fraction(1, 2), -1]),
            ("rank_cert_at", [2]),
        ],
    )
    assert okay.ok and cert_in.ok
    assert not cert_out.ok
    assert "t in ['2']" in cert_out.detail


def test_transverse_direction_breaks_poisson_at_first_order():
    path = DeformationPath.of([SCALED.pi, mv(4, (3, 4))])
    poisson, wedge = verify_path(
        SCALED, path, [("poisson",), ("wedge_power_vanishes", 2)]
    )
    assert not poisson.ok and "orders [1]" in poisson.detail
    assert not wedge.ok
    sq = path.schouten(path)
    assert sq.coeffs[1] == mv(4, (1, 2, 3), tf(cos(4, 4)) * 2)


def test_rank_four_path_certificate_degenerates():
    rp = RegularPoissonStructure.build(
        mv(5, (1, 2)) + mv(5, (3, 4)), Splitting(5, (1, 2, 3, 4), {})
    )
    path = DeformationPath.of(
        [rp.pi, mv(5, (1, 2), Fraction(1, 2)) + mv(5, (3, 5))]
    )
    poisson, inside, outside = verify_path(
        rp,
        path,
        [("poisson",), ("rank_cert_at", [0, 1, Fraction(1, 3)]), ("rank_cert_at", [-2])],
    )
    assert poisson.ok and inside.ok and not outside.ok
    assert certified_rank(path.at(-2)) == 2
    assert wedge_power(path.at(-2), 2).is_zero()


def test_path_claims_validate():
    path = DeformationPath.of([mv(4, (1, 3))])
    with pytest.raises(ValueError):
        verify_path(TILTED, path, [("poisson",)])
    with pytest.raises(ValueError):
        verify_path(TILTED, DeformationPath.of([TILTED.pi]), [("nonsense",)])


# -- anchors ------------------------------------------------------------------------


def test_anchor_values_restrict_the_brackets():
    f = tf(sin(4, 2))
    assert anchor_rho(TILTED, 1, [], fn(f)) == mv(4, (1,), cos(4, 2))
    g = tf(cos(4, 2))
    assert anchor_rho(TILTED, 2, [Y3], fn(g)) == fn(-Y3.apply_function(g))
    d1 = mv(4, (1,))
    assert anchor_rho(TILTED, 3, [Y3, Y4], d1) == fn(
        TILTED.courant.evaluate([Y3, Y4, d1])
    )
    assert anchor_rho(TILTED, 3, [Y3, Y4], d1) == fn(tf(cos(4, 4)) * Fraction(-1))


def test_anchor_validation():
    with pytest.raises(ValueError):
        anchor_rho(TILTED, 4, [Y3, Y3, Y3], mv(4, (1,)))
    with pytest.raises(ValueError):
        anchor_rho(TILTED, 2, [], mv(4, (1,)))
    with pytest.raises(ValueError):
        anchor_rho(TILTED, 2, [Y3], mv(4, (3,)))
    with pytest.raises(ValueError):
        anchor_rho(TILTED, 3, [mv(4, (3, 4)), Y3], mv(4, (1,)))


def test_anchor_satisfies_the_module_leibniz_rule():
    for f in (tf(sin(4, 2)), tf(cos(4, 1))):
        for x in (mv(4, (1,)), mv(4, (2,), sin(4, 1))):
            lhs = l2(TILTED, Y3, fn(f).wedge(x))
            rho = anchor_rho(TILTED, 2, [Y3], fn(f))
            assert lhs == rho.wedge(x) + l2(TILTED, Y3, x) * f


# -- randomized generators ----------------------------------------------------------


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_random_good_multivectors_are_good(seed):
    rng = random.Random(seed)
    degree = rng.choice((1, 2, 2, 3))
    p = random_good_multivector(rng, TILTED, degree)
    assert TILTED.splitting.is_good(p)
    assert p.dim == 4 and p.degree == degree


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_unary_bracket_squares_to_zero(seed):
    rng = random.Random(seed)
    p = random_multivector(rng, 4, rng.choice((0, 1, 2)))
    assert l1(TILTED, l1(TILTED, p)).is_zero()
    assert l1(SCALED, l1(SCALED, p)).is_zero()


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_brackets_of_good_arguments_stay_good(seed):
    rng = random.Random(seed)
    s = TILTED.splitting
    p = random_good_multivector(rng, TILTED, rng.choice((1, 2, 3)))
    q = random_good_multivector(rng, TILTED, rng.choice((1, 2)))
    r = random_good_multivector(rng, TILTED, rng.choice((1, 2)))
    assert s.is_good(l1(TILTED, p))
    assert s.is_good(l2(TILTED, p, q))
    assert s.is_good(l3(TILTED, p, q, r))
