import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torfol.trig import (
    ConstantDomination,
    DivisionUncertified,
    Product,
    PositiveRationalScale,
    QQi,
    TorusFunction,
    TrigPoly,
    certificate_valid,
    certify_nonvanishing,
)


def sin(dim, k):
    return TrigPoly.sin(dim, k)


def cos(dim, k):
    return TrigPoly.cos(dim, k)


def const(dim, q):
    return TrigPoly.constant(dim, q)


# -- frozen arithmetic examples -----------------------------------------------


def test_product_of_sines_halves():
    # sin^2 = 1/2 - cos(2t)/2
    p = sin(1, 1) * sin(1, 1)
    expected = const(1, Fraction(1, 2)) - cos(1, (2,)) * Fraction(1, 2)
    assert p == expected


def test_product_mixed_modes():
    # cos(t3)*sin(t4) = (sin(t3+t4) - sin(t3-t4)) / 2
    p = cos(4, 3) * sin(4, 4)
    expected = (sin(4, (0, 0, 1, 1)) - sin(4, (0, 0, 1, -1))) * Fraction(1, 2)
    assert p == expected


def test_linear_combinations_collapse():
    p = sin(2, 1) + sin(2, 1) - sin(2, 1) * 2
    assert p.is_zero()


def test_reality_constraint_rejected():
    with pytest.raises(ValueError):
        TrigPoly(1, {(1,): QQi.of(1, 0)})


def test_constant_and_zero_modes_degenerate():
    assert cos(3, (0, 0, 0)) == const(3, 1)
    assert sin(3, (0, 0, 0)).is_zero()


def test_partial_of_basis_functions():
    assert sin(4, 4).partial(4) == cos(4, 4)
    assert cos(4, 4).partial(4) == -sin(4, 4)
    assert sin(4, 4).partial(1).is_zero()
    assert sin(2, (1, -2)).partial(2) == cos(2, (1, -2)) * -2


def test_support_radius_and_depends_on():
    p = sin(3, (2, 0, -1))
    assert p.support_radius() == 2
    assert p.depends_on(1) and p.depends_on(3)
    assert not p.depends_on(2)


# -- certificates --------------------------------------------------------------


def test_certify_dominated_offset():
    cert = certify_nonvanishing(sin(4, 4) + const(4, 2))
    assert isinstance(cert, ConstantDomination)


def test_certify_constant_one():
    assert certify_nonvanishing(const(2, 1)) is not None


def test_certify_pure_oscillation_fails():
    assert certify_nonvanishing(sin(4, 4)) is None


def test_certify_boundary_case_fails():
    # sin + 1 vanishes at 3*pi/2, and the domination test is exactly tight
    assert certify_nonvanishing(sin(1, 1) + const(1, 1)) is None


def test_product_certificate_checks_factors_and_value():
    d = sin(1, 1) + const(1, 2)
    c = certify_nonvanishing(d)
    good = Product(((d, c), (d, c)))
    assert certificate_valid(d * d, good)
    assert not certificate_valid(d * d * d, good)
    assert not certificate_valid(d * d, Product(()))


def test_scale_certificate():
    base = sin(1, 1) + const(1, 2)
    cert = PositiveRationalScale(Fraction(3), base, certify_nonvanishing(base))
    assert certificate_valid(base * 3, cert)
    assert not certificate_valid(base * 2, cert)
    bad = PositiveRationalScale(Fraction(-3), base, certify_nonvanishing(base))
    assert not certificate_valid(base * -3, bad)


# -- localized ring -------------------------------------------------------------


def test_quotient_requires_certificate():
    one = const(4, 1)
    f = TorusFunction.quotient(one, sin(4, 4) + const(4, 2))
    assert not f.is_zero()
    with pytest.raises(DivisionUncertified):
        TorusFunction.quotient(one, sin(4, 4))


def test_semantic_equality_by_cross_multiplication():
    d = sin(1, 1) + const(1, 2)
    f = TorusFunction.quotient(d, d)
    assert f == 1
    g = TorusFunction.quotient(sin(1, 1) * d, d)
    assert g == TorusFunction.of(sin(1, 1))


def test_field_arithmetic_round_trips():
    d = sin(2, 1) + const(2, 3)
    f = TorusFunction.quotient(cos(2, 2), d)
    g = TorusFunction.of(sin(2, 1) + const(2, 2))
    assert (f + g) - g == f
    assert (f * g) / g == f
    assert f - f == 0
    assert g / g == 1
    with pytest.raises(DivisionUncertified):
        f / f  # the numerator of f vanishes somewhere


def test_division_by_uncertified_function_raises():
    f = TorusFunction.of(sin(2, 1))
    with pytest.raises(DivisionUncertified):
        1 / f
    with pytest.raises(DivisionUncertified):
        f.reciprocal()


def test_constant_denominators_absorb():
    f = TorusFunction.quotient(sin(1, 1), const(1, 2))
    assert f.den.is_constant()
    assert f == TorusFunction.of(sin(1, 1) * Fraction(1, 2))


def test_quotient_rule():
    # d/dt ( 1/(sin t + 2) ) = -cos t / (sin t + 2)^2
    d = sin(1, 1) + const(1, 2)
    f = TorusFunction.quotient(const(1, 1), d)
    df = f.partial(1)
    expected = TorusFunction(-cos(1, 1), d * d, Product(((d, f.den_cert), (d, f.den_cert))))
    assert df == expected


def test_scalar_mixing():
    f = TorusFunction.of(sin(1, 1))
    assert 2 * f == f + f
    assert f - 1 == TorusFunction.of(sin(1, 1) - const(1, 1))
    assert (1 + f) == TorusFunction.of(const(1, 1) + sin(1, 1))


# -- averaging -------------------------------------------------------------------


def test_zero_mode_projects_named_coordinates():
    p = sin(3, 1) * cos(3, 3) + const(3, 5)
    assert p.zero_mode({1, 2}) == const(3, 5)
    assert p.zero_mode({2}) == p
    assert p.zero_mode({1, 2, 3}) == const(3, 5)


def test_zero_mode_torus_function_fails_on_dependent_denominator():
    d = sin(2, 2) + const(2, 2)
    f = TorusFunction.quotient(cos(2, 1), d)
    assert f.zero_mode({2}) is None
    g = f.zero_mode({1})
    assert g is not None and g.is_zero()


def test_zero_mode_keeps_mixed_modes_only_when_all_named_indices_vanish():
    p = sin(2, (1, 1))
    assert p.zero_mode({1}).is_zero()
    assert p.zero_mode({2}).is_zero()
    assert p.zero_mode(set()) == p


# -- float sanity -----------------------------------------------------------------


def test_certified_denominators_stay_away_from_zero_on_grid():
    d = sin(1, 1) + const(1, 2)
    assert certify_nonvanishing(d) is not None
    for j in range(10_000):
        t = 2 * math.pi * j / 10_000
        assert abs(d.evaluate([t])) > 1e-9


def test_evaluate_matches_math_library():
    p = sin(2, 1) * cos(2, 2) + const(2, Fraction(1, 3))
    for a, b in [(0.3, 1.1), (2.0, -0.7), (4.9, 3.3)]:
        expected = math.sin(a) * math.cos(b) + 1 / 3
        assert abs(p.evaluate([a, b]) - expected) < 1e-12


# -- property suites ----------------------------------------------------------------

rationals = st.fractions(
    min_value=-4, max_value=4, max_denominator=4
)


@st.composite
def trig_polys(draw, dim=2, max_terms=3, max_freq=2):
    p = TrigPoly.zero(dim)
    for _ in range(draw(st.integers(0, max_terms))):
        k = tuple(
            draw(st.integers(-max_freq, max_freq)) for _ in range(dim)
        )
        q = draw(rationals)
        if draw(st.booleans()):
            p = p + TrigPoly.sin(dim, k) * q
        else:
            p = p + TrigPoly.cos(dim, k) * q
    return p


@given(trig_polys(), trig_polys(), trig_polys())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@given(trig_polys())
def test_additive_inverse(a):
    assert (a + (-a)).is_zero()


@given(trig_polys(), trig_polys())
def test_partial_is_a_derivation(a, b):
    for i in (1, 2):
        lhs = (a * b).partial(i)
        rhs = a.partial(i) * b + a * b.partial(i)
        assert lhs == rhs


@given(trig_polys())
def test_partials_commute(a):
    assert a.partial(1).partial(2) == a.partial(2).partial(1)


@given(trig_polys())
def test_zero_mode_is_an_idempotent_projection(a):
    for s in ({1}, {2}, {1, 2}):
        pa = a.zero_mode(s)
        assert pa.zero_mode(s) == pa


@given(trig_polys(), trig_polys())
def test_zero_mode_is_linear(a, b):
    s = {1}
    assert (a + b).zero_mode(s) == a.zero_mode(s) + b.zero_mode(s)


@given(trig_polys())
def test_zero_mode_kills_derivatives_of_averaged_coordinates(a):
    assert a.partial(1).zero_mode({1}).is_zero()
    assert a.partial(2).zero_mode({1, 2}).is_zero()


@given(trig_polys())
def test_zero_mode_commutes_with_transverse_derivatives(a):
    assert a.partial(2).zero_mode({1}) == a.zero_mode({1}).partial(2)


@given(trig_polys())
@settings(max_examples=50)
def test_certified_polys_have_no_float_zeros(a):
    d = a + TrigPoly.constant(2, 20)
    cert = certify_nonvanishing(d)
    if cert is None:
        return
    for j in range(40):
        for l in range(40):
            t = (2 * math.pi * j / 40, 2 * math.pi * l / 40)
            assert abs(d.evaluate(t)) > 1e-9


@given(trig_polys(), trig_polys())
def test_torus_function_equality_is_well_defined(a, b):
    d = sin(2, 1) + const(2, 2)
    f = TorusFunction.quotient(a * d, d)
    assert f == TorusFunction.of(a)
    g = TorusFunction.quotient(a, d) + TorusFunction.quotient(b, d)
    assert g == TorusFunction.quotient(a + b, d)


@given(trig_polys())
def test_torus_function_partial_matches_poly_partial(a):
    f = TorusFunction.of(a)
    assert f.partial(1) == TorusFunction.of(a.partial(1))
