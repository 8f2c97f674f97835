from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from nsx.models.germ import Germ
from nsx.services.germ_service import dyadic_fraction, germ_service
from nsx.utils.errors import UnsupportedKind, ValidationError

TOL = mp.mpf(10) ** -12


def chebyshev():
    return Germ('two-point-sqrt', [-1, 1])


def test_chebyshev_moments():
    moments = germ_service.moments(chebyshev(), 5)
    for m, e in zip(moments, [1, 0, 0.5, 0, 0.375]):
        assert abs(m - e) < mp.mpf(10) ** -40


def test_chebyshev_moments_exact():
    moments = germ_service.moments(chebyshev(), 5, exact=True)
    assert moments == [Fraction(1), Fraction(0), Fraction(1, 2), Fraction(0), Fraction(3, 8)]


@pytest.mark.parametrize('value, expected', [
    (-1, Fraction(-1)),
    (-0.75, Fraction(-3, 4)),
    (2.5, Fraction(5, 2)),
    (0, Fraction(0)),
])
def test_dyadic_fraction_keeps_sign(value, expected):
    assert dyadic_fraction(value) == expected


def test_exact_moments_with_negative_branch_point():
    germ = Germ('two-point-sqrt', [-3, 1])
    exact = germ_service.moments(germ, 6, exact=True)
    assert exact[:3] == [Fraction(1), Fraction(-1), Fraction(3)]
    for e, m in zip(exact, germ_service.moments(germ, 6)):
        assert abs(mp.mpf(e.numerator) / e.denominator - m) < mp.mpf(10) ** -40


def test_hyperelliptic_moments_start_at_second_power():
    germ = Germ('hyperelliptic-reciprocal', [-2, -1, 1, 2])
    assert germ.degree_at_infinity == -2
    assert germ_service.moments(germ, 4, exact=True) == [Fraction(0), Fraction(1), Fraction(0), Fraction(5, 2)]
    for m, e in zip(germ_service.moments(germ, 4), [0, 1, 0, 2.5]):
        assert abs(m - e) < mp.mpf(10) ** -40


def test_hyperelliptic_single_moment():
    germ = Germ('hyperelliptic-reciprocal', [-2, -1, 1, 2])
    assert germ_service.moments(germ, 1, exact=True) == [Fraction(0)]
    assert germ_service.moments(germ, 1) == [0]


def test_log_ratio_moments():
    germ = Germ('log-ratio', [1, -1])
    moments = germ_service.moments(germ, 3)
    for m, e in zip(moments, [-2, 0, mp.mpf(-2) / 3]):
        assert abs(m - e) < mp.mpf(10) ** -40


def test_rational_oracle_moments():
    germ = Germ('rational', [1], exponents=[1])
    assert all(abs(m - 1) < mp.mpf(10) ** -40 for m in germ_service.moments(germ, 3))


@settings(max_examples=15)
@given(st.permutations([0, 1, 2]))
def test_moments_invariant_under_relabeling(order):
    points = [-1, mp.mpc(0.5, 1), 2]
    exponents = [Fraction(-1, 3), Fraction(-1, 3), Fraction(2, 3)]
    reference = germ_service.moments(Germ('product-power', points, exponents), 6)
    relabeled = germ_service.moments(Germ('product-power', [points[i] for i in order],
                                          [exponents[i] for i in order]), 6)
    for a, b in zip(reference, relabeled):
        assert abs(a - b) < mp.mpf(10) ** -40


@pytest.mark.parametrize('kwargs', [
    {'kind': 'product-power', 'branch_points': [-1, 1], 'exponents': ['-1/2', '-1/3']},
    {'kind': 'product-power', 'branch_points': [-1, 1], 'exponents': ['-1', '1']},
    {'kind': 'root-product', 'branch_points': [-1, 1], 'exponents': ['-1/2']},
    {'kind': 'two-point-sqrt', 'branch_points': [1]},
    {'kind': 'two-point-sqrt', 'branch_points': [1, 1]},
])
def test_invalid_germs(kwargs):
    with pytest.raises(ValidationError):
        Germ(**kwargs)


def test_unknown_kind():
    with pytest.raises(UnsupportedKind):
        Germ('meromorphic', [-1, 1])


def test_reduced_exponents():
    germ = Germ('root-product', [-1, 1], exponents=['3/2', '-1/2'])
    assert germ.reduced_exponents() == [Fraction(-1, 2), Fraction(-1, 2)]


@settings(max_examples=30)
@given(st.fractions(min_value=Fraction(-99, 100), max_value=Fraction(99, 100), max_denominator=12)
       .filter(lambda a: a.denominator != 1))
def test_reduced_exponents_lie_in_open_unit_interval(alpha):
    germ = Germ('product-power', [-1, 1], exponents=[alpha, -alpha])
    for reduced in germ.reduced_exponents():
        assert -1 < reduced < 0
        assert (reduced - alpha).denominator == 1


def test_exponent_boundary_at_minus_one():
    with pytest.raises(ValidationError):
        Germ('root-product', [-1, 1], exponents=['-3/2', '5/2'])
    germ = Germ('root-product', [-1, 1], exponents=['-999/1000', '1999/1000'])
    assert germ.reduced_exponents() == [Fraction(-999, 1000), Fraction(-1, 1000)]


def test_germ_value_off_segment(segment_contour):
    value = germ_service.germ_value(chebyshev(), segment_contour, 2)
    assert abs(value - 1 / mp.sqrt(3)) < mp.mpf(10) ** -30


def test_jump_density_midpoint(segment_contour):
    density = germ_service.jump_density(chebyshev(), segment_contour)
    assert abs(abs(density.value(0, 0)) - 2) < TOL
    assert abs(abs(density.value(0, mp.mpf(0.4))) - abs(density.value(0, mp.mpf(-0.4)))) < TOL


def test_cauchy_transform_reproduces_germ(segment_contour):
    density = germ_service.jump_density(chebyshev(), segment_contour)
    assert abs(germ_service.cauchy_transform(density, 2) - 1 / mp.sqrt(3)) < TOL
    upper = germ_service.cauchy_transform(density, mp.mpc(0.5, 1))
    lower = germ_service.cauchy_transform(density, mp.mpc(0.5, -1))
    assert abs(upper - mp.conj(lower)) < TOL


def test_density_mass_is_first_moment(segment_contour):
    density = germ_service.jump_density(chebyshev(), segment_contour)
    assert abs(abs(germ_service.integrate_density(density)) - 2 * mp.pi) < TOL


@pytest.mark.slow
def test_trivalent_sums_vanish(star_contour):
    germ = Germ('root-product', [mp.expj(2 * mp.pi * k / 3) for k in range(3)], exponents=['-1/3'] * 3)
    density = germ_service.jump_density(germ, star_contour)
    for total in germ_service.trivalent_sums(density):
        assert abs(total) < mp.mpf(10) ** -10
