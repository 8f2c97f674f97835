import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from nsx.models.mp_types import ArcPath, BigComplex, Poly
from nsx.services.mpcore_service import (
    BranchSet, PowerProduct, laurent_coefficients, mpcore_service, power_denominator, segment_crossings
)
from nsx.utils.errors import BranchAmbiguity, ValidationError, ZeroOnPath


def circle(count=64):
    return ArcPath([mp.expj(2 * mp.pi * k / count) for k in range(count + 1)])


def test_sqrt_monodromy_around_origin():
    values = mpcore_service.continue_sqrt(circle(), lambda z: z, 1)
    assert abs(values[-1] + 1) < mp.mpf(10) ** -30


def test_sqrt_along_segment_keeps_branch():
    path = ArcPath([mp.mpf(1) + k for k in range(5)])
    values = mpcore_service.continue_sqrt(path, lambda z: z, -1)
    assert abs(values[-1] + mp.sqrt(5)) < mp.mpf(10) ** -30


def test_sqrt_rejects_bad_seed():
    with pytest.raises(BranchAmbiguity):
        mpcore_service.continue_sqrt(circle(), lambda z: z, 2)


def test_sqrt_zero_on_path():
    path = ArcPath([0, 1, 2])
    with pytest.raises(ZeroOnPath):
        mpcore_service.continue_sqrt(path, lambda z: z, 0)


def test_laurent_geometric_series():
    coeffs = laurent_coefficients([1], [-1], 6)
    for c in coeffs:
        assert abs(c - 1) < mp.mpf(10) ** -40


def test_laurent_chebyshev_weight():
    coeffs = laurent_coefficients([-1, 1], [-0.5, -0.5], 4)
    expected = [1, 0, mp.mpf(1) / 2, 0, mp.mpf(3) / 8]
    for c, e in zip(coeffs, expected):
        assert abs(c - e) < mp.mpf(10) ** -40


@settings(max_examples=20)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.95, 0.95))
def test_laurent_matches_direct_power(x, y, exponent):
    w = mp.mpc(x, y)
    z = mp.mpf(10)
    coeffs = laurent_coefficients([w], [exponent], 60)
    series = sum(c * z ** -k for k, c in enumerate(coeffs))
    assert abs(series - mp.power(1 - w / z, exponent)) < mp.mpf(10) ** -25


def test_power_denominator():
    assert power_denominator(-0.5) == 2
    assert power_denominator(1 / 3) == 3
    assert power_denominator(np.sqrt(2)) is None


def test_global_branch_behaves_like_z():
    product = PowerProduct(BranchSet([-1, 1]), [0.5, 0.5])
    assert abs(product(2) - mp.sqrt(3)) < mp.mpf(10) ** -40
    assert abs(product(-2) + mp.sqrt(3)) < mp.mpf(10) ** -40


def test_segment_crossings_orientation():
    mask, s, u, sign = segment_crossings(-1j, 1j, np.array([-1 + 0j]), np.array([1 + 0j]))
    assert mask[0]
    assert s[0] == pytest.approx(0.5)
    assert u[0] == pytest.approx(0.5)
    assert sign[0] in (1, -1)


def test_poly_from_roots_and_evaluate():
    q = Poly.from_roots([1, -1])
    np.testing.assert_allclose([complex(c) for c in q.coefficients], [-1, 0, 1])
    assert q.degree == 2
    assert q.monic
    assert abs(q(3) - 8) == 0
    assert q.derivative()(1) == 2


def test_poly_strips_trailing_zeros():
    assert Poly([1, 0, 0]).degree == 0
    assert Poly([0]).degree == -1


def test_bigcomplex_is_immutable_and_checked():
    value = BigComplex(1, 2)
    with pytest.raises(AttributeError):
        value.re = 3
    with pytest.raises(ValidationError):
        BigComplex(1, 0, precision=32)
    total = value * BigComplex(0, 1) + 1
    assert total == BigComplex(-1, 1)


def test_arc_path_rejects_repeated_sample():
    with pytest.raises(ValidationError):
        ArcPath([0, 1, 1, 2])


def test_sqrt_of_shifted_square():
    path = ArcPath([2 + mp.mpf(k) / 10 for k in range(11)])
    values = mpcore_service.continue_sqrt(path, lambda z: z * z - 1, mp.sqrt(3))
    assert abs(values[-1] - mp.sqrt(8)) < mp.mpf(10) ** -30
    constant = mpcore_service.continue_sqrt(path, lambda z: mp.mpf(4), 2)
    assert all(abs(v - 2) < mp.mpf(10) ** -40 for v in constant)


def test_quadrature_with_square_root_ends():
    arc = ArcPath([-1, 0, 1])
    total = mpcore_service.arc_quadrature(arc, lambda t: 1 / mp.sqrt(1 - t * t), (-0.5, -0.5))
    assert abs(total - mp.pi) < mp.mpf(10) ** -15
    odd = mpcore_service.arc_quadrature(arc, lambda t: t / mp.sqrt(1 - t * t), (-0.5, -0.5))
    assert abs(odd) < mp.mpf(10) ** -15


def test_quadrature_orientation():
    arc = ArcPath([0, mp.mpf(0.5), 1])
    forward = mpcore_service.arc_quadrature(arc, lambda t: t * t)
    assert abs(forward - mp.mpf(1) / 3) < mp.mpf(10) ** -30
    assert abs(mpcore_service.arc_quadrature(arc.reversed(), lambda t: t * t) + forward) < mp.mpf(10) ** -30
