import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from nsx.models.germ import Germ
from nsx.models.mp_types import Poly
from nsx.models.pade_triple import PadeTriple
from nsx.services.germ_service import germ_service
from nsx.services.pade_service import eliminate, pade_service
from nsx.utils.errors import InsufficientMoments


def monic_chebyshev(n):
    previous, current = Poly([1]), Poly([0, 1])
    if n == 0:
        return previous
    for _ in range(n - 1):
        previous, current = current, Poly([0, 2]) * current - previous
    return current * (mp.mpf(2) ** (1 - n))


@pytest.fixture(scope='module')
def chebyshev_moments():
    with mp.workprec(192):
        return germ_service.moments(Germ('two-point-sqrt', [-1, 1]), 42, exact=True)


def test_chebyshev_second_denominator(chebyshev_moments):
    triple = pade_service.solve_pade(chebyshev_moments, 2)
    np.testing.assert_allclose([complex(c) for c in triple.q.coefficients], [-0.5, 0, 1])
    assert triple.normal
    assert triple.exact


def test_chebyshev_denominators_up_to_twenty(chebyshev_moments):
    for n in range(1, 21):
        triple = pade_service.solve_pade(chebyshev_moments, n)
        expected = monic_chebyshev(n).coefficients
        assert len(triple.q.coefficients) == len(expected)
        for c, e in zip(triple.q.coefficients, expected):
            assert abs(c - e) < mp.mpf(10) ** -25


def test_chebyshev_floating_moments_agree(chebyshev_moments):
    moments = germ_service.moments(Germ('two-point-sqrt', [-1, 1]), 12)
    triple = pade_service.solve_pade(moments, 6)
    assert not triple.exact
    for c, e in zip(triple.q.coefficients, monic_chebyshev(6).coefficients):
        assert abs(c - e) < mp.mpf(10) ** -25


def test_all_chebyshev_indices_normal(chebyshev_moments):
    assert pade_service.normal_indices(chebyshev_moments[:20], 10) == set(range(11))


@settings(max_examples=10)
@given(st.integers(1, 12))
def test_hankel_conditions_hold_exactly(chebyshev_moments, n):
    triple = pade_service.solve_pade(chebyshev_moments, n)
    q = triple.q.coefficients
    f = [mp.mpf(m.numerator) / m.denominator for m in chebyshev_moments]
    for k in range(1, n + 1):
        total = sum(q[i] * f[k + i - 1] for i in range(n + 1))
        assert abs(total) < mp.mpf(10) ** -40


def test_degenerate_rational_input():
    moments = germ_service.moments(Germ('rational', [1], exponents=[1]), 6)
    first = pade_service.solve_pade(moments, 1)
    assert abs(first.q(1)) < mp.mpf(10) ** -40
    assert abs(first.p(0) - 1) < mp.mpf(10) ** -40
    second = pade_service.solve_pade(moments, 2)
    assert not second.normal
    assert second.degree == 1


def test_pade_reproduces_function_off_contour(chebyshev_moments):
    triple = pade_service.solve_pade(chebyshev_moments, 10)
    z = mp.mpf(3)
    assert abs(triple.evaluate(z) - 1 / mp.sqrt(z * z - 1)) < mp.mpf(10) ** -12


def test_insufficient_moments(chebyshev_moments):
    with pytest.raises(InsufficientMoments):
        pade_service.solve_pade(chebyshev_moments[:3], 2)
    with pytest.raises(InsufficientMoments):
        pade_service.normal_indices(chebyshev_moments[:3], 2)


def test_eliminate_detects_rank_deficiency():
    assert eliminate([[1, 1], [1, 1]], [1, 2], 0) is None
    assert eliminate([[2, 0], [0, 4]], [2, 2], 0) == [1, 0.5]


def test_orthogonality_residual(segment_contour, chebyshev_moments):
    with mp.workprec(256):
        density = germ_service.jump_density(Germ('two-point-sqrt', [-1, 1]), segment_contour)
        triple = pade_service.solve_pade(chebyshev_moments, 3)
        assert pade_service.orthogonality_residual(triple, density) < mp.mpf(10) ** -20


def test_zero_index_triple(chebyshev_moments):
    triple = pade_service.solve_pade(chebyshev_moments, 0)
    assert triple.q.degree == 0 and abs(triple.q(5) - 1) == 0
    assert triple.p.degree == -1
    head = pade_service.remainder_series(triple, chebyshev_moments, 3)
    for h, m in zip(head, chebyshev_moments):
        assert abs(h - m) < mp.mpf(10) ** -40


def test_chebyshev_first_remainder_coefficient(chebyshev_moments):
    triple = pade_service.solve_pade(chebyshev_moments, 1)
    assert abs(pade_service.remainder_series(triple, chebyshev_moments, 1)[0] - mp.mpf(0.5)) < mp.mpf(10) ** -40


def test_even_rational_germ_has_degenerate_blocks():
    moments = germ_service.moments(Germ('rational', [1, -1], exponents=[0.5, 0.5]), 10)
    assert pade_service.normal_indices(moments, 4) == {0, 1}
    for n in (2, 3, 4):
        triple = pade_service.solve_pade(moments, n)
        assert triple.degree == 2
        assert all(abs(c) < mp.mpf(10) ** -30 for c in pade_service.remainder_series(triple, moments, 2))


def test_scaling_moments_keeps_denominator(chebyshev_moments):
    scaled = [3 * m for m in chebyshev_moments[:12]]
    original = pade_service.solve_pade(chebyshev_moments, 5)
    triple = pade_service.solve_pade(scaled, 5)
    for a, b in zip(triple.q.coefficients, original.q.coefficients):
        assert abs(a - b) < mp.mpf(10) ** -30
    assert abs(triple.p(2) - 3 * original.p(2)) < mp.mpf(10) ** -30


def test_perturbed_denominator_breaks_orthogonality(segment_contour, chebyshev_moments):
    density = germ_service.jump_density(Germ('two-point-sqrt', [-1, 1]), segment_contour)
    triple = pade_service.solve_pade(chebyshev_moments, 3)
    perturbed = PadeTriple(3, triple.q + Poly([0, 0, mp.mpf('1e-3')]), triple.p, (), True, triple.precision_bits)
    assert pade_service.orthogonality_residual(perturbed, density) > mp.mpf(10) ** -5
