import numpy as np
import pytest
from mpmath import mp

from nsx.models.germ import Germ
from nsx.services.asymptotics_service import AsymptoticsService, asymptotics_service, huber_fit
from nsx.services.germ_service import germ_service
from nsx.services.pade_service import pade_service
from nsx.services.surface_service import surface_service
from nsx.services.szego_service import szego_service
from nsx.utils.errors import ValidationError


def chebyshev():
    return Germ('two-point-sqrt', [-1, 1])


@pytest.fixture(scope='module')
def chebyshev_run(segment_contour):
    with mp.workprec(192):
        moments = germ_service.moments(chebyshev(), 82, exact=True)
        triples = {n: pade_service.solve_pade(moments, n) for n in list(range(1, 33)) + [40]}
        surface = surface_service.build_surface(segment_contour)
        density = germ_service.jump_density(chebyshev(), segment_contour)
    return triples, surface, density


def test_huber_fit_recovers_line():
    x = np.arange(1, 11)
    slope, intercept = huber_fit(x, 3 * x + 1)
    assert slope == pytest.approx(3, abs=1e-3)
    assert intercept == pytest.approx(1, abs=1e-2)


def test_huber_fit_needs_three_points():
    with pytest.raises(ValidationError):
        huber_fit([1, 2], [1, 2])


def test_circle_grid():
    grid = asymptotics_service.circle_grid(radius=3, count=8, center=1)
    assert len(grid) == 8
    for z in grid:
        assert abs(abs(z - 1) - 3) < mp.mpf(10) ** -30


def test_chebyshev_strong_prediction(chebyshev_run):
    triples, surface, density = chebyshev_run
    phi = 2 + mp.sqrt(3)
    for n in (3, 8):
        data = szego_service.szego(surface, density, n)
        q_hat, _ = asymptotics_service.predict_strong(surface, density, data, 2)
        expected = 1 / (1 + phi ** (-2 * n))
        assert abs(q_hat / triples[n].q(2) - expected) < mp.mpf(10) ** -12


def test_chebyshev_compare_run(chebyshev_run, segment_contour):
    triples, surface, density = chebyshev_run
    service = AsymptoticsService(boundary_samples=3)
    grid = service.circle_grid(radius=2, count=8)
    report = service.compare_run(chebyshev(), segment_contour, surface, density, triples, [2, 4, 6], grid=grid)
    assert report.records
    assert report.excluded == 0
    assert report.max_deviation(6) < 1e-6
    assert report.boundary[6] < mp.mpf(10) ** -10
    for row in service.zero_accounting(report).values():
        assert row['holds']


def test_weak_asymptotics(chebyshev_run, segment_contour):
    triples, _, _ = chebyshev_run
    result = asymptotics_service.weak_asymptotics_check({40: triples[40]}, segment_contour, [2, mp.mpc(0, 2)])
    assert result[40] < 0.02


def test_error_rate_matches_green_function(chebyshev_run, segment_contour):
    triples, _, _ = chebyshev_run
    subset = {n: triples[n] for n in range(8, 33)}
    result = asymptotics_service.error_rate_check(chebyshev(), subset, segment_contour, 2)
    assert result['expected'] == pytest.approx(-2 * float(mp.log(2 + mp.sqrt(3))), rel=1e-10)
    assert result['relative_error'] < 0.02


def test_error_rate_is_unchanged_by_scaling_the_germ(chebyshev_run, segment_contour):
    triples, _, _ = chebyshev_run
    subset = {n: triples[n] for n in range(8, 17)}
    result = asymptotics_service.error_rate_check(chebyshev(), subset, segment_contour, 2)
    assert result['scaling_residual'] < 1e-8
    scaled, scaled_triples = asymptotics_service.scaled_run(chebyshev(), subset)
    assert scaled.normalization.value == 2
    for n in subset:
        assert scaled_triples[n].q.coefficients == triples[n].q.coefficients


def test_error_rate_needs_eight_indices(chebyshev_run, segment_contour):
    triples, _, _ = chebyshev_run
    with pytest.raises(ValidationError):
        asymptotics_service.error_rate_check(chebyshev(), {n: triples[n] for n in (1, 2, 3)}, segment_contour, 2)


def test_chebyshev_zeros_lie_on_segment(chebyshev_run, segment_contour):
    triples, _, _ = chebyshev_run
    zeros = asymptotics_service.classify_zeros(triples[10].q, segment_contour)
    assert zeros.n == 10
    assert len(zeros.on_contour) == 10
    assert zeros.spurious == []
    assert zeros.contour_fraction == 1.0


@pytest.mark.slow
def test_jacobi_weight_deviation_decays_like_one_over_n(segment_contour):
    germ = Germ('root-product', [-1, 1], exponents=['-2/3', '-1/3'])
    n_list = list(range(4, 21))
    with mp.workprec(pade_service.precision_for(20)):
        moments = germ_service.moments(germ, 2 * max(n_list) + 2)
    triples = {n: pade_service.solve_pade(moments, n) for n in n_list}
    surface = surface_service.build_surface(segment_contour)
    density = germ_service.jump_density(germ, segment_contour)
    grid = asymptotics_service.circle_grid(radius=2, count=6)
    report = asymptotics_service.compare_run(germ, segment_contour, surface, density, triples, n_list,
                                             grid=grid, boundary=False)
    assert report.max_deviation(20) < 0.1
    assert 0.7 <= report.fits['decay_exponent'] <= 1.3


@pytest.mark.slow
def test_star_deviation_at_twenty(star_contour, star_surface):
    germ = Germ('root-product', [mp.expj(2 * mp.pi * k / 3) for k in range(3)], exponents=['-1/3'] * 3)
    with mp.workprec(pade_service.precision_for(20)):
        moments = germ_service.moments(germ, 42)
    triples = {20: pade_service.solve_pade(moments, 20)}
    density = germ_service.jump_density(germ, star_contour)
    grid = asymptotics_service.circle_grid(radius=2, count=20)
    report = asymptotics_service.compare_run(germ, star_contour, star_surface, density, triples, [20],
                                             grid=grid, boundary=False)
    assert report.records
    assert report.max_deviation(20) < 0.2


@pytest.mark.slow
def test_two_slit_zero_accounting(two_slit_contour, two_slit_surface):
    germ = Germ('root-product', [-2, -1, 1, 2], exponents=['-1/2'] * 4)
    n_list = list(range(5, 21))
    with mp.workprec(pade_service.precision_for(20)):
        moments = germ_service.moments(germ, 42)
    triples = {n: pade_service.solve_pade(moments, n) for n in n_list}
    density = germ_service.jump_density(germ, two_slit_contour)
    report = asymptotics_service.compare_run(germ, two_slit_contour, two_slit_surface, density, triples, n_list,
                                             grid=[], boundary=False)
    radius = 0.1 * float(two_slit_contour.diameter)
    for n, row in asymptotics_service.zero_accounting(report).items():
        assert row['holds']
        zeros = report.zeros[n]
        assert len(zeros.spurious) <= two_slit_surface.genus
        if report.n_epsilon[n]:
            assert len(zeros.matched) == len(zeros.spurious)
            assert all(distance < radius for _, _, distance in zeros.matched)
