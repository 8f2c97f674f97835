import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from nsx.models.surface import CycleDensity, SurfaceData, SurfacePoint
from nsx.services.surface_service import surface_service
from nsx.utils.errors import OnCut


def test_theta_matches_jacobi_theta():
    surface = SurfaceData.from_period_matrix([[mp.mpc(0, 1)]])
    value = surface_service.theta(surface, [0])
    assert abs(value - mp.mpf('1.0864348112133080146')) < mp.mpf(10) ** -15


@settings(max_examples=10)
@given(st.floats(0.5, 3), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_theta_agrees_with_jtheta(t, x, y):
    B = mp.mpc(0, t)
    surface = SurfaceData.from_period_matrix([[B]])
    u = mp.mpc(x, y)
    expected = mp.jtheta(3, mp.pi * u, mp.exp(mp.pi * mp.mpc(0, 1) * B))
    assert abs(surface_service.theta(surface, [u]) - expected) < mp.mpf(10) ** -20 * max(1, abs(expected))


def test_theta_quasi_periodicity_genus_two():
    surface = SurfaceData.from_period_matrix([[mp.mpc(0.1, 1.2), mp.mpc(0.3, 0.2)],
                                              [mp.mpc(0.3, 0.2), mp.mpc(-0.2, 0.9)]])
    assert surface_service.theta_periodicity_residual(surface, samples=100) < mp.mpf(10) ** -20


def test_reduce_and_lattice_distance():
    surface = SurfaceData.from_period_matrix([[mp.mpc(0.25, 1.5)]])
    B = surface.period_matrix[0, 0]
    u = [mp.mpc(0.1, 0.05) + 3 - 2 * B]
    r, j, m = surface_service.reduce(surface, u)
    assert j == [3] and m == [-2]
    assert abs(r[0] - mp.mpc(0.1, 0.05)) < mp.mpf(10) ** -30
    assert surface_service.lattice_distance(surface, [2 + B]) < mp.mpf(10) ** -30


def test_genus_zero_surface_is_empty(segment_contour):
    surface = surface_service.build_surface(segment_contour)
    assert surface.genus == 0
    assert surface_service.abel_map(surface, SurfacePoint(2, 0)) == []
    assert surface_service.jacobi_invert(surface, []) == ([], True)
    assert surface_service.riemann_relations(surface)['min_eigenvalue'] is None


def test_constant_density_kernel_genus_zero(segment_contour):
    surface = surface_service.build_surface(segment_contour)
    density = CycleDensity.constant(segment_contour, 1)
    z = mp.mpc(0.4, 0.9)
    upper = surface_service.cauchy_kernel(surface, density, SurfacePoint(z, 0))
    lower = surface_service.cauchy_kernel(surface, density, SurfacePoint(z, 1))
    assert abs(abs(upper) - mp.mpf(0.5)) < mp.mpf(10) ** -10
    assert abs(upper + lower) < mp.mpf(10) ** -20


def test_kernel_vanishes_for_zero_density(segment_contour):
    surface = surface_service.build_surface(segment_contour)
    density = CycleDensity.constant(segment_contour, 0)
    assert abs(surface_service.cauchy_kernel(surface, density, SurfacePoint(mp.mpc(0, 2), 0))) < mp.mpf(10) ** -40


def test_kernel_rejects_points_on_contour(segment_contour):
    surface = surface_service.build_surface(segment_contour)
    density = CycleDensity.constant(segment_contour, 1)
    with pytest.raises(OnCut):
        surface_service.cauchy_kernel(surface, density, SurfacePoint(mp.mpf('0.2'), 0))


@pytest.mark.parametrize('points', [
    [SurfacePoint.infinity(0), SurfacePoint.infinity(1)],
    [SurfacePoint(mp.mpc(0.5, 2), 0), SurfacePoint(mp.mpc(0.5, 2), 1)],
    [SurfacePoint(1, 0), SurfacePoint(1 + mp.mpf(10) ** -9, 0)],
])
def test_involution_pairs_are_canonicalized(segment_contour, points):
    divisor, unique = surface_service._canonical(segment_contour, points)
    assert divisor == [SurfacePoint.infinity(1), SurfacePoint.infinity(0)]
    assert not unique


def test_regular_divisor_is_sorted(segment_contour):
    points = [SurfacePoint(2, 1), SurfacePoint(-2, 0)]
    divisor, unique = surface_service._canonical(segment_contour, points)
    assert unique
    assert divisor == [SurfacePoint(-2, 0), SurfacePoint(2, 1)]
    same_sheet = [SurfacePoint(mp.mpc(0.5, 2), 0), SurfacePoint(mp.mpc(0.5, 2), 0)]
    assert surface_service._canonical(segment_contour, same_sheet)[1]


def test_genus_two_lattice_target_is_special(monkeypatch):
    surface = SurfaceData.from_period_matrix([[mp.mpc(0.1, 1.2), mp.mpc(0.3, 0.2)],
                                              [mp.mpc(0.3, 0.2), mp.mpc(-0.2, 0.9)]])
    monkeypatch.setattr(surface_service, 'base_image', lambda surface: [mp.mpc(0), mp.mpc(0)])
    B = surface.period_matrix
    c = [1 + B[0, 1], B[1, 1] - 2]
    divisor, unique = surface_service.jacobi_invert(surface, c)
    assert divisor == [SurfacePoint.infinity(1), SurfacePoint.infinity(0)]
    assert not unique


@pytest.mark.slow
def test_two_slit_period_matches_modular_value(two_slit_surface):
    B = two_slit_surface.period_matrix[0, 0]
    expected = 2 * mp.ellipk(mp.mpf(0.25)) / mp.ellipk(mp.mpf(0.75))
    assert abs(mp.im(-1 / B) - expected) < mp.mpf(10) ** -8
    assert abs(mp.re(1 / B) - mp.nint(mp.re(1 / B))) < mp.mpf(10) ** -8


@pytest.mark.slow
def test_two_slit_identities(two_slit_surface):
    relations = surface_service.riemann_relations(two_slit_surface)
    assert relations['min_eigenvalue'] > 0
    assert surface_service.late_addition_residual(two_slit_surface) < mp.mpf(10) ** -8
    assert surface_service.green_periods(two_slit_surface) < mp.mpf(10) ** -8
    assert surface_service.theta_periodicity_residual(two_slit_surface) < mp.mpf(10) ** -15
    probe = surface_service.probe_point(two_slit_surface.contour)
    assert surface_service.involution_residual(two_slit_surface, probe) < mp.mpf(10) ** -8


@pytest.mark.slow
def test_two_slit_riemann_constants(two_slit_surface):
    K = two_slit_surface.riemann_constants
    assert surface_service.theta_relative(two_slit_surface, K) < mp.mpf(10) ** -8


@pytest.mark.slow
def test_two_slit_kernel_antisymmetry(two_slit_surface):
    density = CycleDensity.from_function(two_slit_surface.contour, lambda t: t * t)
    z = surface_service.probe_point(two_slit_surface.contour)
    upper = surface_service.cauchy_kernel(two_slit_surface, density, SurfacePoint(z, 0))
    lower = surface_service.cauchy_kernel(two_slit_surface, density, SurfacePoint(z, 1))
    assert abs(upper + lower) < mp.mpf(10) ** -15


@pytest.mark.slow
def test_two_slit_jacobi_round_trip(two_slit_surface):
    z = surface_service.probe_point(two_slit_surface.contour)
    image = surface_service.abel_map(two_slit_surface, SurfacePoint(z, 0))
    c = [x - y for x, y in zip(image, surface_service.base_image(two_slit_surface))]
    divisor, unique = surface_service.jacobi_invert(two_slit_surface, c)
    assert unique
    assert len(divisor) == 1
    assert divisor[0].sheet == 0
    assert abs(divisor[0].z - z) < mp.mpf(10) ** -8


@pytest.mark.slow
def test_two_slit_abel_images_of_infinity_differ(two_slit_surface):
    images = two_slit_surface.infinity_images
    difference = complex(images[0][0] - images[1][0])
    assert np.isfinite(difference)
    assert abs(difference) > 1e-6
