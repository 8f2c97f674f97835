import pytest
from mpmath import mp

from nsx.config import Config
from nsx.models.germ import Germ
from nsx.models.surface import SurfaceData, SurfacePoint
from nsx.models.szego import DivisorSolution, SzegoData
from nsx.services.germ_service import germ_service
from nsx.services.surface_service import surface_service
from nsx.services.szego_service import szego_service
from nsx.utils.errors import GenusCapExceeded

JUMP_TOLERANCE = 1000 * mp.mpf(Config.DEFAULT_TOLERANCE)


@pytest.fixture(scope='module')
def chebyshev_setup(segment_contour):
    with mp.workprec(192):
        surface = surface_service.build_surface(segment_contour)
        density = germ_service.jump_density(Germ('two-point-sqrt', [-1, 1]), segment_contour)
    return surface, density


def history_entry(n, unique, divisor=None):
    divisor = divisor if divisor is not None else [SurfacePoint.infinity(1), SurfacePoint.infinity(0)]
    solution = DivisorSolution(n, divisor, unique, [], [], [], mp.mpf(0))
    return SzegoData(n, solution, None, None, None, None, None, True, 0.01)


def test_genus_zero_szego_is_constant(chebyshev_setup):
    surface, density = chebyshev_setup
    data = szego_service.szego(surface, density, 5)
    first = szego_service.evaluate(surface, density, data, mp.mpc(0.3, 1.2))
    second = szego_service.evaluate(surface, density, data, mp.mpc(-2, 0.5))
    assert abs(first - second) < mp.mpf(10) ** -12
    assert min(abs(abs(first) - mp.sqrt(2)), abs(abs(first) - 1 / mp.sqrt(2))) < mp.mpf(10) ** -12
    upper = szego_service.evaluate(surface, density, data, mp.mpc(0.3, 1.2), sheet=0)
    lower = szego_service.evaluate(surface, density, data, mp.mpc(0.3, 1.2), sheet=1)
    assert abs(abs(upper * lower) - 1) < mp.mpf(10) ** -12


def test_genus_zero_divisor_is_empty(chebyshev_setup):
    surface, density = chebyshev_setup
    data = szego_service.szego(surface, density, 4)
    assert data.divisor == []
    assert data.unique
    assert data.in_n_epsilon
    assert data.gamma is not None and data.gamma_star is not None


@pytest.mark.parametrize('n', [3, 8, 15])
def test_genus_zero_jump_relation(chebyshev_setup, n):
    surface, density = chebyshev_setup
    data = szego_service.szego(surface, density, n)
    assert szego_service.jump_residual(surface, density, data.current, samples=20) < JUMP_TOLERANCE


def test_genus_cap_enforced():
    surface = SurfaceData.from_period_matrix(mp.eye(3) * mp.mpc(0, 1))
    with pytest.raises(GenusCapExceeded):
        szego_service.szego(surface, None, 1)
    with pytest.raises(GenusCapExceeded):
        surface_service.jacobi_invert(surface, [0, 0, 0])


def test_n_epsilon_membership():
    near = DivisorSolution(2, [SurfacePoint(mp.mpf(3), 0)], True, [], [], [], mp.mpf(0))
    far = DivisorSolution(2, [SurfacePoint(mp.mpf(300), 0)], True, [], [], [], mp.mpf(0))
    assert szego_service.in_n_epsilon(near, None, 0.01)
    assert not szego_service.in_n_epsilon(far, None, 0.01)
    assert szego_service.in_n_epsilon(far, None, 0.001)
    assert szego_service.in_n_epsilon(near, far, 0.01)


def test_divisor_diagnostics_empty_history():
    result = szego_service.divisor_diagnostics([], 0)
    assert result['special_blocks'] == []
    assert result['longest_block'] == 0
    assert result['block_bound_holds']


def test_divisor_diagnostics_blocks():
    history = [history_entry(1, True, [SurfacePoint(1, 0)]), history_entry(3, False),
               history_entry(4, False), history_entry(2, True, [SurfacePoint(1, 0)]),
               history_entry(6, False)]
    result = szego_service.divisor_diagnostics(history, 2)
    assert result['special_blocks'] == [[3, 4], [6]]
    assert result['longest_block'] == 2
    assert not result['block_bound_holds']
    assert result['shared_points'] == [(1, 2)]


@pytest.mark.slow
@pytest.mark.parametrize('n', [3, 8, 15])
def test_two_slit_jump_relation(two_slit_surface, n):
    contour = two_slit_surface.contour
    germ = Germ('root-product', [-2, -1, 1, 2], exponents=['-1/2'] * 4)
    density = germ_service.jump_density(germ, contour)
    data = szego_service.szego(two_slit_surface, density, n)
    assert len(data.divisor) == 1
    assert data.current.residual < mp.mpf(10) ** -8
    assert szego_service.jump_residual(two_slit_surface, density, data.current, samples=20) < JUMP_TOLERANCE
