import json
import os

import hypothesis
import numpy as np
import pytest
from mpmath import mp

os.environ.setdefault('NSX_LOG_FILE', '')

from nsx.services.contour_service import contour_service  # noqa: E402
from nsx.services.surface_service import surface_service  # noqa: E402

np.seterr(all='warn')

SUPPRESSED = [hypothesis.HealthCheck.function_scoped_fixture, hypothesis.HealthCheck.too_slow]

hypothesis.settings.register_profile('fast', max_examples=10, deadline=None, suppress_health_check=SUPPRESSED)
hypothesis.settings.register_profile('ci', max_examples=50, deadline=None, suppress_health_check=SUPPRESSED)
hypothesis.settings.load_profile(os.environ.get('HYPOTHESIS_PROFILE', 'fast'))

WORKING_BITS = 192


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long pipeline runs')


@pytest.fixture(autouse=True)
def working_precision():
    with mp.workprec(WORKING_BITS):
        yield


def gp_points(angle):
    a = mp.expj(angle)
    return [a, mp.conj(a), -a, -mp.conj(a)]


@pytest.fixture(scope='session')
def segment_contour():
    with mp.workprec(WORKING_BITS):
        return contour_service.solve_stahl([-1, 1])


@pytest.fixture(scope='session')
def star_contour():
    with mp.workprec(WORKING_BITS):
        return contour_service.solve_stahl([mp.expj(2 * mp.pi * k / 3) for k in range(3)])


@pytest.fixture(scope='session')
def two_slit_contour():
    with mp.workprec(WORKING_BITS):
        return contour_service.solve_stahl([-2, -1, 1, 2])


@pytest.fixture(scope='session')
def two_slit_surface(two_slit_contour):
    with mp.workprec(WORKING_BITS):
        return surface_service.build_surface(two_slit_contour)


@pytest.fixture(scope='session')
def gp_contour():
    with mp.workprec(WORKING_BITS):
        return contour_service.solve_stahl(gp_points(mp.pi / 5))


@pytest.fixture
def write_config(tmp_path):
    def write(data, name='problem.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path
    return write


@pytest.fixture(scope='session')
def gp_square_contour():
    with mp.workprec(WORKING_BITS):
        return contour_service.solve_stahl(gp_points(mp.pi / 4))


@pytest.fixture(scope='session')
def star_surface(star_contour):
    with mp.workprec(WORKING_BITS):
        return surface_service.build_surface(star_contour)
