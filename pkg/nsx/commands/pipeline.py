from functools import cached_property

from nsx.models.mp_types import BigComplex, Poly
from nsx.services.asymptotics_service import asymptotics_service
from nsx.services.contour_service import contour_service
from nsx.services.export_service import OutputBundle
from nsx.services.germ_service import germ_service
from nsx.services.pade_service import pade_service
from nsx.services.surface_service import surface_service
from nsx.services.szego_service import szego_service
from nsx.utils.logger import logger


class Pipeline:
    """Artifacts of one run, computed on first use and shared by the commands of the run.

    Germ, moments, Pade triples, contour, jump density, surface and Szego data flow in
    that order; a command only triggers the stages it reads.
    """

    def __init__(self, problem, settings):
        self.problem = problem
        self.settings = settings
        self.bundle = OutputBundle()
        self.diagnostics = {}
        self.completed = []

    @property
    def bits(self):
        return self.problem.precision_bits

    @cached_property
    def germ(self):
        return self.problem.germ.to_germ(self.bits)

    @cached_property
    def moments(self):
        count = 2 * self.problem.n_max + 2
        return germ_service.moments(self.germ, count, exact=self.problem.options.exact_moments)

    @cached_property
    def triples(self):
        logger.info(f'Pade run up to n={self.problem.n_max}')
        return pade_service.pade_run(self.moments, range(self.problem.n_max + 1))

    @cached_property
    def normal_indices(self):
        return pade_service.normal_indices(self.moments, self.problem.n_max)

    @cached_property
    def contour(self):
        roots = self.problem.options.seed_roots
        seed = Poly.from_roots([BigComplex.from_pair(r).value for r in roots]) if roots else None
        return contour_service.solve_for_germ(self.germ, seed)

    @cached_property
    def density(self):
        return germ_service.jump_density(self.germ, self.contour)

    @cached_property
    def surface(self):
        return surface_service.build_surface(self.contour)

    def szego_data(self, n):
        return szego_service.szego(self.surface, self.density, n, self.problem.epsilon)

    @cached_property
    def szego_history(self):
        return [self.szego_data(n) for n in self.problem.indices()]

    def grid(self):
        options = self.problem.options
        center = BigComplex.from_pair(options.grid_center).value
        return asymptotics_service.circle_grid(options.grid_radius, options.grid_count, center)

    def mark_done(self, command):
        self.completed.append(command)
