import numpy as np
from mpmath import mp

from nsx.config import Config
from nsx.models.germ import POWER_KINDS
from nsx.models.surface import CycleDensity, SurfacePoint
from nsx.models.szego import DivisorSolution, SzegoData
from nsx.services.contour_service import contour_service
from nsx.services.germ_service import germ_service
from nsx.services.mpcore_service import two_pi_i
from nsx.services.surface_service import surface_service
from nsx.utils.errors import GenusCapExceeded, NsxError
from nsx.utils.latency_monitor import measure_latency
from nsx.utils.logger import logger


class SzegoService:
    def __init__(self, genus_cap=None, epsilon=None, jump_samples=20):
        self.genus_cap = genus_cap or Config.GENUS_CAP
        self.epsilon = epsilon or Config.EPSILON
        self.jump_samples = jump_samples

    # densities on the lifted contour

    def log_ratio_density(self, surface, density):
        """psi_rho = log(rho / h+), continuous along every arc."""
        contour = surface.contour

        def build():
            sign_shift = mp.mpc(0, mp.pi) if contour_service.branch_sign(contour) < 0 else mp.mpc(0)

            def raw(k, chord):
                frame = contour.frame(k, 1)
                log_rho = density.log_chord_function(k, chord)
                return lambda t: log_rho(t) - contour.h.log_from_logs(frame.logs_at(t, chord)) - sign_shift

            shifts = []
            for k in range(len(contour.cut_arcs)):
                a, b = contour.cut_arcs[k].chord(0)
                middle = (a + b) / 2
                h_plus = contour_service.branch_sign(contour) * contour.frame(k, 1).chord_function(contour.h, 0)(middle)
                principal = mp.log(density.chord_function(k, 0)(middle) / h_plus)
                shifts.append(two_pi_i() * mp.nint(mp.im(raw(k, 0)(middle) - principal) / (2 * mp.pi)))

            def function(k, chord):
                evaluate = raw(k, chord)
                return lambda t: evaluate(t) - shifts[k]

            return CycleDensity(contour, function, self._log_end_exponents(contour, density), name='log_rho')
        return surface.cached(('log_ratio', id(density), mp.prec), build)

    def _log_end_exponents(self, contour, density):
        alphas = [mp.mpf(0)] * len(contour.points)
        if density.germ.kind in POWER_KINDS:
            alphas = germ_service.exponent_vector(density.germ, contour)
        ends = []
        for start, stop in contour.arc_ends:
            pair = []
            for index in (start, stop):
                regular = index < contour.n_a and abs(alphas[index] + mp.mpf(0.5)) < mp.mpf(1e-12)
                pair.append(mp.mpf(-0.5) if regular else None)
            ends.append(tuple(pair))
        return ends

    def unit_densities(self, surface):
        """2 pi i on the k-th b-arc, zero elsewhere."""
        def build():
            return [CycleDensity.constant(surface.contour, two_pi_i(), arcs=[k], name=f'b{index}')
                    for index, k in enumerate(surface.basis.b_arcs)]
        return surface.cached(('unit_densities', mp.prec), build)

    def weight_constants(self, surface, density):
        """c_rho: the Abel-type image of psi_rho."""
        integrals = surface_service.cycle_integrals(surface, self.log_ratio_density(surface, density))
        return [value / two_pi_i() for value in integrals]

    # divisors

    def solve_index(self, surface, density, n):
        def build():
            g = surface.genus
            if g == 0:
                return DivisorSolution(n, [], True, [], [], [], mp.mpf(0), ([], []))
            B = surface.period_matrix
            c_rho = self.weight_constants(surface, density)
            c = [c_rho[i] + n * (surface.omega[i] + sum((B[i, k] * surface.tau[k] for k in range(g)), mp.mpc(0)))
                 for i in range(g)]
            divisor, unique = surface_service.jacobi_invert(surface, c)
            points = [surface_service.abel_map(surface, p) for p in divisor]
            base = [surface_service.abel_map(surface, p) for p in surface.base_divisor]
            images = [sum((v[i] for v in points), mp.mpc(0)) - sum((v[i] for v in base), mp.mpc(0))
                      for i in range(g)]
            x_n, y_n = surface_service.decompose(surface, images)
            x_rho, y_rho = surface_service.decompose(surface, c_rho)
            j_real = [x_rho[i] + n * surface.omega[i] - x_n[i] for i in range(g)]
            m_real = [y_rho[i] + n * surface.tau[i] - y_n[i] for i in range(g)]
            j = [int(mp.nint(v)) for v in j_real]
            m = [int(mp.nint(v)) for v in m_real]
            residual = max(abs(v - mp.nint(v)) for v in j_real + m_real)
            K = surface.riemann_constants
            if unique:
                numerators = [[sum((v[i] for v in points), mp.mpc(0)) + K[i] for i in range(g)]]
                denominators = [[sum((v[i] for v in base), mp.mpc(0)) + K[i] for i in range(g)]]
            else:
                probe = surface_service.abel_map(surface, SurfacePoint(surface_service.probe_point(surface.contour), 1))
                offset = [(g - 1) * probe[i] + K[i] for i in range(g)]
                numerators = [[v[i] + offset[i] for i in range(g)] for v in points]
                denominators = [[v[i] + offset[i] for i in range(g)] for v in base]
            logger.info(f'n={n}: divisor {divisor}, m={m}, residual {mp.nstr(residual, 5)}')
            return DivisorSolution(n, divisor, unique, images, j, m, residual, (numerators, denominators))
        return surface.cached(('divisor', id(density), n, mp.prec), build)

    def _theta_ratio(self, surface, solution, image):
        numerators, denominators = solution.shift
        value = mp.mpc(1)
        for shift in numerators:
            value *= surface_service.theta(surface, [u - s for u, s in zip(image, shift)])
        for shift in denominators:
            value /= surface_service.theta(surface, [u - s for u, s in zip(image, shift)])
        return value

    def _coefficients(self, surface, solution):
        return [solution.m[k] - solution.n * surface.tau[k] for k in range(surface.genus)]

    def szego_value(self, surface, density, solution, point):
        """S_n(point) for the index of `solution`."""
        log_value = -surface_service.cauchy_kernel(surface, self.log_ratio_density(surface, density), point)
        for coefficient, unit in zip(self._coefficients(surface, solution), self.unit_densities(surface)):
            log_value += coefficient * surface_service.cauchy_kernel(surface, unit, point)
        if not surface.genus:
            return mp.exp(log_value)
        return mp.exp(log_value) * self._theta_ratio(surface, solution, surface_service.abel_map(surface, point))

    def evaluate(self, surface, density, data, z, sheet=0):
        point = SurfacePoint(z, sheet)
        return self.szego_value(surface, density, data.current, point)

    @measure_latency('surface.szego')
    def szego(self, surface, density, n, epsilon=None):
        g = surface.genus
        if g > self.genus_cap:
            raise GenusCapExceeded('Szego functions are limited to small genus', genus=g, cap=self.genus_cap)
        epsilon = epsilon or self.epsilon
        contour = surface.contour
        current = self.solve_index(surface, density, n)
        previous = self.solve_index(surface, density, n - 1) if n >= 1 else None
        scale = contour.capacity * contour.xi
        s_infinity, gamma = None, None
        if SurfacePoint.infinity(0) not in current.divisor:
            s_infinity = self.szego_value(surface, density, current, SurfacePoint.infinity(0))
            gamma = scale ** n / s_infinity
        s_previous, gamma_star = None, None
        if previous is not None and SurfacePoint.infinity(1) not in previous.divisor:
            s_previous = self.szego_value(surface, density, previous, SurfacePoint.infinity(1))
            gamma_star = scale ** (n + 1) / s_previous
        return SzegoData(n, current, previous, gamma, gamma_star, s_infinity, s_previous,
                         self.in_n_epsilon(current, previous, epsilon), epsilon)

    def in_n_epsilon(self, current, previous, epsilon):
        """Whether the sheet-0 points of D_n and the sheet-1 points of D_(n-1) stay within 1/epsilon."""
        radius = 1 / mp.mpf(epsilon)

        def clear(solution, sheet):
            return all(p.sheet != sheet or (not p.is_infinity and abs(p.z) <= radius) for p in solution.divisor)
        return clear(current, 0) and (previous is None or clear(previous, 1))

    # diagnostics

    def boundary_value(self, surface, density, solution, k, chord, t, side, sheet):
        """(S_n Phi^n) at t on cut arc k approached from `side` on `sheet`."""
        contour = surface.contour
        a, b = contour.cut_arcs[k].chord(chord)
        log_value = -surface_service.cauchy_boundary(surface, self.log_ratio_density(surface, density),
                                                     k, chord, t, side, sheet)
        for coefficient, unit in zip(self._coefficients(surface, solution), self.unit_densities(surface)):
            log_value += coefficient * surface_service.cauchy_boundary(surface, unit, k, chord, t, side, sheet)
        log_value += solution.n * contour_service.log_phi_boundary(contour, t, b - a, side, sheet)
        value = mp.exp(log_value)
        if surface.genus:
            image = surface_service.abel_boundary(surface, t, b - a, side, sheet)
            value *= self._theta_ratio(surface, solution, image)
        return value

    def boundary_sites(self, contour, samples):
        sites = []
        for k, arc in enumerate(contour.cut_arcs):
            for i in range(arc.chord_count):
                a, b = arc.chord(i)
                sites.append((k, i, (a + b) / 2))
        if len(sites) <= samples:
            return sites
        return [sites[int(i)] for i in np.linspace(0, len(sites) - 1, samples).round()]

    @measure_latency('surface.jump_check')
    def jump_residual(self, surface, density, solution, samples=None):
        """max relative defect of (S_n Phi^n)(1, t-) = (rho / h+)(t) (S_n Phi^n)(0, t+)."""
        contour = surface.contour
        sign = contour_service.branch_sign(contour)
        worst = mp.mpf(0)
        for k, chord, t in self.boundary_sites(contour, samples or self.jump_samples):
            minus = self.boundary_value(surface, density, solution, k, chord, t, -1, 1)
            plus = self.boundary_value(surface, density, solution, k, chord, t, 1, 0)
            ratio = density.chord_function(k, chord)(t) / \
                (sign * contour.frame(k, 1).chord_function(contour.h, chord)(t))
            worst = max(worst, abs(minus - ratio * plus) / abs(ratio * plus))
        return worst

    def endpoint_exponents(self, surface, density, solution):
        """Observed against expected local exponents of |S_n| at the univalent ends, on both sheets."""
        contour = surface.contour
        alphas = germ_service.exponent_vector(density.germ, contour) if density.germ.kind in POWER_KINDS \
            else [mp.mpf(0)] * len(contour.points)
        radii = (mp.mpf('1e-3') * contour.diameter, mp.mpf('1e-4') * contour.diameter)
        rows = []
        for index in range(contour.n_a):
            a = contour.points[index]
            k = contour.incident_arcs(index)[0]
            points = contour.cut_arcs[k].points
            neighbour = points[1] if points[0] == a else points[-2]
            away = (a - neighbour) / abs(a - neighbour)
            multiplicity = sum(1 for p in solution.divisor if not p.is_infinity and p.z == a)
            for sheet in (0, 1):
                expected = mp.mpf(multiplicity) / 2 - (-1) ** sheet * (1 + 2 * alphas[index]) / 4
                try:
                    values = [abs(self.szego_value(surface, density, solution, SurfacePoint(a + r * away, sheet)))
                              for r in radii]
                except NsxError as e:
                    logger.debug(f'endpoint exponent at {mp.nstr(a, 6)} skipped: {e}')
                    continue
                observed = mp.log(values[0] / values[1]) / mp.log(radii[0] / radii[1])
                rows.append({'end': a, 'sheet': sheet, 'observed': observed, 'expected': expected})
        return rows

    def ratio_bound(self, surface, density, data, probes=None):
        """max over probe points of |S_(n-1)/S_n| |S_n(inf0)/S_(n-1)(inf1)|."""
        if data.previous is None or data.s_infinity is None or data.s_previous_infinity is None:
            return None
        contour = surface.contour
        if probes is None:
            center = sum(contour.points) / len(contour.points)
            probes = [SurfacePoint(center + mp.mpf(1.5) * contour.diameter * mp.expj(2 * mp.pi * k / 8 + mp.mpf(0.2)), s)
                      for k in range(8) for s in (0, 1)]
        factor = abs(data.s_infinity / data.s_previous_infinity)
        worst = mp.mpf(0)
        for point in probes:
            near = [p for p in data.divisor + data.previous.divisor
                    if not p.is_infinity and abs(p.z - point.z) < mp.mpf(0.05) * contour.diameter]
            if near:
                continue
            ratio = self.szego_value(surface, density, data.previous, point) / \
                self.szego_value(surface, density, data.current, point)
            worst = max(worst, abs(ratio) * factor)
        return worst

    def divisor_diagnostics(self, history, genus):
        """Blocks of consecutive special indices and shared points of consecutive divisors."""
        ordered = sorted(history, key=lambda data: data.n)
        blocks, run = [], []
        for data in ordered:
            if not data.unique:
                if run and run[-1] != data.n - 1:
                    blocks.append(run)
                    run = []
                run.append(data.n)
            elif run:
                blocks.append(run)
                run = []
        if run:
            blocks.append(run)
        tolerance = mp.mpf(Config.SPECIAL_DIVISOR_TOL)
        shared = []
        for before, after in zip(ordered, ordered[1:]):
            if after.n != before.n + 1 or not (before.unique and after.unique):
                continue
            for p in before.divisor:
                for q in after.divisor:
                    same = p.sheet == q.sheet and (
                        (p.is_infinity and q.is_infinity) or
                        (not p.is_infinity and not q.is_infinity and abs(p.z - q.z) < tolerance))
                    if same:
                        shared.append((before.n, after.n))
        longest = max((len(block) for block in blocks), default=0)
        return {
            'special_blocks': blocks,
            'longest_block': longest,
            'block_bound_holds': longest <= max(genus - 1, 0),
            'shared_points': shared
        }


szego_service = SzegoService()
