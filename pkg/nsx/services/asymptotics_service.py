import numpy as np
from mpmath import mp
from sklearn.linear_model import HuberRegressor

from nsx.config import Config
from nsx.models.report import ComparisonRecord, ComparisonReport, ZeroClassification
from nsx.models.surface import SurfacePoint
from nsx.services.contour_service import contour_service
from nsx.services.germ_service import germ_service
from nsx.services.pade_service import pade_service
from nsx.services.surface_service import surface_service
from nsx.services.szego_service import szego_service
from nsx.utils.errors import TooCloseToDivisor, UnderflowMasked, ValidationError
from nsx.utils.latency_monitor import measure_latency
from nsx.utils.logger import logger


def huber_fit(x, y):
    """Robust (slope, intercept) of y against x; the first quarter of the points counts a quarter."""
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    y = np.asarray(y, dtype=float)
    if len(y) < 3:
        raise ValidationError('a decay fit needs at least three points', points=len(y))
    weights = np.ones(len(y))
    weights[:len(y) // 4] = 0.25
    model = HuberRegressor(epsilon=1.35, alpha=0.0, max_iter=1000).fit(x, y, sample_weight=weights)
    return float(model.coef_[0]), float(model.intercept_)


class AsymptoticsService:
    def __init__(self, tube_width=None, epsilon=None, boundary_samples=6):
        self.tube_width = tube_width or Config.TUBE_WIDTH
        self.epsilon = epsilon or Config.EPSILON
        self.boundary_samples = boundary_samples

    def circle_grid(self, radius=2, count=16, center=0):
        return [mp.mpc(center) + mp.mpf(radius) * mp.expj(2 * mp.pi * (k + mp.mpf('0.25')) / count)
                for k in range(count)]

    def near_obstacles(self, surface, z, width=None):
        """Whether z is within the tube around the contour or an a-path."""
        width = (width or self.tube_width) * float(surface.contour.diameter)
        return surface_service.near_obstacle(surface.contour, z, width)

    def _check_divisor(self, surface, data, z, sheet):
        radius = self.tube_width * surface.contour.diameter
        for p in data.divisor:
            if p.sheet == sheet and not p.is_infinity and abs(p.z - z) < radius:
                raise TooCloseToDivisor('point inside a divisor ball', z=complex(z), sheet=sheet)

    def predict_strong(self, surface, density, data, z):
        """Leading terms gamma_n S_n Phi^n and gamma_n h S_n(z on sheet 1) / Phi^n."""
        contour = surface.contour
        z = mp.mpc(z)
        if data.gamma is None:
            raise TooCloseToDivisor('the divisor meets infinity on the first sheet', n=data.n)
        self._check_divisor(surface, data, z, 0)
        self._check_divisor(surface, data, z, 1)
        phi = contour_service.phi_value(contour, z, 0, rotated=False)
        h = contour_service.branch_sign(contour) * contour.h.value(z)
        q_hat = data.gamma * szego_service.szego_value(surface, density, data.current, SurfacePoint(z, 0)) * phi ** data.n
        r_hat = data.gamma * h * szego_service.szego_value(surface, density, data.current, SurfacePoint(z, 1)) / phi ** data.n
        return q_hat, r_hat

    def boundary_deviation(self, surface, density, data, triple):
        """max relative defect of q_n = gamma_n ((S_n Phi^n)+ + (S_n Phi^n)-) at interior arc samples."""
        worst = mp.mpf(0)
        for k, chord, t in szego_service.boundary_sites(surface.contour, self.boundary_samples):
            plus = szego_service.boundary_value(surface, density, data.current, k, chord, t, 1, 0)
            minus = szego_service.boundary_value(surface, density, data.current, k, chord, t, -1, 0)
            predicted = data.gamma * (plus + minus)
            scale = abs(data.gamma) * (abs(plus) + abs(minus))
            worst = max(worst, abs(triple.q(t) - predicted) / scale)
        return worst

    @measure_latency('asymptotics.compare')
    def compare_run(self, germ, contour, surface, density, triples, n_list, grid=None, epsilon=None,
                    boundary=True):
        if contour.n_a < 2:
            raise ValidationError('comparison needs a contour with at least two endpoints')
        epsilon = epsilon or self.epsilon
        grid = grid if grid is not None else self.circle_grid()
        report = ComparisonReport(surface.genus, epsilon)
        logger.info(f'Comparing {len(n_list)} indices on {len(grid)} points')
        for n in n_list:
            triple = triples[n]
            data = szego_service.szego(surface, density, n, epsilon)
            report.n_epsilon[n] = data.in_n_epsilon
            report.zeros[n] = self.classify_zeros(triple.q, contour, data)
            if data.gamma is None:
                logger.warning(f'n={n}: no prediction, divisor contains infinity on the first sheet')
                continue
            for z in grid:
                if self.near_obstacles(surface, z):
                    report.excluded += 1
                    continue
                try:
                    q_hat, r_hat = self.predict_strong(surface, density, data, z)
                except TooCloseToDivisor:
                    report.excluded += 1
                    continue
                with mp.workprec(max(mp.prec, triple.precision_bits)):
                    q = triple.q(z)
                    remainder = q * germ_service.germ_value(germ, contour, z) - triple.p(z)
                report.records.append(ComparisonRecord(n, z, +q, q_hat, +remainder, r_hat))
            if boundary:
                report.boundary[n] = self.boundary_deviation(surface, density, data, triple)
            logger.debug(f'n={n}: max deviation {mp.nstr(report.max_deviation(n) or 0, 5)}')
        deviations = {n: v for n, v in report.deviations_by_n().items() if v is not None and v > 0}
        if len(deviations) >= 3:
            ns = sorted(deviations)
            slope, _ = huber_fit(np.log(ns), [float(mp.log(deviations[n])) for n in ns])
            report.fits['decay_exponent'] = -slope
            report.fits['decay_constant'] = max(float(deviations[n] * n) for n in ns)
        return report

    @measure_latency('asymptotics.weak')
    def weak_asymptotics_check(self, triples, contour, z_samples, n_min=1):
        """Per n, max over samples of |(1/n) log|q_n(z)| - (g(z) + log cp)|."""
        result = {}
        diameter = contour.diameter
        for n in sorted(triples):
            if n < max(n_min, 1):
                continue
            triple = triples[n]
            zeros = triple.q.roots() if triple.q.degree > 0 else []
            spurious = [w for w in zeros
                        if contour.branch_set.distance_to_cuts(complex(w)) >= self.tube_width * float(diameter)]
            worst = None
            for z in z_samples:
                z = mp.mpc(z)
                if any(abs(z - w) < self.tube_width * diameter for w in spurious):
                    continue
                expected = contour_service.green_value(contour, z) + contour.log_capacity
                deviation = abs(mp.log(abs(triple.q(z))) / n - expected)
                worst = deviation if worst is None else max(worst, deviation)
            if worst is not None:
                result[n] = worst
        return result

    def log_errors(self, germ, triples, contour, z, ns):
        errors = []
        for n in ns:
            triple = triples[n]
            with mp.workprec(max(mp.prec, triple.precision_bits)):
                f = germ_service.germ_value(germ, contour, z)
                error = abs(f - triple.evaluate(z))
                floor = abs(f) * mp.mpf(2) ** (16 - mp.prec)
                if error <= floor:
                    raise UnderflowMasked('Pade error below the precision floor; raise precision',
                                          n=n, bits=mp.prec)
                errors.append(float(mp.log(error)))
        return errors

    def scaled_run(self, germ, triples, factor=2):
        """factor*f with its Pade triples solved again from its own moments."""
        scaled = germ.scaled(factor)
        ns = sorted(triples)
        exact = all(triples[n].exact for n in ns)
        moments = germ_service.moments(scaled, 2 * ns[-1] + 1, exact=exact)
        return scaled, {n: pade_service.solve_pade(moments, n) for n in ns}

    @measure_latency('asymptotics.error_rate')
    def error_rate_check(self, germ, triples, contour, z):
        """Fitted slope of log|f - [n/n]| against n compared with -2 g(z)."""
        z = mp.mpc(z)
        ns = sorted(n for n in triples if n >= 1)
        if len(ns) < 8:
            raise ValidationError('the error-rate fit needs at least eight indices', count=len(ns))
        slope, _ = huber_fit(ns, self.log_errors(germ, triples, contour, z, ns))
        scaled_germ, scaled_triples = self.scaled_run(germ, {n: triples[n] for n in ns})
        scaled, _ = huber_fit(ns, self.log_errors(scaled_germ, scaled_triples, contour, z, ns))
        expected = -2 * float(contour_service.green_value(contour, z))
        logger.info(f'error rate at {mp.nstr(z, 6)}: slope {slope:.6f}, expected {expected:.6f}')
        return {
            'z': [float(mp.re(z)), float(mp.im(z))],
            'slope': slope,
            'expected': expected,
            'relative_error': abs(slope - expected) / abs(expected),
            'scaled_slope': scaled,
            'scaling_residual': abs(scaled - slope) / abs(slope)
        }

    def classify_zeros(self, q, contour, data=None, tube=None):
        """(on_contour, spurious, matched) for the zeros of q."""
        n = q.degree
        if n <= 0:
            return ZeroClassification(max(n, 0), [], [], [])
        width = (tube or self.tube_width) * float(contour.diameter)
        on_contour, spurious = [], []
        for w in q.roots():
            (on_contour if contour.branch_set.distance_to_cuts(complex(w)) < width else spurious).append(w)
        matched = []
        candidates = [p for p in (data.divisor if data is not None else []) if p.sheet == 0 and not p.is_infinity]
        for w in spurious:
            if candidates:
                point = min(candidates, key=lambda p: abs(p.z - w))
                matched.append((w, point, abs(point.z - w)))
        return ZeroClassification(n, on_contour, spurious, matched)

    def zero_accounting(self, report):
        """Per n: fraction of zeros in the tube against the bound 1 - g/n."""
        rows = {}
        for n, zeros in report.zeros.items():
            bound = 1 - report.genus / n if n else 1
            rows[n] = {'fraction': zeros.contour_fraction, 'bound': bound,
                       'holds': zeros.contour_fraction >= bound - 1e-12}
        return rows


asymptotics_service = AsymptoticsService()
