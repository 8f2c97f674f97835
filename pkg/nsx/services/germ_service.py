from fractions import Fraction

from mpmath import mp

from nsx.models.germ import LOG_KINDS, POWER_KINDS, WeightDensity
from nsx.models.mp_types import to_mpc
from nsx.services.mpcore_service import PowerProduct, laurent_coefficients, mpcore_service, two_pi_i
from nsx.utils.errors import (
    OrientationMismatch, TooCloseToContour, UnsupportedKind, ValidationError
)
from nsx.utils.latency_monitor import measure_latency
from nsx.utils.logger import logger


def dyadic_fraction(value):
    """Exact Fraction of a finite mpf; the mantissa of _mpf_ is unsigned."""
    sign, man, exp, _ = mp.mpf(value)._mpf_
    if not man:
        return Fraction(0)
    return (-1) ** sign * Fraction(man) * Fraction(2) ** exp


class GermService:
    def __init__(self, contour_clearance=1e-6):
        self.contour_clearance = contour_clearance

    @measure_latency('germs.moments')
    def moments(self, germ, count, exact=False):
        if count < 1:
            raise ValidationError('moment count must be positive', count=count)
        logger.info(f'Moments: kind={germ.kind} count={count}')
        if exact:
            fractions = self.exact_moments(germ, count)
            if fractions is not None:
                return fractions
        if germ.kind in POWER_KINDS:
            s = germ.degree_at_infinity
            coeffs = laurent_coefficients(germ.points, germ.mp_exponents(), max(count + s, 0))
            c = germ.normalization.value
            return [c * coeffs[k + s] if k + s >= 0 else mp.mpc(0) for k in range(1, count + 1)]
        if germ.kind in LOG_KINDS:
            c = germ.normalization.value
            weights = germ.mp_exponents()
            return [-c * sum((b * a ** k for a, b in zip(germ.points, weights)), mp.mpc(0)) / k
                    for k in range(1, count + 1)]
        if germ.kind == 'rational':
            c = germ.normalization.value
            return [c * sum((r * a ** (k - 1) for a, r in zip(germ.points, germ.exponents)), mp.mpc(0))
                    for k in range(1, count + 1)]
        raise UnsupportedKind(f'no series generator for {germ.kind}', kind=germ.kind)

    def exact_moments(self, germ, count):
        """Moments as Fractions when every input is real and rational, else None."""
        if not germ.is_rational_data() or germ.normalization.value.imag != 0:
            return None
        points = [dyadic_fraction(p.real) for p in germ.points]
        c = dyadic_fraction(germ.normalization.value.real)
        if germ.kind in LOG_KINDS:
            return [-c * sum(b * a ** k for a, b in zip(points, germ.exponents)) / k
                    for k in range(1, count + 1)]
        s = germ.degree_at_infinity
        size = max(count + s, 0)
        sums = [sum(e * a ** k for a, e in zip(points, germ.exponents)) for k in range(1, size + 1)]
        coeffs = [Fraction(1)]
        for n in range(1, size + 1):
            coeffs.append(-sum(sums[k - 1] * coeffs[n - k] for k in range(1, n + 1)) / n)
        return [c * coeffs[k + s] if k + s >= 0 else Fraction(0) for k in range(1, count + 1)]

    def exponent_vector(self, germ, contour):
        """Germ exponents laid out over the contour's branch-set points."""
        vector = [mp.mpf(0)] * len(contour.points)
        tolerance = contour.diameter * 1e-8
        for point, alpha in zip(germ.points, germ.mp_exponents()):
            index = contour.index_of(point, tolerance)
            if index is None or index >= contour.n_a:
                raise ValidationError('germ branch point is not an endpoint of the contour',
                                      point=complex(point))
            vector[index] = alpha
        return vector

    def multiplicative_part(self, germ, contour):
        return PowerProduct(contour.branch_set, self.exponent_vector(germ, contour),
                            germ.normalization.value)

    def germ_value(self, germ, contour, z):
        """Single-valued branch of the germ at z off the contour."""
        z = to_mpc(z)
        if germ.kind == 'rational':
            return germ.normalization.value * sum((r / (z - a) for a, r in zip(germ.points, germ.exponents)),
                                                  mp.mpc(0))
        exponents = self.exponent_vector(germ, contour)
        logs = contour.branch_set.global_logs(z)
        c = germ.normalization.value
        if germ.is_log_type:
            return c * sum((b * log for b, log in zip(exponents, logs) if b), mp.mpc(0))
        value = mp.exp(sum((e * log for e, log in zip(exponents, logs) if e), mp.mpc(0)))
        s = germ.degree_at_infinity
        if s >= 0:
            coeffs = laurent_coefficients(germ.points, germ.mp_exponents(), s)
            value -= sum((coeffs[n] * z ** (s - n) for n in range(s + 1)), mp.mpc(0))
        return c * value

    def check_orientation(self, contour):
        for index in range(contour.n_a, contour.n_a + contour.n_b):
            directions = set()
            for start, stop in contour.arc_ends:
                if start == index:
                    directions.add('away')
                if stop == index:
                    directions.add('toward')
            if len(directions) > 1:
                raise OrientationMismatch('arcs at a trivalent end are not all toward or all away',
                                          end=complex(contour.points[index]))

    @measure_latency('germs.jump_density')
    def jump_density(self, germ, contour):
        if germ.kind not in POWER_KINDS + LOG_KINDS:
            raise UnsupportedKind(f'{germ.kind} germ has no jump on a contour', kind=germ.kind)
        self.check_orientation(contour)
        exponents = self.exponent_vector(germ, contour)
        product = PowerProduct(contour.branch_set, exponents, germ.normalization.value)
        factors = []
        for k in range(len(contour.arc_ends)):
            beyond = contour.branch_set.beyond[k]
            total = sum((exponents[j] for j in beyond), mp.mpf(0))
            if germ.is_log_type:
                factors.append(two_pi_i() * germ.normalization.value * total)
            else:
                factors.append(1 - mp.exp(two_pi_i() * total) ** -1)
        end_exponents = []
        for start, stop in contour.arc_ends:
            pair = []
            for index in (start, stop):
                pair.append(0 if germ.is_log_type or index >= contour.n_a else exponents[index])
            end_exponents.append(tuple(pair))
        logger.info(f'Jump density: kind={germ.kind} arcs={len(factors)}')
        return WeightDensity(germ, contour, product, factors, end_exponents)

    def integrate_density(self, density, weight=None, tol=None):
        """Sum over arcs of the integral of weight(t)*rho(t) dt."""
        total = mp.mpc(0)
        for k, arc in enumerate(density.contour.cut_arcs):
            def chord_integrand(i, k=k):
                rho = density.chord_function(k, i)
                if weight is None:
                    return rho
                return lambda t: weight(t) * rho(t)
            total += mpcore_service.arc_quadrature(arc, chord_integrand, density.end_exponents[k],
                                                   tol, chordwise=True)
        return total

    @measure_latency('germs.cauchy_transform')
    def cauchy_transform(self, density, z, tol=None):
        z = to_mpc(z)
        contour = density.contour
        if contour.branch_set.distance_to_cuts(complex(z)) < self.contour_clearance * contour.diameter:
            raise TooCloseToContour('evaluation point is too close to the contour', z=complex(z))
        return self.integrate_density(density, lambda t: 1 / (t - z), tol) / two_pi_i()

    def trivalent_sums(self, density):
        """Sum of the three jump values continued to each trivalent end."""
        contour = density.contour
        sums = []
        for index in range(contour.n_a, contour.n_a + contour.n_b):
            total = mp.mpc(0)
            for k, (start, stop) in enumerate(contour.arc_ends):
                arc = contour.cut_arcs[k]
                if start == index:
                    total += density.chord_function(k, 0)(contour.points[index])
                elif stop == index:
                    total += density.chord_function(k, arc.chord_count - 1)(contour.points[index])
            sums.append(total)
        return sums


germ_service = GermService()
