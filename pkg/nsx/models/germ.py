from fractions import Fraction

from mpmath import mp

from nsx.models.mp_types import BigComplex, to_mpc
from nsx.utils.errors import UnsupportedKind, ValidationError

POWER_KINDS = ('two-point-sqrt', 'product-power', 'hyperelliptic-reciprocal', 'root-product')
LOG_KINDS = ('log-ratio',)
ORACLE_KINDS = ('rational',)
KINDS = POWER_KINDS + LOG_KINDS + ORACLE_KINDS


def as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value).limit_denominator(10 ** 6)


class Germ:
    def __init__(self, kind, branch_points, exponents=None, normalization=1):
        if kind not in KINDS:
            raise UnsupportedKind(f'unknown germ kind {kind}', kind=kind)
        self.kind = kind
        self.branch_points = tuple(
            p if isinstance(p, BigComplex) else BigComplex.from_value(to_mpc(p)) for p in branch_points
        )
        self.normalization = normalization if isinstance(normalization, BigComplex) \
            else BigComplex.from_value(to_mpc(normalization))
        self.exponents = self._default_exponents(exponents)
        self._validate()

    def _default_exponents(self, exponents):
        count = len(self.branch_points)
        if self.kind in ('two-point-sqrt', 'hyperelliptic-reciprocal'):
            return tuple(Fraction(-1, 2) for _ in range(count))
        if self.kind == 'log-ratio' and exponents is None and count == 2:
            return (Fraction(1), Fraction(-1))
        if exponents is None:
            raise ValidationError(f'{self.kind} germ needs exponents', kind=self.kind)
        if len(exponents) != count:
            raise ValidationError('one exponent per branch point is required',
                                  points=count, exponents=len(exponents))
        if self.kind == 'rational':
            return tuple(to_mpc(e) for e in exponents)
        return tuple(as_fraction(e) for e in exponents)

    def _validate(self):
        points = [p.value for p in self.branch_points]
        if len(points) < 2 and self.kind != 'rational':
            raise ValidationError('a germ needs at least two branch points', count=len(points))
        for i in range(len(points)):
            for j in range(i):
                if points[i] == points[j]:
                    raise ValidationError('branch points must be distinct', index=i)
        if self.kind == 'two-point-sqrt' and len(points) != 2:
            raise ValidationError('two-point-sqrt germ takes exactly two points', count=len(points))
        if self.kind == 'hyperelliptic-reciprocal' and len(points) % 2:
            raise ValidationError('hyperelliptic-reciprocal germ needs an even number of points',
                                  count=len(points))
        if self.kind in POWER_KINDS:
            total = sum(self.exponents)
            if self.kind == 'product-power' and total != 0:
                raise ValidationError('product-power exponents must sum to zero', total=str(total))
            if total.denominator != 1:
                raise ValidationError('exponents must sum to an integer', total=str(total))
            for alpha in self.exponents:
                if alpha.denominator == 1:
                    raise ValidationError('integer exponent is not a branch point', exponent=str(alpha))
                if alpha <= -1:
                    raise ValidationError('exponents must exceed -1', exponent=str(alpha))
            for alpha, reduced in zip(self.exponents, self.reduced_exponents()):
                if not -1 < reduced < 0:
                    raise ValidationError('reduced exponent outside (-1, 0)', exponent=str(alpha),
                                          reduced=str(reduced))
        if self.kind in LOG_KINDS:
            if sum(self.exponents) != 0:
                raise ValidationError('log weights must sum to zero', total=str(sum(self.exponents)))

    def scaled(self, factor):
        return Germ(self.kind, self.branch_points, list(self.exponents), self.normalization.value * factor)

    @property
    def points(self):
        return [p.value for p in self.branch_points]

    @property
    def is_log_type(self):
        return self.kind in LOG_KINDS

    @property
    def degree_at_infinity(self):
        """Integer s with M(z) ~ z**s for the multiplicative part."""
        if self.kind not in POWER_KINDS:
            return 0
        return int(sum(self.exponents))

    def reduced_exponents(self):
        return [alpha - (alpha.numerator // alpha.denominator) - 1 for alpha in self.exponents] \
            if self.kind in POWER_KINDS else [Fraction(0) for _ in self.exponents]

    def mp_exponents(self):
        if self.kind == 'rational':
            return list(self.exponents)
        return [mp.mpf(e.numerator) / e.denominator for e in self.exponents]

    def is_rational_data(self):
        if self.kind == 'rational':
            return False
        for p in self.branch_points:
            if p.im != 0:
                return False
        return all(mp.isint(p.re * 2 ** 40) for p in self.branch_points)

    def to_dict(self, digits=30):
        exponents = [BigComplex.from_value(e).to_pair(digits) for e in self.exponents] \
            if self.kind == 'rational' else [str(e) for e in self.exponents]
        return {
            'kind': self.kind,
            'branch_points': [p.to_pair(digits) for p in self.branch_points],
            'exponents': exponents,
            'normalization': self.normalization.to_pair(digits)
        }


class WeightDensity:
    """Jump of a germ across every arc of a contour, as + side boundary evaluators."""

    def __init__(self, germ, contour, product, jump_factors, end_exponents):
        self.germ = germ
        self.contour = contour
        self.product = product
        self.jump_factors = tuple(jump_factors)
        self.end_exponents = tuple(end_exponents)

    @property
    def arc_count(self):
        return len(self.jump_factors)

    def chord_function(self, arc_index, chord):
        frame = self.contour.frame(arc_index, 1)
        factor = self.jump_factors[arc_index]
        if self.germ.is_log_type:
            return lambda t: factor
        product = self.product

        def evaluate(t):
            return factor * product.from_logs(frame.logs_at(t, chord))
        return evaluate

    def value(self, arc_index, t, chord=None):
        if chord is None:
            chord = self.contour.locate_chord(arc_index, t)
        return self.chord_function(arc_index, chord)(t)

    def log_chord_function(self, arc_index, chord):
        """Continuous log of rho along the arc; principal at the first reference point."""
        frame = self.contour.frame(arc_index, 1)
        factor = self.jump_factors[arc_index]
        if self.germ.is_log_type:
            constant = mp.log(factor)
            return lambda t: constant
        product = self.product
        base = mp.log(factor) + product.log_from_logs(frame.logs[0])
        shift = mp.log(factor * product.from_logs(frame.logs[0])) - base

        def evaluate(t):
            return mp.log(factor) + product.log_from_logs(frame.logs_at(t, chord)) + shift
        return evaluate
