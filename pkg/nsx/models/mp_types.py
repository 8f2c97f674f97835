import numpy as np
from mpmath import mp

from nsx.utils.errors import ValidationError
from nsx.utils.numformat import format_real

MIN_PRECISION = 64


def to_mpc(value):
    if isinstance(value, BigComplex):
        return value.value
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return mp.mpc(value[0], value[1])
    return mp.mpc(value)


class BigComplex:
    __slots__ = ('re', 'im', 'precision')

    def __init__(self, re, im=0, precision=None):
        precision = int(precision or mp.prec)
        if precision < MIN_PRECISION:
            raise ValidationError('precision below 64 bits', precision=precision)
        with mp.workprec(precision):
            value = mp.mpc(re) + mp.mpc(0, 1) * mp.mpc(im)
            object.__setattr__(self, 're', +value.real)
            object.__setattr__(self, 'im', +value.imag)
        object.__setattr__(self, 'precision', precision)

    def __setattr__(self, name, value):
        raise AttributeError('BigComplex is immutable')

    @classmethod
    def from_value(cls, value, precision=None):
        value = to_mpc(value)
        return cls(value.real, value.imag, precision)

    @classmethod
    def from_pair(cls, pair, precision=None):
        return cls(mp.mpf(str(pair[0])), mp.mpf(str(pair[1])), precision)

    @property
    def value(self):
        return mp.mpc(self.re, self.im)

    def _coerce(self, other):
        if isinstance(other, BigComplex):
            return other.value, min(self.precision, other.precision)
        return to_mpc(other), self.precision

    def _apply(self, other, op):
        other_value, precision = self._coerce(other)
        with mp.workprec(precision):
            return BigComplex.from_value(op(self.value, other_value), precision)

    def __add__(self, other):
        return self._apply(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._apply(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return self._apply(other, lambda x, y: y - x)

    def __mul__(self, other):
        return self._apply(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._apply(other, lambda x, y: x / y)

    def __rtruediv__(self, other):
        return self._apply(other, lambda x, y: y / x)

    def __neg__(self):
        return BigComplex(-self.re, -self.im, self.precision)

    def __abs__(self):
        with mp.workprec(self.precision):
            return mp.hypot(self.re, self.im)

    def conjugate(self):
        return BigComplex(self.re, -self.im, self.precision)

    def __eq__(self, other):
        if not isinstance(other, BigComplex):
            try:
                other = BigComplex.from_value(other, self.precision)
            except (TypeError, ValueError):
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(self.value)

    def __repr__(self):
        return f'BigComplex({mp.nstr(self.re, 15)}, {mp.nstr(self.im, 15)}, precision={self.precision})'

    def to_pair(self, digits=30):
        return [format_real(self.re, digits), format_real(self.im, digits)]


class Poly:
    def __init__(self, coefficients):
        coeffs = [to_mpc(c) for c in coefficients]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients = tuple(coeffs) if coeffs else (mp.mpc(0),)

    @classmethod
    def from_roots(cls, roots):
        coeffs = [mp.mpc(1)]
        for root in roots:
            root = to_mpc(root)
            shifted = [mp.mpc(0)] + coeffs
            for i in range(len(coeffs)):
                shifted[i] -= root * coeffs[i]
            coeffs = shifted
        return cls(coeffs)

    @property
    def degree(self):
        if self.is_zero:
            return -1
        return len(self.coefficients) - 1

    @property
    def is_zero(self):
        return len(self.coefficients) == 1 and self.coefficients[0] == 0

    @property
    def leading(self):
        return self.coefficients[-1]

    @property
    def monic(self):
        return not self.is_zero and self.leading == 1

    def __call__(self, z):
        z = to_mpc(z)
        result = mp.mpc(0)
        for c in reversed(self.coefficients):
            result = result * z + c
        return result

    def derivative(self):
        if len(self.coefficients) == 1:
            return Poly([0])
        return Poly([k * c for k, c in enumerate(self.coefficients) if k > 0])

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly([other])
        size = max(len(self.coefficients), len(other.coefficients))
        a = list(self.coefficients) + [mp.mpc(0)] * (size - len(self.coefficients))
        b = list(other.coefficients) + [mp.mpc(0)] * (size - len(other.coefficients))
        return Poly([x + y for x, y in zip(a, b)])

    def __neg__(self):
        return Poly([-c for c in self.coefficients])

    def __sub__(self, other):
        other = other if isinstance(other, Poly) else Poly([other])
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            scalar = to_mpc(other)
            return Poly([scalar * c for c in self.coefficients])
        result = [mp.mpc(0)] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, x in enumerate(self.coefficients):
            for j, y in enumerate(other.coefficients):
                result[i + j] += x * y
        return Poly(result)

    __rmul__ = __mul__

    def monic_normalized(self):
        if self.is_zero:
            return self
        return self * (1 / self.leading)

    def roots(self, extraprec=None):
        if self.degree < 1:
            return []
        descending = list(reversed(self.coefficients))
        return list(mp.polyroots(descending, maxsteps=200, extraprec=extraprec or 2 * mp.prec))

    def __repr__(self):
        return 'Poly([' + ', '.join(mp.nstr(c, 8) for c in self.coefficients) + '])'

    def to_dict(self, digits=30):
        return {
            'degree': self.degree,
            'coefficients': [BigComplex.from_value(c).to_pair(digits) for c in self.coefficients]
        }


class ArcPath:
    def __init__(self, points, orientation=1, max_step=None):
        points = tuple(to_mpc(p) for p in points)
        if len(points) < 2:
            raise ValidationError('an arc needs at least two samples', samples=len(points))
        if orientation not in (1, -1):
            raise ValidationError('orientation must be +1 or -1', orientation=orientation)
        params = [mp.mpf(0)]
        for previous, current in zip(points, points[1:]):
            step = abs(current - previous)
            if step == 0:
                raise ValidationError('repeated sample on arc')
            if max_step is not None and step > max_step:
                raise ValidationError('arc samples exceed the max step', step=step, max_step=max_step)
            params.append(params[-1] + step)
        self.points = points
        self.parametrization = tuple(params)
        self.orientation = orientation
        self.array = np.array([complex(p) for p in points])

    @property
    def length(self):
        return self.parametrization[-1]

    @property
    def chord_count(self):
        return len(self.points) - 1

    def oriented_points(self):
        return self.points if self.orientation == 1 else tuple(reversed(self.points))

    @property
    def start(self):
        return self.oriented_points()[0]

    @property
    def end(self):
        return self.oriented_points()[-1]

    def reversed(self):
        return ArcPath(self.points, -self.orientation)

    def normalized(self):
        return ArcPath(self.oriented_points(), 1)

    def chord(self, index):
        points = self.oriented_points()
        return points[index], points[index + 1]

    def point_at(self, s):
        """Point at arc length s measured along the sample order."""
        s = mp.mpf(s)
        params = self.parametrization
        for i in range(len(params) - 1):
            if s <= params[i + 1] or i == len(params) - 2:
                frac = (s - params[i]) / (params[i + 1] - params[i])
                return self.points[i] + frac * (self.points[i + 1] - self.points[i]), i
        return self.points[-1], len(params) - 2

    def with_vertex(self, t, chord_index):
        points = list(self.oriented_points())
        t = to_mpc(t)
        if t == points[chord_index] or t == points[chord_index + 1]:
            return ArcPath(points, 1)
        points.insert(chord_index + 1, t)
        return ArcPath(points, 1)

    def coarsened(self, deviation, max_turn=0.2):
        """Subset of samples whose chords stay within `deviation` of the dropped samples."""
        points = self.oriented_points()
        array = np.array([complex(p) for p in points])
        keep = [0]
        anchor = 0
        i = 1
        while i < len(points) - 1:
            candidate = i + 1
            chord = array[candidate] - array[anchor]
            inner = array[anchor + 1:candidate] - array[anchor]
            dist = np.abs(np.imag(inner * np.conj(chord))) / max(abs(chord), 1e-300)
            turn = 0.0
            if len(keep) > 1:
                previous = array[anchor] - array[keep[-2]]
                turn = abs(np.angle(chord / previous))
            if dist.size and (dist.max() > deviation or turn > max_turn):
                keep.append(i)
                anchor = i
            i += 1
        keep.append(len(points) - 1)
        return ArcPath([points[k] for k in keep], 1)

    def to_rows(self, arc_id, digits=30):
        rows = []
        for s, z in zip(self.parametrization, self.points):
            rows.append({
                'arc_id': arc_id,
                's': format_real(s, digits),
                're': format_real(z.real, digits),
                'im': format_real(z.imag, digits)
            })
        return rows
