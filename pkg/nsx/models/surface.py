from mpmath import mp

from nsx.models.mp_types import Poly, to_mpc
from nsx.utils.numformat import format_complex, format_real, format_vector


class SurfacePoint:
    """Point of the two-sheeted surface; z=None stands for the point at infinity."""

    __slots__ = ('z', 'sheet')

    def __init__(self, z, sheet=0):
        object.__setattr__(self, 'z', None if z is None else to_mpc(z))
        object.__setattr__(self, 'sheet', int(sheet))

    def __setattr__(self, name, value):
        raise AttributeError('SurfacePoint is immutable')

    @classmethod
    def infinity(cls, sheet):
        return cls(None, sheet)

    @property
    def is_infinity(self):
        return self.z is None

    def involution(self):
        return SurfacePoint(self.z, 1 - self.sheet)

    def __eq__(self, other):
        return isinstance(other, SurfacePoint) and self.z == other.z and self.sheet == other.sheet

    def __hash__(self):
        return hash((None if self.z is None else complex(self.z), self.sheet))

    def __repr__(self):
        where = 'inf' if self.is_infinity else mp.nstr(self.z, 10)
        return f'SurfacePoint({where}, sheet={self.sheet})'

    def to_dict(self, digits=30):
        return {
            'z': 'infinity' if self.is_infinity else format_complex(self.z, digits),
            'sheet': self.sheet
        }


class CycleDensity:
    """A function psi on the lifted contour L, equal on both copies of every arc.

    `function(k, chord)` returns the evaluator valid on chord `chord` of arc k, and
    `end_exponents[k]` holds the local power of psi/hbar+ at both ends (None marks a
    logarithmic end).
    """

    def __init__(self, contour, function, end_exponents, arcs=None, name='psi'):
        self.contour = contour
        self.function = function
        self.end_exponents = tuple(end_exponents)
        self.arcs = tuple(range(len(contour.cut_arcs))) if arcs is None else tuple(arcs)
        self.name = name
        self._cache = {}

    @classmethod
    def constant(cls, contour, value, arcs=None, name='constant'):
        value = to_mpc(value)
        ends = [(mp.mpf(-0.5), mp.mpf(-0.5))] * len(contour.cut_arcs)
        return cls(contour, lambda k, chord: (lambda t: value), ends, arcs, name)

    @classmethod
    def from_function(cls, contour, f, name='function'):
        """psi(t) = f(t) for an f holomorphic near every arc."""
        ends = [(mp.mpf(-0.5), mp.mpf(-0.5))] * len(contour.cut_arcs)
        return cls(contour, lambda k, chord: f, ends, None, name)

    def cached(self, key, factory):
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]


class SurfaceData:
    """Period data of the surface of h over a Stahl contour.

    Rows of `coefficients` hold the polynomials l_k with dOmega_k = l_k(z) dz / hbar(z),
    normalized so that the a-periods form the identity.
    """

    def __init__(self, contour=None, basis=None, period_matrix=None, coefficients=(),
                 a_periods=None, b_periods=None, omega=(), tau=(), top_a_moments=()):
        self.contour = contour
        self.basis = basis
        self.period_matrix = period_matrix if period_matrix is not None else mp.matrix(0, 0)
        self.coefficients = [list(row) for row in coefficients]
        self.a_periods = a_periods
        self.b_periods = b_periods
        self.omega = list(omega)
        self.tau = list(tau)
        self.top_a_moments = list(top_a_moments)
        self.riemann_constants = []
        self.infinity_images = {}
        self.base_divisor = []
        self._cache = {}

    @classmethod
    def from_period_matrix(cls, matrix):
        matrix = mp.matrix(matrix)
        return cls(period_matrix=matrix)

    @property
    def genus(self):
        return self.period_matrix.rows

    def differential(self, k):
        return Poly(self.coefficients[k])

    def entry(self, j, k):
        return self.period_matrix[j, k]

    def cached(self, key, factory):
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    def to_dict(self, digits=30):
        g = self.genus
        return {
            'genus': g,
            'period_matrix': [[format_complex(self.period_matrix[j, k], digits) for k in range(g)]
                              for j in range(g)],
            'differentials': [format_vector(row, digits) for row in self.coefficients],
            'omega': [format_real(x, digits) for x in self.omega],
            'tau': [format_real(x, digits) for x in self.tau],
            'riemann_constants': format_vector(self.riemann_constants, digits),
            'base_divisor': [p.to_dict(digits) for p in self.base_divisor],
            'basis': self.basis.to_dict(digits) if self.basis is not None else None
        }
