from nsx.utils.numformat import format_complex, format_real

DEVIATION_COLUMNS = ['n', 're z', 'im z', '|q|', '|q̂|', 'deviation']


class ComparisonRecord:
    def __init__(self, n, z, q, q_hat, r=None, r_hat=None):
        self.n = n
        self.z = z
        self.q = q
        self.q_hat = q_hat
        self.r = r
        self.r_hat = r_hat

    @property
    def deviation(self):
        return abs(self.q / self.q_hat - 1)

    @property
    def remainder_deviation(self):
        if self.r is None or self.r_hat is None:
            return None
        return abs(self.r / self.r_hat - 1)

    def to_row(self, digits=30):
        return [self.n, format_real(self.z.real, digits), format_real(self.z.imag, digits),
                format_real(abs(self.q), digits), format_real(abs(self.q_hat), digits),
                format_real(self.deviation, digits)]


class ZeroClassification:
    def __init__(self, n, on_contour, spurious, matched):
        self.n = n
        self.on_contour = list(on_contour)
        self.spurious = list(spurious)
        self.matched = list(matched)

    @property
    def contour_fraction(self):
        total = len(self.on_contour) + len(self.spurious)
        return len(self.on_contour) / total if total else 1.0

    def to_dict(self, digits=30):
        return {
            'n': self.n,
            'on_contour': len(self.on_contour),
            'spurious': [format_complex(z, digits) for z in self.spurious],
            'matched': [{'zero': format_complex(z, digits), 'divisor_point': point.to_dict(digits),
                         'distance': format_real(distance, digits)}
                        for z, point, distance in self.matched],
            'contour_fraction': self.contour_fraction
        }


class ComparisonReport:
    """Computed Pade data against the leading terms of the strong asymptotics."""

    def __init__(self, genus, epsilon):
        self.genus = genus
        self.epsilon = epsilon
        self.records = []
        self.boundary = {}
        self.zeros = {}
        self.n_epsilon = {}
        self.fits = {}
        self.weak = {}
        self.error_rate = None
        self.excluded = 0

    def max_deviation(self, n):
        values = [r.deviation for r in self.records if r.n == n]
        return max(values) if values else None

    def deviations_by_n(self):
        return {n: self.max_deviation(n) for n in sorted({r.n for r in self.records})}

    def to_rows(self, digits=30):
        return [r.to_row(digits) for r in self.records]

    def to_dict(self, digits=30):
        return {
            'genus': self.genus,
            'epsilon': self.epsilon,
            'max_deviation': {str(n): format_real(v, digits) for n, v in self.deviations_by_n().items()},
            'boundary_deviation': {str(n): format_real(v, digits) for n, v in sorted(self.boundary.items())},
            'n_epsilon': {str(n): flag for n, flag in sorted(self.n_epsilon.items())},
            'zeros': [self.zeros[n].to_dict(digits) for n in sorted(self.zeros)],
            'fits': {key: float(value) for key, value in sorted(self.fits.items())},
            'weak': {str(n): format_real(v, digits) for n, v in sorted(self.weak.items())},
            'error_rate': self.error_rate,
            'excluded_points': self.excluded
        }
