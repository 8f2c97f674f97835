from nsx.models.mp_types import Poly
from nsx.utils.numformat import format_vector


class PadeTriple:
    def __init__(self, n, q, p, remainder_head, normal, precision_bits, exact=False):
        self.n = n
        self.q = q if isinstance(q, Poly) else Poly(q)
        self.p = p if isinstance(p, Poly) else Poly(p)
        self.remainder_head = tuple(remainder_head)
        self.normal = normal
        self.precision_bits = precision_bits
        self.exact = exact

    @property
    def degree(self):
        return self.q.degree

    def evaluate(self, z):
        return self.p(z) / self.q(z)

    def to_dict(self, digits=30):
        return {
            'n': self.n,
            'normal': self.normal,
            'degree': self.q.degree,
            'exact': self.exact,
            'precision_bits': self.precision_bits,
            'q': format_vector(self.q.coefficients, digits),
            'p': format_vector(self.p.coefficients, digits)
        }
