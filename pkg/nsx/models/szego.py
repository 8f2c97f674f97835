from nsx.utils.numformat import format_complex, format_real


class DivisorSolution:
    """Solution of the Jacobi inversion for one index n and the integers that connect it to c_rho."""

    def __init__(self, n, divisor, unique, images, j, m, residual, shift=None):
        self.n = n
        self.divisor = list(divisor)
        self.unique = unique
        self.images = list(images)
        self.j = list(j)
        self.m = list(m)
        self.residual = residual
        self.shift = shift

    @property
    def special(self):
        return not self.unique

    def to_dict(self, digits=30):
        return {
            'n': self.n,
            'unique': self.unique,
            'divisor': [p.to_dict(digits) for p in self.divisor],
            'j': self.j,
            'm': self.m,
            'residual': format_real(self.residual, digits)
        }


class SzegoData:
    """Szego data for index n: the divisor of n, the one of n - 1 and the normalizing constants."""

    def __init__(self, n, current, previous, gamma, gamma_star, s_infinity, s_previous_infinity,
                 in_n_epsilon, epsilon):
        self.n = n
        self.current = current
        self.previous = previous
        self.gamma = gamma
        self.gamma_star = gamma_star
        self.s_infinity = s_infinity
        self.s_previous_infinity = s_previous_infinity
        self.in_n_epsilon = in_n_epsilon
        self.epsilon = epsilon

    @property
    def divisor(self):
        return self.current.divisor

    @property
    def unique(self):
        return self.current.unique

    def to_dict(self, digits=30):
        return {
            'n': self.n,
            'divisor': self.current.to_dict(digits),
            'previous_divisor': self.previous.to_dict(digits) if self.previous is not None else None,
            'gamma': format_complex(self.gamma, digits) if self.gamma is not None else None,
            'gamma_star': format_complex(self.gamma_star, digits) if self.gamma_star is not None else None,
            'S_infinity': format_complex(self.s_infinity, digits) if self.s_infinity is not None else None,
            'in_N_epsilon': self.in_n_epsilon,
            'epsilon': self.epsilon
        }
