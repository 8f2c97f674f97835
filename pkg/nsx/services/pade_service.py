from fractions import Fraction

from mpmath import mp

from nsx.config import Config
from nsx.models.mp_types import Poly
from nsx.models.pade_triple import PadeTriple
from nsx.services.germ_service import germ_service
from nsx.utils.errors import InsufficientMoments, PrecisionLoss
from nsx.utils.latency_monitor import measure_latency
from nsx.utils.logger import logger


def _is_exact(values):
    return all(isinstance(v, (Fraction, int)) for v in values)


def _to_mpc(value):
    if isinstance(value, Fraction):
        return mp.mpc(mp.mpf(value.numerator) / value.denominator)
    return mp.mpc(value)


def eliminate(matrix, rhs, threshold):
    """Gaussian elimination with full pivoting.

    Returns the unique solution, or None when the system is rank deficient or inconsistent.
    `threshold` is the magnitude below which a pivot or residual counts as zero.
    """
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    a = [list(row) + [b] for row, b in zip(matrix, rhs)]
    order = list(range(cols))
    rank = 0
    for step in range(min(rows, cols)):
        best, best_row, best_col = None, None, None
        for i in range(step, rows):
            for j in range(step, cols):
                size = abs(a[i][j])
                if best is None or size > best:
                    best, best_row, best_col = size, i, j
        if best is None or best <= threshold:
            break
        a[step], a[best_row] = a[best_row], a[step]
        for row in a:
            row[step], row[best_col] = row[best_col], row[step]
        order[step], order[best_col] = order[best_col], order[step]
        pivot = a[step][step]
        for i in range(step + 1, rows):
            factor = a[i][step] / pivot
            if factor:
                for j in range(step, cols + 1):
                    a[i][j] -= factor * a[step][j]
        rank += 1
    if rank < cols:
        return None
    for i in range(rank, rows):
        if abs(a[i][cols]) > threshold:
            return None
    solution = [0] * cols
    for i in reversed(range(cols)):
        acc = a[i][cols]
        for j in range(i + 1, cols):
            acc -= a[i][j] * solution[j]
        solution[i] = acc / a[i][i]
    result = [0] * cols
    for position, column in enumerate(order):
        result[column] = solution[position]
    return result


class PadeService:
    def __init__(self, base_bits=None, bits_per_index=None, max_retries=None):
        self.base_bits = base_bits or Config.DEFAULT_PRECISION_BITS
        self.bits_per_index = bits_per_index or Config.PADE_BITS_PER_INDEX
        self.max_retries = Config.PADE_MAX_RETRIES if max_retries is None else max_retries

    def precision_for(self, n):
        return max(self.base_bits, self.bits_per_index * n)

    @measure_latency('pade.solve')
    def solve_pade(self, moments, n):
        if n < 0:
            raise InsufficientMoments('negative index', n=n)
        if len(moments) < 2 * n:
            raise InsufficientMoments('solve_pade needs 2n moments', n=n, supplied=len(moments))
        if n == 0:
            head = [_to_mpc(m) for m in moments[:1]]
            return PadeTriple(0, Poly([1]), Poly([0]), head, True, self.precision_for(0),
                              _is_exact(moments))
        if _is_exact(moments):
            q = self._minimal_denominator(moments, n, exact=True)
            return self._assemble(moments, n, q, self.precision_for(n), True)
        bits = self.precision_for(n)
        for attempt in range(self.max_retries + 1):
            with mp.workprec(bits):
                q = self._minimal_denominator([mp.mpc(m) for m in moments], n, exact=False)
                if q is not None and self._hankel_residual(moments, n, q) <= self._threshold(moments):
                    return self._assemble(moments, n, q, bits, False)
            logger.warning(f'Pade n={n}: residual too large at {bits} bits, doubling')
            bits *= 2
        raise PrecisionLoss('Hankel solve residual above tolerance', n=n, bits=bits // 2)

    def _threshold(self, moments):
        scale = max([abs(_to_mpc(m)) for m in moments] + [mp.mpf(1)])
        return scale * mp.mpf(10) ** (-(mp.dps // 2))

    def _hankel_residual(self, moments, n, q):
        coeffs = [_to_mpc(c) for c in q]
        f = [_to_mpc(m) for m in moments]
        worst = mp.mpf(0)
        for k in range(1, n + 1):
            total = sum((coeffs[i] * f[k + i - 1] for i in range(len(coeffs))), mp.mpc(0))
            worst = max(worst, abs(total))
        return worst

    def _minimal_denominator(self, moments, n, exact):
        """Monic coefficients (ascending) of the minimal-degree denominator."""
        threshold = 0 if exact else self._threshold(moments)
        square = self._solve_degree(moments, n, n, threshold)
        if square is not None:
            return square
        for d in range(n):
            q = self._solve_degree(moments, n, d, threshold)
            if q is not None:
                logger.debug(f'Pade n={n}: minimal degree {d}')
                return q
        return None

    def _solve_degree(self, moments, n, d, threshold):
        one = Fraction(1) if threshold == 0 else mp.mpc(1)
        if d == 0:
            if all(abs(moments[k - 1]) <= threshold for k in range(1, n + 1)):
                return [one]
            return None
        matrix = [[moments[k + i - 1] for i in range(d)] for k in range(1, n + 1)]
        rhs = [-moments[k + d - 1] for k in range(1, n + 1)]
        solution = eliminate(matrix, rhs, threshold)
        if solution is None:
            return None
        return list(solution) + [one]

    def _assemble(self, moments, n, q, bits, exact):
        with mp.workprec(bits):
            p = []
            for j in range(len(q) - 1):
                p.append(sum(q[i] * moments[i - j - 1] for i in range(j + 1, len(q))))
            head = []
            for k in range(1, n + 2):
                if k + len(q) - 1 > len(moments):
                    break
                head.append(sum(q[i] * moments[k + i - 1] for i in range(len(q))))
            degree = len(q) - 1
            normal = degree == n
            triple = PadeTriple(n, Poly([_to_mpc(c) for c in q]), Poly([_to_mpc(c) for c in p] or [0]),
                                [_to_mpc(c) for c in head], normal, bits, exact)
        logger.info(f'Pade n={n}: degree {degree} normal={normal} bits={bits} exact={exact}')
        return triple

    def remainder_series(self, triple, moments, m):
        q = triple.q.coefficients
        n = triple.n
        needed = n + m + len(q) - 1
        if len(moments) < needed:
            raise InsufficientMoments('remainder needs more moments', needed=needed, supplied=len(moments))
        f = [_to_mpc(v) for v in moments]
        return [sum((q[i] * f[n + j + i - 1] for i in range(len(q))), mp.mpc(0)) for j in range(1, m + 1)]

    @measure_latency('pade.orthogonality')
    def orthogonality_residual(self, triple, density, contour=None, tol=None):
        worst = mp.mpf(0)
        for j in range(triple.n):
            value = germ_service.integrate_density(density, lambda t, j=j: triple.q(t) * t ** j, tol)
            worst = max(worst, abs(value))
        return worst

    def remainder_order_exact(self, triple, moments):
        """True when the coefficient at z**-(n+1) is nonzero, i.e. the error has order exactly 2n+1."""
        if len(moments) < 2 * triple.n + 1:
            return triple.normal
        lead = self.remainder_series(triple, moments, 1)[0]
        return abs(lead) > self._threshold(moments)

    @measure_latency('pade.normal_indices')
    def normal_indices(self, moments, n_max):
        if len(moments) < 2 * n_max:
            raise InsufficientMoments('normal_indices needs 2*n_max moments', n_max=n_max)
        indices = {0}
        for n in range(1, n_max + 1):
            triple = self.solve_pade(moments, n)
            if triple.normal and self.remainder_order_exact(triple, moments):
                indices.add(n)
        return indices

    def pade_run(self, moments, n_values):
        return {n: self.solve_pade(moments, n) for n in n_values}


pade_service = PadeService()
