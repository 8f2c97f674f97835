import numpy as np
from mpmath import mp

from nsx.config import Config
from nsx.models.mp_types import ArcPath, to_mpc
from nsx.utils.errors import (
    BranchAmbiguity, NoConvergence, PathCrossesContour, TooCloseToContour,
    ValidationError, ZeroOnPath
)
from nsx.utils.logger import logger


def two_pi_i():
    return mp.mpc(0, 2 * mp.pi)


def power_denominator(exponent, max_denominator=12):
    """Smallest q with q*exponent an integer, or None for exponents that need tanh-sinh."""
    if exponent is None:
        return None
    exponent = float(exponent)
    for q in range(1, max_denominator + 1):
        if abs(q * exponent - round(q * exponent)) < 1e-12:
            return q
    return None


def is_regular(exponent):
    if exponent is None:
        return False
    exponent = float(exponent)
    return exponent >= 0 and abs(exponent - round(exponent)) < 1e-12


def continue_logs(logs, points, z_from, z_to):
    result = []
    for log, w in zip(logs, points):
        ratio = (z_to - w) / (z_from - w)
        result.append(log + mp.log(ratio) if ratio != 0 else mp.mpc(mp.ninf))
    return result


def laurent_coefficients(points, exponents, count):
    """Coefficients e_0..e_count of prod (1 - w/z)**eps in powers of 1/z."""
    power_sums = []
    for k in range(1, count + 1):
        power_sums.append(sum((mp.mpf(eps) * to_mpc(w) ** k for w, eps in zip(points, exponents) if eps),
                              mp.mpc(0)))
    coeffs = [mp.mpc(1)]
    for n in range(1, count + 1):
        acc = mp.mpc(0)
        for k in range(1, n + 1):
            acc += power_sums[k - 1] * coeffs[n - k]
        coeffs.append(-acc / n)
    return coeffs


def segment_distance(points, start, stop):
    """Distances from numpy complex points to the segment [start, stop]."""
    direction = stop - start
    length2 = abs(direction) ** 2
    if length2 == 0:
        return np.abs(points - start), np.zeros(np.shape(points))
    u = np.real((points - start) * np.conj(direction)) / length2
    u_clipped = np.clip(u, 0.0, 1.0)
    return np.abs(points - (start + u_clipped * direction)), u


def segment_crossings(start, stop, chord_starts, chord_stops):
    """Transversal intersections of one segment with many chords.

    Returns (mask, s, u, sign): s is the parameter along the segment, u the parameter
    along each chord, sign +1 when the segment crosses a chord from its left to its right.
    """
    v = stop - start
    d = chord_stops - chord_starts
    denom = np.imag(np.conj(v) * d)
    w = chord_starts - start
    with np.errstate(divide='ignore', invalid='ignore'):
        s = np.imag(np.conj(w) * d) / denom
        u = np.imag(np.conj(w) * v) / denom
    mask = (np.abs(denom) > 0) & (s >= 0) & (s <= 1) & (u >= 0) & (u <= 1)
    sign = np.where(np.imag(np.conj(d) * v) < 0, 1, -1)
    return mask, s, u, sign


class BranchSet:
    """Points of a multivalued power product plus the cut arcs that make it single-valued.

    `beyond[k]` holds the indices of points that sit past the end of arc k inside its
    component; crossing arc k from its left to its right shifts their logs by -2*pi*i.
    """

    def __init__(self, points, arcs=(), beyond=(), scale=None):
        self.points = tuple(to_mpc(w) for w in points)
        self.points_array = np.array([complex(w) for w in self.points])
        self.arcs = tuple(arcs)
        self.beyond = tuple(frozenset(b) for b in beyond)
        if len(self.beyond) != len(self.arcs):
            raise ValidationError('one beyond-set per arc is required')
        starts, stops, owners = [], [], []
        for k, arc in enumerate(self.arcs):
            starts.extend(arc.array[:-1])
            stops.extend(arc.array[1:])
            owners.extend([k] * (len(arc.array) - 1))
        self.chord_starts = np.array(starts, dtype=complex)
        self.chord_stops = np.array(stops, dtype=complex)
        self.chord_owner = np.array(owners, dtype=int)
        if scale is None:
            scale = max([1.0] + [abs(w) for w in self.points_array])
        self.scale = float(scale)
        self.radius = 64.0 * self.scale

    def distance_to_cuts(self, z):
        if not len(self.chord_starts):
            return np.inf
        z = complex(z)
        direction = self.chord_stops - self.chord_starts
        u = np.clip(np.real((z - self.chord_starts) * np.conj(direction)) / np.abs(direction) ** 2, 0, 1)
        return float(np.min(np.abs(z - (self.chord_starts + u * direction))))

    def _ray_crossings(self, start, stop):
        if not len(self.chord_starts):
            return []
        mask, s, u, sign = segment_crossings(start, stop, self.chord_starts, self.chord_stops)
        edge = 1e-9
        hits = np.nonzero(mask)[0]
        crossings = []
        for index in hits:
            if u[index] < edge or u[index] > 1 - edge:
                return None
            crossings.append((int(self.chord_owner[index]), int(sign[index])))
        return crossings

    def global_logs(self, z):
        """Logs of z - w on the branch continued in from infinity without crossing any cut."""
        z = to_mpc(z)
        zc = complex(z)
        if self.distance_to_cuts(zc) < 1e-12 * self.scale:
            raise TooCloseToContour('point lies on a cut', z=zc)
        for attempt in range(16):
            theta = 0.3137 + 0.7071 * attempt
            anchor = self.radius * np.exp(1j * theta)
            distances, u = segment_distance(self.points_array, anchor, zc)
            blocked = (distances < 1e-9 * self.scale) & (u < 1 - 1e-9) & (np.abs(self.points_array - zc) > 1e-9 * self.scale)
            if np.any(blocked):
                continue
            crossings = self._ray_crossings(anchor, zc)
            if crossings is None:
                continue
            big = mp.mpf(self.radius) * mp.expj(theta)
            logs = [mp.log(big) + mp.log1p(-w / big) + mp.log((z - w) / (big - w)) for w in self.points]
            shift = two_pi_i()
            for arc_index, sign in crossings:
                for j in self.beyond[arc_index]:
                    logs[j] -= sign * shift
            return logs
        raise PathCrossesContour('no clean ray from infinity', z=zc)


class PowerProduct:
    """C * prod (z - w_j)**eps_j + c * sum beta_j log(z - w_j) on the branch fixed by a BranchSet."""

    def __init__(self, branch_set, exponents, constant=1, log_weights=None):
        self.branch_set = branch_set
        self.exponents = tuple(mp.mpf(e) for e in exponents)
        self.constant = to_mpc(constant)
        self.log_weights = tuple(to_mpc(b) for b in log_weights) if log_weights else None

    def from_logs(self, logs):
        if self.log_weights is not None:
            return self.constant * sum((b * log for b, log in zip(self.log_weights, logs) if b), mp.mpc(0))
        exponent = sum((e * log for e, log in zip(self.exponents, logs) if e), mp.mpc(0))
        return self.constant * mp.exp(exponent)

    def log_from_logs(self, logs):
        return mp.log(self.constant) + sum((e * log for e, log in zip(self.exponents, logs) if e), mp.mpc(0))

    def value(self, z):
        return self.from_logs(self.branch_set.global_logs(z))

    def __call__(self, z):
        return self.value(z)

    def jump_factor(self, arc_index):
        """F-/F+ across arc `arc_index`, i.e. exp(-2 pi i sum of exponents beyond its end)."""
        total = sum((self.exponents[j] for j in self.branch_set.beyond[arc_index]), mp.mpf(0))
        return mp.exp(-two_pi_i() * total)


class ArcFrame:
    """Logs on one side of a cut arc, continued chord to chord from a single global evaluation."""

    def __init__(self, branch_set, arc_index, side=1, arc=None):
        self.branch_set = branch_set
        self.arc_index = arc_index
        self.side = side
        arc = arc if arc is not None else branch_set.arcs[arc_index]
        self.arc = arc
        points = arc.oriented_points()
        unit = mp.mpc(0, side)
        self.refs = []
        for i in range(len(points) - 1):
            chord = points[i + 1] - points[i]
            self.refs.append((points[i] + points[i + 1]) / 2 + unit * chord / 10)
        self.logs = [branch_set.global_logs(self.refs[0])]
        for i in range(1, len(self.refs)):
            before = points[i] - points[i - 1]
            after = points[i + 1] - points[i]
            bisector = before / abs(before) + after / abs(after)
            offset = unit * bisector / abs(bisector) * min(abs(before), abs(after)) / 10
            corner = points[i] + offset
            logs = continue_logs(self.logs[-1], branch_set.points, self.refs[i - 1], corner)
            self.logs.append(continue_logs(logs, branch_set.points, corner, self.refs[i]))

    def logs_at(self, t, chord):
        return continue_logs(self.logs[chord], self.branch_set.points, self.refs[chord], to_mpc(t))

    def chord_function(self, product, chord):
        def evaluate(t):
            return product.from_logs(self.logs_at(t, chord))
        return evaluate


class MPCoreService:
    def __init__(self, tolerance=None, max_degree=None):
        self.tolerance = tolerance if tolerance is not None else Config.DEFAULT_TOLERANCE
        self.max_degree = max_degree or Config.QUAD_MAX_DEGREE

    def continue_sqrt(self, path, radicand, seed, tol=None, max_depth=None):
        tol = self.tolerance if tol is None else tol
        max_depth = max_depth or Config.SQRT_MAX_BISECTIONS
        points = path.oriented_points()
        r0 = to_mpc(radicand(points[0]))
        if abs(r0) < tol:
            raise ZeroOnPath('radicand vanishes at the first sample', z=complex(points[0]))
        s0 = to_mpc(seed)
        if abs(s0 * s0 - r0) > mp.mpf('1e-6') * abs(r0):
            raise BranchAmbiguity('seed is not a square root of the radicand', seed=complex(s0))
        values = [s0]
        for z0, z1 in zip(points, points[1:]):
            r0, s0 = self._sqrt_step(z0, z1, r0, s0, radicand, tol, 0, max_depth)
            values.append(s0)
        return values

    def _sqrt_step(self, z0, z1, r0, s0, radicand, tol, depth, max_depth):
        r1 = to_mpc(radicand(z1))
        if abs(r1) < tol:
            raise ZeroOnPath('radicand below tolerance on path', z=complex(z1))
        candidate = mp.sqrt(r1)
        if abs(candidate - s0) > abs(candidate + s0):
            candidate = -candidate
        if abs(mp.arg(r1 / r0)) < mp.pi / 2 and abs(candidate - s0) < abs(s0) / 2:
            return r1, candidate
        if depth >= max_depth:
            raise BranchAmbiguity('step too large to fix the sign', z=complex(z1), depth=depth)
        middle = (z0 + z1) / 2
        rm, sm = self._sqrt_step(z0, middle, r0, s0, radicand, tol, depth + 1, max_depth)
        return self._sqrt_step(middle, z1, rm, sm, radicand, tol, depth + 1, max_depth)

    def arc_quadrature(self, arc, integrand, endpoint_exponents=(0, 0), tol=None, chordwise=False):
        """Integral along the arc in its orientation.

        With chordwise=True, `integrand(i)` returns the integrand valid on chord i.
        Endpoint exponents are the local powers at the first and last sample; None marks a
        logarithmic end.
        """
        tol = self.tolerance if tol is None else tol
        points = arc.oriented_points()
        count = len(points) - 1
        total = mp.mpc(0)
        for i in range(count):
            f = integrand(i) if chordwise else integrand
            left = endpoint_exponents[0] if i == 0 else 0
            right = endpoint_exponents[1] if i == count - 1 else 0
            z0, z1 = points[i], points[i + 1]
            if not is_regular(left) and not is_regular(right):
                middle = (z0 + z1) / 2
                total += self._chord_integral(z0, middle, f, left, 0, tol)
                total += self._chord_integral(middle, z1, f, 0, right, tol)
            else:
                total += self._chord_integral(z0, z1, f, left, right, tol)
        return total

    def _chord_integral(self, z0, z1, f, left, right, tol):
        d = z1 - z0
        method = 'gauss-legendre'
        if is_regular(left) and is_regular(right):
            g = lambda u: f(z0 + u * d)
        elif not is_regular(left):
            q = power_denominator(left)
            if q is None:
                g = lambda u: f(z0 + u * d)
                method = 'tanh-sinh'
            else:
                g = lambda v: f(z0 + v ** q * d) * q * v ** (q - 1)
        else:
            q = power_denominator(right)
            if q is None:
                g = lambda u: f(z1 - u * d)
                method = 'tanh-sinh'
            else:
                g = lambda v: f(z1 - v ** q * d) * q * v ** (q - 1)
        value, error = mp.quad(g, [0, 1], method=method, error=True, maxdegree=self.max_degree)
        if error * abs(d) > tol:
            logger.debug(f'quadrature error {mp.nstr(error, 5)} above {tol} on chord of length {mp.nstr(abs(d), 5)}')
            raise NoConvergence('quadrature refinements disagree', error=float(error * abs(d)), tol=tol)
        return value * d

    def polyline_integral(self, points, product, endpoint_exponents=(0, 0), start_logs=None,
                          factor=None, tol=None):
        """Integral of factor(t)*product(t) along a polyline, continuing the branch analytically.

        The branch is fixed by `start_logs` at the first chord midpoint, or by the global
        evaluator there when omitted.
        """
        path = ArcPath(points)
        w = product.branch_set.points
        mids = [(a + b) / 2 for a, b in zip(path.points, path.points[1:])]
        logs = [start_logs if start_logs is not None else product.branch_set.global_logs(mids[0])]
        for i in range(1, len(mids)):
            step = continue_logs(logs[-1], w, mids[i - 1], path.points[i])
            logs.append(continue_logs(step, w, path.points[i], mids[i]))

        def chord_integrand(i):
            def evaluate(t):
                value = product.from_logs(continue_logs(logs[i], w, mids[i], t))
                return value * factor(t) if factor is not None else value
            return evaluate

        total = self.arc_quadrature(path, chord_integrand, endpoint_exponents, tol, chordwise=True)
        end_logs = continue_logs(logs[-1], w, mids[-1], path.points[-1]) \
            if all(path.points[-1] != p for p in w) else None
        return total, logs, end_logs


mpcore_service = MPCoreService()
