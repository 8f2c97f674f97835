from collections import deque

import numpy as np
from mpmath import mp
from scipy.integrate import solve_ivp

from nsx.config import Config
from nsx.models.mp_types import ArcPath, to_mpc
from nsx.services.mpcore_service import continue_logs, mpcore_service
from nsx.utils.errors import GPViolation, OrientationMismatch, RecurrentTrajectory
from nsx.utils.latency_monitor import measure_latency
from nsx.utils.logger import logger


def quadrature_tolerance():
    return mp.mpf(2) ** (20 - mp.prec)


def _descending(poly):
    return np.array([complex(c) for c in reversed(poly.coefficients)])


def cumulative_integrals(points, product, exponents, tol=None):
    """Running integrals of `product` from points[0] to every vertex, plus the values there.

    The branch is the global one at the first chord midpoint, continued chord by chord.
    """
    w = product.branch_set.points
    tol = quadrature_tolerance() if tol is None else tol
    values, h_values = [mp.mpc(0)], [None]
    total, end_logs = mp.mpc(0), None
    last = len(points) - 2
    for i in range(last + 1):
        left = exponents[0] if i == 0 else 0
        right = exponents[1] if i == last else 0
        middle = (points[i] + points[i + 1]) / 2
        start_logs = None if i == 0 else continue_logs(end_logs, w, points[i], middle)
        value, _, end_logs = mpcore_service.polyline_integral(
            points[i:i + 2], product, (left, right), start_logs, tol=tol)
        total += value
        values.append(total)
        h_values.append(product.from_logs(end_logs) if end_logs is not None else None)
    return values, h_values


class TrajectoryService:
    """Critical trajectories of -(B/A) dz**2 and the forest they form."""

    def __init__(self, stop_radius=None, max_length=None, max_step=None):
        self.stop_radius = stop_radius or Config.TRACE_STOP_RADIUS
        self.max_length = max_length or Config.TRACE_MAX_LENGTH
        self.max_step = max_step or Config.ARC_MAX_STEP
        self.start_radius = 1e-4

    def classify_zeros(self, B, diameter):
        """Split the zeros of B into simple zeros and double zeros."""
        roots = B.roots()
        tol = Config.COLLISION_TOL * diameter
        simple, double, used = [], [], set()
        for i, r in enumerate(roots):
            if i in used:
                continue
            partner = next((j for j in range(i + 1, len(roots))
                            if j not in used and abs(roots[j] - r) < tol), None)
            if partner is None:
                simple.append(r)
            else:
                used.add(partner)
                double.append((r + roots[partner]) / 2)
        key = lambda z: (float(mp.re(z)), float(mp.im(z)))
        return sorted(simple, key=key), sorted(double, key=key)

    @measure_latency('contour.trace')
    def trace_trajectories(self, A, B):
        a_points = sorted(A.roots(), key=lambda z: (float(mp.re(z)), float(mp.im(z))))
        diameter = max(abs(x - y) for x in a_points for y in a_points)
        b_points, c_points = self.classify_zeros(B, diameter)
        arcs, _ = self.trace_graph(A, B, a_points, b_points, c_points)
        return arcs

    def trace_graph(self, A, B, a_points, b_points, c_points):
        """Traced arcs (sample order = trace direction) and their end indices into a + b."""
        ends = list(a_points) + list(b_points)
        n_a = len(a_points)
        diameter = float(max(abs(x - y) for x in a_points for y in a_points))
        targets = np.array([complex(z) for z in ends + list(c_points)])
        zeros = np.array([complex(z) for z in list(b_points) + list(c_points)])
        mult = np.array([1.0] * len(b_points) + [2.0] * len(c_points))
        geometry = (np.array([complex(z) for z in a_points]), zeros, mult,
                    _descending(A), _descending(B), targets, diameter)
        logger.info(f'Tracing trajectories: {n_a} univalent, {len(b_points)} trivalent, '
                    f'{len(c_points)} double zeros')
        found = {}
        for index, e in enumerate(ends):
            nu = -1 if index < n_a else 1
            if nu == -1:
                kappa = B(e) / A.derivative()(e)
            else:
                kappa = B.derivative()(e) / A(e)
            for k in range(nu + 2):
                theta = (mp.pi - mp.arg(kappa) + 2 * mp.pi * k) / (nu + 2)
                samples, end = self._trace_one(index, complex(e), float(theta), geometry)
                if end >= len(ends):
                    raise GPViolation('double zero of B lies on a traced arc', polynomial=B,
                                      residual=None, zero=complex(c_points[end - len(ends)]))
                if end == index:
                    raise GPViolation('trajectory returns to its start', polynomial=B,
                                      residual=None, start=complex(e))
                key = frozenset((index, end))
                if key not in found or (found[key][1] < n_a and index >= n_a):
                    points = [e] + [to_mpc(z) for z in samples] + [ends[end]]
                    found[key] = (ArcPath(points), index, end)
        ordered = sorted(found.values(), key=lambda item: (min(item[1], item[2]), max(item[1], item[2])))
        logger.debug(f'Traced {len(ordered)} distinct arcs')
        return [item[0] for item in ordered], [(item[1], item[2]) for item in ordered]

    def _trace_one(self, index, e, theta, geometry):
        a_arr, zeros, mult, a_desc, b_desc, targets, diameter = geometry
        r0 = self.start_radius * diameter
        z0 = e + r0 * np.exp(1j * theta)
        h0 = np.sqrt(np.polyval(b_desc, z0) / np.polyval(a_desc, z0))
        if (1j * abs(h0) / h0 * np.exp(-1j * theta)).real < 0:
            h0 = -h0

        def rhs(s, y):
            z = y[0] + 1j * y[1]
            h = y[2] + 1j * y[3]
            dz = 1j * abs(h) / h
            dlog = 0.5 * (np.sum(mult / (z - zeros)) - np.sum(1.0 / (z - a_arr)))
            dh = h * dlog * dz
            return [dz.real, dz.imag, dh.real, dh.imag]

        stop = self.stop_radius * diameter
        events = []
        for j, t in enumerate(targets):
            if j == index:
                continue

            def event(s, y, t=t):
                return abs(y[0] + 1j * y[1] - t) - stop
            event.terminal = True
            event.direction = -1
            events.append((j, event))
        solution = solve_ivp(rhs, (0.0, self.max_length * diameter), [z0.real, z0.imag, h0.real, h0.imag],
                             method='DOP853', rtol=1e-12, atol=1e-14 * diameter,
                             max_step=self.max_step * diameter, events=[ev for _, ev in events],
                             dense_output=True)
        if solution.status != 1:
            raise RecurrentTrajectory('trajectory did not terminate at a point of E',
                                      start=e, angle=theta, length=float(solution.t[-1]))
        hit = next(k for k, times in enumerate(solution.t_events) if len(times))
        s_end = float(solution.t_events[hit][0])
        end = events[hit][0]
        grid = np.linspace(0.0, s_end, int(np.ceil(s_end / (self.max_step * diameter))) + 1)
        near = np.geomspace(1e-4 * diameter, min(0.05 * diameter, s_end / 2), 24)
        s = np.unique(np.concatenate([grid, near, s_end - near]))
        s = s[(s >= 0) & (s <= s_end)]
        states = solution.sol(s)
        samples = states[0] + 1j * states[1]
        keep = np.concatenate([[True], np.abs(np.diff(samples)) > 1e-15 * diameter])
        return samples[keep], end

    def refine(self, path, product, exponents, passes=3):
        """Newton-correct interior vertices onto Re of the integral of h from the start being zero."""
        points = list(path.points)
        for _ in range(passes):
            values, h_values = cumulative_integrals(points, product, exponents)
            for i in range(1, len(points) - 1):
                points[i] = points[i] - mp.re(values[i]) / h_values[i]
        values, _ = cumulative_integrals(points, product, exponents)
        residual = max(abs(mp.re(v)) for v in values)
        return ArcPath(points), residual

    @staticmethod
    def components(ends, count):
        adjacency = {v: [] for v in range(count)}
        for k, (s, e) in enumerate(ends):
            adjacency[s].append((k, e))
            adjacency[e].append((k, s))
        seen, components = set(), []
        for root in range(count):
            if root in seen:
                continue
            queue, component = deque([root]), []
            seen.add(root)
            while queue:
                v = queue.popleft()
                component.append(v)
                for _, u in adjacency[v]:
                    if u not in seen:
                        seen.add(u)
                        queue.append(u)
            components.append(sorted(component))
        return components, adjacency

    def orient(self, arcs, ends, components, adjacency):
        """Arcs re-sampled in their orientation, with (start, end) pairs.

        At every trivalent end the arcs all point toward it or all away from it; in each
        component the arc at the first univalent end leaves it with argument in (-pi/2, pi/2].
        """
        arcs, ends = list(arcs), list(ends)
        for component in components:
            root = component[0]
            toward = {root: False}
            queue = deque([root])
            assigned = set()
            while queue:
                v = queue.popleft()
                for k, u in adjacency[v]:
                    if k in assigned:
                        continue
                    assigned.add(k)
                    wanted = (u, v) if toward[v] else (v, u)
                    if ends[k] != wanted:
                        arcs[k] = ArcPath(tuple(reversed(arcs[k].points)))
                        ends[k] = wanted
                    if u in toward and toward[u] == toward[v]:
                        raise OrientationMismatch('arc orientation rule cannot be met', vertex=u)
                    toward[u] = not toward[v]
                    queue.append(u)
            first = adjacency[root][0][0] if adjacency[root] else None
            if first is None:
                continue
            points = arcs[first].points
            tangent = points[1] - points[0] if ends[first][0] == root else points[-1] - points[-2]
            angle = mp.arg(tangent)
            if not (-mp.pi / 2 < angle <= mp.pi / 2):
                for k in {k for v in component for k, _ in adjacency[v]}:
                    arcs[k] = ArcPath(tuple(reversed(arcs[k].points)))
                    ends[k] = (ends[k][1], ends[k][0])
        return arcs, ends

    @staticmethod
    def beyond_sets(ends, adjacency):
        """Ends reachable from the end of each arc without using that arc."""
        beyond = []
        for k, (_, q) in enumerate(ends):
            seen = {q}
            queue = deque([q])
            while queue:
                v = queue.popleft()
                for j, u in adjacency[v]:
                    if j != k and u not in seen:
                        seen.add(u)
                        queue.append(u)
            beyond.append(frozenset(seen))
        return beyond

    def direction_at(self, path, origin, radius):
        """Tangent angle of the polyline at `origin`, extrapolated from two radii."""
        array = path.array if abs(path.array[0] - origin) < abs(path.array[-1] - origin) else path.array[::-1]
        angles = []
        for r in (radius, 2 * radius):
            distances = np.abs(array - origin)
            i = int(np.argmax(distances >= r))
            frac = (r - distances[i - 1]) / (distances[i] - distances[i - 1])
            point = array[i - 1] + frac * (array[i] - array[i - 1])
            angles.append(np.angle(point - origin))
        return angles[0] + np.angle(np.exp(1j * (angles[0] - angles[1])))

    def leja_points(self, arcs, count=64, candidates=4000):
        pool = []
        total = sum(float(arc.length) for arc in arcs)
        for arc in arcs:
            share = max(8, int(candidates * float(arc.length) / total))
            params = np.array([float(p) for p in arc.parametrization])
            s = np.linspace(0, params[-1], share)
            pool.append(np.interp(s, params, arc.array.real) + 1j * np.interp(s, params, arc.array.imag))
        pool = np.unique(np.concatenate(pool))
        chosen = [pool[np.argmax(np.abs(pool))]]
        log_products = np.log(np.maximum(np.abs(pool - chosen[0]), 1e-300))
        for _ in range(count - 1):
            index = int(np.argmax(log_products))
            chosen.append(pool[index])
            log_products += np.log(np.maximum(np.abs(pool - pool[index]), 1e-300))
        return np.array(chosen)

    def leja_capacity(self, arcs, count=64):
        """Transfinite-diameter estimate, extrapolated in N over N/4, N/2 and N Leja points."""
        points = self.leja_points(arcs, count)
        sizes = [count // 4, count // 2, count]
        rows, logs = [], []
        for n in sizes:
            z = points[:n]
            diffs = np.abs(z[:, None] - z[None, :])[np.triu_indices(n, 1)]
            logs.append(2.0 * np.sum(np.log(diffs)) / (n * (n - 1)))
            rows.append([1.0, np.log(n) / n, 1.0 / n])
        coefficients = np.linalg.solve(np.array(rows), np.array(logs))
        return float(np.exp(coefficients[0])), float(np.exp(logs[-1]))


trajectory_service = TrajectoryService()
