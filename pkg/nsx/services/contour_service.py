import numpy as np
from mpmath import mp
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial import Delaunay

from nsx.config import Config
from nsx.models.contour import HomologyBasis, StahlContour
from nsx.models.mp_types import ArcPath, Poly, to_mpc
from nsx.services.mpcore_service import BranchSet, PowerProduct, laurent_coefficients, mpcore_service, two_pi_i
from nsx.services.pathing_service import PlanarRouter
from nsx.services.trajectory_service import quadrature_tolerance, trajectory_service
from nsx.utils.errors import (
    GPViolation, NewtonDivergence, NsxError, OnCut, PathCrossesContour, PathNotFound,
    ValidationError
)
from nsx.utils.latency_monitor import measure_latency
from nsx.utils.logger import logger


def _lexicographic(points):
    return sorted((to_mpc(z) for z in points), key=lambda z: (float(mp.re(z)), float(mp.im(z))))


def _diameter(points):
    return max(abs(x - y) for x in points for y in points)


def spanning_edges(points):
    """Edges of a minimum spanning tree over the Delaunay graph of the points."""
    array = np.array([complex(z) for z in points])
    count = len(array)
    if count == 2:
        return [(0, 1)]
    xy = np.column_stack([array.real, array.imag])
    if np.linalg.matrix_rank(xy - xy.mean(axis=0), tol=1e-9 * np.ptp(xy)) < 2:
        order = np.lexsort((array.imag, array.real))
        return [(int(order[i]), int(order[i + 1])) for i in range(count - 1)]
    edges = set()
    for simplex in Delaunay(xy).simplices:
        for i in range(3):
            a, b = sorted((int(simplex[i]), int(simplex[(i + 1) % 3])))
            edges.add((a, b))
    rows, cols = zip(*sorted(edges))
    weights = [abs(array[a] - array[b]) for a, b in zip(rows, cols)]
    tree = minimum_spanning_tree(csr_matrix((weights, (rows, cols)), shape=(count, count))).tocoo()
    return sorted((min(int(a), int(b)), max(int(a), int(b))) for a, b in zip(tree.row, tree.col))


class ContourService:
    def __init__(self, geometry_bits=None, solver_bits=None):
        self.geometry_bits = geometry_bits or Config.GEOMETRY_PRECISION_BITS
        self.solver_bits = solver_bits or Config.SOLVER_PRECISION_BITS
        self.router_clearance = 2e-3
        self.cut_deviation = 2e-5

    # B-solver

    def _assemble_b(self, unknowns, d):
        c_points = [mp.mpc(unknowns[2 * i], unknowns[2 * i + 1]) for i in range(d)]
        b_points = [mp.mpc(unknowns[2 * i], unknowns[2 * i + 1]) for i in range(d, len(unknowns) // 2)]
        return b_points, c_points

    def _chord(self, start, stop, others, length_scale):
        """Straight chord, or a two-chord bend when another branch point lies near it."""
        length = abs(stop - start)
        for other in others:
            v = stop - start
            u = mp.re((other - start) * mp.conj(v)) / length ** 2
            u = min(max(u, 0), 1)
            if abs(other - (start + u * v)) < Config.TUBE_WIDTH * length:
                break
        else:
            return [start, stop]
        middle = (start + stop) / 2
        normal = mp.mpc(0, 1) * (stop - start) / length
        for bend in (0.3, -0.3, 0.6, -0.6):
            apex = middle + bend * length * normal
            if all(abs(apex - o) > Config.TUBE_WIDTH * length for o in others):
                return [start, apex, stop]
        return [start, middle + length * normal, stop]

    def period_residual(self, a_points, unknowns, d, tree, diameter):
        """Re of the integral of h over the chords tying every end of E to the spanning tree."""
        b_points, c_points = self._assemble_b(unknowns, d)
        points = list(a_points) + b_points + c_points
        exponents = [-0.5] * len(a_points) + [0.5] * len(b_points) + [1] * len(c_points)
        h = PowerProduct(BranchSet(points), exponents)
        tol = quadrature_tolerance()
        edges = [(i, j) for i, j in tree]
        for k, b in enumerate(b_points):
            nearest = min(range(len(a_points)), key=lambda i: abs(a_points[i] - b))
            edges.append((nearest, len(a_points) + k))
        residual = []
        for i, j in edges:
            others = [w for n, w in enumerate(points) if n not in (i, j)]
            path = self._chord(points[i], points[j], others, diameter)
            value, _, _ = mpcore_service.polyline_integral(path, h, (exponents[i], exponents[j]), tol=tol)
            residual.append(mp.re(value))
        return residual

    def _jacobian(self, func, x, r, step, diameter):
        columns = []
        for k in range(len(x)):
            delta = step * max(diameter, abs(x[k]))
            shifted = list(x)
            shifted[k] += delta
            columns.append([(a - b) / delta for a, b in zip(func(shifted), r)])
        return mp.matrix([[columns[k][i] for k in range(len(x))] for i in range(len(r))])

    def levenberg_marquardt(self, func, x, iterations, step, tol, diameter):
        """Minimizes |func(x)|; returns (x, max residual)."""
        r = func(x)
        cost = max(abs(v) for v in r)
        mu = mp.mpf('1e-3')
        for iteration in range(iterations):
            if cost < tol:
                break
            J = self._jacobian(func, x, r, step, diameter)
            JT = J.T
            normal = JT * J
            gradient = JT * mp.matrix(r)
            improved = False
            while mu < 1e12:
                system = normal + mu * mp.eye(len(x))
                delta = mp.lu_solve(system, -gradient)
                trial = [x[k] + delta[k] for k in range(len(x))]
                try:
                    trial_r = func(trial)
                except NsxError as e:
                    logger.debug(f'LM trial rejected: {e}')
                    mu *= 4
                    continue
                trial_cost = max(abs(v) for v in trial_r)
                if trial_cost < cost:
                    x, r, cost = trial, trial_r, trial_cost
                    mu = max(mu / 3, mp.mpf('1e-12'))
                    improved = True
                    break
                mu *= 4
            logger.debug(f'LM iteration {iteration}: residual {mp.nstr(cost, 5)} mu {mp.nstr(mu, 3)}')
            if not improved:
                break
        return x, cost

    def _seed_roots(self, A, seed):
        if seed is not None:
            return list(seed.roots())
        p = A.degree
        return list((A.derivative().derivative() * (mp.mpf(1) / (p * (p - 1)))).roots())

    def _split_seed(self, roots, d):
        roots = list(roots)
        c_points = []
        for _ in range(d):
            pairs = [(abs(roots[i] - roots[j]), i, j) for i in range(len(roots)) for j in range(i + 1, len(roots))]
            _, i, j = min(pairs)
            c_points.append((roots[i] + roots[j]) / 2)
            roots = [r for n, r in enumerate(roots) if n not in (i, j)]
        return c_points, roots

    def _pack(self, c_points, b_points):
        x = []
        for z in list(c_points) + list(b_points):
            x.extend([mp.re(z), mp.im(z)])
        return x

    def solve_b(self, a_points, d, seed_roots):
        """Zeros (b, c) of B for the mode with d double zeros."""
        diameter = _diameter(a_points)
        tree = spanning_edges(a_points)
        c_seed, b_seed = self._split_seed(seed_roots, d)
        x = self._pack(c_seed, b_seed)
        if not x:
            return [], [], mp.mpf(0)
        func = lambda u: self.period_residual(a_points, u, d, tree, diameter)
        with mp.workprec(self.solver_bits):
            x0 = [mp.mpf(v) for v in x]
            x1, cost = self.levenberg_marquardt(func, x0, Config.LM_MAX_ITERATIONS, mp.mpf('1e-7'),
                                                mp.mpf('1e-12'), diameter)
        logger.debug(f'mode d={d}: coarse residual {mp.nstr(cost, 5)}')
        if cost > mp.mpf('1e-6'):
            raise NewtonDivergence('period conditions not met in the coarse phase; try a homotopy seed',
                                   residual=float(cost), mode=d)
        tol = mp.mpf(Config.GEOMETRY_TOLERANCE)
        x2, cost = self.levenberg_marquardt(func, [mp.mpf(v) for v in x1], Config.LM_POLISH_ITERATIONS,
                                            mp.mpf(Config.FD_RELATIVE_STEP), tol, diameter)
        if cost > 10 * tol:
            raise NewtonDivergence('polish did not reach the geometry tolerance', residual=float(cost), mode=d)
        b_points, c_points = self._assemble_b(x2, d)
        return _lexicographic(b_points), _lexicographic(c_points), cost

    def homotopy_roots(self, a_points, d, steps=4):
        """Seed by deforming the regular p-gon into the given points."""
        p = len(a_points)
        center = sum(a_points) / p
        radius = sum(abs(a - center) for a in a_points) / p
        by_angle = sorted(range(p), key=lambda i: float(mp.arg(a_points[i] - center)))
        gon = [None] * p
        for k, i in enumerate(by_angle):
            gon[i] = center + radius * mp.expj(2 * mp.pi * k / p + mp.mpf('0.1'))
        roots = None
        for step in range(1, steps + 1):
            t = mp.mpf(step) / steps
            current = [(1 - t) * g + t * a for g, a in zip(gon, a_points)]
            A_t = Poly.from_roots(current)
            seed = roots if roots is not None else self._seed_roots(A_t, None)
            b_points, c_points, _ = self.solve_b(current, d, seed)
            roots = c_points + c_points + b_points
            logger.debug(f'homotopy step {step}/{steps} done')
        return roots

    # assembly

    def _check_collisions(self, a_points, b_points, c_points, B, residual, diameter):
        tol = Config.COLLISION_TOL * diameter
        zeros = list(b_points) + list(c_points)
        for i, z in enumerate(zeros):
            if any(abs(z - a) < tol for a in a_points):
                raise GPViolation('a zero of B collides with a point of A', polynomial=B,
                                  residual=residual, zero=complex(z))
            if any(abs(z - w) < tol for w in zeros[i + 1:]):
                raise GPViolation('B has a repeated zero off the double-zero set', polynomial=B,
                                  residual=residual, zero=complex(z))

    def build_contour(self, A, a_points, b_points, c_points, period_residual, exponents=None):
        diameter = _diameter(a_points)
        B = Poly.from_roots(list(b_points) + [c for c in c_points for _ in range(2)])
        self._check_collisions(a_points, b_points, c_points, B, period_residual, diameter)
        arcs, ends = trajectory_service.trace_graph(A, B, a_points, b_points, c_points)
        n_a, n_e = len(a_points), len(a_points) + len(b_points)
        components, adjacency = trajectory_service.components(ends, n_e)
        degrees = [len(adjacency[v]) for v in range(n_e)]
        if any(degrees[v] != 1 for v in range(n_a)) or any(degrees[v] != 3 for v in range(n_a, n_e)):
            raise GPViolation('traced graph violates the univalent/trivalent structure', polynomial=B,
                              residual=period_residual, degrees=degrees)
        if len(arcs) != n_e - len(components) or len(components) != len(c_points) + 1:
            raise GPViolation('traced graph is not a forest with the expected components', polynomial=B,
                              residual=period_residual, arcs=len(arcs), components=len(components))
        if exponents is not None:
            for component in components:
                total = sum(exponents[v] for v in component if v < n_a)
                if total != int(total):
                    raise GPViolation('germ is not single-valued on a component', polynomial=B,
                                      residual=period_residual, component=component)
        arcs, ends = trajectory_service.orient(arcs, ends, components, adjacency)
        beyond = trajectory_service.beyond_sets(ends, adjacency)
        points = list(a_points) + list(b_points) + list(c_points)
        h_exponents = [-0.5] * n_a + [0.5] * len(b_points) + [1] * len(c_points)
        h_free = PowerProduct(BranchSet(points), h_exponents)
        cut_arcs, boundary = [], mp.mpf(0)
        for arc, (s, e) in zip(arcs, ends):
            coarse = arc.coarsened(self.cut_deviation * float(diameter))
            refined, residual = trajectory_service.refine(coarse, h_free, (h_exponents[s], h_exponents[e]))
            cut_arcs.append(refined)
            boundary = max(boundary, residual)
        branch_set = BranchSet(points, cut_arcs, beyond)
        contour = StahlContour(A, B, a_points, b_points, c_points, arcs, cut_arcs, ends,
                               components, branch_set, period_residual)
        contour.boundary_residual = boundary
        self._normalize(contour)
        return contour

    @measure_latency('contour.solve')
    def solve_stahl(self, points, seed=None, exponents=None):
        """Minimal-capacity contour through the given branch points.

        Every admissible count of double zeros of B is tried; the valid candidate of least
        capacity wins. `exponents`, ordered like the sorted points, restrict candidates to
        those on which the germ is single-valued.
        """
        if len(points) < 2:
            raise ValidationError('solve_stahl needs at least two points', count=len(points))
        with mp.workprec(self.geometry_bits):
            a_points = _lexicographic(points)
            for i, a in enumerate(a_points):
                if any(a == b for b in a_points[i + 1:]):
                    raise ValidationError('points of A must be distinct', point=complex(a))
            A = Poly.from_roots(a_points)
            p = len(a_points)
            logger.info(f'Solving for the Stahl contour of {p} points')
            if p == 2:
                return self.build_contour(A, a_points, [], [], mp.mpf(0), exponents)
            seed_roots = self._seed_roots(A, seed)
            candidates, errors = [], []
            for d in range((p - 2) // 2 + 1):
                try:
                    try:
                        b_points, c_points, residual = self.solve_b(a_points, d, seed_roots)
                    except NewtonDivergence as e:
                        logger.warning(f'mode d={d}: {e}; retrying from a homotopy seed')
                        b_points, c_points, residual = self.solve_b(a_points, d, self.homotopy_roots(a_points, d))
                    candidates.append(self.build_contour(A, a_points, b_points, c_points, residual, exponents))
                    logger.info(f'mode d={d}: capacity {mp.nstr(candidates[-1].capacity, 12)}')
                except NsxError as e:
                    logger.info(f'mode d={d} rejected: {e}')
                    errors.append(e)
            if not candidates:
                gp = [e for e in errors if isinstance(e, GPViolation)]
                raise (gp or errors)[0]
            return min(candidates, key=lambda c: c.log_capacity)

    def solve_for_germ(self, germ, seed=None):
        """Stahl contour of a germ; candidates must keep the germ single-valued."""
        if germ.kind == 'rational':
            raise GPViolation('a germ with poles has no Stahl contour', kind=germ.kind)
        order = sorted(range(len(germ.points)),
                       key=lambda i: (float(mp.re(germ.points[i])), float(mp.im(germ.points[i]))))
        exponents = [germ.exponents[i] for i in order]
        return self.solve_stahl(germ.points, seed, exponents)

    # evaluation on the plane

    def far_radius(self, contour):
        return 4 * max(abs(w) for w in contour.points) + contour.diameter

    def _laurent(self, contour):
        def build():
            ratio = max(abs(w) for w in contour.points) / self.far_radius(contour)
            count = int(mp.prec * mp.log(2) / -mp.log(ratio)) + 8
            return laurent_coefficients(contour.points, contour.h_exponents, count)
        return contour.cached(('laurent', mp.prec), build)

    def _tail(self, contour, z):
        e = self._laurent(contour)
        return sum((e[k - 1] * z ** (1 - k) / (k - 1) for k in range(2, len(e) + 1)), mp.mpc(0))

    def branch_sign(self, contour):
        """+1 when the global branch of h behaves like 1/z at infinity, else -1."""
        def build():
            z = self.far_radius(contour) * mp.expj(mp.mpf('0.4'))
            return 1 if mp.re(contour.h(z) * z) > 0 else -1
        return contour.cached(('sign', mp.prec), build)

    def router(self, contour, kind):
        def build():
            diameter = float(contour.diameter)
            center = complex(sum(contour.points) / len(contour.points))
            clearance = self.router_clearance * diameter
            points = [complex(w) for w in contour.points]
            arcs = [arc.array for arc in contour.cut_arcs]
            if kind == 'plane':
                return PlanarRouter(arcs, [], points, clearance, center, 1.25 * diameter)
            basis = self.cut_system(contour)
            hard = [arcs[k] for k in basis.b_arcs] + [path.array for path in basis.a_paths]
            soft = [arcs[k] for k in range(len(arcs)) if k not in basis.b_arcs]
            return PlanarRouter(hard, soft, points, clearance, center, 1.25 * diameter)
        return contour.cached(('router', kind), build)

    def route_integral(self, contour, route, product, exponents, sheet=0, factor=None):
        """Integral from a1 along `route` of a product sharing the branch set of h.

        The branch is the one that equals the sheet-`sheet` branch on the last chord of the route.
        """
        points = [contour.points[0]] + [to_mpc(z) for z in route[1:]]
        value, mid_logs, _ = mpcore_service.polyline_integral(points, product, exponents,
                                                              factor=factor, tol=quadrature_tolerance())
        middle = (points[-2] + points[-1]) / 2
        ratio = product.from_logs(mid_logs[-1]) / product.value(middle)
        turn = 1 if mp.re(ratio) > 0 else -1
        return self.branch_sign(contour) * (1 - 2 * sheet) * turn * value

    def segment_integral(self, contour, product, start, stop, sheet=0, exponents=(0, 0), factor=None):
        """Integral over [start, stop] on the sheet-`sheet` branch fixed at the segment midpoint."""
        value, _, _ = mpcore_service.polyline_integral([to_mpc(start), to_mpc(stop)], product, exponents,
                                                       factor=factor, tol=quadrature_tolerance())
        return self.branch_sign(contour) * (1 - 2 * sheet) * value

    def side_point(self, contour, t, direction, side):
        """Point next to t on the given side of a chord with the given direction."""
        normal = mp.mpc(0, 1) * direction / abs(direction)
        return to_mpc(t) + side * 4 * self.router_clearance * contour.diameter * normal

    def _integral_from_a1(self, contour, route, sheet=0):
        return self.route_integral(contour, route, contour.h, (contour.h_exponents[0], 0), sheet)

    def _route_integral(self, contour, z):
        try:
            route, _ = self.router(contour, 'plane').route(complex(contour.points[0]), complex(z))
        except PathNotFound as e:
            raise PathCrossesContour('no path avoiding the contour', z=complex(z)) from e
        route[-1] = z
        return self._integral_from_a1(contour, route)

    def _normalize(self, contour):
        """Sets log capacity, Green constant and the rotation xi."""
        with mp.workprec(max(mp.prec, self.geometry_bits)):
            z_far = self.far_radius(contour) * mp.expj(mp.mpf('0.4'))
            H = self._route_integral(contour, z_far)
            K = H - mp.log(z_far) + self._tail(contour, z_far)
            contour.log_capacity = -mp.re(K)
            contour.green_constant = K
            Phi = self.log_phi(contour, z_far, 0)
            K_phi = Phi - mp.log(z_far) + self._tail(contour, z_far)
            contour.phi_constant = K_phi
            contour.xi = mp.expj(-mp.im(K_phi))
        logger.info(f'capacity {mp.nstr(contour.capacity, 15)}, xi {mp.nstr(contour.xi, 10)}')

    @measure_latency('contour.green')
    def green_value(self, contour, z):
        z = to_mpc(z)
        if abs(z) >= self.far_radius(contour):
            return mp.re(mp.log(z) + contour.green_constant - self._tail(contour, z))
        return mp.re(self._route_integral(contour, z))

    def capacity(self, contour):
        return contour.capacity

    def log_phi(self, contour, z, sheet):
        """log of the unrotated map at (z, sheet), integrated along a route inside the cut surface."""
        try:
            route, _ = self.router(contour, 'surface').route(
                complex(contour.points[0]), complex(z), start_sheets=(0, 1), target_sheet=sheet)
        except PathNotFound as e:
            raise OnCut('no admissible route in the cut surface', z=complex(z), sheet=sheet) from e
        route[-1] = to_mpc(z)
        return self._integral_from_a1(contour, route, sheet)

    def log_phi_boundary(self, contour, t, direction, side, sheet):
        """log Phi (unrotated) at a contour point t approached from `side` on `sheet`."""
        z_off = self.side_point(contour, t, direction, side)
        return self.log_phi(contour, z_off, sheet) + \
            self.segment_integral(contour, contour.h, z_off, t, sheet)

    @measure_latency('contour.phi')
    def phi_value(self, contour, z, sheet=0, rotated=True):
        """Phi on the cut surface; rotated=True evaluates the map of the contour rotated so that xi = 1."""
        if sheet not in (0, 1):
            raise ValidationError('sheet must be 0 or 1', sheet=sheet)
        z = to_mpc(z)
        w = contour.xi * z if rotated else z
        clearance = Config.CONTOUR_CLEARANCE * float(contour.diameter)
        if contour.branch_set.distance_to_cuts(complex(w)) < clearance:
            raise OnCut('point lies on the contour', z=complex(z))
        basis = self.cut_system(contour)
        for path in basis.a_paths:
            if float(np.min(np.abs(path.array - complex(w)))) < clearance:
                raise OnCut('point lies on an a-path', z=complex(z))
        if abs(w) >= self.far_radius(contour):
            log_phi = mp.log(w) + contour.phi_constant - self._tail(contour, w)
            return mp.exp(log_phi if sheet == 0 else -log_phi)
        return mp.exp(self.log_phi(contour, w, sheet))

    # cut system and cycle constants

    def _labels(self, contour):
        labels = []
        for component in contour.components:
            labels.extend(sorted(v for v in component if v < contour.n_a))
        return labels

    @measure_latency('contour.cut_system')
    def cut_system(self, contour):
        def build():
            labels = self._labels(contour)
            starts, b_arcs, targets = [], [], []
            for number, component in enumerate(contour.components):
                members = [v for v in labels if v in component]
                chosen = members[2:] if number == 0 else members[1:]
                for a in chosen:
                    b_arcs.append(contour.incident_arcs(a)[0])
                    targets.append(a)
            a2 = labels[1]
            diameter = float(contour.diameter)
            center = complex(sum(contour.points) / len(contour.points))
            paths = []
            for target in targets:
                hard = [arc.array for arc in contour.cut_arcs] + [p.array for p in paths]
                router = PlanarRouter(hard, [], [complex(w) for w in contour.points],
                                      self.router_clearance * diameter, center, 1.25 * diameter)
                route, _ = router.route(complex(contour.points[a2]), complex(contour.points[target]))
                route[0], route[-1] = contour.points[a2], contour.points[target]
                paths.append(ArcPath(route))
            sizes = [len([v for v in c if v < contour.n_a]) for c in contour.components]
            logger.info(f'cut system: genus {len(b_arcs)}, b-arcs {b_arcs}')
            return HomologyBasis([contour.points[v] for v in labels], b_arcs, paths, targets, sizes)
        return contour.cached('cut_system', build)

    def b_arc_integral(self, contour, k):
        """Integral of h+ along cut arc k in its orientation, with h normalized at infinity."""
        frame = contour.frame(k, 1)
        s, e = contour.arc_ends[k]
        value = mpcore_service.arc_quadrature(
            contour.cut_arcs[k], lambda i: frame.chord_function(contour.h, i),
            (contour.h_exponents[s], contour.h_exponents[e]), quadrature_tolerance(), chordwise=True)
        return self.branch_sign(contour) * value

    def a_path_integral(self, contour, path):
        value, _, _ = mpcore_service.polyline_integral(
            list(path.points), contour.h, (-0.5, -0.5), tol=quadrature_tolerance())
        return self.branch_sign(contour) * value

    @measure_latency('contour.cycle_constants')
    def cycle_constants(self, contour, basis=None):
        basis = basis or self.cut_system(contour)
        omega, tau = [], []
        for k, path in zip(basis.b_arcs, basis.a_paths):
            omega.append(mp.re(-2 * self.b_arc_integral(contour, k) / two_pi_i()))
            tau.append(mp.re(2 * self.a_path_integral(contour, path) / two_pi_i()))
        return omega, tau

    # diagnostics

    def boundary_residual(self, contour):
        return contour.boundary_residual

    def phi_jump_residuals(self, contour):
        """Deviation of the jumps of Phi across the a-paths and b-arcs from exp(2 pi i omega), exp(2 pi i tau)."""
        basis = self.cut_system(contour)
        omega, tau = self.cycle_constants(contour, basis)
        residuals = []
        for k, path in enumerate(basis.a_paths):
            points = path.oriented_points()
            middle = len(points) // 2
            a, b = points[middle - 1], points[middle]
            t = (a + b) / 2
            jump = self.log_phi_boundary(contour, t, b - a, 1, 0) - self.log_phi_boundary(contour, t, b - a, -1, 0)
            a_residual = abs(mp.exp(jump) - mp.expj(2 * mp.pi * omega[k]))
            arc = contour.cut_arcs[basis.b_arcs[k]]
            points = arc.oriented_points()
            middle = len(points) // 2
            a, b = points[middle - 1], points[middle]
            t = (a + b) / 2
            jump = self.log_phi_boundary(contour, t, b - a, 1, 0) - self.log_phi_boundary(contour, t, b - a, -1, 1)
            b_residual = abs(mp.exp(jump) - mp.expj(2 * mp.pi * tau[k]))
            residuals.append((a_residual, b_residual))
        return residuals

    def s_property_residual(self, contour):
        """max |h+ + h-| at chord midpoints of every cut arc."""
        worst = mp.mpf(0)
        for k, arc in enumerate(contour.cut_arcs):
            plus, minus = contour.frame(k, 1), contour.frame(k, -1)
            for i in range(arc.chord_count):
                a, b = arc.chord(i)
                middle = (a + b) / 2
                total = plus.chord_function(contour.h, i)(middle) + minus.chord_function(contour.h, i)(middle)
                worst = max(worst, abs(total))
        return worst

    def trivalent_angles(self, contour):
        """Sorted gaps between the three arc directions at every trivalent end."""
        radius = 2e-3 * float(contour.diameter)
        result = []
        for index in range(contour.n_a, contour.n_a + contour.n_b):
            origin = complex(contour.points[index])
            directions = sorted(trajectory_service.direction_at(contour.arcs[k], origin, radius) % (2 * np.pi)
                                for k in contour.incident_arcs(index))
            gaps = [directions[1] - directions[0], directions[2] - directions[1],
                    2 * np.pi - directions[2] + directions[0]]
            result.append(sorted(gaps))
        return result

    def leja_capacity(self, contour, count=64):
        return trajectory_service.leja_capacity(contour.arcs, count)[0]


contour_service = ContourService()
