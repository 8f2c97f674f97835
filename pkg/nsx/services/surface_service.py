import itertools

import numpy as np
from mpmath import mp

from nsx.config import Config
from nsx.models.mp_types import ArcPath, to_mpc
from nsx.models.surface import SurfaceData, SurfacePoint
from nsx.services.contour_service import contour_service
from nsx.services.mpcore_service import PowerProduct, laurent_coefficients, mpcore_service, segment_crossings
from nsx.services.trajectory_service import quadrature_tolerance
from nsx.utils.errors import (
    GenusCapExceeded, InversionFailed, NsxError, OnCut, PathNotFound, SingularNormalization
)
from nsx.utils.latency_monitor import measure_latency
from nsx.utils.logger import logger


def _add(u, v):
    return [a + b for a, b in zip(u, v)]


def _sub(u, v):
    return [a - b for a, b in zip(u, v)]


def _scale(c, u):
    return [c * a for a in u]


def _total(vectors, g):
    result = [mp.mpc(0)] * g
    for v in vectors:
        result = _add(result, v)
    return result


def _complex_matrix(matrix):
    return np.array([[complex(matrix[i, j]) for j in range(matrix.cols)] for i in range(matrix.rows)])


class SurfaceService:
    def __init__(self, genus_cap=None, special_tolerance=None, theta_tolerance=None):
        self.genus_cap = genus_cap or Config.GENUS_CAP
        self.special_tolerance = special_tolerance or Config.SPECIAL_DIVISOR_TOL
        self.theta_tolerance = theta_tolerance or Config.THETA_TOLERANCE
        self.sample_radii = (0.35, 0.7, 1.1, 1.8, 3.0)
        self.sample_angles = 12
        self.branch_chart_radius = 0.05
        self.newton_iterations = 40
        self.newton_starts = 4

    # differentials

    def inverse_hbar(self, contour):
        """1/hbar on the branch set of the contour (global branch)."""
        def build():
            exponents = [mp.mpf(-0.5) if e else mp.mpf(0) for e in contour.hbar_exponents]
            return PowerProduct(contour.branch_set, exponents)
        return contour.cached(('inverse_hbar', mp.prec), build)

    def density_tolerance(self):
        return max(quadrature_tolerance(), mp.mpf(Config.DEFAULT_TOLERANCE) ** 2)

    def _path_moments(self, contour, path, count, weight=None):
        """sigma * int_path w**j weight(w) / hbar(w) dw for j < count, on the global branch."""
        inverse = self.inverse_hbar(contour)
        sign = contour_service.branch_sign(contour)
        values = []
        for j in range(count):
            if weight is None:
                factor = (lambda w, j=j: w ** j) if j else None
            else:
                factor = lambda w, j=j: w ** j * weight(w)
            value, _, _ = mpcore_service.polyline_integral(list(path.oriented_points()), inverse, (-0.5, -0.5),
                                                           factor=factor, tol=quadrature_tolerance())
            values.append(sign * value)
        return values

    def _arc_moments(self, contour, k, count):
        """sigma * int over cut arc k of t**j / hbar+(t) dt for j < count."""
        frame = contour.frame(k, 1)
        inverse = self.inverse_hbar(contour)
        sign = contour_service.branch_sign(contour)
        values = []
        for j in range(count):
            def chord_integrand(i, j=j):
                reciprocal = frame.chord_function(inverse, i)
                return lambda t: reciprocal(t) * t ** j
            value = mpcore_service.arc_quadrature(contour.cut_arcs[k], chord_integrand, (-0.5, -0.5),
                                                  quadrature_tolerance(), chordwise=True)
            values.append(sign * value)
        return values

    def _normalized(self, surface, raw):
        g = surface.genus
        return [sum((surface.coefficients[k][j] * raw[j] for j in range(g)), mp.mpc(0)) for k in range(g)]

    @measure_latency('surface.build')
    def build_surface(self, contour):
        """Normalized differentials, period matrix and Abel data of the surface over the contour."""
        g = contour.genus
        basis = contour_service.cut_system(contour)
        if g == 0:
            surface = SurfaceData(contour, basis)
            surface.infinity_images = {0: [], 1: []}
            return surface
        logger.info(f'Building the period data of a genus {g} surface')
        columns = [self._path_moments(contour, path, g + 1) for path in basis.a_paths]
        b_rows = [self._arc_moments(contour, k, g) for k in basis.b_arcs]
        M, top, B, L = self._periods(columns, b_rows, g)
        flips = [k for k in range(g) if mp.im(B[k, k]) < 0]
        if flips:
            logger.info(f'reversing a-paths {flips} to make Im B positive')
            for k in flips:
                basis.reverse_a_path(k)
                columns[k] = [-x for x in columns[k]]
            M, top, B, L = self._periods(columns, b_rows, g)
        Y = np.array([[float(mp.im(B[i, j])) for j in range(g)] for i in range(g)])
        if np.linalg.eigvalsh((Y + Y.T) / 2).min() <= 0:
            raise SingularNormalization('imaginary part of the period matrix is not positive definite')
        omega, tau = contour_service.cycle_constants(contour, basis)
        surface = SurfaceData(contour, basis, B, [[L[k, j] for j in range(g)] for k in range(g)],
                              a_periods=M, b_periods=B, omega=omega, tau=tau, top_a_moments=top)
        surface.base_divisor = [SurfacePoint(b, 1) for b in contour.b_points] + \
            [SurfacePoint(c, 1) for c in contour.c_points]
        surface.infinity_images = {sheet: self._infinity_image(surface, sheet) for sheet in (0, 1)}
        surface.riemann_constants = self._riemann_constants(surface)
        logger.info(f'period matrix diagonal {[mp.nstr(B[k, k], 10) for k in range(g)]}')
        return surface

    def _periods(self, columns, b_rows, g):
        M = mp.matrix(g, g)
        for k, column in enumerate(columns):
            for j in range(g):
                M[j, k] = 2 * column[j]
        top = [2 * column[g] for column in columns]
        scale = mp.mpf(1)
        for k in range(g):
            scale *= mp.norm(M.column(k))
        if abs(mp.det(M)) <= mp.mpf(Config.PERIOD_TOLERANCE) * scale:
            raise SingularNormalization('a-period matrix of the holomorphic differentials is singular')
        L = mp.inverse(M)
        N = mp.matrix(g, g)
        for i, row in enumerate(b_rows):
            for j in range(g):
                N[j, i] = 2 * row[j]
        B = (L * N).T
        return M, top, B, L

    # theta function and the lattice

    def _theta(self, u, B, tol=None):
        """(theta(u | B), log of the size of its largest term)."""
        g = B.rows
        if g == 0:
            return mp.mpc(1), mp.mpf(0)
        tol = tol or self.theta_tolerance
        Y = np.array([[float(mp.im(B[i, j])) for j in range(g)] for i in range(g)])
        Y = (Y + Y.T) / 2
        smallest = float(np.linalg.eigvalsh(Y).min())
        if smallest <= 0:
            raise SingularNormalization('theta needs Im B positive definite')
        center = -np.linalg.solve(Y, np.array([float(mp.im(x)) for x in u]))
        bound = (-np.log(float(tol)) + 2 * g + 4) / np.pi
        half = np.sqrt(bound / smallest)
        axes = [np.arange(np.ceil(c - half), np.floor(c + half) + 1) for c in center]
        grid = np.array(np.meshgrid(*axes, indexing='ij')).reshape(g, -1).T
        shifted = grid - center
        forms = np.einsum('ni,ij,nj->n', shifted, Y, shifted)
        total = mp.mpc(0)
        for n in grid[forms <= bound].astype(int):
            n = [int(x) for x in n]
            quadratic = sum((n[i] * B[i, j] * n[j] for i in range(g) for j in range(g)), mp.mpc(0))
            linear = sum((n[i] * u[i] for i in range(g)), mp.mpc(0))
            total += mp.exp(mp.pi * mp.mpc(0, 1) * (quadratic + 2 * linear))
        return total, mp.pi * mp.mpf(float(center @ Y @ center))

    def theta(self, surface, u, tol=None):
        return self._theta([to_mpc(x) for x in u], surface.period_matrix, tol)[0]

    def theta_relative(self, surface, u):
        """|theta(u)| relative to its largest lattice term."""
        value, log_scale = self._theta(u, surface.period_matrix)
        return abs(value) / mp.exp(log_scale)

    def decompose(self, surface, u):
        """Real x, y with u = x + B y."""
        B = surface.period_matrix
        g = B.rows
        Y = mp.matrix([[mp.im(B[i, j]) for j in range(g)] for i in range(g)])
        y = mp.lu_solve(Y, mp.matrix([mp.im(x) for x in u]))
        y = [y[i] for i in range(g)]
        x = [mp.re(u[i]) - sum((mp.re(B[i, j]) * y[j] for j in range(g)), mp.mpf(0)) for i in range(g)]
        return x, y

    def reduce(self, surface, u):
        """(r, j, m) with u = r + j + B m for integer vectors j, m and |x|, |y| <= 1/2 for r."""
        x, y = self.decompose(surface, u)
        j = [int(mp.nint(v)) for v in x]
        m = [int(mp.nint(v)) for v in y]
        B = surface.period_matrix
        r = [u[i] - j[i] - sum((B[i, k] * m[k] for k in range(len(m))), mp.mpc(0)) for i in range(len(u))]
        return r, j, m

    def lattice_distance(self, surface, u):
        """Distance of u to the period lattice, in lattice coordinates."""
        if not len(u):
            return mp.mpf(0)
        x, y = self.decompose(surface, u)
        return max(abs(v - mp.nint(v)) for v in x + y)

    def _lattice_distances(self, surface, vectors):
        B = _complex_matrix(surface.period_matrix)
        y = np.real(np.linalg.solve(B.imag, vectors.imag.T).T)
        x = vectors.real - y @ B.real.T
        fractions = np.concatenate([x - np.round(x), y - np.round(y)], axis=-1)
        return np.abs(fractions).max(axis=-1)

    # Abel map

    def _is_branch_point(self, contour, z):
        return any(z == e for e in contour.ends)

    def _route_image(self, surface, z, sheet):
        contour = surface.contour
        g = surface.genus
        if z == contour.points[0]:
            return [mp.mpc(0)] * g
        try:
            route, _ = contour_service.router(contour, 'surface').route(
                complex(contour.points[0]), complex(z), start_sheets=(0, 1), target_sheet=sheet)
        except PathNotFound as e:
            raise PathNotFound('no admissible path for the Abel map', z=complex(z), sheet=sheet) from e
        route[-1] = z
        end = -0.5 if self._is_branch_point(contour, z) else 0
        inverse = self.inverse_hbar(contour)
        raw = [contour_service.route_integral(contour, route, inverse, (-0.5, end), sheet,
                                              factor=(lambda w, j=j: w ** j) if j else None)
               for j in range(g)]
        return self._normalized(surface, raw)

    def _inverse_laurent(self, contour):
        def build():
            ratio = max(abs(w) for w in contour.points) / contour_service.far_radius(contour)
            count = int(mp.prec * mp.log(2) / -mp.log(ratio)) + 8
            return laurent_coefficients(contour.points, self.inverse_hbar(contour).exponents, count)
        return contour.cached(('inverse_laurent', mp.prec), build)

    def _tail(self, surface, z, sheet):
        """Integral of dOmega from z to the point at infinity on `sheet`, for large |z|."""
        g = surface.genus
        e = self._inverse_laurent(surface.contour)
        raw = [sum((e[n] * z ** (j - g - n) / (g + n - j) for n in range(len(e))), mp.mpc(0)) for j in range(g)]
        return _scale(1 - 2 * sheet, self._normalized(surface, raw))

    def _infinity_image(self, surface, sheet):
        z_far = contour_service.far_radius(surface.contour) * mp.expj(mp.mpf('0.4'))
        return _add(self._route_image(surface, z_far, sheet), self._tail(surface, z_far, sheet))

    def abel_map(self, surface, point):
        """Omega(point) integrated from a1 inside the cut surface."""
        g = surface.genus
        if g == 0:
            return []
        if point.is_infinity:
            return list(surface.infinity_images[point.sheet])
        z = point.z
        if abs(z) >= contour_service.far_radius(surface.contour) and surface.infinity_images:
            return _sub(surface.infinity_images[point.sheet], self._tail(surface, z, point.sheet))
        key = ('abel', z, point.sheet, mp.prec)
        return list(surface.cached(key, lambda: self._route_image(surface, z, point.sheet)))

    def abel_derivative(self, surface, point):
        """d Omega / dz at a finite point."""
        contour = surface.contour
        z = point.z
        value = (1 - 2 * point.sheet) * contour_service.branch_sign(contour) * self.inverse_hbar(contour).value(z)
        return [surface.differential(k)(z) * value for k in range(surface.genus)]

    def abel_boundary(self, surface, t, direction, side, sheet):
        """Omega at a contour point t, approached from `side` of a chord with the given direction."""
        contour = surface.contour
        g = surface.genus
        z_off = contour_service.side_point(contour, t, direction, side)
        base = self.abel_map(surface, SurfacePoint(z_off, sheet))
        inverse = self.inverse_hbar(contour)
        raw = [contour_service.segment_integral(contour, inverse, z_off, t, sheet,
                                                factor=(lambda w, j=j: w ** j) if j else None)
               for j in range(g)]
        return _add(base, self._normalized(surface, raw))

    def divisor_image(self, surface, points):
        return _total([self.abel_map(surface, p) for p in points], surface.genus)

    def base_image(self, surface):
        return surface.cached(('base_image', mp.prec), lambda: self.divisor_image(surface, surface.base_divisor))

    # Riemann constants

    def probe_point(self, contour):
        center = sum(contour.points) / len(contour.points)
        return center + 2 * contour.diameter * mp.expj(mp.mpf('1.1'))

    def _riemann_constants(self, surface):
        """The half-period K with theta(K + Omega(D)) = 0 for all positive divisors D of degree g-1."""
        g = surface.genus
        B = surface.period_matrix
        if g == 1:
            probes = [[mp.mpc(0)]]
        else:
            points = [SurfacePoint.infinity(0), SurfacePoint.infinity(1),
                      SurfacePoint(self.probe_point(surface.contour), 0)]
            probes = [_scale(g - 1, self.abel_map(surface, p)) for p in points]
        best, best_score = None, None
        for bits in itertools.product((0, 1), repeat=2 * g):
            a, b = bits[:g], bits[g:]
            K = [(sum((B[j, m] * b[m] for m in range(g)), mp.mpc(0)) - a[j]) / 2 for j in range(g)]
            score = max(self.theta_relative(surface, _add(probe, K)) for probe in probes)
            if best_score is None or score < best_score:
                best, best_score = K, score
        if best_score > mp.mpf(Config.PERIOD_TOLERANCE):
            logger.warning(f'Riemann constants: theta only drops to {mp.nstr(best_score, 5)}')
        return best

    # Jacobi inversion

    def near_obstacle(self, contour, z, distance):
        if contour.branch_set.distance_to_cuts(complex(z)) < distance:
            return True
        basis = contour_service.cut_system(contour)
        return any(float(np.min(np.abs(path.array - complex(z)))) < distance for path in basis.a_paths)

    def _samples(self, surface):
        """Abel images of a spread of surface points, used to seed the inversion."""
        def build():
            contour = surface.contour
            diameter = contour.diameter
            center = sum(contour.points) / len(contour.points)
            entries = []
            for ring, radius in enumerate(self.sample_radii):
                for k in range(self.sample_angles):
                    angle = 2 * mp.pi * (k + mp.mpf(ring % 2) / 2) / self.sample_angles
                    z = center + radius * diameter * mp.expj(angle)
                    if self.near_obstacle(contour, z, 0.02 * float(diameter)):
                        continue
                    try:
                        image = self.abel_map(surface, SurfacePoint(z, 0))
                    except NsxError as e:
                        logger.debug(f'skipping sample {mp.nstr(z, 6)}: {e}')
                        continue
                    entries.append((SurfacePoint(z, 0), image))
                    entries.append((SurfacePoint(z, 1), _scale(-1, image)))
            for e in contour.ends:
                entries.append((SurfacePoint(e, 0), self.abel_map(surface, SurfacePoint(e, 0))))
            for c in contour.c_points:
                image = self.abel_map(surface, SurfacePoint(c, 1))
                entries.append((SurfacePoint(c, 1), image))
                entries.append((SurfacePoint(c, 0), _scale(-1, image)))
            for sheet in (0, 1):
                entries.append((SurfacePoint.infinity(sheet), list(surface.infinity_images[sheet])))
            logger.debug(f'{len(entries)} inversion samples')
            return entries
        return surface.cached(('samples', mp.prec), build)

    def _starts(self, surface, target):
        g = surface.genus
        entries = self._samples(surface)
        images = np.array([[complex(x) for x in image] for _, image in entries])
        goal = np.array([complex(x) for x in target])
        if g == 1:
            distances = self._lattice_distances(surface, images - goal)
            return [[entries[i][0]] for i in np.argsort(distances)[:self.newton_starts]]
        first, second = np.triu_indices(len(entries))
        distances = self._lattice_distances(surface, images[first] + images[second] - goal)
        order = np.argsort(distances)[:self.newton_starts]
        return [[entries[first[i]][0], entries[second[i]][0]] for i in order]

    def _chart(self, contour, point):
        if abs(point.z) >= contour_service.far_radius(contour):
            return 'far', None
        radius = self.branch_chart_radius * contour.diameter
        for e in contour.ends:
            if abs(point.z - e) < radius:
                return 'branch', e
        return 'plane', None

    def _chart_derivative(self, surface, point, chart, anchor):
        derivative = self.abel_derivative(surface, point)
        if chart == 'branch':
            factor = 2 * mp.sqrt(point.z - anchor)
        elif chart == 'far':
            factor = -point.z ** 2
        else:
            factor = 1
        return [x * factor for x in derivative]

    def _chart_limit(self, contour, chart):
        if chart == 'branch':
            return mp.sqrt(self.branch_chart_radius * contour.diameter) / 2
        if chart == 'far':
            return 1 / (2 * contour_service.far_radius(contour))
        return contour.diameter / 4

    def _parity(self, contour, path):
        branch_set = contour.branch_set
        if not len(branch_set.chord_starts):
            return 0
        crossings = 0
        for a, b in zip(path, path[1:]):
            mask, _, _, _ = segment_crossings(complex(a), complex(b), branch_set.chord_starts, branch_set.chord_stops)
            crossings += int(np.count_nonzero(mask))
        return crossings % 2

    def _move(self, contour, point, chart, anchor, step):
        """Surface point reached by a chart step, with the sheet carried across the cuts."""
        z = point.z
        if chart == 'far':
            w = 1 / z + step
            if abs(w) * contour_service.far_radius(contour) < mp.mpf(2) ** (-mp.prec // 2):
                return SurfacePoint.infinity(point.sheet)
            path = [z, 1 / w]
        elif chart == 'branch':
            s = mp.sqrt(z - anchor)
            path = [anchor + (s + step * mp.mpf(i) / 8) ** 2 for i in range(9)]
        else:
            path = [z, z + step]
        return SurfacePoint(path[-1], point.sheet ^ self._parity(contour, path))

    def _release(self, contour, point):
        """Moves a point sitting on a branch point off it, where the branch chart is degenerate."""
        if point.is_infinity or not self._is_branch_point(contour, point.z):
            return point
        offset = self.branch_chart_radius * contour.diameter / 4
        for attempt in range(8):
            z = point.z + offset * mp.expj(mp.mpf('0.37') + attempt * mp.pi / 4)
            if contour.branch_set.distance_to_cuts(complex(z)) > float(offset) / 4:
                return SurfacePoint(z, 0)
        return point

    def _residual(self, surface, points, target):
        images = self.divisor_image(surface, points)
        r, _, _ = self.reduce(surface, _sub(images, target))
        return r, self.lattice_distance(surface, r)

    def _newton(self, surface, points, target, tol):
        contour = surface.contour
        g = surface.genus
        points = [self._release(contour, p) for p in points]
        r, size = self._residual(surface, points, target)
        for iteration in range(self.newton_iterations):
            if size < tol:
                break
            free = [i for i, p in enumerate(points) if not p.is_infinity]
            if not free:
                break
            charts = [self._chart(contour, points[i]) for i in free]
            J = mp.matrix(g, len(free))
            for col, (i, (chart, anchor)) in enumerate(zip(free, charts)):
                for row, value in enumerate(self._chart_derivative(surface, points[i], chart, anchor)):
                    J[row, col] = value
            rhs = mp.matrix([-x for x in r])
            try:
                step = mp.lu_solve(J, rhs) if J.cols == g else mp.lu_solve(J.H * J, J.H * rhs)
            except ZeroDivisionError:
                break
            factor = mp.mpf(1)
            for col, (chart, _) in enumerate(charts):
                if abs(step[col]):
                    factor = min(factor, self._chart_limit(contour, chart) / abs(step[col]))
            for attempt in range(6):
                try:
                    moved = list(points)
                    for col, (i, (chart, anchor)) in enumerate(zip(free, charts)):
                        moved[i] = self._move(contour, points[i], chart, anchor, factor * step[col])
                    new_r, new_size = self._residual(surface, moved, target)
                except NsxError as e:
                    logger.debug(f'inversion step rejected: {e}')
                    factor /= 2
                    continue
                if new_size < size or attempt == 5:
                    points, r, size = moved, new_r, new_size
                    break
                factor /= 2
        return points, size

    def _canonical(self, contour, points):
        """(divisor, unique) with special pairs replaced by the canonical one."""
        diameter = contour.diameter
        finite = [p for p in points if not p.is_infinity]
        infinite = [p for p in points if p.is_infinity]
        special = False
        if len(points) == 2:
            if len(infinite) == 2 and infinite[0].sheet != infinite[1].sheet:
                special = True
            elif len(finite) == 2 and abs(finite[0].z - finite[1].z) < self.special_tolerance * diameter:
                near_end = any(abs(finite[0].z - e) < self.special_tolerance * diameter for e in contour.ends)
                special = finite[0].sheet != finite[1].sheet or near_end
        if special:
            return [SurfacePoint.infinity(1), SurfacePoint.infinity(0)], False
        ordered = sorted(points, key=lambda p: (p.is_infinity, float(mp.re(p.z)) if p.z is not None else 0,
                                                float(mp.im(p.z)) if p.z is not None else 0, p.sheet))
        return ordered, True

    @measure_latency('surface.jacobi_invert')
    def jacobi_invert(self, surface, c):
        """Divisor t_1..t_g with sum Omega(t_j) = c + sum Omega(b_j on sheet 1) modulo the lattice."""
        g = surface.genus
        if g == 0:
            return [], True
        if g > self.genus_cap:
            raise GenusCapExceeded('Jacobi inversion is limited to small genus', genus=g, cap=self.genus_cap)
        contour = surface.contour
        target = _add([to_mpc(x) for x in c], self.base_image(surface))
        tol = mp.mpf(Config.DEFAULT_TOLERANCE)
        if g == 2 and self.lattice_distance(surface, target) < tol:
            return [SurfacePoint.infinity(1), SurfacePoint.infinity(0)], False
        best = None
        for start in self._starts(surface, target):
            points, size = self._newton(surface, start, target, tol)
            if best is None or size < best[1]:
                best = (points, size)
            if size < tol:
                divisor, unique = self._canonical(contour, points)
                logger.debug(f'inverted to {divisor} (residual {mp.nstr(size, 5)})')
                return divisor, unique
        raise InversionFailed('Newton iteration did not reach the target', residual=float(best[1]), tol=tol)

    # Cauchy kernel

    def _density_integral(self, surface, density, k, weight=None, arc=None, chord_map=None, subtract=None):
        """sigma * int over arc k of psi(t) weight(t) / hbar+(t) dt."""
        contour = surface.contour
        frame = contour.frame(k, 1)
        inverse = self.inverse_hbar(contour)
        sign = contour_service.branch_sign(contour)
        arc = arc if arc is not None else contour.cut_arcs[k]

        def chord_integrand(i):
            original = chord_map(i) if chord_map is not None else i
            reciprocal = frame.chord_function(inverse, original)
            psi = density.function(k, original)

            def evaluate(t):
                value = sign * psi(t) * reciprocal(t)
                if subtract is not None:
                    return (value - subtract[0]) / (t - subtract[1])
                return value * weight(t) if weight is not None else value
            return evaluate

        return mpcore_service.arc_quadrature(arc, chord_integrand, density.end_exponents[k],
                                             self.density_tolerance(), chordwise=True)

    def density_moments(self, surface, density):
        """mu_j = sum over the arcs of sigma * int psi t**j / hbar+, j = 0..g."""
        g = surface.genus

        def build():
            return [sum((self._density_integral(surface, density, k, weight=(lambda t, j=j: t ** j) if j else None)
                         for k in density.arcs), mp.mpc(0)) for j in range(g + 1)]
        return density.cached(('moments', mp.prec), build)

    def cycle_integrals(self, surface, density):
        """Integrals of psi dOmega_k over the lifted contour."""
        mu = self.density_moments(surface, density)
        g = surface.genus
        return [2 * sum((surface.coefficients[k][j] * mu[j] for j in range(g)), mp.mpc(0)) for k in range(g)]

    def _a_path_kernel(self, surface, z):
        """H_k(z) = 2 sigma int over a-path k of dw / ((w - z) hbar(w))."""
        def build():
            return [2 * self._path_moments(surface.contour, path, 1, weight=lambda w: 1 / (w - z))[0]
                    for path in surface.basis.a_paths]
        return surface.cached(('a_kernel', z, mp.prec), build)

    def _kernel_correction(self, surface, density, z):
        if not surface.genus:
            return mp.mpc(0)
        H = self._a_path_kernel(surface, z)
        I = self.cycle_integrals(surface, density)
        return sum((h * i for h, i in zip(H, I)), mp.mpc(0))

    def cauchy_kernel(self, surface, density, point):
        """Psi(point): the solution of Psi+ - Psi- = psi on the lifted contour, zero a-periods of its jump data."""
        contour = surface.contour
        g = surface.genus
        orientation = 1 - 2 * point.sheet
        if point.is_infinity:
            mu = self.density_moments(surface, density)
            I = self.cycle_integrals(surface, density)
            D = mu[g] - sum((surface.top_a_moments[k] / 2 * I[k] for k in range(g)), mp.mpc(0))
            return orientation * -D / (2 * mp.pi * mp.mpc(0, 1))
        z = point.z
        if self.near_obstacle(contour, z, Config.CONTOUR_CLEARANCE * float(contour.diameter)):
            raise OnCut('Cauchy kernel evaluated on the contour or an a-path', z=complex(z))

        def build():
            total = 2 * sum((self._density_integral(surface, density, k, weight=lambda t: 1 / (t - z))
                             for k in density.arcs), mp.mpc(0))
            total -= self._kernel_correction(surface, density, z)
            hbar = contour_service.branch_sign(contour) * contour.hbar.value(z)
            return hbar * total / (4 * mp.pi * mp.mpc(0, 1))
        return orientation * density.cached(('kernel', z, mp.prec), build)

    def cauchy_boundary(self, surface, density, k, chord, t, side, sheet):
        """Trace of Psi at t inside chord `chord` of cut arc k, from `side` (+1 left) on `sheet`."""
        contour = surface.contour
        t = to_mpc(t)
        points = list(contour.cut_arcs[k].oriented_points())
        direction = points[chord + 1] - points[chord]
        reciprocal = contour_service.branch_sign(contour) * \
            contour.frame(k, 1).chord_function(self.inverse_hbar(contour), chord)(t)
        total = mp.mpc(0)
        for j in density.arcs:
            if j != k:
                total += self._density_integral(surface, density, j, weight=lambda s: 1 / (s - t))
        if k in density.arcs:
            F = density.function(k, chord)(t) * reciprocal
            split = ArcPath(points[:chord + 1] + [t] + points[chord + 1:])
            principal = self._density_integral(surface, density, k, arc=split, subtract=(F, t),
                                               chord_map=lambda i: i if i <= chord else i - 1)
            eta = contour.diameter * mp.mpf(2) ** (-(mp.prec // 2))
            z = t + eta * mp.mpc(0, 1) * direction / abs(direction)
            split_points = split.oriented_points()
            logs = sum((mp.log((b - z) / (a - z)) for a, b in zip(split_points, split_points[1:])), mp.mpc(0))
            principal += F * (logs - mp.pi * mp.mpc(0, 1))
            total += principal + side * mp.pi * mp.mpc(0, 1) * F
        total = 2 * total - self._kernel_correction(surface, density, t)
        hbar = side / reciprocal
        return (1 - 2 * sheet) * hbar * total / (4 * mp.pi * mp.mpc(0, 1))

    # identities

    def riemann_relations(self, surface):
        """Symmetry defect of B and the smallest eigenvalue of Im B."""
        g = surface.genus
        if not g:
            return {'symmetry': mp.mpf(0), 'min_eigenvalue': None}
        B = surface.period_matrix
        size = max(abs(B[i, j]) for i in range(g) for j in range(g))
        symmetry = max(abs(B[i, j] - B[j, i]) for i in range(g) for j in range(g)) / size
        Y = np.array([[float(mp.im(B[i, j])) for j in range(g)] for i in range(g)])
        return {'symmetry': symmetry, 'min_eigenvalue': float(np.linalg.eigvalsh((Y + Y.T) / 2).min())}

    def late_addition_residual(self, surface):
        """Distance of Omega(inf0) - Omega(inf1) - (omega + B tau) to the lattice."""
        g = surface.genus
        if not g:
            return mp.mpf(0)
        B = surface.period_matrix
        shift = [surface.omega[j] + sum((B[j, k] * surface.tau[k] for k in range(g)), mp.mpc(0)) for j in range(g)]
        difference = _sub(surface.infinity_images[0], surface.infinity_images[1])
        return self.lattice_distance(surface, _sub(difference, shift))

    def green_periods(self, surface):
        """max |Re| of the a- and b-periods of the differential h dz."""
        contour = surface.contour
        if not surface.genus:
            return mp.mpf(0)
        values = [2 * contour_service.a_path_integral(contour, path) for path in surface.basis.a_paths]
        values += [2 * contour_service.b_arc_integral(contour, k) for k in surface.basis.b_arcs]
        return max(abs(mp.re(v)) for v in values)

    def theta_periodicity_residual(self, surface, samples=3, seed=0):
        """max relative defect of theta(u + e_k + B e_l) = exp(-pi i B_ll - 2 pi i u_l) theta(u)."""
        g = surface.genus
        if not g:
            return mp.mpf(0)
        B = surface.period_matrix
        rng = np.random.default_rng(seed)
        worst = mp.mpf(0)
        for _ in range(samples):
            u = [mp.mpc(*rng.uniform(-0.5, 0.5, 2)) for _ in range(g)]
            value = self.theta(surface, u)
            for k in range(g):
                for l in range(g):
                    shifted = [u[j] + (j == k) + B[j, l] for j in range(g)]
                    expected = mp.exp(-mp.pi * mp.mpc(0, 1) * (B[l, l] + 2 * u[l])) * value
                    worst = max(worst, abs(self.theta(surface, shifted) - expected) / max(abs(expected), mp.mpf(1e-300)))
        return worst

    def involution_residual(self, surface, z):
        """Distance of Omega(z, 0) + Omega(z, 1) to the lattice."""
        if not surface.genus:
            return mp.mpf(0)
        total = _add(self.abel_map(surface, SurfacePoint(z, 0)), self.abel_map(surface, SurfacePoint(z, 1)))
        return self.lattice_distance(surface, total)

    def diagnostics(self, surface, probe=None):
        relations = self.riemann_relations(surface)
        probe = probe if probe is not None else self.probe_point(surface.contour)
        return {
            'genus': surface.genus,
            'period_symmetry': relations['symmetry'],
            'period_min_eigenvalue': relations['min_eigenvalue'],
            'late_addition': self.late_addition_residual(surface),
            'green_periods': self.green_periods(surface),
            'theta_periodicity': self.theta_periodicity_residual(surface),
            'involution': self.involution_residual(surface, probe),
            'riemann_constants_vanishing': self._riemann_vanishing(surface)
        }

    def _riemann_vanishing(self, surface):
        g = surface.genus
        if not g:
            return mp.mpf(0)
        if g == 1:
            return self.theta_relative(surface, surface.riemann_constants)
        image = _scale(g - 1, self.abel_map(surface, SurfacePoint(self.probe_point(surface.contour), 0)))
        return self.theta_relative(surface, _add(image, surface.riemann_constants))


surface_service = SurfaceService()
