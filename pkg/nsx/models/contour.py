from mpmath import mp

from nsx.models.mp_types import to_mpc
from nsx.services.mpcore_service import ArcFrame, PowerProduct
from nsx.utils.numformat import format_complex, format_real, format_vector


class StahlContour:
    """Minimal-capacity contour: B, traced arcs and the branch data built on them.

    `points` lists the a's (lexicographic), then the simple zeros b of B, then the double
    zeros c. Arc samples run in the arc's orientation.
    """

    def __init__(self, A, B, a_points, b_points, c_points, arcs, cut_arcs, arc_ends,
                 components, branch_set, period_residual):
        self.A = A
        self.B = B
        self.a_points = tuple(a_points)
        self.b_points = tuple(b_points)
        self.c_points = tuple(c_points)
        self.points = self.a_points + self.b_points + self.c_points
        self.arcs = tuple(arcs)
        self.cut_arcs = tuple(cut_arcs)
        self.arc_ends = tuple(arc_ends)
        self.components = tuple(tuple(c) for c in components)
        self.branch_set = branch_set
        self.period_residual = period_residual
        self.diameter = max(abs(x - y) for x in self.a_points for y in self.a_points)
        self.h_exponents = [mp.mpf(-0.5)] * self.n_a + [mp.mpf(0.5)] * self.n_b + [mp.mpf(1)] * self.n_c
        self.hbar_exponents = [mp.mpf(0.5)] * (self.n_a + self.n_b) + [mp.mpf(0)] * self.n_c
        self.h = PowerProduct(branch_set, self.h_exponents)
        self.hbar = PowerProduct(branch_set, self.hbar_exponents)
        self.log_capacity = None
        self.green_constant = None
        self.xi = None
        self.phi_constant = None
        self.boundary_residual = None
        self._frames = {}
        self._cache = {}

    @property
    def n_a(self):
        return len(self.a_points)

    @property
    def n_b(self):
        return len(self.b_points)

    @property
    def n_c(self):
        return len(self.c_points)

    @property
    def ends(self):
        return self.points[:self.n_a + self.n_b]

    @property
    def m(self):
        return len(self.components)

    @property
    def genus(self):
        return self.n_a - self.m - 1

    @property
    def capacity(self):
        return mp.exp(self.log_capacity) if self.log_capacity is not None else None

    def index_of(self, point, tolerance):
        point = to_mpc(point)
        best, best_index = None, None
        for index, w in enumerate(self.points):
            distance = abs(w - point)
            if best is None or distance < best:
                best, best_index = distance, index
        return best_index if best is not None and best <= tolerance else None

    def component_of(self, index):
        for number, component in enumerate(self.components):
            if index in component:
                return number
        return None

    def incident_arcs(self, index):
        return [k for k, (start, stop) in enumerate(self.arc_ends) if index in (start, stop)]

    def frame(self, arc_index, side=1):
        key = (arc_index, side, mp.prec)
        if key not in self._frames:
            self._frames[key] = ArcFrame(self.branch_set, arc_index, side)
        return self._frames[key]

    def locate_chord(self, arc_index, t):
        arc = self.cut_arcs[arc_index]
        t = complex(t)
        best, best_index = None, 0
        for i in range(arc.chord_count):
            a, b = arc.array[i], arc.array[i + 1]
            d = b - a
            u = min(max(((t - a) * d.conjugate()).real / abs(d) ** 2, 0.0), 1.0)
            distance = abs(t - (a + u * d))
            if best is None or distance < best:
                best, best_index = distance, i
        return best_index

    def end_exponent(self, index, exponents):
        return exponents[index] if index < self.n_a + self.n_b else 0

    def cached(self, key, factory):
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    def to_dict(self, digits=30):
        return {
            'A': format_vector(self.A.coefficients, digits),
            'B': format_vector(self.B.coefficients, digits),
            'a_points': format_vector(self.a_points, digits),
            'b_points': format_vector(self.b_points, digits),
            'c_points': format_vector(self.c_points, digits),
            'components': self.m,
            'genus': self.genus,
            'arcs': [{'start': int(s), 'end': int(e), 'samples': len(arc.points)}
                     for (s, e), arc in zip(self.arc_ends, self.arcs)],
            'capacity': format_real(self.capacity, digits) if self.capacity is not None else None,
            'xi': format_complex(self.xi, digits) if self.xi is not None else None,
            'period_residual': format_real(self.period_residual, digits),
            'boundary_residual': format_real(self.boundary_residual, digits)
            if self.boundary_residual is not None else None
        }


class HomologyBasis:
    """Labels of A, the b-arcs and the a-paths of the cut system."""

    def __init__(self, labels, b_arcs, a_paths, crossing_points, component_sizes):
        self.labels = tuple(labels)
        self.b_arcs = tuple(b_arcs)
        self.a_paths = list(a_paths)
        self.crossing_points = tuple(crossing_points)
        self.component_sizes = tuple(component_sizes)

    @property
    def genus(self):
        return len(self.b_arcs)

    @property
    def a_cycles(self):
        return [(path, (0, 1)) for path in self.a_paths]

    @property
    def b_cycles(self):
        return list(self.b_arcs)

    @property
    def a1(self):
        return self.labels[0]

    @property
    def a2(self):
        return self.labels[1]

    def reverse_a_path(self, k):
        self.a_paths[k] = self.a_paths[k].reversed().normalized()

    def to_dict(self, digits=30):
        return {
            'labels': list(self.labels),
            'b_arcs': list(self.b_arcs),
            'component_sizes': list(self.component_sizes),
            'a_paths': [format_vector(path.points, digits) for path in self.a_paths]
        }
