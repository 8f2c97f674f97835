import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from nsx.services.mpcore_service import segment_crossings, segment_distance
from nsx.utils.errors import PathNotFound
from nsx.utils.logger import logger


def _chords(polylines):
    starts, stops, owners = [], [], []
    for owner, line in enumerate(polylines):
        line = np.asarray(line, dtype=complex)
        starts.extend(line[:-1])
        stops.extend(line[1:])
        owners.extend([owner] * (len(line) - 1))
    return np.array(starts, dtype=complex), np.array(stops, dtype=complex), np.array(owners, dtype=int)


def _segment_chord_distance(p, q, starts, stops):
    """Minimum distance between segment pq and every chord (crossings count as zero)."""
    if not len(starts):
        return np.zeros(0)
    d1, _ = segment_distance(starts, p, q)
    d2, _ = segment_distance(stops, p, q)
    direction = stops - starts
    length2 = np.maximum(np.abs(direction) ** 2, 1e-300)
    u = np.clip(np.real((p - starts) * np.conj(direction)) / length2, 0, 1)
    d3 = np.abs(p - (starts + u * direction))
    u = np.clip(np.real((q - starts) * np.conj(direction)) / length2, 0, 1)
    d4 = np.abs(q - (starts + u * direction))
    distance = np.minimum(np.minimum(d1, d2), np.minimum(d3, d4))
    mask, _, _, _ = segment_crossings(p, q, starts, stops)
    distance[mask] = 0.0
    return distance


class PlanarRouter:
    """Shortest polylines between points that keep clear of obstacle polylines.

    Hard polylines may not be crossed. Crossing a soft polyline toggles the sheet label,
    so routes are searched over (waypoint, sheet) pairs.
    """

    def __init__(self, hard, soft, points, clearance, center, radius):
        self.hard = [np.asarray(line, dtype=complex) for line in hard]
        self.soft = [np.asarray(line, dtype=complex) for line in soft]
        self.points = np.asarray(points, dtype=complex)
        self.clearance = float(clearance)
        self.center = complex(center)
        self.radius = float(radius)
        self.hard_starts, self.hard_stops, _ = _chords(self.hard)
        self.soft_starts, self.soft_stops, _ = _chords(self.soft)
        self.waypoints = self._build_waypoints()
        self.edges = self._build_edges()
        logger.debug(f'Router: {len(self.waypoints)} waypoints, {len(self.edges)} edges')

    def _build_waypoints(self):
        c = self.clearance
        waypoints = [self.center + self.radius * np.exp(2j * np.pi * k / 24) for k in range(24)]
        for w in self.points:
            for k in range(8):
                waypoints.append(w + 4 * c * np.exp(2j * np.pi * (k + 0.5) / 8))
        for line in self.hard + self.soft:
            length = np.sum(np.abs(np.diff(line)))
            step = max(length / 12, 6 * c)
            travelled, last = 0.0, None
            for i in range(1, len(line) - 1):
                travelled += abs(line[i] - line[i - 1])
                if last is not None and travelled - last < step:
                    continue
                last = travelled
                tangent = line[i + 1] - line[i - 1]
                normal = 1j * tangent / abs(tangent)
                waypoints.append(line[i] + 3 * c * normal)
                waypoints.append(line[i] - 3 * c * normal)
            middle = line[len(line) // 2]
            tangent = line[min(len(line) - 1, len(line) // 2 + 1)] - line[max(0, len(line) // 2 - 1)]
            normal = 1j * tangent / abs(tangent)
            for scale in (0.05, 0.15):
                waypoints.append(middle + scale * length * normal)
                waypoints.append(middle - scale * length * normal)
        return np.array([w for w in waypoints if self._point_clear(w)], dtype=complex)

    def _point_clear(self, w):
        if len(self.points) and np.min(np.abs(self.points - w)) < 2 * self.clearance:
            return False
        for starts, stops in ((self.hard_starts, self.hard_stops), (self.soft_starts, self.soft_stops)):
            if len(starts):
                direction = stops - starts
                u = np.clip(np.real((w - starts) * np.conj(direction))
                            / np.maximum(np.abs(direction) ** 2, 1e-300), 0, 1)
                if np.min(np.abs(w - (starts + u * direction))) < 2 * self.clearance:
                    return False
        return True

    def _at_anchor(self, hits, anchors):
        flags = np.zeros(len(hits), dtype=bool)
        for a in anchors:
            flags |= np.abs(hits - a) < 1e-12 * max(1.0, abs(a))
        return flags

    def segment_parity(self, p, q, anchors=()):
        """Sheet parity of segment pq, or None when the segment is not admissible."""
        c = self.clearance
        trim = 3 * c
        v = q - p
        if len(self.hard_starts):
            mask, s, _, _ = segment_crossings(p, q, self.hard_starts, self.hard_stops)
            mask &= ~self._at_anchor(p + s * v, anchors)
            if np.any(mask):
                return None
            distance = _segment_chord_distance(p, q, self.hard_starts, self.hard_stops)
            close = distance < c
            for a in anchors:
                close &= ~((np.abs(self.hard_starts - a) < trim) | (np.abs(self.hard_stops - a) < trim))
            if np.any(close):
                return None
        if len(self.points):
            d, _ = segment_distance(self.points, p, q)
            close = d < c
            for a in anchors:
                close &= np.abs(self.points - a) > trim
            if np.any(close):
                return None
        parity = 0
        if len(self.soft_starts):
            mask, s, u, _ = segment_crossings(p, q, self.soft_starts, self.soft_stops)
            mask &= ~self._at_anchor(p + s * v, anchors)
            if np.any(mask):
                if np.any(mask & ((u < 1e-9) | (u > 1 - 1e-9))):
                    return None
                d = self.soft_stops[mask] - self.soft_starts[mask]
                sines = np.abs(np.imag(np.conj(v) * d)) / (abs(v) * np.abs(d))
                if np.any(sines < np.sin(np.radians(8))):
                    return None
                hits = p + s[mask] * v
                for a in anchors:
                    if np.any(np.abs(hits - a) < trim):
                        return None
                parity = int(np.count_nonzero(mask)) % 2
        return parity

    def _build_edges(self):
        edges = []
        count = len(self.waypoints)
        for i in range(count):
            for j in range(i + 1, count):
                parity = self.segment_parity(self.waypoints[i], self.waypoints[j])
                if parity is not None:
                    edges.append((i, j, parity, abs(self.waypoints[i] - self.waypoints[j])))
        return edges

    def route(self, start, target, start_sheets=(0,), target_sheet=0):
        """Polyline from start to target; returns (points, sheet at start)."""
        start, target = complex(start), complex(target)
        nodes = list(self.waypoints) + [start, target]
        count = len(nodes)
        s_index, t_index = count - 2, count - 1
        rows, cols, weights = [], [], []

        def connect(i, j, parity, weight):
            for sheet in (0, 1):
                rows.append(2 * i + sheet)
                cols.append(2 * j + (sheet ^ parity))
                weights.append(weight)

        for i, j, parity, weight in self.edges:
            connect(i, j, parity, weight)
        anchors = (start, target)
        direct = self.segment_parity(start, target, anchors)
        if direct is not None:
            connect(s_index, t_index, direct, abs(target - start))
        for anchor_index, anchor in ((s_index, start), (t_index, target)):
            for i, w in enumerate(self.waypoints):
                parity = self.segment_parity(anchor, w, (anchor,))
                if parity is not None:
                    connect(anchor_index, i, parity, abs(w - anchor))
        graph = csr_matrix((np.array(weights) + 1e-15, (rows, cols)), shape=(2 * count, 2 * count))
        sources = [2 * s_index + sheet for sheet in start_sheets]
        distances, predecessors, origins = dijkstra(graph, directed=False, indices=sources,
                                                    return_predecessors=True, min_only=True)
        goal = 2 * t_index + target_sheet
        if not np.isfinite(distances[goal]):
            raise PathNotFound('no admissible route', start=start, target=target, sheet=target_sheet)
        path = [goal]
        while predecessors[path[-1]] >= 0:
            path.append(predecessors[path[-1]])
        path.reverse()
        points = [nodes[node // 2] for node in path]
        return points, path[0] % 2
