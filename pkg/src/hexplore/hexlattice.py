"""Hexagonal lattice geometry, window graphs, and discretized domains.

Orientation convention, used everywhere in this package: hexagons are
pointy-top, axial coordinates (q, r), edge length equal to the mesh delta.
The center of hexagon (q, r) is

    (sqrt(3) * delta * (q + r/2),  1.5 * delta * r)

Neighbor directions are counterclockwise starting east:
E=(1,0), NE=(0,1), NW=(-1,1), W=(-1,0), SW=(0,-1), SE=(1,-1).
Corner j of a hexagon sits at angle 30 + 60*j degrees from its center; edge k
(toward neighbor k) joins corners k-1 and k and has its midpoint at distance
(sqrt(3)/2) * delta from the center.  Mid-edges that share a lattice vertex
are therefore (sqrt(3)/2) * delta < delta apart.

All nearest-point selections break ties by smallest edge id; edge and vertex
ids are assigned in lexicographic (q, r) scan order, so indexing is
deterministic.
"""

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

SQRT3 = math.sqrt(3.0)

# neighbor axial offsets, CCW from east; neighbor k sits at angle 60*k degrees
HEX_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

# canonical owner of corner j: (dq, dr, corner class); class 0 = the owning
# hexagon's 90-degree corner, class 1 = its 270-degree corner
_CORNER_OWNER = (
    (0, 1, 1),    # j=0 (30 deg)  -> bottom corner of NE neighbor
    (0, 0, 0),    # j=1 (90 deg)  -> top corner of this hexagon
    (-1, 1, 1),   # j=2 (150 deg) -> bottom corner of NW neighbor
    (0, -1, 0),   # j=3 (210 deg) -> top corner of SW neighbor
    (0, 0, 1),    # j=4 (270 deg) -> bottom corner of this hexagon
    (1, -1, 0),   # j=5 (330 deg) -> top corner of SE neighbor
)


class WindowTooSmall(ValueError):
    pass


class EmptyDomain(ValueError):
    pass


class NoBoundaryMidEdge(ValueError):
    pass


class TargetTooCloseToBoundary(ValueError):
    pass


class EmptySet(ValueError):
    pass


class HexCoord(NamedTuple):
    q: int
    r: int


class MidEdge(NamedTuple):
    edge: int
    x: float
    y: float


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float


@dataclass(frozen=True)
class Polygon:
    points: tuple  # of (x, y)


@dataclass(frozen=True)
class HexList:
    coords: tuple  # of (q, r)


def hex_center(q: int, r: int, delta: float):
    return (SQRT3 * delta * (q + 0.5 * r), 1.5 * delta * r)


def hex_corners(q: int, r: int, delta: float):
    cx, cy = hex_center(q, r, delta)
    return [
        (cx + delta * math.cos(math.radians(30 + 60 * j)),
         cy + delta * math.sin(math.radians(30 + 60 * j)))
        for j in range(6)
    ]


def hex_area(delta: float) -> float:
    return 1.5 * SQRT3 * delta * delta


def _point_in_hex(px, py, cx, cy, delta, eps):
    x, y = px - cx, py - cy
    apo = 0.5 * SQRT3 * delta + eps
    if abs(x) > apo:
        return False
    for c, s in ((0.5, 0.5 * SQRT3), (-0.5, 0.5 * SQRT3)):
        if abs(x * c + y * s) > apo:
            return False
    return True


def _segments_cross(p1, p2, p3, p4):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _hex_intersects_rect(q, r, delta, x0, y0, x1, y1):
    cx, cy = hex_center(q, r, delta)
    px = min(max(cx, x0), x1)
    py = min(max(cy, y0), y1)
    eps = 1e-12 * delta
    if _point_in_hex(px, py, cx, cy, delta, eps):
        return True
    corners = hex_corners(q, r, delta)
    for x, y in corners:
        if x0 - eps <= x <= x1 + eps and y0 - eps <= y <= y1 + eps:
            return True
    rect = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    for i in range(6):
        for j in range(4):
            if _segments_cross(corners[i], corners[(i + 1) % 6],
                               rect[j], rect[(j + 1) % 4]):
                return True
    return False


class Window:
    """Lattice graph over all hexagons whose closure meets a bounding box.

    Immutable after construction; kernels index into the flat arrays.  The
    per-half-edge step tables encode, for a walker sitting on mid-edge e and
    moving toward endpoint side s, the left/right continuation edges and the
    hexagon straight ahead across that vertex.
    """

    def __init__(self, bounds, delta: float):
        x0, y0, x1, y1 = bounds
        if not (x1 > x0 and y1 > y0) or delta <= 0:
            raise WindowTooSmall("degenerate bounds or nonpositive delta")
        self.delta = float(delta)
        self.bounds = (float(x0), float(y0), float(x1), float(y1))

        coords = []
        any_full = False
        r_lo = int(math.floor((y0 - 2 * delta) / (1.5 * delta))) - 1
        r_hi = int(math.ceil((y1 + 2 * delta) / (1.5 * delta))) + 1
        for r in range(r_lo, r_hi + 1):
            q_lo = int(math.floor((x0 - 2 * delta) / (SQRT3 * delta) - 0.5 * r)) - 1
            q_hi = int(math.ceil((x1 + 2 * delta) / (SQRT3 * delta) - 0.5 * r)) + 1
            for q in range(q_lo, q_hi + 1):
                if _hex_intersects_rect(q, r, delta, x0, y0, x1, y1):
                    coords.append((q, r))
                    if not any_full:
                        eps = 1e-12 * delta
                        any_full = all(
                            x0 - eps <= x <= x1 + eps and y0 - eps <= y <= y1 + eps
                            for x, y in hex_corners(q, r, delta))
        if not any_full:
            raise WindowTooSmall("no hexagon fits inside the bounds")
        coords.sort()
        self._build(coords)

    @classmethod
    def from_coords(cls, coords, delta: float) -> "Window":
        """Window holding exactly the given axial coordinates (plus indexing)."""
        win = cls.__new__(cls)
        win.delta = float(delta)
        xs, ys = [], []
        for q, r in coords:
            for x, y in hex_corners(q, r, delta):
                xs.append(x)
                ys.append(y)
        win.bounds = (min(xs), min(ys), max(xs), max(ys))
        win._build(sorted(set((int(q), int(r)) for q, r in coords)))
        return win

    def _build(self, coords):
        delta = self.delta
        H = len(coords)
        self.n_hex = H
        self.hex_q = np.array([c[0] for c in coords], dtype=np.int32)
        self.hex_r = np.array([c[1] for c in coords], dtype=np.int32)
        self.hex_index = {c: i for i, c in enumerate(coords)}
        self.hex_x = SQRT3 * delta * (self.hex_q + 0.5 * self.hex_r)
        self.hex_y = 1.5 * delta * self.hex_r.astype(np.float64)

        vert_ids = {}
        edge_ids = {}
        edge_v = []
        edge_hex = []
        edge_owner_dir = []
        hex_edge = np.full((H, 6), -1, dtype=np.int32)
        hex_corner = np.full((H, 6), -1, dtype=np.int32)
        vert_pos = []

        def vertex_id(q, r, j):
            dq, dr, cls_ = _CORNER_OWNER[j]
            key = (q + dq, r + dr, cls_)
            vid = vert_ids.get(key)
            if vid is None:
                vid = len(vert_ids)
                vert_ids[key] = vid
                cx, cy = hex_center(q, r, delta)
                vert_pos.append((cx + delta * math.cos(math.radians(30 + 60 * j)),
                                 cy + delta * math.sin(math.radians(30 + 60 * j))))
            return vid

        for h, (q, r) in enumerate(coords):
            for j in range(6):
                hex_corner[h, j] = vertex_id(q, r, j)
            for k in range(6):
                nq, nr = q + HEX_DIRS[k][0], r + HEX_DIRS[k][1]
                if k < 3:
                    key = (q, r, k)
                else:
                    key = (nq, nr, k - 3)
                eid = edge_ids.get(key)
                if eid is None:
                    eid = len(edge_ids)
                    edge_ids[key] = eid
                    edge_v.append((hex_corner[h, (k - 1) % 6], hex_corner[h, k]))
                    nb = self.hex_index.get((nq, nr), -1)
                    edge_hex.append((h, nb))
                    edge_owner_dir.append((h, k))
                else:
                    a, b = edge_hex[eid]
                    if b < 0:
                        edge_hex[eid] = (a, h)
                hex_edge[h, k] = eid

        E = len(edge_ids)
        V = len(vert_ids)
        self.n_edge = E
        self.n_vert = V
        self.edge_v = np.array(edge_v, dtype=np.int32)
        self.edge_hex = np.array(edge_hex, dtype=np.int32)
        self.hex_edge = hex_edge
        self.hex_corner = hex_corner
        self.vert_x = np.array([p[0] for p in vert_pos])
        self.vert_y = np.array([p[1] for p in vert_pos])
        ox = self.hex_x[[d[0] for d in edge_owner_dir]]
        oy = self.hex_y[[d[0] for d in edge_owner_dir]]
        kk = np.array([d[1] for d in edge_owner_dir])
        self.edge_mx = ox + 0.5 * SQRT3 * delta * np.cos(np.radians(60.0 * kk))
        self.edge_my = oy + 0.5 * SQRT3 * delta * np.sin(np.radians(60.0 * kk))

        vert_edges = np.full((V, 3), -1, dtype=np.int32)
        vcount = np.zeros(V, dtype=np.int32)
        for e in range(E):
            for s in range(2):
                v = self.edge_v[e, s]
                vert_edges[v, vcount[v]] = e
                vcount[v] += 1
        self.vert_edges = vert_edges
        self.vert_degree = vcount

        # half-edge step tables: half id = 2*e + s, walker moving toward edge_v[e, s]
        he_left = np.full(2 * E, -1, dtype=np.int32)
        he_right = np.full(2 * E, -1, dtype=np.int32)
        he_ahead = np.full(2 * E, -1, dtype=np.int32)
        he_ahead_corner = np.full(2 * E, -1, dtype=np.int8)
        he_vert = np.empty(2 * E, dtype=np.int32)
        for e in range(E):
            for s in range(2):
                v = self.edge_v[e, s]
                he = 2 * e + s
                he_vert[he] = v
                dinx = self.vert_x[v] - self.edge_mx[e]
                diny = self.vert_y[v] - self.edge_my[e]
                left = right = -1
                for e2 in vert_edges[v]:
                    if e2 < 0 or e2 == e:
                        continue
                    dox = self.edge_mx[e2] - self.vert_x[v]
                    doy = self.edge_my[e2] - self.vert_y[v]
                    if dinx * doy - diny * dox > 0:
                        left = e2
                    else:
                        right = e2
                he_left[he] = left
                he_right[he] = right
                if left >= 0 and right >= 0:
                    fl = set(self.edge_hex[left]) & set(self.edge_hex[right])
                    fl.discard(-1)
                    fl -= set(self.edge_hex[e])
                    if fl:
                        ah = fl.pop()
                        he_ahead[he] = ah
                        for j in range(6):
                            if hex_corner[ah, j] == v:
                                he_ahead_corner[he] = j
                                break
        self.he_left = he_left
        self.he_right = he_right
        self.he_ahead = he_ahead
        self.he_ahead_corner = he_ahead_corner
        self.he_vert = he_vert

        # ring_halves[h, 2k] / [h, 2k+1]: half ids of edge k of hexagon h at its
        # corners k-1 and k; used for the local free-ring test around a hexagon
        ring = np.empty((H, 12), dtype=np.int32)
        for h in range(H):
            for k in range(6):
                e = hex_edge[h, k]
                va = hex_corner[h, (k - 1) % 6]
                ring[h, 2 * k] = 2 * e + (0 if self.edge_v[e, 0] == va else 1)
                vb = hex_corner[h, k]
                ring[h, 2 * k + 1] = 2 * e + (0 if self.edge_v[e, 0] == vb else 1)
        self.ring_halves = ring

        self.frame_edge = (self.edge_hex[:, 0] < 0) | (self.edge_hex[:, 1] < 0)

    def midedge(self, e: int) -> MidEdge:
        return MidEdge(int(e), float(self.edge_mx[e]), float(self.edge_my[e]))

    def hex_coord(self, h: int) -> HexCoord:
        return HexCoord(int(self.hex_q[h]), int(self.hex_r[h]))

    def other_vertex(self, e: int, v: int) -> int:
        a, b = self.edge_v[e]
        return int(b) if a == v else int(a)

    def shared_vertex(self, e1: int, e2: int) -> int:
        s1 = set(self.edge_v[e1])
        s2 = set(self.edge_v[e2])
        common = s1 & s2
        if len(common) != 1:
            raise ValueError(f"edges {e1},{e2} do not share exactly one vertex")
        return common.pop()


def build_window(bounds, delta: float) -> Window:
    """All hexagons whose closure intersects the axis-aligned bounds."""
    return Window(bounds, delta)


class HexDomain:
    """A finite, simply connected set of hexagon faces with its graph data.

    Derived data: domain edge masks, the topological boundary as a closed
    vertex polyline, and the ring of mid-edges just outside the domain within
    delta/2 of the boundary.  Immutable after construction.
    """

    def __init__(self, window: Window, hex_mask: np.ndarray, shape=None):
        self.window = window
        self.delta = window.delta
        self.hex_mask = hex_mask.astype(bool)
        self.shape = shape
        if not self.hex_mask.any():
            raise EmptyDomain("no hexagon in the domain")
        eh = window.edge_hex
        in_a = (eh[:, 0] >= 0) & self.hex_mask[np.clip(eh[:, 0], 0, None)]
        in_b = (eh[:, 1] >= 0) & self.hex_mask[np.clip(eh[:, 1], 0, None)]
        self.edge_in = in_a | in_b
        self.edge_interior = in_a & in_b
        self.edge_boundary = self.edge_in & ~self.edge_interior
        bv = np.zeros(window.n_vert, dtype=bool)
        for e in np.flatnonzero(self.edge_boundary):
            bv[window.edge_v[e, 0]] = True
            bv[window.edge_v[e, 1]] = True
        self.boundary_vert = bv
        ring = np.zeros(window.n_edge, dtype=bool)
        for e in np.flatnonzero(~self.edge_in):
            if bv[window.edge_v[e, 0]] or bv[window.edge_v[e, 1]]:
                ring[e] = True
        self.ring_edge = ring
        self.boundary_loop = self._trace_boundary()
        self._hash = None

    def _trace_boundary(self):
        win = self.window
        edges = np.flatnonzero(self.edge_boundary)
        if len(edges) == 0:
            return []
        # each boundary vertex carries exactly two boundary edges
        vmap = {}
        for e in edges:
            for v in win.edge_v[e]:
                vmap.setdefault(int(v), []).append(int(e))
        for v, es in vmap.items():
            if len(es) != 2:
                raise EmptyDomain("boundary is not a simple closed loop")
        e0 = int(edges.min())
        loop = [int(win.edge_v[e0, 0])]
        prev_e = e0
        v = int(win.edge_v[e0, 1])
        while v != loop[0]:
            loop.append(v)
            a, b = vmap[v]
            prev_e = b if a == prev_e else a
            v = int(win.other_vertex(prev_e, v))
        xs = win.vert_x[loop]
        ys = win.vert_y[loop]
        area = 0.5 * np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys)
        if area < 0:
            loop = [loop[0]] + loop[1:][::-1]
        return loop

    @property
    def hex_ids(self) -> np.ndarray:
        return np.flatnonzero(self.hex_mask)

    def hexes(self):
        return [self.window.hex_coord(h) for h in self.hex_ids]

    def n_hexes(self) -> int:
        return int(self.hex_mask.sum())

    def corner_points(self) -> np.ndarray:
        win = self.window
        vids = np.unique(win.hex_corner[self.hex_mask].ravel())
        return np.column_stack((win.vert_x[vids], win.vert_y[vids]))

    def domain_hash(self) -> str:
        if self._hash is None:
            m = hashlib.sha256()
            m.update(f"delta={self.delta!r}".encode())
            for h in self.hex_ids:
                m.update(f";{self.window.hex_q[h]},{self.window.hex_r[h]}".encode())
            self._hash = m.hexdigest()
        return self._hash

    def export_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["q", "r"])
            for h in self.hex_ids:
                w.writerow([int(self.window.hex_q[h]), int(self.window.hex_r[h])])


def _largest_component(window: Window, inside: np.ndarray) -> np.ndarray:
    """Largest edge-connected component of the masked hexagons."""
    comp = np.full(window.n_hex, -1, dtype=np.int64)
    best, best_size = -1, 0
    nxt = 0
    for start in np.flatnonzero(inside):
        if comp[start] >= 0:
            continue
        stack = [int(start)]
        comp[start] = nxt
        size = 0
        while stack:
            h = stack.pop()
            size += 1
            for k in range(6):
                e = window.hex_edge[h, k]
                a, b = window.edge_hex[e]
                nb = int(b) if a == h else int(a)
                if nb >= 0 and inside[nb] and comp[nb] < 0:
                    comp[nb] = nxt
                    stack.append(nb)
        if size > best_size or (size == best_size and best < 0):
            best, best_size = nxt, size
        nxt += 1
    return comp == best


def discretize_domain(shape, delta: float, window: Optional[Window] = None) -> HexDomain:
    """Largest edge-connected component of hexagons fully inside the shape.

    A hexagon belongs to the candidate set when its closed face lies entirely
    in the open shape; the walk therefore never leaves the continuous domain.
    """
    if isinstance(shape, HexList):
        win = Window.from_coords(shape.coords, delta)
        mask = np.zeros(win.n_hex, dtype=bool)
        for c in shape.coords:
            mask[win.hex_index[(int(c[0]), int(c[1]))]] = True
        mask = _largest_component(win, mask)
        return HexDomain(win, mask, shape)

    if isinstance(shape, Disk):
        cx, cy = shape.center.real, shape.center.imag
        rad = shape.radius
        if window is None:
            pad = 3 * delta
            window = Window((cx - rad - pad, cy - rad - pad,
                             cx + rad + pad, cy + rad + pad), delta)
        win = window
        eps = 1e-12 * max(rad, delta)
        inside = np.zeros(win.n_hex, dtype=bool)
        for h in range(win.n_hex):
            ok = True
            for j in range(6):
                v = win.hex_corner[h, j]
                if math.hypot(win.vert_x[v] - cx, win.vert_y[v] - cy) >= rad - eps:
                    ok = False
                    break
            inside[h] = ok
    elif isinstance(shape, Polygon):
        from shapely.geometry import Polygon as ShPolygon, Point as ShPoint
        poly = ShPolygon(shape.points)
        if window is None:
            x0, y0, x1, y1 = poly.bounds
            pad = 3 * delta
            window = Window((x0 - pad, y0 - pad, x1 + pad, y1 + pad), delta)
        win = window
        shrunk = poly.buffer(-1e-12 * max(1.0, delta))
        from shapely.geometry import Polygon as _P
        inside = np.zeros(win.n_hex, dtype=bool)
        for h in range(win.n_hex):
            hexpoly = _P(hex_corners(int(win.hex_q[h]), int(win.hex_r[h]), delta))
            inside[h] = shrunk.contains(hexpoly)
    else:
        raise TypeError(f"unsupported shape {shape!r}")

    if not inside.any():
        raise EmptyDomain("no hexagon is contained in the shape")
    mask = _largest_component(win, inside)
    return HexDomain(win, mask, shape)


def select_boundary_start(dom: HexDomain, a) -> MidEdge:
    """Ring mid-edge closest to a boundary point a, with a unique half-edge
    into the domain.  Ties break to the smallest edge id."""
    ax, ay = (a.real, a.imag) if isinstance(a, complex) else (a[0], a[1])
    win = dom.window
    best, best_d = -1, math.inf
    for e in np.flatnonzero(dom.ring_edge):
        n_on = int(dom.boundary_vert[win.edge_v[e, 0]]) + \
            int(dom.boundary_vert[win.edge_v[e, 1]])
        if n_on != 1:
            continue
        d = math.hypot(win.edge_mx[e] - ax, win.edge_my[e] - ay)
        if d < best_d - 1e-12 * dom.delta:
            best, best_d = int(e), d
    if best < 0:
        raise NoBoundaryMidEdge("boundary ring is empty")
    return win.midedge(best)


def select_interior_target(dom: HexDomain, b) -> MidEdge:
    """Interior mid-edge closest to b; its four neighbor mid-edges must lie in
    the domain so the walk toward the boundary can start with a 4-way fan."""
    bx, by = (b.real, b.imag) if isinstance(b, complex) else (b[0], b[1])
    win = dom.window
    best, best_d = -1, math.inf
    for e in np.flatnonzero(dom.edge_interior):
        d = math.hypot(win.edge_mx[e] - bx, win.edge_my[e] - by)
        if d < best_d - 1e-12 * dom.delta:
            best, best_d = int(e), d
    if best < 0:
        raise TargetTooCloseToBoundary("no interior mid-edge available")
    fan = []
    for s in range(2):
        v = win.edge_v[best, s]
        for e2 in win.vert_edges[v]:
            if e2 >= 0 and e2 != best:
                fan.append(int(e2))
    if len(fan) != 4 or not all(dom.edge_in[e] for e in fan):
        raise TargetTooCloseToBoundary(
            "target mid-edge does not have 4 in-domain neighbors")
    return win.midedge(best)


def extent(obj):
    """(d_x, d_y, diam) of a HexDomain (over hexagon corner points) or of an
    (n, 2) point array."""
    if isinstance(obj, HexDomain):
        pts = obj.corner_points()
    else:
        pts = np.asarray(obj, dtype=float)
        if pts.ndim != 2 or len(pts) == 0:
            raise EmptySet("empty point set")
    d_x = float(pts[:, 0].max() - pts[:, 0].min())
    d_y = float(pts[:, 1].max() - pts[:, 1].min())
    return d_x, d_y, _diameter(pts)


def _diameter(pts: np.ndarray) -> float:
    if len(pts) <= 48:
        hull = pts
    else:
        from scipy.spatial import ConvexHull
        hull = pts[ConvexHull(pts).vertices]
    d2 = 0.0
    for i in range(len(hull)):
        dx = hull[i + 1:, 0] - hull[i, 0]
        dy = hull[i + 1:, 1] - hull[i, 1]
        if len(dx):
            d2 = max(d2, float((dx * dx + dy * dy).max()))
    return math.sqrt(d2)


def parse_domain_spec(pairs: dict):
    """Shape + delta from key=value pairs (domain description files)."""
    shape_name = pairs.get("shape", "disk").strip().lower()
    delta = _parse_number(pairs.get("delta", "0.1"))
    if shape_name == "disk":
        cx, cy = (float(t) for t in pairs.get("center", "0,0").split(","))
        shape = Disk(complex(cx, cy), float(pairs.get("radius", "1.0")))
    elif shape_name == "polygon":
        pts = tuple(tuple(float(x) for x in p.split(","))
                    for p in pairs["points"].split(";"))
        shape = Polygon(pts)
    elif shape_name == "hexlist":
        coords = tuple(tuple(int(x) for x in p.split(","))
                       for p in pairs["hexes"].split(";"))
        shape = HexList(coords)
    else:
        raise ValueError(f"unknown shape '{shape_name}'")
    return shape, delta


def _parse_number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def load_key_value_file(path) -> dict:
    pairs = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            pairs[key.strip()] = value.strip()
    return pairs


def load_domain_file(path) -> HexDomain:
    shape, delta = parse_domain_spec(load_key_value_file(path))
    return discretize_domain(shape, delta)
