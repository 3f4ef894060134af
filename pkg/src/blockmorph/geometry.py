"""2D geometric kernels: areas, bounding boxes, Delaunay/MST networks,
point location, and face extraction from noded segment arrangements.

Coordinates are meters in a local projected plane (never raw lon/lat).
All functions are pure over immutable inputs and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError

from .errors import DegenerateGeometry, InsufficientPoints

SNAP_GRID = 1e-6    # meters; endpoint snap applied before polygonization
AREA_EPS = 1e-6     # m^2; at or below this a polygon is degenerate
BOUNDARY_EPS = 1e-9  # meters; distance at which a point counts as on-boundary


@dataclass(frozen=True)
class Point2:
    """A point in the local metric plane."""

    x: float
    y: float

    def __iter__(self):
        yield self.x
        yield self.y


def _as_xy(pt) -> tuple[float, float]:
    if isinstance(pt, Point2):
        return pt.x, pt.y
    x, y = pt
    return float(x), float(y)


def _signed_area(pts: np.ndarray) -> float:
    # mean-subtraction kills shoelace cancellation for far-from-origin rings
    x = pts[:, 0] - pts[:, 0].mean()
    y = pts[:, 1] - pts[:, 1].mean()
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _ring_lengths(pts: np.ndarray) -> np.ndarray:
    d = np.roll(pts, -1, axis=0) - pts
    return np.hypot(d[:, 0], d[:, 1])


class Ring:
    """Closed polygonal ring, stored open (last vertex != first).

    Requires >= 3 vertices, finite coordinates, distinct consecutive
    vertices, and no two edge interiors crossing properly. Vertex-touching
    (pinched) rings are tolerated; they arise from arrangement faces whose
    boundary meets itself at a cut vertex.
    """

    __slots__ = ("pts",)

    def __init__(self, coords):
        if isinstance(coords, Ring):
            pts = coords.pts.copy()
        else:
            raw = [_as_xy(c) for c in coords]
            if len(raw) >= 2 and raw[0] == raw[-1]:
                raw = raw[:-1]
            pts = np.asarray(raw, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise DegenerateGeometry("ring needs at least 3 vertices")
        if not np.isfinite(pts).all():
            raise DegenerateGeometry("ring has non-finite coordinates")
        if np.any(np.all(pts == np.roll(pts, -1, axis=0), axis=1)):
            raise DegenerateGeometry("ring has repeated consecutive vertices")
        if _edges_properly_cross(pts):
            raise DegenerateGeometry("ring is self-intersecting")
        self.pts = pts
        self.pts.setflags(write=False)

    @property
    def signed_area(self) -> float:
        return _signed_area(self.pts)

    def reversed(self) -> "Ring":
        r = object.__new__(Ring)
        r.pts = self.pts[::-1].copy()
        r.pts.setflags(write=False)
        return r

    def vertices(self) -> list[Point2]:
        return [Point2(float(x), float(y)) for x, y in self.pts]

    def __len__(self) -> int:
        return len(self.pts)


def _edges_properly_cross(pts: np.ndarray) -> bool:
    """True when any two non-adjacent ring edges cross in their interiors."""
    n = len(pts)
    if n < 4:
        return False
    a0 = pts
    a1 = np.roll(pts, -1, axis=0)
    for i in range(n - 2):
        lo = i + 2
        hi = n - 1 if i == 0 else n
        if lo >= hi:
            continue
        p, r = a0[i], a1[i] - a0[i]
        q0 = a0[lo:hi]
        q1 = a1[lo:hi]
        s = q1 - q0
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        qp = q0 - p
        tn = qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]
        un = qp[:, 0] * r[1] - qp[:, 1] * r[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = tn / denom
            u = un / denom
        eps = 1e-12
        crossing = (
            (np.abs(denom) > eps)
            & (t > eps) & (t < 1 - eps)
            & (u > eps) & (u < 1 - eps)
        )
        if crossing.any():
            return True
    return False


class PolygonM:
    """Polygon in meters: one outer ring (CCW) plus hole rings (CW).

    Orientation is normalized at construction so downstream signed-area
    formulas are unconditional. Holes must lie inside the outer ring and
    must not cross each other.
    """

    __slots__ = ("outer", "holes")

    def __init__(self, outer, holes=()):
        outer = outer if isinstance(outer, Ring) else Ring(outer)
        if outer.signed_area < 0:
            outer = outer.reversed()
        hs = []
        for h in holes:
            h = h if isinstance(h, Ring) else Ring(h)
            if h.signed_area > 0:
                h = h.reversed()
            hs.append(h)
        self.outer = outer
        self.holes = tuple(hs)
        for h in self.holes:
            if not all(_ray_cast(x, y, outer.pts) or _on_boundary(x, y, outer.pts)
                       for x, y in h.pts):
                raise DegenerateGeometry("hole vertex outside outer ring")

    def rings(self):
        yield self.outer
        yield from self.holes

    def all_pts(self) -> np.ndarray:
        return np.concatenate([r.pts for r in self.rings()])


def polygon_area(p: PolygonM) -> float:
    """Shoelace area of the outer ring minus hole areas, in m^2."""
    area = p.outer.signed_area + sum(h.signed_area for h in p.holes)
    if area <= AREA_EPS:
        raise DegenerateGeometry(f"polygon area {area:.3e} m^2 is degenerate")
    return area


def perimeter(p: PolygonM) -> float:
    """Length of the outer ring; hole rings are excluded."""
    return float(_ring_lengths(p.outer.pts).sum())


def aabb_area(p: PolygonM) -> float:
    """Area of the axis-aligned bounding rectangle of the outer ring."""
    pts = p.outer.pts
    w = float(pts[:, 0].max() - pts[:, 0].min())
    h = float(pts[:, 1].max() - pts[:, 1].min())
    return w * h


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, returned CCW without collinear vertices."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        out: list[np.ndarray] = []
        for q in seq:
            while len(out) >= 2:
                u, v = out[-2], out[-1]
                if (v[0] - u[0]) * (q[1] - u[1]) - (v[1] - u[1]) * (q[0] - u[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(q)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    return np.asarray(lower[:-1] + upper[:-1])


def min_obb_area(p: PolygonM) -> float:
    """Minimum-area oriented bounding rectangle via rotating calipers.

    Computed on the convex hull of the outer ring; the minimum rectangle of
    a polygon equals that of its hull, and one rectangle side is flush with
    a hull edge.
    """
    hull = convex_hull(p.outer.pts)
    if len(hull) < 3:
        return 0.0
    ev = np.roll(hull, -1, axis=0) - hull
    ln = np.hypot(ev[:, 0], ev[:, 1])
    keep = ln > 0
    c = ev[keep, 0] / ln[keep]
    s = ev[keep, 1] / ln[keep]
    xs, ys = hull[:, 0], hull[:, 1]
    rx = c[:, None] * xs[None, :] + s[:, None] * ys[None, :]
    ry = -s[:, None] * xs[None, :] + c[:, None] * ys[None, :]
    areas = (rx.max(axis=1) - rx.min(axis=1)) * (ry.max(axis=1) - ry.min(axis=1))
    return float(areas.min())


def polygon_centroid(p: PolygonM) -> Point2:
    """Area centroid of the polygon, holes subtracted."""
    ox, oy = p.outer.pts.mean(axis=0)  # local origin for numerical stability
    cx = cy = a = 0.0
    for ring in p.rings():
        pts = ring.pts - np.asarray([ox, oy])
        nxt = np.roll(pts, -1, axis=0)
        cross = pts[:, 0] * nxt[:, 1] - nxt[:, 0] * pts[:, 1]
        a += cross.sum() / 2.0
        cx += float(((pts[:, 0] + nxt[:, 0]) * cross).sum()) / 6.0
        cy += float(((pts[:, 1] + nxt[:, 1]) * cross).sum()) / 6.0
    if abs(a) < 1e-12:
        m = p.outer.pts.mean(axis=0)
        return Point2(float(m[0]), float(m[1]))
    return Point2(cx / a + ox, cy / a + oy)


def _on_boundary(x: float, y: float, pts: np.ndarray, eps: float = BOUNDARY_EPS) -> bool:
    nxt = np.roll(pts, -1, axis=0)
    dx = nxt[:, 0] - pts[:, 0]
    dy = nxt[:, 1] - pts[:, 1]
    px = x - pts[:, 0]
    py = y - pts[:, 1]
    seg2 = dx * dx + dy * dy
    t = np.clip(np.divide(px * dx + py * dy, seg2, out=np.zeros_like(seg2),
                          where=seg2 > 0), 0.0, 1.0)
    ex = px - t * dx
    ey = py - t * dy
    return bool(((ex * ex + ey * ey) <= eps * eps).any())


def _ray_cast(x: float, y: float, pts: np.ndarray) -> bool:
    inside = False
    x0, y0 = pts[-1]
    for x1, y1 in pts:
        if (y1 > y) != (y0 > y):
            xin = (x0 - x1) * (y - y1) / (y0 - y1) + x1
            if x < xin:
                inside = not inside
        x0, y0 = x1, y1
    return inside


def point_in_polygon(pt, p: PolygonM) -> bool:
    """Ray-casting containment; boundary points (outer or hole) count inside."""
    x, y = _as_xy(pt)
    for ring in p.rings():
        if _on_boundary(x, y, ring.pts):
            return True
    if not _ray_cast(x, y, p.outer.pts):
        return False
    return not any(_ray_cast(x, y, h.pts) for h in p.holes)


@dataclass(frozen=True)
class EdgeSet:
    """A set of segments over indexed points, with the summed length."""

    points: tuple[Point2, ...]
    edges: tuple[tuple[int, int], ...]
    total_length: float

    @classmethod
    def build(cls, pts: np.ndarray, edges) -> "EdgeSet":
        norm = tuple((i, j) if i < j else (j, i) for i, j in edges)
        if len(set(norm)) != len(norm):
            raise ValueError("duplicate edges")
        total = math.fsum(
            math.dist(pts[i], pts[j]) for i, j in norm
        )
        points = tuple(Point2(float(x), float(y)) for x, y in pts)
        return cls(points=points, edges=norm, total_length=total)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def _mst_from_edges(n: int, edges: list[tuple[float, int, int]]) -> list[tuple[int, int]]:
    edges.sort()
    uf = _UnionFind(n)
    out = []
    for _, i, j in edges:
        if uf.union(i, j):
            out.append((i, j))
            if len(out) == n - 1:
                break
    return out


def _complete_graph_edges(pts: np.ndarray) -> list[tuple[float, int, int]]:
    n = len(pts)
    return [
        (math.dist(pts[i], pts[j]), i, j)
        for i in range(n)
        for j in range(i + 1, n)
    ]


def delaunay_mst(points) -> EdgeSet:
    """Minimum spanning tree of the Delaunay graph over distinct points.

    Collinear inputs (where triangulation is undefined) fall back to the
    MST of the complete graph, which has identical total length. Exactly
    N-1 edges for N distinct points.
    """
    pts = np.asarray([_as_xy(p) for p in points], dtype=float)
    if len(pts):
        pts = np.unique(pts, axis=0)
    n = len(pts)
    if n < 2:
        raise InsufficientPoints(f"need at least 2 distinct points, got {n}")
    if n == 2:
        return EdgeSet.build(pts, [(0, 1)])
    edges: list[tuple[float, int, int]] | None = None
    try:
        tri = Delaunay(pts)
        seen = set()
        for simplex in tri.simplices:
            for a in range(3):
                i, j = int(simplex[a]), int(simplex[(a + 1) % 3])
                key = (i, j) if i < j else (j, i)
                seen.add(key)
        edges = [(math.dist(pts[i], pts[j]), i, j) for i, j in sorted(seen)]
    except QhullError:
        edges = _complete_graph_edges(pts)
    mst = _mst_from_edges(n, edges)
    if len(mst) != n - 1:
        # disconnected Delaunay output (degenerate qhull result)
        mst = _mst_from_edges(n, _complete_graph_edges(pts))
    return EdgeSet.build(pts, mst)


# ---------------------------------------------------------------------------
# Polygonization of segment arrangements
# ---------------------------------------------------------------------------


def _snap(x: float, y: float) -> tuple[float, float]:
    return (round(x, 6), round(y, 6))


def _candidate_pairs(segs: np.ndarray) -> np.ndarray:
    """Index pairs whose AABBs share a coarse grid cell."""
    n = len(segs)
    lengths = np.hypot(segs[:, 2] - segs[:, 0], segs[:, 3] - segs[:, 1])
    cell = max(float(np.median(lengths)), 10.0 * SNAP_GRID)
    buckets: dict[tuple[int, int], list[int]] = {}
    inv = 1.0 / cell
    for i in range(n):
        x0, y0, x1, y1 = segs[i]
        cx0 = math.floor(min(x0, x1) * inv)
        cx1 = math.floor(max(x0, x1) * inv)
        cy0 = math.floor(min(y0, y1) * inv)
        cy1 = math.floor(max(y0, y1) * inv)
        for cx in range(cx0, cx1 + 1):
            for cy in range(cy0, cy1 + 1):
                buckets.setdefault((cx, cy), []).append(i)
    pairs = set()
    for members in buckets.values():
        if len(members) < 2:
            continue
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                pairs.add((members[a], members[b]))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    return np.asarray(sorted(pairs), dtype=np.int64)


def _node_segments(segs: np.ndarray) -> dict[int, list[tuple[float, float]]]:
    """Split points per segment index from pairwise intersections."""
    splits: dict[int, list[tuple[float, float]]] = {i: [] for i in range(len(segs))}
    pairs = _candidate_pairs(segs)
    if not len(pairs):
        return splits
    p = segs[pairs[:, 0], 0:2]
    p2 = segs[pairs[:, 0], 2:4]
    q = segs[pairs[:, 1], 0:2]
    q2 = segs[pairs[:, 1], 2:4]
    r = p2 - p
    s = q2 - q
    denom = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    qp = q - p
    rlen = np.hypot(r[:, 0], r[:, 1])
    slen = np.hypot(s[:, 0], s[:, 1])
    parallel = np.abs(denom) <= 1e-12 * rlen * slen
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
        u = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / denom
    tp = 1e-9 / np.maximum(rlen, SNAP_GRID)
    up = 1e-9 / np.maximum(slen, SNAP_GRID)
    hit = (~parallel) & (t >= -tp) & (t <= 1 + tp) & (u >= -up) & (u <= 1 + up)
    tx = np.clip(t[hit], 0.0, 1.0)
    ix = p[hit, 0] + tx * r[hit, 0]
    iy = p[hit, 1] + tx * r[hit, 1]
    ia = pairs[hit, 0]
    ib = pairs[hit, 1]
    for k in range(len(ix)):
        pt = (float(ix[k]), float(iy[k]))
        splits[int(ia[k])].append(pt)
        splits[int(ib[k])].append(pt)
    # collinear overlaps: project the other segment's endpoints
    cross_qp = qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]
    collinear = parallel & (np.abs(cross_qp) <= 1e-9 * np.maximum(rlen, 1.0))
    for k in np.nonzero(collinear)[0]:
        i, j = int(pairs[k, 0]), int(pairs[k, 1])
        for a, b in ((i, j), (j, i)):
            ax0, ay0, ax1, ay1 = segs[a]
            adx, ady = ax1 - ax0, ay1 - ay0
            alen2 = adx * adx + ady * ady
            if alen2 <= 0:
                continue
            for ex, ey in ((segs[b, 0], segs[b, 1]), (segs[b, 2], segs[b, 3])):
                tt = ((ex - ax0) * adx + (ey - ay0) * ady) / alen2
                if 1e-9 < tt < 1 - 1e-9:
                    splits[a].append((float(ex), float(ey)))
    return splits


def _trace_faces(vert_xy: list[tuple[float, float]],
                 adjacency: dict[int, set[int]]):
    """Split directed edges into boundary cycles of arrangement faces.

    At vertex v reached via u, the walk continues along the neighbor
    immediately clockwise of the reverse direction, which traces every
    bounded face CCW exactly once and unbounded/enclosing boundaries CW.
    """
    order: dict[int, list[int]] = {}
    pos: dict[int, dict[int, int]] = {}
    for v, nbrs in adjacency.items():
        vx, vy = vert_xy[v]
        srt = sorted(nbrs, key=lambda n: math.atan2(vert_xy[n][1] - vy,
                                                    vert_xy[n][0] - vx))
        order[v] = srt
        pos[v] = {n: k for k, n in enumerate(srt)}
    visited: set[tuple[int, int]] = set()
    cycles: list[list[int]] = []
    for v0 in sorted(adjacency):
        for w0 in order[v0]:
            if (v0, w0) in visited:
                continue
            cycle = [v0]
            a, b = v0, w0
            while True:
                visited.add((a, b))
                cycle.append(b)
                nbrs = order[b]
                k = pos[b][a]
                nxt = nbrs[k - 1]
                a, b = b, nxt
                if (a, b) == (v0, w0):
                    break
            cycles.append(cycle[:-1])
    return cycles


def polygonize(segments) -> list[PolygonM]:
    """Bounded faces of the planar arrangement of the given segments.

    Endpoints are snapped to a 1e-6 m grid, segments are noded at mutual
    intersections, dangling edges are pruned, and each bounded face is
    returned as a PolygonM (boundaries of nested components become holes).
    Faces are ordered by (min x, min y, area) for determinism.
    """
    raw = []
    for a, b in segments:
        ax, ay = _snap(*_as_xy(a))
        bx, by = _snap(*_as_xy(b))
        if (ax, ay) != (bx, by):
            raw.append((ax, ay, bx, by))
    if not raw:
        return []
    segs = np.asarray(raw, dtype=float)
    splits = _node_segments(segs)

    edge_keys: set[tuple[tuple[float, float], tuple[float, float]]] = set()
    for i in range(len(segs)):
        x0, y0, x1, y1 = segs[i]
        dx, dy = x1 - x0, y1 - y0
        ln2 = dx * dx + dy * dy
        chain = [(0.0, (x0, y0)), (1.0, (x1, y1))]
        for (px, py) in splits[i]:
            t = ((px - x0) * dx + (py - y0) * dy) / ln2
            chain.append((t, (px, py)))
        chain.sort(key=lambda it: it[0])
        prev = None
        for _, (px, py) in chain:
            cur = _snap(px, py)
            if prev is not None and cur != prev:
                key = (prev, cur) if prev < cur else (cur, prev)
                edge_keys.add(key)
            if prev is None or cur != prev:
                prev = cur

    vid: dict[tuple[float, float], int] = {}
    vert_xy: list[tuple[float, float]] = []

    def _vid(pt):
        i = vid.get(pt)
        if i is None:
            i = len(vert_xy)
            vid[pt] = i
            vert_xy.append(pt)
        return i

    adjacency: dict[int, set[int]] = {}
    for a, b in sorted(edge_keys):
        ia, ib = _vid(a), _vid(b)
        adjacency.setdefault(ia, set()).add(ib)
        adjacency.setdefault(ib, set()).add(ia)

    # prune dangling chains
    stack = [v for v, nbrs in adjacency.items() if len(nbrs) <= 1]
    while stack:
        v = stack.pop()
        nbrs = adjacency.get(v)
        if nbrs is None or len(nbrs) > 1:
            continue
        for n in list(nbrs):
            adjacency[n].discard(v)
            if len(adjacency[n]) <= 1:
                stack.append(n)
        adjacency.pop(v, None)
    adjacency = {v: n for v, n in adjacency.items() if n}
    if not adjacency:
        return []

    cycles = _trace_faces(vert_xy, adjacency)
    pos_faces: list[tuple[float, np.ndarray]] = []
    neg_cycles: list[np.ndarray] = []
    for cyc in cycles:
        pts = np.asarray([vert_xy[i] for i in cyc], dtype=float)
        area = _signed_area(pts)
        if area > 1e-9:
            pos_faces.append((area, pts))
        elif area < -1e-9:
            neg_cycles.append(pts)

    holes_for: dict[int, list[np.ndarray]] = {}
    for neg in neg_cycles:
        rep = min(map(tuple, neg))
        best = None
        for fi, (area, pts) in enumerate(pos_faces):
            if _on_boundary(rep[0], rep[1], pts):
                continue
            if _ray_cast(rep[0], rep[1], pts):
                if best is None or area < pos_faces[best][0]:
                    best = fi
        if best is not None:
            holes_for.setdefault(best, []).append(neg)

    faces = []
    for fi, (_, pts) in enumerate(pos_faces):
        faces.append(PolygonM(Ring(pts), holes_for.get(fi, ())))
    faces.sort(key=lambda f: (float(f.outer.pts[:, 0].min()),
                              float(f.outer.pts[:, 1].min()),
                              f.outer.signed_area))
    return faces
