import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockmorph.errors import DegenerateGeometry, InsufficientPoints
from blockmorph.geometry import (
    EdgeSet,
    Point2,
    PolygonM,
    Ring,
    aabb_area,
    convex_hull,
    delaunay_mst,
    min_obb_area,
    perimeter,
    point_in_polygon,
    polygon_area,
    polygon_centroid,
    polygonize,
)

from .oracles import min_rect_area_sweep, mst_total_length

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def rotated(pts, deg, cx=0.0, cy=0.0):
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return [(cx + c * (x - cx) - s * (y - cy), cy + s * (x - cx) + c * (y - cy))
            for x, y in pts]


# --- polygon_area -----------------------------------------------------------


def test_area_unit_square():
    assert polygon_area(PolygonM(Ring(UNIT_SQUARE))) == pytest.approx(1.0)


def test_area_square_with_hole():
    p = PolygonM(Ring([(0, 0), (10, 0), (10, 10), (0, 10)]),
                 [Ring([(4, 4), (5, 4), (5, 5), (4, 5)])])
    assert polygon_area(p) == pytest.approx(99.0)


def test_area_collinear_ring_degenerate():
    p = PolygonM(Ring([(0, 0), (1, 1), (2, 2)]))
    with pytest.raises(DegenerateGeometry):
        polygon_area(p)


def test_area_orientation_normalized():
    cw = PolygonM(Ring(list(reversed(UNIT_SQUARE))))
    assert polygon_area(cw) == pytest.approx(1.0)
    assert cw.outer.signed_area > 0


def test_ring_rejects_self_intersection():
    with pytest.raises(DegenerateGeometry):
        Ring([(0, 0), (1, 1), (1, 0), (0, 1)])  # bowtie


# --- perimeter --------------------------------------------------------------


def test_perimeter_unit_square():
    assert perimeter(PolygonM(Ring(UNIT_SQUARE))) == pytest.approx(4.0)


def test_perimeter_rectangle():
    assert perimeter(PolygonM(Ring([(0, 0), (1, 0), (1, 2), (0, 2)]))) == pytest.approx(6.0)


def test_perimeter_regular_hexagon():
    pts = [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]
    assert perimeter(PolygonM(Ring(pts))) == pytest.approx(6.0)


def test_perimeter_excludes_holes():
    p = PolygonM(Ring([(0, 0), (10, 0), (10, 10), (0, 10)]),
                 [Ring([(4, 4), (5, 4), (5, 5), (4, 5)])])
    assert perimeter(p) == pytest.approx(40.0)


# --- bounding boxes ---------------------------------------------------------


def test_aabb_unit_square():
    assert aabb_area(PolygonM(Ring(UNIT_SQUARE))) == pytest.approx(1.0)


def test_aabb_rotated_square():
    p = PolygonM(Ring(rotated(UNIT_SQUARE, 45)))
    assert aabb_area(p) == pytest.approx(2.0)


def test_aabb_right_triangle():
    p = PolygonM(Ring([(0, 0), (3, 0), (0, 4)]))
    assert aabb_area(p) == pytest.approx(12.0)


def test_min_obb_rotated_square():
    p = PolygonM(Ring(rotated(UNIT_SQUARE, 45)))
    assert min_obb_area(p) == pytest.approx(1.0, rel=1e-9)


def test_min_obb_axis_aligned_square():
    assert min_obb_area(PolygonM(Ring(UNIT_SQUARE))) == pytest.approx(1.0)


def test_min_obb_rotated_rectangle():
    rect = [(0, 0), (3, 0), (3, 1), (0, 1)]
    p = PolygonM(Ring(rotated(rect, 30)))
    assert min_obb_area(p) == pytest.approx(3.0, rel=1e-9)


def test_min_obb_matches_rotation_sweep():
    rng = np.random.default_rng(42)
    for _ in range(25):
        pts = rng.uniform(0, 100, size=(rng.integers(4, 16), 2))
        hull = convex_hull(pts)
        if len(hull) < 3:
            continue
        impl = min_obb_area(PolygonM(Ring(hull)))
        sweep = min_rect_area_sweep(hull)
        assert impl <= sweep + 1e-9
        assert abs(impl - sweep) / sweep < 1e-3


# --- delaunay_mst -----------------------------------------------------------


def test_mst_two_points():
    es = delaunay_mst([(0, 0), (3, 4)])
    assert len(es.edges) == 1
    assert es.total_length == pytest.approx(5.0)


def test_mst_equilateral_triangle():
    pts = [(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)]
    es = delaunay_mst(pts)
    assert len(es.edges) == 2
    assert es.total_length == pytest.approx(2.0)


def test_mst_unit_square_corners():
    es = delaunay_mst(UNIT_SQUARE)
    assert len(es.edges) == 3
    assert es.total_length == pytest.approx(3.0)


def test_mst_insufficient_points():
    with pytest.raises(InsufficientPoints):
        delaunay_mst([(1, 1)])
    with pytest.raises(InsufficientPoints):
        delaunay_mst([(1, 1), (1, 1)])  # duplicates collapse


def test_mst_collinear_fallback():
    es = delaunay_mst([(0, 0), (1, 0), (2, 0), (5, 0)])
    assert len(es.edges) == 3
    assert es.total_length == pytest.approx(5.0)


def test_mst_matches_complete_graph_oracle():
    rng = np.random.default_rng(7)
    for _ in range(60):
        n = int(rng.integers(2, 13))
        pts = rng.uniform(0, 50, size=(n, 2))
        es = delaunay_mst(pts)
        assert len(es.edges) == n - 1
        assert es.total_length == pytest.approx(mst_total_length(pts), rel=1e-9)


def test_edgeset_total_length_consistent():
    es = EdgeSet.build(np.asarray([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]),
                       [(0, 1), (1, 2)])
    assert es.total_length == pytest.approx(2.0, rel=1e-9)
    assert all(i < j for i, j in es.edges)


# --- point_in_polygon -------------------------------------------------------


def test_pip_center_and_outside():
    p = PolygonM(Ring(UNIT_SQUARE))
    assert point_in_polygon(Point2(0.5, 0.5), p)
    assert not point_in_polygon(Point2(2, 2), p)


def test_pip_boundary_counts_inside():
    p = PolygonM(Ring(UNIT_SQUARE))
    assert point_in_polygon((0.5, 0.0), p)
    assert point_in_polygon((1.0, 1.0), p)


def test_pip_inside_hole_is_outside():
    p = PolygonM(Ring([(0, 0), (10, 0), (10, 10), (0, 10)]),
                 [Ring([(3, 3), (7, 3), (7, 7), (3, 7)])])
    assert not point_in_polygon((5, 5), p)
    assert point_in_polygon((1, 1), p)
    assert point_in_polygon((3, 5), p)  # hole boundary is block boundary


# --- polygonize -------------------------------------------------------------


def unit_grid_segments(nx, ny):
    segs = []
    for i in range(nx + 1):
        for j in range(ny):
            segs.append(((i, j), (i, j + 1)))
    for j in range(ny + 1):
        for i in range(nx):
            segs.append(((i, j), (i + 1, j)))
    return segs


def test_polygonize_unit_square():
    faces = polygonize([((0, 0), (1, 0)), ((1, 0), (1, 1)),
                        ((1, 1), (0, 1)), ((0, 1), (0, 0))])
    assert len(faces) == 1
    assert polygon_area(faces[0]) == pytest.approx(1.0)


def test_polygonize_2x2_grid():
    segs = unit_grid_segments(2, 2)
    assert len(segs) == 12
    faces = polygonize(segs)
    assert len(faces) == 4
    for f in faces:
        assert polygon_area(f) == pytest.approx(1.0)


def test_polygonize_open_l_no_faces():
    assert polygonize([((0, 0), (1, 0)), ((1, 0), (1, 1))]) == []


def test_polygonize_missing_interior_segment_merges_faces():
    segs = [s for s in unit_grid_segments(2, 2) if s != ((1, 0), (1, 1))]
    faces = polygonize(segs)
    assert len(faces) == 3
    assert sorted(round(polygon_area(f), 9) for f in faces) == [1.0, 1.0, 2.0]


def test_polygonize_crossing_segments_noded():
    # an X inside a square adds 4 triangular faces
    segs = [((0, 0), (2, 0)), ((2, 0), (2, 2)), ((2, 2), (0, 2)), ((0, 2), (0, 0)),
            ((0, 0), (2, 2)), ((2, 0), (0, 2))]
    faces = polygonize(segs)
    assert len(faces) == 4
    assert math.fsum(polygon_area(f) for f in faces) == pytest.approx(4.0)


def test_polygonize_nested_component_becomes_hole():
    outer = [((0, 0), (10, 0)), ((10, 0), (10, 10)), ((10, 10), (0, 10)), ((0, 10), (0, 0))]
    inner = [((3, 3), (7, 3)), ((7, 3), (7, 7)), ((7, 7), (3, 7)), ((3, 7), (3, 3))]
    faces = polygonize(outer + inner)
    areas = sorted(polygon_area(f) for f in faces)
    assert areas == pytest.approx([16.0, 84.0])
    assert math.fsum(areas) == pytest.approx(100.0)


def test_polygonize_deterministic_ordering():
    segs = unit_grid_segments(3, 2)
    a = polygonize(segs)
    b = polygonize(list(reversed(segs)))
    assert len(a) == len(b) == 6
    for fa, fb in zip(a, b):
        assert np.allclose(fa.outer.pts, fb.outer.pts)


def test_polygonize_area_sum_matches_enclosure():
    faces = polygonize(unit_grid_segments(4, 3))
    assert math.fsum(polygon_area(f) for f in faces) == pytest.approx(12.0)


# --- properties -------------------------------------------------------------


@st.composite
def star_polygons(draw):
    # jittered-uniform angles keep every wedge (incl. wraparound) below pi,
    # so the radial polygon is always simple
    n = draw(st.integers(min_value=3, max_value=12))
    jitter = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
    radii = draw(st.lists(st.floats(1.0, 10.0), min_size=n, max_size=n))
    angles = [2 * math.pi * (k + 0.4 * jitter[k]) / n for k in range(n)]
    return [(r * math.cos(a), r * math.sin(a)) for a, r in zip(angles, radii)]


@settings(max_examples=60, deadline=None)
@given(star_polygons())
def test_min_obb_never_exceeds_aabb(pts):
    p = PolygonM(Ring(pts))
    assert min_obb_area(p) <= aabb_area(p) + 1e-9


@settings(max_examples=60, deadline=None)
@given(star_polygons(), st.floats(0, 2 * math.pi), st.floats(-1e4, 1e4),
       st.floats(-1e4, 1e4))
def test_area_rigid_motion_invariant(pts, angle, dx, dy):
    base = polygon_area(PolygonM(Ring(pts)))
    c, s = math.cos(angle), math.sin(angle)
    moved = [(c * x - s * y + dx, s * x + c * y + dy) for x, y in pts]
    assert polygon_area(PolygonM(Ring(moved))) == pytest.approx(base, rel=1e-9)


def test_centroid_square_with_hole():
    p = PolygonM(Ring([(0, 0), (4, 0), (4, 4), (0, 4)]),
                 [Ring([(0.5, 0.5), (1.5, 0.5), (1.5, 1.5), (0.5, 1.5)])])
    c = polygon_centroid(p)
    # hole pulls the centroid away from (2, 2)
    assert c.x > 2.0 and c.y > 2.0
    assert polygon_area(p) == pytest.approx(15.0)
