import numpy as np
import pytest
from scipy import stats

from cellcov import (
    BuildingSet,
    Point2D,
    Polygon,
    Region,
    classify_bs,
    point_in_polygon,
    sample_ppp,
    segment_intersects_polygon,
)
from cellcov.geom import sample_ppp_xy


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------


def winding_inside(px, py, poly):
    """Winding-number containment via summed signed angles (boundary excluded)."""
    xs, ys = poly.xs, poly.ys
    vx, vy = xs - px, ys - py
    wx, wy = np.roll(vx, -1), np.roll(vy, -1)
    angles = np.arctan2(vx * wy - vy * wx, vx * wx + vy * wy)
    return abs(angles.sum()) > np.pi


def brute_segments_cross(p1, q1, p2, q2):
    """Plain orientation-based segment intersection (closed, no epsilon)."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return int(v > 0) - int(v < 0)

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(
            a[1], b[1]
        )

    o1, o2 = orient(p1, q1, p2), orient(p1, q1, q2)
    o3, o4 = orient(p2, q2, p1), orient(p2, q2, q1)
    if o1 != o2 and o3 != o4:
        return True
    return (
        (o1 == 0 and on_seg(p1, q1, p2))
        or (o2 == 0 and on_seg(p1, q1, q2))
        or (o3 == 0 and on_seg(p2, q2, p1))
        or (o4 == 0 and on_seg(p2, q2, q1))
    )


def oracle_segment_hits(a, b, poly, samples=10_000):
    """Dense point sampling along the segment plus brute-force edge pairs."""
    ts = np.linspace(0.0, 1.0, samples)
    pxs = a.x + ts * (b.x - a.x)
    pys = a.y + ts * (b.y - a.y)
    if any(winding_inside(x, y, poly) for x, y in zip(pxs[::97], pys[::97])):
        return True
    if any(winding_inside(x, y, poly) for x, y in zip(pxs, pys)):
        return True
    x0, y0, x1, y1 = poly.edge_arrays
    seg_a, seg_b = (a.x, a.y), (b.x, b.y)
    return any(
        brute_segments_cross(seg_a, seg_b, (x0[i], y0[i]), (x1[i], y1[i]))
        for i in range(len(x0))
    )


# ---------------------------------------------------------------------------
# sample_ppp
# ---------------------------------------------------------------------------


def test_ppp_zero_density_empty():
    region = Region(0, 100, 0, 100)
    assert sample_ppp(region, 0.0, np.random.default_rng(0)) == []


def test_ppp_negative_density_rejected():
    with pytest.raises(ValueError):
        sample_ppp(Region(0, 1, 0, 1), -1.0, np.random.default_rng(0))


def test_ppp_mean_count_city_scale():
    # 4 km^2 region at 319 BSs worth of density
    region = Region(0, 2000, 0, 2000)
    rng = np.random.default_rng(7)
    counts = [len(sample_ppp_xy(region, 319 / 4e6, rng)) for _ in range(800)]
    assert abs(np.mean(counts) - 319) < 3 * np.sqrt(319 / 800)


def test_ppp_moment_oracle():
    # lambda * area = 50; empirical mean over 1e4 draws within 3 sigma
    region = Region(0, 100, 0, 100)
    rng = np.random.default_rng(123)
    draws = 10_000
    counts = [len(sample_ppp_xy(region, 50 / region.area, rng)) for _ in range(draws)]
    assert abs(np.mean(counts) - 50) < 3 * np.sqrt(50 / draws)


def test_ppp_deterministic():
    region = Region(0, 500, 0, 500)
    a = sample_ppp(region, 1e-3, np.random.default_rng(99))
    b = sample_ppp(region, 1e-3, np.random.default_rng(99))
    assert a == b


def test_ppp_uniformity_chi_square():
    region = Region(0, 400, 0, 400)
    rng = np.random.default_rng(2024)
    xy = sample_ppp_xy(region, 1e5 / region.area, rng)
    n = len(xy)
    ix = np.minimum((xy[:, 0] / 100).astype(int), 3)
    iy = np.minimum((xy[:, 1] / 100).astype(int), 3)
    observed = np.bincount(ix * 4 + iy, minlength=16)
    expected = n / 16
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    assert chi2 < stats.chi2.ppf(0.99, 15)


# ---------------------------------------------------------------------------
# point_in_polygon
# ---------------------------------------------------------------------------


def test_point_in_polygon_basic(unit_square):
    assert point_in_polygon(Point2D(0.5, 0.5), unit_square)
    assert not point_in_polygon(Point2D(2.0, 0.5), unit_square)


def test_point_on_boundary_counts_inside(unit_square):
    assert point_in_polygon(Point2D(0.0, 0.5), unit_square)
    assert point_in_polygon(Point2D(0.5, 1.0), unit_square)
    assert point_in_polygon(Point2D(1.0, 1.0), unit_square)  # vertex


def test_point_in_polygon_matches_winding_oracle(l_shape):
    rng = np.random.default_rng(5)
    for _ in range(100):
        x, y = rng.uniform(-1, 5, 2)
        assert point_in_polygon(Point2D(x, y), l_shape) == winding_inside(x, y, l_shape)


def test_convex_polygon_halfplane_agreement():
    # regular hexagon; inside iff on the inner side of every edge
    angles = np.linspace(0, 2 * np.pi, 7)[:-1]
    hexagon = Polygon([Point2D(np.cos(a), np.sin(a)) for a in angles])
    x0, y0, x1, y1 = hexagon.edge_arrays
    rng = np.random.default_rng(17)
    for _ in range(200):
        px, py = rng.uniform(-1.5, 1.5, 2)
        halfplane = bool(np.all((x1 - x0) * (py - y0) - (y1 - y0) * (px - x0) >= 0))
        assert point_in_polygon(Point2D(px, py), hexagon) == halfplane


def test_degenerate_polygons_rejected():
    with pytest.raises(ValueError):
        Polygon([Point2D(0, 0), Point2D(1, 0)])
    with pytest.raises(ValueError):
        Polygon([Point2D(0, 0), Point2D(1, 0), Point2D(2, 0)])  # collinear
    with pytest.raises(ValueError):
        Polygon([Point2D(0, 0), Point2D(1, 1), Point2D(1, 0), Point2D(0, 1)])  # bowtie


# ---------------------------------------------------------------------------
# segment_intersects_polygon
# ---------------------------------------------------------------------------


def test_segment_through_square(unit_square):
    assert segment_intersects_polygon(Point2D(-1, 0.5), Point2D(2, 0.5), unit_square)


def test_segment_outside_bbox(unit_square):
    assert not segment_intersects_polygon(Point2D(-5, -5), Point2D(-5, 5), unit_square)


def test_segment_fully_inside(unit_square):
    assert segment_intersects_polygon(Point2D(0.2, 0.2), Point2D(0.8, 0.8), unit_square)


def test_segment_vertex_touch_counts(unit_square):
    # grazes the (0, 1) corner only
    assert segment_intersects_polygon(Point2D(-1, 0), Point2D(1, 2), unit_square)


def test_segment_coincident_endpoints_rejected(unit_square):
    with pytest.raises(ValueError):
        segment_intersects_polygon(Point2D(0.5, 0.5), Point2D(0.5, 0.5), unit_square)


def test_segment_symmetry(l_shape, unit_square):
    rng = np.random.default_rng(31)
    for poly in (l_shape, unit_square):
        for _ in range(60):
            a = Point2D(*rng.uniform(-1, 5, 2))
            b = Point2D(*rng.uniform(-1, 5, 2))
            assert segment_intersects_polygon(a, b, poly) == segment_intersects_polygon(
                b, a, poly
            )


def test_segment_matches_sampling_oracle(l_shape):
    rng = np.random.default_rng(8)
    for _ in range(100):
        a = Point2D(*rng.uniform(-1, 5, 2))
        b = Point2D(*rng.uniform(-1, 5, 2))
        assert segment_intersects_polygon(a, b, l_shape) == oracle_segment_hits(a, b, l_shape)


# ---------------------------------------------------------------------------
# classification and batched queries
# ---------------------------------------------------------------------------


def test_classify_bs_basic(unit_square):
    assert classify_bs(Point2D(0.5, 0.5), [unit_square])
    assert not classify_bs(Point2D(5, 5), [unit_square])
    assert not classify_bs(Point2D(5, 5), [])


def test_rooftop_fraction_matches_area_fraction(small_city):
    region, polygons, bset = small_city
    built = bset.total_area / region.area
    rng = np.random.default_rng(44)
    xy = sample_ppp_xy(region, 4000 / region.area, rng)
    frac = bset.contains_points(xy).mean()
    n = len(xy)
    assert abs(frac - built) < 3 * np.sqrt(built * (1 - built) / n)


def test_building_set_matches_scalar_predicates(small_city):
    region, polygons, bset = small_city
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 600, (150, 2))
    contains_batch = bset.contains_points(pts)
    contains_scalar = np.array(
        [any(point_in_polygon(Point2D(*p), poly) for poly in polygons) for p in pts]
    )
    assert np.array_equal(contains_batch, contains_scalar)

    origin = rng.uniform(100, 500, 2)
    targets = rng.uniform(0, 600, (150, 2))
    blocked_batch = bset.blocks_segments(origin, targets)
    o = Point2D(*origin)
    blocked_scalar = np.array(
        [
            any(segment_intersects_polygon(o, Point2D(*t), poly) for poly in polygons)
            for t in targets
        ]
    )
    assert np.array_equal(blocked_batch, blocked_scalar)
