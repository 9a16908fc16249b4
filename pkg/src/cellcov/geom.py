"""Planar geometry primitives and Poisson point sampling over rectangular regions.

Coordinates are meters in a local planar frame.  Boundary conventions used
throughout: a point on a polygon edge counts as inside, and a segment that
touches a polygon only at a vertex counts as intersecting (conservative for
occlusion tests).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

# Collinearity tolerance for orientation tests, expressed as perpendicular
# distance in meters.  Footprint data is meter-scale, so this sits far below
# any realistic coordinate resolution.
EPS = 1e-9


@dataclass(frozen=True)
class Point2D:
    """A point in the plane, in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangular study region."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("region requires x_min < x_max and y_min < y_max")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class Polygon:
    """Simple polygon given by ordered vertices; closed implicitly."""

    vertices: tuple[Point2D, ...]

    def __init__(self, vertices: Iterable[Point2D]):
        object.__setattr__(self, "vertices", tuple(vertices))
        self._validate()

    def _validate(self) -> None:
        if len(self.vertices) < 3:
            raise ValueError("polygon requires at least 3 vertices")
        n = len(self.vertices)
        for i in range(n):
            a = self.vertices[i]
            b = self.vertices[(i + 1) % n]
            if abs(a.x - b.x) <= EPS and abs(a.y - b.y) <= EPS:
                raise ValueError("polygon has a zero-length edge (duplicate consecutive vertices)")
        if abs(self.signed_area) <= EPS * self._perimeter():
            raise ValueError("polygon is degenerate (zero area)")
        if not self._is_simple():
            raise ValueError("polygon is self-intersecting")

    def _perimeter(self) -> float:
        x0, y0, x1, y1 = self.edge_arrays
        return float(np.hypot(x1 - x0, y1 - y0).sum())

    def _is_simple(self) -> bool:
        # Non-adjacent edge pairs must not intersect (closed test); adjacent
        # edges share exactly one endpoint by construction.
        x0, y0, x1, y1 = self.edge_arrays
        n = len(x0)
        for i in range(n - 1):
            j0 = i + 2
            j1 = n if i > 0 else n - 1  # edge 0 is adjacent to edge n-1
            if j0 >= j1:
                continue
            sl = slice(j0, j1)
            hit = _segments_intersect_kernel(
                x0[i], y0[i], x1[i], y1[i], x0[sl], y0[sl], x1[sl], y1[sl]
            )
            if np.any(hit):
                return False
        return True

    @cached_property
    def xs(self) -> np.ndarray:
        return np.array([p.x for p in self.vertices], dtype=float)

    @cached_property
    def ys(self) -> np.ndarray:
        return np.array([p.y for p in self.vertices], dtype=float)

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Edge endpoint arrays (x0, y0, x1, y1), one entry per edge."""
        xs, ys = self.xs, self.ys
        return xs, ys, np.roll(xs, -1), np.roll(ys, -1)

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max)."""
        xs, ys = self.xs, self.ys
        return float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max())

    @cached_property
    def signed_area(self) -> float:
        x0, y0, x1, y1 = self.edge_arrays
        return 0.5 * float(np.sum(x0 * y1 - x1 * y0))

    @property
    def area(self) -> float:
        return abs(self.signed_area)


@dataclass(frozen=True)
class BaseStation:
    """Base station with rooftop/outdoor classification."""

    id: int
    pos: Point2D
    rooftop: bool


# ---------------------------------------------------------------------------
# Vectorized predicate kernels.  The scalar public functions wrap these, so
# batch and scalar paths share one set of boundary conventions.
# ---------------------------------------------------------------------------


def _points_in_polygon_mask(px: np.ndarray, py: np.ndarray, poly: Polygon) -> np.ndarray:
    """Containment mask for points (px, py); boundary counts as inside."""
    x0, y0, x1, y1 = poly.edge_arrays
    return _points_in_edges_mask(px[:, None], py[:, None], x0, y0, x1, y1).ravel()


def _points_in_edges_mask(px, py, x0, y0, x1, y1):
    """Ray-cast parity plus on-edge test; shapes broadcast as points x edges.

    Reduces over the last axis (edges of one polygon).
    """
    ex = x1 - x0
    ey = y1 - y0
    elen = np.hypot(ex, ey)
    cross = ex * (py - y0) - ey * (px - x0)
    on_edge = (
        (np.abs(cross) <= EPS * elen)
        & (px >= np.minimum(x0, x1) - EPS)
        & (px <= np.maximum(x0, x1) + EPS)
        & (py >= np.minimum(y0, y1) - EPS)
        & (py <= np.maximum(y0, y1) + EPS)
    )
    # Half-open rule in y avoids double counting at vertices; boundary points
    # are already resolved by the on-edge mask.
    crosses_ray = (y0 > py) != (y1 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at = x0 + (py - y0) * ex / ey
    crossing = crosses_ray & (px < x_at)
    inside = (crossing.sum(axis=-1) % 2).astype(bool)
    return inside | on_edge.any(axis=-1)


def _sign_eps(v, tol):
    return np.where(v > tol, 1, np.where(v < -tol, -1, 0))


def _segments_intersect_kernel(ax, ay, bx, by, cx, cy, dx, dy):
    """Closed-segment intersection test; inputs broadcast elementwise.

    Touching at endpoints or vertices counts as intersecting.
    """
    ab_len = np.hypot(bx - ax, by - ay)
    cd_len = np.hypot(dx - cx, dy - cy)
    tol_ab = EPS * ab_len
    tol_cd = EPS * cd_len

    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    s1 = _sign_eps(d1, tol_ab)
    s2 = _sign_eps(d2, tol_ab)
    s3 = _sign_eps(d3, tol_cd)
    s4 = _sign_eps(d4, tol_cd)

    proper = (s1 * s2 < 0) & (s3 * s4 < 0)

    def on_bbox(px, py, ux, uy, vx, vy):
        return (
            (px >= np.minimum(ux, vx) - EPS)
            & (px <= np.maximum(ux, vx) + EPS)
            & (py >= np.minimum(uy, vy) - EPS)
            & (py <= np.maximum(uy, vy) + EPS)
        )

    touch = (
        ((s1 == 0) & on_bbox(cx, cy, ax, ay, bx, by))
        | ((s2 == 0) & on_bbox(dx, dy, ax, ay, bx, by))
        | ((s3 == 0) & on_bbox(ax, ay, cx, cy, dx, dy))
        | ((s4 == 0) & on_bbox(bx, by, cx, cy, dx, dy))
    )
    return proper | touch


# ---------------------------------------------------------------------------
# Public scalar predicates
# ---------------------------------------------------------------------------


def point_in_polygon(p: Point2D, poly: Polygon) -> bool:
    """True iff p is strictly inside poly or on its boundary."""
    return bool(
        _points_in_polygon_mask(np.array([p.x], dtype=float), np.array([p.y], dtype=float), poly)[0]
    )


def segment_intersects_polygon(a: Point2D, b: Point2D, poly: Polygon) -> bool:
    """True iff segment (a, b) meets the polygon's boundary or interior."""
    if a.x == b.x and a.y == b.y:
        raise ValueError("segment endpoints must differ")
    x0, y0, x1, y1 = poly.edge_arrays
    if np.any(_segments_intersect_kernel(a.x, a.y, b.x, b.y, x0, y0, x1, y1)):
        return True
    # No edge crossing: the segment can still be fully contained.
    mid = Point2D(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
    return point_in_polygon(mid, poly)


def classify_bs(pos: Point2D, buildings: Sequence[Polygon]) -> bool:
    """True (rooftop) iff pos lies inside any building polygon."""
    return any(point_in_polygon(pos, poly) for poly in buildings)


# ---------------------------------------------------------------------------
# Poisson point process
# ---------------------------------------------------------------------------


def sample_ppp_xy(region: Region, density: float, rng: np.random.Generator) -> np.ndarray:
    """PPP sample over the region as an (n, 2) array; density is per m^2."""
    if density < 0:
        raise ValueError(f"density must be non-negative, got {density}")
    n = int(rng.poisson(density * region.area))
    xs = rng.uniform(region.x_min, region.x_max, n)
    ys = rng.uniform(region.y_min, region.y_max, n)
    return np.column_stack([xs, ys])


def sample_ppp(region: Region, density: float, rng: np.random.Generator) -> list[Point2D]:
    """PPP sample over the region; count ~ Poisson(density * area)."""
    xy = sample_ppp_xy(region, density, rng)
    return [Point2D(float(x), float(y)) for x, y in xy]


# ---------------------------------------------------------------------------
# Batched building queries
# ---------------------------------------------------------------------------


def _expand_ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Concatenation of ranges [starts[i], starts[i]+counts[i])."""
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    ends = np.cumsum(counts)
    return np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts) + np.repeat(starts, counts)


class BuildingSet:
    """Footprint collection with flat edge arrays for batched queries.

    The batched predicates share the kernels of the scalar functions, so
    both paths agree on boundary conventions.
    """

    def __init__(self, polygons: Iterable[Polygon]):
        self.polygons: tuple[Polygon, ...] = tuple(polygons)
        p = self.polygons
        if p:
            self._bx0 = np.array([q.bbox[0] for q in p])
            self._by0 = np.array([q.bbox[1] for q in p])
            self._bx1 = np.array([q.bbox[2] for q in p])
            self._by1 = np.array([q.bbox[3] for q in p])
            counts = np.array([len(q.vertices) for q in p], dtype=np.int64)
            self._edge_counts = counts
            self._poly_start = np.concatenate([[0], np.cumsum(counts)])
            self._ex0 = np.concatenate([q.edge_arrays[0] for q in p])
            self._ey0 = np.concatenate([q.edge_arrays[1] for q in p])
            self._ex1 = np.concatenate([q.edge_arrays[2] for q in p])
            self._ey1 = np.concatenate([q.edge_arrays[3] for q in p])
        else:
            self._bx0 = self._by0 = self._bx1 = self._by1 = np.empty(0)
            self._edge_counts = np.empty(0, dtype=np.int64)
            self._poly_start = np.zeros(1, dtype=np.int64)
            self._ex0 = self._ey0 = self._ex1 = self._ey1 = np.empty(0)

    def __len__(self) -> int:
        return len(self.polygons)

    @property
    def total_area(self) -> float:
        return float(sum(q.area for q in self.polygons))

    def _candidate_pairs(self, qx0, qy0, qx1, qy1):
        """(query, polygon) index pairs whose bounding boxes overlap.

        Query bboxes are (n,) arrays; EPS-inflated to keep boundary cases.
        """
        hit = (
            (qx0[:, None] <= self._bx1 + EPS)
            & (qx1[:, None] >= self._bx0 - EPS)
            & (qy0[:, None] <= self._by1 + EPS)
            & (qy1[:, None] >= self._by0 - EPS)
        )
        return np.nonzero(hit)

    def contains_points(self, xy: np.ndarray) -> np.ndarray:
        """Mask of points lying inside (or on the boundary of) any polygon."""
        xy = np.asarray(xy, dtype=float)
        n = xy.shape[0]
        out = np.zeros(n, dtype=bool)
        if n == 0 or not self.polygons:
            return out
        x, y = xy[:, 0], xy[:, 1]
        pt_idx, poly_idx = self._candidate_pairs(x, y, x, y)
        if pt_idx.size == 0:
            return out
        cnt = self._edge_counts[poly_idx]
        e_idx = _expand_ranges(self._poly_start[poly_idx], cnt)
        row = np.repeat(np.arange(pt_idx.size), cnt)
        px = x[pt_idx][row]
        py = y[pt_idx][row]
        ex0, ey0 = self._ex0[e_idx], self._ey0[e_idx]
        ex1, ey1 = self._ex1[e_idx], self._ey1[e_idx]

        ex = ex1 - ex0
        ey = ey1 - ey0
        elen = np.hypot(ex, ey)
        cross = ex * (py - ey0) - ey * (px - ex0)
        on_edge = (
            (np.abs(cross) <= EPS * elen)
            & (px >= np.minimum(ex0, ex1) - EPS)
            & (px <= np.maximum(ex0, ex1) + EPS)
            & (py >= np.minimum(ey0, ey1) - EPS)
            & (py <= np.maximum(ey0, ey1) + EPS)
        )
        crosses_ray = (ey0 > py) != (ey1 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = ex0 + (py - ey0) * ex / ey
        crossing = crosses_ray & (px < x_at)

        n_pairs = pt_idx.size
        parity = (np.bincount(row, weights=crossing, minlength=n_pairs) % 2).astype(bool)
        on_any = np.bincount(row, weights=on_edge, minlength=n_pairs) > 0
        inside_pair = parity | on_any
        out[pt_idx[inside_pair]] = True
        return out

    def blocks_segments(self, origin: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Mask of segments origin->target[i] intersecting any polygon."""
        targets = np.asarray(targets, dtype=float)
        n = targets.shape[0]
        blocked = np.zeros(n, dtype=bool)
        if n == 0 or not self.polygons:
            return blocked
        ox, oy = float(origin[0]), float(origin[1])
        tx, ty = targets[:, 0], targets[:, 1]
        sx0 = np.minimum(ox, tx)
        sx1 = np.maximum(ox, tx)
        sy0 = np.minimum(oy, ty)
        sy1 = np.maximum(oy, ty)
        seg_idx, poly_idx = self._candidate_pairs(sx0, sy0, sx1, sy1)
        if seg_idx.size:
            # Conservative prefilter: a polygon whose bounding box lies
            # strictly on one side of the segment's line cannot intersect it.
            dx = tx[seg_idx] - ox
            dy = ty[seg_idx] - oy
            tol = EPS * np.hypot(dx, dy)
            bx0, by0 = self._bx0[poly_idx], self._by0[poly_idx]
            bx1, by1 = self._bx1[poly_idx], self._by1[poly_idx]
            c00 = dx * (by0 - oy) - dy * (bx0 - ox)
            c01 = dx * (by1 - oy) - dy * (bx0 - ox)
            c10 = dx * (by0 - oy) - dy * (bx1 - ox)
            c11 = dx * (by1 - oy) - dy * (bx1 - ox)
            hi = np.maximum(np.maximum(c00, c01), np.maximum(c10, c11))
            lo = np.minimum(np.minimum(c00, c01), np.minimum(c10, c11))
            straddles = (hi >= -tol) & (lo <= tol)
            seg_idx, poly_idx = seg_idx[straddles], poly_idx[straddles]
        if seg_idx.size:
            cnt = self._edge_counts[poly_idx]
            e_idx = _expand_ranges(self._poly_start[poly_idx], cnt)
            row_seg = np.repeat(seg_idx, cnt)
            hit = _segments_intersect_kernel(
                ox,
                oy,
                tx[row_seg],
                ty[row_seg],
                self._ex0[e_idx],
                self._ey0[e_idx],
                self._ex1[e_idx],
                self._ey1[e_idx],
            )
            blocked[row_seg[hit]] = True
        # A segment with no edge crossing can still be fully contained.
        open_idx = np.nonzero(~blocked)[0]
        if open_idx.size:
            mid = np.column_stack([0.5 * (ox + tx[open_idx]), 0.5 * (oy + ty[open_idx])])
            blocked[open_idx] = self.contains_points(mid)
        return blocked


def sample_outdoor_point(
    region: Region,
    buildings: BuildingSet | None,
    rng: np.random.Generator,
    max_tries: int = 10_000,
) -> np.ndarray:
    """Uniform point over the outdoor subset of the region, as a (2,) array."""
    if buildings is None or len(buildings) == 0:
        return np.array(
            [rng.uniform(region.x_min, region.x_max), rng.uniform(region.y_min, region.y_max)]
        )
    batch = 16
    for _ in range(max_tries // batch + 1):
        xy = np.column_stack(
            [
                rng.uniform(region.x_min, region.x_max, batch),
                rng.uniform(region.y_min, region.y_max, batch),
            ]
        )
        outdoor = ~buildings.contains_points(xy)
        hits = np.nonzero(outdoor)[0]
        if hits.size:
            return xy[hits[0]]
    raise RuntimeError("no outdoor location found; region appears fully built")
