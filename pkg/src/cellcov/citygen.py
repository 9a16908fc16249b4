"""Synthetic city generator: non-overlapping axis-aligned rectangular footprints."""
from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .geom import Point2D, Polygon, Region


def generate_city(
    region: Region,
    built_fraction: float,
    size_range: tuple[float, float],
    seed: int,
    max_attempts: int = 200_000,
    tolerance: float = 0.01,
) -> list[Polygon]:
    """Random sequential placement of rectangles until the built fraction is
    within +/- tolerance of the target.

    Rectangles never overlap, so the union area is the sum of areas.  Raises
    when the target cannot be reached within the attempt budget (targets near
    or beyond the random-packing jamming fraction are infeasible).
    """
    if not 0.0 <= built_fraction < 0.9:
        raise ConfigError(f"built fraction must lie in [0, 0.9), got {built_fraction}")
    s_min, s_max = size_range
    if not 0 < s_min <= s_max:
        raise ConfigError(f"invalid building size range {size_range}")
    if s_max > min(region.x_max - region.x_min, region.y_max - region.y_min):
        raise ConfigError("building size exceeds the region extent")
    if built_fraction == 0.0:
        return []

    rng = np.random.default_rng(seed)
    target = built_fraction * region.area
    budget = tolerance * region.area
    placed: list[tuple[float, float, float, float]] = []
    xs0 = np.empty(0)
    ys0 = np.empty(0)
    xs1 = np.empty(0)
    ys1 = np.empty(0)
    total = 0.0
    attempts = 0
    while total < target - budget:
        attempts += 1
        if attempts > max_attempts:
            raise ConfigError(
                f"could not reach built fraction {built_fraction} with size range "
                f"{size_range} after {max_attempts} attempts"
            )
        w = rng.uniform(s_min, s_max)
        h = rng.uniform(s_min, s_max)
        if total + w * h > target + budget:
            continue  # would overshoot the band
        x0 = rng.uniform(region.x_min, region.x_max - w)
        y0 = rng.uniform(region.y_min, region.y_max - h)
        x1, y1 = x0 + w, y0 + h
        if placed and np.any((x0 < xs1) & (x1 > xs0) & (y0 < ys1) & (y1 > ys0)):
            continue
        placed.append((x0, y0, x1, y1))
        xs0 = np.append(xs0, x0)
        ys0 = np.append(ys0, y0)
        xs1 = np.append(xs1, x1)
        ys1 = np.append(ys1, y1)
        total += w * h
        attempts = 0

    return [
        Polygon([Point2D(x0, y0), Point2D(x1, y0), Point2D(x1, y1), Point2D(x0, y1)])
        for x0, y0, x1, y1 in placed
    ]
