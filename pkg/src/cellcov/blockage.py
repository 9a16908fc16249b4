"""LOS/NLOS link-state models and the geometric LOS-probability estimator.

Four link-state models: geometry-based (building occlusion), the 3GPP
urban-micro probability, a piecewise-constant distance-band ("multi-ball")
approximation, and a fixed single-state model.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import DataError
from .geom import BaseStation, BuildingSet, Point2D, Polygon, Region, sample_outdoor_point


class LinkState(Enum):
    LOS = "LOS"
    NLOS = "NLOS"


def p_los_3gpp(r):
    """3GPP urban-micro LOS probability min{18/r,1}(1-e^(-r/36)) + e^(-r/36).

    Accepts scalars or arrays; equals 1 for r <= 18 m.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distance must be non-negative")
    decay = np.exp(-r / 36.0)
    safe_r = np.maximum(r, 18.0)  # for r <= 18 the expression collapses to 1
    p = np.where(r <= 18.0, 1.0, (18.0 / safe_r) * (1.0 - decay) + decay)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class MultiBallParams:
    """Piecewise-constant LOS probability over concentric distance bands.

    radii d_1 < ... < d_N split [0, inf) into N+1 bands; q_los[n] is the LOS
    probability on [d_{n-1}, d_n) with d_0 = 0 and d_{N+1} = inf.  The NLOS
    probability of each band is the complement.
    """

    radii: tuple[float, ...]
    q_los: tuple[float, ...]

    def __post_init__(self) -> None:
        radii = np.asarray(self.radii, dtype=float)
        q = np.asarray(self.q_los, dtype=float)
        if len(q) != len(radii) + 1:
            raise ValueError("need exactly len(radii) + 1 band probabilities")
        if len(radii) and (radii[0] <= 0 or np.any(np.diff(radii) <= 0)):
            raise ValueError("radii must be strictly increasing and positive")
        if np.any(q < 0) or np.any(q > 1):
            raise ValueError("band probabilities must lie in [0, 1]")

    def p_los(self, r):
        """LOS probability at distance r (bands closed on the left)."""
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(np.asarray(self.radii, dtype=float), r, side="right")
        p = np.asarray(self.q_los, dtype=float)[idx]
        return float(p) if p.ndim == 0 else p

    def p_state(self, r, s: LinkState):
        p = self.p_los(r)
        return p if s is LinkState.LOS else 1.0 - p


@dataclass(frozen=True)
class ThreeGppBlockage:
    """Probabilistic link states from the 3GPP urban-micro LOS curve."""

    def p_los(self, r):
        return p_los_3gpp(r)


@dataclass(frozen=True)
class MultiBallBlockage:
    """Probabilistic link states from a distance-band approximation."""

    params: MultiBallParams

    def p_los(self, r):
        return self.params.p_los(r)


@dataclass(frozen=True)
class OneStateBlockage:
    """All links share one fixed state."""

    state: LinkState

    def p_los(self, r):
        p = 1.0 if self.state is LinkState.LOS else 0.0
        r = np.asarray(r, dtype=float)
        return p if r.ndim == 0 else np.full(r.shape, p)


@dataclass(frozen=True)
class EmpiricalBlockage:
    """Marker for geometry-based states; requires building footprints."""


BlockageModel = Union[ThreeGppBlockage, MultiBallBlockage, OneStateBlockage, EmpiricalBlockage]


def p_state(model: BlockageModel, r, s: LinkState):
    """State probability of a probabilistic model at distance r."""
    if isinstance(model, EmpiricalBlockage):
        raise TypeError("the geometry-based model has no distance-only state probability")
    p = model.p_los(r)
    return p if s is LinkState.LOS else 1.0 - p


def p_state_multiball(r, params: MultiBallParams, s: LinkState):
    """Band lookup of the LOS/NLOS probability at distance r."""
    return params.p_state(r, s)


def sample_link_state(model: BlockageModel, r: float, rng: np.random.Generator) -> LinkState:
    """Bernoulli link-state draw with the model's p_LOS(r)."""
    if isinstance(model, EmpiricalBlockage):
        raise TypeError("geometry-based states need buildings; use empirical_link_state")
    if isinstance(model, OneStateBlockage):
        return model.state
    return LinkState.LOS if rng.random() < model.p_los(r) else LinkState.NLOS


def sample_los_mask(model: BlockageModel, r: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized link-state draw; True where the link is LOS."""
    if isinstance(model, EmpiricalBlockage):
        raise TypeError("geometry-based states need buildings; use empirical_los_mask")
    if isinstance(model, OneStateBlockage):
        return np.full(len(r), model.state is LinkState.LOS)
    return rng.random(len(r)) < model.p_los(r)


def empirical_link_state(mt: Point2D, bs: BaseStation, buildings: list[Polygon]) -> LinkState:
    """Geometry-based state: rooftop BSs are NLOS; outdoor BSs are LOS iff
    no building intersects the straight BS-MT line."""
    if bs.rooftop:
        return LinkState.NLOS
    from .geom import segment_intersects_polygon

    for poly in buildings:
        if segment_intersects_polygon(mt, bs.pos, poly):
            return LinkState.NLOS
    return LinkState.LOS


def empirical_los_mask(
    mt_xy: np.ndarray, bs_xy: np.ndarray, rooftop: np.ndarray, buildings: BuildingSet
) -> np.ndarray:
    """Vectorized geometry-based states for one MT against many BSs."""
    los = ~np.asarray(rooftop, dtype=bool)
    if los.any():
        idx = np.nonzero(los)[0]
        blocked = buildings.blocks_segments(mt_xy, bs_xy[idx])
        los[idx] = ~blocked
    return los


@dataclass
class LosHistogram:
    """Distance-binned LOS fraction with bin centers at t * delta_r, t >= 1.

    Bins with no samples carry p_los = 0; n_samples flags them.
    """

    delta_r: float
    p_los: np.ndarray
    n_samples: np.ndarray

    def __post_init__(self) -> None:
        self.p_los = np.asarray(self.p_los, dtype=float)
        self.n_samples = np.asarray(self.n_samples, dtype=np.int64)
        if self.delta_r <= 0:
            raise ValueError("delta_r must be positive")
        if self.p_los.shape != self.n_samples.shape:
            raise ValueError("p_los and n_samples must have equal length")
        if np.any((self.p_los < 0) | (self.p_los > 1)):
            raise ValueError("p_los values must lie in [0, 1]")

    @property
    def m_t(self) -> int:
        return len(self.p_los)

    @property
    def r_grid(self) -> np.ndarray:
        return self.delta_r * np.arange(1, self.m_t + 1)


def estimate_los_histogram(
    region: Region,
    buildings: BuildingSet,
    lambda_bs: float,
    trials: int,
    delta_r: float = 1.0,
    m_t: int = 2000,
    seed: int = 0,
) -> LosHistogram:
    """Monte Carlo estimate of the LOS probability vs. distance.

    Each trial drops a fresh PPP of base stations over the region, draws a
    uniformly random outdoor probe location, and records the geometric state
    of every link.  Distances are binned to the nearest bin center; links
    beyond the histogram range are discarded.  Deterministic for a given
    seed via per-trial substreams.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    from .geom import sample_ppp_xy

    los_counts = np.zeros(m_t, dtype=np.int64)
    tot_counts = np.zeros(m_t, dtype=np.int64)
    for trial in range(trials):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, trial))))
        bs_xy = sample_ppp_xy(region, lambda_bs, rng)
        if bs_xy.shape[0] == 0:
            continue
        try:
            mt = sample_outdoor_point(region, buildings, rng)
        except RuntimeError as exc:
            raise DataError(str(exc)) from exc
        rooftop = buildings.contains_points(bs_xy)
        los = empirical_los_mask(mt, bs_xy, rooftop, buildings)
        r = np.hypot(bs_xy[:, 0] - mt[0], bs_xy[:, 1] - mt[1])
        t = np.rint(r / delta_r).astype(np.int64)
        keep = (t >= 1) & (t <= m_t)
        t = t[keep] - 1
        np.add.at(tot_counts, t, 1)
        np.add.at(los_counts, t, los[keep])
    p = np.zeros(m_t, dtype=float)
    populated = tot_counts > 0
    p[populated] = los_counts[populated] / tot_counts[populated]
    return LosHistogram(delta_r=delta_r, p_los=p, n_samples=tot_counts)
