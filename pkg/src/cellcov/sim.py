"""Monte Carlo coverage-probability engine.

Each iteration realizes base stations, drops a typical outdoor probe
terminal, assigns link states, draws channel gains, associates by highest
average received power, and evaluates the SINR.  Iterations use substreams
derived from (seed, iteration index), so results are bit-identical for any
worker count.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .blockage import (
    BlockageModel,
    EmpiricalBlockage,
    LinkState,
    MultiBallBlockage,
    OneStateBlockage,
    ThreeGppBlockage,
    empirical_los_mask,
    sample_los_mask,
)
from .channel import (
    AntennaModel,
    ChannelParams,
    MultiLobeAntenna,
    OmniAntenna,
    ThreeGppAntenna,
    sample_interferer_gains,
)
from .errors import ConfigError
from .geom import BuildingSet, Region, sample_outdoor_point, sample_ppp_xy


@dataclass(frozen=True)
class PppPlacement:
    """Fresh PPP realization of BS positions each iteration."""

    density: float  # per m^2

    def __post_init__(self) -> None:
        if self.density < 0:
            raise ValueError("density must be non-negative")


@dataclass(frozen=True, eq=False)
class FixedPlacement:
    """Fixed BS positions, e.g. loaded from a survey file."""

    xy: np.ndarray  # (n, 2)

    def __post_init__(self) -> None:
        xy = np.atleast_2d(np.asarray(self.xy, dtype=float))
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise ValueError("positions must be an (n, 2) array")
        if not np.all(np.isfinite(xy)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "xy", xy)


Placement = Union[PppPlacement, FixedPlacement]


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Full description of one coverage scenario.

    The same antenna pattern applies to BSs and MTs.  Buildings are used
    only by the geometry-based blockage model; probabilistic models ignore
    them and treat every BS as outdoor.
    """

    region: Region
    placement: Placement
    blockage: BlockageModel
    antenna: AntennaModel
    channel: ChannelParams
    p_t: float  # watts
    noise_power: float  # watts
    buildings: BuildingSet | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        if self.p_t <= 0:
            raise ValueError("transmit power must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")
        if isinstance(self.blockage, EmpiricalBlockage) and (
            self.buildings is None or len(self.buildings) == 0
        ):
            raise ConfigError("geometry-based blockage requires building footprints")

    @cached_property
    def _fixed_rooftop(self) -> np.ndarray:
        return self.buildings.contains_points(self.placement.xy)

    def describe(self) -> str:
        if self.label:
            return self.label
        placement = "PPP" if isinstance(self.placement, PppPlacement) else "Fixed"
        blockage = {
            ThreeGppBlockage: "3GPP",
            MultiBallBlockage: "Multi-Ball",
            EmpiricalBlockage: "Empirical",
        }.get(type(self.blockage))
        if blockage is None:
            state = self.blockage.state
            blockage = f"1-State ({'L' if state is LinkState.LOS else 'N'})"
        antenna = {
            OmniAntenna: "Omni",
            ThreeGppAntenna: "3GPP Antenna",
            MultiLobeAntenna: "Multi-Lobe",
        }[type(self.antenna)]
        return f"{placement}, {blockage}, {antenna}"


@dataclass
class Snapshot:
    """One Monte Carlo realization of the typical MT's links."""

    mt_xy: np.ndarray
    distances: np.ndarray
    is_los: np.ndarray
    shadowing: np.ndarray
    fading: np.ndarray
    antenna_gains: np.ndarray
    c_values: np.ndarray
    serving: int


def compute_c_values(
    distances: np.ndarray, is_los: np.ndarray, shadowing: np.ndarray, params: ChannelParams
) -> np.ndarray:
    """Inverse average received power kappa^(s) max{r0, r}^alpha^(s) / X."""
    kappa = np.where(is_los, params.kappa_los, params.kappa_nlos)
    alpha = np.where(is_los, params.alpha_los, params.alpha_nlos)
    pl = kappa * np.maximum(params.r0, distances) ** alpha
    return pl / shadowing


def associate(c_values: np.ndarray) -> int:
    """Serving BS index: argmin of the inverse average power (ties -> lowest id)."""
    if len(c_values) == 0:
        raise ValueError("association requires at least one accessible BS")
    return int(np.argmin(c_values))


def build_snapshot(config: ScenarioConfig, rng: np.random.Generator) -> Snapshot | None:
    """Realize one iteration; None when the BS realization is empty.

    Draw order per iteration: BS positions (PPP), MT position, link states
    (probabilistic models), shadowing normals, fading gammas, antenna angles
    (directional patterns only).
    """
    if isinstance(config.placement, PppPlacement):
        xy = sample_ppp_xy(config.region, config.placement.density, rng)
    else:
        xy = config.placement.xy
    n = xy.shape[0]
    if n == 0:
        return None

    ch = config.channel
    use_geometry = isinstance(config.blockage, EmpiricalBlockage)
    if use_geometry:
        mt = sample_outdoor_point(config.region, config.buildings, rng)
    else:
        mt = np.array(
            [
                rng.uniform(config.region.x_min, config.region.x_max),
                rng.uniform(config.region.y_min, config.region.y_max),
            ]
        )
    distances = np.hypot(xy[:, 0] - mt[0], xy[:, 1] - mt[1])

    if use_geometry:
        if isinstance(config.placement, FixedPlacement):
            rooftop = config._fixed_rooftop
        else:
            rooftop = config.buildings.contains_points(xy)
        is_los = empirical_los_mask(mt, xy, rooftop, config.buildings)
    else:
        is_los = sample_los_mask(config.blockage, distances, rng)

    z = rng.standard_normal(n)
    mu = np.where(is_los, ch.mu_los_db, ch.mu_nlos_db)
    sigma = np.where(is_los, ch.sigma_los_db, ch.sigma_nlos_db)
    shadowing = 10.0 ** ((mu + sigma * z) / 10.0)

    c_values = compute_c_values(distances, is_los, shadowing, ch)
    serving = associate(c_values)

    shape = np.where(is_los, ch.nakagami_m, 1.0)
    scale = np.where(is_los, ch.omega_los / ch.nakagami_m, ch.omega_nlos)
    fading = rng.gamma(shape, scale)

    if isinstance(config.antenna, OmniAntenna):
        gains = np.ones(n)
    else:
        gains = sample_interferer_gains(config.antenna, config.antenna, n, rng)
    gains[serving] = 1.0  # the probe link is boresight-aligned

    return Snapshot(
        mt_xy=mt,
        distances=distances,
        is_los=is_los,
        shadowing=shadowing,
        fading=fading,
        antenna_gains=gains,
        c_values=c_values,
        serving=serving,
    )


def sinr(snapshot: Snapshot, config: ScenarioConfig) -> float:
    """SINR of the probe link; interferers are the non-serving BSs whose
    inverse average power exceeds the serving one's."""
    s = snapshot.serving
    c0 = snapshot.c_values[s]
    signal = config.p_t * snapshot.antenna_gains[s] * snapshot.fading[s] / c0
    active = snapshot.c_values > c0
    active[s] = False
    interference = float(
        np.sum(
            config.p_t
            * snapshot.antenna_gains[active]
            * snapshot.fading[active]
            / snapshot.c_values[active]
        )
    )
    return signal / (config.noise_power + interference)


@dataclass(frozen=True, eq=False)
class CoverageCurve:
    """Coverage probability vs. threshold with 95% normal CIs."""

    thresholds_db: np.ndarray
    coverage: np.ndarray
    ci_halfwidth: np.ndarray
    iterations: int
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "thresholds_db", np.asarray(self.thresholds_db, dtype=float))
        object.__setattr__(self, "coverage", np.asarray(self.coverage, dtype=float))
        object.__setattr__(self, "ci_halfwidth", np.asarray(self.ci_halfwidth, dtype=float))
        if np.any(np.diff(self.thresholds_db) <= 0):
            raise ValueError("thresholds must be strictly ascending")
        if np.any((self.coverage < 0) | (self.coverage > 1)):
            raise ValueError("coverage must lie in [0, 1]")
        if np.any(np.diff(self.coverage) > 0):
            raise ValueError("coverage must be non-increasing in the threshold")


def _iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, iteration))))


def _count_successes(
    config: ScenarioConfig, t_linear: np.ndarray, seed: int, start: int, stop: int
) -> np.ndarray:
    counts = np.zeros(len(t_linear), dtype=np.int64)
    for i in range(start, stop):
        snapshot = build_snapshot(config, _iteration_rng(seed, i))
        if snapshot is None:
            continue  # empty realization: no signal, covered at no threshold
        value = sinr(snapshot, config)
        counts += value > t_linear
    return counts


def coverage_probability(
    config: ScenarioConfig,
    thresholds_db: np.ndarray,
    iterations: int,
    seed: int,
    workers: int = 1,
) -> CoverageCurve:
    """Monte Carlo estimate of P(SINR > T) over a threshold grid.

    Deterministic for a given (config, thresholds, iterations, seed),
    independent of the worker count.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    thresholds_db = np.asarray(thresholds_db, dtype=float)
    if thresholds_db.ndim != 1 or len(thresholds_db) == 0:
        raise ValueError("thresholds must be a non-empty 1-D array")
    t_linear = 10.0 ** (thresholds_db / 10.0)

    if workers <= 1:
        counts = _count_successes(config, t_linear, seed, 0, iterations)
    else:
        edges = np.linspace(0, iterations, workers + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                _count_successes,
                [config] * workers,
                [t_linear] * workers,
                [seed] * workers,
                edges[:-1],
                edges[1:],
            )
        counts = sum(parts, np.zeros(len(t_linear), dtype=np.int64))

    coverage = counts / iterations
    ci = 1.96 * np.sqrt(coverage * (1.0 - coverage) / iterations)
    return CoverageCurve(
        thresholds_db=thresholds_db,
        coverage=coverage,
        ci_halfwidth=ci,
        iterations=iterations,
        seed=seed,
    )


def scenario_seed(master_seed: int, index: int) -> int:
    """Derived sub-seed for the index-th scenario of a suite."""
    return int(np.random.SeedSequence((master_seed, index)).generate_state(1)[0])


def run_scenario_suite(
    configs: Sequence[ScenarioConfig],
    thresholds_db: np.ndarray,
    iterations: int,
    seed: int,
    workers: int = 1,
) -> list[CoverageCurve]:
    """Run each scenario with a derived sub-seed; order follows the input."""
    return [
        coverage_probability(cfg, thresholds_db, iterations, scenario_seed(seed, i), workers)
        for i, cfg in enumerate(configs)
    ]
