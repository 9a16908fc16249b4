"""Stochastic-geometry cellular coverage simulator and model-fitting toolkit."""

from .blockage import (
    BlockageModel,
    EmpiricalBlockage,
    LinkState,
    LosHistogram,
    MultiBallBlockage,
    MultiBallParams,
    OneStateBlockage,
    ThreeGppBlockage,
    empirical_link_state,
    estimate_los_histogram,
    p_los_3gpp,
    p_state_multiball,
    sample_link_state,
)
from .channel import (
    AntennaModel,
    ChannelParams,
    MultiLobeAntenna,
    MultiLobeParams,
    OmniAntenna,
    ThreeGppAntenna,
    antenna_gain,
    dbm_to_watts,
    free_space_kappa,
    interferer_gain_sample,
    path_loss,
    sample_fading_power,
    sample_shadowing,
    thermal_noise_watts,
    watts_to_dbm,
)
from .errors import CellcovError, ConfigError, DataError, NumericError
from .geom import (
    BaseStation,
    BuildingSet,
    Point2D,
    Polygon,
    Region,
    classify_bs,
    point_in_polygon,
    sample_ppp,
    segment_intersects_polygon,
)
from .intensity import (
    FitReport,
    IntensityCurve,
    default_theta_grid,
    default_x_grid,
    fit_multiball,
    fit_multilobe,
    intensity_3gpp_closed,
    intensity_empirical,
    intensity_multiball_closed,
    intensity_numeric,
    multiball_fit_objective,
    multilobe_fit_objective,
)
from .sim import (
    CoverageCurve,
    FixedPlacement,
    PppPlacement,
    ScenarioConfig,
    Snapshot,
    associate,
    build_snapshot,
    compute_c_values,
    coverage_probability,
    run_scenario_suite,
    sinr,
)

__version__ = "0.1.0"
