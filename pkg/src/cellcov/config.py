"""Key=value configuration files with dense-urban LTE-A defaults.

Sections use dotted keys (`channel.alpha_los = 2.5`).  Unknown keys are
rejected with file and line; every default can be overridden.  dB and
degrees live here; the core modules receive linear units and radians.
"""
from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np

from .blockage import (
    BlockageModel,
    EmpiricalBlockage,
    LinkState,
    MultiBallBlockage,
    MultiBallParams,
    OneStateBlockage,
    ThreeGppBlockage,
)
from .channel import (
    AntennaModel,
    ChannelParams,
    MultiLobeAntenna,
    MultiLobeParams,
    OmniAntenna,
    ThreeGppAntenna,
    dbm_to_watts,
    thermal_noise_watts,
)
from .errors import ConfigError
from .geom import BuildingSet, Region
from .sim import FixedPlacement, Placement, PppPlacement, ScenarioConfig

# key -> (type, default); types: float, int, str, path, floatlist
SCHEMA: dict[str, tuple[str, object]] = {
    "label": ("str", ""),
    "region.x_min": ("float", 0.0),
    "region.x_max": ("float", 2000.0),
    "region.y_min": ("float", 0.0),
    "region.y_max": ("float", 2000.0),
    "bs.placement": ("str", "ppp"),
    "bs.density_per_km2": ("float", 319.0 / 4.0),
    "bs.file": ("path", ""),
    "buildings.file": ("path", ""),
    "blockage.model": ("str", "3gpp"),
    "blockage.params_file": ("path", ""),
    "blockage.radii_m": ("floatlist", ()),
    "blockage.q_los": ("floatlist", ()),
    "channel.f_c_ghz": ("float", 2.1),
    "channel.alpha_los": ("float", 2.5),
    "channel.alpha_nlos": ("float", 3.5),
    "channel.mu_los_db": ("float", 0.0),
    "channel.mu_nlos_db": ("float", 0.0),
    "channel.sigma_los_db": ("float", 5.8),
    "channel.sigma_nlos_db": ("float", 8.7),
    "channel.nakagami_m": ("float", 2.0),
    "channel.omega_los": ("float", 1.0),
    "channel.omega_nlos": ("float", 1.0),
    "channel.r0_m": ("float", 1.0),
    "radio.p_t_dbm": ("float", 30.0),
    "radio.bandwidth_mhz": ("float", 20.0),
    "radio.noise_figure_db": ("float", 10.0),
    "radio.noise_dbm": ("str", ""),  # empty: derive from bandwidth + figure
    "antenna.model": ("str", "omni"),
    "antenna.theta_3db_deg": ("float", 35.0),
    "antenna.g_min_db": ("float", 23.0),
    "antenna.gains": ("floatlist", ()),
    "antenna.theta_deg": ("floatlist", ()),
    "antenna.params_file": ("path", ""),
    "sim.iterations": ("int", 100_000),
    "sim.seed": ("int", 1),
    "sim.workers": ("int", 1),
    "sim.threshold_db_start": ("float", -10.0),
    "sim.threshold_db_stop": ("float", 30.0),
    "sim.threshold_db_step": ("float", 1.0),
    "los.trials": ("int", 10_000),
    "los.delta_r_m": ("float", 1.0),
    "los.max_bins": ("int", 2000),
    "fit.source": ("str", "3gpp"),
    "fit.histogram_file": ("path", ""),
    "fit.n_balls": ("int", 3),
    "fit.k_lobes": ("int", 4),
    "fit.restarts": ("int", 20),
    "fit.x_max": ("str", ""),  # empty: full default grid
    "fit.grid_points": ("int", 200),
    "fit.grid_r_max_m": ("float", 2000.0),
    "fit.theta_step_deg": ("float", 0.1),
}


def default_config() -> dict[str, object]:
    return {key: default for key, (_, default) in SCHEMA.items()}


def _parse_value(key: str, raw: str, base_dir: Path, where: str):
    kind = SCHEMA[key][0]
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "floatlist":
            if not raw:
                return ()
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if kind == "path":
            if not raw:
                return ""
            p = Path(raw)
            return str(p if p.is_absolute() else base_dir / p)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: invalid {kind} value for {key}: {raw!r}") from exc


def parse_config_text(text: str, base_dir: Path, name: str = "<config>") -> dict[str, object]:
    values = default_config()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{name}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{name}:{lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, value, base_dir, f"{name}:{lineno}")
    return values


def parse_config(path: str | Path) -> dict[str, object]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"missing config file: {path}")
    return parse_config_text(path.read_text(), path.parent.resolve(), str(path))


def resolved_text(cfg: dict[str, object]) -> str:
    lines = []
    for key in sorted(SCHEMA):
        value = cfg[key]
        if isinstance(value, tuple):
            value = ", ".join(repr(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def config_sha256(cfg: dict[str, object]) -> str:
    return hashlib.sha256(resolved_text(cfg).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Builders from a resolved config
# ---------------------------------------------------------------------------


def build_region(cfg) -> Region:
    try:
        return Region(
            cfg["region.x_min"], cfg["region.x_max"], cfg["region.y_min"], cfg["region.y_max"]
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_channel(cfg) -> ChannelParams:
    try:
        return ChannelParams.lte_urban(
            f_c_hz=cfg["channel.f_c_ghz"] * 1e9,
            alpha_los=cfg["channel.alpha_los"],
            alpha_nlos=cfg["channel.alpha_nlos"],
            mu_los_db=cfg["channel.mu_los_db"],
            mu_nlos_db=cfg["channel.mu_nlos_db"],
            sigma_los_db=cfg["channel.sigma_los_db"],
            sigma_nlos_db=cfg["channel.sigma_nlos_db"],
            nakagami_m=cfg["channel.nakagami_m"],
            omega_los=cfg["channel.omega_los"],
            omega_nlos=cfg["channel.omega_nlos"],
            r0=cfg["channel.r0_m"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def noise_watts(cfg) -> float:
    if cfg["radio.noise_dbm"]:
        try:
            return dbm_to_watts(float(cfg["radio.noise_dbm"]))
        except ValueError as exc:
            raise ConfigError(f"invalid radio.noise_dbm: {cfg['radio.noise_dbm']!r}") from exc
    return thermal_noise_watts(cfg["radio.bandwidth_mhz"] * 1e6, cfg["radio.noise_figure_db"])


def build_multiball_params(cfg) -> MultiBallParams:
    if cfg["blockage.params_file"]:
        from .fileio import read_multiball_params

        return read_multiball_params(cfg["blockage.params_file"])
    radii, q = cfg["blockage.radii_m"], cfg["blockage.q_los"]
    if not q:
        raise ConfigError(
            "distance-band blockage needs blockage.params_file or "
            "blockage.radii_m + blockage.q_los"
        )
    try:
        return MultiBallParams(tuple(radii), tuple(q))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_blockage(cfg) -> BlockageModel:
    model = cfg["blockage.model"]
    if model == "3gpp":
        return ThreeGppBlockage()
    if model == "empirical":
        return EmpiricalBlockage()
    if model == "multiball":
        return MultiBallBlockage(build_multiball_params(cfg))
    if model == "los":
        return OneStateBlockage(LinkState.LOS)
    if model == "nlos":
        return OneStateBlockage(LinkState.NLOS)
    raise ConfigError(f"unknown blockage.model {model!r}")


def build_antenna(cfg) -> AntennaModel:
    model = cfg["antenna.model"]
    try:
        if model == "omni":
            return OmniAntenna()
        if model == "3gpp":
            return ThreeGppAntenna(cfg["antenna.theta_3db_deg"], cfg["antenna.g_min_db"])
        if model == "multilobe":
            if cfg["antenna.params_file"]:
                from .fileio import read_multilobe_params

                return MultiLobeAntenna(read_multilobe_params(cfg["antenna.params_file"]))
            gains, theta = cfg["antenna.gains"], cfg["antenna.theta_deg"]
            if not gains:
                raise ConfigError(
                    "sector antenna needs antenna.params_file or antenna.gains + antenna.theta_deg"
                )
            return MultiLobeAntenna(MultiLobeParams.from_degrees(gains, theta))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown antenna.model {model!r}")


def build_buildings(cfg) -> BuildingSet | None:
    if not cfg["buildings.file"]:
        return None
    from .fileio import read_footprints

    return BuildingSet(read_footprints(cfg["buildings.file"]))


def build_placement(cfg) -> Placement:
    mode = cfg["bs.placement"]
    if mode == "ppp":
        return PppPlacement(cfg["bs.density_per_km2"] / 1e6)
    if mode == "file":
        if not cfg["bs.file"]:
            raise ConfigError("bs.placement = file requires bs.file")
        from .fileio import read_bs_csv

        return FixedPlacement(read_bs_csv(cfg["bs.file"]))
    raise ConfigError(f"unknown bs.placement {mode!r}")


def validate_combination(cfg) -> None:
    """Cheap cross-key checks, run before any data loading or compute."""
    if cfg["blockage.model"] == "empirical" and not cfg["buildings.file"]:
        raise ConfigError("blockage.model = empirical requires buildings.file")
    if cfg["bs.placement"] == "file" and not cfg["bs.file"]:
        raise ConfigError("bs.placement = file requires bs.file")
    if cfg["sim.threshold_db_step"] <= 0:
        raise ConfigError("sim.threshold_db_step must be positive")
    if cfg["sim.threshold_db_stop"] < cfg["sim.threshold_db_start"]:
        raise ConfigError("sim.threshold_db_stop must be >= start")


def build_scenario(cfg) -> ScenarioConfig:
    validate_combination(cfg)
    buildings = build_buildings(cfg)
    try:
        return ScenarioConfig(
            region=build_region(cfg),
            placement=build_placement(cfg),
            blockage=build_blockage(cfg),
            antenna=build_antenna(cfg),
            channel=build_channel(cfg),
            p_t=dbm_to_watts(cfg["radio.p_t_dbm"]),
            noise_power=noise_watts(cfg),
            buildings=buildings,
            label=cfg["label"] or None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def thresholds_db(cfg) -> np.ndarray:
    start = cfg["sim.threshold_db_start"]
    stop = cfg["sim.threshold_db_stop"]
    step = cfg["sim.threshold_db_step"]
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)
