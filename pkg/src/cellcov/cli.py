"""Command-line interface.

Subcommands: gen-city, estimate-los, fit-multiball, fit-multilobe, simulate,
suite.  Exit codes: 0 success, 2 config error, 3 data error, 4 numeric
failure.  Every config-driven run writes the fully resolved parameter set
next to its outputs.
"""
from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from . import citygen, fileio
from .config import (
    build_antenna,
    build_buildings,
    build_channel,
    build_multiball_params,
    build_region,
    build_scenario,
    config_sha256,
    default_config,
    parse_config,
    resolved_text,
    thresholds_db,
)
from .errors import ConfigError, DataError, NumericError
from .geom import Region
from .intensity import (
    default_theta_grid,
    default_x_grid,
    fit_multiball,
    fit_multilobe,
    intensity_3gpp_closed,
    intensity_empirical,
    intensity_multiball_closed,
)
from .sim import coverage_probability, run_scenario_suite, scenario_seed


def _load_config(args) -> dict[str, object]:
    cfg = parse_config(args.config) if args.config else default_config()
    if getattr(args, "seed", None) is not None:
        cfg["sim.seed"] = args.seed
    if getattr(args, "iterations", None) is not None:
        cfg["sim.iterations"] = args.iterations
        cfg["los.trials"] = args.iterations
    if getattr(args, "workers", None) is not None:
        cfg["sim.workers"] = args.workers
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_resolved(cfg, out_dir: Path, stem: str = "resolved") -> None:
    fileio.atomic_write_text(out_dir / f"{stem}.cfg", resolved_text(cfg))


def _slug(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-") or "scenario"


def cmd_gen_city(args) -> int:
    region = Region(0.0, args.width, 0.0, args.height)
    polygons = citygen.generate_city(
        region, args.built_fraction, (args.min_building, args.max_building), args.seed
    )
    built = sum(p.area for p in polygons) / region.area
    fileio.write_footprints(
        polygons,
        args.out,
        header=(
            f"synthetic footprints: region {args.width}x{args.height} m, "
            f"target built fraction {args.built_fraction}, seed {args.seed}"
        ),
    )
    print(f"wrote {len(polygons)} footprints to {args.out} (built fraction {built:.4f})")
    return 0


def cmd_estimate_los(args) -> int:
    from .blockage import estimate_los_histogram

    cfg = _load_config(args)
    if not cfg["buildings.file"]:
        raise ConfigError("estimate-los requires buildings.file")
    out = _out_dir(args)
    buildings = build_buildings(cfg)
    hist = estimate_los_histogram(
        region=build_region(cfg),
        buildings=buildings,
        lambda_bs=cfg["bs.density_per_km2"] / 1e6,
        trials=cfg["los.trials"],
        delta_r=cfg["los.delta_r_m"],
        m_t=cfg["los.max_bins"],
        seed=cfg["sim.seed"],
    )
    fileio.write_los_histogram(hist, out / "los_histogram.csv")
    _write_resolved(cfg, out)
    populated = int((hist.n_samples > 0).sum())
    print(f"wrote {out / 'los_histogram.csv'} ({populated}/{hist.m_t} bins populated)")
    return 0


def _actual_intensity(cfg, params, lambda_bs, grid):
    source = cfg["fit.source"]
    if source == "3gpp":
        return intensity_3gpp_closed(grid, params, lambda_bs)
    if source == "multiball":
        return intensity_multiball_closed(grid, build_multiball_params(cfg), params, lambda_bs)
    if source == "histogram":
        if not cfg["fit.histogram_file"]:
            raise ConfigError("fit.source = histogram requires fit.histogram_file")
        hist = fileio.read_los_histogram(cfg["fit.histogram_file"])
        return intensity_empirical(hist, params, lambda_bs, grid)
    raise ConfigError(f"unknown fit.source {source!r}")


def cmd_fit_multiball(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    params = build_channel(cfg)
    lambda_bs = cfg["bs.density_per_km2"] / 1e6
    grid = default_x_grid(params, n=cfg["fit.grid_points"], r_max=cfg["fit.grid_r_max_m"])
    actual = _actual_intensity(cfg, params, lambda_bs, grid)
    x_max = float(cfg["fit.x_max"]) if cfg["fit.x_max"] else None
    report = fit_multiball(
        actual,
        n_balls=cfg["fit.n_balls"],
        params=params,
        x_max=x_max,
        seed=cfg["sim.seed"],
        restarts=cfg["fit.restarts"],
    )
    fitted_curve = intensity_multiball_closed(grid, report.params, params, lambda_bs)
    fileio.write_fit_params(report, out / "multiball.params")
    fileio.write_intensity_csv(actual, out / "intensity_actual.csv")
    fileio.write_intensity_csv(fitted_curve, out / "intensity_fitted.csv")
    _write_resolved(cfg, out)
    print(
        f"fitted {len(report.params.radii)} band edges, objective {report.objective:.6e} "
        f"({report.restarts} restarts) -> {out / 'multiball.params'}"
    )
    return 0


def cmd_fit_multilobe(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    pattern = build_antenna(cfg)
    grid = default_theta_grid(cfg["fit.theta_step_deg"])
    report = fit_multilobe(pattern, k_lobes=cfg["fit.k_lobes"], theta_grid=grid, seed=cfg["sim.seed"])
    fileio.write_fit_params(report, out / "multilobe.params")
    _write_resolved(cfg, out)
    print(
        f"fitted {len(report.params.gains)} sectors, objective {report.objective:.6e} "
        f"-> {out / 'multilobe.params'}"
    )
    return 0


def _write_curve(curve, cfg, out: Path, stem: str) -> None:
    fileio.write_coverage_csv(curve, out / f"{stem}_coverage.csv")
    meta = (
        f"config_sha256 = {config_sha256(cfg)}\n"
        f"seed = {curve.seed}\n"
        f"iterations = {curve.iterations}\n"
        f"label = {cfg['label']}\n"
    )
    fileio.atomic_write_text(out / f"{stem}_coverage.meta", meta)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    scenario = build_scenario(cfg)
    curve = coverage_probability(
        scenario,
        thresholds_db(cfg),
        iterations=cfg["sim.iterations"],
        seed=cfg["sim.seed"],
        workers=cfg["sim.workers"],
    )
    fileio.write_coverage_csv(curve, out / "coverage.csv")
    meta = (
        f"config_sha256 = {config_sha256(cfg)}\n"
        f"seed = {curve.seed}\n"
        f"iterations = {curve.iterations}\n"
        f"label = {cfg['label'] or scenario.describe()}\n"
    )
    fileio.atomic_write_text(out / "coverage.meta", meta)
    _write_resolved(cfg, out)
    print(
        f"simulated {curve.iterations} iterations of '{scenario.describe()}' "
        f"-> {out / 'coverage.csv'}"
    )
    return 0


def cmd_suite(args) -> int:
    out = _out_dir(args)
    cfgs, scenarios = [], []
    for path in args.config:
        sub = argparse.Namespace(
            config=path, seed=args.seed, iterations=args.iterations, workers=args.workers
        )
        cfg = _load_config(sub)
        cfgs.append(cfg)
        scenarios.append(build_scenario(cfg))
    if not scenarios:
        print("no scenarios")
        return 0
    base = cfgs[0]
    thresholds = thresholds_db(base)
    curves = run_scenario_suite(
        scenarios,
        thresholds,
        iterations=base["sim.iterations"],
        seed=base["sim.seed"],
        workers=base["sim.workers"],
    )
    used = set()
    for i, (cfg, scenario, curve) in enumerate(zip(cfgs, scenarios, curves)):
        stem = _slug(scenario.describe())
        if stem in used:
            stem = f"{stem}-{i}"
        used.add(stem)
        _write_curve(curve, cfg, out, stem)
        _write_resolved(cfg, out, stem=f"{stem}_resolved")
        print(f"[{scenario.describe()}] seed {curve.seed} -> {out / (stem + '_coverage.csv')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellcov",
        description="Stochastic-geometry cellular coverage simulator and model fitter",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    city = sub.add_parser("gen-city", help="generate synthetic building footprints")
    city.add_argument("--width", type=float, default=2000.0, help="region width (m)")
    city.add_argument("--height", type=float, default=2000.0, help="region height (m)")
    city.add_argument("--built-fraction", type=float, required=True)
    city.add_argument("--min-building", type=float, default=20.0, help="min side (m)")
    city.add_argument("--max-building", type=float, default=60.0, help="max side (m)")
    city.add_argument("--seed", type=int, default=0)
    city.add_argument("--out", required=True, help="output footprint file")
    city.set_defaults(func=cmd_gen_city)

    def common(p, multi_config=False):
        if multi_config:
            p.add_argument("--config", action="append", default=[], help="config file (repeat)")
        else:
            p.add_argument("--config", help="config file")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--iterations", type=int, help="override iteration/trial count")
        p.add_argument("--workers", type=int, help="override sim.workers")
        p.add_argument("--out", help="output directory (default: .)")

    est = sub.add_parser("estimate-los", help="estimate the LOS-probability histogram")
    common(est)
    est.set_defaults(func=cmd_estimate_los)

    fmb = sub.add_parser("fit-multiball", help="fit a distance-band blockage model")
    common(fmb)
    fmb.set_defaults(func=cmd_fit_multiball)

    fml = sub.add_parser("fit-multilobe", help="fit a sectorized antenna pattern")
    common(fml)
    fml.set_defaults(func=cmd_fit_multilobe)

    simp = sub.add_parser("simulate", help="Monte Carlo coverage probability")
    common(simp)
    simp.set_defaults(func=cmd_simulate)

    suite = sub.add_parser("suite", help="run several scenarios with derived sub-seeds")
    common(suite, multi_config=True)
    suite.set_defaults(func=cmd_suite)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
