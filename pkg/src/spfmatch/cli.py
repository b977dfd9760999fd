"""Command line entry point.

Subcommands and the files they write into the output directory:

* ``synth``    meters.csv, buildings.csv, weather.csv, groundtruth.json
* ``validate`` validation.json
* ``analyze``  winter_temps.csv, hist_gas_<year>.csv, hist_hp_<year>.csv
* ``estimate`` estimation.json, curve_<year>.csv
* ``forecast`` forecast.csv, ratios.csv (ratios_<year>.csv for several years), forecast_summary.json

Every subcommand also echoes its resolved configuration as ``<command>.resolved.ini``.
Exit codes: 0 success, 1 data or validation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import analysis, estimator, forecast
from .config import ConfigError, RunConfig, load_config
from .distribution import BinningSpec, Variant, histogram, make_common_edges
from .estimator import EstimationResult, GridSpec, annual_samples, format_spf
from .ingest import DatasetPaths, HeatingType, IngestError, load_dataset
from .synth import SynthConfigError, generate_town

log = logging.getLogger("spfmatch")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


class DataError(Exception):
    pass


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--year", type=int, action="append", dest="years",
                        help="year to process (repeatable); default: all years in the data")
    common.add_argument("--gamma", type=float, help="heat-demand reduction of retrofitted buildings")
    common.add_argument("--variant", choices=["paper", "mixture"], help="divergence variant")
    common.add_argument("--seed", type=int, help="synthetic town seed")
    common.add_argument("--data", type=Path,
                        help="directory holding meters.csv, buildings.csv and weather.csv")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="spfmatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check input files and correlations")
    sub.add_parser("analyze", parents=[common], help="winter temperatures and histograms")
    est = sub.add_parser("estimate", parents=[common], help="grid search for B per year")
    est.add_argument("--b-min", type=float)
    est.add_argument("--b-max", type=float)
    est.add_argument("--step", type=float)
    est.add_argument("--bins", type=int)
    est.add_argument("--refine", action="store_true", default=None)
    fc = sub.add_parser("forecast", parents=[common], help="retrofit electricity demand")
    fc.add_argument("--b", type=float, help="scale factor B to use for every year")
    fc.add_argument("--spf", type=float, help="mean SPF; combined with --gamma into B")
    fc.add_argument("--estimation", type=Path, help="estimation.json to take B from")
    sub.add_parser("synth", parents=[common], help="generate a synthetic town")
    return parser


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.data is not None:
        paths = DatasetPaths.in_directory(args.data)
        cfg.meters, cfg.buildings, cfg.weather = paths.meters, paths.buildings, paths.weather
    if args.out is not None:
        cfg.out = args.out
    if args.years:
        cfg.years = list(args.years)
    if args.gamma is not None:
        cfg.gamma = args.gamma
    if args.variant is not None:
        cfg.variant = Variant.parse(args.variant)
    if getattr(args, "b_min", None) is not None or getattr(args, "b_max", None) is not None \
            or getattr(args, "step", None) is not None:
        cfg.grid = GridSpec(args.b_min if args.b_min is not None else cfg.grid.b_min,
                            args.b_max if args.b_max is not None else cfg.grid.b_max,
                            args.step if args.step is not None else cfg.grid.step)
    if getattr(args, "bins", None) is not None:
        cfg.binning = BinningSpec.count(args.bins)
    if getattr(args, "refine", None):
        cfg.refine = True
    if getattr(args, "b", None) is not None:
        cfg.b = args.b
    if getattr(args, "spf", None) is not None:
        cfg.spf = args.spf
    return cfg


def _load(cfg: RunConfig):
    dataset = load_dataset(cfg.dataset_paths())
    years = cfg.years or dataset.years()
    return dataset, years


def cmd_synth(cfg: RunConfig, args) -> int:
    town = generate_town(cfg.synth_config(seed=args.seed))
    town.write(cfg.out)
    n_gas = len(town.dataset.buildings_of(HeatingType.GAS_FURNACE))
    print(f"wrote {n_gas} gas + {len(town.dataset.buildings) - n_gas} heat-pump buildings "
          f"for {list(town.config.years)} to {cfg.out}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args) -> int:
    dataset, years = _load(cfg)
    reports, diagnostics = analysis.validation_suite(dataset, years, cfg.min_coverage)
    summary = {
        "n_meters": len(dataset.meters),
        "n_buildings": len(dataset.buildings),
        "weather": dataset.weather is not None,
        "years": years,
    }
    _dump_json({"ingest": summary, "correlations": [r.to_dict() for r in reports],
                "diagnostics": diagnostics}, cfg.out / "validation.json")
    for r in reports:
        print(f"{r.year_range[0]}  {r.pair:<42} r = {r.r:+.3f}  (n={r.n})")
    return EXIT_OK


def _winter_temps(dataset, years) -> dict[int, float]:
    temps = {}
    if dataset.weather is None:
        return temps
    for y in years:
        try:
            temps[y] = analysis.winter_mean_temp(dataset.weather, y)
        except analysis.InsufficientCoverageError as exc:
            log.warning("%s", exc)
    return temps


def cmd_analyze(cfg: RunConfig, args) -> int:
    dataset, years = _load(cfg)
    temps = _winter_temps(dataset, years)
    lines = ["year,mean_temp_c"] + [f"{y},{t!r}" for y, t in sorted(temps.items())]
    (cfg.out / "winter_temps.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for y in years:
        heat, elec = annual_samples(dataset, y, cfg.gas, cfg.min_coverage)
        if heat.size == 0 or elec.size == 0:
            log.warning("%d: no annual values for histograms", y)
            continue
        edges = make_common_edges(heat, elec, cfg.binning)
        histogram(heat, edges).to_csv(cfg.out / f"hist_gas_{y}.csv")
        histogram(elec, edges).to_csv(cfg.out / f"hist_hp_{y}.csv")
    for y, t in sorted(temps.items()):
        print(f"{y}  winter mean temperature {t:.1f} °C")
    return EXIT_OK


def cmd_estimate(cfg: RunConfig, args) -> int:
    dataset, years = _load(cfg)
    results, skipped = estimator.estimate_all_years(dataset, years, cfg.estimation())
    temps = _winter_temps(dataset, [r.year for r in results])
    _dump_json({"results": [r.to_dict() for r in results],
                "skipped": {str(k): v for k, v in sorted(skipped.items())},
                "winter_mean_temp_c": {str(k): v for k, v in sorted(temps.items())}},
               cfg.out / "estimation.json")
    for r in results:
        (cfg.out / f"curve_{r.year}.csv").write_text(r.curve_csv(), encoding="utf-8")

    print(f"{'Year':<6}{'B with minimal divergence':>27}{'SPF':>7}{'Winter mean':>14}")
    for r in results:
        t = temps.get(r.year)
        t_s = f"{t:.1f} °C" if t is not None else "n/a"
        print(f"{r.year:<6}{r.b_star:>27.1f}{format_spf(r.spf_mean):>7}{t_s:>14}")
    print(f"variant: {cfg.variant.value}, gamma: {cfg.gamma}")
    for y, why in sorted(skipped.items()):
        print(f"{y}: skipped ({why})", file=sys.stderr)
    if not results:
        raise DataError("no year could be estimated")
    return EXIT_OK


def _b_by_year(cfg: RunConfig, args, years) -> dict[int, float]:
    if cfg.b is not None or cfg.spf is not None:
        b = forecast.resolve_b(cfg.b, None if cfg.b is not None else cfg.spf, cfg.gamma)
        return {y: b for y in years}
    path = args.estimation or cfg.out / "estimation.json"
    if not Path(path).exists():
        raise ConfigError("forecast needs --b, --spf or an estimation.json (run estimate first)")
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    found = {r.year: r.b_star for r in map(EstimationResult.from_dict, data["results"])}
    missing = [y for y in years if y not in found]
    if missing:
        raise DataError(f"no estimated B for years {missing} in {path}")
    return {y: found[y] for y in years}


def cmd_forecast(cfg: RunConfig, args) -> int:
    dataset, years = _load(cfg)
    if not dataset.buildings_of(HeatingType.GAS_FURNACE):
        raise DataError("dataset has no gas-furnace buildings")
    b_year = _b_by_year(cfg, args, years)
    forecasts, summaries = [], []
    ratio_rows: dict[int, list] = {}
    for y in years:
        f = forecast.forecast_retrofit(dataset, y, b_year[y], gas=cfg.gas,
                                       min_coverage=cfg.min_coverage)
        forecasts.append(f)
        entry = f.to_dict()
        rows, stats = [], {}
        for pop in forecast.Population:
            ratios, diag = forecast.building_ratios(dataset, y, pop, b_year[y], gas=cfg.gas,
                                                    min_coverage=cfg.min_coverage)
            rows += [(bid, pop, r) for bid, r in ratios]
            if ratios:
                stats[pop.value] = forecast.summarize_ratios(
                    [r for _, r in ratios], pop, cfg.clip_at).to_dict()
        entry["ratio_stats"] = stats
        ratio_rows[y] = rows
        summaries.append(entry)
    forecast.write_forecast_csv(forecasts, cfg.out / "forecast.csv")
    if len(years) == 1:
        forecast.write_ratios_csv(ratio_rows[years[0]], cfg.out / "ratios.csv")
    else:
        for y, rows in ratio_rows.items():
            forecast.write_ratios_csv(rows, cfg.out / f"ratios_{y}.csv")
    _dump_json({"gamma": cfg.gamma, "years": summaries}, cfg.out / "forecast_summary.json")
    for f in forecasts:
        pct = f"{f.increase_pct:.0f}% of household electricity" if f.increase_pct is not None else "n/a"
        print(f"{f.year}  B = {f.b:.2f}  total {f.total_gwh:.2f} GWh  ({pct})")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "validate": cmd_validate, "analyze": cmd_analyze,
            "estimate": cmd_estimate, "forecast": cmd_forecast}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / f"{args.command}.resolved.ini").write_text(cfg.to_ini(), encoding="utf-8")
        return COMMANDS[args.command](cfg, args)
    except (IngestError, DataError, SynthConfigError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
