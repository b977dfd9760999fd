"""Run configuration: one INI file with sections, overridable from the command line.

Example::

    [data]
    dir = town            ; or meters = ..., buildings = ..., weather = ...

    [gas]
    z = 0.95
    nu = 10.5
    lambda = 0.9

    [retrofit]
    gamma = 0.105

    [grid]
    b_min = 1.5
    b_max = 4.0
    step = 0.1

    [binning]
    strategy = fixed_count
    bins = 30

    [divergence]
    variant = paper

    [synth]
    seed = 7
    years = 2019, 2020, 2021
    b_true = 2019:3.3, 2020:3.5, 2021:3.0

Relative paths are resolved against the directory holding the file.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .distribution import BinningSpec, Variant
from .estimator import DEFAULT_MIN_SAMPLES, EstimationConfig, GridSpec
from .ingest import DEFAULT_MIN_COVERAGE, DatasetPaths
from .synth import SynthConfig
from .thermal import GasParams, RetrofitParams


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    meters: Path | None = None
    buildings: Path | None = None
    weather: Path | None = None
    gas: GasParams = field(default_factory=GasParams)
    gamma: float = 0.0
    grid: GridSpec = field(default_factory=GridSpec)
    binning: BinningSpec = field(default_factory=BinningSpec)
    variant: Variant = Variant.PAPER_SYMMETRIC_KL
    epsilon: float | None = None
    refine: bool = False
    min_coverage: float = DEFAULT_MIN_COVERAGE
    min_samples: int = DEFAULT_MIN_SAMPLES
    strict_daily: bool = False
    out: Path = Path("out")
    years: list[int] = field(default_factory=list)
    b: float | None = None
    spf: float | None = None
    clip_at: float | None = 6.4
    synth: dict = field(default_factory=dict)

    def dataset_paths(self) -> DatasetPaths:
        if self.meters is None or self.buildings is None:
            raise ConfigError("meters and buildings paths are required ([data] section or --data)")
        return DatasetPaths(self.meters, self.buildings, self.weather)

    def estimation(self) -> EstimationConfig:
        return EstimationConfig(self.grid, self.binning, self.variant, self.epsilon, self.gamma,
                                self.gas, self.min_coverage, self.min_samples, self.refine)

    def synth_config(self, seed: int | None = None) -> SynthConfig:
        kwargs = dict(self.synth)
        kwargs.setdefault("gas", self.gas)
        if self.years:
            kwargs["years"] = tuple(self.years)
        if seed is not None:
            kwargs["seed"] = seed
        return SynthConfig(**kwargs)

    def to_ini(self) -> str:
        """The resolved configuration in the same INI layout it is read from."""
        cp = configparser.ConfigParser()
        cp["data"] = {k: str(v) for k, v in (("meters", self.meters), ("buildings", self.buildings),
                                             ("weather", self.weather)) if v is not None}
        cp["gas"] = {"z": repr(self.gas.z), "nu": repr(self.gas.nu), "lambda": repr(self.gas.lam)}
        cp["retrofit"] = {"gamma": repr(self.gamma)}
        cp["grid"] = {"b_min": repr(self.grid.b_min), "b_max": repr(self.grid.b_max),
                      "step": repr(self.grid.step), "refine": str(self.refine).lower()}
        binning = {"strategy": self.binning.strategy}
        if self.binning.strategy == "fixed_count":
            binning["bins"] = str(self.binning.n)
        else:
            binning["width"] = repr(self.binning.width)
        cp["binning"] = binning
        cp["divergence"] = {"variant": self.variant.value}
        if self.epsilon is not None:
            cp["divergence"]["epsilon"] = repr(self.epsilon)
        cp["ingest"] = {"min_coverage": repr(self.min_coverage), "min_samples": str(self.min_samples)}
        cp["analysis"] = {"strict_daily": str(self.strict_daily).lower()}
        cp["output"] = {"dir": str(self.out)}
        if self.years:
            cp["run"] = {"years": ", ".join(str(y) for y in self.years)}
        fc = {}
        if self.b is not None:
            fc["b"] = repr(self.b)
        if self.spf is not None:
            fc["spf"] = repr(self.spf)
        if self.clip_at is not None:
            fc["clip_at"] = repr(self.clip_at)
        cp["forecast"] = fc
        if self.synth:
            cp["synth"] = {k: _format_synth(v) for k, v in self.synth.items() if k != "gas"}
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines += [f"{k} = {v}" for k, v in cp[section].items()]
            lines.append("")
        return "\n".join(lines)


def _format_synth(value) -> str:
    if isinstance(value, dict):
        return ", ".join(f"{k}:{v!r}" for k, v in sorted(value.items()))
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def parse_years(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def parse_year_table(text: str) -> dict[int, float] | float:
    """``2019:3.3, 2020:3.5`` -> {2019: 3.3, 2020: 3.5}; a bare number applies to all years."""
    text = text.strip()
    if ":" not in text:
        return float(text)
    table = {}
    for item in text.split(","):
        year, value = item.split(":")
        table[int(year)] = float(value)
    return table


_SYNTH_INT = {"seed", "n_gas", "n_hp"}
_SYNTH_TABLE = {"b_true", "spf_true", "winter_offset"}
_SYNTH_STR = {"hp_resolution"}
_SYNTH_FIELDS = {f.name for f in dataclasses.fields(SynthConfig)} - {"gas"}


def _parse_synth(section) -> dict:
    out = {}
    for key, raw in section.items():
        if key not in _SYNTH_FIELDS:
            raise ConfigError(f"[synth] unknown key {key!r}")
        try:
            if key == "years":
                out[key] = tuple(parse_years(raw))
            elif key in _SYNTH_INT:
                out[key] = int(raw)
            elif key in _SYNTH_TABLE:
                out[key] = parse_year_table(raw)
            elif key in _SYNTH_STR:
                out[key] = raw.strip()
            else:
                out[key] = float(raw)
        except ValueError as exc:
            raise ConfigError(f"[synth] {key}: cannot parse {raw!r}") from exc
    return out


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def load_config(path=None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    base = path.parent

    def p(value: str) -> Path:
        q = Path(value.strip())
        return q if q.is_absolute() else base / q

    try:
        if cp.has_section("data"):
            data = cp["data"]
            if "dir" in data:
                paths = DatasetPaths.in_directory(p(data["dir"]))
                cfg.meters, cfg.buildings, cfg.weather = paths.meters, paths.buildings, paths.weather
            if "meters" in data:
                cfg.meters = p(data["meters"])
            if "buildings" in data:
                cfg.buildings = p(data["buildings"])
            if "weather" in data:
                cfg.weather = p(data["weather"]) if data["weather"].strip() else None
        if cp.has_section("gas"):
            g = cp["gas"]
            cfg.gas = GasParams(g.getfloat("z", cfg.gas.z), g.getfloat("nu", cfg.gas.nu),
                                g.getfloat("lambda", cfg.gas.lam))
        if cp.has_section("retrofit"):
            cfg.gamma = cp["retrofit"].getfloat("gamma", cfg.gamma)
            RetrofitParams(cfg.gamma)
        if cp.has_section("grid"):
            g = cp["grid"]
            cfg.grid = GridSpec(g.getfloat("b_min", cfg.grid.b_min), g.getfloat("b_max", cfg.grid.b_max),
                                g.getfloat("step", cfg.grid.step))
            if "refine" in g:
                cfg.refine = _bool(g["refine"])
        if cp.has_section("binning"):
            b = cp["binning"]
            strategy = b.get("strategy", "fixed_count").strip()
            if strategy == "fixed_width":
                cfg.binning = BinningSpec.fixed_width(b.getfloat("width"))
            else:
                cfg.binning = BinningSpec(strategy, n=b.getint("bins", 30))
        if cp.has_section("divergence"):
            d = cp["divergence"]
            cfg.variant = Variant.parse(d.get("variant", "paper").strip())
            if "epsilon" in d:
                cfg.epsilon = d.getfloat("epsilon")
        if cp.has_section("ingest"):
            cfg.min_coverage = cp["ingest"].getfloat("min_coverage", cfg.min_coverage)
            cfg.min_samples = cp["ingest"].getint("min_samples", cfg.min_samples)
        if cp.has_section("analysis") and "strict_daily" in cp["analysis"]:
            cfg.strict_daily = _bool(cp["analysis"]["strict_daily"])
        if cp.has_section("output") and "dir" in cp["output"]:
            cfg.out = p(cp["output"]["dir"])
        if cp.has_section("run") and "years" in cp["run"]:
            cfg.years = parse_years(cp["run"]["years"])
        if cp.has_section("forecast"):
            f = cp["forecast"]
            if "b" in f:
                cfg.b = f.getfloat("b")
            if "spf" in f:
                cfg.spf = f.getfloat("spf")
            if "clip_at" in f:
                cfg.clip_at = f.getfloat("clip_at") if f["clip_at"].strip() else None
        if cp.has_section("synth"):
            cfg.synth = _parse_synth(cp["synth"])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg
