"""Estimate the mean seasonal performance factor of a heat-pump stock from unpaired
smart-meter data and forecast the electricity demand of replacing gas furnaces."""

from .distribution import BinningSpec, Distribution, Variant, histogram, jsd, kl_divergence, make_common_edges
from .estimator import EstimationConfig, EstimationResult, GridSpec, estimate_all_years, estimate_b, spf_from_b
from .forecast import forecast_retrofit, ratio_stats
from .ingest import Dataset, DatasetPaths, MeterSeries, aggregate_annual, filter_by_coverage, load_dataset
from .synth import SynthConfig, generate_town
from .thermal import GasParams, RetrofitParams, gas_to_heat, predict_electricity, retrofit_heat, spf

__version__ = "0.1.0"
