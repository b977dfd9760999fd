"""Energy conversion identities between gas volume, heat and heat-pump electricity."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GasParams:
    """Conversion constants from metered gas volume to produced heat.

    Attributes:
        z: pressure (state) factor, dimensionless.
        nu: heating value in kWh/m³.
        lam: furnace efficiency in (0, 1].
    """

    z: float = 0.95
    nu: float = 10.5
    lam: float = 0.9

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError(f"pressure factor z must be > 0, got {self.z}")
        if not self.nu > 0:
            raise ValueError(f"heating value nu must be > 0, got {self.nu}")
        if not 0 < self.lam <= 1:
            raise ValueError(f"furnace efficiency must lie in (0, 1], got {self.lam}")

    @property
    def kwh_per_m3(self) -> float:
        return self.z * self.nu * self.lam


@dataclass(frozen=True)
class RetrofitParams:
    """Stock-wide fractional heat-demand reduction accompanying a retrofit."""

    gamma: float = 0.0

    def __post_init__(self):
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")


def gas_to_heat(volume_m3, params: GasParams):
    """Heat in kWh produced by burning ``volume_m3`` of gas.

    Works element-wise on numpy arrays.
    """
    return volume_m3 * params.z * params.nu * params.lam


def retrofit_heat(heat_kwh, params: RetrofitParams):
    return heat_kwh * (1.0 - params.gamma)


def spf(heat_kwh: float, electricity_kwh: float, label: str = "") -> float:
    """Seasonal performance factor: heat delivered per unit of electricity.

    ``label`` identifies the meter/year in the error message.
    """
    if electricity_kwh == 0:
        where = f" for {label}" if label else ""
        raise ZeroDivisionError(f"zero electricity consumption{where}; SPF undefined")
    return heat_kwh / electricity_kwh


def b_factor(spf_value: float, gamma: float) -> float:
    """Scale between heat-pump electricity and pre-retrofit heat, SPF / (1 - gamma)."""
    RetrofitParams(gamma)
    if spf_value <= 0:
        raise ValueError(f"SPF must be > 0, got {spf_value}")
    return spf_value / (1.0 - gamma)


def predict_electricity(heat_gas_kwh, gamma: float, spf_value: float):
    """Electricity a heat pump would draw to replace a furnace delivering ``heat_gas_kwh``."""
    if spf_value <= 0:
        raise ValueError(f"SPF must be > 0, got {spf_value}")
    RetrofitParams(gamma)
    return heat_gas_kwh * (1.0 - gamma) / spf_value
