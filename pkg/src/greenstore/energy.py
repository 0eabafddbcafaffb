"""Annual storage-energy and carbon accounting.

The model charges a constant power draw per terabyte held on disk for a
full year:

    energy_kwh = power_w_per_tb * 365 * 24 * stored_tb / 1000

with 2.55 W/TB for distributed (desk-side) storage and 11.55 W/TB for
centralised (data-centre) storage.  Carbon figures multiply saved energy
by a grid intensity, 500 gCO2/kWh by default.  Byte counts convert to
terabytes with binary units (1 TB = 2^40 B) unless decimal units are
requested.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import InvalidConfig

HOURS_PER_YEAR = 365 * 24
POWER_W_PER_TB = {"distributed": 2.55, "centralized": 11.55}
DEFAULT_CARBON_G_PER_KWH = 500.0
_TB_BYTES = {"binary": 2**40, "decimal": 10**12}
_MB_BYTES = {"binary": 2**20, "decimal": 10**6}


def bytes_to_tb(n: int, tb_mode: str = "binary") -> float:
    if tb_mode not in _TB_BYTES:
        raise InvalidConfig(f"tb_mode must be binary or decimal, got {tb_mode!r}")
    return n / _TB_BYTES[tb_mode]


def bytes_to_mb(n: int, tb_mode: str = "binary") -> float:
    if tb_mode not in _MB_BYTES:
        raise InvalidConfig(f"tb_mode must be binary or decimal, got {tb_mode!r}")
    return n / _MB_BYTES[tb_mode]


@dataclass(frozen=True)
class EnergyScenario:
    """Stored volume plus the power and carbon coefficients that price it."""

    stored_tb: float
    architecture: str = "distributed"
    power_per_tb_w: float | None = None
    carbon_g_per_kwh: float = DEFAULT_CARBON_G_PER_KWH

    def __post_init__(self):
        if self.architecture not in POWER_W_PER_TB:
            raise InvalidConfig(f"unknown architecture {self.architecture!r}")
        if self.stored_tb < 0:
            raise InvalidConfig("stored volume cannot be negative")
        if self.power_per_tb_w is None:
            object.__setattr__(self, "power_per_tb_w", POWER_W_PER_TB[self.architecture])
        if self.power_per_tb_w <= 0:
            raise InvalidConfig("power draw must be positive")
        if self.carbon_g_per_kwh < 0:
            raise InvalidConfig("carbon intensity cannot be negative")


def annual_energy_kwh(scenario: EnergyScenario) -> float:
    """Energy to hold the volume on disk for one year, in kWh."""
    return scenario.power_per_tb_w * HOURS_PER_YEAR * scenario.stored_tb / 1000.0


@dataclass(frozen=True)
class EnergyReport:
    """Yearly energy before/after archival and the carbon saved."""

    initial_kwh: float
    final_kwh: float
    savings_kwh: float
    carbon_saved_g: float

    def to_json_dict(self, scenario_echo: dict | None = None) -> dict:
        d = asdict(self)
        if scenario_echo:
            d["scenario"] = dict(scenario_echo)
        return d


def savings_report(
    original_bytes: int,
    stored_bytes: int,
    architecture: str = "distributed",
    carbon_g_per_kwh: float = DEFAULT_CARBON_G_PER_KWH,
    tb_mode: str = "binary",
    allow_negative: bool = False,
) -> EnergyReport:
    """Energy and carbon saved by keeping stored_bytes instead of original_bytes."""
    initial = annual_energy_kwh(
        EnergyScenario(bytes_to_tb(original_bytes, tb_mode), architecture, None, carbon_g_per_kwh)
    )
    final = annual_energy_kwh(
        EnergyScenario(bytes_to_tb(stored_bytes, tb_mode), architecture, None, carbon_g_per_kwh)
    )
    savings = initial - final
    if savings < 0 and not allow_negative:
        raise InvalidConfig(
            "stored volume exceeds the original; pass allow_negative=True to report it"
        )
    return EnergyReport(
        initial_kwh=initial,
        final_kwh=final,
        savings_kwh=savings,
        carbon_saved_g=savings * carbon_g_per_kwh,
    )


@dataclass(frozen=True)
class ProjectionReport:
    """Fleet-scale what-if: savings for original_tb shrunk by a fraction."""

    original_tb: float
    compression_fraction: float
    savings_kwh_distributed: float
    savings_kwh_centralized: float
    carbon_saved_kg_distributed: float
    carbon_saved_kg_centralized: float

    def to_json_dict(self) -> dict:
        return asdict(self)


def projection(
    original_tb: float,
    compression_fraction: float,
    carbon_g_per_kwh: float = DEFAULT_CARBON_G_PER_KWH,
) -> ProjectionReport:
    """Savings when a volume of original_tb shrinks by compression_fraction."""
    if original_tb < 0:
        raise InvalidConfig("original volume cannot be negative")
    if not 0.0 <= compression_fraction <= 1.0:
        raise InvalidConfig("compression fraction must be in [0, 1]")
    saved_tb = original_tb * compression_fraction
    rows = {}
    for arch in ("distributed", "centralized"):
        kwh = annual_energy_kwh(EnergyScenario(saved_tb, arch))
        rows[arch] = (kwh, kwh * carbon_g_per_kwh / 1000.0)
    return ProjectionReport(
        original_tb=original_tb,
        compression_fraction=compression_fraction,
        savings_kwh_distributed=rows["distributed"][0],
        savings_kwh_centralized=rows["centralized"][0],
        carbon_saved_kg_distributed=rows["distributed"][1],
        carbon_saved_kg_centralized=rows["centralized"][1],
    )
