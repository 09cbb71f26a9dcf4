"""Home area network: tiered, scheduled loads and smart-meter sampling."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .profiles import PiecewiseLinear


class Tier(enum.IntEnum):
    """Shed class of a load: must-run, discretionary, or luxury."""

    TIER1 = 1
    TIER2 = 2
    TIER3 = 3


class UnknownLoadId(KeyError):
    """A shed set referenced a load id that does not exist in the HAN."""


@dataclass(frozen=True)
class Load:
    id: str
    home_id: str
    tier: Tier
    phase: str  # "single" or "three"
    rated_kw: float
    profile: PiecewiseLinear  # time -> demand fraction in [0, 1]

    def __post_init__(self) -> None:
        if self.rated_kw <= 0.0:
            raise ValueError(f"load {self.id}: rated_kw must be positive")
        if self.phase not in ("single", "three"):
            raise ValueError(f"load {self.id}: phase must be single or three")

    def draw_kw(self, t: float) -> float:
        return self.rated_kw * self.profile(t)


@dataclass(frozen=True)
class Home:
    id: str
    loads: tuple[Load, ...]


@dataclass(frozen=True)
class Han:
    homes: tuple[Home, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for home in self.homes:
            for load in home.loads:
                if load.id in seen:
                    raise ValueError(f"duplicate load id {load.id!r}")
                seen.add(load.id)

    def all_loads(self) -> list[Load]:
        return [load for home in self.homes for load in home.loads]

    def load_by_id(self, load_id: str) -> Load:
        for home in self.homes:
            for load in home.loads:
                if load.id == load_id:
                    return load
        raise UnknownLoadId(load_id)

    def loads_of_tier(self, tier: Tier) -> list[Load]:
        return [load for load in self.all_loads() if load.tier == tier]


@dataclass(frozen=True)
class MeterReading:
    meter_id: str
    timestamp: float  # s since scenario start
    active_kw: float


def aggregate_demand(han: Han, t: float, shed: frozenset[str] | set[str] = frozenset()) -> float:
    """Total active demand (kW) at time ``t`` of all loads not in ``shed``."""
    known = {load.id for load in han.all_loads()}
    unknown = set(shed) - known
    if unknown:
        raise UnknownLoadId(sorted(unknown)[0])
    return sum(
        load.draw_kw(t) for home in han.homes for load in home.loads
        if load.id not in shed
    )


def quantize_kw(value: float, resolution: float = 0.01) -> float:
    """Round half up at the meter resolution (0.01 kW by default)."""
    return math.floor(value / resolution + 0.5) * resolution


def meter_sample(
    home: Home,
    t: float,
    interval: float,
    shed: frozenset[str] | set[str] = frozenset(),
) -> MeterReading:
    """One smart-meter report for a home, quantized to 0.01 kW.

    ``t`` must be aligned to the reporting interval.
    """
    if interval <= 0.0:
        raise ValueError("interval must be positive")
    if abs(t / interval - round(t / interval)) > 1e-9:
        raise ValueError(f"t={t} not aligned to the {interval} s reporting interval")
    demand = sum(load.draw_kw(t) for load in home.loads if load.id not in shed)
    return MeterReading(
        meter_id=f"meter-{home.id}", timestamp=t, active_kw=quantize_kw(demand)
    )
