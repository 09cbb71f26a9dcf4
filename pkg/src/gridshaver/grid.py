"""Utility grid as an infinite power-balance boundary with an energy ledger."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .scu import PowerFlowDecision

TRANSFORMER_HV_V = 25_000.0
TRANSFORMER_LV_V = 220.0


class IsolatorState(enum.Enum):
    CLOSED = "grid"  # grid-connected
    OPEN = "islanded"


class IslandedExchange(RuntimeError):
    """Attempted to settle a grid exchange while the isolator is open."""


@dataclass(frozen=True)
class GridLedger:
    energy_imported_kwh: float = 0.0
    energy_exported_kwh: float = 0.0
    transformer_ratio: float = TRANSFORMER_HV_V / TRANSFORMER_LV_V

    def __post_init__(self) -> None:
        if self.energy_imported_kwh < 0.0 or self.energy_exported_kwh < 0.0:
            raise ValueError("ledger accumulators must be non-negative")


def settle_exchange(
    ledger: GridLedger,
    decision: PowerFlowDecision,
    dt: float,
    isolator: IsolatorState = IsolatorState.CLOSED,
) -> GridLedger:
    """Accumulate one step's exchange into the ledger (kW * s -> kWh).

    The grid is an infinite bus: it never refuses power in either direction.
    """
    if isolator is not IsolatorState.CLOSED:
        raise IslandedExchange("cannot exchange power while islanded")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    hours = dt / 3600.0
    if decision.import_kw > 0.0:
        return replace(
            ledger,
            energy_imported_kwh=ledger.energy_imported_kwh
            + decision.import_kw * hours,
        )
    if decision.export_kw > 0.0:
        return replace(
            ledger,
            energy_exported_kwh=ledger.energy_exported_kwh
            + decision.export_kw * hours,
        )
    return ledger
