"""Smart control unit: islanded peak shaving and grid-connected power flow.

Islanded mode sheds Tier-3 (luxury) loads, largest rating first, until the
projected demand fits under the generation capacity; shed loads are restored
smallest first once demand has stayed comfortably below capacity for the
hysteresis duration.  Tier-1 and Tier-2 loads are never touched.

Grid-connected mode resolves the per-step balance into a single export or
import against the utility.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .ami import Restore, Shed
from .loads import Han, Tier


class ScuMode(enum.Enum):
    ISLANDED = "islanded"
    GRID_CONNECTED = "grid"


@dataclass(frozen=True)
class ShedPolicy:
    capacity_kw: float = 100.0
    restore_margin_kw: float = 5.0
    min_shed_duration_steps: int = 15

    def __post_init__(self) -> None:
        if self.capacity_kw <= 0.0:
            raise ValueError("capacity_kw must be positive")
        if self.restore_margin_kw < 0.0 or self.min_shed_duration_steps < 0:
            raise ValueError("restore margin and duration must be >= 0")


@dataclass(frozen=True)
class ScuState:
    """Controller bookkeeping: shed Tier-3 load ids with their shed step."""

    shed: dict[str, int] = field(default_factory=dict)
    alarms: tuple[str, ...] = ()


CAPACITY_VIOLATION = "CapacityViolation"


@dataclass(frozen=True)
class PowerFlowDecision:
    """Import-xor-export resolution for one step; both zero means balanced."""

    export_kw: float = 0.0
    import_kw: float = 0.0

    def __post_init__(self) -> None:
        if self.export_kw < 0.0 or self.import_kw < 0.0:
            raise ValueError("exchange magnitudes must be >= 0")
        if self.export_kw > 0.0 and self.import_kw > 0.0:
            raise ValueError("cannot import and export in the same step")

    @classmethod
    def export(cls, kw: float) -> "PowerFlowDecision":
        return cls(export_kw=kw)

    @classmethod
    def import_(cls, kw: float) -> "PowerFlowDecision":
        return cls(import_kw=kw)

    @classmethod
    def balanced(cls) -> "PowerFlowDecision":
        return cls()


def _tier3_by_rating(han: Han) -> list:
    # Largest rating first; ties broken by id for determinism.
    return sorted(han.loads_of_tier(Tier.TIER3), key=lambda l: (-l.rated_kw, l.id))


def step_islanded(
    demand_kw: float,
    han: Han,
    policy: ShedPolicy,
    state: ScuState,
    t: float,
    step: int,
) -> tuple[list[Shed | Restore], ScuState]:
    """One islanded-mode control step on the measured demand.

    Returns the relay commands to publish and the successor state.  ``t`` is
    the scenario time stamped onto commands; ``step`` indexes the engine step
    for the hysteresis clock.
    """
    commands: list[Shed | Restore] = []
    shed = dict(state.shed)
    alarms: list[str] = []

    if demand_kw > policy.capacity_kw:
        projected = demand_kw
        for load in _tier3_by_rating(han):
            if projected <= policy.capacity_kw:
                break
            if load.id in shed:
                continue
            draw = load.draw_kw(t)
            if draw <= 0.0:
                continue  # disconnecting an idle load frees nothing
            shed[load.id] = step
            commands.append(Shed(load_id=load.id, timestamp=t))
            projected -= draw
        if projected > policy.capacity_kw:
            alarms.append(CAPACITY_VIOLATION)
    else:
        # Restore smallest first, one eligibility pass per step.
        projected = demand_kw
        candidates = sorted(
            (han.load_by_id(load_id) for load_id in shed),
            key=lambda l: (l.rated_kw, l.id),
        )
        threshold = policy.capacity_kw - policy.restore_margin_kw
        for load in candidates:
            if step - shed[load.id] < policy.min_shed_duration_steps:
                continue
            draw = load.draw_kw(t)
            if projected + draw <= threshold:
                del shed[load.id]
                commands.append(Restore(load_id=load.id, timestamp=t))
                projected += draw

    return commands, ScuState(shed=shed, alarms=tuple(alarms))


def step_grid_connected(gen_kw: float, demand_kw: float) -> PowerFlowDecision:
    """Resolve generation against demand into one grid exchange."""
    if gen_kw < 0.0 or demand_kw < 0.0:
        raise ValueError("powers must be >= 0")
    if gen_kw > demand_kw:
        return PowerFlowDecision.export(gen_kw - demand_kw)
    if gen_kw < demand_kw:
        return PowerFlowDecision.import_(demand_kw - gen_kw)
    return PowerFlowDecision.balanced()
