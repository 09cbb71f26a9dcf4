"""Deterministic fixed-step simulation engine.

Each step runs: environment -> MPPT-settled PV power -> inverter -> metering
-> message delivery -> SCU control -> relay actuation -> grid settlement ->
record.  Everything is seeded and sequential, so identical scenarios produce
byte-identical outputs.

Power accounting per step:

* grid-connected - the full MPP harvest is injected; the infinite bus
  absorbs or supplies the physical imbalance, so
  ``pv_ac + import - export - served == 0`` holds by construction.
* islanded - the source follows the load (no storage, no export path), so
  the delivered AC equals the served demand while ``pv_dc_kw`` keeps
  reporting the available maximum-power harvest.  The SCU keeps served
  demand under the plant capacity by shedding Tier-3 loads.

Relay commands travel through the AMI channel: they act within the issuing
step on an ideal channel and ``latency_steps`` later otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ami import Channel, ChannelConfig, GenReport, MeterReport, Message, Restore, Shed
from .converter import InverterModel, inverter_ac_power
from .grid import GridLedger, IsolatorState, settle_exchange
from .loads import Han, aggregate_demand, meter_sample
from .mppt import MpptConfig, track_quasi_static
from .profiles import PiecewiseLinear
from .pv import ArrayTopology, Environment, ModuleSpec, fit_two_diode
from .scu import PowerFlowDecision, ScuState, ShedPolicy, step_grid_connected, step_islanded

# Sample time of the electrical control loops (MPPT, voltage/current
# regulation, grid synchronization).  At energy-management resolution that
# loop is abstracted to quasi-static settlement once per engine step; the
# constant documents the timescale separation rather than driving the loop.
CONTROLLER_SAMPLE_TIME_S = 100e-6


@dataclass(frozen=True)
class PvPlant:
    module: ModuleSpec
    topology: ArrayTopology
    n_arrays: int = 5

    def __post_init__(self) -> None:
        if self.n_arrays < 1:
            raise ValueError("n_arrays must be >= 1")


@dataclass(frozen=True)
class Scenario:
    duration_s: float
    dt_s: float
    irradiance: PiecewiseLinear
    temperature: PiecewiseLinear
    han: Han
    mode_schedule: tuple[tuple[float, IsolatorState], ...]
    pv: PvPlant
    inverter: InverterModel
    policy: ShedPolicy
    ami: ChannelConfig
    seed: int = 0
    mppt: MpptConfig = field(default_factory=MpptConfig)
    name: str = "scenario"

    def __post_init__(self) -> None:
        if self.duration_s <= 0.0 or self.dt_s <= 0.0:
            raise ValueError("duration_s and dt_s must be positive")
        if not self.mode_schedule:
            raise ValueError("mode_schedule must have at least one entry")

    def n_steps(self) -> int:
        return int(round(self.duration_s / self.dt_s))

    def mode_at(self, t: float) -> IsolatorState:
        mode = self.mode_schedule[0][1]
        for t_entry, entry_mode in self.mode_schedule:
            if t_entry <= t:
                mode = entry_mode
            else:
                break
        return mode


@dataclass(frozen=True)
class StepRecord:
    t: float
    irradiance: float
    pv_dc_kw: float  # available maximum-power harvest (DC)
    pv_ac_kw: float  # AC power actually delivered to the microgrid bus
    demand_kw: float  # what all loads want
    served_kw: float  # what non-shed loads draw
    shed_ids: tuple[str, ...]
    export_kw: float
    import_kw: float
    alarms: tuple[str, ...]
    msgs_dropped: int  # cumulative channel drops


@dataclass(frozen=True)
class SimulationResult:
    records: tuple[StepRecord, ...]
    ledger: GridLedger
    msgs_published: int
    msgs_delivered: int
    msgs_dropped: int


class SimulationError(RuntimeError):
    def __init__(self, step: int, t: float, cause: BaseException):
        super().__init__(f"step {step} (t={t:g} s): {cause}")
        self.step = step
        self.t = t
        self.cause = cause


def run_scenario(scenario: Scenario, *, scu_enabled: bool = True) -> SimulationResult:
    """Run the scenario start to end and return the full per-step ledger."""
    try:
        pv_params = fit_two_diode(scenario.pv.module)
    except Exception as exc:
        raise SimulationError(0, 0.0, exc) from exc

    channel = Channel(config=scenario.ami)
    ledger = GridLedger()
    scu_state = ScuState()
    relay_shed: dict[str, None] = {}  # insertion-ordered set of open relays
    warm_duty: float | None = None
    records: list[StepRecord] = []

    def apply_commands(messages: list[Message]) -> None:
        for msg in messages:
            if isinstance(msg, Shed):
                relay_shed.setdefault(msg.load_id, None)
            elif isinstance(msg, Restore):
                relay_shed.pop(msg.load_id, None)

    head_end_demand: dict[str, float] = {}

    def ingest_reports(messages: list[Message]) -> None:
        for msg in messages:
            if isinstance(msg, MeterReport):
                head_end_demand[msg.reading.meter_id] = msg.reading.active_kw

    for step in range(scenario.n_steps() + 1):
        t = step * scenario.dt_s
        try:
            irr = scenario.irradiance(t)
            temp = scenario.temperature(t)
            mode = scenario.mode_at(t)

            # Available PV harvest (all arrays share one environment).
            if irr > 0.0:
                track = track_quasi_static(
                    pv_params,
                    scenario.pv.topology,
                    Environment(irr, temp),
                    scenario.mppt,
                    v_dc=scenario.inverter.v_dc_target,
                    d0=warm_duty,
                )
                warm_duty = track.duty
                dc_kw = scenario.pv.n_arrays * track.point.p / 1000.0
            else:
                dc_kw = 0.0
            ac_available_kw = inverter_ac_power(dc_kw, scenario.inverter)

            # Metering and generation reports onto the AMI channel.
            shed_view = frozenset(relay_shed)
            for home in scenario.han.homes:
                reading = meter_sample(home, t, scenario.dt_s, shed_view)
                channel.publish(MeterReport(reading), step)
            site_share = ac_available_kw / scenario.pv.n_arrays
            for k in range(scenario.pv.n_arrays):
                channel.publish(GenReport(f"pv-{k + 1}", site_share, t), step)

            # Deliver whatever is due: stale commands act here, reports feed
            # the head end.
            due = channel.poll_due(step)
            apply_commands(due)
            ingest_reports(due)

            alarms: tuple[str, ...] = ()
            if mode is IsolatorState.OPEN and scu_enabled:
                measured = sum(head_end_demand.values())
                commands, scu_state = step_islanded(
                    measured, scenario.han, scenario.policy, scu_state, t, step
                )
                for cmd in commands:
                    channel.publish(cmd, step)
                alarms = scu_state.alarms
                # Zero-latency commands come due immediately and actuate
                # within this step; delayed ones wait in the queue.
                apply_commands(channel.poll_due(step))

            served_shed = frozenset(relay_shed)
            demand_kw = aggregate_demand(scenario.han, t)
            served_kw = aggregate_demand(scenario.han, t, served_shed)

            if mode is IsolatorState.CLOSED:
                pv_ac_kw = ac_available_kw
                decision = step_grid_connected(pv_ac_kw, served_kw)
                ledger = settle_exchange(ledger, decision, scenario.dt_s, mode)
            else:
                # Source follows the load while islanded; the MPP harvest
                # stays visible through pv_dc_kw.
                pv_ac_kw = served_kw
                decision = PowerFlowDecision.balanced()

            records.append(
                StepRecord(
                    t=t,
                    irradiance=irr,
                    pv_dc_kw=dc_kw,
                    pv_ac_kw=pv_ac_kw,
                    demand_kw=demand_kw,
                    served_kw=served_kw,
                    shed_ids=tuple(sorted(served_shed)),
                    export_kw=decision.export_kw,
                    import_kw=decision.import_kw,
                    alarms=alarms,
                    msgs_dropped=channel.dropped,
                )
            )
        except SimulationError:
            raise
        except Exception as exc:
            raise SimulationError(step, t, exc) from exc

    return SimulationResult(
        records=tuple(records),
        ledger=ledger,
        msgs_published=channel.published,
        msgs_delivered=channel.delivered,
        msgs_dropped=channel.dropped,
    )
