"""Scenario file schema: JSON loading and invariant validation.

A scenario file is UTF-8 JSON with the keys::

    duration_s, dt_s,
    irradiance_points, temperature_points   -- arrays of [t_s, value]
    homes          -- [{id, loads: [{id, tier: 1|2|3, phase, rated_kw,
                                     profile_points}]}]
    mode_schedule  -- [[t_s, "islanded" | "grid"], ...]
    pv             -- {module_spec: {v_oc, i_sc, v_mp, i_mp,
                                     cells_per_module, p_rated},
                       strings, modules_per_string, arrays}
    inverter       -- {efficiency, rating_kw[, v_dc_target, v_ac_nominal]}
    policy         -- {capacity_kw, restore_margin_kw, min_shed_duration_s}
    ami            -- {latency_steps, drop_probability}
    seed

A top-level ``meta`` object is ignored (fixture descriptions live there).
``validate_scenario_dict`` returns machine-readable violations instead of
raising, so the CLI can report every problem at once.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .ami import ChannelConfig
from .converter import InverterModel
from .engine import PvPlant, Scenario
from .grid import IsolatorState
from .loads import Han, Home, Load, Tier
from .profiles import PiecewiseLinear
from .pv import ArrayTopology, InvalidSpec, ModuleSpec
from .scu import ShedPolicy

_MODE_NAMES = {"islanded": IsolatorState.OPEN, "grid": IsolatorState.CLOSED}
_PHASES = ("single", "three")


class ScenarioError(ValueError):
    """Scenario file failed validation; ``violations`` lists every problem."""

    def __init__(self, violations: list[dict[str, str]]):
        super().__init__(
            "; ".join(f"{v['where']}: {v['message']}" for v in violations)
        )
        self.violations = violations


def _violation(out: list[dict[str, str]], where: str, message: str) -> None:
    out.append({"where": where, "message": message})


def _points(raw: Any, where: str, out: list[dict[str, str]]) -> PiecewiseLinear | None:
    if not isinstance(raw, list) or not raw:
        _violation(out, where, "must be a non-empty array of [t_s, value] pairs")
        return None
    pairs = []
    for idx, item in enumerate(raw):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(x, (int, float)) for x in item)
        ):
            _violation(out, f"{where}[{idx}]", "expected a [t_s, value] number pair")
            return None
        pairs.append((float(item[0]), float(item[1])))
    try:
        return PiecewiseLinear.from_pairs(pairs)
    except ValueError as exc:
        _violation(out, where, str(exc))
        return None


def _number(raw: dict, key: str, where: str, out: list[dict[str, str]]) -> float | None:
    value = raw.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        _violation(out, f"{where}.{key}" if where else key, "missing or not a number")
        return None
    return float(value)


def validate_scenario_dict(raw: dict) -> tuple[Scenario | None, list[dict[str, str]]]:
    """Build a Scenario from parsed JSON, collecting every violation found."""
    out: list[dict[str, str]] = []
    if not isinstance(raw, dict):
        _violation(out, "$", "scenario file must contain a JSON object")
        return None, out

    duration = _number(raw, "duration_s", "", out)
    dt = _number(raw, "dt_s", "", out)
    if duration is not None and duration <= 0.0:
        _violation(out, "duration_s", "must be positive")
    if dt is not None and dt <= 0.0:
        _violation(out, "dt_s", "must be positive")
    if duration is not None and dt is not None and 0.0 < duration < dt:
        _violation(out, "dt_s", "step exceeds the scenario duration")

    irradiance = _points(raw.get("irradiance_points"), "irradiance_points", out)
    temperature = _points(raw.get("temperature_points"), "temperature_points", out)
    horizon_ok = duration is not None and duration > 0.0

    for name, profile in (("irradiance_points", irradiance), ("temperature_points", temperature)):
        if profile is None or not horizon_ok:
            continue
        if not profile.covers(0.0, duration):
            _violation(
                out,
                name,
                f"must cover [0, {duration:g}] s, covers "
                f"[{profile.t_start:g}, {profile.t_end:g}]",
            )
    if irradiance is not None and any(v < 0.0 for _, v in irradiance.points):
        _violation(out, "irradiance_points", "irradiance must be >= 0")
    if temperature is not None and any(
        not -40.0 <= v <= 90.0 for _, v in temperature.points
    ):
        _violation(out, "temperature_points", "temperature must be within [-40, 90]")

    # Homes and loads.
    homes_raw = raw.get("homes")
    homes: list[Home] = []
    load_owner: dict[str, str] = {}
    if not isinstance(homes_raw, list) or not homes_raw:
        _violation(out, "homes", "must be a non-empty array")
    else:
        for h_idx, home_raw in enumerate(homes_raw):
            where_h = f"homes[{h_idx}]"
            if not isinstance(home_raw, dict) or not isinstance(home_raw.get("id"), str):
                _violation(out, where_h, "home needs a string id")
                continue
            home_id = home_raw["id"]
            loads: list[Load] = []
            for l_idx, load_raw in enumerate(home_raw.get("loads") or []):
                where_l = f"{where_h}.loads[{l_idx}]"
                if not isinstance(load_raw, dict) or not isinstance(load_raw.get("id"), str):
                    _violation(out, where_l, "load needs a string id")
                    continue
                load_id = load_raw["id"]
                if load_id in load_owner:
                    _violation(
                        out,
                        where_l,
                        f"duplicate load id {load_id!r} in homes "
                        f"{load_owner[load_id]!r} and {home_id!r}",
                    )
                    continue
                load_owner[load_id] = home_id
                tier_raw = load_raw.get("tier")
                if tier_raw not in (1, 2, 3):
                    _violation(out, where_l, f"tier must be 1, 2 or 3, got {tier_raw!r}")
                    continue
                phase = load_raw.get("phase", "single")
                if phase not in _PHASES:
                    _violation(out, where_l, f"phase must be one of {_PHASES}")
                    continue
                rated = _number(load_raw, "rated_kw", where_l, out)
                if rated is None:
                    continue
                if rated <= 0.0:
                    _violation(out, where_l, "rated_kw must be positive")
                    continue
                profile = _points(load_raw.get("profile_points"), f"{where_l}.profile_points", out)
                if profile is None:
                    continue
                bad_frac = [v for _, v in profile.points if not 0.0 <= v <= 1.0]
                if bad_frac:
                    _violation(
                        out,
                        f"{where_l}.profile_points",
                        f"demand fractions must be in [0, 1], got {bad_frac[0]:g}",
                    )
                    continue
                if horizon_ok and not profile.covers(0.0, duration):
                    _violation(
                        out,
                        f"{where_l}.profile_points",
                        f"profile for load {load_id!r} must cover [0, {duration:g}] s",
                    )
                    continue
                loads.append(
                    Load(
                        id=load_id,
                        home_id=home_id,
                        tier=Tier(tier_raw),
                        phase=phase,
                        rated_kw=rated,
                        profile=profile,
                    )
                )
            homes.append(Home(id=home_id, loads=tuple(loads)))

    # Mode schedule.
    schedule: list[tuple[float, IsolatorState]] = []
    sched_raw = raw.get("mode_schedule")
    if not isinstance(sched_raw, list) or not sched_raw:
        _violation(out, "mode_schedule", "must be a non-empty array of [t_s, mode]")
    else:
        for idx, item in enumerate(sched_raw):
            if (
                not isinstance(item, list)
                or len(item) != 2
                or not isinstance(item[0], (int, float))
                or item[1] not in _MODE_NAMES
            ):
                _violation(
                    out,
                    f"mode_schedule[{idx}]",
                    'expected [t_s, "islanded" | "grid"]',
                )
                continue
            schedule.append((float(item[0]), _MODE_NAMES[item[1]]))
        if schedule:
            times = [t for t, _ in schedule]
            if times != sorted(times):
                _violation(out, "mode_schedule", "entries must be sorted by time")
            if times and times[0] > 0.0:
                _violation(out, "mode_schedule", "first entry must start at t <= 0")

    # PV plant.
    pv_plant: PvPlant | None = None
    pv_raw = raw.get("pv")
    if not isinstance(pv_raw, dict):
        _violation(out, "pv", "missing pv object")
    else:
        ms_raw = pv_raw.get("module_spec")
        module = None
        if not isinstance(ms_raw, dict):
            _violation(out, "pv.module_spec", "missing module_spec object")
        else:
            fields = ["v_oc", "i_sc", "v_mp", "i_mp", "cells_per_module", "p_rated"]
            vals = {k: _number(ms_raw, k, "pv.module_spec", out) for k in fields}
            if all(v is not None for v in vals.values()):
                try:
                    module = ModuleSpec(
                        v_oc=vals["v_oc"],
                        i_sc=vals["i_sc"],
                        v_mp=vals["v_mp"],
                        i_mp=vals["i_mp"],
                        cells_per_module=int(vals["cells_per_module"]),
                        p_rated=vals["p_rated"],
                    )
                    module.validate()
                except InvalidSpec as exc:
                    _violation(out, "pv.module_spec", str(exc))
                    module = None
        strings = _number(pv_raw, "strings", "pv", out)
        mps = _number(pv_raw, "modules_per_string", "pv", out)
        arrays = _number(pv_raw, "arrays", "pv", out)
        if module is not None and None not in (strings, mps, arrays):
            try:
                pv_plant = PvPlant(
                    module=module,
                    topology=ArrayTopology(int(strings), int(mps)),
                    n_arrays=int(arrays),
                )
            except ValueError as exc:
                _violation(out, "pv", str(exc))

    # Inverter.
    inverter: InverterModel | None = None
    inv_raw = raw.get("inverter")
    if not isinstance(inv_raw, dict):
        _violation(out, "inverter", "missing inverter object")
    else:
        eff = _number(inv_raw, "efficiency", "inverter", out)
        rating = _number(inv_raw, "rating_kw", "inverter", out)
        if eff is not None and rating is not None:
            try:
                inverter = InverterModel(
                    efficiency=eff,
                    p_rating_kw=rating,
                    v_dc_target=float(inv_raw.get("v_dc_target", 500.0)),
                    v_ac_nominal=float(inv_raw.get("v_ac_nominal", 220.0)),
                )
            except ValueError as exc:
                _violation(out, "inverter", str(exc))

    # Shed policy.
    policy: ShedPolicy | None = None
    pol_raw = raw.get("policy")
    if not isinstance(pol_raw, dict):
        _violation(out, "policy", "missing policy object")
    else:
        cap = _number(pol_raw, "capacity_kw", "policy", out)
        margin = _number(pol_raw, "restore_margin_kw", "policy", out)
        dur_s = _number(pol_raw, "min_shed_duration_s", "policy", out)
        if None not in (cap, margin, dur_s) and dt:
            try:
                policy = ShedPolicy(
                    capacity_kw=cap,
                    restore_margin_kw=margin,
                    min_shed_duration_steps=int(round(dur_s / dt)),
                )
            except ValueError as exc:
                _violation(out, "policy", str(exc))

    # AMI channel.
    ami: ChannelConfig | None = None
    ami_raw = raw.get("ami")
    if not isinstance(ami_raw, dict):
        _violation(out, "ami", "missing ami object")
    else:
        latency = _number(ami_raw, "latency_steps", "ami", out)
        drop = _number(ami_raw, "drop_probability", "ami", out)
        if latency is not None and drop is not None:
            try:
                ami = ChannelConfig(
                    latency_steps=int(latency),
                    drop_probability=drop,
                    seed=int(raw.get("seed", 0)),
                )
            except ValueError as exc:
                _violation(out, "ami", str(exc))

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        _violation(out, "seed", "must be an integer")
        seed = 0

    if out:
        return None, out

    meta = raw.get("meta") or {}
    name = meta.get("name") if isinstance(meta, dict) else None
    try:
        han = Han(homes=tuple(homes))
        scenario = Scenario(
            duration_s=duration,
            dt_s=dt,
            irradiance=irradiance,
            temperature=temperature,
            han=han,
            mode_schedule=tuple(schedule),
            pv=pv_plant,
            inverter=inverter,
            policy=policy,
            ami=ami,
            seed=seed,
            name=name if isinstance(name, str) else "scenario",
        )
    except ValueError as exc:
        _violation(out, "$", str(exc))
        return None, out
    return scenario, out


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file; raises :class:`ScenarioError`."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(
            [{"where": str(p), "message": "scenario file not found"}]
        ) from None
    except json.JSONDecodeError as exc:
        raise ScenarioError([{"where": str(p), "message": f"invalid JSON: {exc}"}]) from None
    scenario, violations = validate_scenario_dict(raw)
    if scenario is None:
        raise ScenarioError(violations)
    return scenario
