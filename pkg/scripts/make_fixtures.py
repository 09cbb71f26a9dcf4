#!/usr/bin/env python3
"""Regenerate the canonical scenario fixtures under scenarios/.

The grid-connected fixtures need irradiance profiles that make the plant's
AC output hit stated envelopes, so the script inverts the MPP curve
numerically and embeds the resulting breakpoints as plain data.  Each fixture
is then simulated once and checked against the envelope it was built for, so
a stale or miscalibrated fixture can never be committed silently.

Run from the repository root:  python scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from gridshaver.engine import run_scenario
from gridshaver.pv import ArrayTopology, Environment, DEFAULT_MODULE, fit_two_diode, true_mpp
from gridshaver.rootfind import bisect
from gridshaver.scenario_io import load_scenario

REPO = Path(__file__).resolve().parents[1]
OUT_DIR = REPO / "scenarios"

N_ARRAYS = 5
TOPOLOGY = ArrayTopology(strings_parallel=13, modules_per_string=5)
EFFICIENCY = 0.97
RATING_KW = 125.0

MODULE_SPEC = {
    "v_oc": 64.2,
    "i_sc": 5.96,
    "v_mp": 54.7,
    "i_mp": 5.58,
    "cells_per_module": 96,
    "p_rated": 305.2,
}

PV_BLOCK = {
    "module_spec": MODULE_SPEC,
    "strings": 13,
    "modules_per_string": 5,
    "arrays": N_ARRAYS,
}

INVERTER_BLOCK = {
    "efficiency": EFFICIENCY,
    "rating_kw": RATING_KW,
    "v_dc_target": 500.0,
    "v_ac_nominal": 220.0,
}

POLICY_BLOCK = {
    "capacity_kw": 100.0,
    "restore_margin_kw": 5.0,
    "min_shed_duration_s": 900.0,
}

IDEAL_AMI = {"latency_steps": 0, "drop_probability": 0.0}


def hours(h: float) -> float:
    return h * 3600.0


def irradiance_for_ac(target_kw: float) -> float:
    """Irradiance making the whole plant deliver ``target_kw`` AC at 25 degC."""
    params = fit_two_diode(DEFAULT_MODULE)

    def gap(g: float) -> float:
        p_mp = true_mpp(params, TOPOLOGY, Environment(g, 25.0)).p
        return EFFICIENCY * N_ARRAYS * p_mp / 1000.0 - target_kw

    g = bisect(gap, 0.5, 1200.0, f_tol=1e-4, max_iter=100)
    return round(g, 3)


def ac_envelope_points(waypoints: list[tuple[float, float]]) -> list[list[float]]:
    """(hour-from-start, target AC kW) -> [t_s, irradiance] breakpoints."""
    return [[hours(h), irradiance_for_ac(kw)] for h, kw in waypoints]


def constant_home_loads(total_kw: float, duration_s: float) -> list[dict]:
    """Four homes drawing a constant total; tiers present but never shed."""
    homes = []
    share = total_kw / 4.0
    base = round(share * 0.64, 4)
    flex = round(share - base, 4)
    flat = lambda: [[0.0, 1.0], [duration_s, 1.0]]  # noqa: E731
    for k in range(1, 5):
        homes.append(
            {
                "id": f"h{k}",
                "loads": [
                    {
                        "id": f"h{k}-base",
                        "tier": 1,
                        "phase": "three",
                        "rated_kw": base,
                        "profile_points": flat(),
                    },
                    {
                        "id": f"h{k}-flex",
                        "tier": 2,
                        "phase": "single",
                        "rated_kw": flex,
                        "profile_points": flat(),
                    },
                ],
            }
        )
    return homes


# ---------------------------------------------------------------------------
# Peak day (islanded): demand exceeds the 100 kW plant rating between
# 11:00 and 13:00 and the SCU must shave it by shedding Tier-3 loads.
# Times are hours after 06:00.

PEAK_HOURS = [0.0, 3.0, 4.0, 5.0, 5.5, 6.5, 7.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0]
TIER1_TOTAL = [35.0, 47.0, 52.0, 56.0, 60.0, 60.0, 56.0, 50.0, 47.0, 49.0, 46.0, 41.0, 35.0]
TIER2_TOTAL = [16.0, 24.0, 26.0, 29.0, 32.0, 32.0, 29.0, 26.0, 25.0, 26.0, 24.0, 21.0, 18.0]
TIER3_TOTAL = [4.0, 9.0, 12.0, 15.0, 18.0, 18.0, 15.0, 9.0, 8.0, 7.0, 5.0, 3.0, 2.0]
TIER1_RATED = {"h1": 18.0, "h2": 16.0, "h3": 14.0, "h4": 12.0}
TIER2_RATED = {"h1": 10.0, "h2": 9.0, "h3": 7.0, "h4": 6.0}
TIER3_RATED = {"h1": 6.0, "h2": 5.0, "h3": 4.0, "h4": 3.0}


def tier_profile(totals: list[float], rated_sum: float) -> list[list[float]]:
    return [[hours(h), round(v / rated_sum, 6)] for h, v in zip(PEAK_HOURS, totals)]


def peak_day_homes() -> list[dict]:
    f1 = tier_profile(TIER1_TOTAL, sum(TIER1_RATED.values()))
    f2 = tier_profile(TIER2_TOTAL, sum(TIER2_RATED.values()))
    f3 = tier_profile(TIER3_TOTAL, sum(TIER3_RATED.values()))
    homes = []
    for hid in ("h1", "h2", "h3", "h4"):
        homes.append(
            {
                "id": hid,
                "loads": [
                    {
                        "id": f"{hid}-base",
                        "tier": 1,
                        "phase": "three",
                        "rated_kw": TIER1_RATED[hid],
                        "profile_points": f1,
                    },
                    {
                        "id": f"{hid}-flex",
                        "tier": 2,
                        "phase": "single",
                        "rated_kw": TIER2_RATED[hid],
                        "profile_points": f2,
                    },
                    {
                        "id": f"{hid}-lux",
                        "tier": 3,
                        "phase": "single",
                        "rated_kw": TIER3_RATED[hid],
                        "profile_points": f3,
                    },
                ],
            }
        )
    return homes


def peak_day() -> dict:
    duration = hours(18.0)
    return {
        "meta": {
            "name": "peak-day-islanded",
            "description": "Islanded 06:00-24:00; demand peaks at 110 kW "
            "between 11:00 and 13:00; SCU sheds Tier-3 to hold 100 kW.",
            "t0_hour": 6,
        },
        "duration_s": duration,
        "dt_s": 60.0,
        "irradiance_points": [
            [hours(0.0), 50.0],
            [hours(2.0), 400.0],
            [hours(4.0), 800.0],
            [hours(6.0), 1000.0],
            [hours(8.0), 850.0],
            [hours(10.0), 500.0],
            [hours(12.0), 150.0],
            [hours(13.0), 0.0],
            [hours(18.0), 0.0],
        ],
        "temperature_points": [[0.0, 25.0], [duration, 25.0]],
        "homes": peak_day_homes(),
        "mode_schedule": [[0.0, "islanded"]],
        "pv": PV_BLOCK,
        "inverter": INVERTER_BLOCK,
        "policy": POLICY_BLOCK,
        "ami": IDEAL_AMI,
        "seed": 42,
    }


def sunny_day() -> dict:
    duration = hours(8.0)
    ac_waypoints = [
        (0.0, 63.0),
        (1.5, 74.0),
        (2.75, 80.0),
        (3.0, 64.0),  # irradiance dip around noon
        (3.25, 79.0),
        (4.5, 84.5),
        (6.25, 80.0),
        (6.5, 63.5),  # second dip around 15:30
        (6.75, 76.0),
        (8.0, 65.0),
    ]
    return {
        "meta": {
            "name": "sunny-day-grid",
            "description": "Grid-connected 09:00-17:00; constant 50 kW load, "
            "PV 62-85 kW with dips near 12:00 and 15:30; always exporting.",
            "t0_hour": 9,
        },
        "duration_s": duration,
        "dt_s": 60.0,
        "irradiance_points": ac_envelope_points(ac_waypoints),
        "temperature_points": [[0.0, 25.0], [duration, 25.0]],
        "homes": constant_home_loads(50.0, duration),
        "mode_schedule": [[0.0, "grid"]],
        "pv": PV_BLOCK,
        "inverter": INVERTER_BLOCK,
        "policy": POLICY_BLOCK,
        "ami": IDEAL_AMI,
        "seed": 7,
    }


def cloudy_day() -> dict:
    duration = hours(8.0)
    ac_waypoints = [
        (0.0, 12.0),
        (1.0, 17.0),
        (2.0, 19.3),
        (3.0, 15.0),
        (4.0, 9.0),
        (4.5, 5.8),  # very low irradiance stretch 13:30-15:30
        (5.5, 5.6),
        (6.5, 6.0),
        (7.0, 9.0),
        (8.0, 13.0),
    ]
    return {
        "meta": {
            "name": "cloudy-day-grid",
            "description": "Grid-connected 09:00-17:00; constant 95 kW load, "
            "PV 5-20 kW; always importing.",
            "t0_hour": 9,
        },
        "duration_s": duration,
        "dt_s": 60.0,
        "irradiance_points": ac_envelope_points(ac_waypoints),
        "temperature_points": [[0.0, 25.0], [duration, 25.0]],
        "homes": constant_home_loads(95.0, duration),
        "mode_schedule": [[0.0, "grid"]],
        "pv": PV_BLOCK,
        "inverter": INVERTER_BLOCK,
        "policy": POLICY_BLOCK,
        "ami": IDEAL_AMI,
        "seed": 11,
    }


def day_night() -> dict:
    duration = hours(18.0)
    ac_points = ac_envelope_points(
        [
            (0.0, 55.0),
            (3.0, 75.0),
            (6.0, 85.0),
            (9.0, 72.0),
            (11.0, 50.4),  # crosses the 50 kW load just after 17:00
        ]
    )
    ac_points += [[hours(12.0), 0.0], [duration, 0.0]]
    return {
        "meta": {
            "name": "day-night-grid",
            "description": "Grid-connected 06:00-24:00; exports until 17:00, "
            "partial import 17:00-18:00, full import after dark.",
            "t0_hour": 6,
        },
        "duration_s": duration,
        "dt_s": 60.0,
        "irradiance_points": ac_points,
        "temperature_points": [[0.0, 25.0], [duration, 25.0]],
        "homes": constant_home_loads(50.0, duration),
        "mode_schedule": [[0.0, "grid"]],
        "pv": PV_BLOCK,
        "inverter": INVERTER_BLOCK,
        "policy": POLICY_BLOCK,
        "ami": IDEAL_AMI,
        "seed": 3,
    }


def check_peak_day(path: Path) -> None:
    result = run_scenario(load_scenario(path))
    records = result.records
    assert all(r.served_kw <= 100.0 + 1e-9 for r in records), "served exceeded 100 kW"
    shed_ever = set().union(*(set(r.shed_ids) for r in records))
    assert shed_ever and all(sid.endswith("-lux") for sid in shed_ever), shed_ever
    assert not records[-1].shed_ids, "sheds not restored by end of run"
    over = [r.t / 3600.0 for r in records if r.demand_kw > 100.0]
    assert over and min(over) >= 5.0 and max(over) <= 7.0, (min(over), max(over))
    disabled = run_scenario(load_scenario(path), scu_enabled=False)
    assert max(r.served_kw for r in disabled.records) > 100.0
    print(f"  peak demand {max(r.demand_kw for r in records):.2f} kW, "
          f"peak served {max(r.served_kw for r in records):.2f} kW, "
          f"sheds {sorted(shed_ever)}")


def check_export_band(path: Path, lo: float, hi: float) -> None:
    result = run_scenario(load_scenario(path))
    exports = [r.export_kw for r in result.records]
    assert all(r.import_kw == 0.0 for r in result.records), "unexpected import"
    assert lo <= min(exports) and max(exports) <= hi, (min(exports), max(exports))
    print(f"  export range [{min(exports):.2f}, {max(exports):.2f}] kW")


def check_import_band(path: Path, lo: float, hi: float) -> None:
    result = run_scenario(load_scenario(path))
    imports = [r.import_kw for r in result.records]
    assert all(r.export_kw == 0.0 for r in result.records), "unexpected export"
    assert lo <= min(imports) and max(imports) <= hi, (min(imports), max(imports))
    print(f"  import range [{min(imports):.2f}, {max(imports):.2f}] kW")


def check_day_night(path: Path) -> None:
    result = run_scenario(load_scenario(path))
    phases = []
    for r in result.records:
        if r.export_kw > 0.0:
            phase = "export"
        elif r.import_kw > 0.0:
            phase = "partial" if r.pv_ac_kw > 1e-9 else "full"
        else:
            phase = "balanced"
        if not phases or phases[-1] != phase:
            phases.append(phase)
    assert phases == ["export", "partial", "full"], phases
    print(f"  phase sequence {phases}")


def main() -> int:
    OUT_DIR.mkdir(exist_ok=True)
    builders = {
        "peak_day.json": peak_day,
        "sunny_day.json": sunny_day,
        "cloudy_day.json": cloudy_day,
        "day_night.json": day_night,
    }
    for fname, builder in builders.items():
        print(f"building {fname} ...")
        payload = builder()
        (OUT_DIR / fname).write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )

    print("verifying fixtures against their envelopes ...")
    print("peak_day:")
    check_peak_day(OUT_DIR / "peak_day.json")
    print("sunny_day:")
    check_export_band(OUT_DIR / "sunny_day.json", 12.0, 35.0)
    print("cloudy_day:")
    check_import_band(OUT_DIR / "cloudy_day.json", 75.0, 90.0)
    print("day_night:")
    check_day_night(OUT_DIR / "day_night.json")
    print("all fixtures verified")
    return 0


if __name__ == "__main__":
    sys.exit(main())
