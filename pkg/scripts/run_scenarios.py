#!/usr/bin/env python3
"""Run every shipped scenario and the PV/converter studies in one go.

Outputs land under out/ (or $GRIDSHAVER_OUT): per-scenario time series, the
peak-day comparison with the control unit disabled, module I-V/P-V curves at
four irradiance levels, and a boost-converter step response.

Usage:  python scripts/run_scenarios.py [output_dir]
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

from gridshaver.cli import main as cli

REPO = Path(__file__).resolve().parents[1]
SCENARIOS = ("peak_day", "sunny_day", "cloudy_day", "day_night")


def main() -> int:
    out_root = Path(sys.argv[1] if len(sys.argv) > 1 else
                    os.environ.get("GRIDSHAVER_OUT", REPO / "out"))
    rc = 0
    for name in SCENARIOS:
        scenario = str(REPO / "scenarios" / f"{name}.json")
        print(f"=== {name} ===")
        rc |= cli(["simulate", "--scenario", scenario,
                   "--out", str(out_root / name), "--plots"])
        if name == "peak_day":
            print("=== peak_day (control unit disabled) ===")
            rc |= cli(["simulate", "--scenario", scenario, "--no-scu",
                       "--out", str(out_root / "peak_day_no_scu"), "--plots"])

    print("=== module curves ===")
    rc |= cli(["pv-curves", "--voc", "64.2", "--isc", "5.96", "--vmp", "54.7",
               "--imp", "5.58", "--cells", "96",
               "--irradiances", "250,500,750,1000",
               "--out", str(out_root / "pv_curves"), "--plots"])

    print("=== converter step response ===")
    rc |= cli(["converter", "--duty", "0.5", "--step-response",
               "--out", str(out_root / "converter")])
    return rc


if __name__ == "__main__":
    sys.exit(main())
