"""Command-line front end: simulate, pv-curves, converter, validate.

Exit codes: 0 success, 1 validation or input failure, 2 runtime solver
failure.  CSV files are the contract; SVG plots are a convenience and their
failure only warns.  The default output directory comes from the
``GRIDSHAVER_OUT`` environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .converter import (
    DEFAULT_DT_S,
    DEFAULT_SIBC,
    DomainError,
    SibcInputs,
    SibcState,
    integrate_small_signal,
    sibc_gain,
)
from .engine import Scenario, SimulationError, SimulationResult, StepRecord, run_scenario
from .pv import (
    ArrayTopology,
    Environment,
    InvalidSpec,
    ModuleSpec,
    fit_two_diode,
    sweep_curve,
)
from .scenario_io import ScenarioError, load_scenario

CSV_HEADER = (
    "t_s,irradiance_wm2,pv_dc_kw,pv_ac_kw,demand_kw,served_kw,"
    "shed_ids,export_kw,import_kw,alarms,msgs_dropped"
)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def record_to_csv_row(r: StepRecord) -> str:
    return ",".join(
        (
            _fmt(r.t),
            _fmt(r.irradiance),
            _fmt(r.pv_dc_kw),
            _fmt(r.pv_ac_kw),
            _fmt(r.demand_kw),
            _fmt(r.served_kw),
            ";".join(r.shed_ids),
            _fmt(r.export_kw),
            _fmt(r.import_kw),
            ";".join(r.alarms),
            str(r.msgs_dropped),
        )
    )


def timeseries_csv(result: SimulationResult) -> str:
    lines = [CSV_HEADER]
    lines.extend(record_to_csv_row(r) for r in result.records)
    return "\n".join(lines) + "\n"


def _shed_transitions(records) -> tuple[int, int, set[str]]:
    sheds = restores = 0
    ever: set[str] = set()
    prev: set[str] = set()
    for r in records:
        cur = set(r.shed_ids)
        sheds += len(cur - prev)
        restores += len(prev - cur)
        ever |= cur
        prev = cur
    return sheds, restores, ever


def summary_text(scenario: Scenario, result: SimulationResult) -> str:
    records = result.records
    peak = max(records, key=lambda r: r.served_kw)
    sheds, restores, ever = _shed_transitions(records)
    alarms = sum(len(r.alarms) for r in records)
    lines = [
        f"scenario: {scenario.name}",
        f"steps: {len(records)} x {_fmt(scenario.dt_s)} s "
        f"(horizon {_fmt(scenario.duration_s)} s)",
        f"peak served: {_fmt(peak.served_kw)} kW at t={_fmt(peak.t)} s",
        f"peak demand: {_fmt(max(r.demand_kw for r in records))} kW",
        f"energy imported: {_fmt(result.ledger.energy_imported_kwh)} kWh",
        f"energy exported: {_fmt(result.ledger.energy_exported_kwh)} kWh",
        f"shed events: {sheds} (distinct loads: {len(ever)})",
        f"restore events: {restores}",
        f"loads still shed at end: {len(records[-1].shed_ids)}",
        f"alarms: {alarms}",
        f"messages: published {result.msgs_published}, "
        f"delivered {result.msgs_delivered}, dropped {result.msgs_dropped}",
    ]
    return "\n".join(lines) + "\n"


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _plot_simulation(result: SimulationResult, out_dir: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    hours = [r.t / 3600.0 for r in result.records]

    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(hours, [r.demand_kw for r in result.records], label="demand")
    ax.plot(hours, [r.served_kw for r in result.records], label="served")
    ax.set_xlabel("time (h)")
    ax.set_ylabel("kW")
    ax.legend()
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(out_dir / "load_curve.svg")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(hours, [r.pv_ac_kw for r in result.records], label="pv ac")
    ax.plot(hours, [r.export_kw for r in result.records], label="export")
    ax.plot(hours, [r.import_kw for r in result.records], label="import")
    ax.set_xlabel("time (h)")
    ax.set_ylabel("kW")
    ax.legend()
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(out_dir / "power_flow.svg")
    plt.close(fig)


def _resolve_out(path_arg: str | None) -> Path:
    if path_arg:
        return Path(path_arg)
    return Path(os.environ.get("GRIDSHAVER_OUT", "out"))


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(json.dumps(exc.violations, indent=2))
        return 1
    if args.seed is not None:
        scenario = dataclasses.replace(
            scenario,
            seed=args.seed,
            ami=dataclasses.replace(scenario.ami, seed=args.seed),
        )
    try:
        result = run_scenario(scenario, scu_enabled=not args.no_scu)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir = _resolve_out(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "timeseries.csv").write_text(timeseries_csv(result), encoding="utf-8")
    (out_dir / "summary.txt").write_text(
        summary_text(scenario, result), encoding="utf-8"
    )
    if args.plots:
        try:
            _plot_simulation(result, out_dir)
        except Exception as exc:  # plots are best-effort
            _warn(f"plot generation failed ({exc}); CSV outputs are complete")
    print(f"wrote {out_dir / 'timeseries.csv'} ({len(result.records)} steps)")
    return 0


def cmd_pv_curves(args: argparse.Namespace) -> int:
    p_rated = args.prated if args.prated is not None else args.vmp * args.imp
    try:
        spec = ModuleSpec(
            v_oc=args.voc,
            i_sc=args.isc,
            v_mp=args.vmp,
            i_mp=args.imp,
            cells_per_module=args.cells,
            p_rated=p_rated,
        )
        spec.validate()
        params = fit_two_diode(spec)
    except (InvalidSpec, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    irradiances = []
    for part in args.irradiances.split(","):
        g = float(part)
        if g <= 0.0:
            print(f"error: irradiance must be positive, got {g}", file=sys.stderr)
            return 1
        irradiances.append(g)

    if args.array:
        s, m = args.array.lower().split("x")
        topo = ArrayTopology(int(s), int(m))
    else:
        topo = ArrayTopology(1, 1)

    out_dir = _resolve_out(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = {}
    for g in irradiances:
        points = sweep_curve(params, topo, Environment(g, args.temperature), args.points)
        curves[g] = points
        lines = ["v_v,i_a,p_w"]
        lines.extend(f"{_fmt(pt.v)},{_fmt(pt.i)},{_fmt(pt.p)}" for pt in points)
        (out_dir / f"pv_curve_{g:g}.csv").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
        peak = max(pt.p for pt in points)
        print(f"G={g:g} W/m2: peak {peak:.1f} W")

    if args.plots:
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt

            fig, (ax_i, ax_p) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
            for g, points in curves.items():
                vs = [pt.v for pt in points]
                ax_i.plot(vs, [pt.i for pt in points], label=f"{g:g} W/m$^2$")
                ax_p.plot(vs, [pt.p for pt in points], label=f"{g:g} W/m$^2$")
            ax_i.set_ylabel("current (A)")
            ax_p.set_ylabel("power (W)")
            ax_p.set_xlabel("voltage (V)")
            ax_i.legend()
            ax_i.grid(True, alpha=0.4)
            ax_p.grid(True, alpha=0.4)
            fig.tight_layout()
            fig.savefig(out_dir / "pv_curves.svg")
            plt.close(fig)
        except Exception as exc:
            _warn(f"plot generation failed ({exc}); CSV outputs are complete")
    return 0


def cmd_converter(args: argparse.Namespace) -> int:
    try:
        gain = sibc_gain(args.duty)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"duty {args.duty:g}: vo/vg = {gain:.6g}")
    if args.step_response:
        out_dir = _resolve_out(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        p = DEFAULT_SIBC
        dt, n = DEFAULT_DT_S, 30000
        state = SibcState(0.0, 0.0)
        inputs = SibcInputs(v_g=args.vg)
        rows = ["t_s,i_l_a,v_o_v"]
        stride = 30
        for k in range(0, n + 1, stride):
            rows.append(f"{_fmt(k * dt)},{_fmt(state.i_l)},{_fmt(state.v_o)}")
            if k < n:
                state = integrate_small_signal(state, inputs, args.duty, p, dt, stride)
        (out_dir / "step_response.csv").write_text("\n".join(rows) + "\n", "utf-8")
        print(
            f"settled v_o = {state.v_o:.4f} V (target {gain * args.vg:.4f} V); "
            f"wrote {out_dir / 'step_response.csv'}"
        )
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        load_scenario(args.scenario)
    except ScenarioError as exc:
        print(json.dumps(exc.violations, indent=2))
        return 1
    print("[]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridshaver",
        description="PV-fed microgrid simulator: peak shaving and power-flow "
        "management with smart metering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario file")
    sim.add_argument("--scenario", required=True, help="path to scenario JSON")
    sim.add_argument("--out", default=None, help="output directory")
    sim.add_argument("--plots", action="store_true", help="emit SVG plots")
    sim.add_argument("--seed", type=int, default=None, help="override scenario seed")
    sim.add_argument(
        "--no-scu", action="store_true", help="disable the smart control unit"
    )
    sim.set_defaults(func=cmd_simulate)

    pv = sub.add_parser("pv-curves", help="emit I-V / P-V curves for a module spec")
    pv.add_argument("--voc", type=float, required=True)
    pv.add_argument("--isc", type=float, required=True)
    pv.add_argument("--vmp", type=float, required=True)
    pv.add_argument("--imp", type=float, required=True)
    pv.add_argument("--cells", type=int, required=True)
    pv.add_argument("--prated", type=float, default=None)
    pv.add_argument(
        "--irradiances", default="1000", help="comma-separated W/m2 values"
    )
    pv.add_argument("--array", default=None, help="topology SxM, e.g. 13x5")
    pv.add_argument("--temperature", type=float, default=25.0)
    pv.add_argument("--points", type=int, default=200)
    pv.add_argument("--out", default=None)
    pv.add_argument("--plots", action="store_true")
    pv.set_defaults(func=cmd_pv_curves)

    conv = sub.add_parser("converter", help="boost-converter analysis")
    conv.add_argument("--duty", type=float, required=True)
    conv.add_argument("--step-response", action="store_true")
    conv.add_argument("--vg", type=float, default=48.0)
    conv.add_argument("--out", default=None)
    conv.set_defaults(func=cmd_converter)

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("--scenario", required=True)
    val.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
