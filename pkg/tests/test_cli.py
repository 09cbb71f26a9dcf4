"""CLI contract: commands, file outputs, exit codes."""

import json

import pytest

from conftest import scenario_path

from gridshaver.cli import CSV_HEADER, main, timeseries_csv
from gridshaver.engine import run_scenario


def test_simulate_writes_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(
        ["simulate", "--scenario", str(scenario_path("cloudy_day")), "--out", str(out)]
    )
    assert code == 0
    csv_text = (out / "timeseries.csv").read_text()
    lines = csv_text.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 481  # header + 8 h of 60 s steps, inclusive
    summary = (out / "summary.txt").read_text()
    assert "energy imported" in summary
    assert "peak served" in summary


def test_simulate_peak_day_summary_peak_within_limit(tmp_path):
    out = tmp_path / "peak"
    assert main(
        ["simulate", "--scenario", str(scenario_path("peak_day")), "--out", str(out)]
    ) == 0
    summary = (out / "summary.txt").read_text()
    peak_line = next(l for l in summary.splitlines() if l.startswith("peak served"))
    peak = float(peak_line.split(":")[1].split("kW")[0])
    assert peak <= 100.0


def test_missing_scenario_exits_1_naming_path(tmp_path, capsys):
    code = main(["simulate", "--scenario", "scenarios/absent.json", "--out", str(tmp_path)])
    assert code == 1
    violations = json.loads(capsys.readouterr().out)
    assert "absent" in violations[0]["where"]


def test_invalid_scenario_exits_1_with_violations(tmp_path, capsys):
    raw = json.loads(scenario_path("sunny_day").read_text())
    raw["dt_s"] = -5.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(raw))
    code = main(["simulate", "--scenario", str(bad), "--out", str(tmp_path / "o")])
    assert code == 1
    violations = json.loads(capsys.readouterr().out)
    assert any(v["where"] == "dt_s" for v in violations)


def test_runtime_failure_exits_2(tmp_path, capsys):
    raw = json.loads(scenario_path("sunny_day").read_text())
    raw["pv"]["module_spec"] = {
        "v_oc": 10.0, "i_sc": 5.0, "v_mp": 9.9, "i_mp": 4.95,
        "cells_per_module": 96, "p_rated": 49.005,
    }
    bad = tmp_path / "unfit.json"
    bad.write_text(json.dumps(raw))
    assert main(["simulate", "--scenario", str(bad), "--out", str(tmp_path / "o")]) == 2


@pytest.mark.parametrize("name", ["peak_day", "sunny_day", "cloudy_day", "day_night"])
def test_validate_shipped_fixtures(name, capsys):
    assert main(["validate", "--scenario", str(scenario_path(name))]) == 0
    assert json.loads(capsys.readouterr().out) == []


def test_validate_reports_machine_readable_violations(tmp_path, capsys):
    raw = json.loads(scenario_path("sunny_day").read_text())
    raw["irradiance_points"][-1][0] = 100.0  # profile stops covering the run
    bad = tmp_path / "gap.json"
    bad.write_text(json.dumps(raw))
    assert main(["validate", "--scenario", str(bad)]) == 1
    violations = json.loads(capsys.readouterr().out)
    assert violations and violations[0]["where"] == "irradiance_points"


def test_seed_override_changes_lossy_run(tmp_path):
    raw = json.loads(scenario_path("sunny_day").read_text())
    raw["ami"]["drop_probability"] = 0.5
    lossy = tmp_path / "lossy.json"
    lossy.write_text(json.dumps(raw))
    main(["simulate", "--scenario", str(lossy), "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["simulate", "--scenario", str(lossy), "--out", str(tmp_path / "b"), "--seed", "2"])
    a = (tmp_path / "a" / "timeseries.csv").read_text()
    b = (tmp_path / "b" / "timeseries.csv").read_text()
    assert a != b  # different drop patterns


def test_timeseries_csv_is_deterministic(fixture_scenarios):
    scenario = fixture_scenarios["sunny_day"]
    assert timeseries_csv(run_scenario(scenario)) == timeseries_csv(run_scenario(scenario))


def test_pv_curves_module_peak(tmp_path, capsys):
    code = main(
        [
            "pv-curves", "--voc", "64.2", "--isc", "5.96", "--vmp", "54.7",
            "--imp", "5.58", "--cells", "96", "--irradiances", "250,500,750,1000",
            "--out", str(tmp_path),
        ]
    )
    assert code == 0
    rows = (tmp_path / "pv_curve_1000.csv").read_text().strip().split("\n")[1:]
    peak = max(float(r.split(",")[2]) for r in rows)
    assert peak == pytest.approx(305.2, rel=0.01)
    peaks = []
    for g in (250, 500, 750, 1000):
        rows = (tmp_path / f"pv_curve_{g}.csv").read_text().strip().split("\n")[1:]
        peaks.append(max(float(r.split(",")[2]) for r in rows))
    assert peaks == sorted(peaks)


def test_pv_curves_array_flag(tmp_path):
    code = main(
        [
            "pv-curves", "--voc", "64.2", "--isc", "5.96", "--vmp", "54.7",
            "--imp", "5.58", "--cells", "96", "--irradiances", "1000",
            "--array", "13x5", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    rows = (tmp_path / "pv_curve_1000.csv").read_text().strip().split("\n")[1:]
    peak_kw = max(float(r.split(",")[2]) for r in rows) / 1000.0
    assert 19.4 <= peak_kw <= 20.2


def test_pv_curves_invalid_spec_exits_1(tmp_path):
    code = main(
        [
            "pv-curves", "--voc", "50.0", "--isc", "5.0", "--vmp", "54.0",
            "--imp", "4.0", "--cells", "96", "--out", str(tmp_path),
        ]
    )
    assert code == 1


def test_converter_prints_gain(capsys):
    assert main(["converter", "--duty", "0.5"]) == 0
    assert "vo/vg = 3" in capsys.readouterr().out


def test_converter_rejects_saturated_duty(capsys):
    assert main(["converter", "--duty", "1.0"]) == 1


def test_converter_step_response(tmp_path, capsys):
    assert main(
        ["converter", "--duty", "0.3", "--step-response", "--out", str(tmp_path)]
    ) == 0
    body = (tmp_path / "step_response.csv").read_text().strip().split("\n")
    assert body[0] == "t_s,i_l_a,v_o_v"
    final_v = float(body[-1].split(",")[2])
    assert final_v == pytest.approx(48.0 * (1.3 / 0.7), rel=0.005)


def test_simulate_emits_svg_plots(tmp_path):
    out = tmp_path / "plots"
    assert main(
        ["simulate", "--scenario", str(scenario_path("sunny_day")),
         "--out", str(out), "--plots"]
    ) == 0
    assert (out / "load_curve.svg").exists()
    assert (out / "power_flow.svg").exists()


def test_out_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("GRIDSHAVER_OUT", str(tmp_path / "envout"))
    assert main(
        ["pv-curves", "--voc", "64.2", "--isc", "5.96", "--vmp", "54.7",
         "--imp", "5.58", "--cells", "96"]
    ) == 0
    assert (tmp_path / "envout" / "pv_curve_1000.csv").exists()
