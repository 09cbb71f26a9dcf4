"""Tiered load aggregation and smart-meter quantization."""

import pytest
from hypothesis import assume, given, strategies as st

from gridshaver.loads import (
    Han,
    Home,
    Load,
    MeterReading,
    Tier,
    UnknownLoadId,
    aggregate_demand,
    meter_sample,
    quantize_kw,
)
from gridshaver.profiles import PiecewiseLinear

from conftest import scenario_path
from gridshaver.scenario_io import load_scenario


def flat(value: float, t_end: float = 3600.0) -> PiecewiseLinear:
    return PiecewiseLinear(((0.0, value), (t_end, value)))


def small_han() -> Han:
    h1 = Home(
        id="h1",
        loads=(
            Load("h1-base", "h1", Tier.TIER1, "three", 10.0, flat(0.5)),
            Load("h1-lux", "h1", Tier.TIER3, "single", 4.0, flat(1.0)),
        ),
    )
    h2 = Home(
        id="h2",
        loads=(
            Load("h2-base", "h2", Tier.TIER1, "three", 8.0, flat(0.75)),
            Load("h2-lux", "h2", Tier.TIER3, "single", 6.0, flat(0.5)),
        ),
    )
    return Han(homes=(h1, h2))


def test_empty_han_has_zero_demand():
    assert aggregate_demand(Han(homes=()), 0.0) == 0.0


def test_aggregate_sums_unshed_loads():
    han = small_han()
    assert aggregate_demand(han, 0.0) == pytest.approx(5.0 + 4.0 + 6.0 + 3.0)


def test_shedding_all_tier3_drops_their_draw():
    han = small_han()
    tier3 = {load.id for load in han.loads_of_tier(Tier.TIER3)}
    base = aggregate_demand(han, 0.0)
    shed = aggregate_demand(han, 0.0, tier3)
    tier3_draw = sum(han.load_by_id(i).draw_kw(0.0) for i in tier3)
    assert shed == pytest.approx(base - tier3_draw)


def test_unknown_shed_id_raises():
    with pytest.raises(UnknownLoadId):
        aggregate_demand(small_han(), 0.0, {"nope"})


def test_removing_a_shed_never_increases_demand():
    han = small_han()
    full_shed = {"h1-lux", "h2-lux"}
    partial = {"h1-lux"}
    assert aggregate_demand(han, 0.0, full_shed) <= aggregate_demand(han, 0.0, partial)


def test_duplicate_load_ids_rejected():
    load = Load("same", "h1", Tier.TIER1, "single", 1.0, flat(1.0))
    other = Load("same", "h2", Tier.TIER2, "single", 1.0, flat(1.0))
    with pytest.raises(ValueError):
        Han(homes=(Home("h1", (load,)), Home("h2", (other,))))


def test_tier_partition_covers_all_loads():
    han = small_han()
    by_tier = [set(l.id for l in han.loads_of_tier(t)) for t in Tier]
    all_ids = {l.id for l in han.all_loads()}
    assert set().union(*by_tier) == all_ids
    assert sum(len(s) for s in by_tier) == len(all_ids)


def test_peak_day_fixture_exceeds_100kW_only_in_window():
    scenario = load_scenario(scenario_path("peak_day"))
    t0_to_hour = lambda t: 6.0 + t / 3600.0  # noqa: E731  (scenario starts 06:00)
    over = [
        t0_to_hour(step * 60.0)
        for step in range(int(scenario.duration_s // 60) + 1)
        if aggregate_demand(scenario.han, step * 60.0) > 100.0
    ]
    assert over, "fixture never peaks"
    assert min(over) >= 11.0
    assert max(over) <= 13.0


class TestMeterSample:
    def test_zero_demand_reads_zero(self):
        home = Home("h", (Load("l", "h", Tier.TIER1, "single", 1.0, flat(0.0)),))
        reading = meter_sample(home, 0.0, 60.0)
        assert reading == MeterReading("meter-h", 0.0, 0.0)

    def test_round_half_up_at_resolution(self):
        home = Home("h", (Load("l", "h", Tier.TIER1, "single", 12.3456, flat(1.0)),))
        assert meter_sample(home, 60.0, 60.0).active_kw == pytest.approx(12.35)

    def test_quantization_error_bound(self):
        assert quantize_kw(12.3456) == pytest.approx(12.35)
        assert abs(quantize_kw(0.0049) - 0.0049) < 0.005

    def test_misaligned_time_rejected(self):
        home = Home("h", (Load("l", "h", Tier.TIER1, "single", 1.0, flat(1.0)),))
        with pytest.raises(ValueError):
            meter_sample(home, 17.0, 60.0)

    def test_home_sum_matches_aggregate_within_quantization(self):
        scenario = load_scenario(scenario_path("peak_day"))
        t = 5.5 * 3600.0
        total = sum(
            meter_sample(home, t, 60.0).active_kw for home in scenario.han.homes
        )
        truth = aggregate_demand(scenario.han, t)
        assert abs(total - truth) <= 4 * 0.005

    @given(st.floats(0.0, 500.0))
    def test_quantization_error_strictly_below_half_lsb(self, value):
        # Exact half-LSB inputs round up with an error of exactly half an
        # LSB, so the strict bound only holds off the midpoint set.
        assume(value * 200.0 != round(value * 200.0))
        assert abs(quantize_kw(value) - value) < 0.005

    def test_exact_midpoint_rounds_up(self):
        assert quantize_kw(0.125) == pytest.approx(0.13)
        assert abs(quantize_kw(0.125) - 0.125) <= 0.005 + 1e-12
