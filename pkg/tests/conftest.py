import pytest
from pathlib import Path

from gridshaver.ami import ChannelConfig
from gridshaver.converter import InverterModel
from gridshaver.engine import PvPlant, Scenario, run_scenario
from gridshaver.grid import IsolatorState
from gridshaver.loads import Han, Home, Load, Tier
from gridshaver.profiles import PiecewiseLinear
from gridshaver.pv import DEFAULT_MODULE, ArrayTopology, fit_two_diode
from gridshaver.scenario_io import load_scenario
from gridshaver.scu import ShedPolicy

REPO = Path(__file__).resolve().parents[1]
SCENARIO_DIR = REPO / "scenarios"
FIXTURE_NAMES = ("peak_day", "sunny_day", "cloudy_day", "day_night")


def scenario_path(name: str) -> Path:
    return SCENARIO_DIR / f"{name}.json"


@pytest.fixture(scope="session")
def params():
    """Two-diode parameters fitted to the 305.2 W / 96-cell module."""
    return fit_two_diode(DEFAULT_MODULE)


@pytest.fixture(scope="session")
def array():
    return ArrayTopology(strings_parallel=13, modules_per_string=5)


@pytest.fixture(scope="session")
def fixture_scenarios():
    return {name: load_scenario(scenario_path(name)) for name in FIXTURE_NAMES}


@pytest.fixture(scope="session")
def fixture_results(fixture_scenarios):
    """One simulation run per shipped fixture, shared across the suite."""
    return {name: run_scenario(s) for name, s in fixture_scenarios.items()}


def constant_load_han(total_kw: float, duration_s: float) -> Han:
    """Four homes drawing a constant total, split base/flex per home."""
    share = total_kw / 4.0
    homes = []
    for k in range(1, 5):
        profile = PiecewiseLinear.constant(1.0, duration_s)
        homes.append(
            Home(
                id=f"h{k}",
                loads=(
                    Load(f"h{k}-base", f"h{k}", Tier.TIER1, "three", share * 0.6, profile),
                    Load(f"h{k}-flex", f"h{k}", Tier.TIER2, "single", share * 0.4, profile),
                ),
            )
        )
    return Han(homes=tuple(homes))


def build_scenario(
    han: Han,
    duration_s: float = 3600.0,
    dt_s: float = 60.0,
    irradiance: PiecewiseLinear | None = None,
    mode: IsolatorState = IsolatorState.CLOSED,
    **overrides,
) -> Scenario:
    base = dict(
        duration_s=duration_s,
        dt_s=dt_s,
        irradiance=irradiance or PiecewiseLinear.constant(0.0, duration_s),
        temperature=PiecewiseLinear.constant(25.0, duration_s),
        han=han,
        mode_schedule=((0.0, mode),),
        pv=PvPlant(module=DEFAULT_MODULE, topology=ArrayTopology(13, 5), n_arrays=5),
        inverter=InverterModel(),
        policy=ShedPolicy(),
        ami=ChannelConfig(),
        seed=0,
    )
    base.update(overrides)
    return Scenario(**base)
