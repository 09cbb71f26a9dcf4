"""Variable-step incremental-conductance MPPT on a boost-fed PV array.

The controller compares the incremental conductance dI/dV against -I/V and
nudges the converter duty cycle toward the maximum power point; the step
magnitude scales with |dP/dV| so tracking is fast far from the optimum and
quiet near it.  Duty maps to array terminal voltage through the
switched-inductor boost gain against a stiff DC link:

    v_pv = v_dc * (1 - d) / (1 + d)

so raising the duty lowers the array voltage.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .pv import (
    ArrayTopology,
    CellParams,
    Environment,
    OperatingPoint,
    ZeroIrradiance,
    apply_environment,
    solve_current,
)


@dataclass(frozen=True)
class MpptConfig:
    d_min: float = 0.02
    d_max: float = 0.95
    base_step: float = 0.002  # minimum duty increment
    scale_factor: float = 5e-4  # duty per (W/V) of |dP/dV|
    dv_epsilon: float = 1e-6  # below this, treat dV as zero
    max_step: float | None = None  # default 32 * base_step
    stationary_band: float | None = None  # default 40 * base_step
    noise_v_std: float = 0.0  # optional seeded sensor noise
    noise_i_std: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.d_min < self.d_max < 1.0:
            raise ValueError("need 0 <= d_min < d_max < 1")
        if self.base_step <= 0.0 or self.dv_epsilon <= 0.0:
            raise ValueError("base_step and dv_epsilon must be positive")

    @property
    def step_cap(self) -> float:
        return 32.0 * self.base_step if self.max_step is None else self.max_step

    @property
    def band(self) -> float:
        # Width of the "close enough to the MPP" region in normalized
        # conductance units; scales with the step so a single duty move
        # cannot jump across it.
        return 40.0 * self.base_step if self.stationary_band is None else self.stationary_band


@dataclass(frozen=True)
class MpptState:
    """Controller memory: previous measurement pair and current duty."""

    prev_v: float | None
    prev_i: float | None
    duty: float

    @classmethod
    def initial(cls, duty: float) -> "MpptState":
        return cls(prev_v=None, prev_i=None, duty=duty)


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def ic_step(
    state: MpptState, v: float, i: float, cfg: MpptConfig
) -> tuple[MpptState, float]:
    """One incremental-conductance update from a (v, i) measurement.

    Returns the successor state and its duty.  The first call only perturbs
    the duty by one base step to create the finite increments the algorithm
    needs.
    """
    if v < 0.0 or i < 0.0:
        raise ValueError("measurements must be non-negative")
    duty = state.duty

    if state.prev_v is None or state.prev_i is None:
        new_duty = _clamp(duty + cfg.base_step, cfg.d_min, cfg.d_max)
        return MpptState(v, i, new_duty), new_duty

    dv = v - state.prev_v
    di = i - state.prev_i

    if i <= 0.0:
        # No conduction (array open above its open-circuit voltage): walk the
        # operating voltage down until current flows.
        new_duty = _clamp(duty + cfg.base_step, cfg.d_min, cfg.d_max)
    elif abs(dv) < cfg.dv_epsilon:
        if di == 0.0:
            new_duty = duty
        elif di > 0.0:
            new_duty = _clamp(duty - cfg.base_step, cfg.d_min, cfg.d_max)
        else:
            new_duty = _clamp(duty + cfg.base_step, cfg.d_min, cfg.d_max)
    else:
        dp_dv = (v * i - state.prev_v * state.prev_i) / dv
        step = _clamp(cfg.scale_factor * abs(dp_dv), cfg.base_step, cfg.step_cap)
        # Normalized stationarity residual: 0 exactly when dI/dV == -I/V.
        residual = (di / dv) * (v / i) + 1.0
        if abs(residual) <= cfg.band:
            new_duty = duty
        elif residual > 0.0:
            # dP/dV > 0: left of the MPP, raise the array voltage.
            new_duty = _clamp(duty - step, cfg.d_min, cfg.d_max)
        else:
            new_duty = _clamp(duty + step, cfg.d_min, cfg.d_max)

    return MpptState(v, i, new_duty), new_duty


def pv_terminal_voltage(duty: float, v_dc: float) -> float:
    """Array voltage imposed by the boost stage at the given duty."""
    return v_dc * (1.0 - duty) / (1.0 + duty)


def operating_point_for_duty(
    params_env: CellParams,
    topo: ArrayTopology,
    duty: float,
    v_dc: float,
) -> OperatingPoint:
    """Static plant response: array (v, i, p) when the converter holds ``duty``.

    ``params_env`` must already be translated to the ambient environment.
    Reverse current above open circuit is blocked.
    """
    v_arr = pv_terminal_voltage(duty, v_dc)
    v_mod = v_arr / topo.modules_per_string
    i_arr = topo.strings_parallel * solve_current(params_env, v_mod)
    return OperatingPoint.from_vi(v_arr, max(0.0, i_arr))


@dataclass(frozen=True)
class TrackResult:
    point: OperatingPoint
    duty: float
    settled: bool
    steps: int


def track_quasi_static(
    params: CellParams,
    topo: ArrayTopology,
    env: Environment,
    cfg: MpptConfig,
    *,
    v_dc: float = 500.0,
    d0: float | None = None,
    max_steps: int = 2000,
    settle_window: int = 10,
    rng: random.Random | None = None,
) -> TrackResult:
    """Run the IC controller against the static curve until the duty rests.

    Settles when the duty moves by less than one base step for
    ``settle_window`` consecutive controller steps; if the budget runs out
    the last operating point is returned with ``settled=False``.
    """
    if env.irradiance <= 0.0:
        raise ZeroIrradiance("cannot track without irradiance")
    params_env = apply_environment(params, env)
    duty = _clamp(cfg.d_min if d0 is None else d0, cfg.d_min, cfg.d_max)
    state = MpptState.initial(duty)
    quiet = 0
    steps = 0
    for _ in range(max_steps):
        op = operating_point_for_duty(params_env, topo, state.duty, v_dc)
        v, i = op.v, op.i
        if rng is not None and (cfg.noise_v_std > 0.0 or cfg.noise_i_std > 0.0):
            v = max(0.0, v + rng.gauss(0.0, cfg.noise_v_std))
            i = max(0.0, i + rng.gauss(0.0, cfg.noise_i_std))
        prev_duty = state.duty
        state, duty = ic_step(state, v, i, cfg)
        steps += 1
        quiet = quiet + 1 if abs(duty - prev_duty) < cfg.base_step else 0
        if quiet >= settle_window:
            break
    settled = quiet >= settle_window
    final = operating_point_for_duty(params_env, topo, state.duty, v_dc)
    return TrackResult(point=final, duty=state.duty, settled=settled, steps=steps)
