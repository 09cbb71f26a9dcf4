"""Switched-inductor boost converter and the averaged inverter abstraction.

Steady-state gain of the switched-inductor topology:

    v_o / v_g = (1 + D) / (1 - D)

Averaged small-signal dynamics around an operating duty D:

    d/dt [i_l]   [ 0            -(1-D)/(2L) ] [i_l]   [ (1+D)/(2L)          ]
         [v_o] = [ (1-D)/C      -1/(RC)     ] [v_o] + [ (v_o + v_g)/(2L)    ] * inputs
                                                      [ 0,  -i_l/C          ]

The duty-perturbation entry of the second row is derived from the averaged
capacitor equation (C dv_o/dt = (1-d) i_l - v_o/R), giving the -i_l/C
coupling; with it, the perturbation folds exactly into an effective duty
D + d_hat, so the model doubles as the averaged large-signal description.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Duty cycle outside [0, 1)."""


class UnstableStep(ValueError):
    """Integration step too large for the converter's natural frequency."""


@dataclass(frozen=True)
class SibcParams:
    l: float  # inductance (H)
    c: float  # capacitance (F)
    r: float  # load resistance (ohm)

    def __post_init__(self) -> None:
        if self.l <= 0.0 or self.c <= 0.0 or self.r <= 0.0:
            raise ValueError("l, c and r must be strictly positive")


# Bench values used by the converter-analysis command and the consistency
# checks; overridable everywhere.
DEFAULT_SIBC = SibcParams(l=1e-3, c=1e-3, r=10.0)

# Default integration step for converter studies (well under 2/|lambda_max|
# of the bench parameters at any duty).
DEFAULT_DT_S = 1e-5


@dataclass(frozen=True)
class SibcState:
    i_l: float  # inductor current (A)
    v_o: float  # output voltage (V)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.i_l) and math.isfinite(self.v_o)):
            raise ValueError("state must be finite")


@dataclass(frozen=True)
class SibcInputs:
    v_g: float  # input voltage (V)
    d_hat: float = 0.0  # duty perturbation


@dataclass(frozen=True)
class InverterModel:
    efficiency: float = 0.97
    p_rating_kw: float = 125.0
    v_dc_target: float = 500.0
    v_ac_nominal: float = 220.0

    def __post_init__(self) -> None:
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must be in (0, 1]")
        if self.p_rating_kw <= 0.0 or self.v_dc_target <= 0.0 or self.v_ac_nominal <= 0.0:
            raise ValueError("ratings must be positive")


def _check_duty(d: float) -> None:
    if not 0.0 <= d < 1.0:
        raise DomainError(f"duty must be in [0, 1), got {d}")


def sibc_gain(d: float) -> float:
    """Steady-state conversion ratio (1 + d) / (1 - d)."""
    _check_duty(d)
    return (1.0 + d) / (1.0 - d)


def small_signal_derivative(
    state: SibcState,
    inputs: SibcInputs,
    d_op: float,
    p: SibcParams,
) -> tuple[float, float]:
    """(di_l/dt, dv_o/dt) of the averaged model at the given operating duty."""
    _check_duty(d_op)
    two_l = 2.0 * p.l
    di_l = (
        -(1.0 - d_op) / two_l * state.v_o
        + (1.0 + d_op) / two_l * inputs.v_g
        + (state.v_o + inputs.v_g) / two_l * inputs.d_hat
    )
    dv_o = (
        (1.0 - d_op) / p.c * state.i_l
        - state.v_o / (p.r * p.c)
        - state.i_l / p.c * inputs.d_hat
    )
    return di_l, dv_o


def equilibrium(inputs: SibcInputs, d_op: float, p: SibcParams) -> SibcState:
    """Analytic fixed point of the model for constant inputs."""
    d_eff = d_op + inputs.d_hat
    _check_duty(d_eff)
    v_o = sibc_gain(d_eff) * inputs.v_g
    i_l = v_o / (p.r * (1.0 - d_eff))
    return SibcState(i_l=i_l, v_o=v_o)


def _max_eigenvalue_magnitude(d_eff: float, p: SibcParams) -> float:
    tr = -1.0 / (p.r * p.c)
    det = (1.0 - d_eff) ** 2 / (2.0 * p.l * p.c)
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        return math.sqrt(det)  # complex pair: |lambda|^2 = det
    return 0.5 * (abs(tr) + math.sqrt(disc))


def integrate_small_signal(
    state: SibcState,
    inputs: SibcInputs,
    d_op: float,
    p: SibcParams,
    dt: float,
    n_steps: int,
) -> SibcState:
    """Fixed-step trapezoidal integration with constant inputs.

    With the -i_l/C coupling the perturbed model is linear in the state for a
    constant d_hat (effective duty D + d_hat), so each step is an exact 2x2
    implicit solve.  Raises :class:`UnstableStep` when ``dt`` exceeds the
    accuracy bound 2/|lambda_max| of the local eigenvalues.
    """
    if dt <= 0.0 or n_steps < 0:
        raise ValueError("dt must be positive and n_steps non-negative")
    d_eff = d_op + inputs.d_hat
    _check_duty(d_eff)
    if dt * _max_eigenvalue_magnitude(d_eff, p) > 2.0:
        raise UnstableStep(
            f"dt={dt:g} exceeds 2/|lambda_max| for these converter parameters"
        )

    a11, a12 = 0.0, -(1.0 - d_eff) / (2.0 * p.l)
    a21, a22 = (1.0 - d_eff) / p.c, -1.0 / (p.r * p.c)
    u1 = (1.0 + d_eff) / (2.0 * p.l) * inputs.v_g
    h = 0.5 * dt

    # M_minus = I - h*A, M_plus = I + h*A; x' = M_minus^-1 (M_plus x + dt*u)
    m11, m12 = 1.0 - h * a11, -h * a12
    m21, m22 = -h * a21, 1.0 - h * a22
    det = m11 * m22 - m12 * m21
    inv11, inv12 = m22 / det, -m12 / det
    inv21, inv22 = -m21 / det, m11 / det
    p11, p12 = 1.0 + h * a11, h * a12
    p21, p22 = h * a21, 1.0 + h * a22

    x1, x2 = state.i_l, state.v_o
    b1, b2 = dt * u1, 0.0
    for _ in range(n_steps):
        r1 = p11 * x1 + p12 * x2 + b1
        r2 = p21 * x1 + p22 * x2 + b2
        x1 = inv11 * r1 + inv12 * r2
        x2 = inv21 * r1 + inv22 * r2
    return SibcState(i_l=x1, v_o=x2)


def inverter_ac_power(p_dc_kw: float, model: InverterModel) -> float:
    """AC power delivered for a DC input, capped at the inverter rating."""
    if p_dc_kw < 0.0:
        raise ValueError("p_dc_kw must be >= 0")
    return min(model.efficiency * p_dc_kw, model.p_rating_kw)
