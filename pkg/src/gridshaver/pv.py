"""Two-diode photovoltaic model: datasheet fitting, I-V solving, MPP search.

The module-level current equation is

    i = i_ph - i_s1*(exp((v + i*r_s)/vt_m) - 1)
             - i_s2*(exp((v + i*r_s)/(a*vt_m)) - 1)
             - (v + i*r_s)/r_p

with ``vt_m = n_cells * v_t`` the module-scale thermal voltage.  The equation
is implicit in ``i`` (the current appears inside the exponentials through the
series-resistance drop), so every evaluation goes through a bracketed
bisection solve.

Parameters are extracted from the four datasheet values (Voc, Isc, Vmp, Imp)
with equal saturation currents and a fixed second-diode ideality of 2: for a
trial series resistance, the shunt resistance is pinned so the curve passes
through the MPP, the photo and saturation currents follow from an exact
linear solve on the short/open-circuit anchors, and an outer one-dimensional
search on the series resistance drives dP/dV at Vmp to zero.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace

from .rootfind import BracketError, NoConvergence, bisect, golden_max

BOLTZMANN = 1.380649e-23  # J/K
ELECTRON_CHARGE = 1.602176634e-19  # C

STC_IRRADIANCE = 1000.0  # W/m^2
STC_TEMPERATURE = 25.0  # degC


class InvalidSpec(ValueError):
    """Datasheet values violate their invariants."""


class FitDiverged(RuntimeError):
    """Parameter extraction could not reproduce the datasheet anchors."""


class ZeroIrradiance(ValueError):
    """Maximum power point is undefined without irradiance."""


def thermal_voltage(temperature_c: float) -> float:
    """kT/e for a cell at the given temperature (V)."""
    return BOLTZMANN * (temperature_c + 273.15) / ELECTRON_CHARGE


@dataclass(frozen=True)
class Environment:
    """Operating conditions seen by the array."""

    irradiance: float  # W/m^2
    temperature: float  # degC

    def __post_init__(self) -> None:
        if self.irradiance < 0.0:
            raise ValueError(f"irradiance must be >= 0, got {self.irradiance}")
        if not -40.0 <= self.temperature <= 90.0:
            raise ValueError(f"temperature out of range: {self.temperature}")


STC = Environment(STC_IRRADIANCE, STC_TEMPERATURE)


@dataclass(frozen=True)
class ModuleSpec:
    """Datasheet values for one module at standard test conditions."""

    v_oc: float  # open-circuit voltage (V)
    i_sc: float  # short-circuit current (A)
    v_mp: float  # MPP voltage (V)
    i_mp: float  # MPP current (A)
    cells_per_module: int
    p_rated: float  # W

    def validate(self) -> None:
        if not 0.0 < self.v_mp < self.v_oc:
            raise InvalidSpec(f"need 0 < v_mp < v_oc, got {self.v_mp}, {self.v_oc}")
        if not 0.0 < self.i_mp < self.i_sc:
            raise InvalidSpec(f"need 0 < i_mp < i_sc, got {self.i_mp}, {self.i_sc}")
        if self.cells_per_module < 1:
            raise InvalidSpec("cells_per_module must be >= 1")
        if abs(self.p_rated - self.v_mp * self.i_mp) > 0.01 * self.p_rated:
            raise InvalidSpec(
                f"p_rated {self.p_rated} inconsistent with v_mp*i_mp "
                f"{self.v_mp * self.i_mp:.2f}"
            )


# The module studied throughout: 96-cell, 305.2 W.
DEFAULT_MODULE = ModuleSpec(
    v_oc=64.2, i_sc=5.96, v_mp=54.7, i_mp=5.58, cells_per_module=96, p_rated=305.2
)


@dataclass(frozen=True)
class ArrayTopology:
    """Parallel strings of series-connected modules."""

    strings_parallel: int
    modules_per_string: int

    def __post_init__(self) -> None:
        if self.strings_parallel < 1 or self.modules_per_string < 1:
            raise ValueError("topology counts must be >= 1")


@dataclass(frozen=True)
class OperatingPoint:
    v: float
    i: float
    p: float

    def __post_init__(self) -> None:
        if self.p != self.v * self.i:
            raise ValueError("p must equal v*i exactly")

    @classmethod
    def from_vi(cls, v: float, i: float) -> "OperatingPoint":
        return cls(v, i, v * i)


@dataclass(frozen=True)
class CellParams:
    """Two-diode parameters, valid at one (irradiance, temperature) pair.

    ``r_s``/``r_p`` are module-level resistances; ``n_cells`` folds the
    series cell count into the thermal-voltage scale.
    """

    i_ph: float  # photo-generated current (A)
    i_s1: float  # first-diode saturation current (A)
    i_s2: float  # second-diode saturation current (A)
    a_ideality: float  # second-diode ideality
    r_s: float  # ohm
    r_p: float  # ohm
    v_t: float  # kT/e at temp_c (V)
    temp_c: float
    n_cells: int

    def __post_init__(self) -> None:
        for name in ("i_ph", "i_s1", "i_s2", "a_ideality", "r_s", "r_p", "v_t"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.r_p <= self.r_s:
            raise ValueError(f"r_p ({self.r_p}) must exceed r_s ({self.r_s})")
        vt_expected = thermal_voltage(self.temp_c)
        if abs(self.v_t - vt_expected) > 1e-9 * vt_expected:
            raise ValueError("v_t inconsistent with temp_c")

    @property
    def vt_module(self) -> float:
        return self.n_cells * self.v_t


def diode_residual(params: CellParams, v: float, i: float) -> float:
    """Residual of the implicit two-diode equation at (v, i); zero on-curve."""
    vd = v + i * params.r_s
    vtm = params.vt_module
    return (
        params.i_ph
        - params.i_s1 * math.expm1(vd / vtm)
        - params.i_s2 * math.expm1(vd / (params.a_ideality * vtm))
        - vd / params.r_p
        - i
    )


def _residual_tolerance(params: CellParams) -> float:
    # 1e-9 relative to the short-circuit scale; floor keeps low-light solves tight.
    return 1e-9 * max(params.i_ph, 1.0)


def solve_current(
    params: CellParams,
    v: float,
    env: Environment | None = None,
    *,
    f_tol: float | None = None,
) -> float:
    """Module current at terminal voltage ``v`` (bracketed bisection).

    If ``env`` is given, ``params`` are treated as the STC-fitted set and are
    first translated to that environment; otherwise they are used as-is.
    """
    if v < 0.0:
        raise ValueError(f"voltage must be >= 0, got {v}")
    if env is not None:
        params = apply_environment(params, env)
    tol = _residual_tolerance(params) if f_tol is None else f_tol

    def f(i: float) -> float:
        return diode_residual(params, v, i)

    # f is strictly decreasing in i. The root lies at or below i_ph when
    # v >= 0; expand the lower end for voltages beyond open circuit where the
    # mathematical root goes negative.
    hi = params.i_ph + 1.0
    lo = 0.0
    f_lo = f(lo)
    if abs(f_lo) < tol:
        # Zero current already satisfies the residual criterion (dark array,
        # or terminal voltage at open circuit); keep the canonical answer.
        return 0.0
    step = max(params.i_ph, 1.0)
    attempts = 0
    while f_lo < 0.0:
        lo -= step
        step *= 2.0
        f_lo = f(lo)
        attempts += 1
        if attempts > 60:
            raise NoConvergence("could not bracket the I-V root")
    try:
        return bisect(f, lo, hi, f_tol=tol, max_iter=200)
    except BracketError as exc:  # pragma: no cover - defensive
        raise NoConvergence(str(exc)) from exc


def apply_environment(
    params_stc: CellParams,
    env: Environment,
    *,
    alpha_isc_per_c: float = 0.0006,
    band_gap_ev: float = 1.12,
    min_irradiance_for_rp: float = 1.0,
) -> CellParams:
    """Translate STC-fitted parameters to another environment.

    Photo current scales linearly with irradiance plus a small temperature
    coefficient; saturation currents follow the cubic-temperature band-gap
    law; shunt resistance scales inversely with irradiance; the thermal
    voltage is recomputed.  At STC the result equals the input exactly.
    """
    g = max(env.irradiance, 0.0)
    t_k = env.temperature + 273.15
    t_ref_k = params_stc.temp_c + 273.15
    dt = env.temperature - params_stc.temp_c

    i_ph = params_stc.i_ph * (g / STC_IRRADIANCE) * (1.0 + alpha_isc_per_c * dt)
    sat_scale = (t_k / t_ref_k) ** 3 * math.exp(
        band_gap_ev * ELECTRON_CHARGE / BOLTZMANN * (1.0 / t_ref_k - 1.0 / t_k)
    )
    r_p = params_stc.r_p * (STC_IRRADIANCE / max(g, min_irradiance_for_rp))
    # i_ph must stay positive for CellParams; keep a vanishing floor at zero sun.
    i_ph = max(i_ph, 1e-30)
    return replace(
        params_stc,
        i_ph=i_ph,
        i_s1=params_stc.i_s1 * sat_scale,
        i_s2=params_stc.i_s2 * sat_scale,
        r_p=r_p,
        v_t=thermal_voltage(env.temperature),
        temp_c=env.temperature,
    )


def _anchor_exponentials(vd: float, vtm: float, a: float) -> float:
    return math.expm1(vd / vtm) + math.expm1(vd / (a * vtm))


@functools.lru_cache(maxsize=16)
def fit_two_diode(
    spec: ModuleSpec,
    env_stc: Environment = STC,
    *,
    a_ideality: float = 2.0,
) -> CellParams:
    """Extract two-diode parameters from a module datasheet.

    Deterministic nested search: the inner bisection pins ``r_p`` so the
    curve passes through (Vmp, Imp); the outer bisection on ``r_s`` zeroes
    dP/dV at Vmp, making the datasheet MPP the actual curve maximum.  The
    short-circuit and open-circuit anchors hold exactly by construction of
    the (i_ph, i_s) linear solve.
    """
    spec.validate()
    if (
        abs(env_stc.irradiance - STC_IRRADIANCE) > 1e-9
        or abs(env_stc.temperature - STC_TEMPERATURE) > 1e-9
    ):
        raise InvalidSpec("fitting is defined at standard test conditions")

    v_t = thermal_voltage(env_stc.temperature)
    vtm = spec.cells_per_module * v_t
    e_oc = _anchor_exponentials(spec.v_oc, vtm, a_ideality)

    def make_params(r_s: float, r_p: float) -> CellParams | None:
        e_sc = _anchor_exponentials(spec.i_sc * r_s, vtm, a_ideality)
        denom = e_oc - e_sc
        if denom <= 0.0:
            return None
        i_s = (spec.i_sc * (1.0 + r_s / r_p) - spec.v_oc / r_p) / denom
        if i_s <= 0.0:
            return None
        i_ph = spec.v_oc / r_p + i_s * e_oc
        if i_ph <= 0.0:
            return None
        return CellParams(
            i_ph=i_ph,
            i_s1=i_s,
            i_s2=i_s,
            a_ideality=a_ideality,
            r_s=r_s,
            r_p=r_p,
            v_t=v_t,
            temp_c=env_stc.temperature,
            n_cells=spec.cells_per_module,
        )

    # Anchor solves must be much tighter than the tolerances bisected on below.
    fit_f_tol = 1e-13 * spec.i_sc

    def mpp_current_gap(r_s: float, r_p: float) -> float | None:
        params = make_params(r_s, r_p)
        if params is None:
            return None
        return solve_current(params, spec.v_mp, f_tol=fit_f_tol) - spec.i_mp

    def pin_shunt(r_s: float) -> float | None:
        lo = max(4.0 * r_s, 1.0)
        grid = [lo * (1e6 / lo) ** (k / 80.0) for k in range(81)]
        vals = [mpp_current_gap(r_s, r_p) for r_p in grid]
        for (r_a, g_a), (r_b, g_b) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
            if g_a is None or g_b is None:
                continue
            if g_a == 0.0:
                return r_a
            if (g_a > 0.0) != (g_b > 0.0):
                return bisect(
                    lambda r_p: mpp_current_gap(r_s, r_p),
                    r_a,
                    r_b,
                    f_tol=1e-10 * spec.i_sc,
                    max_iter=200,
                )
        return None

    def mpp_slope(r_s: float) -> float | None:
        r_p = pin_shunt(r_s)
        if r_p is None:
            return None
        params = make_params(r_s, r_p)
        if params is None:
            return None
        h = 1e-4 * spec.v_oc
        p_hi = (spec.v_mp + h) * solve_current(params, spec.v_mp + h, f_tol=fit_f_tol)
        p_lo = (spec.v_mp - h) * solve_current(params, spec.v_mp - h, f_tol=fit_f_tol)
        return (p_hi - p_lo) / (2.0 * h)

    r_s_max = 0.999 * (spec.v_oc - spec.v_mp) / spec.i_mp
    grid = [1e-4 + k * (r_s_max - 1e-4) / 60.0 for k in range(61)]
    slopes = [mpp_slope(r_s) for r_s in grid]
    bracket = None
    for (r_a, s_a), (r_b, s_b) in zip(zip(grid, slopes), zip(grid[1:], slopes[1:])):
        if s_a is None or s_b is None:
            continue
        if (s_a > 0.0) != (s_b > 0.0):
            bracket = (r_a, r_b)
            break
    if bracket is None:
        raise FitDiverged("no series resistance zeroes dP/dV at the datasheet MPP")

    lo, hi = bracket
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        s_mid = mpp_slope(mid)
        s_lo = mpp_slope(lo)
        if s_mid is None or s_lo is None:
            raise FitDiverged("shunt pinning failed inside the bracket")
        if s_mid == 0.0:
            lo = hi = mid
            break
        if (s_mid > 0.0) == (s_lo > 0.0):
            lo = mid
        else:
            hi = mid

    r_s = 0.5 * (lo + hi)
    r_p = pin_shunt(r_s)
    if r_p is None:
        raise FitDiverged("shunt pinning failed at the fitted series resistance")
    params = make_params(r_s, r_p)
    if params is None:
        raise FitDiverged("fitted parameters fell outside their valid region")

    tol = 0.005 * spec.i_sc
    checks = (
        abs(solve_current(params, 0.0) - spec.i_sc) <= tol
        and abs(solve_current(params, spec.v_oc)) <= tol
        and abs(spec.v_mp * solve_current(params, spec.v_mp) - spec.p_rated)
        <= 0.01 * spec.p_rated
    )
    if not checks:
        raise FitDiverged("fitted curve misses a datasheet anchor")
    return params


def open_circuit_voltage(params: CellParams) -> float:
    """Module voltage where the current crosses zero (0 when there is no sun)."""
    if solve_current(params, 0.0) <= _residual_tolerance(params):
        return 0.0

    def current_at(v: float) -> float:
        return solve_current(params, v)

    hi = 10.0 * params.vt_module
    for _ in range(60):
        if current_at(hi) < 0.0:
            break
        hi *= 1.5
    else:  # pragma: no cover - defensive
        raise NoConvergence("could not bracket open-circuit voltage")
    return bisect(current_at, 0.0, hi, f_tol=_residual_tolerance(params), max_iter=200)


def _array_functions(params: CellParams, topo: ArrayTopology, f_tol: float | None = None):
    mps = topo.modules_per_string
    strings = topo.strings_parallel

    def current(v_array: float) -> float:
        return strings * solve_current(params, v_array / mps, f_tol=f_tol)

    def power(v_array: float) -> float:
        return v_array * current(v_array)

    return current, power


def sweep_curve(
    params: CellParams,
    topo: ArrayTopology,
    env: Environment,
    n_points: int,
) -> list[OperatingPoint]:
    """I-V sweep of the whole array from 0 V to open circuit."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    params_env = apply_environment(params, env)
    v_oc_array = topo.modules_per_string * open_circuit_voltage(params_env)
    current, _ = _array_functions(params_env, topo)
    points = []
    for k in range(n_points):
        v = v_oc_array * k / (n_points - 1)
        points.append(OperatingPoint.from_vi(v, current(v)))
    return points


def true_mpp(
    params: CellParams, topo: ArrayTopology, env: Environment
) -> OperatingPoint:
    """Oracle maximum power point: dense sweep plus golden-section refinement."""
    if env.irradiance <= 0.0:
        raise ZeroIrradiance("maximum power point undefined at zero irradiance")
    params_env = apply_environment(params, env)
    v_oc_array = topo.modules_per_string * open_circuit_voltage(params_env)
    if v_oc_array <= 0.0:
        raise ZeroIrradiance("open-circuit voltage collapsed to zero")
    # The dP/dV certificate needs solves well below the finite-difference scale,
    # including in faint sun where the currents themselves are milliamps.
    current, power = _array_functions(
        params_env, topo, f_tol=1e-13 * max(params_env.i_ph, 1e-2)
    )

    n = 241
    best_k, best_p = 0, -math.inf
    for k in range(n):
        p = power(v_oc_array * k / (n - 1))
        if p > best_p:
            best_k, best_p = k, p
    lo = v_oc_array * max(best_k - 1, 0) / (n - 1)
    hi = v_oc_array * min(best_k + 1, n - 1) / (n - 1)

    # The power curve is unimodal, so its finite-difference slope changes sign
    # exactly once inside the bracket; bisecting it beats maximizing power
    # directly once the curve is flat to solver precision.
    h = max(1e-5 * v_oc_array, 1e-9)
    lo = max(lo, h)
    hi = min(hi, v_oc_array - h)

    def fd_slope(v: float) -> float:
        return power(v + h) - power(v - h)

    try:
        v_mp = bisect(fd_slope, lo, hi, x_tol=1e-11 * v_oc_array, max_iter=200)
    except BracketError:
        v_mp = golden_max(power, lo, hi, iterations=90)
    point = OperatingPoint.from_vi(v_mp, current(v_mp))

    dp_dv = fd_slope(v_mp) / (2.0 * h)
    if abs(dp_dv) >= 1e-6 * point.p / point.v:
        raise NoConvergence(f"MPP refinement left |dP/dV| = {dp_dv:g}")
    return point
