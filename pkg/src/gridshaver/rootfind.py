"""Bracketed scalar root finding and 1-D maximization.

Small, dependency-free solvers used throughout the electrical models. All
routines are deterministic: fixed iteration budgets, no randomness.
"""

from __future__ import annotations

from typing import Callable


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


class NoConvergence(RuntimeError):
    """Iteration budget exhausted before the residual tolerance was met."""


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    f_tol: float | None = None,
    x_tol: float = 0.0,
    max_iter: int = 200,
) -> float:
    """Find a root of ``f`` in ``[lo, hi]`` by plain bisection.

    ``f(lo)`` and ``f(hi)`` must differ in sign (a zero endpoint is returned
    directly).  Stops when ``|f(mid)| < f_tol`` or the interval width drops
    below ``x_tol``; raises :class:`NoConvergence` if ``f_tol`` was requested
    but not reached within ``max_iter`` halvings.
    """
    f_lo = f(lo)
    if f_lo == 0.0:
        return lo
    f_hi = f(hi)
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]")

    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_tol is not None and abs(f_mid) < f_tol:
            return mid
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= x_tol:
            if f_tol is None or abs(f(0.5 * (lo + hi))) < f_tol:
                return 0.5 * (lo + hi)
    if f_tol is None:
        return 0.5 * (lo + hi)
    raise NoConvergence(
        f"bisection did not reach |f| < {f_tol:g} in {max_iter} iterations"
    )


_INV_PHI = 0.6180339887498949  # (sqrt(5) - 1) / 2


def golden_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    iterations: int = 90,
) -> float:
    """Locate the maximum of a unimodal ``f`` on ``[lo, hi]``.

    Classic golden-section search with a fixed iteration count, so the result
    is deterministic for identical inputs.
    """
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
