"""Small scalar search utilities shared by the solvers."""

from __future__ import annotations

import math
from typing import Callable

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float
) -> tuple[float, float, int]:
    """Maximize a unimodal f on [lo, hi] by golden-section search.

    Returns (x_best, f(x_best), evaluations).  tol is absolute on x.
    The endpoints are always among the candidates, so a maximum at the
    boundary is found exactly.
    """
    if hi < lo:
        raise ValueError("empty interval")
    a, b = lo, hi
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x), 1
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc = f(c)
    fd = f(d)
    n = 2
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = f(d)
        n += 1
    # Compare interior best with the original endpoints: boundary optima
    # (e.g. tau0 = 0) must not be lost to the shrinking bracket.
    cands = [(c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))]
    n += 2
    x, fx = max(cands, key=lambda t: t[1])
    return x, fx, n


def newton_bisect(
    f: Callable[[float], float],
    fprime: Callable[[float], float],
    lo: float,
    hi: float,
    x0: float,
    rtol: float = 1e-14,
    max_iter: int = 100,
) -> float:
    """Root of f on a bracket [lo, hi] with f(lo), f(hi) of opposite sign.

    Newton steps from x0, falling back to bisection whenever a step
    leaves the bracket or fails to shrink it.  f must be monotone
    enough that the bracket stays valid (callers guarantee strict
    monotonicity).  Tolerance is relative on x.
    """
    a, b = lo, hi
    fa = f(a)
    if fa == 0.0:
        return a
    x = min(max(x0, a), b)
    for _ in range(max_iter):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0.0) == (fa > 0.0):
            a, fa = x, fx
        else:
            b = x
        if b - a <= rtol * max(abs(a), abs(b), 1e-300):
            return 0.5 * (a + b)
        d = fprime(x)
        step_ok = d != 0.0
        if step_ok:
            xn = x - fx / d
            step_ok = a < xn < b
        x = xn if step_ok else 0.5 * (a + b)
    return 0.5 * (a + b)
