"""Single-user energy efficiency: rate per joule as a function of transmit power.

For a user with SNR coefficient gamma, transmitting at power p costs
p/varsigma + pc watts (amplifier plus circuitry) and yields
W*log2(1 + p*gamma) bits/s, so

    ee(p) = W * log2(1 + p*gamma) / (p/varsigma + pc).

ee is strictly quasiconcave on p >= 0 with ee(0) = 0, a unique interior
maximizer p_star, and decay to zero as p grows.  The maximizer is found
by bisection on the sign of the stationarity expression, which starts
positive at p = 0 and is strictly decreasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import SystemParams


@dataclass(frozen=True)
class UserEEPoint:
    """The per-user optimum: argmax power and the efficiency there."""

    p_star: float
    ee_star: float


def user_ee_at(p: float, gamma: float, params: SystemParams) -> float:
    """Energy efficiency in bits/J at transmit power p >= 0."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if p < 0.0:
        raise ValueError("p must be nonnegative")
    rate = params.W * math.log2(1.0 + p * gamma)
    return rate / (p / params.varsigma + params.pc)


def _stationarity(p: float, gamma: float, vs: float, pc: float) -> float:
    # Proportional to d(ee)/dp: positive left of p_star, negative right of it.
    s = 1.0 + p * gamma
    return gamma * (p / vs + pc) / s - math.log(s) / vs


def max_user_ee(gamma: float, params: SystemParams, p_tol: float = 1e-12, max_iter: int = 200) -> UserEEPoint:
    """Locate the unique maximizer of ee by bisection on its derivative sign.

    The bracket upper end doubles from 1 W until the derivative goes
    negative; the sign function is strictly decreasing so the root is
    unique.  p_tol is absolute in watts.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    vs = params.varsigma
    pc = params.pc

    hi = 1.0
    for _ in range(1100):
        if _stationarity(hi, gamma, vs, pc) < 0.0:
            break
        hi *= 2.0
    else:  # pragma: no cover - the sign function always goes negative
        raise RuntimeError("failed to bracket the per-user EE maximizer")

    lo = 0.0
    for _ in range(max_iter):
        if hi - lo <= p_tol:
            break
        mid = 0.5 * (lo + hi)
        if _stationarity(mid, gamma, vs, pc) > 0.0:
            lo = mid
        else:
            hi = mid
    p_star = 0.5 * (lo + hi)
    return UserEEPoint(p_star=p_star, ee_star=user_ee_at(p_star, gamma, params))
