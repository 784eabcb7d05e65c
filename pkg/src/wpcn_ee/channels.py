"""Random scenario generation: geometry, path loss, and small-scale fading.

Users are dropped uniformly on the line between the power station and
the information receiver, close to the station (the regime where energy
harvesting is worth anything).  The downlink sees Rician fading through
the strong line-of-sight to the nearby station; the uplink over the
long hop is Rayleigh.  Both fading powers are normalized to unit mean
so ref_gain * d^-alpha is the mean path gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Scenario, SystemParams, UserChannel, db_to_linear


@dataclass(frozen=True)
class GeometryConfig:
    """Placement and propagation parameters for random scenarios.

    K            number of users
    d_min_m      closest user distance to the power station, m
    d_max_m      farthest user distance, m
    d_rx_m       station-to-receiver distance, m (users lie inside)
    alpha        path loss exponent
    rician_K_dB  Rician K-factor of the downlink, dB
    ref_gain     path gain at 1 m (linear)
    seed         RNG seed
    """

    K: int
    d_min_m: float = 2.0
    d_max_m: float = 15.0
    d_rx_m: float = 300.0
    alpha: float = 2.8
    rician_K_dB: float = 7.0
    ref_gain: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if not 0.0 < self.d_min_m <= self.d_max_m:
            raise ValueError("need 0 < d_min_m <= d_max_m")
        if self.d_max_m >= self.d_rx_m:
            raise ValueError("users must lie strictly between station and receiver")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.ref_gain <= 0.0:
            raise ValueError("ref_gain must be positive")


def _draw_gains(rng: np.random.Generator, geo: GeometryConfig) -> tuple[np.ndarray, np.ndarray]:
    d = rng.uniform(geo.d_min_m, geo.d_max_m, size=geo.K)

    # Downlink: Rician with K-factor kappa, unit mean power.
    kappa = db_to_linear(geo.rician_K_dB)
    los = math.sqrt(kappa / (kappa + 1.0))
    scatter = math.sqrt(1.0 / (2.0 * (kappa + 1.0)))
    x = rng.standard_normal(geo.K)
    y = rng.standard_normal(geo.K)
    fade_dl = (los + scatter * x) ** 2 + (scatter * y) ** 2

    # Uplink: Rayleigh, unit mean power.
    xu = rng.standard_normal(geo.K)
    yu = rng.standard_normal(geo.K)
    fade_ul = 0.5 * (xu**2 + yu**2)

    h = geo.ref_gain * d ** (-geo.alpha) * fade_dl
    g = geo.ref_gain * (geo.d_rx_m - d) ** (-geo.alpha) * fade_ul
    return h, g


def generate_scenario(geo: GeometryConfig, params: SystemParams, max_attempts: int = 100) -> Scenario:
    """Draw one scenario; deterministic in geo.seed.

    Initial energy is zero for every user; tests and experiments that
    need charged batteries substitute a Q vector afterwards.  Draws
    violating the admissibility bound sum eta*h < 1/xi are rejected and
    redrawn (vanishingly rare at realistic gains), erroring out after
    max_attempts.
    """
    rng = np.random.default_rng(geo.seed)
    denom = params.Gamma * params.sigma2
    for _ in range(max_attempts):
        h, g = _draw_gains(rng, geo)
        if params.eta * float(np.sum(h)) >= 1.0 / params.xi:
            continue
        users = tuple(
            UserChannel(h=float(hi), g=float(gi), Q=0.0, gamma=float(gi) / denom)
            for hi, gi in zip(h, g)
        )
        return Scenario(params=params, users=users)
    raise RuntimeError(
        f"no admissible channel draw in {max_attempts} attempts; "
        "the geometry harvests more than the station radiates"
    )
