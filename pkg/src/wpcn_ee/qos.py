"""Rate-floor EE maximization: Dinkelbach iterations over a KKT inner solver.

The fractional objective (bits per joule, subject to a block throughput
floor Rmin) is reduced to the parametric form T(q) = max{B - q*E}: the
outer loop updates q to B/E of the inner maximizer and stops when T
vanishes.  The inner problem is concave; its KKT system collapses to a
small number of scalar roots:

  * per scheduled user, a multiplier s = q + mu_k solving a strictly
    decreasing stationarity function F(s) = delta, which fixes the
    uplink power p_k and the energy-tight slot length;
  * a scheduling score per user, F evaluated at s = q: positive score
    means the user transmits, the common threshold in SNR space is
    where the score crosses delta;
  * a time multiplier delta >= 0 driven by the block-length constraint;
  * a WET gate f0 whose sign decides whether the charging slot is on;
  * a throughput multiplier vartheta >= 0 driven by the floor.

The inner maximizer is assembled from whichever regime the gates pick:
batteries only (delta = 0, no charging), charging with the block fully
used, or no charging with the block fully used.  B as a function of
vartheta is discontinuous exactly where a gate flips; at such a root
the optimal face has a free coordinate (the charging time, or a
threshold user's slot) and the solver fills it linearly to land on the
floor exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.optimize import brentq

from .model import (
    LN2,
    MODE_INFEASIBLE,
    MODE_QOS,
    Allocation,
    Scenario,
    SolutionReport,
    SystemParams,
    energy_total,
    scheduled_set,
    throughput,
    zero_allocation,
)
from .search import newton_bisect

_REL_B = 1e-12  # slack applied to the throughput floor in comparisons
_FILL_TOL = 1e-9  # relative B residual beyond which a boundary fill engages
_THETA_CAP = 2.0**60
_DELTA_CAP = 2.0**60


@dataclass(frozen=True)
class DualState:
    """Multipliers of the inner problem at one (q, vartheta) solve."""

    q: float
    vartheta: float
    delta: float
    mu: tuple[float, ...]


def _stationarity(s: float, gamma: float, cln: float, W1: float, vs: float, pc: float) -> float:
    # F(s) on the p > 0 branch; strictly decreasing in s on (0, cln*gamma).
    return W1 * math.log2(gamma * cln / s) - (cln - s / gamma) / vs - s * pc


def _stationarity_prime(s: float, gamma: float, cln: float, W1: float, vs: float, pc: float) -> float:
    return -W1 / (s * LN2) + 1.0 / (gamma * vs) - pc


def kkt_threshold_x(q: float, vartheta: float, delta: float, params: SystemParams) -> float:
    """Scheduling threshold in SNR-coefficient space.

    The unique gamma at which the scheduling score crosses delta; users
    above it transmit.  Defined for q > 0 (at q = 0 every user's score
    is +inf and no finite threshold exists).
    """
    if q <= 0.0:
        raise ValueError("threshold needs q > 0")
    W1 = params.W * (1.0 + vartheta)
    cln = W1 * params.varsigma / LN2
    vs = params.varsigma
    pc = params.pc

    def score(gamma: float) -> float:
        if gamma * cln <= q:
            return -q * pc - delta
        return _stationarity(q, gamma, cln, W1, vs, pc) - delta

    lo = q / cln  # branch boundary: score = -q*pc - delta < 0
    hi = 2.0 * lo
    for _ in range(1100):
        if score(hi) > 0.0:
            break
        hi *= 2.0
    else:  # pragma: no cover - score grows without bound in gamma
        raise RuntimeError("failed to bracket the scheduling threshold")
    return float(brentq(score, lo, hi, rtol=1e-15, maxiter=200))


def multiplier_mu(gamma_k: float, q: float, vartheta: float, delta: float, params: SystemParams) -> float:
    """Energy multiplier of a scheduled user with tight energy."""
    W1 = params.W * (1.0 + vartheta)
    cln = W1 * params.varsigma / LN2
    s = _s_root(gamma_k, q, delta, cln, W1, params.varsigma, params.pc, warm=0.0)
    if s is None:
        raise ValueError("user is outside the energy-tight region (score <= delta)")
    return s - q


def power_from_duals(gamma_k: float, mu_k: float, q: float, vartheta: float, params: SystemParams) -> float:
    """Uplink power from the dual variables, clamped at zero."""
    s = q + mu_k
    if s <= 0.0:
        raise ValueError("q + mu must be positive")
    p = params.W * (1.0 + vartheta) * params.varsigma / (s * LN2) - 1.0 / gamma_k
    return max(0.0, p)


def f0_wet_gate(mu: Sequence[float], q: float, delta: float, scen: Scenario) -> float:
    """Marginal value of charging time; its sign gates the WET slot.

    Each second of charging hands user k a budget worth mu_k per joule
    times eta*Pmax*h_k joules, and costs q times the net station drain
    plus delta of block time.
    """
    par = scen.params
    if len(mu) != scen.K:
        raise ValueError("mu must have one entry per user")
    gain = par.eta * par.Pmax * math.fsum(m * u.h for m, u in zip(mu, scen.users))
    return gain - q * (par.Pmax * scen.wet_deficit + par.Pc) - delta


def _s_root(
    gamma: float,
    q: float,
    delta: float,
    cln: float,
    W1: float,
    vs: float,
    pc: float,
    warm: float,
) -> float | None:
    """Unique s in (q, cln*gamma) with F(s) = delta, or None if the user's
    score is at or below delta (no tight-energy solution)."""
    hi = gamma * cln
    if q > 0.0:
        if hi <= q:
            return None
        lo = q
        if _stationarity(lo, gamma, cln, W1, vs, pc) <= delta:
            return None
    else:
        lo = hi * 1e-20
        for _ in range(60):
            if _stationarity(lo, gamma, cln, W1, vs, pc) > delta:
                break
            lo *= 1e-6
        else:  # pragma: no cover - F blows up as s -> 0+
            raise RuntimeError("failed to bracket the stationarity root")

    x0 = warm if lo < warm < hi else math.sqrt(lo * hi)
    return newton_bisect(
        lambda s: _stationarity(s, gamma, cln, W1, vs, pc) - delta,
        lambda s: _stationarity_prime(s, gamma, cln, W1, vs, pc),
        lo,
        hi,
        x0,
        rtol=1e-14,
    )


@dataclass
class _Point:
    """One assembled inner maximizer with its duals and diagnostics."""

    alloc: Allocation
    B: float
    E: float
    delta: float
    mu: tuple[float, ...]
    tight: tuple[int, ...]  # users pinned to exact energy exhaustion
    free: tuple[int, ...]  # threshold users with mu = 0 and a filled slot
    f0: float  # WET gate value at this point's duals


class _Level:
    """KKT solve at fixed (q, vartheta): picks delta and assembles the point."""

    def __init__(self, scen: Scenario, q: float, vartheta: float):
        par = scen.params
        self.scen = scen
        self.par = par
        self.q = q
        self.vartheta = vartheta
        self.W = par.W
        self.W1 = par.W * (1.0 + vartheta)
        self.cln = self.W1 * par.varsigma / LN2
        self.vs = par.varsigma
        self.pc = par.pc
        self.K = scen.K
        self.gammas = [u.gamma for u in scen.users]
        self.h = [u.h for u in scen.users]
        self.Q = [u.Q for u in scen.users]
        self.harvest = [par.eta * par.Pmax * u.h for u in scen.users]
        self.wet_cost = par.Pmax * scen.wet_deficit + par.Pc
        self.heads = [self._head(g) for g in self.gammas]
        self._warm = [0.0] * scen.K
        # root memo keyed on (user, delta): repeat evaluations at one
        # delta must agree bit for bit or boundary sign tests can flip
        self._s_memo: dict[tuple[int, float], float] = {}

    def _head(self, gamma: float) -> float:
        if self.q <= 0.0:
            return math.inf
        if gamma * self.cln <= self.q:
            return -self.q * self.pc
        return _stationarity(self.q, gamma, self.cln, self.W1, self.vs, self.pc)

    def s_of(self, k: int, delta: float) -> float:
        key = (k, delta)
        cached = self._s_memo.get(key)
        if cached is not None:
            return cached
        s = _s_root(
            self.gammas[k], self.q, delta, self.cln, self.W1, self.vs, self.pc, self._warm[k]
        )
        if s is None:  # pragma: no cover - callers pre-filter by head > delta
            raise RuntimeError("stationarity root requested outside the tight region")
        self._warm[k] = s
        self._s_memo[key] = s
        return s

    def p_of_s(self, k: int, s: float) -> float:
        return self.cln / s - 1.0 / self.gammas[k]

    def D_of_s(self, k: int, s: float) -> float:
        return self.p_of_s(k, s) / self.vs + self.pc

    def rate_of_s(self, k: int, s: float) -> float:
        return self.W * math.log2(self.gammas[k] * self.cln / s)

    def _tight_at(self, delta: float) -> list[int]:
        return [k for k in range(self.K) if self.heads[k] > delta]

    def _duals_at(self, delta: float, tight: list[int]) -> dict[int, float]:
        return {k: self.s_of(k, delta) for k in tight}

    def _f0_at(self, delta: float) -> float:
        tight = self._tight_at(delta)
        s = self._duals_at(delta, tight)
        gain = math.fsum((s[k] - self.q) * self.harvest[k] for k in tight)
        return gain - self.q * self.wet_cost - delta

    def _base_at(self, delta: float) -> float:
        tight = self._tight_at(delta)
        s = self._duals_at(delta, tight)
        return math.fsum(self.Q[k] / self.D_of_s(k, s[k]) for k in tight)

    def point(self) -> _Point:
        """Pick the delta regime and assemble the inner maximizer."""
        Tmax = self.par.Tmax
        tight0 = self._tight_at(0.0)
        if not tight0:
            # Nobody worth scheduling at this q: the zero allocation.
            return _Point(
                alloc=zero_allocation(self.K),
                B=0.0,
                E=0.0,
                delta=0.0,
                mu=(0.0,) * self.K,
                tight=(),
                free=(),
                f0=-self.q * self.wet_cost,
            )

        s0 = self._duals_at(0.0, tight0)
        base0 = math.fsum(self.Q[k] / self.D_of_s(k, s0[k]) for k in tight0)
        f00 = math.fsum((s0[k] - self.q) * self.harvest[k] for k in tight0) - self.q * self.wet_cost

        if f00 <= 0.0 and base0 <= Tmax:
            # Batteries alone, time to spare: delta = 0, no charging.
            tau = {k: self.Q[k] / self.D_of_s(k, s0[k]) for k in tight0}
            return self._assemble(0.0, 0.0, tight0, s0, tau, free={})

        if f00 > 0.0:
            # Charging pays at delta = 0: find where its gate closes.
            hi = 1.0
            for _ in range(120):
                if self._f0_at(hi) <= 0.0:
                    break
                hi *= 2.0
                if hi > _DELTA_CAP:
                    raise RuntimeError("delta bracket overflow in the WET gate solve")
            delta_w = float(brentq(self._f0_at, 0.0, hi, rtol=1e-15, maxiter=200))
            tight_w = self._tight_at(delta_w)
            s_w = self._duals_at(delta_w, tight_w)
            D_w = {k: self.D_of_s(k, s_w[k]) for k in tight_w}
            base_w = math.fsum(self.Q[k] / D_w[k] for k in tight_w)
            if base_w <= Tmax:
                # Charging on; block exactly filled by the tau0 scale.
                slope = 1.0 + math.fsum(self.harvest[k] / D_w[k] for k in tight_w)
                tau0 = (Tmax - base_w) / slope
                tau = {k: (self.harvest[k] * tau0 + self.Q[k]) / D_w[k] for k in tight_w}
                return self._assemble(delta_w, tau0, tight_w, s_w, tau, free={})
            delta_lo = delta_w
        else:
            delta_lo = 0.0

        return self._solve_time_bound(delta_lo, Tmax)

    def _solve_time_bound(self, delta_lo: float, Tmax: float) -> _Point:
        """No charging; raise delta until battery drains fit the block.

        The fit function base(delta) decreases continuously except at
        score values of battery-holding users, where it drops: if the
        target lands in such a gap, that user sits exactly at the
        threshold and its slot length is the free coordinate.
        """
        jumps = sorted(
            {
                self.heads[k]
                for k in range(self.K)
                if self.Q[k] > 0.0 and delta_lo < self.heads[k] < math.inf
            }
        )

        def crossing_inside(lo: float, hi: float) -> _Point | None:
            d_star = float(
                brentq(lambda d: self._base_at(d) - Tmax, lo, hi, rtol=1e-15, maxiter=200)
            )
            tight = self._tight_at(d_star)
            s = self._duals_at(d_star, tight)
            tau = {k: self.Q[k] / self.D_of_s(k, s[k]) for k in tight}
            return self._assemble(d_star, 0.0, tight, s, tau, free={})

        cur = delta_lo
        for j in jumps:
            tight_r = self._tight_at(j)
            s_r = self._duals_at(j, tight_r)
            base_r = math.fsum(self.Q[k] / self.D_of_s(k, s_r[k]) for k in tight_r)
            droppers = [
                m for m in range(self.K) if self.heads[m] == j and self.Q[m] > 0.0
            ]
            drop_cap = {m: self.Q[m] / self.D_of_s(m, self.q) for m in droppers}
            base_l = base_r + math.fsum(drop_cap.values())
            if base_l <= Tmax:
                return crossing_inside(cur, j)
            if base_r <= Tmax:
                # Land in the gap: threshold users fill the remaining time.
                remaining = Tmax - base_r
                tau = {k: self.Q[k] / self.D_of_s(k, s_r[k]) for k in tight_r}
                free = {}
                for m in droppers:
                    take = min(drop_cap[m], remaining)
                    if take > 0.0:
                        free[m] = take
                        remaining -= take
                return self._assemble(j, 0.0, tight_r, s_r, tau, free=free)
            cur = j

        hi = max(cur, 1.0)
        for _ in range(120):
            hi *= 2.0
            if self._base_at(hi) <= Tmax:
                break
            if hi > _DELTA_CAP:
                raise RuntimeError("delta bracket overflow in the time solve")
        return crossing_inside(cur, hi)

    def _assemble(
        self,
        delta: float,
        tau0: float,
        tight: list[int],
        s: dict[int, float],
        tau: dict[int, float],
        free: dict[int, float],
    ) -> _Point:
        p_vec = [0.0] * self.K
        tau_vec = [0.0] * self.K
        mu_vec = [0.0] * self.K
        for k in tight:
            tau_vec[k] = tau[k]
            mu_vec[k] = s[k] - self.q
            if tau[k] > 0.0:
                p_vec[k] = max(0.0, self.p_of_s(k, s[k]))
        for m, t in free.items():
            tau_vec[m] = t
            if t > 0.0:
                p_vec[m] = max(0.0, self.p_of_s(m, self.q))
        alloc = Allocation(
            P0=self.par.Pmax, tau0=tau0, p=tuple(p_vec), tau=tuple(tau_vec)
        )
        B = throughput(alloc, self.scen)
        E = energy_total(alloc, self.scen)
        f0 = (
            math.fsum(mu_vec[k] * self.harvest[k] for k in tight)
            - self.q * self.wet_cost
            - delta
        )
        return _Point(
            alloc=alloc,
            B=B,
            E=E,
            delta=delta,
            mu=tuple(mu_vec),
            tight=tuple(tight),
            free=tuple(free.keys()),
            f0=f0,
        )


def _fill_to_floor(lvl: _Level, lo_pt: _Point, hi_pt: _Point, rmin: float) -> _Point:
    """Construct the floor-exact point on the optimal face at a gate flip.

    lo_pt falls short of the floor, hi_pt overshoots; their structures
    differ in exactly the flipped gate(s): entering threshold users
    and/or an activating charging slot.  Both kinds leave a coordinate
    with zero reduced cost, along which B is linear.
    """
    par = lvl.par
    Tmax = par.Tmax
    delta = lo_pt.delta
    tight = list(lo_pt.tight)
    hi_members = set(hi_pt.tight) | set(hi_pt.free)
    entering = [m for m in sorted(hi_members) if m not in tight]
    tau0_frees = hi_pt.alloc.tau0 > 0.0 and lo_pt.alloc.tau0 == 0.0

    s = {k: lvl.s_of(k, delta) for k in tight}
    D = {k: lvl.D_of_s(k, s[k]) for k in tight}
    rate = {k: lvl.rate_of_s(k, s[k]) for k in tight}
    base_T = math.fsum(lvl.Q[k] / D[k] for k in tight)
    slope_T = 1.0 + math.fsum(lvl.harvest[k] / D[k] for k in tight)
    B0 = math.fsum(rate[k] * lvl.Q[k] / D[k] for k in tight)
    Bslope = math.fsum(rate[k] * lvl.harvest[k] / D[k] for k in tight)

    ent_p = {m: lvl.p_of_s(m, lvl.q) for m in entering}
    ent_D = {m: ent_p[m] / lvl.vs + lvl.pc for m in entering}
    ent_rate = {m: lvl.rate_of_s(m, lvl.q) for m in entering}

    fills: dict[int, float] = {}

    if delta > 0.0:
        # Block stays exactly full: tau0 trades against the entering slots.
        tau0_of = lambda used: (Tmax - base_T - used) / slope_T
        used = 0.0
        B_cur = B0 + Bslope * tau0_of(0.0)
        for m in entering:
            coef = ent_rate[m] - Bslope / slope_T
            if coef <= 0.0:
                continue
            want = (rmin - B_cur) / coef
            # Energy cap grows the slot only as far as its own budget allows.
            cap_num = lvl.harvest[m] * tau0_of(used) + lvl.Q[m]
            cap = cap_num / (ent_D[m] + lvl.harvest[m] / slope_T)
            take = min(max(want, 0.0), cap, Tmax - base_T - used)
            fills[m] = take
            used += take
            B_cur += coef * take
            if B_cur >= rmin * (1.0 - _REL_B):
                break
        tau0 = max(0.0, tau0_of(used))
        tau = {k: (lvl.harvest[k] * tau0 + lvl.Q[k]) / D[k] for k in tight}
        return lvl._assemble(delta, tau0, tight, s, tau, free=fills)

    # delta = 0: time is not exchanged; entering slots first, then charging.
    tau = {k: lvl.Q[k] / D[k] for k in tight}
    time_used = math.fsum(tau.values())
    B_cur = B0
    for m in entering:
        cap = lvl.Q[m] / ent_D[m]
        want = (rmin - B_cur) / ent_rate[m] if ent_rate[m] > 0.0 else 0.0
        take = min(max(want, 0.0), cap, Tmax - time_used)
        fills[m] = take
        time_used += take
        B_cur += ent_rate[m] * take
        if B_cur >= rmin * (1.0 - _REL_B):
            break
    tau0 = 0.0
    if B_cur < rmin * (1.0 - _REL_B) and tau0_frees and Bslope > 0.0:
        tau0_want = (rmin - B_cur) / Bslope
        tau0_time = (Tmax - math.fsum(fills.values()) - base_T) / slope_T
        tau0 = min(max(tau0_want, 0.0), max(tau0_time, 0.0))
        tau = {k: (lvl.harvest[k] * tau0 + lvl.Q[k]) / D[k] for k in tight}
    return lvl._assemble(0.0, tau0, tight, s, tau, free=fills)


def _solve_q(
    scen: Scenario, q: float, rmin: float | None
) -> tuple[_Point, float, int]:
    """Inner maximizer at fixed q: returns (point, vartheta, fill count).

    B as a function of the floor multiplier is nondecreasing (it is a
    subgradient selection of a convex dual function), so a bisection
    invariant B(lo) < Rmin <= B(hi) is safe even across jumps.
    """
    lvl0 = _Level(scen, q, 0.0)
    p0 = lvl0.point()
    if rmin is None or p0.B >= rmin * (1.0 - _REL_B):
        return p0, 0.0, 0

    lo_t, lo_pt = 0.0, p0
    hi_t = 1.0
    hi_pt = _Level(scen, q, hi_t).point()
    while hi_pt.B < rmin * (1.0 - _REL_B):
        lo_t, lo_pt = hi_t, hi_pt
        hi_t *= 2.0
        if hi_t > _THETA_CAP:
            raise RuntimeError(
                "throughput multiplier bracket overflow; duals "
                f"q={q!r} delta={hi_pt.delta!r} mu={hi_pt.mu!r}"
            )
        hi_pt = _Level(scen, q, hi_t).point()

    cache: dict[float, _Point] = {lo_t: lo_pt, hi_t: hi_pt}

    def miss(t: float) -> float:
        pt = cache.get(t)
        if pt is None:
            pt = _Level(scen, q, t).point()
            cache[t] = pt
        return pt.B - rmin

    t_hat = float(brentq(miss, lo_t, hi_t, rtol=1e-15, maxiter=300))
    miss(t_hat)
    pt_hat = cache[t_hat]

    if abs(pt_hat.B - rmin) <= _FILL_TOL * max(rmin, 1.0):
        return pt_hat, t_hat, 0

    # Discontinuity at the root: B jumps over the floor where a KKT
    # gate flips.  Recover the tightest evaluated pair on either side
    # of the floor, then bisect it down to float adjacency.
    below = max(t for t, pt in cache.items() if pt.B < rmin * (1.0 - _REL_B))
    above = min(
        t for t, pt in cache.items() if pt.B >= rmin * (1.0 - _REL_B) and t >= below
    )
    for _ in range(200):
        mid = 0.5 * (below + above)
        if not below < mid < above:
            break
        if miss(mid) < -rmin * _REL_B:
            below = mid
        else:
            above = mid
    lo_br, hi_br = cache[below], cache[above]
    lvl = _Level(scen, q, above)
    filled = _fill_to_floor(lvl, lo_br, hi_br, rmin)
    return filled, above, 1


def _floor_reachable(scen: Scenario, rmin: float) -> bool:
    """The q = 0 inner maximum is the rate ceiling, so it decides
    feasibility without invoking the full throughput solver."""
    pt, _, _ = _solve_q(scen, 0.0, None)
    return pt.B >= rmin * (1.0 - _REL_B)


def dinkelbach_T(q: float, scen: Scenario) -> tuple[float, Allocation]:
    """Value and maximizer of the subtractive inner problem at this q."""
    if q < 0.0:
        raise ValueError("q must be nonnegative")
    rmin = scen.params.Rmin
    if rmin is not None and not _floor_reachable(scen, rmin):
        raise ValueError("scenario cannot meet the throughput floor")
    pt, _, _ = _solve_q(scen, q, rmin)
    return pt.B - q * pt.E, pt.alloc


def solve_qos_detailed(
    scen: Scenario, eps: float = 1e-8, max_outer: int = 30
) -> tuple[SolutionReport, DualState, list[tuple[int, float, float]]]:
    """Full solve returning the report, converged duals, and the
    per-iteration (iteration, q, T) trace."""
    rmin = scen.params.Rmin
    if rmin is None:
        raise ValueError("solve_qos needs Rmin; use solve_best_effort without a floor")
    if not _floor_reachable(scen, rmin):
        report = SolutionReport(
            alloc=zero_allocation(scen.K),
            ee=0.0,
            throughput=0.0,
            energy=0.0,
            scheduled=(),
            mode=MODE_INFEASIBLE,
            iterations={"outer": 0},
        )
        return report, DualState(q=0.0, vartheta=0.0, delta=0.0, mu=(0.0,) * scen.K), []

    q = 0.0
    trace: list[tuple[int, float, float]] = []
    fills_total = 0
    pt, theta = None, 0.0
    prev: tuple[_Point, float] | None = None
    for it in range(1, max_outer + 1):
        pt, theta, fills = _solve_q(scen, q, rmin)
        fills_total += fills
        T = pt.B - q * pt.E
        trace.append((it, q, T))
        if abs(T) < eps or pt.E <= 0.0:
            break
        prev = (pt, theta)
        q = pt.B / pt.E

    assert pt is not None
    if pt.E <= 0.0 and prev is not None:
        # At the fixed point a zero floor admits the empty allocation with
        # T exactly 0; the previous iterate is the supporting maximizer and
        # its ratio equals the converged q.
        pt, theta = prev
    ee = pt.B / pt.E if pt.E > 0.0 else 0.0
    report = SolutionReport(
        alloc=pt.alloc,
        ee=ee,
        throughput=pt.B,
        energy=pt.E,
        scheduled=scheduled_set(pt.alloc),
        mode=MODE_QOS,
        iterations={"outer": len(trace), "fills": fills_total},
    )
    duals = DualState(q=q, vartheta=theta, delta=pt.delta, mu=pt.mu)
    return report, duals, trace


def solve_qos(scen: Scenario, eps: float = 1e-8, max_outer: int = 30) -> SolutionReport:
    """EE-optimal allocation subject to the block throughput floor."""
    report, _, _ = solve_qos_detailed(scen, eps=eps, max_outer=max_outer)
    return report
