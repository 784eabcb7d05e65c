"""Walk through the single-user energy-efficiency building block.

One uplink user transmitting at power p with SNR slope gamma has
rate W*log2(1 + p*gamma) and drains p/varsigma + pc from its budget.
The ratio of the two is strictly quasiconcave in p, so it has a
unique peak; everything else in the library leans on that peak.
"""

import dataclasses
import math

import numpy as np

from wpcn_ee import default_system_params, max_user_ee, user_ee_at

par = default_system_params()
gamma = 2.0e4  # strong uplink: ~43 dB received SNR at 1 W

# sample the curve around the peak
point = max_user_ee(gamma, par)
print(f"gamma = {gamma:.3g}, p_star = {point.p_star:.6g} W, "
      f"ee_star = {point.ee_star:.6g} bits/J")
print()
print(f"{'p [W]':>12}  {'ee(p) [bits/J]':>16}")
for scale in (0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0):
    p = scale * point.p_star
    print(f"{p:>12.5g}  {user_ee_at(p, gamma, par):>16.6g}")

# the peak satisfies (1+t)ln(1+t) - t = gamma*varsigma*pc at t = p*gamma
t = point.p_star * gamma
resid = (1.0 + t) * math.log1p(t) - t - gamma * par.varsigma * par.pc
print(f"\nstationarity residual: {resid:.3e} (scale {t:.3g})")

# unit-parameter sanity point: p_star = e - 1, ee_star = 1/(e ln 2)
unit = dataclasses.replace(par, W=1.0, varsigma=1.0, pc=1.0)
up = max_user_ee(1.0, unit)
print(f"unit case: p_star - (e-1) = {up.p_star - (math.e - 1.0):+.2e}, "
      f"ee_star - 1/(e ln2) = {up.ee_star - 1.0 / (math.e * math.log(2.0)):+.2e}")

# the peak moves with the channel: better gamma, higher peak at lower power
print(f"\n{'gamma':>10}  {'p_star [W]':>12}  {'ee_star [bits/J]':>18}")
for g in np.geomspace(1e2, 1e6, 5):
    pt = max_user_ee(float(g), par)
    print(f"{g:>10.3g}  {pt.p_star:>12.5g}  {pt.ee_star:>18.6g}")
