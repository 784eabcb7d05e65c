"""Single-user EE: closed analytic case, scan agreement, shape."""

import math

import numpy as np
import pytest

from wpcn_ee import SystemParams, max_user_ee, user_ee_at

from conftest import stock_params


def unit_params():
    # W = varsigma = pc = 1 collapses the stationarity condition to
    # gamma*p = e - 1 at gamma = 1
    return SystemParams(
        W=1.0, sigma2=1.0, Gamma=1.0, eta=0.9, xi=1.0, varsigma=1.0,
        Pc=0.1, pc=1.0, Pmax=10.0, Tmax=1.0,
    )


def test_analytic_point():
    pt = max_user_ee(1.0, unit_params())
    assert pt.p_star == pytest.approx(math.e - 1.0, abs=1e-9)
    assert pt.ee_star == pytest.approx(1.0 / (math.e * math.log(2.0)), abs=1e-9)


def test_value_matches_evaluation():
    par = stock_params()
    for gamma in (0.3, 5.0, 800.0):
        pt = max_user_ee(gamma, par)
        assert pt.ee_star == pytest.approx(user_ee_at(pt.p_star, gamma, par), rel=1e-12)


def test_scan_agreement_small():
    # dense-scan oracle on a handful of draws; the full-size version
    # lives in the acceptance suite
    rng = np.random.default_rng(7)
    for _ in range(25):
        gamma = 10.0 ** rng.uniform(-2, 4)
        par = stock_params(
            W=10.0 ** rng.uniform(2, 6),
            varsigma=rng.uniform(0.3, 1.0),
            pc=10.0 ** rng.uniform(-4, -1),
        )
        pt = max_user_ee(gamma, par)
        p_grid = np.geomspace(pt.p_star / 50, pt.p_star * 50, 20001)
        ee_grid = par.W * np.log2(1.0 + p_grid * gamma) / (p_grid / par.varsigma + par.pc)
        assert pt.ee_star >= ee_grid.max() * (1.0 - 1e-9)


def test_maximum_is_interior():
    par = stock_params()
    pt = max_user_ee(8.0, par)
    eps = 1e-6 * pt.p_star
    assert user_ee_at(pt.p_star + eps, 8.0, par) <= pt.ee_star
    assert user_ee_at(pt.p_star - eps, 8.0, par) <= pt.ee_star


def test_unimodal_shape():
    # increasing to the left of the peak, decreasing to the right
    par = stock_params()
    pt = max_user_ee(2.0, par)
    left = np.geomspace(pt.p_star / 100, pt.p_star, 200)
    right = np.geomspace(pt.p_star, pt.p_star * 100, 200)
    ee_left = [user_ee_at(p, 2.0, par) for p in left]
    ee_right = [user_ee_at(p, 2.0, par) for p in right]
    assert all(b >= a - 1e-12 for a, b in zip(ee_left, ee_left[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(ee_right, ee_right[1:]))


def test_scaling_in_gamma():
    # stronger uplink channel never hurts the achievable user EE
    par = stock_params()
    values = [max_user_ee(g, par).ee_star for g in (0.1, 1.0, 10.0, 100.0)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_edge_cases():
    par = stock_params()
    assert user_ee_at(0.0, 5.0, par) == 0.0
    with pytest.raises(ValueError):
        user_ee_at(-1.0, 5.0, par)
    with pytest.raises(ValueError):
        user_ee_at(1.0, 0.0, par)
    with pytest.raises(ValueError):
        max_user_ee(-2.0, par)
