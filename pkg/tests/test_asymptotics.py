import numpy as np
import pytest
from hypothesis import given, strategies as st

from holomux.asymptotics import (
    BEYOND_APPROXIMATION,
    boundary_approx,
    expansion_coefficients,
    far_limit_snr0_th1,
    psi_taylor,
    snr0_expansion,
    strip_condition,
)
from holomux.errors import DomainError
from holomux.geometry import ScenarioGeometry, psi_closed
from holomux.holographic import aperture_delta
from holomux.multiplexing import threshold_reference
from holomux.regions import boundary_solve

THETAS_DEG = [0, 15, 30, 45, 60]


def test_coefficients_broadside():
    k = expansion_coefficients(0.0)
    assert k.a1 == pytest.approx(-13 / 30)
    assert k.a2 == pytest.approx(-2 / 3)
    assert k.b1 == pytest.approx(-44 / 60)
    assert k.b2 == pytest.approx(703 / 1575)


@pytest.mark.parametrize("x", [1.5, 10.0, 1e4])
def test_first_threshold_constants(x):
    assert snr0_expansion(0.0, x, 3, 1) == pytest.approx(np.pi / 12)
    assert snr0_expansion(0.0, x, 2, 1) == pytest.approx(np.pi / 6)
    assert snr0_expansion(1e-12, x, 2, 1) == pytest.approx(np.pi / 6)


def test_far_limits():
    assert far_limit_snr0_th1(0.5, 3) == pytest.approx(np.pi / 12 * np.cos(0.5) ** 2)
    assert far_limit_snr0_th1(0.0, 2) == pytest.approx(np.pi / 6)
    assert far_limit_snr0_th1(0.1, 2) == np.inf


@pytest.mark.parametrize("x", [1.0, 0.5])
def test_expansion_domain(x):
    with pytest.raises(DomainError):
        snr0_expansion(0.2, x, 3, 2)


@pytest.mark.parametrize("pol", [2, 3])
@pytest.mark.parametrize("which", [1, 2])
@pytest.mark.parametrize("theta_deg", THETAS_DEG)
def test_expansion_error_order(pol, which, theta_deg):
    theta = np.deg2rad(theta_deg)
    xs = np.array([5.0, 10.0, 20.0, 40.0])
    exact = threshold_reference(theta, xs, pol, which)
    gap = np.abs(snr0_expansion(theta, xs, pol, which) / exact - 1)
    assert np.all(gap[:-1] / gap[1:] >= 3.5)


def test_boundary_approx_examples():
    theta = np.deg2rad(30)
    assert boundary_approx(theta, np.pi / 12 * np.cos(theta) ** 2, 3, 1) == np.inf
    assert boundary_approx(theta, 0.1, 3, 1) == BEYOND_APPROXIMATION

    theta = np.deg2rad(20)
    c2, s2, t2 = np.cos(theta) ** 2, np.sin(theta) ** 2, np.tan(theta) ** 2
    direct = np.sqrt((4 * c2 * c2 - 16 * c2 + 10) / (3 * s2) + 4 * 100 / (np.pi * t2))
    assert boundary_approx(theta, 100.0, 2, 1) == pytest.approx(direct, rel=1e-14)

    theta = np.deg2rad(10)
    exact = boundary_solve(theta, 100.0, 3, 2).value
    assert boundary_approx(theta, 100.0, 3, 2) == pytest.approx(exact, rel=0.02)


def test_boundary_approx_broadside_branch():
    assert boundary_approx(0.0, 1.0, 2, 1) == np.inf
    assert boundary_approx(0.0, 0.5, 2, 1) == BEYOND_APPROXIMATION


@pytest.mark.parametrize("args", [(0.1, 0.0, 3, 1), (0.1, 1.0, 3, 3), (0.1, 1.0, 4, 1)])
def test_boundary_approx_errors(args):
    with pytest.raises(DomainError):
        boundary_approx(*args)


@given(st.floats(1.0, 1e4), st.floats(0.05, 1.05), st.sampled_from([2, 3]))
def test_boundary_approx_inverts_expansion(snr0, theta, pol):
    x = boundary_approx(theta, snr0, pol, 2)
    if x == BEYOND_APPROXIMATION or x <= 1.0:
        return
    assert snr0_expansion(theta, x, pol, 2) == pytest.approx(snr0, rel=1e-9)


def test_strip_condition_matches_far_field_threshold():
    snr0, z = 2.0, 1000.0
    for y0 in (0.0, 0.5, 1.0, 1.7, 2.5):
        theta = np.arctan2(y0, z)
        inside = threshold_reference(theta, np.hypot(y0, z), 2, 1) <= snr0
        assert bool(strip_condition(y0, snr0)) == inside


def test_taylor_examples():
    t = psi_taylor(0.0, 0.1)
    assert t["D2psi2"] == pytest.approx(1 - 0.01 / 3)
    tiny = psi_taylor(0.0, 1e-9)
    for key in ("D2psi2", "D4psi4", "D6psi6", "psi2Delta"):
        assert tiny[key] == pytest.approx(1.0)
    assert tiny["D5psi5bar"] == 0.0
    with pytest.raises(DomainError):
        psi_taylor(0.0, 1.0)


def _taylor_residuals(theta, ts):
    D = 1.0 / ts
    geom = ScenarioGeometry(1.0, D, theta)
    p = psi_closed(geom)
    exact = {
        "D2psi2": D ** 2 * p.psi2,
        "D4psi4": D ** 4 * p.psi4,
        "D5psi5bar": D ** 5 * p.psi5bar,
        "D6psi6": D ** 6 * p.psi6,
        "psi2Delta": p.psi2 * aperture_delta(geom),
    }
    approx = psi_taylor(theta, ts)
    return {k: np.abs(exact[k] - approx[k]) for k in exact}


@pytest.mark.parametrize("theta_deg", [0, 20, 45, 70])
def test_taylor_remainder_orders(theta_deg):
    ts = np.array([0.1, 0.05, 0.025])
    res = _taylor_residuals(np.deg2rad(theta_deg), ts)
    for key in ("D2psi2", "D4psi4", "D6psi6", "psi2Delta"):
        assert np.all(res[key][:-1] / res[key][1:] >= 12.0), key
        # Quartering L/D: ~256x for a fourth-order remainder.
        assert res[key][0] / res[key][2] >= 200.0, key
    if theta_deg:
        r = res["D5psi5bar"]
        assert np.all(r[:-1] / r[1:] >= 7.0)
