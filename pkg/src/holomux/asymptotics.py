"""Large ``D/L`` expansions of the activation thresholds and their inversions.

All functions take the elevation in radians and ratios in units of ``L``.
The expansions are only meaningful for ``D/L > 1``; smaller ratios are
refused rather than extrapolated.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .finite_channel import PolarizationConfig

__all__ = [
    "BROADSIDE_EPS",
    "ExpansionCoefficients",
    "expansion_coefficients",
    "snr0_expansion",
    "boundary_approx",
    "BEYOND_APPROXIMATION",
    "strip_condition",
    "psi_taylor",
    "far_limit_snr0_th1",
]

# |theta| below this is treated as broadside in the two-polarization
# first-threshold expansion, whose tan^2 term degenerates there.
BROADSIDE_EPS = 1e-9

BEYOND_APPROXIMATION = "beyond-approximation"


@dataclass(frozen=True)
class ExpansionCoefficients:
    a1: float
    a2: float
    b1: float
    b2: float


def expansion_coefficients(theta):
    c2 = np.cos(theta) ** 2
    return ExpansionCoefficients(
        a1=(3.0 - 58.0 / 15.0 * c2) / 2.0,
        a2=2.0 * (1.0 - 4.0 / 3.0 * c2),
        b1=(5.0 * c2 ** 2 - 177.0 * c2 + 128.0) / 60.0,
        b2=(-350.0 * c2 ** 3 + 10242.0 * c2 ** 2 - 19311.0 * c2 + 10122.0) / 1575.0,
    )


def _check(pol, which):
    pol = PolarizationConfig.coerce(pol)
    if which not in (1, 2):
        raise DomainError("which must be 1 or 2")
    return pol.t_pol


def far_limit_snr0_th1(theta, pol):
    """Limit of the first reference threshold as ``D/L -> inf``.

    ``(pi/12) cos^2(theta)`` with three polarizations; with two it is
    ``pi/6`` on broadside and unbounded elsewhere.
    """
    t_pol = _check(pol, 1)
    theta = np.asarray(theta, dtype=float)
    if t_pol == 3:
        return np.pi / 12.0 * np.cos(theta) ** 2
    return np.where(np.abs(theta) < BROADSIDE_EPS, np.pi / 6.0, np.inf)


def _broadside_2x3_th1():
    return np.pi / 6.0


def snr0_expansion(theta, d_over_l, pol=3, which=1):
    """Leading-order large-``D/L`` form of the reference threshold."""
    t_pol = _check(pol, which)
    x = np.asarray(d_over_l, dtype=float)
    if np.any(x <= 1.0):
        raise DomainError("expansions are only valid for D/L > 1")
    theta = np.asarray(theta, dtype=float)
    c2 = np.cos(theta) ** 2
    k = expansion_coefficients(theta)
    x2 = x * x
    if t_pol == 3 and which == 1:
        out = np.pi / 12.0 * c2 * np.ones_like(x2)
    elif t_pol == 3:
        out = 1.5 * np.pi / c2 * (x2 * x2 - 2.0 * k.a1 * x2 + k.a2)
    elif which == 1:
        tail = (4.0 * c2 * c2 - 16.0 * c2 + 10.0) / (3.0 * c2)
        out = np.pi / 4.0 * (x2 * np.tan(theta) ** 2 - tail)
        out = np.where(np.abs(theta) < BROADSIDE_EPS, _broadside_2x3_th1(), out)
    else:
        out = 1.5 * np.pi / (c2 * c2) * (x2 * x2 - 2.0 * k.b1 * x2 + k.b2)
    return out if out.ndim else float(out)


def boundary_approx(theta, snr0, pol=3, which=1):
    """Approximate boundary ``D/L`` from inverting :func:`snr0_expansion`.

    Returns ``inf`` where the stream count is available at every distance.
    For three polarizations and ``which=1`` below the far-field limit, no
    closed-form boundary exists and :data:`BEYOND_APPROXIMATION` is returned;
    use :func:`holomux.regions.boundary_solve` there. Scalar inputs only.
    """
    t_pol = _check(pol, which)
    theta = float(theta)
    snr0 = float(snr0)
    if not snr0 > 0:
        raise DomainError("reference SNR must be positive")
    c2 = np.cos(theta) ** 2
    k = expansion_coefficients(theta)
    if t_pol == 3 and which == 1:
        if snr0 >= np.pi / 12.0 * c2:
            return np.inf
        return BEYOND_APPROXIMATION
    if which == 2:
        a1, a2, norm = (k.a1, k.a2, 2.0 * c2 / (3.0 * np.pi)) if t_pol == 3 \
            else (k.b1, k.b2, 2.0 * c2 * c2 / (3.0 * np.pi))
        inner = a1 * a1 - a2 + norm * snr0
        if inner < 0 or a1 + np.sqrt(inner) < 0:
            return BEYOND_APPROXIMATION
        return float(np.sqrt(a1 + np.sqrt(inner)))
    # Two polarizations, first threshold.
    if abs(theta) < BROADSIDE_EPS:
        return np.inf if snr0 >= _broadside_2x3_th1() else BEYOND_APPROXIMATION
    s2 = np.sin(theta) ** 2
    val = (4.0 * c2 * c2 - 16.0 * c2 + 10.0) / (3.0 * s2) + 4.0 * snr0 / (np.pi * np.tan(theta) ** 2)
    if val < 0:
        return BEYOND_APPROXIMATION
    return float(np.sqrt(val))


def strip_condition(y0_over_l, snr0):
    """Far-field two-stream condition for two polarizations.

    True where ``|y0|^2 < 4 snr0 / pi - 2/3`` with ``y0`` the lateral offset
    in units of ``L``.
    """
    y0 = np.asarray(y0_over_l, dtype=float)
    return np.square(y0) < 4.0 * np.asarray(snr0, dtype=float) / np.pi - 2.0 / 3.0


def psi_taylor(theta, l_over_d):
    """Second-order expansions around ``L/D = 0``.

    Returns a dict with the dimensionless quantities ``D2psi2``, ``D4psi4``,
    ``D5psi5bar``, ``D6psi6`` and ``psi2Delta``.
    """
    t = np.asarray(l_over_d, dtype=float)
    if np.any(t <= 0) or np.any(t >= 1):
        raise DomainError("l_over_d must lie in (0, 1)")
    theta = np.asarray(theta, dtype=float)
    c2 = np.cos(theta) ** 2
    s = np.sin(theta)
    t2 = t * t
    return {
        "D2psi2": 1.0 + (1.0 - 4.0 / 3.0 * c2) * t2,
        "D4psi4": 1.0 + 2.0 * (5.0 / 3.0 - 2.0 * c2) * t2,
        "D5psi5bar": -s - (5.0 - 8.0 * c2) * s * t2,
        "D6psi6": 1.0 + (7.0 - 8.0 * c2) * t2,
        "psi2Delta": 1.0 + 2.0 / 3.0 * c2 * t2 + 2.0 / 3.0 * c2 * (2.0 - 11.0 / 5.0 * c2) * t2 * t2,
    }
