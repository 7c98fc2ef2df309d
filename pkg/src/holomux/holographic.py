"""Continuous-aperture Gram matrices and their eigenvalues.

The limits of the normalized Gram matrix for three and for two transmit
polarizations share the decoupled x entry ``psi2``; the yz block is what
distinguishes them. Eigenvalues are returned in descending order as
:class:`~holomux.finite_channel.EigenTriple`.
"""

import numpy as np

from ._math import ops
from .finite_channel import EigenTriple, PolarizationConfig
from .geometry import psi_closed, view_angle

__all__ = [
    "aperture_delta",
    "gram_limit_3x3",
    "gram_limit_2x3",
    "gram_limit",
    "eigen_3x3",
    "eigen_2x3",
    "eigen_holographic",
    "x_minus_sin",
    "threshold_gaps",
]


def x_minus_sin(x):
    """``x - sin(x)`` without cancellation for small ``x``."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    # Horner form of x^3/3! - x^5/5! + ... up to x^31, converged below 1.5;
    # beyond that the direct difference loses at most a factor ~3.
    series = np.zeros_like(x)
    for n in range(31, 1, -2):
        series = 1.0 / _factorial(n) - x2 * series
    series = x * x2 * series
    return np.where(np.abs(x) < 1.5, series, x - np.sin(x))


def _factorial(n):
    out = 1.0
    for k in range(2, n + 1):
        out *= k
    return out


def aperture_delta(geom):
    """``sqrt((D^2 - L^2)^2 + (2 L D cos(theta))^2)`` in m^2."""
    L = np.asarray(geom.L, dtype=float)
    D = np.asarray(geom.D, dtype=float)
    return np.hypot((D - L) * (D + L), 2.0 * L * geom.d_cos)


def gram_limit_3x3(geom, psis=None):
    """Limit Gram matrix for three transmit polarizations, shape ``(..., 3, 3)``."""
    psis = psi_closed(geom) if psis is None else psis
    c = geom.d_cos
    yy = psis.psi4 * c * c
    yz = psis.psi3bar * c
    zz = psis.psi2 - yy
    return _assemble(psis.psi2, yy, yz, zz)


def gram_limit_2x3(geom, psis=None):
    """Limit Gram matrix with only the x and y transmit dipoles."""
    psis = psi_closed(geom) if psis is None else psis
    c = geom.d_cos
    c2 = c * c
    yy = psis.psi6 * c2 * c2
    yz = psis.psi5bar * c2 * c
    zz = psis.psi4 * c2 - yy
    return _assemble(psis.psi2, yy, yz, zz)


def gram_limit(geom, pol=3):
    pol = PolarizationConfig.coerce(pol)
    return gram_limit_3x3(geom) if pol.t_pol == 3 else gram_limit_2x3(geom)


def _assemble(xx, yy, yz, zz):
    dtype = object if ops(xx).name == "mpmath" else float
    xx, yy, yz, zz = np.broadcast_arrays(*(np.asarray(v, dtype=dtype) for v in (xx, yy, yz, zz)))
    out = np.zeros(xx.shape + (3, 3), dtype=dtype)
    out[..., 0, 0] = xx
    out[..., 1, 1] = yy
    out[..., 1, 2] = out[..., 2, 1] = yz
    out[..., 2, 2] = zz
    return out


def eigen_3x3(geom):
    """Eigenvalues for three transmit polarizations.

    ``gamma1 = psi2`` and ``gamma2,3 = (psi2 +- 1/Delta) / 2``. Using
    ``psi2 * Delta = G / sin(G)`` with ``G`` the view angle, these become
    ``(G +- sin G) / (4 L D cos(theta))``, which keeps ``gamma3`` accurate
    far from the array where ``psi2`` and ``1/Delta`` nearly coincide.
    """
    L = np.asarray(geom.L, dtype=float)
    gamma = view_angle(geom)
    denom = 4.0 * L * geom.d_cos
    return EigenTriple(
        gamma1=2.0 * gamma / denom,
        gamma2=(gamma + np.sin(gamma)) / denom,
        gamma3=x_minus_sin(gamma) / denom,
    )


# Taylor coefficients (in G^2) of the yz-block determinant terms below,
# starting at G^8, G^6 and G^4 respectively.
_DET_E0 = (1 / 60, -67 / 12600, 251 / 302400, -11573 / 139708800,
           214561 / 36324288000, -209479 / 653837184000,
           36722219 / 2667655710720000, -1254449267 / 2601853536522240000,
           87817391 / 6244448487653376000)
_DET_E1 = (-1 / 15, 3 / 140, -37 / 12600, 2341 / 9979200, -7621 / 605404800,
           17887 / 36324288000, -493531 / 33345696384000,
           5987909 / 16895152834560000, -3612649 / 520370707304448000,
           20959177 / 184657262420606976000)
_DET_E2 = (1 / 3, -4 / 45, 1 / 105, -8 / 14175, 2 / 93555, -8 / 14189175,
           1 / 91216125, -16 / 97692469875, 2 / 1031198293125,
           -8 / 428772250281375, 2 / 13447856940643125)


def _even_series(coeffs, x2):
    out = np.zeros_like(x2)
    for a in reversed(coeffs):
        out = a + x2 * out
    return out


def _yz_block_2x3(geom):
    """Eigenvalue ingredients of the two-polarization yz block.

    Substituting ``x - D sin(theta) = c tan(phi)`` turns the block into
    ``(1 / (8 L c)) N`` with ``N = 4 * int cos^2(phi) n n^T dphi`` over an
    angular window of width ``G`` (the view angle) centred at ``phi0``, with
    ``n = (cos phi, sin phi)``. Returns ``(scale, trace_half, radius, det,
    half_defect)`` of ``N`` so that its eigenvalues are ``trace_half +-
    radius``, with the determinant assembled from series for small ``G``;
    ``half_defect = G - sin(G) cos(2 phi0)``.
    """
    L = np.asarray(geom.L, dtype=float)
    s, c = geom.d_sin, geom.d_cos
    gam = view_angle(geom)
    sg, cg = np.sin(gam), np.cos(gam)

    # Window centre: tan(2 phi0) = -2 s c / (c^2 + L^2 - s^2).
    x = c * c + L * L - s * s
    y = -2.0 * s * c
    rho = np.hypot(x, y)
    cos2, sin2 = x / rho, y / rho
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(x >= 0, (rho + x) / rho, y * y / ((rho - x) * rho))  # 1 + cos(2 phi0)
        v = np.where(x >= 0, y * y / ((rho + x) * rho), (rho - x) / rho)  # 1 - cos(2 phi0)
    cos4 = cos2 * cos2 - sin2 * sin2
    sin4 = 2.0 * sin2 * cos2

    half_sin2g = sg * cg
    a = 1.5 * gam + 2.0 * sg * cos2 + 0.5 * half_sin2g * cos4
    b = sg * sin2 + 0.5 * half_sin2g * sin4
    d = 0.5 * gam - 0.5 * half_sin2g * cos4
    trace_half = x_minus_sin(gam) + sg * w
    radius = np.hypot(0.5 * (a - d), b)

    g2 = gam * gam
    small = gam < 0.5
    e0 = np.where(small, g2 ** 4 * _even_series(_DET_E0, g2), 0.0)
    e1 = np.where(small, g2 ** 3 * _even_series(_DET_E1, g2), 0.0)
    e2 = np.where(small, g2 ** 2 * _even_series(_DET_E2, g2), 0.0)
    if np.any(~small):
        k0 = 0.75 * (gam - sg) * (gam + sg) + 0.25 * sg ** 4
        k1 = sg * (gam - half_sin2g)
        k2 = 0.5 * sg * (sg - gam * cg)
        e0 = np.where(small, e0, k0 - k1 + k2)
        e1 = np.where(small, e1, k1 - 4.0 * k2)
        e2 = np.where(small, e2, 2.0 * k2)
    det = e0 + w * (e1 + w * e2)
    return 1.0 / (8.0 * L * c), trace_half, radius, det, x_minus_sin(gam) + sg * v


def eigen_2x3(geom):
    """Eigenvalues with only the x and y transmit dipoles.

    Algebraically ``gamma2,3 = (c^2 / 2) [psi4 +- sqrt((psi4 - 2 c^2 psi6)^2
    + 4 c^2 psibar5^2)]`` with ``c = D cos(theta)``. That form subtracts
    nearly equal numbers far from the array, so the block is evaluated in
    angular coordinates instead (see :func:`_yz_block_2x3`).
    """
    scale, trace_half, radius, det, _ = _yz_block_2x3(geom)
    big = trace_half + radius
    return EigenTriple(
        gamma1=psi_closed(geom).psi2,
        gamma2=scale * big,
        gamma3=scale * det / big,
    )


def threshold_gaps(geom, pol=3):
    """``(psi2/gamma2 - psi2/gamma1, 2 psi2/gamma3 - psi2/gamma1 - psi2/gamma2)``.

    Same values as :func:`holomux.multiplexing.thresholds_from_eigs` on the
    holographic eigenvalues, but the first gap is formed without subtracting
    nearly equal ratios, so it keeps full relative accuracy far from the array.
    """
    pol = PolarizationConfig.coerce(pol)
    gam = view_angle(geom)
    if pol.t_pol == 3:
        sg = np.sin(gam)
        gap1 = x_minus_sin(gam) / (gam + sg)
        inv3 = 2.0 * gam / x_minus_sin(gam)
    else:
        _, trace_half, radius, det, half_defect = _yz_block_2x3(geom)
        big = trace_half + radius
        # 4 G - big = 2 (G - sin G cos 2phi0) + small, all terms non-negative.
        gap1 = (2.0 * half_defect + det / big) / big
        inv3 = 4.0 * gam * big / det
    gap2 = 2.0 * (inv3 - 1.0) - gap1
    return gap1, gap2


def eigen_holographic(geom, pol=3):
    pol = PolarizationConfig.coerce(pol)
    return eigen_3x3(geom) if pol.t_pol == 3 else eigen_2x3(geom)
