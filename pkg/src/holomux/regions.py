"""Exact region boundaries, theta sweeps, region maps and the finite-M study.

A boundary is a distance ratio ``x = D/L`` at which the reference SNR
threshold for activating one more stream equals the given ``snr0``. Points
with ``threshold_reference(theta, x) <= snr0`` support the extra stream.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .asymptotics import BEYOND_APPROXIMATION, boundary_approx, far_limit_snr0_th1
from .errors import DomainError, HolomuxError, NumericError
from .finite_channel import PolarizationConfig, _sym2_eigs
from .geometry import THETA_GUARD, FiniteArray, ScenarioGeometry, element_offsets
from .multiplexing import ThresholdPair, n_active, snr_rx_ratio, threshold_reference
from .holographic import threshold_gaps

__all__ = [
    "X_RANGE",
    "SCAN_POINTS",
    "BoundarySolution",
    "boundary_solve",
    "BoundaryCurve",
    "boundary_curve",
    "RegionMap",
    "region_map",
    "finite_m_threshold",
    "finite_m_boundary",
    "validation_error",
    "DEFAULT_M_LIST",
    "VALIDATION_SET",
]

X_RANGE = (1e-2, 1e4)
SCAN_POINTS = 512
# Hard ceiling when a crossing is known (from the far-field limit) to lie
# beyond the scanned range.
X_CAP = 1e12
RTOL = 1e-12

DEFAULT_M_LIST = (2, 4, 8, 16, 32, 64)
# (theta [deg], snr0 [dB]) pairs used for the finite-M validation study.
VALIDATION_SET = ((0.0, 10.0), (0.0, 20.0), (30.0, 10.0), (30.0, 20.0))


@dataclass(frozen=True)
class BoundarySolution:
    """All sign changes of ``threshold_reference - snr0`` along a ray.

    ``value`` summarises the outer boundary: ``inf`` when the extra stream is
    available arbitrarily far away, the last crossing otherwise, and ``0.0``
    when the stream is unavailable over the whole searched range.
    """

    crossings: tuple
    unbounded: bool
    status: str  # single | multiple | unbounded | none-in-range

    @property
    def value(self):
        if self.unbounded:
            return np.inf
        return self.crossings[-1] if self.crossings else 0.0

    def __float__(self):
        return float(self.value)


def _far_limit(theta, pol, which):
    if which == 2:
        return np.inf
    return float(far_limit_snr0_th1(theta, pol))


def _check_which(which):
    if which not in (1, 2):
        raise DomainError("which must be 1 or 2")


def _check_range(x_range):
    lo, hi = (float(v) for v in x_range)
    if not 0 < lo < hi:
        raise DomainError("x_range must satisfy 0 < lo < hi")
    return lo, hi


def _crossings(func, grid, vals):
    """Roots bracketed by consecutive grid points (exact zeros included)."""
    roots = []
    sign = np.sign(vals)
    for i in np.flatnonzero(sign == 0):
        roots.append(float(grid[i]))
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        lo, hi = float(grid[i]), float(grid[i + 1])
        roots.append(brentq(func, lo, hi, xtol=lo * RTOL, rtol=RTOL))
    return sorted(roots)


def _solve_ray(curve, limit, snr0, x_range):
    """Shared root search for ``curve(x) - snr0`` with known ``x -> inf`` limit."""
    lo, hi = _check_range(x_range)
    if not snr0 > 0:
        raise DomainError("reference SNR must be positive")
    grid = np.logspace(np.log10(lo), np.log10(hi), SCAN_POINTS)
    vals = np.asarray(curve(grid), dtype=float) - snr0
    diag = {"x_range": [lo, hi], "snr0": snr0}
    if not np.all(np.isfinite(vals)):
        raise NumericError("threshold curve is not finite on the scan grid",
                           diagnostics={**diag, "n_bad": int(np.sum(~np.isfinite(vals)))})
    if np.all(vals == 0):
        raise NumericError("no sign information: threshold curve equals snr0 everywhere",
                           diagnostics=diag)

    def func(x):
        return float(curve(np.asarray([x]))[0]) - snr0

    roots = _crossings(func, grid, vals)
    tail = np.sign(limit - snr0)
    last = np.sign(vals[-1])
    if tail != 0 and last != 0 and tail != last:
        # The sign still has to flip past the scanned range.
        found = False
        a = hi
        while a < X_CAP and not found:
            ext = np.logspace(np.log10(a), np.log10(a) + 1.0, 65)
            ev = np.asarray(curve(ext), dtype=float) - snr0
            extra = _crossings(func, ext[1:], ev[1:]) if ev[0] == 0 else _crossings(func, ext, ev)
            if extra:
                roots.extend(r for r in extra if r > hi)
                found = True
            a *= 10.0
        if not found:
            raise NumericError("crossing lies beyond the search ceiling",
                               diagnostics={**diag, "ceiling": X_CAP, "limit": limit})
    unbounded = bool(tail < 0 or (tail == 0 and last <= 0))
    roots = tuple(sorted(set(roots)))
    if unbounded:
        status = "unbounded"
    elif not roots:
        status = "none-in-range"
    else:
        status = "single" if len(roots) == 1 else "multiple"
    return BoundarySolution(crossings=roots, unbounded=unbounded, status=status)


def boundary_solve(theta, snr0, pol=3, which=1, x_range=X_RANGE):
    """Exact boundary distance(s) for activating stream ``which + 1``.

    Scans ``threshold_reference(theta, x) - snr0`` on a log grid of
    :data:`SCAN_POINTS` points over ``x_range``, refines every bracketed sign
    change with Brent's method to relative ``1e-12``, and uses the far-field
    limit to decide what happens beyond the range.

    Returns
    -------
    BoundarySolution
    """
    _check_which(which)
    pol = PolarizationConfig.coerce(pol)
    theta = float(theta)
    if not abs(theta) <= THETA_GUARD:
        raise DomainError("|theta| must stay below pi/2")
    return _solve_ray(
        lambda x: threshold_reference(theta, x, pol, which),
        _far_limit(theta, pol, which), float(snr0), x_range,
    )


@dataclass(frozen=True)
class BoundaryCurve:
    theta_grid: np.ndarray
    d_over_l_th1: np.ndarray
    d_over_l_th2: np.ndarray
    method: str
    diagnostics: tuple = field(default=())  # one string per theta, "" when clean


def _curve_point(theta, snr0, pol, method, M, x_range):
    out, notes = [], []
    for which in (1, 2):
        try:
            if method == "exact":
                sol = boundary_solve(theta, snr0, pol, which, x_range)
                val = sol.value
                if sol.status == "multiple":
                    notes.append(f"th{which}:crossings={list(sol.crossings)}")
            elif method == "approx":
                val = boundary_approx(theta, snr0, pol, which)
                if val == BEYOND_APPROXIMATION:
                    notes.append(f"th{which}:{BEYOND_APPROXIMATION}")
                    val = np.nan
            else:
                val = finite_m_boundary(theta, snr0, pol, M, which, x_range).value
        except HolomuxError as exc:
            notes.append(f"th{which}:{type(exc).__name__}:{exc}")
            val = np.nan
        out.append(float(val))
    return out[0], out[1], ";".join(notes)


def boundary_curve(theta_grid, snr0, pol=3, method="exact", M=None, workers=1,
                   x_range=X_RANGE):
    """Both boundaries over a theta sweep.

    ``method`` is ``"exact"``, ``"approx"`` or ``"finite-M"`` (requires ``M``).
    Failing points become NaN with a note in ``diagnostics``. Results are
    assembled in input order, so the output does not depend on ``workers``.
    """
    theta = np.asarray(theta_grid, dtype=float).ravel()
    if theta.size == 0:
        raise DomainError("theta grid must be non-empty")
    if np.any(np.diff(theta) <= 0):
        raise DomainError("theta grid must be strictly increasing")
    if np.any(np.abs(theta) >= np.pi / 2):
        raise DomainError("theta grid must lie inside (-pi/2, pi/2)")
    if method not in ("exact", "approx", "finite-M"):
        raise DomainError("method must be exact, approx or finite-M")
    if method == "finite-M" and (M is None or int(M) < 1):
        raise DomainError("finite-M method needs M >= 1")
    pol = PolarizationConfig.coerce(pol)

    def job(t):
        return _curve_point(t, float(snr0), pol, method, M, x_range)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            rows = list(pool.map(job, theta))
    else:
        rows = [job(t) for t in theta]
    tag = method if method != "finite-M" else f"finite-M:{int(M)}"
    return BoundaryCurve(
        theta_grid=theta,
        d_over_l_th1=np.array([r[0] for r in rows]),
        d_over_l_th2=np.array([r[1] for r in rows]),
        method=tag,
        diagnostics=tuple(r[2] for r in rows),
    )


@dataclass(frozen=True)
class RegionMap:
    """Stream-count labels on a Cartesian grid in units of ``L``.

    ``labels[j, i]`` belongs to ``(y[i], z[j])``; 0 marks invalid cells.
    ``monotonicity_violations`` counts valid cells whose label exceeds the
    label at half their distance along the same ray.
    """

    y: np.ndarray
    z: np.ndarray
    labels: np.ndarray
    t_pol: int
    snr0: float
    monotonicity_violations: int = 0


def _labels(y, z, snr0, pol):
    dist = np.hypot(y, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.arctan2(y, z)
    valid = (z > 0) & (np.abs(theta) <= THETA_GUARD) & (dist > 0)
    out = np.zeros(y.shape, dtype=int)
    if np.any(valid):
        geom = ScenarioGeometry.from_ratio(theta[valid], dist[valid])
        gap1, gap2 = threshold_gaps(geom, pol)
        snr_rx = snr0 * snr_rx_ratio(geom)
        out[valid] = n_active(snr_rx, ThresholdPair(gap1, gap2))
    return out


def region_map(y_range, z_range, resolution, snr0, pol=3):
    """Rasterized multiplexing regions.

    ``y_range``/``z_range`` are ``(lo, hi)`` in units of ``L`` and
    ``resolution`` is ``(ny, nz)`` or a single int. Cells with ``z <= 0``
    (the array line, the origin, the half-space behind the array) are
    labelled 0.
    """
    ny, nz = (resolution, resolution) if np.ndim(resolution) == 0 else resolution
    ny, nz = int(ny), int(nz)
    if ny < 0 or nz < 0:
        raise DomainError("resolution must be non-negative")
    snr0 = float(snr0)
    if not snr0 > 0:
        raise DomainError("reference SNR must be positive")
    pol = PolarizationConfig.coerce(pol)
    y = np.linspace(float(y_range[0]), float(y_range[1]), ny)
    z = np.linspace(float(z_range[0]), float(z_range[1]), nz)
    Y, Z = np.meshgrid(y, z)
    labels = _labels(Y, Z, snr0, pol)
    inner = _labels(0.5 * Y, 0.5 * Z, snr0, pol)
    violations = int(np.sum((labels > 0) & (inner > 0) & (labels > inner)))
    return RegionMap(y=y, z=z, labels=labels, t_pol=pol.t_pol, snr0=snr0,
                     monotonicity_violations=violations)


def _finite_m_terms(theta, d_over_l, M, pol):
    """Thresholds and mean inverse square distance for a finite array, L = 1.

    Vectorized over ``d_over_l``. Mirrors
    :func:`holomux.finite_channel.scaled_gram` and
    :func:`holomux.geometry.harmonic_square_mean`.
    """
    arr = FiniteArray.spanning(M, 1.0)
    x = np.atleast_1d(np.asarray(d_over_l, dtype=float))
    u = x[:, None] * np.sin(theta) - element_offsets(arr)[None, :]
    c = (x * np.cos(theta))[:, None]
    r2 = u * u + c * c
    w = 1.0 / r2
    pyy, pyz, pzz = c * c * w, -u * c * w, u * u * w
    if pol.t_pol == 2:
        pyy, pyz, pzz = pyy - pyz * pyz, pyz - pyz * pzz, pzz - pzz * pzz
    h = w.mean(axis=1)
    a = (w * pyy).mean(axis=1)
    b = (w * pyz).mean(axis=1)
    d = (w * pzz).mean(axis=1)
    # The x entry h decouples and dominates, so only the yz block is solved.
    hi, lo = _sym2_eigs(a, b, d)
    return h, hi, lo


def finite_m_threshold(theta, d_over_l, M, pol=3, which=1):
    """Finite-``M`` analogue of :func:`holomux.multiplexing.threshold_reference`.

    Eigenvalues of the scaled Gram matrix of the ``2M+1``-element array with
    spacing ``L/M``; ``psi2`` is replaced by the mean inverse square distance
    and the reference normalization uses that same mean at ``(L, 0)``.
    """
    _check_which(which)
    pol = PolarizationConfig.coerce(pol)
    if int(M) < 1:
        raise DomainError("M must be >= 1")
    theta = float(theta)
    h, g2, g3 = _finite_m_terms(theta, d_over_l, int(M), pol)
    h_ref = _finite_m_terms(0.0, 1.0, int(M), pol)[0]
    gap1 = h / g2 - 1.0
    gap = gap1 if which == 1 else 2.0 * h / g3 - 2.0 - gap1
    out = gap * h_ref / h
    return out if np.ndim(d_over_l) else float(out[0])


def finite_m_boundary(theta, snr0, pol=3, M=16, which=1, x_range=X_RANGE):
    """Boundary from the finite-``M`` channel, otherwise as :func:`boundary_solve`.

    The far-field limit of the holographic model decides finiteness beyond
    ``x_range``.
    """
    _check_which(which)
    pol = PolarizationConfig.coerce(pol)
    theta = float(theta)
    return _solve_ray(
        lambda x: finite_m_threshold(theta, x, M, pol, which),
        _far_limit(theta, pol, which), float(snr0), x_range,
    )


def validation_error(M_list, theta, snr0, pol=3, which=1, x_range=X_RANGE):
    """Relative gap between finite-``M`` and holographic boundaries per ``M``.

    Returns an array aligned with ``M_list``; NaN marks incomparable
    entries, where either boundary is infinite or absent.
    """
    Ms = [int(m) for m in M_list]
    if not Ms or any(b <= a for a, b in zip(Ms, Ms[1:])) or Ms[0] < 1:
        raise DomainError("M_list must be a non-empty increasing list of positive ints")
    exact = boundary_solve(theta, snr0, pol, which, x_range).value
    out = np.full(len(Ms), np.nan)
    if not np.isfinite(exact) or exact == 0:
        return out
    for i, m in enumerate(Ms):
        approx = finite_m_boundary(theta, snr0, pol, m, which, x_range).value
        if np.isfinite(approx) and approx > 0:
            out[i] = abs(approx - exact) / exact
    return out
