"""Waterfilling over the three eigenmodes, activation thresholds and SNR maps.

Powers here are the scaled coefficients ``s_i`` whose sum equals the
beamfocusing receive SNR; mode ``i`` has effective gain ``gamma_i / psi2``.
Everything is linear (no dB) and vectorizes over array inputs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .finite_channel import EigenTriple, PolarizationConfig
from .geometry import ScenarioGeometry, psi_closed
from .holographic import threshold_gaps

__all__ = [
    "PowerAllocation",
    "ThresholdPair",
    "waterfill",
    "thresholds_from_eigs",
    "n_active",
    "spectral_efficiency",
    "snr_rx_from_reference",
    "snr_rx_ratio",
    "threshold_reference",
]


@dataclass(frozen=True)
class PowerAllocation:
    s: np.ndarray  # shape (..., 3), non-increasing along the last axis
    waterlevel_inv: float
    n_plus: int


@dataclass(frozen=True)
class ThresholdPair:
    snr1: float
    snr2: float


def _inverse_gains(eigs, psi2):
    g = eigs.as_array() if isinstance(eigs, EigenTriple) else np.asarray(eigs, dtype=float)
    if np.any(g <= 0):
        raise DomainError("eigenvalues must be positive")
    if np.any(np.diff(g, axis=-1) > 0):
        raise DomainError("eigenvalues must be in descending order")
    return np.asarray(psi2, dtype=float)[..., None] / g


def waterfill(eigs, psi2, total_snr):
    """Capacity-optimal split of ``total_snr`` over the three modes.

    Exact active-set solution: ``n_plus`` comes from the activation
    thresholds, and each active mode gets ``s_i = (total + sum_j (psi2/gamma_j
    - psi2/gamma_i)) / n_plus`` summed over active ``j``. Forming the
    differences first keeps tiny totals from being absorbed into the level.
    A zero total gives zero power and, by convention, ``n_plus = 1``.
    """
    total = np.asarray(total_snr, dtype=float)
    if np.any(total < 0):
        raise DomainError("total SNR must be non-negative")
    inv = _inverse_gains(eigs, psi2)
    inv, total = np.broadcast_arrays(inv, total[..., None])
    total = total[..., 0]

    # Mode k joins once the total reaches sum_{i<k} (inv_k - inv_i); these
    # are exactly the thresholds used by n_active, so both always agree.
    n_plus = np.asarray(n_active(total, thresholds_from_eigs(eigs, psi2)))
    k = np.arange(1, 4)
    active = k <= n_plus[..., None]
    diffs = inv[..., None, :] - inv[..., :, None]  # [i, j] = inv_j - inv_i
    spread = np.sum(np.where(active[..., None, :], diffs, 0.0), axis=-1)
    s = np.where(active, (total[..., None] + spread) / n_plus[..., None], 0.0)
    s = np.maximum(s, 0.0)
    level = np.sum(np.where(active, inv, 0.0), axis=-1) / n_plus + total / n_plus
    # Rounding can leave the tail of s a few ulps off; rescale onto the total.
    sums = s.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(sums[..., None] > 0, s * (total / sums)[..., None], s)
    return PowerAllocation(
        s=s,
        waterlevel_inv=level if level.ndim else float(level),
        n_plus=n_plus if n_plus.ndim else int(n_plus),
    )


def thresholds_from_eigs(eigs, psi2):
    """SNRs at which the second and third modes switch on.

    ``snr1 = psi2/gamma2 - psi2/gamma1`` and
    ``snr2 = 2 psi2/gamma3 - psi2/gamma1 - psi2/gamma2``.
    """
    inv = _inverse_gains(eigs, psi2)
    snr1 = inv[..., 1] - inv[..., 0]
    snr2 = 2.0 * inv[..., 2] - inv[..., 0] - inv[..., 1]
    return ThresholdPair(snr1=snr1 if snr1.ndim else float(snr1),
                         snr2=snr2 if snr2.ndim else float(snr2))


def n_active(snr_rx, thr):
    """Number of waterfilling-active modes; ties go to the larger count.

    Zero SNR counts as one stream, matching :func:`waterfill`.
    """
    snr_rx = np.asarray(snr_rx, dtype=float)
    out = 1 + (snr_rx >= thr.snr1).astype(int) + (snr_rx >= thr.snr2).astype(int)
    out = np.where(snr_rx == 0, 1, out)
    return out if out.ndim else int(out)


def spectral_efficiency(eigs, psi2, alloc, base=2):
    """``sum_i log(1 + gamma_i s_i / psi2)``; ``base`` is 2 (bits) or ``e`` (nats)."""
    inv = _inverse_gains(eigs, psi2)
    nats = np.sum(np.log1p(np.asarray(alloc.s) / inv), axis=-1)
    if base == 2:
        return nats / np.log(2.0)
    if base in ("e", np.e):
        return nats
    raise DomainError("log base must be 2 or 'e'")


def snr_rx_ratio(geom):
    """Receive SNR relative to the reference point ``(D, theta) = (L, 0)``.

    Equal to ``4 L^2 psi2 / pi``; depends on ``D/L`` and ``theta`` only.
    """
    return 4.0 * np.square(np.asarray(geom.L, dtype=float)) * psi_closed(geom).psi2 / np.pi


def snr_rx_from_reference(snr0, geom):
    snr0 = np.asarray(snr0, dtype=float)
    if np.any(snr0 <= 0):
        raise DomainError("reference SNR must be positive")
    out = snr0 * snr_rx_ratio(geom)
    return out if np.ndim(out) else float(out)


def threshold_reference(theta, d_over_l, pol=3, which=1):
    """Reference-point SNR at which mode ``which + 1`` activates at ``(theta, D/L)``.

    This is the receive-SNR threshold divided by :func:`snr_rx_ratio`, and is
    dimensionless (evaluated with ``L = 1``). The thresholds come from
    :func:`holomux.holographic.threshold_gaps`, which agrees with
    :func:`thresholds_from_eigs` but stays accurate at large ``D/L``.
    """
    if which not in (1, 2):
        raise DomainError("which must be 1 or 2")
    pol = PolarizationConfig.coerce(pol)
    geom = ScenarioGeometry.from_ratio(theta, d_over_l)
    gaps = threshold_gaps(geom, pol)
    value = gaps[which - 1] / snr_rx_ratio(geom)
    return value if np.ndim(value) else float(value)
