"""Finite-array dipole channel, its normalized Gram matrix and a 3x3 eigensolver."""

from dataclasses import dataclass

import numpy as np

from ._math import _MPMATH, ops
from .errors import DomainError
from .geometry import element_offsets, element_vector

__all__ = [
    "RadioConstants",
    "PolarizationConfig",
    "EigenTriple",
    "channel_block",
    "projector",
    "scaled_gram",
    "sym3_eigenvalues",
]


@dataclass(frozen=True)
class RadioConstants:
    wavelength: float
    xi: complex = 1.0
    noise_power: float = 1.0
    total_power_bar: float = 1.0

    def __post_init__(self):
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive")
        if not self.noise_power > 0 or not self.total_power_bar > 0:
            raise DomainError("noise and total power must be positive")
        if abs(self.xi) == 0:
            raise DomainError("coupling constant xi must be nonzero")


@dataclass(frozen=True)
class PolarizationConfig:
    """Number of transmit and receive dipoles used.

    ``t_pol=2`` keeps the x- and y-oriented transmit dipoles.
    """

    t_pol: int = 3
    r_pol: int = 3

    def __post_init__(self):
        if self.t_pol not in (2, 3):
            raise DomainError("t_pol must be 2 or 3")
        if self.r_pol != 3:
            raise DomainError("only r_pol = 3 is supported")

    @classmethod
    def coerce(cls, pol):
        return pol if isinstance(pol, cls) else cls(t_pol=int(pol))


@dataclass(frozen=True)
class EigenTriple:
    """Eigenvalues in descending order (scalars or equal-shape arrays)."""

    gamma1: float
    gamma2: float
    gamma3: float

    def as_array(self):
        return np.stack(np.broadcast_arrays(self.gamma1, self.gamma2, self.gamma3), axis=-1)

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values)
        return cls(values[..., 0], values[..., 1], values[..., 2])


def projector(r):
    """``I - r r^T / |r|^2``, the transverse projector for direction ``r``."""
    r = np.asarray(r, dtype=float)
    return np.eye(3) - np.outer(r, r) / (r @ r)


def channel_block(m, arr, geom, consts):
    """Complex 3x3 response between element ``m`` and the receiver."""
    r = element_vector(m, arr, geom)
    dist = np.linalg.norm(r)
    gain = consts.xi / (consts.wavelength * dist)
    phase = np.exp(-2j * np.pi * dist / consts.wavelength)
    return gain * phase * projector(r)


def scaled_gram(arr, geom, pol=3):
    """``(1/(2M+1)) sum_m B_m B_m^H`` with ``xi/lambda = 1``.

    ``B_m`` is the channel block restricted to the first ``t_pol`` columns.
    Phases cancel in the product, so the real form is accumulated directly:
    each term is ``|r_m|^-2 P_m S S^T P_m`` with ``P_m`` the transverse
    projector and ``S`` the column selector.
    """
    pol = PolarizationConfig.coerce(pol)
    u = np.asarray(geom.d_sin, dtype=float) - element_offsets(arr)
    c = float(geom.d_cos)
    r2 = np.square(u) + c * c
    if np.any(r2 == 0):
        raise DomainError("receiver coincides with an array element")
    # Projector entries in the yz block; the x row/column is untouched.
    pyy, pyz, pzz = c * c / r2, -u * c / r2, np.square(u) / r2
    if pol.t_pol == 3:
        yy, yz, zz = pyy, pyz, pzz
    else:
        # P S S^T P = P - (P e_z)(P e_z)^T
        yy, yz, zz = pyy - pyz * pyz, pyz - pyz * pzz, pzz - pzz * pzz
    w = 1.0 / r2
    n = arr.n_elements
    gram = np.zeros((3, 3))
    gram[0, 0] = np.sum(w) / n
    gram[1, 1] = np.sum(w * yy) / n
    gram[1, 2] = gram[2, 1] = np.sum(w * yz) / n
    gram[2, 2] = np.sum(w * zz) / n
    return gram


def _sym2_eigs(a, b, d):
    """Eigenvalues (hi, lo) of [[a, b], [b, d]].

    The root of larger magnitude comes from the half-angle formula and the
    other from the determinant, which avoids cancellation in either sign.
    """
    mean = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), b)
    det = a * d - b * b
    big = np.where(mean >= 0, mean + rad, mean - rad)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, det / big, 0.0)
    hi = np.where(mean >= 0, big, small)
    lo = np.where(mean >= 0, small, big)
    return hi, lo


def sym3_eigenvalues(mat, rtol=1e-12):
    """Eigenvalues of real symmetric 3x3 matrices, in descending order.

    Accepts a single matrix or a stack ``(..., 3, 3)`` and returns an
    :class:`EigenTriple`. When the first row and column are decoupled the
    trailing 2x2 block is solved as a quadratic; otherwise the
    trigonometric form of the cubic is used.
    """
    if ops(np.asarray(mat)).name == "mpmath":
        return _sym3_eigenvalues_mp(np.asarray(mat, dtype=object), rtol)
    A = np.asarray(mat, dtype=float)
    if A.shape[-2:] != (3, 3):
        raise DomainError("expected a 3x3 matrix or a stack of them")
    scale = np.max(np.abs(A), axis=(-2, -1))
    asym = np.max(np.abs(A - np.swapaxes(A, -1, -2)), axis=(-2, -1))
    if np.any(asym > rtol * np.where(scale > 0, scale, 1.0)):
        raise DomainError("matrix is not symmetric within tolerance")
    A = 0.5 * (A + np.swapaxes(A, -1, -2))

    decoupled = (A[..., 0, 1] == 0) & (A[..., 0, 2] == 0)
    out = np.empty(A.shape[:-1])
    if np.any(decoupled):
        Ad = A[decoupled]
        hi, lo = _sym2_eigs(Ad[:, 1, 1], Ad[:, 1, 2], Ad[:, 2, 2])
        out[decoupled] = np.sort(np.stack([Ad[:, 0, 0], hi, lo], axis=-1), axis=-1)[:, ::-1]
    if np.any(~decoupled):
        out[~decoupled] = _trig_cubic(A[~decoupled])
    return EigenTriple.from_array(out)


def _trig_cubic(A):
    q = np.trace(A, axis1=-2, axis2=-1) / 3.0
    p1 = A[:, 0, 1] ** 2 + A[:, 0, 2] ** 2 + A[:, 1, 2] ** 2
    diag = np.diagonal(A, axis1=-2, axis2=-1) - q[:, None]
    p = np.sqrt((np.sum(diag ** 2, axis=-1) + 2.0 * p1) / 6.0)
    safe = np.where(p > 0, p, 1.0)
    B = (A - q[:, None, None] * np.eye(3)) / safe[:, None, None]
    r = np.clip(np.linalg.det(B) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    e1 = q + 2.0 * p * np.cos(phi)
    e3 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.sort(np.stack([e1, e2, e3], axis=-1), axis=-1)[:, ::-1]


def _sym3_eigenvalues_mp(A, rtol):
    """Same algorithm on a single matrix of ``mpmath.mpf`` entries."""
    m = _MPMATH
    if A.shape != (3, 3):
        raise DomainError("multiprecision input must be a single 3x3 matrix")
    A = [[m.asarray(A[i][j]) for j in range(3)] for i in range(3)]
    scale = max(abs(v) for row in A for v in row)
    if any(abs(A[i][j] - A[j][i]) > rtol * scale for i in range(3) for j in range(3)):
        raise DomainError("matrix is not symmetric within tolerance")
    if A[0][1] == 0 and A[0][2] == 0:
        a, b, d = A[1][1], A[1][2], A[2][2]
        mean, rad = (a + d) / 2, m.hypot((a - d) / 2, b)
        det = a * d - b * b
        big = mean + rad if mean >= 0 else mean - rad
        small = det / big if big != 0 else m.asarray(0)
        vals = [A[0][0], big, small]
    else:
        q = (A[0][0] + A[1][1] + A[2][2]) / 3
        p1 = A[0][1] ** 2 + A[0][2] ** 2 + A[1][2] ** 2
        p = m.sqrt(((A[0][0] - q) ** 2 + (A[1][1] - q) ** 2 + (A[2][2] - q) ** 2 + 2 * p1) / 6)
        if p == 0:
            vals = [q, q, q]
        else:
            B = [[(A[i][j] - (q if i == j else 0)) / p for j in range(3)] for i in range(3)]
            det = (B[0][0] * (B[1][1] * B[2][2] - B[1][2] * B[2][1])
                   - B[0][1] * (B[1][0] * B[2][2] - B[1][2] * B[2][0])
                   + B[0][2] * (B[1][0] * B[2][1] - B[1][1] * B[2][0]))
            r = min(max(det / 2, -1), 1)
            phi = m.acos(r) / 3
            e1 = q + 2 * p * m.cos(phi)
            e3 = q + 2 * p * m.cos(phi + 2 * m.pi / 3)
            vals = [e1, 3 * q - e1 - e3, e3]
    vals.sort(reverse=True)
    return EigenTriple(*vals)
