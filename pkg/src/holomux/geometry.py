"""Scenario geometry, element positions and the holographic distance moments.

A receiver sits in the yz-plane at distance ``D`` from the centre of a
linear array spanning ``[-L, L]`` along y, at elevation ``theta`` from
broadside (the z axis). With ``u = x - D sin(theta)`` the offset along the
array and ``c = D cos(theta)`` the broadside depth, the moments are the
aperture averages

    psi_i     = mean_x |r(x)|^-i              i = 2, 4, 6
    psibar_i  = mean_x u |r(x)|^-(i+1)         i = 3, 5

with ``|r(x)|^2 = u^2 + c^2``. All quantities are SI; ``psi_i`` is in m^-i.

Every function accepts scalar or numpy-array geometries (broadcast
elementwise), which the property tests rely on for large random samples.
"""

from dataclasses import dataclass

import numpy as np

from ._math import ops
from .errors import DomainError
from .quadrature import MAX_PANELS, gauss_kronrod_batch

__all__ = [
    "THETA_GUARD",
    "ScenarioGeometry",
    "PsiSet",
    "FiniteArray",
    "view_angle",
    "psi_closed",
    "psi_quadrature",
    "psi_quadrature_batch",
    "element_vector",
    "element_offsets",
    "harmonic_square_mean",
    "PSI_INDICES",
]

# Elevations this close to endfire are rejected: cos(theta) divides everywhere.
THETA_GUARD = np.pi / 2 - 1e-6

PSI_INDICES = ("2", "3bar", "4", "5bar", "6")


@dataclass(frozen=True)
class ScenarioGeometry:
    """Receiver placement relative to an array of half-aperture ``L``.

    Fields may be floats or broadcast-compatible arrays.
    """

    L: float
    D: float
    theta: float

    def __post_init__(self):
        L, D, theta = (np.asarray(v, dtype=float) for v in (self.L, self.D, self.theta))
        if not np.all(np.isfinite(L) & (L > 0)):
            raise DomainError("half-aperture L must be positive and finite")
        if not np.all(np.isfinite(D) & (D > 0)):
            raise DomainError("distance D must be positive and finite")
        if not np.all(np.abs(theta) < THETA_GUARD):
            raise DomainError("elevation must satisfy |theta| < pi/2 - 1e-6")

    @classmethod
    def from_ratio(cls, theta, d_over_l, L=1.0):
        """Geometry with ``D = d_over_l * L``."""
        return cls(L=L, D=np.multiply(d_over_l, L), theta=theta)

    @property
    def d_sin(self):
        m = ops(self.D, self.theta)
        return m.asarray(self.D) * m.sin(m.asarray(self.theta))

    @property
    def d_cos(self):
        m = ops(self.D, self.theta)
        return m.asarray(self.D) * m.cos(m.asarray(self.theta))

    @property
    def d_over_l(self):
        return np.divide(self.D, self.L)

    def end_distance_product(self):
        """``(D^2 + L^2)^2 - (2 L D sin(theta))^2`` in cancellation-free form.

        Equals the product of the squared distances to the two array ends.
        """
        L, s, c = ops(self.L).asarray(self.L), self.d_sin, self.d_cos
        c2 = c * c
        return ((L + s) * (L + s) + c2) * ((L - s) * (L - s) + c2)


@dataclass(frozen=True)
class PsiSet:
    psi2: float
    psi3bar: float
    psi4: float
    psi5bar: float
    psi6: float

    def get(self, index):
        return getattr(self, "psi" + str(index))

    def as_dict(self):
        return {f"psi{k}": self.get(k) for k in PSI_INDICES}


@dataclass(frozen=True)
class FiniteArray:
    """A ``2M+1``-element array with spacing ``delta_t`` (metres)."""

    M: int
    delta_t: float

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 0:
            raise DomainError("M must be a non-negative integer")
        if not (np.isfinite(self.delta_t) and self.delta_t > 0):
            raise DomainError("delta_t must be positive")

    @classmethod
    def spanning(cls, M, L):
        """Array whose outermost elements sit at ``+-L`` (``delta_t = L/M``)."""
        if M < 1:
            raise DomainError("spanning an aperture needs M >= 1")
        return cls(M=int(M), delta_t=L / M)

    @property
    def n_elements(self):
        return 2 * self.M + 1

    @property
    def half_aperture(self):
        return self.M * self.delta_t


def view_angle(geom):
    """Angle subtended by the aperture ``[-L, L]`` as seen from the receiver.

    Evaluated as ``atan2(2 L D cos(theta), D^2 - L^2)``, which is the
    two-arctangent sum folded into one call; it lies in ``(0, pi)``.
    """
    m = ops(geom.L, geom.D, geom.theta)
    L, D = m.asarray(geom.L), m.asarray(geom.D)
    return m.atan2(2 * L * geom.d_cos, (D - L) * (D + L))


def psi_closed(geom):
    """All five moments from their closed forms.

    Works on float/array geometries and, for reference computations, on
    geometries built from ``mpmath.mpf`` scalars.
    """
    m = ops(geom.L, geom.D, geom.theta)
    L, D = m.asarray(geom.L), m.asarray(geom.D)
    s, c = geom.d_sin, geom.d_cos
    c2 = c * c
    sum_sq = D * D + L * L
    den = geom.end_distance_product()

    psi2 = view_angle(geom) / (2 * L * c)
    psi3bar = -s / den
    psi4 = (sum_sq - 2 * s * s) / den / (2 * c2) + psi2 / (2 * c2)
    psi5bar = -sum_sq * s / (den * den)
    psi6 = (sum_sq * sum_sq - 4 * (D * s) * (D * s)) / (4 * c2 * den * den) \
        + 3 * psi4 / (4 * c2)
    return PsiSet(psi2=psi2, psi3bar=psi3bar, psi4=psi4, psi5bar=psi5bar, psi6=psi6)


# index -> (power of u in the numerator, exponent k in (u^2 + c^2)^k)
_KERNELS = {"2": (0, 1), "3bar": (1, 2), "4": (0, 2), "5bar": (1, 3), "6": (0, 3)}


def _normalize_index(index):
    key = str(index).replace("̄", "bar")
    if key in ("3", "5"):
        key += "bar"
    if key not in _KERNELS:
        raise DomainError(f"unknown moment index {index!r}; expected one of {PSI_INDICES}")
    return key


def psi_quadrature_batch(geom, index, tol=1e-11, max_panels=MAX_PANELS):
    """Moments by adaptive quadrature of their defining aperture averages.

    In the offset variable ``u`` the integration range is
    ``[-L - D sin(theta), L - D sin(theta)]``. The integrand is even in ``u``
    (or odd, for the barred moments), so the range is folded onto ``u >= 0``
    where it is positive; for odd kernels the symmetric part cancels exactly
    and only the unmatched tail is integrated. Returns ``(values, errors)``
    with the estimated absolute error of each value.
    """
    key = _normalize_index(index)
    if not (1e-14 < tol < 1e-3):
        raise DomainError("tol must lie in (1e-14, 1e-3)")
    p, k = _KERNELS[key]

    L = np.asarray(geom.L, dtype=float)
    s = np.asarray(geom.d_sin, dtype=float)
    c = np.asarray(geom.d_cos, dtype=float)
    L, s, c = np.broadcast_arrays(L, s, c)
    shape = L.shape
    L, s, c = L.ravel(), s.ravel(), c.ravel()
    n = L.size

    near = L - np.abs(s)  # > 0 when the receiver projects inside the aperture
    far = L + np.abs(s)
    idx = np.arange(n)
    if p == 0:
        # Even kernel: [0, far] + [0, near] inside, [|near|, far] outside.
        inside = near > 0
        a = np.concatenate([np.where(inside, 0.0, -near), np.zeros(inside.sum())])
        b = np.concatenate([far, near[inside]])
        owner = np.concatenate([idx, idx[inside]])
        sign = np.ones(n)
    else:
        a, b, owner = np.abs(near), far, idx
        sign = -np.sign(s)

    c2 = np.square(c)

    def integrand(x, who):
        r2 = np.square(x) + c2[who]
        out = r2 ** -k
        if p:
            out = x * out
        return out

    # Degenerate zero-width tails (odd kernels at theta = 0) integrate to 0.
    live = b > a
    vals, errs = gauss_kronrod_batch(
        integrand, a[live], b[live], owner[live], n_owners=n, rtol=tol,
        max_panels=max_panels,
    )
    scale = sign / (2.0 * L)
    return (scale * vals).reshape(shape), (np.abs(scale) * errs).reshape(shape)


def psi_quadrature(geom, index, tol=1e-11):
    """One moment by adaptive quadrature; see :func:`psi_quadrature_batch`."""
    vals, _ = psi_quadrature_batch(geom, index, tol=tol)
    return vals if vals.ndim else float(vals)


def element_offsets(arr):
    """Positions ``m * delta_t`` of the elements along the array axis."""
    return np.arange(-arr.M, arr.M + 1) * arr.delta_t


def element_vector(m, arr, geom):
    """Vector from element ``m`` to the receiver, ``[0, D sin - m dt, D cos]``."""
    if int(m) != m or abs(m) > arr.M:
        raise DomainError(f"element index {m} outside [-{arr.M}, {arr.M}]")
    r = np.array([0.0, float(geom.d_sin) - m * arr.delta_t, float(geom.d_cos)])
    if not np.any(r):
        raise DomainError("receiver coincides with an array element")
    return r


def harmonic_square_mean(arr, geom):
    """Mean of ``|r_m|^-2`` over the ``2M+1`` elements (units m^-2)."""
    u = element_offsets(arr) - np.asarray(geom.d_sin, dtype=float)[..., None]
    r2 = np.square(u) + np.square(np.asarray(geom.d_cos, dtype=float))[..., None]
    if np.any(r2 == 0):
        raise DomainError("receiver coincides with an array element")
    return np.mean(1.0 / r2, axis=-1)
