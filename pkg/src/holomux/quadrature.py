"""Batched adaptive Gauss-Kronrod quadrature.

Many independent integrals are refined together: every live panel of every
integral is evaluated in one vectorized call per refinement round. A panel
is frozen once its Kronrod-Gauss difference falls below its share of the
owner's relative tolerance (share proportional to panel width); otherwise it
is bisected. Integrands must be finite on the closed panels.
"""

import numpy as np

from .errors import NumericError

__all__ = ["MAX_PANELS", "gauss_kronrod_batch"]

MAX_PANELS = 2**18

# 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
_GAUSS = np.zeros(15)
_GAUSS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


def gauss_kronrod_batch(func, a, b, owner=None, n_owners=None, rtol=1e-10,
                        atol=0.0, max_panels=MAX_PANELS):
    """Integrate a family of integrands over their own intervals.

    Parameters
    ----------
    func : callable
        ``func(x, idx)`` returns integrand values at points ``x`` for the
        integrals indexed by ``idx`` (both arrays of the same shape).
    a, b : array_like
        Initial panel endpoints, one entry per panel.
    owner : array_like of int, optional
        Integral index each initial panel belongs to. Defaults to one panel
        per integral.
    n_owners : int, optional
        Number of integrals; defaults to ``owner.max() + 1``.
    rtol, atol : float
        Target ``err <= max(atol, rtol * |I|)`` per integral.
    max_panels : int
        Panel budget per integral.

    Returns
    -------
    values, errors : ndarray
        Integral estimates and the summed Kronrod-Gauss error estimates.

    Raises
    ------
    NumericError
        When an integral exhausts its panel budget. ``best_estimate``
        carries the full value array at that point.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if owner is None:
        owner = np.arange(a.size)
    owner = np.atleast_1d(np.asarray(owner, dtype=np.intp))
    if n_owners is None:
        n_owners = int(owner.max()) + 1 if owner.size else 0

    width_total = np.zeros(n_owners)
    np.add.at(width_total, owner, np.abs(b - a))
    width_total[width_total == 0.0] = 1.0

    values = np.zeros(n_owners)
    errors = np.zeros(n_owners)
    panels = np.zeros(n_owners, dtype=np.intp)
    np.add.at(panels, owner, 1)

    while a.size:
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        x = mid[:, None] + half[:, None] * _NODES
        fx = func(x, np.broadcast_to(owner[:, None], x.shape))
        kron = half * (fx @ _KRONROD)
        err = np.abs(kron - half * (fx @ _GAUSS))

        # Current owner-level estimate: frozen part plus every live panel.
        live = np.zeros(n_owners)
        np.add.at(live, owner, kron)
        estimate = np.abs(values + live)
        budget = np.maximum(atol, rtol * estimate[owner])
        share = budget * np.abs(b - a) / width_total[owner]
        done = err <= share

        np.add.at(values, owner[done], kron[done])
        np.add.at(errors, owner[done], err[done])

        keep = ~done
        a, b, mid, owner = a[keep], b[keep], mid[keep], owner[keep]
        if not a.size:
            break
        np.add.at(panels, owner, 1)
        if np.any(panels > max_panels):
            bad = np.unique(owner[panels[owner] > max_panels])
            best = values.copy()
            np.add.at(best, owner, kron[keep])
            raise NumericError(
                f"quadrature did not converge within {max_panels} panels "
                f"for {bad.size} integral(s)",
                best_estimate=best,
                diagnostics={"owners": bad.tolist()},
            )
        a = np.concatenate([a, mid])
        b = np.concatenate([mid, b])
        owner = np.concatenate([owner, owner])

    return values, errors
