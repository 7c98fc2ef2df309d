"""Elementwise math that works on numpy arrays and on mpmath scalars.

The closed forms are written once against this namespace so that the
oracle tests can replay them in multiprecision without a second copy.
"""

from types import SimpleNamespace

import mpmath
import numpy as np

_NUMPY = SimpleNamespace(
    name="numpy",
    sin=np.sin,
    cos=np.cos,
    sqrt=np.sqrt,
    hypot=np.hypot,
    atan2=np.arctan2,
    acos=np.arccos,
    pi=np.pi,
    asarray=lambda v: np.asarray(v, dtype=float),
)

_MPMATH = SimpleNamespace(
    name="mpmath",
    sin=mpmath.sin,
    cos=mpmath.cos,
    sqrt=mpmath.sqrt,
    hypot=mpmath.hypot,
    atan2=mpmath.atan2,
    acos=mpmath.acos,
    pi=mpmath.pi,
    asarray=mpmath.mpf,
)


def is_mp(value):
    return isinstance(value, (mpmath.mpf, mpmath.ctx_mp_python.mpf))


def ops(*values):
    """Pick the mpmath namespace if any argument is an ``mpf``."""
    for v in values:
        if is_mp(v) or (isinstance(v, np.ndarray) and v.dtype == object):
            return _MPMATH
    return _NUMPY
