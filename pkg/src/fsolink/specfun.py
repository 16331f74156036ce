"""Complementary error function, Q-function, and the two tail approximations
used inside the average error-rate integrals.

All functions are pure and accept scalars or numpy arrays.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy import special

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_NEG_BRANCH_RATE = 2.0 * math.pi / math.sqrt(6.0)


class ErfcApproxKind(enum.Enum):
    """Which evaluation of erfc an expression uses."""

    EXACT = "exact"
    PIECEWISE_TIGHT = "piecewise_tight"
    SIMPLE_TAIL = "simple_tail"


def erfc(z):
    """erfc(z) = (2/sqrt(pi)) * integral of exp(-t^2) from z to infinity."""
    if np.isscalar(z):
        return math.erfc(z)
    return special.erfc(z)


def q_function(z):
    """Gaussian tail probability Q(z) = erfc(z / sqrt(2)) / 2."""
    if np.isscalar(z):
        return 0.5 * math.erfc(z / math.sqrt(2.0))
    return 0.5 * special.erfc(np.asarray(z) / math.sqrt(2.0))


def erfc_piecewise_approx(z):
    """Two-branch erfc approximation, tight in both tails.

    For z >= 0:  (2/sqrt(pi)) exp(-z^2) / (z + sqrt(z^2 + 4/pi)).
    For z < 0:   1 + (exp(-2 pi z / sqrt(6)) - 1) / (exp(-2 pi z / sqrt(6)) + 1),
    i.e. 2 / (1 + exp(2 pi z / sqrt(6))), which avoids overflow for large -z.
    Both branches evaluate to exactly 1 at z = 0.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    pos = z >= 0.0
    zp = z[pos]
    out[pos] = _TWO_OVER_SQRT_PI * np.exp(-zp * zp) / (zp + np.sqrt(zp * zp + 4.0 / math.pi))
    zn = z[~pos]
    out[~pos] = 2.0 / (1.0 + np.exp(_NEG_BRANCH_RATE * zn))
    return out[0] if scalar else out


def erfc_simple_tail(z):
    """One-term asymptotic erfc(z) ~ exp(-z^2) / (z sqrt(pi)), valid only for z > 0.

    Raises ValueError for z <= 0: the form diverges at 0 and is meaningless
    for negative arguments.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise ValueError("erfc_simple_tail requires z > 0")
    out = np.exp(-z * z) / (z * math.sqrt(math.pi))
    return float(out) if out.ndim == 0 else out
