"""Adaptive 1-D integration on finite and semi-infinite intervals, plus
monotone-curve root finding.

Backed by QUADPACK (scipy.integrate.quad, a Gauss-Kronrod adaptive rule) and
scipy.optimize.brentq, wrapped behind error-reporting contracts used by the
error-rate integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _si
from scipy import optimize as _so


class QuadratureError(RuntimeError):
    """Integration did not converge; carries the best estimate so far."""

    def __init__(self, message, value=math.nan, error_estimate=math.inf):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class BracketError(ValueError):
    """The supplied interval does not bracket the target value."""


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000
    split_points: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0.0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        pts = tuple(float(p) for p in self.split_points)
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("split_points must be strictly increasing")
        object.__setattr__(self, "split_points", pts)


def _quad_piece(f, lo, hi, spec):
    value, err, info, *rest = _si.quad(
        f,
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=True,
    )
    if rest:
        # QUADPACK reported a failure message
        msg = rest[0]
        raise QuadratureError(msg, value=value, error_estimate=err)
    if math.isnan(value):
        raise QuadratureError("integrand produced NaN", value=value, error_estimate=err)
    return value, err


def integrate(f, lo, hi, spec=None):
    """Integrate f over [lo, hi], hi may be +inf.

    Splits the domain at spec.split_points lying strictly inside (lo, hi),
    so integrand breakpoints (e.g. a piecewise kink) land on panel edges.
    Returns (value, error_estimate); raises QuadratureError on
    non-convergence or NaN.
    """
    if spec is None:
        spec = QuadratureSpec()
    edges = [lo]
    for p in spec.split_points:
        if lo < p < hi:
            edges.append(p)
    edges.append(hi)
    total = 0.0
    total_err = 0.0
    for a, b in zip(edges, edges[1:]):
        v, e = _quad_piece(f, a, b, spec)
        total += v
        total_err += e
    return total, total_err


def find_crossing(curve, target, lo, hi, tol=1e-4):
    """Locate x in [lo, hi] with curve(x) = target for a continuous monotone curve.

    tol is in the x domain. Raises BracketError when curve(lo), curve(hi)
    do not bracket the target.
    """
    if not (lo < hi):
        raise BracketError("lo must be < hi")
    f_lo = curve(lo) - target
    f_hi = curve(hi) - target
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(
            f"target {target} not bracketed on [{lo}, {hi}]: "
            f"curve endpoints {f_lo + target}, {f_hi + target}"
        )
    return float(_so.brentq(lambda x: curve(x) - target, lo, hi, xtol=tol))
