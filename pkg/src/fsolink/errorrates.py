"""Conditional and average BER/SER expressions for M-PAM over the composite
fading channel: the exact averages, the piecewise-erfc and single-tail
approximations, the dense-constellation forms, and the threshold-gap and
power-step analyses built on top of them.

All averages are one-dimensional integrals after writing the inner Gaussian
tails through erfc (an identity, not an approximation). The integrals are
evaluated in log-gain coordinates split at the breakpoint h_hat, where the
density weight becomes an exponential (below) and a Gaussian bump (above);
this keeps every integrand bounded and smooth for adaptive quadrature. A
nested mode re-computes the inner tails by quadrature for cross-validation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _si
from scipy import special

from . import quadrature
from .channel import OperatingPoint, watts_to_dbm, dbm_to_watts
from .specfun import erfc, q_function

_SQRT_PI = math.sqrt(math.pi)
_FOUR_OVER_PI = 4.0 / math.pi
_NEG_RATE = 2.0 * math.pi / math.sqrt(6.0)

# argument beyond which exp(-x^2) terms are treated as exactly zero
_ARG_CUTOFF = 30.0


class SerExpressionKind(enum.Enum):
    """Which average-SER evaluation path a curve belongs to."""

    EXACT = "exact"
    APPROX_PIECEWISE = "approx_piecewise"
    DENSE = "dense"
    DENSE_HIGH_POWER = "dense_high_power"


# ---------------------------------------------------------------------------
# conditional expressions

def conditional_ser_pam(m_order: int, a_snr: float) -> float:
    """SER of M-PAM at conditional amplitude SNR A: ((M-1)/M) erfc(A / (2 sqrt(2) (M-1)))."""
    if m_order < 2:
        raise ValueError("modulation order must be >= 2")
    return (m_order - 1) / m_order * erfc(a_snr / (2.0 * math.sqrt(2.0) * (m_order - 1)))


def conditional_ber_ook(a_snr: float) -> float:
    """OOK bit error probability: erfc(A / sqrt(8)) / 2."""
    return 0.5 * erfc(a_snr / math.sqrt(8.0))


# signed Q-function sums for the exact Gray-mapped conditional BER
_BER_EXACT_TERMS = {
    8: (12.0, 14.0, ((7, 1), (6, 3), (-1, 5), (1, 9), (-1, 13))),
    16: (32.0, 30.0, ((15, 1), (14, 3), (-1, 5), (5, 9), (4, 11), (-5, 13),
                      (-4, 15), (5, 17), (4, 19), (-3, 21), (-2, 23), (1, 25),
                      (-1, 29))),
}


def conditional_ber_exact(m_order: int, a_snr: float) -> float:
    """Exact Gray-mapped conditional BER for 8-PAM or 16-PAM."""
    if m_order not in _BER_EXACT_TERMS:
        raise ValueError("exact conditional BER is tabulated for M in {8, 16} only")
    denom, scale, terms = _BER_EXACT_TERMS[m_order]
    return sum(c * q_function(k * a_snr / scale) for c, k in terms) / denom


def conditional_ber_approx(m_order: int, a_snr: float) -> float:
    """SER-over-bits conditional BER approximation, tight at high SNR."""
    m_bits = int(math.log2(m_order))
    return conditional_ser_pam(m_order, a_snr) / m_bits


# ---------------------------------------------------------------------------
# integration engine

@dataclass(frozen=True)
class _Params:
    g2: float          # gamma^2
    sig2: float        # log variance
    h_hat: float
    u: float           # eta P / sqrt(2 sigma_n^2)
    log_amp: float     # combined log prefactor exponent: -gamma^4 sigma^2 / 2

    @property
    def sqrt2s(self) -> float:
        return math.sqrt(2.0 * self.sig2)

    @property
    def y_star(self) -> float:
        return self.g2 * self.sig2


def _params(op: OperatingPoint) -> _Params:
    fm = op.fading
    geo = op.geometry
    g2 = fm.gamma**2
    u = geo.eta * op.transmit_power_p / math.sqrt(2.0 * geo.noise_sigma_n**2)
    return _Params(g2=g2, sig2=fm.sigma2, h_hat=fm.h_hat, u=u,
                   log_amp=-(g2 * g2) * fm.sigma2 / 2.0)


def _neg_branch(w_over_sqrt2s: float) -> float:
    """1 + (e^x - 1)/(e^x + 1) with x = 2 pi w / (sqrt(6) sqrt(2 sigma^2)) > 0,
    written overflow-safe; this is the negative-branch erfc weight at v = -w/sqrt(2 sigma^2)."""
    return 2.0 / (1.0 + math.exp(-_NEG_RATE * w_over_sqrt2s))


def _pos_branch_denom(v: float) -> float:
    return v + math.sqrt(v * v + _FOUR_OVER_PI)


def _gauss_tail(x: float) -> float:
    """Independent quadrature of the upper Gaussian tail integral of exp(-t^2)."""
    if x > _ARG_CUTOFF:
        return 0.0
    val, _ = _si.quad(lambda t: math.exp(-t * t), x, math.inf,
                      epsabs=1e-300, epsrel=1e-13, limit=500)
    return val


def _erfc_eval(x: float, nested: bool) -> float:
    if nested:
        return 2.0 / _SQRT_PI * _gauss_tail(x)
    return erfc(x)


def _erfcx_eval(v: float, nested: bool) -> float:
    if not nested:
        return special.erfcx(v)
    if v > 25.0:
        # tail region carries negligible Gaussian-bump weight; one-term form
        return 1.0 / (v * _SQRT_PI)
    return 2.0 / _SQRT_PI * math.exp(v * v) * _gauss_tail(v)


def _integrate_low(par: _Params, f, w_splits=(), rel_tol=1e-11):
    """integral over (0, h_hat] of h^(g2-1) f(w) dh in w = -ln(h/h_hat),
    returned without the h_hat^g2 factor: equals integral of e^(-g2 w) f(w) dw."""
    w_max = 700.0 / par.g2
    splits = tuple(sorted(p for p in w_splits if 0.0 < p < w_max))
    spec = quadrature.QuadratureSpec(rel_tol=rel_tol, abs_tol=1e-300,
                                     max_subdivisions=2000, split_points=splits)
    val, _ = quadrature.integrate(f, 0.0, w_max, spec)
    return val


def _integrate_high(par: _Params, f, y_up, y_splits=(), y_lo=0.0, rel_tol=1e-11):
    if y_up <= y_lo:
        return 0.0
    splits = tuple(sorted(p for p in y_splits if y_lo < p < y_up))
    spec = quadrature.QuadratureSpec(rel_tol=rel_tol, abs_tol=1e-300,
                                     max_subdivisions=2000, split_points=splits)
    val, _ = quadrature.integrate(f, y_lo, y_up, spec)
    return val


def _default_y_splits(par: _Params, extra=()):
    s = math.sqrt(par.sig2)
    base = {par.y_star + k * s for k in (-6, -3, 0, 3, 6)}
    base.update(extra)
    return tuple(p for p in sorted(base) if p > 0.0)


def _low_w_splits(par: _Params, scale: float):
    """Splits around the onset of decay of exp(-(u h / scale)^2) below h_hat."""
    s_hat = par.u * par.h_hat / scale
    if s_hat <= 1.0:
        return ()
    w_c = math.log(s_hat)
    return (w_c / 2.0, w_c, 2.0 * w_c)


def _y_cut(par: _Params, scale: float) -> float:
    """Upper y beyond which exp(-(u h / scale)^2) underflows."""
    s_hat = par.u * par.h_hat / scale
    return math.log(_ARG_CUTOFF / s_hat) if s_hat > 0 else math.inf


# ---------------------------------------------------------------------------
# average expressions

def _avg_conditional_over_pdf(op: OperatingPoint, cond, scale: float,
                              nested: bool = False) -> float:
    """integral of cond(h) * f_H(h) dh; cond decays on the h-scale scale/u."""
    par = _params(op)
    sqrt2s = par.sqrt2s

    def f_low(w):
        v = -w / sqrt2s
        h = par.h_hat * math.exp(-w)
        return math.exp(-par.g2 * w) * _erfc_eval(v, nested) * cond(h)

    low = _integrate_low(par, f_low, w_splits=_low_w_splits(par, scale))

    y_up = min(par.y_star + 45.0 * math.sqrt(par.sig2), _y_cut(par, scale))

    def f_high(y):
        v = y / sqrt2s
        h = par.h_hat * math.exp(y)
        return (math.exp(-((y - par.y_star) ** 2) / (2.0 * par.sig2))
                * _erfcx_eval(v, nested) * cond(h))

    high = _integrate_high(par, f_high, y_up, _default_y_splits(par))
    return par.g2 / 2.0 * (math.exp(par.log_amp) * low + high)


def avg_ser_exact(op: OperatingPoint, nested: bool = False) -> float:
    """Exact average SER for M-PAM over the composite channel."""
    m_order = op.modulation_order_m
    par = _params(op)
    coeff = (m_order - 1) / m_order
    scale = float(m_order - 1)

    def cond(h):
        return coeff * _erfc_eval(par.u * h / scale, nested)

    return _avg_conditional_over_pdf(op, cond, scale, nested=nested)


def avg_ber_ook_exact(op: OperatingPoint, nested: bool = False) -> float:
    """Exact average OOK BER (the M = 2 case of the exact SER)."""
    if op.modulation_order_m != 2:
        raise ValueError("OOK expressions require M = 2")
    return avg_ser_exact(op, nested=nested)


def _avg_ser_piecewise(op: OperatingPoint, scale: float, prefactor: float,
                       high_power_form: bool = False) -> float:
    """Common engine for the piecewise-erfc approximations.

    Evaluates prefactor * [ integral_0^h_hat + integral_h_hat^inf ] with the
    negative-branch weight below h_hat and the rational positive-branch
    weights above, with exp(-(u h / scale)^2) decay in both. The
    high-power form drops the 4/pi guard in the signal factor and carries
    h^(g2-2) instead of h^(g2-1).
    """
    par = _params(op)
    sqrt2s = par.sqrt2s
    u_s = par.u / scale

    def signal_factor(h):
        s = u_s * h
        if s > _ARG_CUTOFF:
            return 0.0
        if high_power_form:
            return math.exp(-s * s)
        return math.exp(-s * s) / _pos_branch_denom(s)

    h_power = -1.0 if high_power_form else 0.0  # extra h exponent vs h^(g2-1)

    def f_low(w):
        h = par.h_hat * math.exp(-w)
        return (math.exp(-(par.g2 + h_power) * w)
                * _neg_branch(w / sqrt2s) * signal_factor(h))

    low = _integrate_low(par, f_low, w_splits=_low_w_splits(par, scale))

    y_up = min(par.y_star + 45.0 * math.sqrt(par.sig2), _y_cut(par, scale))

    def f_high(y):
        v = y / sqrt2s
        h = par.h_hat * math.exp(y)
        return (math.exp(-((y - par.y_star) ** 2) / (2.0 * par.sig2) + h_power * y)
                / _pos_branch_denom(v) * signal_factor(h))

    high = _integrate_high(par, f_high, y_up, _default_y_splits(par))

    amp = math.exp(par.log_amp)
    h_hat_extra = par.h_hat ** h_power
    return prefactor * h_hat_extra * (amp * low + 2.0 / _SQRT_PI * high)


def avg_ser_approx(op: OperatingPoint) -> float:
    """Piecewise-erfc approximation of the average SER (two 1-D integrals)."""
    m_order = op.modulation_order_m
    par = _params(op)
    prefactor = (m_order - 1) * par.g2 / (m_order * _SQRT_PI)
    return _avg_ser_piecewise(op, scale=float(m_order - 1), prefactor=prefactor)


def avg_ber_ook_approx_piecewise(op: OperatingPoint) -> float:
    """Piecewise-erfc approximation of the average OOK BER."""
    if op.modulation_order_m != 2:
        raise ValueError("OOK expressions require M = 2")
    par = _params(op)
    prefactor = par.g2 / (2.0 * _SQRT_PI)
    return _avg_ser_piecewise(op, scale=1.0, prefactor=prefactor)


def avg_ser_dense(op: OperatingPoint) -> float:
    """Dense-constellation SER approximation (M - 1 replaced by M)."""
    par = _params(op)
    prefactor = par.g2 / _SQRT_PI
    return _avg_ser_piecewise(op, scale=float(op.modulation_order_m),
                              prefactor=prefactor)


def avg_ser_dense_highpower(op: OperatingPoint) -> float:
    """Dense-constellation SER at high transmit power (4/pi guard dropped)."""
    par = _params(op)
    if par.g2 <= 1.0:
        raise ValueError("high-power dense form requires gamma^2 > 1")
    m_order = op.modulation_order_m
    prefactor = m_order * par.g2 / (2.0 * par.u * _SQRT_PI)
    return _avg_ser_piecewise(op, scale=float(m_order), prefactor=prefactor,
                              high_power_form=True)


def avg_ber_ook_approx_simple(op: OperatingPoint) -> float:
    """Single-integral OOK BER approximation using the one-term erfc tail.

    The integrand carries a 1/(ln(h/(hg hl kappa)) + mu) factor that blows up
    at h_hat; integration starts at h_hat (1 + 1e-12), the excluded sliver
    being numerically negligible.
    """
    if op.modulation_order_m != 2:
        raise ValueError("OOK expressions require M = 2")
    par = _params(op)
    fm = op.fading
    geo = op.geometry
    sigma_r = math.sqrt(fm.rytov_var_sigma_r2)
    # sigma_n / (eta P) = 1 / (sqrt(2) u)
    prefactor = (par.g2 * sigma_r
                 / (2.0 * math.sqrt(2.0) * math.pi * par.u * par.h_hat))

    y_lo = math.log1p(1e-12)
    y_up = min(par.y_star + 45.0 * math.sqrt(par.sig2), _y_cut(par, 1.0))

    def f(y):
        s = par.u * par.h_hat * math.exp(y)
        if s > _ARG_CUTOFF:
            return 0.0
        return (math.exp(-((y - par.y_star) ** 2) / (2.0 * par.sig2) - y - s * s)
                / y)

    # geometric ladder resolves the truncated logarithmic end-point blow-up
    ladder = tuple(10.0**k for k in range(-10, 0, 2))
    val = _integrate_high(par, f, y_up, _default_y_splits(par, extra=ladder),
                          y_lo=y_lo)
    _ = geo  # geometry enters through u and h_hat only
    return prefactor * val


def avg_ber_mpam(op: OperatingPoint, mode: str = "ser-over-m",
                 approx: bool = False) -> float:
    """Average M-PAM BER.

    mode "exact-for-8-16" integrates the signed Q-sum conditional BER
    (M in {8, 16}); mode "ser-over-m" divides the average SER by the bits
    per symbol (approx selects the piecewise SER approximation).
    """
    m_order = op.modulation_order_m
    m_bits = op.bits_per_symbol
    if mode == "exact-for-8-16":
        if m_order == 2:
            return avg_ber_ook_exact(op)
        if m_order not in _BER_EXACT_TERMS:
            raise ValueError("exact BER mode supports M in {2, 8, 16}")
        par = _params(op)
        sqrt8 = math.sqrt(8.0)

        def cond(h):
            return conditional_ber_exact(m_order, sqrt8 * par.u * h)

        # dominant Q term decays on the same scale as the SER
        return _avg_conditional_over_pdf(op, cond, float(m_order - 1))
    if mode == "ser-over-m":
        ser = avg_ser_approx(op) if approx else avg_ser_exact(op)
        return ser / m_bits
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# curves and threshold analyses

@dataclass
class ErrorRateCurve:
    """Sampled error-rate curve in dBm, with an optional exact evaluator for
    crossing refinement."""

    p_dbm: list[float]
    values: list[float]
    kind: str = ""
    metadata: dict = field(default_factory=dict)
    evaluator: object = None  # callable p_dbm -> value, optional

    def __post_init__(self):
        if len(self.p_dbm) != len(self.values):
            raise ValueError("p_dbm and values must have equal length")
        if any(b <= a for a, b in zip(self.p_dbm, self.p_dbm[1:])):
            raise ValueError("p_dbm must be strictly increasing")


def sweep_curve(op: OperatingPoint, expression, p_dbm_grid, kind="") -> ErrorRateCurve:
    """Evaluate expression(op_at_power) over a dBm grid."""
    def evaluator(p_dbm):
        return expression(op.with_power(dbm_to_watts(p_dbm)))

    values = [evaluator(p) for p in p_dbm_grid]
    return ErrorRateCurve(list(p_dbm_grid), values, kind=kind,
                          metadata={"M": op.modulation_order_m},
                          evaluator=evaluator)


class NoCrossingError(ValueError):
    """The curve does not cross the requested threshold in its power range."""


def crossing_power(curve: ErrorRateCurve, threshold: float, tol: float = 1e-4) -> float:
    """Power (dBm) at which the curve crosses the threshold, refined on
    log10(value) via the evaluator when available, else linear interpolation."""
    logs = [math.log10(v) if v > 0.0 else -math.inf for v in curve.values]
    lt = math.log10(threshold)
    for i in range(len(logs) - 1):
        a, b = logs[i], logs[i + 1]
        if (a - lt) == 0.0:
            return curve.p_dbm[i]
        if (a - lt) * (b - lt) < 0.0 or (b - lt) == 0.0:
            p_a, p_b = curve.p_dbm[i], curve.p_dbm[i + 1]
            if curve.evaluator is not None:
                return quadrature.find_crossing(
                    lambda p: math.log10(curve.evaluator(p)), lt, p_a, p_b, tol=tol)
            return p_a + (p_b - p_a) * (lt - a) / (b - a)
    raise NoCrossingError(f"threshold {threshold} not crossed on "
                          f"[{curve.p_dbm[0]}, {curve.p_dbm[-1]}] dBm")


def delta_gap(exact: ErrorRateCurve, approx: ErrorRateCurve, threshold: float) -> float:
    """Horizontal dB gap between an approximation and the exact curve at a
    threshold: P*_approx - P*_exact."""
    return crossing_power(approx, threshold) - crossing_power(exact, threshold)


def _power_at_target(op: OperatingPoint, expression, target: float,
                     p_lo_dbm: float = -40.0, p_hi_dbm: float = 60.0,
                     step_dbm: float = 2.0) -> float:
    """Power (dBm) where expression(op) reaches target, scanning a coarse
    grid for a bracket then refining on log10."""
    def curve(p_dbm):
        return math.log10(expression(op.with_power(dbm_to_watts(p_dbm))))

    lt = math.log10(target)
    p = p_lo_dbm
    prev_p, prev_v = None, None
    while p <= p_hi_dbm + 1e-9:
        v = curve(p)
        if prev_v is not None and (prev_v - lt) * (v - lt) <= 0.0:
            return quadrature.find_crossing(curve, lt, prev_p, p, tol=1e-5)
        prev_p, prev_v = p, v
        p += step_dbm
    raise NoCrossingError(f"target {target} not reached in [{p_lo_dbm}, {p_hi_dbm}] dBm")


def power_increase_for_next_bit(op: OperatingPoint, m_bits: int, target_ser: float,
                                expression=avg_ser_exact) -> float:
    """Extra power (dB) to go from 2^m-PAM to 2^(m+1)-PAM at the same SER."""
    if m_bits < 1:
        raise ValueError("m_bits must be >= 1")
    if not (0.0 < target_ser < 0.5):
        raise ValueError("target_ser must lie in (0, 0.5)")
    p1 = _power_at_target(op.with_modulation(2**m_bits), expression, target_ser)
    p2 = _power_at_target(op.with_modulation(2**(m_bits + 1)), expression, target_ser)
    return p2 - p1
