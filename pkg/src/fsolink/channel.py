"""Deterministic and stochastic channel gains for an IM/DD free-space optical
link: Beer-Lambert loss, geometric spread, log-normal turbulence, Rayleigh
pointing jitter, the composite gain PDF and moments, SNR definitions, and a
reproducible sampler for Monte Carlo use.

Unit conventions: all lengths in metres internally; the atmospheric
attenuation coefficient is applied directly in the Beer-Lambert exponent with
distance in km (the common per-km tabulated figure); transmit power in watts,
with dBm conversion helpers for the CLI layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import quadrature
from .specfun import erfc


def beer_lambert_loss(sigma_lambda: float, z_km: float) -> float:
    """Atmospheric loss exp(-sigma_lambda * z_km); in (0, 1]."""
    if sigma_lambda < 0.0:
        raise ValueError("attenuation coefficient must be >= 0")
    if z_km <= 0.0:
        raise ValueError("distance must be positive")
    return math.exp(-sigma_lambda * z_km)


def rytov_variance(cn2: float, wavelength: float, z: float) -> float:
    """Scintillation strength 1.23 * Cn2 * (2 pi / lambda)^(7/6) * z^(11/6)."""
    if cn2 <= 0.0 or wavelength <= 0.0 or z <= 0.0:
        raise ValueError("cn2, wavelength and z must be positive")
    k = 2.0 * math.pi / wavelength
    return 1.23 * cn2 * k ** (7.0 / 6.0) * z ** (11.0 / 6.0)


def geometric_spread(a: float, wz: float) -> tuple[float, float]:
    """Fraction of power captured by an aperture of radius a from a Gaussian
    beam of waist wz with zero misalignment.

    Returns (v0, h_g) with v0 = sqrt(pi) a / (sqrt(2) wz) and h_g = erf(v0)^2.
    """
    if a <= 0.0 or wz <= 0.0:
        raise ValueError("aperture radius and beam waist must be positive")
    v0 = math.sqrt(math.pi) * a / (math.sqrt(2.0) * wz)
    h_g = math.erf(v0) ** 2
    return v0, h_g


def equivalent_beam_width_sq(wz: float, v0: float) -> float:
    """Equivalent beam width squared: wz^2 sqrt(pi) erf(v0) / (2 v0 exp(-v0^2))."""
    if wz <= 0.0 or v0 <= 0.0:
        raise ValueError("wz and v0 must be positive")
    return wz * wz * math.sqrt(math.pi) * math.erf(v0) / (2.0 * v0 * math.exp(-v0 * v0))


def pointing_params(wz_hat_sq: float, sigma_s: float, sigma_r2: float) -> tuple[float, float, float]:
    """Pointing-error shape parameters (gamma, kappa, mu).

    gamma = w_hat / (2 sigma_s); kappa normalizes E[Hp^2] to 1;
    mu = sigma_R^2 (gamma^2 + 1).
    """
    if wz_hat_sq <= 0.0 or sigma_s <= 0.0:
        raise ValueError("wz_hat_sq and sigma_s must be positive")
    gamma = math.sqrt(wz_hat_sq) / (2.0 * sigma_s)
    g2 = gamma * gamma
    kappa = math.sqrt((g2 + 2.0) / g2)
    mu = sigma_r2 * (g2 + 1.0)
    return gamma, kappa, mu


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    return 10.0 * math.log10(p_watts) + 30.0


@dataclass(frozen=True)
class LinkGeometry:
    """Deterministic optics and link parameters with derived constants."""

    wavelength: float  # m
    distance_z: float  # m
    divergence_theta: float  # rad
    aperture_radius_a: float  # m
    conversion_alpha: float = 1.0  # W/A
    responsivity_beta: float = 0.5  # A/W
    noise_sigma_n: float = 1e-7  # A
    attenuation_sigma_lambda: float = 0.2208  # per-km coefficient

    def __post_init__(self):
        for name in ("wavelength", "distance_z", "divergence_theta",
                     "aperture_radius_a", "conversion_alpha",
                     "responsivity_beta", "noise_sigma_n"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.attenuation_sigma_lambda < 0.0:
            raise ValueError("attenuation_sigma_lambda must be >= 0")

    @property
    def beam_waist_wz(self) -> float:
        return self.divergence_theta * self.distance_z / 2.0

    @property
    def eta(self) -> float:
        return self.conversion_alpha * self.responsivity_beta

    @property
    def h_l(self) -> float:
        return beer_lambert_loss(self.attenuation_sigma_lambda, self.distance_z / 1000.0)

    @property
    def v0(self) -> float:
        return geometric_spread(self.aperture_radius_a, self.beam_waist_wz)[0]

    @property
    def h_g(self) -> float:
        return geometric_spread(self.aperture_radius_a, self.beam_waist_wz)[1]

    @property
    def wz_hat_sq(self) -> float:
        return equivalent_beam_width_sq(self.beam_waist_wz, self.v0)


@dataclass(frozen=True)
class FadingModel:
    """Stochastic channel parameters and their derived constants.

    sigma2 (the log-variance of the turbulence gain) is identified with the
    Rytov variance, valid in the weak-turbulence regime sigma_R^2 < 1, and
    the log-mean is fixed at -sigma2 so that E[Ha^2] = 1.
    """

    geometry: LinkGeometry
    rytov_var_sigma_r2: float
    jitter_sigma_s: float  # m

    def __post_init__(self):
        if not (0.0 < self.rytov_var_sigma_r2 <= 1.0):
            raise ValueError("rytov variance must lie in (0, 1] for weak turbulence")
        if self.jitter_sigma_s <= 0.0:
            raise ValueError("jitter_sigma_s must be positive")

    @property
    def sigma2(self) -> float:
        return self.rytov_var_sigma_r2

    @property
    def delta(self) -> float:
        return -self.sigma2

    @property
    def gamma(self) -> float:
        return pointing_params(self.geometry.wz_hat_sq, self.jitter_sigma_s,
                               self.rytov_var_sigma_r2)[0]

    @property
    def kappa(self) -> float:
        return pointing_params(self.geometry.wz_hat_sq, self.jitter_sigma_s,
                               self.rytov_var_sigma_r2)[1]

    @property
    def mu(self) -> float:
        return pointing_params(self.geometry.wz_hat_sq, self.jitter_sigma_s,
                               self.rytov_var_sigma_r2)[2]

    @property
    def hg_hl(self) -> float:
        return self.geometry.h_g * self.geometry.h_l

    @property
    def h_hat(self) -> float:
        """Breakpoint h_g h_l kappa exp(-mu) where v changes sign."""
        return self.hg_hl * self.kappa * math.exp(-self.mu)


@dataclass(frozen=True)
class OperatingPoint:
    """Everything an average error-rate computation needs."""

    geometry: LinkGeometry
    fading: FadingModel
    modulation_order_m: int
    transmit_power_p: float  # W

    def __post_init__(self):
        m = self.modulation_order_m
        if m < 2 or (m & (m - 1)) != 0:
            raise ValueError("modulation order must be a power of two >= 2")
        if self.transmit_power_p <= 0.0:
            raise ValueError("transmit power must be positive")
        if self.fading.geometry is not self.geometry and self.fading.geometry != self.geometry:
            raise ValueError("fading model was derived from a different geometry")

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.modulation_order_m))

    def with_power(self, p_watts: float) -> "OperatingPoint":
        return OperatingPoint(self.geometry, self.fading, self.modulation_order_m, p_watts)

    def with_modulation(self, m: int) -> "OperatingPoint":
        return OperatingPoint(self.geometry, self.fading, m, self.transmit_power_p)


def pdf_turbulence(h_a, sigma2: float):
    """Log-normal turbulence density with log-mean -sigma2, log-variance sigma2."""
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    h_a = np.asarray(h_a, dtype=float)
    if np.any(h_a <= 0.0):
        raise ValueError("turbulence gain must be positive")
    out = np.exp(-((np.log(h_a) + sigma2) ** 2) / (2.0 * sigma2)) / (
        h_a * math.sqrt(2.0 * math.pi * sigma2)
    )
    return float(out) if out.ndim == 0 else out


def pdf_pointing(h_p, gamma: float, kappa: float):
    """Pointing-gain density gamma^2 / kappa^gamma^2 * h_p^(gamma^2-1) on [0, kappa]."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    h_p = np.asarray(h_p, dtype=float)
    if np.any(h_p < 0.0):
        raise ValueError("pointing gain must be non-negative")
    g2 = gamma * gamma
    out = np.where(h_p <= kappa, g2 / kappa**g2 * h_p ** (g2 - 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def pdf_composite(h, model: FadingModel):
    """Density of the composite gain H = h_l h_g Ha Hp."""
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0.0):
        raise ValueError("composite gain must be positive")
    g2 = model.gamma**2
    sig2 = model.sigma2
    scale = model.hg_hl * model.kappa
    v = (np.log(h / scale) + model.mu) / math.sqrt(2.0 * sig2)
    # log-space evaluation: the prefactor and h^(g2-1) can individually
    # overflow/underflow for strong pointing collimation
    log_pref = (
        math.log(g2 / 2.0)
        + g2 * model.rytov_var_sigma_r2 * (1.0 + g2 / 2.0)
        - g2 * math.log(scale)
    )
    logh = np.log(h)
    with np.errstate(over="ignore"):
        out = np.exp(log_pref + (g2 - 1.0) * logh) * erfc(v)
    return float(out) if out.ndim == 0 else out


def _composite_transform_constants(model: FadingModel):
    g2 = model.gamma**2
    sig2 = model.sigma2
    h_hat = model.h_hat
    # combined exponent of prefactor * h_hat^gamma^2
    log_amp = -(g2 * g2) * sig2 / 2.0
    return g2, sig2, h_hat, log_amp


def composite_expectation(model: FadingModel, func=None, spec=None,
                          h_cutoff: float | None = None) -> float:
    """E[func(H)] under pdf_composite, via substituted quadrature.

    Splits at h_hat; below it integrates in w = -ln(h / h_hat) against the
    exponential weight, above it in y = ln(h / h_hat) where the density
    weight is a Gaussian bump centered at gamma^2 sigma^2. func defaults to
    1 (normalization). h_cutoff truncates the upper tail when func is known
    to vanish beyond it.
    """
    if func is None:
        func = lambda h: 1.0
    g2, sig2, h_hat, log_amp = _composite_transform_constants(model)
    sqrt2s = math.sqrt(2.0 * sig2)
    amp = math.exp(log_amp)

    # lower piece: h = h_hat exp(-w)
    def f_low(w):
        v = -w / sqrt2s
        return math.exp(-g2 * w) * erfc(v) * func(h_hat * math.exp(-w))

    w_max = 700.0 / g2
    spec_low = quadrature.QuadratureSpec(
        rel_tol=1e-11, abs_tol=1e-300,
        split_points=_low_splits(model, h_cutoff, w_max),
    )
    low, _ = quadrature.integrate(f_low, 0.0, w_max, spec_low)

    # upper piece: h = h_hat exp(y); weight exp(-(y - g2 sig2)^2 / (2 sig2)) erfcx(v)
    y_star = g2 * sig2
    y_up = y_star + 45.0 * math.sqrt(sig2)
    if h_cutoff is not None:
        if h_cutoff <= h_hat:
            return g2 / 2.0 * amp * low
        y_up = min(y_up, math.log(h_cutoff / h_hat))

    def f_high(y):
        v = y / sqrt2s
        return (
            math.exp(-((y - y_star) ** 2) / (2.0 * sig2))
            * special.erfcx(v)
            * func(h_hat * math.exp(y))
        )

    splits = tuple(
        p for p in sorted({max(y_star + k * math.sqrt(sig2), 0.0) for k in (-6, -3, 0, 3, 6)})
        if 0.0 < p < y_up
    )
    spec_high = quadrature.QuadratureSpec(rel_tol=1e-11, abs_tol=1e-300, split_points=splits)
    high, _ = quadrature.integrate(f_high, 0.0, y_up, spec_high)

    # the Gaussian-bump form of the high piece already absorbed the
    # log-amplitude via completing the square
    return g2 / 2.0 * (amp * low + high)


def _low_splits(model: FadingModel, h_cutoff, w_max):
    """Split near the onset of func decay when a cutoff scale is known."""
    if h_cutoff is None or h_cutoff <= 0:
        return ()
    h_hat = model.h_hat
    if h_cutoff >= h_hat:
        return ()
    w_c = math.log(h_hat / h_cutoff)
    return tuple(p for p in (w_c / 2.0, w_c, min(2.0 * w_c, w_max * 0.999)) if 0.0 < p < w_max)


def moment_composite(model: FadingModel, order: int) -> float:
    """Closed-form first or second moment of the composite gain."""
    g2 = model.gamma**2
    if order == 1:
        return (
            model.hg_hl
            * math.exp(-model.sigma2 / 2.0)
            * model.kappa * g2 / (g2 + 1.0)
        )
    if order == 2:
        return model.hg_hl**2
    raise ValueError("order must be 1 or 2")


def sample_composite(model: FadingModel, rng: np.random.Generator, size=None):
    """Draw composite gains h_l h_g Ha Hp.

    Ha is log-normal with log-mean -sigma2; the radial displacement is
    Rayleigh(sigma_s) via inverse CDF from a single uniform, and
    Hp = kappa exp(-2 R^2 / w_hat^2).
    """
    sig = math.sqrt(model.sigma2)
    h_a = rng.lognormal(mean=model.delta, sigma=sig, size=size)
    u = 1.0 - rng.random(size=size)  # in (0, 1]
    r_sq = -2.0 * model.jitter_sigma_s**2 * np.log(u)
    h_p = model.kappa * np.exp(-2.0 * r_sq / model.geometry.wz_hat_sq)
    return model.hg_hl * h_a * h_p


def mean_symbol_power_sq(modulation_order_m: int, p_watts: float) -> float:
    """E[X^2] over uniform M-PAM levels {j 2P/(M-1)}: 2 P^2 (2M-1) / (3(M-1))."""
    m = modulation_order_m
    return 2.0 * p_watts**2 * (2.0 * m - 1.0) / (3.0 * (m - 1.0))


def snr_electrical(op: OperatingPoint) -> float:
    """Average received electrical SNR in dB."""
    geo = op.geometry
    ex2 = mean_symbol_power_sq(op.modulation_order_m, op.transmit_power_p)
    eh2 = moment_composite(op.fading, 2)
    return 10.0 * math.log10(geo.eta**2 * ex2 * eh2 / geo.noise_sigma_n**2)


def snr_optical(op: OperatingPoint) -> float:
    """Average received optical SNR in dB: detector signal photocurrent over
    the noise standard deviation (an amplitude-like ratio, reported as
    10 log10 of the ratio itself)."""
    geo = op.geometry
    ratio = geo.eta * op.transmit_power_p * moment_composite(op.fading, 1) / geo.noise_sigma_n
    return 10.0 * math.log10(ratio)
