"""Complex-baseband channel models: AWGN, Rayleigh and Rician fading.

Samplers draw per-packet (block fading) channel gains and noise; the
closed-form densities, the Jakes Doppler spectrum and the Rician
autocorrelation are exposed for validation against the samplers.

Conventions: a complex channel gain h = h_I + j*h_Q with i.i.d. N(0, sigma^2)
quadratures has Rayleigh-distributed magnitude; adding a line-of-sight
component A*exp(j*theta) makes the magnitude Rician with K = A^2/(2*sigma^2).
Complex AWGN of power spectral density N0 has variance N0/2 per quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, InvalidParameterError
from .rng import RngStream

# Sample values are plain Python complex numbers (re + 1j*im).
ComplexSample = complex


@dataclass(frozen=True)
class AwgnParams:
    """Additive white Gaussian noise with total power spectral density n0."""

    n0: float

    def __post_init__(self):
        if not (self.n0 > 0 and math.isfinite(self.n0)):
            raise InvalidParameterError(f"n0 must be > 0, got {self.n0}")


@dataclass(frozen=True)
class RayleighParams:
    """NLOS fading: per-quadrature std sigma, maximum Doppler shift in Hz."""

    sigma: float
    doppler: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidParameterError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class RicianParams:
    """LOS amplitude/phase plus scattered NLOS power 2*sigma^2."""

    amplitude: float
    sigma: float
    phase: float = 0.0
    doppler: float = 1.0

    def __post_init__(self):
        if not (self.amplitude >= 0 and math.isfinite(self.amplitude)):
            raise InvalidParameterError(f"amplitude must be >= 0, got {self.amplitude}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidParameterError(f"sigma must be > 0, got {self.sigma}")


def sample_awgn(params: AwgnParams, rng: RngStream) -> ComplexSample:
    """One circularly-symmetric complex Gaussian noise sample of power n0."""
    scale = math.sqrt(params.n0 / 2.0)
    re, im = rng.gen.normal(0.0, scale, 2)
    return complex(re, im)


def sample_awgn_batch(params: AwgnParams, n: int, rng: RngStream) -> np.ndarray:
    """Vectorized draw of n AWGN samples as a complex array."""
    scale = math.sqrt(params.n0 / 2.0)
    z = rng.gen.normal(0.0, scale, (2, n))
    return z[0] + 1j * z[1]


def sample_rayleigh_gain(params: RayleighParams, rng: RngStream) -> ComplexSample:
    """One NLOS channel gain h = h_I + j*h_Q, quadratures ~ N(0, sigma^2)."""
    re, im = rng.gen.normal(0.0, params.sigma, 2)
    return complex(re, im)


def sample_rayleigh_gain_batch(params: RayleighParams, n: int, rng: RngStream) -> np.ndarray:
    z = rng.gen.normal(0.0, params.sigma, (2, n))
    return z[0] + 1j * z[1]


def sample_rician_gain(params: RicianParams, rng: RngStream) -> ComplexSample:
    """One gain with a fixed LOS term plus scattered CN(0, 2*sigma^2)."""
    los = params.amplitude * complex(math.cos(params.phase), math.sin(params.phase))
    re, im = rng.gen.normal(0.0, params.sigma, 2)
    return los + complex(re, im)


def sample_rician_gain_batch(params: RicianParams, n: int, rng: RngStream) -> np.ndarray:
    los = params.amplitude * complex(math.cos(params.phase), math.sin(params.phase))
    z = rng.gen.normal(0.0, params.sigma, (2, n))
    return los + z[0] + 1j * z[1]


def rayleigh_pdf(r, sigma: float):
    """Density (r/sigma^2)*exp(-r^2/(2 sigma^2)) of the NLOS gain magnitude.

    Accepts a scalar or array r >= 0.
    """
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be > 0, got {sigma}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("magnitude r must be >= 0")
    s2 = sigma * sigma
    out = (r / s2) * np.exp(-(r * r) / (2.0 * s2))
    return out if out.ndim else float(out)


def rayleigh_cdf(r, sigma: float):
    """Closed-form CDF 1 - exp(-r^2/(2 sigma^2)); KS reference for the sampler."""
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be > 0, got {sigma}")
    r = np.asarray(r, dtype=float)
    out = 1.0 - np.exp(-(r * r) / (2.0 * sigma * sigma))
    return out if out.ndim else float(out)


def rician_pdf(r, params: RicianParams):
    """Density (r/s^2)*exp(-(r^2+A^2)/(2 s^2))*I0(rA/s^2) of the Rician magnitude.

    Evaluated via the exponentially-scaled Bessel i0e so large LOS/magnitude
    arguments do not overflow: the product collapses to
    (r/s^2)*exp(-(r-A)^2/(2 s^2))*i0e(rA/s^2).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("magnitude r must be >= 0")
    a, s2 = params.amplitude, params.sigma * params.sigma
    out = (r / s2) * np.exp(-((r - a) ** 2) / (2.0 * s2)) * special.i0e(r * a / s2)
    return out if out.ndim else float(out)


def jakes_psd(f, doppler: float):
    """Jakes Doppler power spectral density 1/(pi f_D sqrt(1-(f/f_D)^2)).

    Defined only strictly inside the band: |f| < doppler.
    """
    if not (doppler > 0 and math.isfinite(doppler)):
        raise InvalidParameterError(f"doppler must be > 0, got {doppler}")
    f = np.asarray(f, dtype=float)
    if np.any(np.abs(f) >= doppler):
        raise DomainError("jakes_psd is singular/undefined for |f| >= doppler")
    out = 1.0 / (math.pi * doppler * np.sqrt(1.0 - (f / doppler) ** 2))
    return out if out.ndim else float(out)


def rician_autocorrelation(tau, params: RicianParams):
    """Channel autocorrelation A^2 + 2 sigma^2 J0(2 pi f_D tau)."""
    tau = np.asarray(tau, dtype=float)
    a2 = params.amplitude * params.amplitude
    out = a2 + 2.0 * params.sigma**2 * special.j0(2.0 * math.pi * params.doppler * tau)
    return out if out.ndim else float(out)


def k_factor(params: RicianParams) -> float:
    """Rician K = A^2 / (2 sigma^2), the LOS-to-scattered power ratio."""
    return params.amplitude**2 / (2.0 * params.sigma**2)


def apply_channel(x: ComplexSample, h: ComplexSample, n: ComplexSample) -> ComplexSample:
    """Received sample y = h*x + n."""
    return h * x + n


def estimate_k_moments(magnitudes: np.ndarray) -> float:
    """Moment-based K estimate from gain magnitudes.

    Uses m2 = E[r^2], m4 = E[r^4]: A^2 = sqrt(2 m2^2 - m4) and
    2 sigma^2 = m2 - A^2, hence K = A^2 / (m2 - A^2).
    """
    r2 = np.asarray(magnitudes, dtype=float) ** 2
    m2 = r2.mean()
    m4 = (r2 * r2).mean()
    disc = 2.0 * m2 * m2 - m4
    if disc <= 0:
        return 0.0
    a2 = math.sqrt(disc)
    scattered = m2 - a2
    if scattered <= 0:
        return math.inf
    return a2 / scattered
