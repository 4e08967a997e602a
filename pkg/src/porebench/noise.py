"""Four-component current-noise PSD model and colored-noise synthesis.

The one-sided PSD is the sum of flicker, electrode, thermal, and
dielectric terms.  Realizations are produced by shaping white Gaussian
noise in the frequency domain and rescaling the result so its empirical
RMS matches the requested target exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .physics import PhysicalConstants, PhysicsDomainError, PoreGeometry


@dataclass(frozen=True)
class NoiseParams:
    """Noise-model coefficients (SiNx-pore typical values).

    hooge                : dimensionless Hooge parameter
    flicker_exponent     : frequency exponent of the flicker term
    electrode_coefficient: A^2
    electrode_exponent   : frequency exponent of the electrode term
    dielectric_loss      : dimensionless loss factor
    chip_capacitance     : F
    """

    hooge: float = 1.9e-4
    flicker_exponent: float = 1.0
    electrode_coefficient: float = 2e-24
    electrode_exponent: float = 1.5
    dielectric_loss: float = 0.27
    chip_capacitance: float = 52e-9

    def __post_init__(self):
        fields = (self.hooge, self.electrode_coefficient,
                  self.dielectric_loss, self.chip_capacitance)
        if any(v < 0 for v in fields):
            raise ValueError("noise coefficients must be non-negative")
        if self.flicker_exponent <= 0 or self.electrode_exponent <= 0:
            raise ValueError("frequency exponents must be > 0")


@dataclass(frozen=True)
class NoisePsdModel:
    """Fully parameterized one-sided PSD with an amplitude scale factor.

    scale multiplies the time-domain realization (so the effective PSD is
    scale^2 * S_I); it is how a target SNR is dialed in.
    """

    params: NoiseParams
    open_pore_current: float  # A
    resistance: float         # ohm
    carrier_count: float      # dimensionless
    temperature: float = 300.0
    bandwidth: float = 5_000.0  # Hz
    scale: float = 1.0
    boltzmann: float = PhysicalConstants().boltzmann

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be > 0")
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if self.carrier_count <= 0:
            raise ValueError("carrier_count must be > 0")


def carrier_count(geometry: PoreGeometry, salt_concentration: float,
                  constants: PhysicalConstants = PhysicalConstants()) -> float:
    """Total number of conducting carriers inside the pore.

    N_c = (1/2) pi d_p^2 h c0 N_A
    """
    return (0.5 * math.pi * geometry.diameter ** 2 * geometry.thickness
            * salt_concentration * constants.avogadro)


def psd_total(f, model: NoisePsdModel):
    """Sum of the four PSD components at frequency f (Hz), A^2/Hz.

    Vectorized over f; f must be strictly positive (the 1/f terms
    diverge at DC).
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise PhysicsDomainError("PSD is defined for f > 0 only")
    p = model.params
    kb = model.boltzmann
    s_flicker = (p.hooge * model.open_pore_current ** 2
                 / (model.carrier_count * f ** p.flicker_exponent))
    s_electrode = p.electrode_coefficient / f ** p.electrode_exponent
    s_thermal = 4.0 * kb * model.temperature / model.resistance
    s_dielectric = (8.0 * math.pi * kb * model.temperature
                    * p.dielectric_loss * p.chip_capacitance * f)
    return s_flicker + s_electrode + s_thermal + s_dielectric


def model_rms(model: NoisePsdModel, f_min: float) -> float:
    """Unscaled noise RMS: sqrt of the PSD integral over [f_min, bandwidth].

    f_min is 1/trace_duration for a finite trace.  Quadrature relative
    tolerance 1e-6.
    """
    if f_min <= 0:
        raise PhysicsDomainError("f_min must be > 0")
    if f_min >= model.bandwidth:
        raise PhysicsDomainError("f_min must lie below the bandwidth")
    power, _ = integrate.quad(lambda f: psd_total(f, model), f_min,
                              model.bandwidth, epsabs=0.0, epsrel=1e-6,
                              limit=200)
    return math.sqrt(power)


def snr_scale_factor(amplitude: float, target_snr: float,
                     unscaled_rms: float) -> float:
    """Amplitude factor making SNR = dI / (6 * scaled RMS) hit the target.

    Peak-to-peak noise is taken as six times the RMS.
    """
    denom = 6.0 * target_snr * unscaled_rms
    if denom <= 0 or amplitude <= 0:
        raise PhysicsDomainError("amplitude, SNR, and RMS must be > 0")
    return amplitude / denom


def synthesize_colored_noise(model: NoisePsdModel, n_samples: int,
                             sample_rate: float,
                             rng: np.random.Generator) -> np.ndarray:
    """Generate one colored Gaussian realization, ampere.

    White Gaussian samples are shaped in the frequency domain by
    sqrt(S_I(f)) per bin (DC zeroed, bins above the model bandwidth
    zeroed), inverse-transformed, then rescaled in two passes so the
    empirical RMS equals scale * model_rms to within 1 ulp.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    target = model.scale * model_rms(model, sample_rate / n_samples)
    white = rng.standard_normal(n_samples)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate)
    gain = np.zeros_like(freqs)
    in_band = (freqs > 0) & (freqs <= model.bandwidth)
    gain[in_band] = np.sqrt(psd_total(freqs[in_band], model))
    samples = np.fft.irfft(spectrum * gain, n=n_samples)
    if target == 0.0 or not np.any(samples):
        warnings.warn("noise realization is identically zero", stacklevel=2)
        return np.zeros(n_samples)
    # two fixed-point passes pin the empirical RMS to the target
    for _ in range(2):
        rms = math.sqrt(np.mean(samples ** 2))
        samples = samples * (target / rms)
    return samples
