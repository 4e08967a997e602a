"""Trace composition: baseline + events + perturbations + colored noise.

A trace is built deterministically from a master seed and a trace index.
The clean companion contains everything deterministic-or-baseline (open
pore level, event triangles, baseline jumps, slow drift); the noisy trace
adds the colored-noise realization on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import events as ev
from . import noise as ns
from . import physics as ph

#: sub-stream ids for per-trace seed derivation
STREAM_EVENTS = 0
STREAM_NOISE = 1
STREAM_JUMPS = 2
STREAM_DRIFT = 3

#: identifier of the seed-derivation scheme, recorded in manifests
SEED_DERIVATION_ID = "seedseq(master_seed, trace_index, stream)"


class GenerationError(RuntimeError):
    """Raised when an assembled trace violates a generation invariant."""


def derive_rng(master_seed: int, trace_index: int,
               stream: int) -> np.random.Generator:
    """Deterministic per-trace, per-component RNG.

    Built from SeedSequence((master_seed, trace_index, stream)) so traces
    can be generated in parallel in any order without changing output.
    """
    return np.random.default_rng(
        np.random.SeedSequence((master_seed, trace_index, stream)))


@dataclass(frozen=True)
class BaselineDriftParams:
    """Slow 8-harmonic fluctuation plus sudden baseline jumps.

    harmonic_sds are the standard deviations of the four sine and four
    cosine coefficients.  Jump heights are 0.3 * dI with +-10% jitter;
    jump count over 10 s is Poisson with the stated expectation.
    """

    slow_amplitude: float = 0.003
    sine_sds: tuple = (0.5, 0.5, 0.1, 0.05)
    cosine_sds: tuple = (0.5, 0.5, 0.1, 0.05)
    jump_height_fraction: float = 0.3
    jump_jitter: float = 0.1
    expected_jumps_per_10s: float = 30.0

    def __post_init__(self):
        if self.slow_amplitude < 0 or self.jump_height_fraction < 0:
            raise ValueError("drift amplitudes must be non-negative")
        if self.jump_jitter < 0 or self.expected_jumps_per_10s < 0:
            raise ValueError("jump parameters must be non-negative")


@dataclass
class Trace:
    """Finished trace: noisy samples, clean companion, and ground truth."""

    sample_rate: float
    noisy: np.ndarray                 # A
    clean: np.ndarray                 # A
    events: list[ev.SpikeEvent]
    provenance: dict[str, Any] = field(default_factory=dict)


def slow_fluctuation(i0: float, drift: BaselineDriftParams, n_samples: int,
                     sample_rate: float, rng: np.random.Generator,
                     coefficients: tuple | None = None) -> np.ndarray:
    """Slow baseline drift: a0*I0 * sum of 4 sines and 4 cosines.

    The fundamental period equals the trace length.  Coefficients are
    zero-mean normal draws with the configured standard deviations unless
    given explicitly (handy for tests).
    """
    t = np.arange(n_samples) / sample_rate
    trace_seconds = n_samples / sample_rate
    omega = 2.0 * math.pi / trace_seconds
    if coefficients is None:
        a = rng.normal(0.0, drift.sine_sds)
        b = rng.normal(0.0, drift.cosine_sds)
    else:
        a = np.asarray(coefficients[0], dtype=float)
        b = np.asarray(coefficients[1], dtype=float)
    out = np.zeros(n_samples)
    for k in range(4):
        out += a[k] * np.sin((k + 1) * omega * t)
        out += b[k] * np.cos((k + 1) * omega * t)
    return drift.slow_amplitude * i0 * out


def sample_baseline_jumps(amplitude: float, drift: BaselineDriftParams,
                          n_samples: int, sample_rate: float,
                          rng: np.random.Generator) -> np.ndarray:
    """Cumulative step sequence of sudden baseline jumps.

    Jump count ~ Poisson(expectation * trace_seconds / 10); instants
    uniform; each step has height 0.3*dI*(1+u), u ~ U(-0.1, 0.1), with
    alternating sign starting from a seed-determined one.
    """
    trace_seconds = n_samples / sample_rate
    mean_count = drift.expected_jumps_per_10s * trace_seconds / 10.0
    if mean_count == 0:
        return np.zeros(n_samples)
    count = rng.poisson(mean_count)
    out = np.zeros(n_samples)
    if count == 0:
        return out
    instants = np.sort(rng.integers(0, n_samples, size=count))
    jitter = rng.uniform(-drift.jump_jitter, drift.jump_jitter, size=count)
    first_sign = 1.0 if rng.random() < 0.5 else -1.0
    signs = first_sign * (-1.0) ** np.arange(count)
    heights = signs * drift.jump_height_fraction * amplitude * (1.0 + jitter)
    for pos, h in zip(instants, heights):
        out[pos:] += h
    return out


@dataclass(frozen=True)
class TraceConfig:
    """Everything needed to generate one trace deterministically."""

    geometry: ph.PoreGeometry = ph.PoreGeometry()
    electrolyte: ph.ElectrolyteConfig = ph.ElectrolyteConfig()
    bias: ph.BiasConfig = ph.BiasConfig()
    constants: ph.PhysicalConstants = ph.PhysicalConstants()
    noise_params: ns.NoiseParams = ns.NoiseParams()
    drift: BaselineDriftParams = BaselineDriftParams()
    sphere_diameter: float = 10e-9          # m
    concentration: float = 0.1              # nmol/L
    event_duration: float = 1e-3            # s
    probability_coefficient: float = 9.1e-8  # 1/(nmol/L)
    snr: float = 4.0
    trace_seconds: float = 10.0
    sample_rate: float = 10_000.0
    bandwidth: float = 5_000.0

    def __post_init__(self):
        if self.snr <= 0:
            raise ValueError("snr must be > 0")
        if self.trace_seconds <= 0:
            raise ValueError("trace_seconds must be > 0")


def assemble_trace(config: TraceConfig, master_seed: int,
                   trace_index: int = 0) -> Trace:
    """Generate one complete labeled trace.

    clean = I0 - event deficits + jumps + slow drift; noisy = clean +
    colored noise scaled so dI / (6 * noise RMS) equals the nominal SNR.
    """
    sampling = ev.SamplingConfig(config.sample_rate)
    n_samples = round(config.trace_seconds * config.sample_rate)

    pore = ph.open_pore_current(config.geometry, config.electrolyte,
                                config.bias, config.constants)
    i0 = pore.open_pore_current
    amplitude = ph.blockage_amplitude(i0, config.sphere_diameter,
                                      config.geometry.diameter)

    params = ev.TranslocationParams(
        sphere_diameter=config.sphere_diameter,
        concentration=config.concentration,
        duration=config.event_duration,
        probability_coefficient=config.probability_coefficient)
    probability, clamped = ev.spike_probability(params, config.bias,
                                                config.constants)
    starts = ev.sample_event_starts(
        probability, n_samples, config.event_duration, sampling,
        derive_rng(master_seed, trace_index, STREAM_EVENTS))
    spike_events = ev.make_events(starts, config.event_duration, amplitude,
                                  config.sphere_diameter, sampling)

    clean = np.full(n_samples, i0)
    ev.add_event_deficits(clean, spike_events, sampling)
    clean += sample_baseline_jumps(
        amplitude, config.drift, n_samples, config.sample_rate,
        derive_rng(master_seed, trace_index, STREAM_JUMPS))
    clean += slow_fluctuation(
        i0, config.drift, n_samples, config.sample_rate,
        derive_rng(master_seed, trace_index, STREAM_DRIFT))

    model = ns.NoisePsdModel(
        params=config.noise_params, open_pore_current=i0,
        resistance=pore.resistance,
        carrier_count=ns.carrier_count(config.geometry,
                                       config.electrolyte.salt_concentration,
                                       config.constants),
        temperature=config.bias.temperature, bandwidth=config.bandwidth)
    unscaled_rms = ns.model_rms(model, 1.0 / config.trace_seconds)
    scale = ns.snr_scale_factor(amplitude, config.snr, unscaled_rms)
    scaled_model = ns.NoisePsdModel(
        params=model.params, open_pore_current=model.open_pore_current,
        resistance=model.resistance, carrier_count=model.carrier_count,
        temperature=model.temperature, bandwidth=model.bandwidth,
        scale=scale)
    noise = ns.synthesize_colored_noise(
        scaled_model, n_samples, config.sample_rate,
        derive_rng(master_seed, trace_index, STREAM_NOISE))

    _check_positivity(clean, i0, amplitude, config.drift)

    provenance = {
        "master_seed": master_seed,
        "trace_index": trace_index,
        "seed_derivation": SEED_DERIVATION_ID,
        "open_pore_current_a": i0,
        "blockage_amplitude_a": amplitude,
        "event_probability": probability,
        "probability_clamped": clamped,
        "noise_scale": scale,
        "noise_rms_a": scale * unscaled_rms,
        "snr": config.snr,
        "sphere_diameter_m": config.sphere_diameter,
        "concentration_nM": config.concentration,
        "event_duration_s": config.event_duration,
        "trace_seconds": config.trace_seconds,
    }
    return Trace(sample_rate=config.sample_rate, noisy=clean + noise,
                 clean=clean, events=spike_events, provenance=provenance)


def _check_positivity(clean: np.ndarray, i0: float, amplitude: float,
                      drift: BaselineDriftParams) -> None:
    """Generation-error guard: the clean trace must remain positive and
    bounded by the baseline budget (no silent clamping)."""
    lo = clean.min()
    if lo <= 0:
        raise GenerationError(f"clean trace reached {lo} A (non-positive)")
