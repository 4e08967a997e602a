"""Stochastic placement of translocation events and triangular waveforms.

The pore walks through timesteps in an open/blocked two-state machine:
while open, each step turns blocked with a fixed per-step probability;
once blocked it stays blocked for the assigned event duration.  Rendered
pulses are asymmetric triangles (fall over the first 40% of the duration,
recovery over the remaining 60%).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .physics import BiasConfig, PhysicalConstants, PhysicsDomainError

#: fraction of the event duration spent falling to the minimum current
FALL_FRACTION = 0.4


@dataclass(frozen=True)
class SamplingConfig:
    """Uniform sampling grid; default 10 kHz."""

    sample_rate: float = 10_000.0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")

    @property
    def timestep(self) -> float:
        return 1.0 / self.sample_rate


@dataclass(frozen=True)
class TranslocationParams:
    """Analyte and kinetics parameters for event generation.

    sphere_diameter         : m
    concentration           : nmol/L
    duration                : s (assigned dwell time of every event)
    probability_coefficient : 1/(nmol/L)
    """

    sphere_diameter: float
    concentration: float
    duration: float
    probability_coefficient: float = 9.1e-8
    fall_fraction: float = FALL_FRACTION

    def __post_init__(self):
        if self.sphere_diameter <= 0:
            raise ValueError("sphere_diameter must be > 0")
        if self.concentration < 0:
            raise ValueError("concentration must be >= 0")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if not 0 < self.fall_fraction < 1:
            raise ValueError("fall_fraction must be in (0, 1)")


@dataclass(frozen=True)
class SpikeEvent:
    """One translocation pulse with its generative parameters."""

    start_time: float      # s
    duration: float        # s (nominal, even if rendering is truncated)
    amplitude: float       # A
    sphere_diameter: float  # m


def spike_probability(params: TranslocationParams, bias: BiasConfig,
                      constants: PhysicalConstants = PhysicalConstants()
                      ) -> tuple[float, bool]:
    """Per-timestep probability of an event start in the open state.

    P = k0 * C_np * exp(q V / (k_B T)), clamped to [0, 1].  Returns
    (probability, clamped) where clamped reports that the raw value
    exceeded 1.
    """
    if bias.temperature <= 0:
        raise PhysicsDomainError("temperature must be > 0")
    exponent = (constants.elementary_charge * bias.voltage
                / (constants.boltzmann * bias.temperature))
    raw = params.probability_coefficient * params.concentration * math.exp(exponent)
    if raw > 1.0:
        warnings.warn(f"event probability {raw:.3g} > 1; clamped to 1",
                      stacklevel=2)
        return 1.0, True
    return max(raw, 0.0), False


def hold_steps(duration: float, sampling: SamplingConfig) -> int:
    """Number of timesteps the blocked state is held for one event."""
    # tolerate float fuzz when duration is an exact multiple of dt
    return math.ceil(duration * sampling.sample_rate - 1e-9)


def sample_event_starts(probability: float, n_steps: int, duration: float,
                        sampling: SamplingConfig,
                        rng: np.random.Generator) -> list[int]:
    """Walk the open/blocked state machine; return event start indices.

    An event may start in the final steps of the trace; its hold period
    is then truncated by the trace end but the event keeps its nominal
    duration.
    """
    if not 0.0 <= probability <= 1.0:
        raise ValueError("probability must lie in [0, 1]")
    if probability == 0.0:
        return []
    hold = hold_steps(duration, sampling)
    draws = rng.random(n_steps)
    starts: list[int] = []
    i = 0
    while i < n_steps:
        if draws[i] < probability:
            starts.append(i)
            i += hold
        else:
            i += 1
    return starts


def make_events(starts: list[int], duration: float, amplitude: float,
                sphere_diameter: float, sampling: SamplingConfig
                ) -> list[SpikeEvent]:
    """Attach waveform parameters to sampled start indices."""
    dt = sampling.timestep
    return [SpikeEvent(start_time=s * dt, duration=duration,
                       amplitude=amplitude, sphere_diameter=sphere_diameter)
            for s in starts]


def render_waveform(event: SpikeEvent, sampling: SamplingConfig) -> np.ndarray:
    """Current deficit of one event at the sample instants it covers.

    The continuous triangle (0 at start, amplitude at start + 0.4*duration,
    0 at start + duration) is evaluated at sample instants; the apex is not
    snapped to the grid.  Returns deficits for sample indices
    ceil(start/dt) .. floor((start+duration)/dt) inclusive.
    """
    dt = sampling.timestep
    first = math.ceil(event.start_time / dt - 1e-9)
    last = math.floor((event.start_time + event.duration) / dt + 1e-9)
    idx = np.arange(first, last + 1)
    t_rel = idx * dt - event.start_time
    return triangle_deficit(t_rel, event.duration, event.amplitude)


def triangle_deficit(t_rel: np.ndarray, duration: float,
                     amplitude: float) -> np.ndarray:
    """Closed-form triangle evaluated at times relative to the event start."""
    t_rel = np.asarray(t_rel, dtype=float)
    apex = FALL_FRACTION * duration
    rising = amplitude * t_rel / apex
    falling = amplitude * (duration - t_rel) / (duration - apex)
    out = np.where(t_rel <= apex, rising, falling)
    return np.clip(out, 0.0, amplitude) * ((t_rel >= 0) & (t_rel <= duration))


def add_event_deficits(trace: np.ndarray, events: list[SpikeEvent],
                       sampling: SamplingConfig) -> None:
    """Subtract each event's rendered deficit from `trace` in place.

    Events extending past the trace end are truncated in rendering only.
    """
    dt = sampling.timestep
    n = trace.size
    for ev in events:
        deficit = render_waveform(ev, sampling)
        first = math.ceil(ev.start_time / dt - 1e-9)
        stop = min(first + deficit.size, n)
        if first >= n:
            continue
        trace[first:stop] -= deficit[: stop - first]
