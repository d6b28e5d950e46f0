"""Channel impairments: periodic impulsive bursts, AWGN, and error measurement.

All randomness comes from ``numpy.random.default_rng(seed)`` seeded by the
noise model being applied; no global generator state is touched.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dsp.chrestenson import Signal
from dsp.errors import DimensionMismatch, ZeroSignalEnergy

logger = logging.getLogger(__name__)


class ImpulseNoiseSpec(BaseModel):
    """Bursts of ``burst_len`` impulses starting every ``period`` samples.

    Impulse magnitudes are uniform in [amp_min, amp_max] times the peak
    magnitude of the signal they are added to.
    """

    model_config = ConfigDict(frozen=True)

    period: int = Field(default=10, ge=1)
    burst_len: int = Field(default=1, ge=0)
    amp_min: float = Field(default=0.1, ge=0.0)
    amp_max: float = Field(default=1.0, ge=0.0)
    seed: int = 0
    real_only: bool = False

    @model_validator(mode="after")
    def _check_ranges(self) -> "ImpulseNoiseSpec":
        if self.amp_min > self.amp_max:
            raise ValueError(f"amp_min {self.amp_min} exceeds amp_max {self.amp_max}")
        if self.burst_len > self.period:
            raise ValueError(f"burst_len {self.burst_len} longer than period {self.period}")
        return self


class AwgnSpec(BaseModel):
    """Circular complex Gaussian noise at ``snr_db``; +inf disables the noise."""

    model_config = ConfigDict(frozen=True)

    snr_db: float = 20.0
    seed: int = 0

    @field_validator("snr_db")
    @classmethod
    def _check_snr(cls, value: float) -> float:
        if math.isnan(value) or value == -math.inf:
            raise ValueError("snr_db must be finite or +inf")
        return value


@dataclass(frozen=True)
class NoiseRecord:
    positions: np.ndarray
    noise_values: np.ndarray

    def __len__(self) -> int:
        return self.positions.size


def impulse_positions(length: int, spec: ImpulseNoiseSpec) -> np.ndarray:
    """Sample indices hit by bursts: start + b for starts 0, period, 2*period, ..."""
    starts = np.arange(0, length, spec.period)
    positions = (starts[:, None] + np.arange(spec.burst_len)[None, :]).reshape(-1)
    return positions[positions < length]


def apply_impulse_noise(s: Signal, spec: ImpulseNoiseSpec) -> Tuple[Signal, NoiseRecord]:
    rng = np.random.default_rng(spec.seed)
    positions = impulse_positions(len(s), spec)
    reference = float(np.max(np.abs(s.samples)))

    magnitudes = rng.uniform(spec.amp_min, spec.amp_max, size=positions.size) * reference
    if spec.real_only:
        values = magnitudes * rng.choice([-1.0, 1.0], size=positions.size) + 0j
    else:
        values = magnitudes * np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=positions.size))

    noisy = s.samples.copy()
    noisy[positions] += values
    logger.info(f"Injected {positions.size} impulses into {len(s)} samples (period={spec.period})")
    return Signal(noisy, s.sample_rate), NoiseRecord(positions, values)


def apply_awgn(s: Signal, spec: AwgnSpec) -> Signal:
    """Add noise whose empirical power is exactly signal power / 10**(snr/10)."""
    power = s.energy / len(s)
    if power == 0:
        raise ZeroSignalEnergy("cannot set an SNR against a zero-energy signal")
    if spec.snr_db == math.inf:
        return s

    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(len(s)) + 1j * rng.standard_normal(len(s))
    noise_power = power / 10 ** (spec.snr_db / 10)
    noise *= math.sqrt(noise_power / np.mean(np.abs(noise) ** 2))
    return Signal(s.samples + noise, s.sample_rate)


def error_signal(recovered: Signal, original: Signal) -> Tuple[Signal, float]:
    """Elementwise error and NMSE = ||recovered - original||^2 / ||original||^2."""
    if len(recovered) != len(original):
        raise DimensionMismatch(f"recovered has {len(recovered)} samples, original {len(original)}")
    reference = original.energy
    if reference == 0:
        raise ZeroSignalEnergy("NMSE is undefined for an all-zero original")
    error = recovered.samples - original.samples
    nmse = float(np.sum(np.abs(error) ** 2) / reference)
    return Signal(error, original.sample_rate), nmse
