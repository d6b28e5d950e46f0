"""Temporal spreading: every sample becomes a block of L Chrestenson chips.

The transmitted block for sample n is x[n] * C(k, omega1), k = 0..L-1, laid
out sample-major. Recovery de-rotates each chip with conj(C(k, omega1)) and
collapses the block with a location estimator; the median and trimmed mean
reject impulsive hits on individual chips.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats

from dsp.chrestenson import Signal, kernel
from dsp.errors import ConfigError, LengthMismatch, RadixMismatch
from dsp.padic import PFraction

logger = logging.getLogger(__name__)

_ESTIMATOR_PATTERN = re.compile(r"^\s*(mean|median|trimmed)\s*(?::\s*([0-9.eE+-]+))?\s*$")


class Estimator(BaseModel):
    """Per-sample location estimator applied to de-rotated chips."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["mean", "median", "trimmed"] = "mean"
    alpha: float = Field(default=0.0, ge=0.0, lt=0.5)

    @classmethod
    def parse(cls, text: str) -> "Estimator":
        """Parse ``mean``, ``median`` or ``trimmed:alpha``."""
        match = _ESTIMATOR_PATTERN.match(text)
        if not match:
            raise ConfigError(f"unknown estimator '{text}', expected mean|median|trimmed:alpha")
        kind, alpha = match.group(1), match.group(2)
        if kind != "trimmed" and alpha is not None:
            raise ConfigError(f"estimator '{kind}' takes no parameter")
        try:
            return cls(kind=kind, alpha=float(alpha) if alpha is not None else (0.25 if kind == "trimmed" else 0.0))
        except ValueError as e:
            raise ConfigError(f"invalid estimator '{text}': {e}") from e

    def __str__(self) -> str:
        return f"trimmed:{self.alpha:g}" if self.kind == "trimmed" else self.kind

    def apply(self, chips: np.ndarray) -> np.ndarray:
        """Collapse an (N, L) block of chips to N estimates along axis 1."""
        if self.kind == "mean":
            return chips.mean(axis=1)
        if self.kind == "median":
            return np.median(chips.real, axis=1) + 1j * np.median(chips.imag, axis=1)
        return stats.trim_mean(chips.real, self.alpha, axis=1) + 1j * stats.trim_mean(chips.imag, self.alpha, axis=1)


class TemporalSpreadConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=2)
    omega1: PFraction
    chips_per_sample: int = Field(ge=1)
    estimator: Estimator = Estimator()

    @model_validator(mode="before")
    @classmethod
    def _parse_strings(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            if isinstance(data.get("omega1"), str):
                data["omega1"] = PFraction.parse(data["omega1"], radix=data.get("p"))
            if isinstance(data.get("estimator"), str):
                data["estimator"] = Estimator.parse(data["estimator"])
        return data

    @model_validator(mode="after")
    def _check_radix(self) -> "TemporalSpreadConfig":
        if self.omega1.p != self.p:
            raise RadixMismatch(f"omega1 {self.omega1} is not in radix {self.p}")
        return self


@dataclass(frozen=True)
class ChipSequence:
    chips: np.ndarray

    def __len__(self) -> int:
        return self.chips.size


def chip_sequence(cfg: TemporalSpreadConfig) -> ChipSequence:
    """chips[k] = C(k, omega1) for k = 0..L-1."""
    chips = np.array([kernel(k, cfg.omega1) for k in range(cfg.chips_per_sample)], dtype=np.complex128)
    chips.setflags(write=False)
    return ChipSequence(chips)


def spread(x: Signal, cfg: TemporalSpreadConfig) -> Signal:
    """Replace each sample by its chip block; the output runs L times faster."""
    chips = chip_sequence(cfg).chips
    spread_samples = np.outer(x.samples, chips).reshape(-1)
    logger.debug(f"Spread {len(x)} samples into {spread_samples.size} chips (omega1={cfg.omega1})")
    return Signal(spread_samples, x.sample_rate * cfg.chips_per_sample)


def despread(y: Signal, cfg: TemporalSpreadConfig, original_length: int) -> Signal:
    """Estimate each sample from its L de-rotated chips.

    Blocks are reduced independently, so the result does not depend on the
    order in which samples are processed.
    """
    chips_per_sample = cfg.chips_per_sample
    if original_length < 1 or len(y) != original_length * chips_per_sample:
        raise LengthMismatch(
            f"spread signal has {len(y)} chips, expected {original_length} x {chips_per_sample}"
        )
    chips = chip_sequence(cfg).chips
    derotated = y.samples.reshape(original_length, chips_per_sample) * chips.conj()
    estimates = cfg.estimator.apply(derotated)
    return Signal(estimates, y.sample_rate / chips_per_sample)
