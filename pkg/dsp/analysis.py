"""Power spectra, occupied bandwidth, spectral flatness and test signals.

Periodograms use a rectangular window and no averaging, normalised so the
bins sum to the signal energy: P[k] = |X[k]|^2 / N. Bandwidth measurements
run over the centred spectrum and report signed bin offsets from DC.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import signal as sp_signal
from scipy import stats

from dsp.chrestenson import Signal
from dsp.errors import DomainError, ZeroSpectrum

logger = logging.getLogger(__name__)

FLATNESS_FLOOR = 1e-300
_FRACTION_SLACK = 1e-12


@dataclass(frozen=True)
class PsdEstimate:
    """Periodogram bins in DFT order (bin k is k cycles per record)."""

    bins: np.ndarray
    bin_resolution: float
    n_samples: int

    @property
    def signed_bins(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.n_samples, d=1.0 / self.n_samples)).astype(np.int64)

    @property
    def frequencies(self) -> np.ndarray:
        """Bin centres in cycles per sample."""
        return np.fft.fftfreq(self.n_samples)

    @property
    def total_power(self) -> float:
        return float(np.sum(self.bins))

    def centered(self) -> Tuple[np.ndarray, np.ndarray]:
        """(signed bin indices, bins) sorted by ascending frequency."""
        return np.fft.fftshift(self.signed_bins), np.fft.fftshift(self.bins)


def periodogram(s: Signal) -> PsdEstimate:
    if len(s) < 2:
        raise DomainError("a periodogram needs at least two samples")
    samples = s.samples.real if s.is_real else s.samples
    _, bins = sp_signal.periodogram(
        samples,
        fs=1.0,
        window="boxcar",
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    bins = np.asarray(bins, dtype=np.float64)
    bins.setflags(write=False)
    return PsdEstimate(bins=bins, bin_resolution=s.sample_rate / len(s), n_samples=len(s))


def occupied_bandwidth(psd: PsdEstimate, energy_fraction: float) -> Tuple[int, int]:
    """Narrowest contiguous band around the peak holding ``energy_fraction`` of the power.

    Returns signed (low, high) bin offsets from DC. Among equally narrow
    bands the lowest-starting one wins.

    Contiguity is judged on the centred spectrum, so DFT bins at or above
    N/2 count as negative frequencies. A band of DFT bins [a, b] comes back
    unchanged only when N > 2 * b; with N = 8, equal power at bins 3 and 5
    gives (-3, 3) because bin 5 is frequency -3.
    """
    if not 0 < energy_fraction < 1:
        raise DomainError(f"energy fraction must lie in (0, 1), got {energy_fraction}")
    signed, bins = psd.centered()
    total = float(np.sum(bins))
    if total <= 0:
        raise ZeroSpectrum("the spectrum has no power")

    n = bins.size
    target = energy_fraction * total * (1 - _FRACTION_SLACK)
    prefix = np.concatenate(([0.0], np.cumsum(bins)))
    peak = int(np.argmax(bins))

    def window_sums(width: int) -> Tuple[np.ndarray, np.ndarray]:
        lows = np.arange(max(0, peak - width + 1), min(peak, n - width) + 1)
        return lows, prefix[lows + width] - prefix[lows]

    # a band containing the peak can always grow by one bin, so feasibility is monotone in width
    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if np.any(window_sums(mid)[1] >= target):
            hi = mid
        else:
            lo = mid + 1
    lows, sums = window_sums(lo)
    start = int(lows[np.argmax(sums >= target)])
    return int(signed[start]), int(signed[start + lo - 1])


def band_edge(interval: Tuple[int, int]) -> int:
    """Largest absolute frequency (in bins) reached by an occupied band."""
    low, high = interval
    return max(abs(low), abs(high))


def spectral_flatness(psd: PsdEstimate) -> float:
    """Geometric over arithmetic mean of the bins, zero bins floored."""
    if psd.total_power <= 0:
        raise ZeroSpectrum("the spectrum has no power")
    floored = np.maximum(psd.bins, FLATNESS_FLOOR)
    return float(min(1.0, stats.gmean(floored) / np.mean(floored)))


def tone(amplitude: float, omega: float, phase: float, n_samples: int, sample_rate: float = 1.0) -> Signal:
    """A * cos(2*pi*omega*n + phase), omega in cycles per sample."""
    if n_samples < 1:
        raise DomainError("a tone needs at least one sample")
    n = np.arange(n_samples)
    return Signal(amplitude * np.cos(2 * np.pi * omega * n + phase), sample_rate)


def zero_order_hold(x: Signal, factor: int) -> Signal:
    """Repeat every sample ``factor`` times (bandwidth baseline at the chip rate)."""
    if factor < 1:
        raise DomainError(f"hold factor must be at least 1, got {factor}")
    return Signal(np.repeat(x.samples, factor), x.sample_rate * factor)


def lowpass_noise(
    n_samples: int, cutoff: float, seed: int, order: int = 8, sample_rate: float = 1.0
) -> Signal:
    """Gaussian noise through a Butterworth low-pass, scaled to unit peak.

    Stands in for a voice recording: its spectrum decays above ``cutoff``
    (cycles per sample).
    """
    if not 0 < cutoff < 0.5:
        raise DomainError(f"cutoff must lie in (0, 0.5) cycles per sample, got {cutoff}")
    rng = np.random.default_rng(seed)
    sos = sp_signal.butter(order, 2 * cutoff, btype="low", output="sos")
    filtered = sp_signal.sosfilt(sos, rng.standard_normal(n_samples))
    peak = np.max(np.abs(filtered))
    return Signal(filtered / peak if peak > 0 else filtered, sample_rate)
