"""Chrestenson kernel and the discrete Chrestenson transform (DCHT).

The transform pair on N = p**m points is

    X[K] = sum_n x[n] * exp(-2j*pi * pmul(K/p**m, n) / p)
    x[n] = 1/N * sum_K X[K] * exp(+2j*pi * pmul(K/p**m, n) / p)

i.e. an unnormalised forward and a 1/N inverse, so the inverse undoes the
forward exactly. Matrix rows are pairwise orthogonal for any p >= 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from dsp.errors import DimensionMismatch, DomainError, LengthNotPowerOfRadix, SizeLimitExceeded
from dsp.padic import PFraction, RadixLike, as_radix, pmul, residue_table
from settings import settings

logger = logging.getLogger(__name__)

TransformMethod = Literal["auto", "direct", "fast"]

_DFT_BLOCK_ROWS = 256


@dataclass(frozen=True)
class Signal:
    """Finite run of complex samples at a nominal sample rate."""

    samples: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        if np.ndim(self.samples) != 1:
            raise DimensionMismatch("a signal is a one-dimensional sample sequence")
        samples = np.array(self.samples, dtype=np.complex128)
        if samples.size < 1:
            raise DimensionMismatch("a signal holds at least one sample")
        if not np.all(np.isfinite(samples)):
            raise DomainError("signal samples must be finite")
        if not self.sample_rate > 0:
            raise DomainError(f"sample rate must be positive, got {self.sample_rate}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.samples.imag == 0))


@dataclass(frozen=True)
class ChrestensonMatrix:
    """entries[K, n] = kernel(n, K / p**m)."""

    p: int
    m: int
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.p ** self.m

    def row(self, index: int) -> np.ndarray:
        return self.entries[index]


@lru_cache(maxsize=64)
def unit_roots(p: int) -> np.ndarray:
    """exp(-2j*pi*r/p) for r = 0..p-1, exact at the quarter turns."""
    r = np.arange(p)
    roots = np.exp(-2j * np.pi * r / p)
    exact = (1 + 0j, -1j, -1 + 0j, 1j)
    for i in r[(4 * r) % p == 0]:
        roots[i] = exact[(4 * i) // p]
    roots.setflags(write=False)
    return roots


def kernel(n: int, omega: PFraction) -> complex:
    """Chrestenson function C(n, omega) = exp(-2j*pi * (omega (x)_p n) / p)."""
    return complex(unit_roots(omega.p)[pmul(omega, n, omega.p)])


def radix_exponent(length: int, p: int) -> int:
    """m such that length == p**m with m >= 1."""
    m = 0
    size = 1
    while size < length:
        size *= p
        m += 1
    if size != length or m == 0:
        raise LengthNotPowerOfRadix(f"length {length} is not a positive power of {p}")
    return m


def _build_matrix(p: int, m: int) -> ChrestensonMatrix:
    entries = unit_roots(p)[residue_table(p, m)]
    entries.setflags(write=False)
    logger.info(f"Built Chrestenson matrix p={p}, m={m} ({p ** m} x {p ** m})")
    return ChrestensonMatrix(p=p, m=m, entries=entries)


# lru_cache is safe for concurrent lookups; cached entries are read-only.
_cached_matrix = lru_cache(maxsize=settings.matrix_cache_size)(_build_matrix)


def chrestenson_matrix(p: RadixLike, m: int) -> ChrestensonMatrix:
    """Tabulate the Chrestenson basis for omega = K / p**m, K = 0..p**m - 1."""
    p = as_radix(p).p
    if m < 1:
        raise DomainError(f"matrix order must be at least 1, got {m}")
    if p ** m > settings.matrix_size_limit:
        raise SizeLimitExceeded(
            f"{p}^{m} = {p ** m} exceeds the matrix size limit {settings.matrix_size_limit}"
        )
    return _cached_matrix(p, m)


def _resolve_method(method: TransformMethod, length: int) -> str:
    if method == "auto":
        return "direct" if length <= settings.direct_transform_limit else "fast"
    return method


def _digit_axes(m: int) -> tuple:
    return tuple(reversed(range(m)))


def dcht_forward(x: Signal, p: RadixLike, method: TransformMethod = "auto") -> Signal:
    """Unnormalised forward DCHT of a length p**m signal.

    ``direct`` multiplies by the cached matrix. ``fast`` reshapes the signal
    into its base-p digit tensor, applies a p-point DFT along every digit
    axis and reverses the axis order, which realises the reversed digit
    pairing of pmul in O(N log N).
    """
    p = as_radix(p).p
    m = radix_exponent(len(x), p)
    if _resolve_method(method, len(x)) == "direct":
        spectrum = chrestenson_matrix(p, m).entries @ x.samples
    else:
        tensor = np.fft.fftn(x.samples.reshape((p,) * m))
        spectrum = tensor.transpose(_digit_axes(m)).reshape(-1)
    return Signal(spectrum, x.sample_rate)


def dcht_inverse(spectrum: Signal, p: RadixLike, method: TransformMethod = "auto") -> Signal:
    """Inverse DCHT with the 1/N factor."""
    p = as_radix(p).p
    m = radix_exponent(len(spectrum), p)
    n = len(spectrum)
    if _resolve_method(method, n) == "direct":
        samples = chrestenson_matrix(p, m).entries.conj().T @ spectrum.samples / n
    else:
        tensor = spectrum.samples.reshape((p,) * m).transpose(_digit_axes(m))
        samples = np.fft.ifftn(tensor).reshape(-1)
    return Signal(samples, spectrum.sample_rate)


def dft_reference(x: Signal) -> Signal:
    """Unnormalised DFT by direct O(N^2) summation, computed in row blocks."""
    n_samples = len(x)
    roots = unit_roots(n_samples)
    n = np.arange(n_samples, dtype=np.int64)
    spectrum = np.empty(n_samples, dtype=np.complex128)
    for start in range(0, n_samples, _DFT_BLOCK_ROWS):
        k = n[start:start + _DFT_BLOCK_ROWS, None]
        spectrum[start:start + _DFT_BLOCK_ROWS] = roots[(k * n) % n_samples] @ x.samples
    return Signal(spectrum, x.sample_rate)
