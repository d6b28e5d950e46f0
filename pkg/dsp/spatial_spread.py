"""Code-division spreading with Walsh, Chrestenson-row and m-sequence codes.

Users share the channel chip-synchronously: each symbol of user u becomes
``symbol * code_u`` and the composite is the sum over users. A receiver
recovers user u by correlating each chip block with conj(code_u).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Literal, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.signal import max_len_seq

from dsp.chrestenson import Signal, chrestenson_matrix
from dsp.errors import DimensionMismatch, RowOutOfRange, SizeLimitExceeded, ZeroSeed
from dsp.padic import RadixLike, as_radix
from settings import settings

logger = logging.getLogger(__name__)

CodeFamily = Literal["walsh", "ch_row", "pn_msequence"]

# Feedback taps of primitive polynomials x^r + ... + 1, one per degree.
PRIMITIVE_TAPS: Dict[int, Tuple[int, ...]] = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
}


@dataclass(frozen=True)
class SpreadingCode:
    """Unit-modulus chip vector tagged with its family and origin."""

    chips: np.ndarray
    family: CodeFamily
    id: str

    def __len__(self) -> int:
        return self.chips.size


class LfsrSpec(BaseModel):
    """Fibonacci LFSR: stage t is the bit delayed t times, output is stage r.

    Bit t-1 of ``seed`` loads stage t.
    """

    model_config = ConfigDict(frozen=True)

    degree: int = Field(ge=2, le=31)
    taps: Tuple[int, ...]
    seed: int = Field(default=1, ge=0)

    @model_validator(mode="after")
    def _check_taps(self) -> "LfsrSpec":
        if not self.taps or max(self.taps) != self.degree or min(self.taps) < 1:
            raise ValueError(f"taps {self.taps} must lie in 1..{self.degree} and include {self.degree}")
        if len(set(self.taps)) != len(self.taps) or len(self.taps) < 2:
            raise ValueError(f"taps {self.taps} must be distinct with at least one below {self.degree}")
        if self.seed >= 1 << self.degree:
            raise ValueError(f"seed {self.seed:#b} does not fit a {self.degree}-stage register")
        return self


def default_lfsr(degree: int, seed: int = 1) -> LfsrSpec:
    """LFSR with tabulated primitive taps for ``degree``."""
    if degree not in PRIMITIVE_TAPS:
        raise ValueError(f"no primitive taps tabulated for degree {degree}")
    return LfsrSpec(degree=degree, taps=PRIMITIVE_TAPS[degree], seed=seed)


def _row_check(row: int, size: int) -> None:
    if not 0 <= row < size:
        raise RowOutOfRange(f"row {row} outside 0..{size - 1}")


def walsh_code(m: int, row: int) -> SpreadingCode:
    """Row ``row`` of the 2**m Walsh (p = 2 Chrestenson) matrix, as +/-1 chips."""
    _row_check(row, 2 ** m)
    chips = chrestenson_matrix(2, m).row(row).real.copy()
    chips.setflags(write=False)
    return SpreadingCode(chips, "walsh", f"walsh(m={m},row={row})")


def ch_code(p: RadixLike, m: int, row: int) -> SpreadingCode:
    """Row ``row`` of the p**m Chrestenson matrix."""
    p = as_radix(p).p
    _row_check(row, p ** m)
    return SpreadingCode(chrestenson_matrix(p, m).row(row), "ch_row", f"ch(p={p},m={m},row={row})")


def pn_msequence(spec: LfsrSpec) -> SpreadingCode:
    """One period (2**r - 1 chips) of the LFSR output, bit b mapped to 1 - 2b.

    The register recurrence o[i + r] = xor of o[i + r - t] over the taps t runs
    in ``scipy.signal.max_len_seq``; its first r outputs are the seed read
    from stage r down to stage 1.
    """
    if spec.seed == 0:
        raise ZeroSeed("an all-zero LFSR state never leaves zero")
    period = (1 << spec.degree) - 1
    if period > settings.matrix_size_limit:
        raise SizeLimitExceeded(
            f"a degree {spec.degree} m-sequence has {period} chips, above the limit {settings.matrix_size_limit}"
        )
    state = [(spec.seed >> (spec.degree - 1 - j)) & 1 for j in range(spec.degree)]
    delays = [spec.degree - tap for tap in spec.taps if tap != spec.degree]
    bits, _ = max_len_seq(spec.degree, state=state, taps=delays)
    chips = 1.0 - 2.0 * bits
    chips.setflags(write=False)
    taps = ",".join(str(t) for t in spec.taps)
    return SpreadingCode(chips, "pn_msequence", f"pn(r={spec.degree},taps={taps},seed={spec.seed:#b})")


def mux_users(symbols_per_user: Sequence[Signal], codes: Sequence[SpreadingCode]) -> Signal:
    """composite[n*Ls + k] = sum over users of symbols_u[n] * code_u[k]."""
    if not symbols_per_user or len(symbols_per_user) != len(codes):
        raise DimensionMismatch(f"{len(symbols_per_user)} users but {len(codes)} codes")
    symbol_count = len(symbols_per_user[0])
    code_length = len(codes[0])
    if any(len(s) != symbol_count for s in symbols_per_user):
        raise DimensionMismatch("all users must carry the same number of symbols")
    if any(len(c) != code_length for c in codes):
        raise DimensionMismatch("all codes must have the same length")

    composite = np.zeros(symbol_count * code_length, dtype=np.complex128)
    for symbols, code in zip(symbols_per_user, codes):
        composite += np.outer(symbols.samples, code.chips).reshape(-1)
    logger.debug(f"Multiplexed {len(codes)} users onto {composite.size} chips")
    return Signal(composite, symbols_per_user[0].sample_rate * code_length)


def demux_user(composite: Signal, code: SpreadingCode, symbol_count: int) -> Signal:
    """Correlate each chip block with conj(code) and normalise by the code length."""
    code_length = len(code)
    if symbol_count < 1 or len(composite) != symbol_count * code_length:
        raise DimensionMismatch(
            f"composite has {len(composite)} chips, expected {symbol_count} x {code_length}"
        )
    blocks = composite.samples.reshape(symbol_count, code_length)
    return Signal(blocks @ code.chips.conj() / code_length, composite.sample_rate / code_length)


def cross_correlation(a: SpreadingCode, b: SpreadingCode, lag: int) -> complex:
    """Normalised cyclic correlation (1/L) sum_k a[k] * conj(b[(k + lag) mod L])."""
    if len(a) != len(b):
        raise DimensionMismatch(f"codes of length {len(a)} and {len(b)} cannot be correlated")
    return complex(np.mean(a.chips * np.roll(b.chips, -lag).conj()))


@dataclass(frozen=True)
class CorrelationEntry:
    """Correlation summary of one ordered code pair."""

    first: int
    second: int
    zero_lag: complex
    max_nonzero_lag: float
    min_nonzero_lag_real: float


def correlation_table(codes: Sequence[SpreadingCode]) -> List[CorrelationEntry]:
    """Zero-lag and worst nonzero-lag correlation for every ordered pair (i <= j)."""
    entries = []
    for i, a in enumerate(codes):
        for j in range(i, len(codes)):
            b = codes[j]
            values = np.array([cross_correlation(a, b, lag) for lag in range(len(a))])
            others = values[1:]
            entries.append(
                CorrelationEntry(
                    first=i,
                    second=j,
                    zero_lag=complex(values[0]),
                    max_nonzero_lag=float(np.max(np.abs(others))) if others.size else 0.0,
                    min_nonzero_lag_real=float(np.min(others.real)) if others.size else 0.0,
                )
            )
    return entries
