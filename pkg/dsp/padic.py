"""Exact base-p digit arithmetic and the carry-free p-adic product.

All arithmetic here is integer arithmetic on digits; fractions come in as
``fractions.Fraction`` and never pass through floating point.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dsp.errors import ConfigError, NonTerminatingExpansion, RadixMismatch

logger = logging.getLogger(__name__)

_FRACTION_PATTERN = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*(?:\^\s*(\d+))?\s*$")


class Radix(BaseModel):
    """The base p of a digit expansion."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=2)


RadixLike = Union[Radix, int]


def as_radix(radix: RadixLike) -> Radix:
    """Accept either a ``Radix`` or a bare integer base."""
    if isinstance(radix, Radix):
        return radix
    return Radix(p=int(radix))


class PFraction(BaseModel):
    """Exact frequency K / p**m in [0, 1) with a finite base-p expansion."""

    model_config = ConfigDict(frozen=True)

    numerator: int = Field(ge=0)
    p: int = Field(ge=2)
    m: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_range(self) -> "PFraction":
        if self.numerator >= self.p ** self.m:
            raise ValueError(f"numerator {self.numerator} must be below {self.p}^{self.m}")
        return self

    @property
    def radix(self) -> Radix:
        return Radix(p=self.p)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.p ** self.m)

    def digits(self) -> Tuple[int, ...]:
        """Fractional digits (w_1, ..., w_m), most significant first."""
        return tuple((self.numerator // self.p ** (self.m - j)) % self.p for j in range(1, self.m + 1))

    @classmethod
    def parse(cls, text: str, radix: RadixLike | None = None) -> "PFraction":
        """Parse ``"K/p^m"`` or ``"K/D"``.

        In the ``"K/D"`` form D is taken as the radix itself unless ``radix``
        is given, in which case D must be a power of that radix.
        """
        match = _FRACTION_PATTERN.match(text)
        if not match:
            raise ConfigError(f"'{text}' is not of the form K/p^m")
        numerator, base, exponent = int(match.group(1)), int(match.group(2)), match.group(3)
        try:
            if exponent is not None:
                fraction = cls(numerator=numerator, p=base, m=int(exponent))
                if radix is not None and as_radix(radix).p != base:
                    raise ConfigError(f"'{text}' is not expressed in radix {as_radix(radix).p}")
                return fraction
            if radix is None:
                return cls(numerator=numerator, p=base, m=1)
            p = as_radix(radix).p
            m = 0
            power = 1
            while power < base:
                power *= p
                m += 1
            if power != base or m == 0:
                raise ConfigError(f"denominator {base} of '{text}' is not a power of {p}")
            return cls(numerator=numerator, p=p, m=m)
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"invalid frequency '{text}': {e}") from e

    def __str__(self) -> str:
        return f"{self.numerator}/{self.p}^{self.m}"


@dataclass(frozen=True)
class DigitVector:
    """Base-p expansion of a nonnegative number.

    ``integer_digits[i]`` is the coefficient of p**i and
    ``fractional_digits[j - 1]`` the coefficient of p**-j.
    """

    radix: Radix
    integer_digits: Tuple[int, ...]
    fractional_digits: Tuple[int, ...]

    def __post_init__(self):
        p = self.radix.p
        for d in self.integer_digits + self.fractional_digits:
            if not 0 <= d < p:
                raise ValueError(f"digit {d} out of range for radix {p}")

    def integer_digit(self, i: int) -> int:
        return self.integer_digits[i] if 0 <= i < len(self.integer_digits) else 0

    def fractional_digit(self, j: int) -> int:
        return self.fractional_digits[j - 1] if 1 <= j <= len(self.fractional_digits) else 0

    def reconstruct(self) -> Fraction:
        p = self.radix.p
        whole = sum(d * p ** i for i, d in enumerate(self.integer_digits))
        frac = sum(Fraction(d, p ** j) for j, d in enumerate(self.fractional_digits, start=1))
        return whole + frac


def to_digits(value: Union[Rational, PFraction], radix: RadixLike) -> DigitVector:
    """Minimal exact base-p expansion of ``value``."""
    radix = as_radix(radix)
    p = radix.p
    if isinstance(value, PFraction):
        value = value.value
    value = Fraction(value)
    if value < 0:
        raise ValueError(f"negative values have no digit expansion here: {value}")

    q = value.denominator
    g = math.gcd(q, p)
    while g > 1:
        q //= g
        g = math.gcd(q, p)
    if q != 1:
        raise NonTerminatingExpansion(f"{value} has no terminating base-{p} expansion")

    whole = value.numerator // value.denominator
    frac = value - whole

    integer_digits = []
    while whole:
        whole, d = divmod(whole, p)
        integer_digits.append(d)

    fractional_digits = []
    while frac:
        frac *= p
        d = frac.numerator // frac.denominator
        fractional_digits.append(d)
        frac -= d

    return DigitVector(radix, tuple(integer_digits), tuple(fractional_digits))


def padic_product(t: DigitVector, x: DigitVector) -> int:
    """Carry-free product t (x)_p x: sum of t_{1-k} * x_k mod p.

    Pairs the digits whose place values multiply to 1/p. Digits outside
    either expansion count as zero.
    """
    if t.radix != x.radix:
        raise RadixMismatch(f"radix {t.radix.p} != radix {x.radix.p}")
    p = x.radix.p
    total = 0
    # integer digit x_i (weight p**i) meets fractional digit t_{i+1}
    for i, d in enumerate(x.integer_digits):
        total += d * t.fractional_digit(i + 1)
    # fractional digit x_j (weight p**-j) meets integer digit t_{j-1}
    for j, d in enumerate(x.fractional_digits, start=1):
        total += d * t.integer_digit(j - 1)
    return total % p


def pmul(omega: PFraction, n: int, radix: RadixLike) -> int:
    """p-adic product of a frequency in [0, 1) and a sample index."""
    radix = as_radix(radix)
    if omega.p != radix.p:
        raise RadixMismatch(f"frequency {omega} is not in radix {radix.p}")
    if n < 0:
        raise ValueError(f"sample index must be nonnegative, got {n}")
    return padic_product(to_digits(omega.value, radix), to_digits(int(n), radix))


def digitwise_add(a: int, b: int, radix: RadixLike) -> int:
    """Carry-free sum: digit i of the result is (a_i + b_i) mod p."""
    p = as_radix(radix).p
    if a < 0 or b < 0:
        raise ValueError("digitwise addition is defined for nonnegative integers")
    result = 0
    place = 1
    while a or b:
        a, da = divmod(a, p)
        b, db = divmod(b, p)
        result += ((da + db) % p) * place
        place *= p
    return result


def index_digits(p: int, m: int) -> np.ndarray:
    """(p**m, m) array whose row n holds the base-p digits n_0 .. n_{m-1}."""
    n = np.arange(p ** m, dtype=np.int64)
    return np.stack([(n // p ** i) % p for i in range(m)], axis=1)


@lru_cache(maxsize=32)
def residue_table(p: int, m: int) -> np.ndarray:
    """Exact integer table R[K, n] = pmul(K/p**m, n) for K, n < p**m.

    pmul(K/p**m, n) = sum_i K_{m-1-i} * n_i mod p, so the table is the
    digit matrix product with the frequency digits reversed.
    """
    digits = index_digits(p, m)
    table = (digits[:, ::-1] @ digits.T) % p
    table.setflags(write=False)
    logger.debug(f"Built residue table for p={p}, m={m}")
    return table
