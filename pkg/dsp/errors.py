"""Error taxonomy shared by the signal processing modules and the CLI.

Each family carries the process exit code the command line reports for it.
"""

from typing import Optional


class ChrestensonError(Exception):
    """Base class for every error raised by this toolkit."""

    exit_code: int = 1


class DomainError(ChrestensonError, ValueError):
    """A numeric or domain precondition does not hold."""

    exit_code = 4


class NonTerminatingExpansion(DomainError):
    """The value has no finite base-p expansion."""


class RadixMismatch(DomainError):
    """Two operands were expressed in different radices."""


class SizeLimitExceeded(DomainError):
    """A requested matrix is larger than the configured limit."""


class LengthNotPowerOfRadix(DomainError):
    """A transform input length is not p**m for some m >= 1."""


class LengthMismatch(DomainError):
    """A spread signal does not hold a whole number of chip blocks."""


class RowOutOfRange(DomainError):
    """A code row index lies outside the matrix."""


class ZeroSeed(DomainError):
    """An LFSR was seeded with the all-zero state."""


class DimensionMismatch(DomainError):
    """Operands disagree in length or count."""


class ZeroSignalEnergy(DomainError):
    """A reference signal has no energy."""


class ZeroSpectrum(DomainError):
    """A spectrum has no power in any bin."""


class ConfigError(ChrestensonError, ValueError):
    """An experiment configuration or command flag is invalid."""

    exit_code = 2


class SignalIOError(ChrestensonError, OSError):
    """A signal file could not be read or written."""

    exit_code = 3


class ParseError(SignalIOError):
    """A signal file is malformed.

    ``position`` is the 1-based CSV line or the byte offset of the problem.
    """

    def __init__(self, message: str, position: Optional[int] = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnsupportedFormat(SignalIOError):
    """A signal file uses an encoding outside the supported set."""


class IoError(SignalIOError):
    """The filesystem refused a read or write."""


class StageError(ChrestensonError):
    """A pipeline stage failed; keeps the stage name and the cause's exit code."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 4)
