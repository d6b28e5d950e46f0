"""Signal, spectrum and noise-record files.

Signal CSV: header ``index,re,im`` then one row per sample, values written
with 17 significant digits so a save/load cycle is exact. WAV input is
limited to 16-bit PCM mono, scaled by 1/32768 into [-1, 1).
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.io import wavfile

from dsp.analysis import PsdEstimate
from dsp.channel import NoiseRecord
from dsp.chrestenson import Signal
from dsp.errors import IoError, ParseError, SignalIOError, UnsupportedFormat

logger = logging.getLogger(__name__)

SIGNAL_HEADER = ("index", "re", "im")
PSD_HEADER = ("bin", "freq_cycles_per_sample", "power")
NOISE_HEADER = ("position", "re", "im")
WAV_SCALE = 32768.0

PathLike = Union[str, Path]


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def create_output_dir_if_not_exists(path: PathLike) -> Path:
    """Creates the output directory (and parents) if it doesn't already exist."""
    path = Path(path)
    if path.is_dir():
        logger.info(f"Output directory {path} already exists")
        return path
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"Error creating output directory {path}: {str(e)}")
        raise IoError(f"cannot create output directory {path}: {e}") from e
    logger.info(f"Created output directory {path}")
    return path


def infer_format(path: PathLike, format: Optional[str] = None) -> str:
    if format is not None:
        if format not in ("csv", "wav"):
            raise UnsupportedFormat(f"unknown signal format '{format}'")
        return format
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in ("csv", "wav"):
        raise UnsupportedFormat(f"cannot infer signal format from '{path}'; use .csv or .wav")
    return suffix


def _read_csv(path: Path, sample_rate: float) -> Signal:
    samples = []
    with path.open("r", newline="", encoding="utf-8") as f:
        for line_no, row in enumerate(csv.reader(f), start=1):
            if not row or all(not field.strip() for field in row):
                continue
            if line_no == 1 and row[0].strip().lower() == "index":
                if tuple(field.strip().lower() for field in row) != SIGNAL_HEADER:
                    raise ParseError(f"expected header {','.join(SIGNAL_HEADER)}, got {','.join(row)}", line_no)
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", line_no)
            try:
                index = int(row[0])
                value = complex(float(row[1]), float(row[2]))
            except ValueError as e:
                raise ParseError(f"malformed row {','.join(row)}: {e}", line_no) from e
            if index != len(samples):
                raise ParseError(f"expected index {len(samples)}, got {index}", line_no)
            samples.append(value)
    if not samples:
        raise ParseError(f"{path} holds no samples")
    return Signal(np.array(samples, dtype=np.complex128), sample_rate)


def _read_wav(path: Path) -> Signal:
    try:
        rate, data = wavfile.read(path)
    except ValueError as e:
        raise ParseError(f"{path} is not a readable WAV file: {e}") from e
    if data.dtype != np.int16:
        raise UnsupportedFormat(f"{path} holds {data.dtype} samples; only 16-bit PCM is supported")
    if data.ndim != 1:
        raise UnsupportedFormat(f"{path} has {data.shape[1]} channels; only mono is supported")
    if data.size == 0:
        raise ParseError(f"{path} holds no samples")
    return Signal(data.astype(np.float64) / WAV_SCALE, float(rate))


def load_signal(path: PathLike, format: Optional[str] = None, sample_rate: float = 1.0) -> Signal:
    """Read a signal CSV or a 16-bit mono WAV file.

    ``sample_rate`` applies to CSV input only; WAV files carry their own.
    """
    path = Path(path)
    kind = infer_format(path, format)
    try:
        signal = _read_csv(path, sample_rate) if kind == "csv" else _read_wav(path)
    except SignalIOError:
        raise
    except OSError as e:
        logger.error(f"Error reading {path}: {str(e)}")
        raise IoError(f"cannot read {path}: {e}") from e
    logger.info(f"Loaded {len(signal)} samples from {path}")
    return signal


def write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        logger.error(f"Error writing {path}: {str(e)}")
        raise IoError(f"cannot write {path}: {e}") from e
    logger.debug(f"Wrote {path}")


def save_signal(signal: Union[Signal, Sequence[complex], np.ndarray], path: PathLike) -> None:
    """Write ``index,re,im`` rows; an empty sequence yields a header-only file."""
    samples = signal.samples if isinstance(signal, Signal) else np.asarray(signal, dtype=np.complex128).reshape(-1)
    write_rows(
        path,
        SIGNAL_HEADER,
        ((str(i), fmt(v.real), fmt(v.imag)) for i, v in enumerate(samples)),
    )


def save_psd(psd: PsdEstimate, path: PathLike) -> None:
    """Centred spectrum, one row per signed bin from most negative to most positive."""
    signed, bins = psd.centered()
    write_rows(
        path,
        PSD_HEADER,
        ((str(int(k)), fmt(k / psd.n_samples), fmt(power)) for k, power in zip(signed, bins)),
    )


def save_noise_record(record: NoiseRecord, path: PathLike) -> None:
    write_rows(
        path,
        NOISE_HEADER,
        ((str(int(pos)), fmt(v.real), fmt(v.imag)) for pos, v in zip(record.positions, record.noise_values)),
    )
