"""Spreading-code listings and correlation tables for MAI inspection."""

import csv
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO, Tuple

from dsp.spatial_spread import CorrelationEntry, SpreadingCode, correlation_table
from utils.files import create_output_dir_if_not_exists, fmt, write_rows
from utils.typing import SpatialStage

logger = logging.getLogger(__name__)

CODES_HEADER = ("code", "id", "index", "re", "im")
CORRELATION_HEADER = (
    "first",
    "second",
    "zero_lag_re",
    "zero_lag_im",
    "max_nonzero_lag",
    "min_nonzero_lag_real",
)


def family_size(stage: SpatialStage) -> int:
    """Rows listed by default: the whole matrix, or one period for PN."""
    if stage.rows is not None:
        return len(stage.rows)
    if stage.family == "walsh":
        return 2 ** stage.m
    if stage.family == "ch":
        return stage.p ** stage.m
    return 1


def code_rows(codes: List[SpreadingCode]) -> List[Tuple[str, ...]]:
    return [
        (str(i), code.id, str(k), fmt(chip.real), fmt(chip.imag))
        for i, code in enumerate(codes)
        for k, chip in enumerate(code.chips)
    ]


def correlation_rows(table: List[CorrelationEntry]) -> List[Tuple[str, ...]]:
    return [
        (
            str(e.first),
            str(e.second),
            fmt(e.zero_lag.real),
            fmt(e.zero_lag.imag),
            fmt(e.max_nonzero_lag),
            fmt(e.min_nonzero_lag_real),
        )
        for e in table
    ]


def cmd_codes(
    stage: SpatialStage,
    count: Optional[int] = None,
    out_dir: Optional[Path] = None,
    stream: Optional[TextIO] = None,
) -> Tuple[List[SpreadingCode], List[CorrelationEntry]]:
    """Generate the codes of ``stage`` and their pairwise correlation table.

    With ``out_dir`` both tables go to ``codes.csv`` and ``correlation.csv``;
    otherwise they are printed to ``stream`` separated by a blank line.
    """
    codes = stage.codes(count or family_size(stage))
    table = correlation_table(codes)
    logger.info(f"Generated {len(codes)} {stage.family} codes of length {len(codes[0])}")

    if out_dir is not None:
        out = create_output_dir_if_not_exists(out_dir)
        write_rows(out / "codes.csv", CODES_HEADER, code_rows(codes))
        write_rows(out / "correlation.csv", CORRELATION_HEADER, correlation_rows(table))
    else:
        writer = csv.writer(stream or sys.stdout, lineterminator="\n")
        writer.writerow(CODES_HEADER)
        writer.writerows(code_rows(codes))
        writer.writerow([])
        writer.writerow(CORRELATION_HEADER)
        writer.writerows(correlation_rows(table))
    return codes, table
