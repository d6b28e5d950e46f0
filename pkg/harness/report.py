"""Report rendering.

A report is written as block-style YAML: one ``key: value`` per line,
nested sections indented, keys in model field order and no timestamps, so
identical runs produce identical files.
"""

import logging
from pathlib import Path
from typing import Any

import yaml

from dsp.errors import IoError
from utils.typing import ExperimentReport

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Path):
        return value.as_posix()
    return value


def render_report(report: ExperimentReport) -> str:
    return yaml.safe_dump(_plain(report.model_dump()), sort_keys=False, default_flow_style=False)


def write_report(report: ExperimentReport, path: Path) -> None:
    try:
        Path(path).write_text(render_report(report), encoding="utf-8")
    except OSError as e:
        logger.error(f"Error writing report {path}: {str(e)}")
        raise IoError(f"cannot write report {path}: {e}") from e
    logger.info(f"Wrote report {path}")
