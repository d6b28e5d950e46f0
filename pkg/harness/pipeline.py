"""End-to-end experiment runner.

A run loads its sources, pushes them through the configured stage chain
(transmit, channel, receive), measures the spectra before and after
spreading and writes every intermediate signal as CSV next to a report.
Given the same config and seed the written files are byte-identical.
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml
from opentelemetry import trace
from pydantic import ValidationError

from dsp.analysis import (
    PsdEstimate,
    band_edge,
    lowpass_noise,
    occupied_bandwidth,
    periodogram,
    spectral_flatness,
    tone,
    zero_order_hold,
)
from dsp.channel import NoiseRecord, apply_awgn, apply_impulse_noise, error_signal
from dsp.chrestenson import Signal
from dsp.errors import ChrestensonError, ConfigError, IoError, StageError
from dsp.spatial_spread import SpreadingCode, demux_user, mux_users
from dsp.temporal_spread import TemporalSpreadConfig, despread, spread
from harness.report import write_report
from settings import settings
from utils.files import (
    create_output_dir_if_not_exists,
    load_signal,
    save_noise_record,
    save_psd,
    save_signal,
)
from utils.tracing import stage_tracer
from utils.typing import (
    TRANSMIT_STAGES,
    BandMeasurement,
    ExperimentReport,
    FileSource,
    LowpassNoiseSource,
    NoiseSummary,
    RunConfig,
    ToneSource,
    UserResult,
)

logger = logging.getLogger(__name__)

OBW_FRACTION = 0.99

# SeedSequence stream ids for everything seeded from the run seed
IMPULSE_STREAM = 0
AWGN_STREAM = 1
SOURCE_STREAM = 100


def derived_seed(run_seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([run_seed, stream]).generate_state(1)[0])


def load_run_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read a TOML or YAML run config and apply flag overrides.

    Recognised overrides: seed, output_dir, p, omega1, chips, estimator.
    Unset (None) overrides are ignored.
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            logger.error(f"Error reading config {path}: {str(e)}")
            raise IoError(f"cannot read config {path}: {e}") from e
        try:
            if path.suffix.lower() in (".yaml", ".yml"):
                data = yaml.safe_load(text) or {}
            else:
                data = tomllib.loads(text)
        except (tomllib.TOMLDecodeError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot parse config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a table of settings")

    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    for key in ("seed", "output_dir"):
        if key in overrides:
            data[key] = overrides.pop(key)
    if overrides:
        temporal = dict(data.get("temporal") or {})
        temporal.update(overrides)
        data["temporal"] = temporal

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid run config: {e}") from e


def load_source(source, index: int, run_seed: int) -> Signal:
    if isinstance(source, ToneSource):
        return tone(source.amplitude, source.omega, source.phase, source.n_samples, source.sample_rate)
    if isinstance(source, LowpassNoiseSource):
        seed = source.seed if source.seed is not None else derived_seed(run_seed, SOURCE_STREAM + index)
        return lowpass_noise(source.n_samples, source.cutoff, seed, sample_rate=source.sample_rate)
    if isinstance(source, FileSource):
        return load_signal(source.path, source.format, source.sample_rate)
    raise ConfigError(f"unknown source {source!r}")


def measure(signal: Signal) -> Tuple[PsdEstimate, BandMeasurement]:
    """Periodogram plus its 99% occupied band, band edge and flatness."""
    psd = periodogram(signal)
    low, high = occupied_bandwidth(psd, OBW_FRACTION)
    edge = band_edge((low, high))
    n = psd.n_samples
    return psd, BandMeasurement(
        n_samples=n,
        low_bin=low,
        high_bin=high,
        low_cycles_per_sample=low / n,
        high_cycles_per_sample=high / n,
        edge_bins=edge,
        edge_cycles_per_sample=edge / n,
        flatness=spectral_flatness(psd),
    )


class PipelineRun:
    """Mutable state of one run: the live streams and the transmit frames to undo."""

    def __init__(self, config: RunConfig, originals: List[Signal]):
        self.config = config
        self.streams: List[Signal] = list(originals)
        self.frames: List[Tuple[str, Any]] = []
        self.noise_record: Optional[NoiseRecord] = None
        self.impulse_seed: Optional[int] = None
        self.awgn_seed: Optional[int] = None
        self.temporal: Optional[TemporalSpreadConfig] = None

    @property
    def total_length(self) -> int:
        return sum(len(s) for s in self.streams)

    def run_stage(self, stage: str) -> None:
        getattr(self, f"_{stage}")()

    def _temporal_spread(self) -> None:
        self.temporal = self.config.temporal.to_config()
        self.frames.append(("temporal_spread", [len(s) for s in self.streams]))
        self.streams = [spread(s, self.temporal) for s in self.streams]

    def _spatial_spread(self) -> None:
        codes: List[SpreadingCode] = self.config.spatial.codes(len(self.streams))
        self.frames.append(("spatial_spread", (len(self.streams[0]), codes)))
        self.streams = [mux_users(self.streams, codes)]

    def _impulse_noise(self) -> None:
        spec = self.config.impulse_noise
        if "seed" not in spec.model_fields_set:
            spec = spec.model_copy(update={"seed": derived_seed(self.config.seed, IMPULSE_STREAM)})
        self.impulse_seed = spec.seed
        noisy, self.noise_record = apply_impulse_noise(self.streams[0], spec)
        self.streams = [noisy]

    def _awgn(self) -> None:
        spec = self.config.awgn
        if "seed" not in spec.model_fields_set:
            spec = spec.model_copy(update={"seed": derived_seed(self.config.seed, AWGN_STREAM)})
        self.awgn_seed = spec.seed
        self.streams = [apply_awgn(self.streams[0], spec)]

    def _despread(self) -> None:
        _, lengths = self.frames.pop()
        self.streams = [despread(s, self.temporal, n) for s, n in zip(self.streams, lengths)]

    def _demux(self) -> None:
        _, (symbol_count, codes) = self.frames.pop()
        composite = self.streams[0]
        self.streams = [demux_user(composite, code, symbol_count) for code in codes]


def run_pipeline(config: RunConfig, tracer: Optional[trace.Tracer] = None) -> ExperimentReport:
    """Execute ``config`` and write its artifacts into ``config.output_dir``."""
    tracer = tracer or stage_tracer()
    out = create_output_dir_if_not_exists(config.output_dir)
    logger.info(f"Running pipeline {' -> '.join(config.pipeline)} with seed {config.seed}")

    def traced(stage: str, action, run: Optional[PipelineRun] = None):
        with tracer.start_as_current_span(stage) as span:
            span.set_attribute("stage", stage)
            if run is not None:
                span.set_attribute("input_length", run.total_length)
            try:
                result = action()
            except ChrestensonError as e:
                logger.error(f"Error in stage {stage}: {str(e)}")
                raise StageError(stage, e) from e
            except ValidationError as e:
                logger.error(f"Error in stage {stage}: {str(e)}")
                raise StageError(stage, ConfigError(str(e))) from e
            if run is not None:
                span.set_attribute("output_length", run.total_length)
            return result

    originals = traced(
        "load_sources",
        lambda: [load_source(source, i, config.seed) for i, source in enumerate(config.sources)],
    )
    run = PipelineRun(config, originals)

    transmit_count = sum(1 for stage in config.pipeline if stage in TRANSMIT_STAGES)
    receive_start = len(config.pipeline) - transmit_count
    stage_lengths: List[Tuple[str, int]] = [("input", run.total_length)]
    transmitted = received = run.streams[0]
    for position, stage in enumerate(config.pipeline):
        if position == transmit_count:
            transmitted = run.streams[0]
        if position == receive_start:
            received = run.streams[0]
        traced(stage, lambda: run.run_stage(stage), run)
        stage_lengths.append((stage, run.total_length))

    users = []
    for user, (recovered, original) in enumerate(zip(run.streams, originals)):
        error, nmse = traced("error", lambda: error_signal(recovered, original))
        users.append(UserResult(user=user, n_samples=len(original), nmse=nmse))
        save_signal(original, out / f"user{user}_original.csv")
        save_signal(recovered, out / f"user{user}_recovered.csv")
        save_signal(error, out / f"user{user}_error.csv")
        logger.info(f"User {user}: NMSE {nmse:.3e}")

    def analyse():
        reference = originals[0]
        hold = zero_order_hold(reference, len(transmitted) // len(reference))
        return measure(reference), measure(hold), measure(transmitted)

    (psd_original, original), (psd_baseline, baseline), (psd_spread, spread_band) = traced("analysis", analyse)

    save_signal(transmitted, out / "transmitted.csv")
    save_signal(received, out / "received.csv")
    save_psd(psd_original, out / "psd_original.csv")
    save_psd(psd_baseline, out / "psd_baseline.csv")
    save_psd(psd_spread, out / "psd_spread.csv")

    noise = NoiseSummary(impulse_seed=run.impulse_seed, awgn_seed=run.awgn_seed)
    if run.noise_record is not None:
        save_noise_record(run.noise_record, out / "impulses.csv")
        magnitudes = np.abs(run.noise_record.noise_values)
        noise.impulses = len(run.noise_record)
        if magnitudes.size:
            noise.impulse_max_magnitude = float(np.max(magnitudes))
            noise.impulse_mean_magnitude = float(np.mean(magnitudes))
    if "awgn" in config.pipeline:
        noise.awgn_snr_db = config.awgn.snr_db

    report = ExperimentReport(
        tool_version=settings.tool_version,
        seed=config.seed,
        pipeline=list(config.pipeline),
        stage_lengths=stage_lengths,
        users=users,
        nmse=float(np.mean([u.nmse for u in users])),
        original=original,
        baseline=baseline,
        spread=spread_band,
        noise=noise,
        config=config.model_dump(),
    )
    write_report(report, out / "report.yaml")
    logger.info(f"Wrote run artifacts to {out}")
    return report
