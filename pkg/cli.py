"""Command line entry point.

Usage:
    python -m cli run --config experiments/impulse_tone.toml --out out/impulse_tone
    python -m cli spread tone.csv -o spread.csv --p 8 --omega1 1/8 --chips 16
    python -m cli codes --family pn --degree 3

Exit codes: 0 success, 2 configuration error, 3 file error, 4 numeric or
domain error.
"""

import functools
import logging
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from dsp.analysis import band_edge, occupied_bandwidth, periodogram, spectral_flatness
from dsp.channel import AwgnSpec, ImpulseNoiseSpec, apply_awgn, apply_impulse_noise
from dsp.chrestenson import Signal, dcht_forward, dcht_inverse
from dsp.errors import ChrestensonError, ConfigError
from dsp.temporal_spread import TemporalSpreadConfig, despread, spread
from harness.codes import cmd_codes
from harness.pipeline import load_run_config, run_pipeline
from settings import settings
from utils.files import create_output_dir_if_not_exists, load_signal, save_noise_record, save_psd, save_signal
from utils.typing import SpatialStage

logger = logging.getLogger(__name__)


class CliError(click.ClickException):
    """Carries the exit code of the toolkit error that ended the command."""

    def __init__(self, error: ChrestensonError):
        super().__init__(str(error))
        self.exit_code = error.exit_code


def handle_errors(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ValidationError as e:
            logger.error(f"Error in {command.__name__}: {str(e)}")
            raise CliError(ConfigError(str(e))) from e
        except ChrestensonError as e:
            logger.error(f"Error in {command.__name__}: {str(e)}")
            raise CliError(e) from e

    return wrapper


def common_options(command):
    """--config, --seed, --out and the temporal spreading overrides."""
    options = [
        click.option("--config", "config_path", type=click.Path(path_type=Path), help="TOML or YAML run config"),
        click.option("--seed", type=int, help="Run seed"),
        click.option("--out", "output_dir", type=click.Path(path_type=Path), help="Output directory"),
        click.option("--p", "p", type=int, help="Radix of the chip frequency"),
        click.option("--omega1", help="Chip frequency as K/p^m"),
        click.option("--chips", type=int, help="Chips per sample (L)"),
        click.option("--estimator", help="mean | median | trimmed:alpha"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def resolve_config(config_path, seed, output_dir, p, omega1, chips, estimator):
    return load_run_config(
        config_path,
        {
            "seed": seed,
            "output_dir": output_dir,
            "p": p,
            "omega1": omega1,
            "chips": chips,
            "estimator": estimator,
        },
    )


def temporal_config(**options) -> TemporalSpreadConfig:
    return resolve_config(**options).temporal.to_config()


def output_path(output: Optional[Path], output_dir: Optional[Path], default_name: str) -> Path:
    if output is not None:
        return output
    return create_output_dir_if_not_exists(output_dir or settings.default_output_dir) / default_name


@click.group()
@click.option("--log-level", default=settings.log_level, show_default=True, help="Logging level")
def cli(log_level: str) -> None:
    """Chrestenson spatial-temporal spreading toolkit."""
    logging.basicConfig(level=log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@cli.command()
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), help="Output CSV")
@click.option("--inverse", is_flag=True, help="Apply the inverse transform")
@click.option("--method", type=click.Choice(["auto", "direct", "fast"]), default="auto", show_default=True)
@common_options
@handle_errors
def transform(input_path, output, inverse, method, **options):
    """DCHT forward (or inverse) of a signal CSV whose length is p**m."""
    p = options["p"] or resolve_config(**options).temporal.p
    signal = load_signal(input_path, "csv")
    if inverse:
        result = dcht_inverse(signal, p, method)
    else:
        result = dcht_forward(signal, p, method)
    target = output_path(output, options["output_dir"], "inverse.csv" if inverse else "transform.csv")
    save_signal(result, target)
    click.echo(f"wrote {len(result)} coefficients to {target}")


@cli.command("spread")
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), help="Output CSV")
@common_options
@handle_errors
def spread_command(input_path, output, **options):
    """Temporally spread a signal: every sample becomes L chips."""
    cfg = temporal_config(**options)
    signal = load_signal(input_path)
    result = spread(signal, cfg)
    target = output_path(output, options["output_dir"], "spread.csv")
    save_signal(result, target)
    click.echo(f"spread {len(signal)} samples into {len(result)} chips ({target})")


@cli.command("despread")
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), help="Output CSV")
@click.option("--length", type=int, help="Original sample count (default: chips / L)")
@common_options
@handle_errors
def despread_command(input_path, output, length, **options):
    """Recover samples from a temporally spread signal."""
    cfg = temporal_config(**options)
    signal = load_signal(input_path)
    result = despread(signal, cfg, length or len(signal) // cfg.chips_per_sample)
    target = output_path(output, options["output_dir"], "despread.csv")
    save_signal(result, target)
    click.echo(f"recovered {len(result)} samples with {cfg.estimator} ({target})")


@cli.command("channel")
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), help="Output CSV")
@click.option("--noise", type=click.Choice(["impulse", "awgn"]), default="impulse", show_default=True)
@click.option("--period", type=int, default=10, show_default=True)
@click.option("--burst", type=int, default=1, show_default=True)
@click.option("--amp-min", type=float, default=0.1, show_default=True)
@click.option("--amp-max", type=float, default=1.0, show_default=True)
@click.option("--real-only", is_flag=True, help="Real impulses with random sign")
@click.option("--snr-db", type=float, default=20.0, show_default=True)
@common_options
@handle_errors
def channel_command(input_path, output, noise, period, burst, amp_min, amp_max, real_only, snr_db, **options):
    """Add impulsive bursts or white Gaussian noise to a signal."""
    seed = options["seed"] if options["seed"] is not None else settings.default_seed
    signal = load_signal(input_path)
    target = output_path(output, options["output_dir"], "channel.csv")
    if noise == "impulse":
        spec = ImpulseNoiseSpec(
            period=period, burst_len=burst, amp_min=amp_min, amp_max=amp_max, seed=seed, real_only=real_only
        )
        noisy, record = apply_impulse_noise(signal, spec)
        save_noise_record(record, target.with_name(f"{target.stem}_impulses.csv"))
        click.echo(f"added {len(record)} impulses ({target})")
    else:
        noisy = apply_awgn(signal, AwgnSpec(snr_db=snr_db, seed=seed))
        click.echo(f"added noise at {snr_db:g} dB SNR ({target})")
    save_signal(noisy, target)


@cli.command("codes")
@click.option("--family", type=click.Choice(["walsh", "ch", "pn"]), default="walsh", show_default=True)
@click.option("--p", "p", type=int, default=2, show_default=True)
@click.option("--m", "m", type=int, default=2, show_default=True)
@click.option("--degree", type=int, default=3, show_default=True, help="LFSR degree for pn")
@click.option("--taps", help="Comma separated LFSR taps, e.g. 3,2")
@click.option("--lfsr-seed", type=int, default=1, show_default=True)
@click.option("--count", type=int, help="Number of codes (default: all rows, one PN period)")
@click.option("--out", "output_dir", type=click.Path(path_type=Path), help="Write codes.csv and correlation.csv here")
@handle_errors
def codes_command(family, p, m, degree, taps, lfsr_seed, count, output_dir):
    """List spreading codes and their pairwise correlations."""
    try:
        tap_tuple = tuple(int(t) for t in taps.split(",")) if taps else None
    except ValueError as e:
        raise ConfigError(f"taps must be comma separated integers, got '{taps}'") from e
    stage = SpatialStage(family=family, p=p, m=m, degree=degree, taps=tap_tuple, seed=lfsr_seed)
    codes, _ = cmd_codes(stage, count=count, out_dir=output_dir)
    if output_dir is not None:
        click.echo(f"wrote {len(codes)} codes to {output_dir}")


@cli.command("run")
@common_options
@handle_errors
def run_command(**options):
    """Run a full experiment pipeline and write its artifacts."""
    config = resolve_config(**options)
    report = run_pipeline(config)
    click.echo(f"pipeline: {' -> '.join(report.pipeline)}")
    for user in report.users:
        click.echo(f"user {user.user}: nmse={user.nmse:.6e}")
    click.echo(
        f"band edge (bins): original={report.original.edge_bins} "
        f"baseline={report.baseline.edge_bins} spread={report.spread.edge_bins}"
    )
    click.echo(f"artifacts: {config.output_dir}")


@cli.command("spectrum")
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), help="PSD CSV")
@click.option("--fraction", type=float, default=0.99, show_default=True, help="Occupied energy fraction")
@common_options
@handle_errors
def spectrum_command(input_path, output, fraction, **options):
    """Periodogram, occupied bandwidth and spectral flatness of a signal."""
    signal: Signal = load_signal(input_path)
    psd = periodogram(signal)
    low, high = occupied_bandwidth(psd, fraction)
    target = output_path(output, options["output_dir"], "psd.csv")
    save_psd(psd, target)
    click.echo(f"occupied band: [{low}, {high}] bins, edge {band_edge((low, high))} of {psd.n_samples}")
    click.echo(f"flatness: {spectral_flatness(psd):.6f}")


if __name__ == "__main__":
    cli()
