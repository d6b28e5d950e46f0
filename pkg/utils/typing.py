from pathlib import Path
from typing import (
    Annotated,
    Any,
    Dict,
    List,
    Literal,
    Optional,
    Tuple,
    Union,
)

from pydantic import (
    BaseModel,
    Field,
    model_validator,
)

from dsp.channel import AwgnSpec, ImpulseNoiseSpec
from dsp.errors import ConfigError, ZeroSeed
from dsp.spatial_spread import (
    LfsrSpec,
    PRIMITIVE_TAPS,
    SpreadingCode,
    ch_code,
    pn_msequence,
    walsh_code,
)
from dsp.temporal_spread import TemporalSpreadConfig
from settings import settings

StageName = Literal["temporal_spread", "spatial_spread", "impulse_noise", "awgn", "despread", "demux"]

TRANSMIT_STAGES: Dict[str, str] = {"temporal_spread": "despread", "spatial_spread": "demux"}
CHANNEL_STAGES = ("impulse_noise", "awgn")


def validate_chain(stages: List[str]) -> None:
    """Transmit stages, then channel stages, then receivers undoing the transmitters in reverse."""
    index = 0
    transmit = []
    while index < len(stages) and stages[index] in TRANSMIT_STAGES:
        transmit.append(stages[index])
        index += 1
    if not transmit:
        raise ValueError("pipeline must start with temporal_spread or spatial_spread")
    if len(set(transmit)) != len(transmit):
        raise ValueError(f"transmit stages repeat: {transmit}")

    channel = []
    while index < len(stages) and stages[index] in CHANNEL_STAGES:
        channel.append(stages[index])
        index += 1
    if len(set(channel)) != len(channel):
        raise ValueError(f"channel stages repeat: {channel}")

    expected = [TRANSMIT_STAGES[stage] for stage in reversed(transmit)]
    if stages[index:] != expected:
        raise ValueError(f"receive stages {stages[index:]} do not undo {transmit}; expected {expected}")


class ToneSource(BaseModel):
    """Cosine test source."""

    kind: Literal["tone"] = "tone"
    amplitude: float = 1.0
    omega: float = Field(default=0.05, description="Cycles per sample")
    phase: float = 0.0
    n_samples: int = Field(default=128, ge=2)
    sample_rate: float = Field(default=8000.0, gt=0)


class LowpassNoiseSource(BaseModel):
    """Low-pass filtered Gaussian noise, a stand-in for a voice recording."""

    kind: Literal["lowpass_noise"] = "lowpass_noise"
    n_samples: int = Field(default=128, ge=2)
    cutoff: float = Field(default=0.05, gt=0, lt=0.5)
    seed: Optional[int] = None
    sample_rate: float = Field(default=8000.0, gt=0)


class FileSource(BaseModel):
    """Signal CSV or 16-bit mono WAV file."""

    kind: Literal["file"] = "file"
    path: Path
    format: Optional[Literal["csv", "wav"]] = None
    sample_rate: float = Field(default=8000.0, gt=0, description="Rate assigned to CSV input")


Source = Annotated[Union[ToneSource, LowpassNoiseSource, FileSource], Field(discriminator="kind")]


class TemporalStage(BaseModel):
    """Temporal spreading block; omega1 stays an exact "K/p^m" string."""

    p: int = Field(default=8, ge=2)
    omega1: str = "1/8"
    chips: int = Field(default=16, ge=1)
    estimator: str = "mean"

    def to_config(self) -> TemporalSpreadConfig:
        return TemporalSpreadConfig(
            p=self.p,
            omega1=self.omega1,
            chips_per_sample=self.chips,
            estimator=self.estimator,
        )


class SpatialStage(BaseModel):
    """Code-division block: one code per user."""

    family: Literal["walsh", "ch", "pn"] = "walsh"
    p: int = Field(default=2, ge=2)
    m: int = Field(default=2, ge=1)
    rows: Optional[List[int]] = None
    degree: int = Field(default=3, ge=2)
    taps: Optional[Tuple[int, ...]] = None
    seed: int = 1

    def codes(self, users: int) -> List[SpreadingCode]:
        """Codes for ``users`` users; PN user u starts from register seed ``seed + u`` (wrapping past zero)."""
        rows = self.rows if self.rows is not None else list(range(users))
        if len(rows) < users:
            raise ConfigError(f"{users} users but only {len(rows)} code rows configured")
        if self.family == "walsh":
            return [walsh_code(self.m, row) for row in rows[:users]]
        if self.family == "ch":
            return [ch_code(self.p, self.m, row) for row in rows[:users]]
        taps = self.taps or PRIMITIVE_TAPS.get(self.degree)
        if taps is None:
            raise ConfigError(f"no primitive taps tabulated for degree {self.degree}; set taps")
        base = LfsrSpec(degree=self.degree, taps=taps, seed=self.seed)
        if base.seed == 0:
            raise ZeroSeed("an all-zero LFSR state never leaves zero")
        period = (1 << self.degree) - 1
        return [
            pn_msequence(LfsrSpec(degree=self.degree, taps=taps, seed=(self.seed - 1 + u) % period + 1))
            for u in range(users)
        ]


class RunConfig(BaseModel):
    """Experiment description: stage chain, sources and per-stage parameters."""

    pipeline: List[StageName] = ["temporal_spread", "impulse_noise", "despread"]
    sources: List[Source] = Field(default_factory=lambda: [ToneSource()])
    temporal: TemporalStage = TemporalStage()
    spatial: SpatialStage = SpatialStage()
    impulse_noise: ImpulseNoiseSpec = ImpulseNoiseSpec()
    awgn: AwgnSpec = AwgnSpec()
    seed: int = Field(default=settings.default_seed, ge=0)
    output_dir: Path = Path(settings.default_output_dir)

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _check_chain(self) -> "RunConfig":
        validate_chain(list(self.pipeline))
        if not self.sources:
            raise ValueError("at least one source is required")
        if len(self.sources) > 1 and "spatial_spread" not in self.pipeline:
            raise ValueError("several sources need a spatial_spread stage to share the channel")
        if "temporal_spread" in self.pipeline:
            self.temporal.to_config()
        if "spatial_spread" in self.pipeline:
            self.spatial.codes(len(self.sources))
        return self


class BandMeasurement(BaseModel):
    """Occupied band and flatness of one spectrum."""

    n_samples: int
    low_bin: int
    high_bin: int
    low_cycles_per_sample: float
    high_cycles_per_sample: float
    edge_bins: int
    edge_cycles_per_sample: float
    flatness: float


class UserResult(BaseModel):
    user: int
    n_samples: int
    nmse: float


class NoiseSummary(BaseModel):
    impulses: int = 0
    impulse_max_magnitude: float = 0.0
    impulse_mean_magnitude: float = 0.0
    awgn_snr_db: Optional[float] = None
    impulse_seed: Optional[int] = None
    awgn_seed: Optional[int] = None


class ExperimentReport(BaseModel):
    """Everything a run measured; fully determined by (config, seed)."""

    tool_version: str
    seed: int
    pipeline: List[str]
    stage_lengths: List[Tuple[str, int]]
    users: List[UserResult]
    nmse: float
    original: BandMeasurement
    baseline: BandMeasurement
    spread: BandMeasurement
    noise: NoiseSummary
    config: Dict[str, Any]
