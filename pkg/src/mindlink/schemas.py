"""Request/response models of the HTTP service.

These mirror the core dataclasses closely; heavyweight artifacts (sample
streams, far fields, patterns) travel as the same CSV/text payloads the
file formats use, so clients can write them to disk byte-identically.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from . import codec
from .decoder import P300Decoder
from .layout import DEFAULT_LAYOUT_CHARS
from .session import SessionConfig


class ConfigModel(BaseModel):
    """Wire form of SessionConfig; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    snr_eeg: float = 1.0
    noise_uv_rms: float = 8.0
    snr_channel_db: float = 30.0
    rounds_max: int = 10
    threshold: float = 0.2
    header: str = codec.DEFAULT_HEADER
    array_n: int = 20
    spacing_wavelengths: float = 0.5
    soa_ms: float = 120.0
    calibration_trials: int = 30
    calibration_rounds: int = 10
    regularization: float = 1.0
    rcs_level: int = 1
    rcs_seed: int = 0
    adc_bits: int = 12
    oversample: int = 10
    symbol_rate_hz: float = 1e6
    layout_chars: str = DEFAULT_LAYOUT_CHARS
    output_dir: Optional[str] = None

    def to_session_config(self) -> SessionConfig:
        return SessionConfig(**self.model_dump())

    @classmethod
    def from_session_config(cls, config: SessionConfig) -> "ConfigModel":
        return cls(**config.to_dict())


class DecoderModel(BaseModel):
    """Wire form of a trained decoder; matches the decoder JSON file."""

    model_config = ConfigDict(populate_by_name=True)

    regularization: float = Field(alias="lambda")
    bias: float
    weights: list[float]
    training_meta: dict = Field(default_factory=dict)

    def to_decoder(self) -> P300Decoder:
        return P300Decoder(
            weights=self.weights,
            bias=self.bias,
            regularization=self.regularization,
            training_meta=dict(self.training_meta),
        )

    @classmethod
    def from_decoder(cls, decoder: P300Decoder) -> "DecoderModel":
        return cls(
            regularization=decoder.regularization,
            bias=decoder.bias,
            weights=[float(w) for w in decoder.weights],
            training_meta=decoder.training_meta,
        )


class CalibrationTrialRow(BaseModel):
    trial: int
    target: int
    predicted: int
    target_score: float
    best_nontarget_score: float
    margin: float


class CalibrateRequest(BaseModel):
    config: ConfigModel = Field(default_factory=ConfigModel)


class CalibrateResponse(BaseModel):
    decoder: DecoderModel
    report: list[CalibrationTrialRow]
    feature_dim: int


class CharOutcomeModel(BaseModel):
    intended_char: str
    intended_button: int
    selected_button: int
    selected_char: str
    rounds_used: int
    gap: float
    seconds: float


class SpellRequest(BaseModel):
    text: str
    config: ConfigModel = Field(default_factory=ConfigModel)
    decoder: DecoderModel


class SpellResponse(BaseModel):
    requested: str
    spelled: str
    per_char: list[CharOutcomeModel]
    simulated_seconds: float
    char_errors: int
    mean_rounds: float


class EncodeRequest(BaseModel):
    text: str
    header: str = codec.DEFAULT_HEADER


class EncodeResponse(BaseModel):
    bits: str
    frame_bits: int
    n_frames: int


class TransmitRequest(BaseModel):
    bits: str
    config: ConfigModel = Field(default_factory=ConfigModel)


class TransmitResponse(BaseModel):
    stream_csv: str
    high_level: float
    low_level: float
    n_samples: int
    sample_rate_hz: float
    symbol_rate_hz: float


class ReceiveRequest(BaseModel):
    stream_csv: str
    header: str = codec.DEFAULT_HEADER
    sample_rate_hz: float = codec.DEFAULT_SAMPLE_RATE_HZ
    symbol_rate_hz: float = codec.DEFAULT_SYMBOL_RATE_HZ


class ReceiveResponse(BaseModel):
    text: str


class E2ERequest(BaseModel):
    text: str
    config: ConfigModel = Field(default_factory=ConfigModel)
    decoder: Optional[DecoderModel] = None


class ThroughputModel(BaseModel):
    chars_per_sec: float
    chars_per_min_one_round: float
    frame_bits: int


class E2EResponse(BaseModel):
    requested: str
    spelled: str
    received: str
    char_errors: int
    bit_errors: int
    ber: float
    ok: bool
    decode_error: Optional[str] = None
    per_char: list[CharOutcomeModel]
    simulated_seconds: float
    mean_rounds: float
    bits: str
    high_level: float
    low_level: float
    stream_csv: str
    throughput: ThroughputModel


class PatternRequest(BaseModel):
    kind: Literal["uniform", "gradient", "oam", "rcs"]
    n: int = 20
    spacing_wavelengths: float = 0.5
    state: int = 0
    theta_deg: float = 30.0
    axis: Literal["x", "y"] = "x"
    mode: int = 1
    level: int = 1
    pattern_seed: int = 0
    theta_step_deg: float = 0.5
    phi_step_deg: float = 2.0
    db: bool = False


class PatternResponse(BaseModel):
    pattern_text: str
    farfield_csv: str
    summary: dict
    passed: bool


class FarfieldRequest(BaseModel):
    pattern_text: str
    spacing_wavelengths: float = 0.5
    theta_step_deg: float = 0.5
    phi_step_deg: float = 2.0
    db: bool = False


class FarfieldResponse(BaseModel):
    farfield_csv: str
    summary: dict


class BerPoint(BaseModel):
    snr_db: float
    ber: float


class BerSweepRequest(BaseModel):
    snr_grid_db: list[float] = Field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0])
    n_bits: int = 100_000
    config: ConfigModel = Field(default_factory=ConfigModel)


class BerSweepResponse(BaseModel):
    points: list[BerPoint]
    csv: str
    monotone: bool


class HealthResponse(BaseModel):
    status: str
    version: str
