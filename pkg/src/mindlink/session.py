"""Session orchestration: calibration, spelling, and the end-to-end link.

Everything here is deterministic in SessionConfig.seed: every schedule,
noise draw, and channel realization gets its own child seed derived from
(seed, purpose tag, indices), so reruns are byte-identical and individual
stages can be reproduced in isolation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import channel, codec, decoder as decoder_mod, metasurface, pipeline
from .eeg import DEFAULT_NOISE_UV_RMS, P300Template, synthesize_eeg
from .errors import MindlinkError, ParameterError
from .layout import DEFAULT_LAYOUT_CHARS, ButtonLayout
from .stimulus import build_schedule

# Child-seed purpose tags (stable across versions; changing one reshuffles
# every derived stream).
_TAG_CALIBRATION = 1
_TAG_SPELL = 2
_TAG_CHANNEL = 3
_TAG_BER = 4
_TAG_TRIAL = 5


@dataclass
class SessionConfig:
    """User-facing knobs for a full session."""

    seed: int = 0
    snr_eeg: float = 1.0  # template amplitude = snr_eeg * noise_uv_rms
    noise_uv_rms: float = DEFAULT_NOISE_UV_RMS
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
    output_dir: str | None = None

    def __post_init__(self):
        if self.snr_eeg < 0:
            raise ParameterError(f"snr_eeg must be >= 0, got {self.snr_eeg}")
        if self.noise_uv_rms < 0:
            raise ParameterError(
                f"noise_uv_rms must be >= 0, got {self.noise_uv_rms}"
            )
        if self.rounds_max < 1:
            raise ParameterError(f"rounds_max must be >= 1, got {self.rounds_max}")
        if self.calibration_trials < 2:
            raise ParameterError(
                f"calibration_trials must be >= 2, got {self.calibration_trials}"
            )
        codec.parse_bits(self.header)  # validates the header string

    @property
    def amplitude_uv(self) -> float:
        return self.snr_eeg * self.noise_uv_rms

    def layout(self) -> ButtonLayout:
        return ButtonLayout(self.layout_chars)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


def derive_seed(root: int, *path: int) -> int:
    """Stable child seed from a root seed and a purpose path."""
    entropy = [int(v) & 0xFFFFFFFFFFFFFFFF for v in (root, *path)]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def _template(config: SessionConfig, amplitude_uv: float | None = None) -> P300Template:
    amp = config.amplitude_uv if amplitude_uv is None else amplitude_uv
    return P300Template(amplitude_uv=amp)


# --------------------------------------------------------------------------
# calibration


@dataclass
class CalibrationResult:
    decoder: decoder_mod.P300Decoder
    report: list  # one dict per trial: target, scores, predicted
    feature_dim: int


def calibrate(config: SessionConfig) -> CalibrationResult:
    """Run the supervised calibration stage and fit the decoder.

    calibration_trials blocks of calibration_rounds rounds each; every
    block contributes one averaged feature per button, labelled +1 for the
    instructed target and -1 elsewhere.
    """
    layout = config.layout()
    n_buttons = layout.n_buttons
    template = _template(config)
    target_rng = np.random.default_rng(derive_seed(config.seed, _TAG_CALIBRATION, 0))

    examples = []
    trial_rows = []  # (target, list of AveragedFeature per button)
    for trial in range(config.calibration_trials):
        target = int(target_rng.integers(n_buttons))
        schedule = build_schedule(
            n_buttons=n_buttons,
            rounds=config.calibration_rounds,
            soa_ms=config.soa_ms,
            seed=derive_seed(config.seed, _TAG_CALIBRATION, trial, 1),
        )
        recording = synthesize_eeg(
            schedule,
            target,
            template,
            noise_uv_rms=config.noise_uv_rms,
            seed=derive_seed(config.seed, _TAG_CALIBRATION, trial, 2),
        )
        features = pipeline.featurize(recording, schedule)
        per_button = []
        for button in range(n_buttons):
            own = [f for f in features if f.button_id == button]
            averaged = pipeline.average_rounds(own, config.calibration_rounds)
            per_button.append(averaged)
            examples.append((averaged, 1.0 if button == target else -1.0))
        trial_rows.append((target, per_button))

    meta = {
        "n_trials": config.calibration_trials,
        "n_rounds": config.calibration_rounds,
        "seed": config.seed,
    }
    decoder = decoder_mod.train(
        examples, regularization=config.regularization, training_meta=meta
    )

    report = []
    for trial, (target, per_button) in enumerate(trial_rows):
        scores = np.array([decoder_mod.score(decoder, f) for f in per_button])
        predicted = int(np.argmax(scores))
        others = np.delete(scores, target)
        report.append(
            {
                "trial": trial,
                "target": target,
                "predicted": predicted,
                "target_score": float(scores[target]),
                "best_nontarget_score": float(others.max()),
                "margin": float(scores[target] - others.max()),
            }
        )
    return CalibrationResult(
        decoder=decoder, report=report, feature_dim=decoder.weights.size
    )


# --------------------------------------------------------------------------
# online spelling


@dataclass
class CharOutcome:
    intended_char: str
    intended_button: int
    selected_button: int
    selected_char: str
    rounds_used: int
    gap: float
    seconds: float


@dataclass
class SpellResult:
    requested: str
    spelled: str
    per_char: list  # of CharOutcome
    simulated_seconds: float

    @property
    def char_errors(self) -> int:
        return sum(
            1 for c in self.per_char if c.selected_button != c.intended_button
        )

    @property
    def mean_rounds(self) -> float:
        if not self.per_char:
            return 0.0
        return float(np.mean([c.rounds_used for c in self.per_char]))


def spell(
    config: SessionConfig,
    text: str,
    decoder: decoder_mod.P300Decoder,
    amplitude_uv: float | None = None,
) -> SpellResult:
    """Select each character of `text` with a fresh online trial."""
    layout = config.layout()
    for position, char in enumerate(text):
        if not layout.supports(char):
            raise ParameterError(
                f"character {char!r} at position {position} is not on the layout"
            )
    template = _template(config, amplitude_uv)
    outcomes = []
    for index, char in enumerate(text):
        target = layout.button_of(char)
        schedule = build_schedule(
            n_buttons=layout.n_buttons,
            rounds=config.rounds_max,
            soa_ms=config.soa_ms,
            seed=derive_seed(config.seed, _TAG_SPELL, index, 1),
        )
        recording = synthesize_eeg(
            schedule,
            target,
            template,
            noise_uv_rms=config.noise_uv_rms,
            seed=derive_seed(config.seed, _TAG_SPELL, index, 2),
        )
        trial = decoder_mod.run_online_trial(
            decoder, recording, schedule, config.threshold, config.rounds_max
        )
        outcomes.append(
            CharOutcome(
                intended_char=char,
                intended_button=target,
                selected_button=trial.button_id,
                selected_char=layout.char_of(trial.button_id),
                rounds_used=trial.rounds_used,
                gap=trial.gap,
                seconds=trial.rounds_used * layout.n_buttons * config.soa_ms / 1000.0,
            )
        )
    return SpellResult(
        requested=text,
        spelled="".join(c.selected_char for c in outcomes),
        per_char=outcomes,
        simulated_seconds=float(sum(c.seconds for c in outcomes)),
    )


@dataclass
class TrialRecord:
    target: int
    selected: int
    rounds_used: int
    gap: float


def simulate_trials(
    config: SessionConfig,
    decoder: decoder_mod.P300Decoder,
    n_trials: int,
    amplitude_uv: float | None = None,
) -> list:
    """Seeded online trials with random targets; used for accuracy studies."""
    layout = config.layout()
    template = _template(config, amplitude_uv)
    target_rng = np.random.default_rng(derive_seed(config.seed, _TAG_TRIAL, 0))
    records = []
    for index in range(n_trials):
        target = int(target_rng.integers(layout.n_buttons))
        schedule = build_schedule(
            n_buttons=layout.n_buttons,
            rounds=config.rounds_max,
            soa_ms=config.soa_ms,
            seed=derive_seed(config.seed, _TAG_TRIAL, index, 1),
        )
        recording = synthesize_eeg(
            schedule,
            target,
            template,
            noise_uv_rms=config.noise_uv_rms,
            seed=derive_seed(config.seed, _TAG_TRIAL, index, 2),
        )
        trial = decoder_mod.run_online_trial(
            decoder, recording, schedule, config.threshold, config.rounds_max
        )
        records.append(
            TrialRecord(
                target=target,
                selected=trial.button_id,
                rounds_used=trial.rounds_used,
                gap=trial.gap,
            )
        )
    return records


# --------------------------------------------------------------------------
# physical link


def keying_patterns(config: SessionConfig) -> tuple:
    """(high, low) patterns: broadside beam for '1', scattering control for '0'."""
    high = metasurface.uniform_pattern(
        config.array_n, 0, config.spacing_wavelengths
    )
    low = metasurface.rcs_pattern(
        config.array_n,
        config.rcs_level,
        seed=config.rcs_seed,
        spacing_wavelengths=config.spacing_wavelengths,
    )
    return high, low


def link_levels(config: SessionConfig) -> tuple:
    """Amplitude levels seen by the broadside receiver."""
    high, low = keying_patterns(config)
    return channel.symbol_levels(high, low, direction=(0.0, 0.0))


def channel_config(config: SessionConfig, stream_index: int = 0) -> channel.ChannelConfig:
    return channel.ChannelConfig(
        symbol_rate_hz=config.symbol_rate_hz,
        oversample=config.oversample,
        snr_db=config.snr_channel_db,
        adc_bits=config.adc_bits,
        seed=derive_seed(config.seed, _TAG_CHANNEL, stream_index),
    )


@dataclass
class TransmissionResult:
    bits: list
    levels: tuple
    stream: codec.SampleStream


def transmit_text(config: SessionConfig, text: str,
                  stream_index: int = 0) -> TransmissionResult:
    """Encode text and push it through the modulate/noise/ADC chain."""
    bits = codec.encode_text(text, config.header)
    levels = link_levels(config)
    stream = channel.transmit_bits(bits, levels, channel_config(config, stream_index))
    return TransmissionResult(bits=bits, levels=levels, stream=stream)


# --------------------------------------------------------------------------
# end to end


@dataclass
class E2EResult:
    requested: str
    spelled: str
    received: str
    char_errors: int
    bit_errors: int
    ber: float
    spell_result: SpellResult
    bits: list
    levels: tuple
    stream: codec.SampleStream
    decode_error: str | None = None

    @property
    def ok(self) -> bool:
        return self.char_errors == 0 and self.decode_error is None


def e2e(
    config: SessionConfig,
    text: str,
    decoder: decoder_mod.P300Decoder | None = None,
) -> E2EResult:
    """Full chain: spell -> frame -> keyed link -> header-sync decode.

    Character errors are counted against the requested text, so both BCI
    misselections and link bit errors surface in the result.  Decode
    failures (lost sync at very low SNR) are captured rather than raised so
    the caller can still inspect the waveforms.
    """
    if decoder is None:
        decoder = calibrate(config).decoder
    spelled = spell(config, text, decoder)
    transmission = transmit_text(config, spelled.spelled)

    received = ""
    decode_error = None
    try:
        received = codec.decode_stream(transmission.stream, config.header)
    except MindlinkError as exc:
        decode_error = f"{type(exc).__name__}: {exc}"

    high, low = transmission.levels
    sliced = channel.slice_symbols(transmission.stream, (high + low) / 2.0)
    sent = np.asarray(transmission.bits, dtype=int)
    bit_errors = int(np.sum(sliced[: sent.size] != sent)) if sent.size else 0
    ber = float(bit_errors / sent.size) if sent.size else 0.0

    pairs = zip(text, received)
    char_errors = sum(1 for a, b in pairs if a != b) + abs(len(text) - len(received))
    return E2EResult(
        requested=text,
        spelled=spelled.spelled,
        received=received,
        char_errors=char_errors,
        bit_errors=bit_errors,
        ber=ber,
        spell_result=spelled,
        bits=transmission.bits,
        levels=transmission.levels,
        stream=transmission.stream,
        decode_error=decode_error,
    )


# --------------------------------------------------------------------------
# reports and rates


def ber_over_snr(config: SessionConfig, snr_grid_db, n_bits: int = 100_000) -> list:
    """BER sweep over an SNR grid with the session's keying levels."""
    levels = link_levels(config)
    return channel.ber_sweep(
        snr_grid_db,
        levels,
        channel_config(config),
        n_bits=n_bits,
        seed=derive_seed(config.seed, _TAG_BER, 0),
    )


def channel_chars_per_sec(symbol_rate_hz: float, frame_bits: int) -> float:
    """Raw frame capacity of the link."""
    if frame_bits < 1:
        raise ParameterError(f"frame_bits must be >= 1, got {frame_bits}")
    return symbol_rate_hz / frame_bits


def spelling_chars_per_min(
    n_buttons: int = 40, soa_ms: float = 120.0, rounds: float = 1.0
) -> float:
    """Selection rate implied by the schedule arithmetic."""
    if rounds <= 0:
        raise ParameterError(f"rounds must be positive, got {rounds}")
    return 60_000.0 / (rounds * n_buttons * soa_ms)


def frame_bits(config: SessionConfig) -> int:
    return len(codec.parse_bits(config.header)) + codec.PAYLOAD_BITS


# --------------------------------------------------------------------------
# pattern synthesis and verification


def synthesize_pattern(
    kind: str,
    n: int = metasurface.DEFAULT_N,
    spacing_wavelengths: float = metasurface.DEFAULT_SPACING,
    state: int = 0,
    theta_deg: float = 30.0,
    axis: str = "x",
    mode: int = 1,
    level: int = 1,
    pattern_seed: int = 0,
) -> metasurface.CodingPattern:
    """Dispatch to the pattern constructors by kind name."""
    if kind == "uniform":
        return metasurface.uniform_pattern(n, state, spacing_wavelengths)
    if kind == "gradient":
        return metasurface.gradient_pattern(n, theta_deg, axis, spacing_wavelengths)
    if kind == "oam":
        return metasurface.oam_pattern(n, mode, spacing_wavelengths)
    if kind == "rcs":
        return metasurface.rcs_pattern(n, level, pattern_seed, spacing_wavelengths)
    raise ParameterError(f"unknown pattern kind {kind!r}")


def pattern_report(
    kind: str,
    pattern: metasurface.CodingPattern,
    farfield: metasurface.FarField,
    theta_deg: float = 30.0,
    mode: int = 1,
    level: int = 1,
) -> dict:
    """Verification metrics for a synthesized pattern.

    The `passed` flag encodes the per-kind checks: beam within tolerance
    (gradient/uniform), null depth and winding (oam), or reduction vs the
    uniform reference (rcs).
    """
    lobe_theta, lobe_phi, lobe_mag = metasurface.main_lobe(farfield)
    theta_step = float(farfield.theta_deg[1] - farfield.theta_deg[0])
    summary = {
        "kind": kind,
        "n": pattern.n,
        "spacing_wavelengths": pattern.spacing_wavelengths,
        "main_lobe_theta_deg": lobe_theta,
        "main_lobe_phi_deg": lobe_phi,
        "main_lobe_magnitude": lobe_mag,
    }
    if kind == "uniform":
        summary["passed"] = abs(lobe_theta) <= theta_step
    elif kind == "gradient":
        summary["target_theta_deg"] = theta_deg
        summary["beam_error_deg"] = abs(lobe_theta - theta_deg)
        summary["passed"] = summary["beam_error_deg"] <= 2.0
    elif kind == "oam":
        depth = metasurface.broadside_null_depth_db(farfield)
        winding = metasurface.phase_winding_turns(farfield)
        summary["mode"] = mode
        summary["null_depth_db"] = depth
        summary["winding_turns"] = winding
        summary["passed"] = bool(
            depth >= 20.0 and abs(winding - mode) <= 0.05 * abs(mode)
        )
    elif kind == "rcs":
        reference = metasurface.uniform_pattern(
            pattern.n, 0, pattern.spacing_wavelengths
        )
        reduction = metasurface.peak_reduction_db(pattern, reference)
        summary["level"] = level
        summary["reduction_db"] = reduction
        summary["passed"] = reduction >= 10.0 if level == 1 else reduction > 0.0
    else:
        raise ParameterError(f"unknown pattern kind {kind!r}")
    return summary
