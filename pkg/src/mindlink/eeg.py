"""Synthetic EEG generation and CSV import/export.

The synthesizer stands in for the human operator: background noise runs on
all 30 channels, and every flash of the attended button adds a P300-like
Gaussian deflection peaking ~300 ms after the flash onset.  Everything is
in microvolts at 250 Hz.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import FormatError, ParameterError
from .stimulus import StimulusSchedule

SAMPLE_RATE_HZ = 250.0
N_CHANNELS = 30

# 10-20 montage labels for a 30-channel cap, frontal to occipital.
CHANNEL_LABELS = [
    "FP1", "FP2", "F7", "F3", "FZ", "F4", "F8",
    "FT7", "FC3", "FCZ", "FC4", "FT8",
    "T7", "C3", "CZ", "C4", "T8",
    "TP7", "CP3", "CPZ", "CP4", "TP8",
    "P7", "P3", "PZ", "P4", "P8",
    "O1", "OZ", "O2",
]

# First parieto-occipital index: channels from here on carry full gain.
_POSTERIOR_START = CHANNEL_LABELS.index("P7")

DEFAULT_AMPLITUDE_UV = 8.0
DEFAULT_NOISE_UV_RMS = 8.0
NOISE_LOWPASS_HZ = 40.0

# Extra samples synthesized before the first flash (room for the 200 ms
# baseline window) and after the last epoch.
PRE_ROLL_S = 0.4
POST_ROLL_S = 0.4


def default_channel_gains() -> np.ndarray:
    """P300 topography: gain 1 on posterior channels, fading frontally."""
    gains = np.ones(N_CHANNELS)
    ramp = np.linspace(0.3, 1.0, _POSTERIOR_START + 1)
    gains[: _POSTERIOR_START + 1] = ramp
    return gains


@dataclass
class P300Template:
    """Gaussian deflection added to target-flash epochs."""

    latency_ms: float = 300.0
    width_ms: float = 80.0  # Gaussian std
    amplitude_uv: float = DEFAULT_AMPLITUDE_UV
    channel_gains: np.ndarray = field(default_factory=default_channel_gains)

    def __post_init__(self):
        if self.latency_ms <= 0:
            raise ParameterError(f"latency_ms must be positive, got {self.latency_ms}")
        if self.width_ms <= 0:
            raise ParameterError(f"width_ms must be positive, got {self.width_ms}")
        if self.amplitude_uv < 0:
            raise ParameterError(
                f"amplitude_uv must be >= 0, got {self.amplitude_uv}"
            )
        gains = np.asarray(self.channel_gains, dtype=float)
        if gains.ndim != 1 or np.any(gains < 0):
            raise ParameterError("channel_gains must be a 1-D nonnegative vector")
        peak = gains.max() if gains.size else 0.0
        if peak > 0:
            gains = gains / peak  # normalize so the strongest channel has gain 1
        self.channel_gains = gains

    def waveform(self, n_samples: int, sample_rate_hz: float = SAMPLE_RATE_HZ) -> np.ndarray:
        """Sampled template over an epoch of n_samples starting at the onset."""
        t_ms = np.arange(n_samples) / sample_rate_hz * 1000.0
        return self.amplitude_uv * np.exp(
            -((t_ms - self.latency_ms) ** 2) / (2.0 * self.width_ms**2)
        )


@dataclass
class EegRecording:
    """Multichannel voltage time series plus flash-event markers."""

    data: np.ndarray  # channels x samples, microvolts
    sample_rate_hz: float = SAMPLE_RATE_HZ
    events: list = field(default_factory=list)  # of (sample_index, button_id)
    channel_labels: list = field(default_factory=lambda: list(CHANNEL_LABELS))

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ParameterError("data must be a channels x samples matrix")
        if self.sample_rate_hz <= 0:
            raise ParameterError("sample_rate_hz must be positive")
        if len(self.channel_labels) != self.data.shape[0]:
            raise ParameterError(
                f"{len(self.channel_labels)} labels for {self.data.shape[0]} channels"
            )
        n = self.data.shape[1]
        for sample, _ in self.events:
            if not 0 <= sample < n:
                raise ParameterError(f"event at sample {sample} outside [0, {n})")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


def _noise(n_channels, n_samples, rms_uv, sample_rate_hz, rng):
    """White Gaussian noise low-passed at 40 Hz, rescaled per channel."""
    if rms_uv == 0:
        return np.zeros((n_channels, n_samples))
    x = rng.standard_normal((n_channels, n_samples))
    sos = signal.butter(
        4, NOISE_LOWPASS_HZ / (sample_rate_hz / 2.0), btype="low", output="sos"
    )
    x = signal.sosfiltfilt(sos, x, axis=1)
    x *= rms_uv / x.std(axis=1, keepdims=True)
    return x


def synthesize_eeg(
    schedule: StimulusSchedule,
    target: int,
    template: P300Template | None = None,
    noise_uv_rms: float = DEFAULT_NOISE_UV_RMS,
    seed: int = 0,
) -> EegRecording:
    """Generate a recording for one selection block.

    Noise is drawn first and independently of the template, so for a fixed
    seed the recording is exactly linear in template.amplitude_uv.

    Args:
        schedule: flash plan to simulate.
        target: attended button; its flashes receive the template.
        template: P300 shape; defaults to the stock template.
        noise_uv_rms: per-channel background RMS in microvolts (0 = noiseless).
        seed: RNG seed for the noise.

    Returns:
        EegRecording with one event per flash, in schedule order.
    """
    if template is None:
        template = P300Template()
    if not 0 <= target < schedule.n_buttons:
        raise ParameterError(
            f"target {target} out of range for {schedule.n_buttons} buttons"
        )
    if noise_uv_rms < 0:
        raise ParameterError(f"noise_uv_rms must be >= 0, got {noise_uv_rms}")
    n_channels = len(template.channel_gains)

    fs = SAMPLE_RATE_HZ
    pre_roll = int(round(PRE_ROLL_S * fs))
    post_roll = int(round(POST_ROLL_S * fs))
    onsets = pre_roll + np.round(schedule.onsets_ms() * fs / 1000.0).astype(int)
    epoch_len = int(round(0.6 * fs))
    n_samples = int(onsets[-1]) + epoch_len + post_roll

    rng = np.random.default_rng(seed)
    data = _noise(n_channels, n_samples, noise_uv_rms, fs, rng)

    bump = template.waveform(epoch_len, fs)
    contribution = template.channel_gains[:, None] * bump[None, :]
    buttons = schedule.button_ids()
    for onset, button in zip(onsets, buttons):
        if button == target:
            data[:, onset : onset + epoch_len] += contribution

    events = [(int(o), int(b)) for o, b in zip(onsets, buttons)]
    labels = (
        list(CHANNEL_LABELS)
        if n_channels == N_CHANNELS
        else [f"CH{i + 1}" for i in range(n_channels)]
    )
    return EegRecording(
        data=data, sample_rate_hz=fs, events=events, channel_labels=labels
    )


def save_recording(recording: EegRecording, path, events_path=None) -> None:
    """Write the recording as CSV (t_ms,ch1..chN) plus a separate events CSV.

    Values are printed at full precision (repr) so load_recording round-trips
    bit-exactly.
    """
    if events_path is None:
        events_path = _default_events_path(path)
    n_ch = recording.channels
    header = "t_ms," + ",".join(f"ch{i + 1}" for i in range(n_ch))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for s in range(recording.n_samples):
            t_ms = s / recording.sample_rate_hz * 1000.0
            row = ",".join(repr(v) for v in recording.data[:, s].tolist())
            fh.write(f"{t_ms!r},{row}\n")
    with open(events_path, "w") as fh:
        fh.write("sample_index,button_id\n")
        for sample, button in recording.events:
            fh.write(f"{sample},{button}\n")


def load_recording(path, events_path=None) -> EegRecording:
    """Read a recording written by save_recording."""
    if events_path is None:
        events_path = _default_events_path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != "t_ms" or len(header) < 2:
        raise FormatError(f"{path}: line 1: expected header 't_ms,ch1..chN'")
    n_ch = len(header) - 1

    times = []
    columns = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != n_ch + 1:
            raise FormatError(
                f"{path}: line {lineno}: expected {n_ch + 1} columns, got {len(parts)}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
        times.append(values[0])
        columns.append(values[1:])
    if not columns:
        raise FormatError(f"{path}: no samples")

    data = np.array(columns).T
    if len(times) > 1:
        dt_ms = times[1] - times[0]
        if dt_ms <= 0:
            raise FormatError(f"{path}: non-increasing t_ms column")
        fs = 1000.0 / dt_ms
    else:
        fs = SAMPLE_RATE_HZ

    events = []
    try:
        with open(events_path) as fh:
            ev_lines = fh.read().splitlines()
    except FileNotFoundError:
        ev_lines = []
    for lineno, line in enumerate(ev_lines, start=1):
        if not line or line.startswith("sample_index"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(
                f"{events_path}: line {lineno}: expected 2 columns, got {len(parts)}"
            )
        try:
            events.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise FormatError(f"{events_path}: line {lineno}: {exc}") from exc

    labels = (
        list(CHANNEL_LABELS)
        if n_ch == N_CHANNELS
        else [f"CH{i + 1}" for i in range(n_ch)]
    )
    return EegRecording(
        data=data, sample_rate_hz=fs, events=events, channel_labels=labels
    )


def _default_events_path(path):
    path = str(path)
    stem = path[:-4] if path.endswith(".csv") else path
    return stem + ".events.csv"
