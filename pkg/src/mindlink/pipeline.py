"""Preprocessing and feature extraction.

The chain follows the recording -> feature path used for P300 scoring:
0.5-20 Hz bandpass, 600 ms epochs, 200 ms pre-stimulus baseline correction,
decimation by 6 (250 Hz * 0.6 s / 6 = 25 points per channel), per-channel
z-scoring, row-major flattening to a 750-dim vector, and round averaging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ConsistencyError, ParameterError
from .eeg import EegRecording
from .stimulus import StimulusSchedule

EPOCH_S = 0.6
BASELINE_S = 0.2
DECIMATION = 6
# 250 Hz * 600 ms epochs decimated by 6 -> 25 points per channel
N_EPOCH_POINTS = len(range(0, 150, DECIMATION))
DEFAULT_BAND_HZ = (0.5, 20.0)
_ZSCORE_EPS = 1e-12


@dataclass
class FeatureVector:
    """Flattened z-scored epoch for one flash of one button."""

    values: np.ndarray
    button_id: int
    round_index: int


@dataclass
class AveragedFeature:
    """Mean of one button's feature vectors over the first R rounds."""

    values: np.ndarray
    button_id: int
    rounds_used: int


def bandpass(
    recording: EegRecording,
    low_hz: float = DEFAULT_BAND_HZ[0],
    high_hz: float = DEFAULT_BAND_HZ[1],
) -> EegRecording:
    """Zero-phase 4th-order Butterworth bandpass, applied per channel."""
    nyq = recording.sample_rate_hz / 2.0
    if not 0 < low_hz < high_hz < nyq:
        raise ParameterError(
            f"band edges must satisfy 0 < low < high < {nyq} Hz, "
            f"got ({low_hz}, {high_hz})"
        )
    sos = signal.butter(
        4, [low_hz, high_hz], btype="bandpass", output="sos", fs=recording.sample_rate_hz
    )
    filtered = signal.sosfiltfilt(sos, recording.data, axis=1)
    return EegRecording(
        data=filtered,
        sample_rate_hz=recording.sample_rate_hz,
        events=list(recording.events),
        channel_labels=list(recording.channel_labels),
    )


def epoch_window(sample_rate_hz: float) -> tuple:
    """(baseline_samples, epoch_samples) for the configured windows."""
    return int(round(BASELINE_S * sample_rate_hz)), int(round(EPOCH_S * sample_rate_hz))


def _zscore_rows(a: np.ndarray) -> np.ndarray:
    mu = a.mean(axis=-1, keepdims=True)
    sd = a.std(axis=-1, keepdims=True)
    out = np.zeros_like(a)
    ok = sd[..., 0] > _ZSCORE_EPS  # flat channels map to zeros, not 0/0
    np.divide(a - mu, sd, out=out, where=ok[..., None])
    return out


def extract_epoch(recording: EegRecording, onset_sample: int) -> np.ndarray:
    """Epoch one flash into a channels x 25 matrix.

    Takes [onset, onset + 600 ms), subtracts the per-channel mean of
    [onset - 200 ms, onset), keeps every 6th sample starting at the onset,
    then z-scores each channel (flat channels become zeros).
    """
    pre, win = epoch_window(recording.sample_rate_hz)
    if onset_sample < pre or onset_sample + win > recording.n_samples:
        raise ParameterError(
            f"onset {onset_sample} too close to the recording edge "
            f"(need {pre} samples before and {win} after)"
        )
    seg = recording.data[:, onset_sample : onset_sample + win]
    base = recording.data[:, onset_sample - pre : onset_sample].mean(axis=1)
    seg = seg - base[:, None]
    seg = seg[:, ::DECIMATION]
    return _zscore_rows(seg)


def flatten(epoch: np.ndarray) -> np.ndarray:
    """Concatenate the epoch rows: values[c*25 + s] = epoch[c][s]."""
    epoch = np.asarray(epoch)
    if epoch.ndim != 2 or epoch.shape[1] != N_EPOCH_POINTS:
        raise ParameterError(
            f"epoch must be channels x {N_EPOCH_POINTS}, got shape {epoch.shape}"
        )
    return epoch.reshape(-1).copy()


def unflatten(values: np.ndarray, n_channels: int) -> np.ndarray:
    """Inverse of flatten."""
    values = np.asarray(values)
    if values.size % n_channels != 0:
        raise ParameterError(
            f"cannot reshape {values.size} values into {n_channels} channels"
        )
    return values.reshape(n_channels, -1)


def featurize(
    recording: EegRecording,
    schedule: StimulusSchedule,
    low_hz: float = DEFAULT_BAND_HZ[0],
    high_hz: float = DEFAULT_BAND_HZ[1],
) -> list:
    """Bandpass the recording and extract one FeatureVector per flash.

    The recording's events must match the schedule flash-for-flash.  The
    epochs are gathered with one vectorized pass; the result is identical to
    calling extract_epoch on each onset.
    """
    if len(recording.events) != len(schedule.flashes):
        raise ConsistencyError(
            f"recording has {len(recording.events)} events, schedule has "
            f"{len(schedule.flashes)} flashes"
        )
    buttons = schedule.button_ids()
    ev_buttons = np.array([b for _, b in recording.events], dtype=int)
    if not np.array_equal(buttons, ev_buttons):
        raise ConsistencyError("event buttons do not match the schedule order")

    filtered = bandpass(recording, low_hz, high_hz)
    pre, win = epoch_window(recording.sample_rate_hz)
    onsets = np.array([s for s, _ in recording.events], dtype=int)
    if onsets.min() < pre or onsets.max() + win > recording.n_samples:
        raise ParameterError("an epoch falls outside the recording")

    # (flash, channel, sample) gather of all epochs at once
    idx = onsets[:, None] + np.arange(win)[None, :]
    epochs = filtered.data[:, idx].transpose(1, 0, 2)
    base_idx = onsets[:, None] + np.arange(-pre, 0)[None, :]
    baselines = filtered.data[:, base_idx].transpose(1, 0, 2).mean(axis=2)
    epochs = epochs - baselines[:, :, None]
    epochs = _zscore_rows(epochs[:, :, ::DECIMATION])

    n_buttons = schedule.n_buttons
    return [
        FeatureVector(
            values=epochs[k].reshape(-1),
            button_id=int(buttons[k]),
            round_index=k // n_buttons,
        )
        for k in range(len(onsets))
    ]


def average_rounds(features: list, rounds: int) -> AveragedFeature:
    """Elementwise mean over the first `rounds` feature vectors of one button.

    The list must contain round indices 0..rounds-1 exactly once each and a
    single button id throughout.
    """
    if rounds < 1:
        raise ParameterError(f"rounds must be >= 1, got {rounds}")
    if len(features) < rounds:
        raise ConsistencyError(
            f"need {rounds} feature vectors, got {len(features)}"
        )
    buttons = {f.button_id for f in features}
    if len(buttons) != 1:
        raise ConsistencyError(f"mixed buttons in feature list: {sorted(buttons)}")
    wanted = {}
    for f in features:
        if f.round_index < rounds:
            if f.round_index in wanted:
                raise ConsistencyError(f"round {f.round_index} present twice")
            wanted[f.round_index] = f
    missing = set(range(rounds)) - set(wanted)
    if missing:
        raise ConsistencyError(f"missing rounds: {sorted(missing)}")

    stack = np.stack([wanted[r].values for r in range(rounds)])
    return AveragedFeature(
        values=stack.mean(axis=0),
        button_id=features[0].button_id,
        rounds_used=rounds,
    )


def save_features(features: list, path) -> None:
    """Dump features as CSV: one row per flash (button, round, 750 values)."""
    if not features:
        raise ParameterError("no features to save")
    dim = features[0].values.size
    header = "button,round," + ",".join(f"v{i}" for i in range(dim))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for f in features:
            row = ",".join(repr(v) for v in f.values.tolist())
            fh.write(f"{f.button_id},{f.round_index},{row}\n")


def load_features(path) -> list:
    """Read a CSV written by save_features."""
    from .errors import FormatError

    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("button,round,"):
        raise FormatError(f"{path}: expected header 'button,round,v0..'")
    n_cols = len(lines[0].split(","))
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise FormatError(
                f"{path}: line {lineno}: expected {n_cols} columns, got {len(parts)}"
            )
        try:
            out.append(
                FeatureVector(
                    values=np.array([float(p) for p in parts[2:]]),
                    button_id=int(parts[0]),
                    round_index=int(parts[1]),
                )
            )
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
    return out
