"""Character framing and stream decoding for the amplitude-keyed link.

A frame is a fixed bit header followed by the 8-bit ASCII code of one
character, MSB first; 'A' with the default 14-bit header is
'1111111000000001000001'.  The receiver sees amplitude samples taken at 10x
the symbol rate: it thresholds the mid-symbol sample of each group of 10,
locates the header, and slices the following 8 symbols into a byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EncodingError,
    FormatError,
    ParameterError,
    SyncError,
    TruncationError,
)

# Canonical header, read off the worked 'A' example (22 bits - 8 payload).
DEFAULT_HEADER = "11111110000000"
# 13-bit variant quoted elsewhere; selectable via configuration.
ALT_HEADER_13 = "1111111110000"

DEFAULT_SYMBOL_RATE_HZ = 1e6
DEFAULT_SAMPLE_RATE_HZ = 1e7
PAYLOAD_BITS = 8


def parse_bits(bits) -> list:
    """Normalize a '0'/'1' string or an int sequence to a list of ints."""
    if isinstance(bits, str):
        cleaned = bits.strip()
        if not cleaned or any(c not in "01" for c in cleaned):
            raise ParameterError(f"not a bit string: {bits!r}")
        return [int(c) for c in cleaned]
    out = [int(b) for b in bits]
    if any(b not in (0, 1) for b in out):
        raise ParameterError("bit values must be 0 or 1")
    return out


@dataclass
class SampleStream:
    """Detector amplitudes sampled at an integer multiple of the symbol rate."""

    samples: np.ndarray
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    symbol_rate_hz: float = DEFAULT_SYMBOL_RATE_HZ

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float).reshape(-1)
        if self.symbol_rate_hz <= 0 or self.sample_rate_hz <= 0:
            raise ParameterError("rates must be positive")
        ratio = self.sample_rate_hz / self.symbol_rate_hz
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ParameterError(
                f"sample rate must be an integer multiple of the symbol rate, "
                f"got ratio {ratio}"
            )

    @property
    def oversample(self) -> int:
        return int(round(self.sample_rate_hz / self.symbol_rate_hz))

    @property
    def n_symbols(self) -> int:
        return self.samples.size // self.oversample


def encode_char(c: str, header=DEFAULT_HEADER) -> list:
    """Frame one character: header bits then its 8-bit code, MSB first."""
    if len(c) != 1:
        raise EncodingError(f"expected a single character, got {c!r}")
    code = ord(c)
    if code > 255:
        raise EncodingError(f"character {c!r} (U+{code:04X}) is not 8-bit ASCII")
    payload = [(code >> (PAYLOAD_BITS - 1 - i)) & 1 for i in range(PAYLOAD_BITS)]
    return parse_bits(header) + payload


def encode_text(text: str, header=DEFAULT_HEADER) -> list:
    """Concatenate one frame per character."""
    bits = []
    for position, c in enumerate(text):
        try:
            bits.extend(encode_char(c, header))
        except EncodingError as exc:
            raise EncodingError(f"character {position}: {exc}") from exc
    return bits


def _symbol_bits(stream: SampleStream, threshold: float) -> np.ndarray:
    """Mid-symbol samples of every whole symbol, thresholded to bits."""
    os = stream.oversample
    mids = np.arange(os // 2, stream.n_symbols * os, os)
    return (stream.samples[mids] > threshold).astype(int)


def midpoint_threshold(samples: np.ndarray) -> float:
    return float((np.min(samples) + np.max(samples)) / 2.0)


def locate_header(stream: SampleStream, header=DEFAULT_HEADER, threshold=None,
                  start_sample: int = 0) -> int:
    """Find the first symbol-aligned header occurrence.

    The stream is sliced into symbols (mid sample of each oversample group),
    thresholded, and scanned for an exact header match starting at
    start_sample.  Returns the sample index of the header start.

    Raises SyncError if the stream holds no complete header.
    """
    header_bits = np.array(parse_bits(header))
    os = stream.oversample
    if threshold is None:
        if stream.samples.size == 0:
            raise SyncError("empty stream")
        threshold = midpoint_threshold(stream.samples)
    bits = _symbol_bits(stream, threshold)
    h = header_bits.size
    first_symbol = max(0, -(-start_sample // os))  # ceil division
    if bits.size - first_symbol < h:
        raise SyncError(
            f"stream too short for a {h}-bit header after sample {start_sample}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(bits[first_symbol:], h)
    matches = np.nonzero((windows == header_bits).all(axis=1))[0]
    if matches.size == 0:
        raise SyncError("no frame header found")
    return int((first_symbol + matches[0]) * os)


def slice_bits(stream: SampleStream, start_sample: int, n_bits: int,
               threshold: float) -> list:
    """Threshold n_bits consecutive symbols starting at a sample offset."""
    os = stream.oversample
    if start_sample % os != 0:
        raise ParameterError(f"start_sample {start_sample} is not symbol-aligned")
    first = start_sample // os
    bits = _symbol_bits(stream, threshold)
    if first + n_bits > bits.size:
        raise ParameterError("not enough symbols in the stream")
    return [int(b) for b in bits[first : first + n_bits]]


def decode_stream(stream: SampleStream, header=DEFAULT_HEADER) -> str:
    """Recover text from an amplitude stream.

    Repeatedly: locate the next header (global midpoint threshold), rebuild
    the threshold from the header span itself (both levels occur there),
    slice the 8 payload symbols, and append the character.  Decoding stops
    when no further header exists.

    Raises SyncError when a nonempty stream contains no header at all, and
    TruncationError when a header is followed by fewer than 8 payload
    symbols (the partial bits are attached to the error).
    """
    if stream.samples.size == 0:
        return ""
    header_bits = parse_bits(header)
    h = len(header_bits)
    os = stream.oversample
    frame_samples = (h + PAYLOAD_BITS) * os
    global_thr = midpoint_threshold(stream.samples)

    text = []
    pos = 0
    while True:
        try:
            idx = locate_header(stream, header_bits, global_thr, start_sample=pos)
        except SyncError:
            if not text:
                raise
            break
        span = stream.samples[idx : idx + h * os]
        frame_thr = midpoint_threshold(span)
        if idx + frame_samples > stream.n_symbols * os:
            available = stream.n_symbols - (idx // os + h)
            recovered = slice_bits(stream, idx + h * os, available, frame_thr)
            raise TruncationError(
                f"frame at sample {idx} truncated: {available} of "
                f"{PAYLOAD_BITS} payload bits present",
                bits_recovered=recovered,
            )
        payload = slice_bits(stream, idx + h * os, PAYLOAD_BITS, frame_thr)
        code = 0
        for b in payload:
            code = (code << 1) | b
        text.append(chr(code))
        pos = idx + frame_samples
    return "".join(text)


def bits_to_text(bits) -> str:
    """Serialize bits as an ASCII '0'/'1' string."""
    return "".join(str(b) for b in parse_bits(bits))


def save_bits(bits, path) -> None:
    with open(path, "w") as fh:
        fh.write(bits_to_text(bits) + "\n")


def load_bits(path) -> list:
    with open(path) as fh:
        content = fh.read().strip()
    try:
        return parse_bits(content)
    except ParameterError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def stream_to_csv(stream: SampleStream) -> str:
    """CSV serialization: header line then `index,amplitude` rows."""
    lines = ["index,amplitude"]
    lines.extend(f"{i},{v!r}" for i, v in enumerate(stream.samples.tolist()))
    return "\n".join(lines) + "\n"


def stream_from_csv(
    text: str,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
    symbol_rate_hz: float = DEFAULT_SYMBOL_RATE_HZ,
) -> SampleStream:
    """Parse the stream_to_csv format."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "index,amplitude":
        raise FormatError("expected header 'index,amplitude'")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected 2 columns, got {len(parts)}")
        try:
            values.append(float(parts[1]))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    return SampleStream(
        samples=np.array(values),
        sample_rate_hz=sample_rate_hz,
        symbol_rate_hz=symbol_rate_hz,
    )


def save_stream(stream: SampleStream, path, fmt: str = "csv") -> None:
    """Write a stream as CSV (`index,amplitude`) or raw little-endian f32."""
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write(stream_to_csv(stream))
    elif fmt == "f32":
        with open(path, "wb") as fh:
            fh.write(stream.samples.astype("<f4").tobytes())
    else:
        raise ParameterError(f"unknown stream format {fmt!r}")


def load_stream(
    path,
    fmt: str = "csv",
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
    symbol_rate_hz: float = DEFAULT_SYMBOL_RATE_HZ,
) -> SampleStream:
    """Read a stream written by save_stream."""
    if fmt == "csv":
        with open(path) as fh:
            try:
                return stream_from_csv(fh.read(), sample_rate_hz, symbol_rate_hz)
            except FormatError as exc:
                raise FormatError(f"{path}: {exc}") from exc
    elif fmt == "f32":
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) % 4 != 0:
            raise FormatError(f"{path}: length {len(raw)} is not a multiple of 4")
        samples = np.frombuffer(raw, dtype="<f4").astype(float)
        return SampleStream(
            samples=samples,
            sample_rate_hz=sample_rate_hz,
            symbol_rate_hz=symbol_rate_hz,
        )
    raise ParameterError(f"unknown stream format {fmt!r}")
