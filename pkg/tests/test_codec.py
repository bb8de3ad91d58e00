import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mindlink.codec import (
    ALT_HEADER_13,
    DEFAULT_HEADER,
    PAYLOAD_BITS,
    SampleStream,
    bits_to_text,
    decode_stream,
    encode_char,
    encode_text,
    load_bits,
    load_stream,
    locate_header,
    midpoint_threshold,
    parse_bits,
    save_bits,
    save_stream,
    slice_bits,
    stream_from_csv,
    stream_to_csv,
)
from mindlink.errors import (
    EncodingError,
    FormatError,
    ParameterError,
    SyncError,
    TruncationError,
)

HIGH, LOW = 1.0, 0.125  # float32-exact levels for the file round trips


def _ook(bits, oversample=10, high=HIGH, low=LOW):
    levels = np.where(np.array(parse_bits(bits)) == 1, high, low)
    samples = np.repeat(levels, oversample)
    return SampleStream(samples, sample_rate_hz=1e7, symbol_rate_hz=1e6)


def test_header_constants():
    assert DEFAULT_HEADER == "11111110000000"
    assert len(DEFAULT_HEADER) == 14
    assert ALT_HEADER_13 == "1111111110000"
    assert len(ALT_HEADER_13) == 13


def test_frame_layout_for_A():
    assert bits_to_text(encode_char("A")) == "1111111000000001000001"


def test_frame_is_header_plus_msb_first_payload():
    bits = encode_char("\x81")  # 0x81 = 10000001 exercises both end bits
    assert bits[:14] == parse_bits(DEFAULT_HEADER)
    assert bits[14:] == [1, 0, 0, 0, 0, 0, 0, 1]
    assert len(bits) == 14 + PAYLOAD_BITS


def test_alternate_header_framing():
    bits = encode_char("A", header=ALT_HEADER_13)
    assert len(bits) == 13 + 8
    assert bits[:13] == parse_bits(ALT_HEADER_13)


def test_encode_text_concatenates_frames():
    bits = encode_text("AB")
    assert bits == encode_char("A") + encode_char("B")
    assert encode_text("") == []


def test_encode_rejects_wide_characters_with_position():
    with pytest.raises(EncodingError, match="character 2"):
        encode_text("ABΔ")
    with pytest.raises(EncodingError):
        encode_char("Δ")
    with pytest.raises(EncodingError):
        encode_char("AB")


def test_parse_bits_forms():
    assert parse_bits("0110") == [0, 1, 1, 0]
    assert parse_bits([1, 0, 1]) == [1, 0, 1]
    assert parse_bits(np.array([1, 0])) == [1, 0]
    with pytest.raises(ParameterError):
        parse_bits("01x0")
    with pytest.raises(ParameterError):
        parse_bits("")
    with pytest.raises(ParameterError):
        parse_bits([0, 2])


def test_stream_requires_integer_oversample():
    with pytest.raises(ParameterError):
        SampleStream(np.zeros(10), sample_rate_hz=2.5e6, symbol_rate_hz=1e6)
    stream = _ook("10")
    assert stream.oversample == 10
    assert stream.n_symbols == 2


def test_midpoint_threshold():
    assert midpoint_threshold(np.array([0.0, 1.0, 0.25])) == 0.5


def test_locate_header_at_offset():
    bits = "0101" + DEFAULT_HEADER + "10000001"
    stream = _ook(bits)
    assert locate_header(stream) == 4 * 10


def test_locate_header_start_sample_skips_first_match():
    bits = DEFAULT_HEADER + "10000001" + DEFAULT_HEADER + "01000001"
    stream = _ook(bits)
    assert locate_header(stream) == 0
    assert locate_header(stream, start_sample=10) == 22 * 10


def test_locate_header_failure_modes():
    with pytest.raises(SyncError):
        locate_header(_ook("0000000000000011"))
    with pytest.raises(SyncError):
        locate_header(_ook("01"))  # too short for any header


def test_slice_bits_alignment_checks():
    stream = _ook("1100")
    assert slice_bits(stream, 0, 4, 0.5) == [1, 1, 0, 0]
    with pytest.raises(ParameterError):
        slice_bits(stream, 5, 2, 0.5)
    with pytest.raises(ParameterError):
        slice_bits(stream, 0, 5, 0.5)


def test_decode_round_trip_multi_frame():
    text = "HELLO, WORLD!"
    stream = _ook(encode_text(text))
    assert decode_stream(stream) == text


def test_decode_ignores_leading_junk():
    bits = [0, 1, 0, 0, 1] + encode_text("OK")
    assert decode_stream(_ook(bits)) == "OK"


def test_decode_empty_and_headerless():
    empty = SampleStream(np.array([]), sample_rate_hz=1e7, symbol_rate_hz=1e6)
    assert decode_stream(empty) == ""
    with pytest.raises(SyncError):
        decode_stream(_ook("000000000000000011"))


def test_truncated_frame_reports_partial_payload():
    bits = encode_text("A")
    stream = _ook(bits[:-3])  # last three payload symbols missing
    with pytest.raises(TruncationError) as err:
        decode_stream(stream)
    assert err.value.bits_recovered == bits[14:-3]


def test_decode_with_alternate_header():
    text = "SEU"
    stream = _ook(encode_text(text, header=ALT_HEADER_13))
    assert decode_stream(stream, header=ALT_HEADER_13) == text


@settings(max_examples=30, deadline=None)
@given(st.text(st.characters(min_codepoint=0, max_codepoint=255),
               min_size=1, max_size=6))
def test_any_latin1_text_round_trips(text):
    stream = _ook(encode_text(text))
    assert decode_stream(stream) == text


def test_bits_file_round_trip(tmp_path):
    bits = encode_text("HI")
    path = tmp_path / "bits.txt"
    save_bits(bits, path)
    assert load_bits(path) == bits


def test_stream_csv_round_trip(tmp_path):
    stream = _ook(encode_text("Z"))
    text = stream_to_csv(stream)
    assert text.splitlines()[0] == "index,amplitude"
    back = stream_from_csv(text)
    assert np.array_equal(back.samples, stream.samples)

    path = tmp_path / "stream.csv"
    save_stream(stream, path, fmt="csv")
    loaded = load_stream(path, fmt="csv")
    assert np.array_equal(loaded.samples, stream.samples)
    assert decode_stream(loaded) == "Z"


def test_stream_f32_round_trip(tmp_path):
    stream = _ook(encode_text("Q"))
    path = tmp_path / "stream.f32"
    save_stream(stream, path, fmt="f32")
    loaded = load_stream(path, fmt="f32")
    # HIGH/LOW are exactly representable in float32
    assert np.array_equal(loaded.samples, stream.samples)
    assert decode_stream(loaded) == "Q"


def test_stream_csv_rejects_bad_rows():
    with pytest.raises(FormatError):
        stream_from_csv("index,amplitude\n0,abc\n")


def test_save_stream_rejects_unknown_format(tmp_path):
    stream = _ook("10")
    with pytest.raises(ParameterError):
        save_stream(stream, tmp_path / "s.bin", fmt="f64")
