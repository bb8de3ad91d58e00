import numpy as np
import pytest

from mindlink.eeg import EegRecording, synthesize_eeg
from mindlink.errors import ConsistencyError, FormatError, ParameterError
from mindlink.pipeline import (
    FeatureVector,
    N_EPOCH_POINTS,
    average_rounds,
    bandpass,
    epoch_window,
    extract_epoch,
    featurize,
    flatten,
    load_features,
    save_features,
    unflatten,
)
from mindlink.stimulus import build_schedule


def _recording(n_buttons=4, rounds=2, target=1, seed=0, noise=3.0):
    sched = build_schedule(n_buttons=n_buttons, rounds=rounds, seed=seed)
    return sched, synthesize_eeg(sched, target, noise_uv_rms=noise, seed=seed)


def test_epoch_window_sample_counts():
    assert epoch_window(250.0) == (50, 150)


def test_feature_dimensions():
    sched, rec = _recording()
    feats = featurize(rec, sched)
    assert len(feats) == len(sched.flashes)
    for f in feats:
        assert f.values.shape == (rec.channels * N_EPOCH_POINTS,)


def test_featurize_matches_per_epoch_extraction():
    # the vectorized gather must agree with the one-onset reference path
    sched, rec = _recording(seed=3)
    filtered = bandpass(rec)
    feats = featurize(rec, sched)
    for f, (onset, _) in zip(feats, rec.events):
        single = flatten(extract_epoch(filtered, onset))
        assert np.allclose(f.values, single, atol=1e-12)


def test_round_and_button_bookkeeping():
    sched, rec = _recording(n_buttons=5, rounds=3)
    feats = featurize(rec, sched)
    for k, f in enumerate(feats):
        assert f.button_id == sched.flashes[k][1]
        assert f.round_index == k // 5


def test_zscore_normalizes_each_channel():
    sched, rec = _recording(seed=9)
    feats = featurize(rec, sched)
    rows = unflatten(feats[0].values, rec.channels)
    assert np.allclose(rows.mean(axis=1), 0.0, atol=1e-9)
    assert np.allclose(rows.std(axis=1), 1.0, atol=1e-9)


def test_flat_channel_becomes_zeros_not_nan():
    rec = EegRecording(
        data=np.zeros((2, 500)),
        events=[(100, 0)],
        channel_labels=["a", "b"],
    )
    epoch = extract_epoch(rec, 100)
    assert np.all(epoch == 0.0)
    assert not np.any(np.isnan(epoch))


def test_flatten_unflatten_round_trip():
    epoch = np.arange(3 * N_EPOCH_POINTS, dtype=float).reshape(3, N_EPOCH_POINTS)
    values = flatten(epoch)
    # channel-major layout: values[c*25 + s] == epoch[c, s]
    assert values[N_EPOCH_POINTS] == epoch[1, 0]
    assert np.array_equal(unflatten(values, 3), epoch)
    with pytest.raises(ParameterError):
        flatten(np.zeros((3, 7)))
    with pytest.raises(ParameterError):
        unflatten(values, 4)


def test_bandpass_validates_edges():
    _, rec = _recording()
    with pytest.raises(ParameterError):
        bandpass(rec, 20.0, 0.5)
    with pytest.raises(ParameterError):
        bandpass(rec, 0.5, 300.0)  # above Nyquist


def test_featurize_rejects_mismatched_events():
    sched, rec = _recording()
    other = build_schedule(n_buttons=4, rounds=2, seed=99)
    with pytest.raises(ConsistencyError):
        featurize(rec, other)
    short = EegRecording(
        data=rec.data,
        events=rec.events[:-1],
        channel_labels=rec.channel_labels,
    )
    with pytest.raises(ConsistencyError):
        featurize(short, sched)


def test_average_rounds_is_the_mean():
    feats = [
        FeatureVector(values=np.full(4, float(r)), button_id=2, round_index=r)
        for r in range(3)
    ]
    avg = average_rounds(feats, 3)
    assert np.allclose(avg.values, 1.0)
    assert avg.button_id == 2
    assert avg.rounds_used == 3
    # a shorter prefix only uses the requested rounds
    avg2 = average_rounds(feats, 2)
    assert np.allclose(avg2.values, 0.5)


def test_average_rounds_validation():
    f0 = FeatureVector(values=np.zeros(4), button_id=0, round_index=0)
    f1 = FeatureVector(values=np.zeros(4), button_id=1, round_index=1)
    with pytest.raises(ConsistencyError):
        average_rounds([f0, f1], 2)  # mixed buttons
    same = FeatureVector(values=np.zeros(4), button_id=0, round_index=0)
    with pytest.raises(ConsistencyError):
        average_rounds([f0, same], 2)  # duplicate round
    with pytest.raises(ConsistencyError):
        average_rounds([f0], 2)  # missing round
    with pytest.raises(ParameterError):
        average_rounds([f0], 0)


def test_features_csv_round_trip(tmp_path):
    sched, rec = _recording(n_buttons=3, rounds=1)
    feats = featurize(rec, sched)
    path = tmp_path / "features.csv"
    save_features(feats, path)
    loaded = load_features(path)
    assert len(loaded) == len(feats)
    for a, b in zip(loaded, feats):
        assert a.button_id == b.button_id
        assert a.round_index == b.round_index
        assert np.array_equal(a.values, b.values)


def test_features_csv_rejects_bad_rows(tmp_path):
    path = tmp_path / "features.csv"
    path.write_text("button,round,v0,v1\n0,0,1.0\n")
    with pytest.raises(FormatError):
        load_features(path)
