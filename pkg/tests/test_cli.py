import json

import pytest

from mindlink.cli import main

SMALL_CONFIG = {
    "seed": 7,
    "calibration_trials": 6,
    "calibration_rounds": 4,
    "rounds_max": 4,
}


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "config.json"
    config.write_text(json.dumps(SMALL_CONFIG))
    return tmp_path


@pytest.fixture(scope="module")
def calibrated_dir(tmp_path_factory):
    """One calibrate run shared by the commands that need a decoder file."""
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.json"
    config.write_text(json.dumps(SMALL_CONFIG))
    code = main(["calibrate", "--config", str(config), "--out", str(root / "out")])
    assert code == 0
    return root


def test_calibrate_writes_decoder_and_report(calibrated_dir):
    out = calibrated_dir / "out"
    doc = json.loads((out / "decoder.json").read_text())
    assert set(doc) == {"lambda", "bias", "weights", "training_meta"}
    assert len(doc["weights"]) == 750
    report = (out / "calibration_report.csv").read_text().splitlines()
    assert report[0] == ("trial,target,predicted,target_score,"
                        "best_nontarget_score,margin")
    assert len(report) == 1 + SMALL_CONFIG["calibration_trials"]


def test_spell_uses_the_decoder_file(calibrated_dir, capsys):
    config = calibrated_dir / "config.json"
    out = calibrated_dir / "out"
    code = main(["spell", "--text", "HI", "--config", str(config),
                 "--out", str(out)])
    assert code == 0
    assert "spelled: 'HI'" in capsys.readouterr().out
    lines = (out / "spell_report.csv").read_text().splitlines()
    assert lines[0].startswith("intended_char,")
    assert len(lines) == 3


def test_encode_writes_the_reference_bits(workdir):
    assert main(["encode", "--text", "A", "--out", "run"]) == 0
    bits = (workdir / "run" / "bits.txt").read_text().strip()
    assert bits == "1111111000000001000001"


def test_transmit_receive_csv_round_trip(workdir):
    assert main(["transmit", "--text", "OK", "--config", "config.json",
                 "--out", "run"]) == 0
    stream = workdir / "run" / "stream.csv"
    assert stream.exists()
    assert main(["receive", "--stream", str(stream), "--out", "run"]) == 0
    assert (workdir / "run" / "received.txt").read_text() == "OK\n"


def test_transmit_receive_f32_round_trip(workdir):
    assert main(["transmit", "--text", "HI", "--format", "f32",
                 "--out", "run"]) == 0
    stream = workdir / "run" / "stream.f32"
    assert main(["receive", "--stream", str(stream), "--format", "f32",
                 "--out", "run"]) == 0
    assert (workdir / "run" / "received.txt").read_text() == "HI\n"


def test_transmit_from_bits_file(workdir):
    assert main(["encode", "--text", "GO", "--out", "run"]) == 0
    assert main(["transmit", "--bits-file", "run/bits.txt", "--out", "run"]) == 0
    assert main(["receive", "--stream", "run/stream.csv", "--out", "run"]) == 0
    assert (workdir / "run" / "received.txt").read_text() == "GO\n"


def test_e2e_reports_and_exit_code(workdir, capsys):
    code = main(["e2e", "--text", "HI", "--config", "config.json",
                 "--out", "run"])
    assert code == 0
    captured = capsys.readouterr().out
    assert "received : 'HI'" in captured
    report = json.loads((workdir / "run" / "e2e_report.json").read_text())
    assert report["ok"] is True
    assert report["char_errors"] == 0
    assert report["throughput"]["frame_bits"] == 22
    assert (workdir / "run" / "bits.txt").exists()
    assert (workdir / "run" / "stream.csv").exists()
    assert (workdir / "run" / "received.txt").exists()


def test_e2e_with_existing_decoder(calibrated_dir):
    config = calibrated_dir / "config.json"
    out = calibrated_dir / "out"
    code = main(["e2e", "--text", "OK", "--config", str(config),
                 "--decoder", str(out / "decoder.json"), "--out", str(out)])
    assert code == 0


def test_pattern_and_farfield(workdir):
    code = main(["pattern", "--kind", "gradient", "--theta", "30",
                 "--theta-step", "1.0", "--phi-step", "4.0", "--out", "run"])
    assert code == 0
    summary = json.loads((workdir / "run" / "summary.json").read_text())
    assert summary["passed"] is True
    assert summary["main_lobe_theta_deg"] == pytest.approx(30.0, abs=1.0)
    rows = (workdir / "run" / "pattern.txt").read_text().splitlines()
    assert len(rows) == 20

    code = main(["farfield", "--pattern", "run/pattern.txt",
                 "--theta-step", "1.0", "--phi-step", "4.0", "--out", "run"])
    assert code == 0
    header = (workdir / "run" / "farfield.csv").read_text().splitlines()[0]
    assert header == "theta_deg,phi_deg,magnitude,phase_rad"


def test_oam_pattern_via_cli(workdir):
    code = main(["pattern", "--kind", "oam", "--mode", "2",
                 "--theta-step", "1.0", "--phi-step", "4.0", "--out", "run"])
    assert code == 0
    summary = json.loads((workdir / "run" / "summary.json").read_text())
    assert summary["null_depth_db"] >= 20.0


def test_ber_sweep_cli(workdir, capsys):
    code = main(["ber-sweep", "--snr", "0,10,20", "--bits", "5000",
                 "--out", "run"])
    assert code == 0
    lines = (workdir / "run" / "ber.csv").read_text().splitlines()
    assert lines[0] == "snr_db,ber"
    assert len(lines) == 4
    assert "snr" in capsys.readouterr().out


def test_missing_stream_file_exits_2(workdir):
    assert main(["receive", "--stream", "nope.csv", "--out", "run"]) == 2


def test_missing_decoder_exits_2(workdir):
    assert main(["spell", "--text", "HI", "--out", "empty"]) == 2


def test_missing_config_file_exits_2(workdir):
    assert main(["calibrate", "--config", "nope.json", "--out", "run"]) == 2


def test_invalid_config_value_exits_1(workdir, capsys):
    (workdir / "bad.json").write_text('{"noise_uv_rms": -1}')
    assert main(["calibrate", "--config", "bad.json", "--out", "run"]) == 1
    assert "ParameterError" in capsys.readouterr().err


def test_config_file_must_hold_json_object(workdir):
    (workdir / "list.json").write_text("[1, 2]")
    assert main(["encode", "--text", "A", "--config", "list.json",
                 "--out", "run"]) == 1


def test_unsupported_spell_character_exits_1(calibrated_dir, capsys):
    config = calibrated_dir / "config.json"
    out = calibrated_dir / "out"
    code = main(["spell", "--text", "hi", "--config", str(config),
                 "--out", str(out)])
    assert code == 1
    assert "ParameterError" in capsys.readouterr().err


def test_seed_flag_changes_the_decoder(workdir):
    assert main(["calibrate", "--config", "config.json", "--seed", "8",
                 "--out", "a"]) == 0
    assert main(["calibrate", "--config", "config.json", "--seed", "9",
                 "--out", "b"]) == 0
    wa = json.loads((workdir / "a" / "decoder.json").read_text())["weights"]
    wb = json.loads((workdir / "b" / "decoder.json").read_text())["weights"]
    assert wa != wb


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
