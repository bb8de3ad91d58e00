"""Command-line front end.

Every command is a thin client of the HTTP service: by default the app is
driven in process, with --server the same requests go to a remote
instance.  All artifacts are written client-side, into --out (or the
config's output_dir, or ./out).

Exit codes: 0 when the command and its verifications succeed, 1 for
processing or verification failures, 2 for usage and file-system problems.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .client import ServiceClient, ServiceError
from .errors import MindlinkError


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="JSON", help="session config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--server", metavar="URL",
                        help="use a remote service instead of in-process")

    parser = argparse.ArgumentParser(
        prog="mindlink",
        description="P300 speller + coding-metasurface text link simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", parents=[common],
                       help="run the calibration stage and write the decoder")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("spell", parents=[common],
                       help="spell text through simulated online trials")
    p.add_argument("--text", required=True)
    p.add_argument("--decoder", metavar="PATH",
                   help="decoder JSON (default: <out>/decoder.json)")
    p.set_defaults(func=cmd_spell)

    p = sub.add_parser("encode", parents=[common],
                       help="frame text into a bitstream")
    p.add_argument("--text", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("transmit", parents=[common],
                       help="modulate bits over the simulated link")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", help="encode and transmit this text")
    group.add_argument("--bits-file", metavar="PATH", help="bitstream file to send")
    p.add_argument("--format", choices=("csv", "f32"), default="csv",
                   help="sample-stream file format (default csv)")
    p.set_defaults(func=cmd_transmit)

    p = sub.add_parser("receive", parents=[common],
                       help="decode text from a sample-stream file")
    p.add_argument("--stream", required=True, metavar="PATH")
    p.add_argument("--format", choices=("csv", "f32"), default="csv")
    p.set_defaults(func=cmd_receive)

    p = sub.add_parser("e2e", parents=[common],
                       help="full chain: spell, frame, transmit, decode")
    p.add_argument("--text", required=True)
    p.add_argument("--decoder", metavar="PATH",
                   help="reuse a decoder file instead of calibrating")
    p.set_defaults(func=cmd_e2e)

    p = sub.add_parser("pattern", parents=[common],
                       help="synthesize a coding pattern and verify its far field")
    p.add_argument("--kind", required=True,
                   choices=("uniform", "gradient", "oam", "rcs"))
    p.add_argument("--n", type=int, help="array size (default from config)")
    p.add_argument("--state", type=int, default=0, help="uniform state 0..3")
    p.add_argument("--theta", type=float, default=30.0,
                   help="gradient deflection angle in degrees")
    p.add_argument("--axis", choices=("x", "y"), default="x")
    p.add_argument("--mode", type=int, default=1, help="OAM order l")
    p.add_argument("--level", type=int, default=1, help="scattering level 1..4")
    p.add_argument("--pattern-seed", type=int, default=0)
    p.add_argument("--theta-step", type=float, default=0.5)
    p.add_argument("--phi-step", type=float, default=2.0)
    p.add_argument("--db", action="store_true",
                   help="export normalized dB magnitudes")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("farfield", parents=[common],
                       help="far field of a pattern file")
    p.add_argument("--pattern", required=True, metavar="PATH")
    p.add_argument("--theta-step", type=float, default=0.5)
    p.add_argument("--phi-step", type=float, default=2.0)
    p.add_argument("--db", action="store_true")
    p.set_defaults(func=cmd_farfield)

    p = sub.add_parser("ber-sweep", parents=[common],
                       help="bit error rate across channel SNRs")
    p.add_argument("--snr", default="0,5,10,15,20",
                   help="comma-separated SNR grid in dB")
    p.add_argument("--bits", type=int, default=100_000)
    p.set_defaults(func=cmd_ber_sweep)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


# --------------------------------------------------------------------------
# shared plumbing


def _load_config_payload(args) -> dict:
    doc = {}
    if args.config:
        with open(args.config) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise MindlinkError(f"{args.config}: not valid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise MindlinkError(f"{args.config}: expected a JSON object")
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["output_dir"] = args.out
    return doc


def _out_dir(args, config_payload: dict) -> str:
    out = args.out or config_payload.get("output_dir") or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _write(path: str, content: str) -> None:
    with open(path, "w") as fh:
        fh.write(content)
    print(f"wrote {path}")


def _write_json(path: str, doc) -> None:
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _csv_cell(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _rows_to_csv(rows: list, columns: list) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _read_decoder_payload(path: str) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MindlinkError(f"{path}: not valid JSON ({exc})") from exc
    return doc


# --------------------------------------------------------------------------
# commands


def cmd_calibrate(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    resp = client.post("/calibrate", {"config": config})
    _write_json(os.path.join(out, "decoder.json"), resp["decoder"])
    columns = ["trial", "target", "predicted", "target_score",
               "best_nontarget_score", "margin"]
    _write(os.path.join(out, "calibration_report.csv"),
           _rows_to_csv(resp["report"], columns))
    hits = sum(1 for r in resp["report"] if r["predicted"] == r["target"])
    print(f"calibrated: {resp['feature_dim']} weights, "
          f"{hits}/{len(resp['report'])} calibration trials correct")
    return 0


def cmd_spell(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    decoder_path = args.decoder or os.path.join(out, "decoder.json")
    decoder = _read_decoder_payload(decoder_path)
    resp = client.post("/spell",
                       {"text": args.text, "config": config, "decoder": decoder})
    columns = ["intended_char", "intended_button", "selected_char",
               "selected_button", "rounds_used", "gap", "seconds"]
    _write(os.path.join(out, "spell_report.csv"),
           _rows_to_csv(resp["per_char"], columns))
    print(f"spelled: {resp['spelled']!r} "
          f"({resp['char_errors']} errors, mean {resp['mean_rounds']:.2f} rounds, "
          f"{resp['simulated_seconds']:.1f} s simulated)")
    return 0 if resp["char_errors"] == 0 else 1


def cmd_encode(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    payload = {"text": args.text}
    if "header" in config:
        payload["header"] = config["header"]
    resp = client.post("/encode", payload)
    _write(os.path.join(out, "bits.txt"), resp["bits"] + "\n")
    print(f"{resp['n_frames']} frames x {resp['frame_bits']} bits "
          f"= {len(resp['bits'])} bits")
    return 0


def cmd_transmit(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    if args.bits_file:
        with open(args.bits_file) as fh:
            bits = fh.read().strip()
    else:
        enc_payload = {"text": args.text}
        if "header" in config:
            enc_payload["header"] = config["header"]
        bits = client.post("/encode", enc_payload)["bits"]
    resp = client.post("/transmit", {"bits": bits, "config": config})
    stream_path = os.path.join(out, f"stream.{args.format}")
    _write_stream_file(stream_path, resp["stream_csv"], args.format)
    print(f"transmitted {len(bits)} bits -> {resp['n_samples']} samples "
          f"(levels {resp['high_level']:.1f}/{resp['low_level']:.1f})")
    return 0


def cmd_receive(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    stream_csv = _read_stream_file(args.stream, args.format)
    payload = {"stream_csv": stream_csv}
    if "header" in config:
        payload["header"] = config["header"]
    symbol_rate = config.get("symbol_rate_hz")
    oversample = config.get("oversample")
    if symbol_rate:
        payload["symbol_rate_hz"] = symbol_rate
        payload["sample_rate_hz"] = symbol_rate * (oversample or 10)
    resp = client.post("/receive", payload)
    _write(os.path.join(out, "received.txt"), resp["text"] + "\n")
    print(f"received: {resp['text']!r}")
    return 0


def cmd_e2e(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    payload = {"text": args.text, "config": config}
    if args.decoder:
        payload["decoder"] = _read_decoder_payload(args.decoder)
    resp = client.post("/e2e", payload)
    _write(os.path.join(out, "bits.txt"), resp["bits"] + "\n")
    _write(os.path.join(out, "stream.csv"), resp["stream_csv"])
    _write(os.path.join(out, "received.txt"), resp["received"] + "\n")
    report = {k: resp[k] for k in (
        "requested", "spelled", "received", "char_errors", "bit_errors", "ber",
        "ok", "decode_error", "simulated_seconds", "mean_rounds", "high_level",
        "low_level", "per_char", "throughput")}
    _write_json(os.path.join(out, "e2e_report.json"), report)
    print(f"requested: {resp['requested']!r}")
    print(f"received : {resp['received']!r}")
    print(f"{resp['char_errors']} character errors, link BER {resp['ber']:.2e}, "
          f"{resp['simulated_seconds']:.1f} s simulated spelling")
    if resp["decode_error"]:
        print(f"decode failure: {resp['decode_error']}", file=sys.stderr)
    return 0 if resp["ok"] else 1


def cmd_pattern(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    payload = {
        "kind": args.kind,
        "state": args.state,
        "theta_deg": args.theta,
        "axis": args.axis,
        "mode": args.mode,
        "level": args.level,
        "pattern_seed": args.pattern_seed,
        "theta_step_deg": args.theta_step,
        "phi_step_deg": args.phi_step,
        "db": args.db,
    }
    payload["n"] = args.n if args.n is not None else config.get("array_n", 20)
    if "spacing_wavelengths" in config:
        payload["spacing_wavelengths"] = config["spacing_wavelengths"]
    resp = client.post("/pattern", payload)
    _write(os.path.join(out, "pattern.txt"), resp["pattern_text"])
    _write(os.path.join(out, "farfield.csv"), resp["farfield_csv"])
    _write_json(os.path.join(out, "summary.json"), resp["summary"])
    summary = resp["summary"]
    print(f"{args.kind}: main lobe at theta={summary['main_lobe_theta_deg']:.1f} deg, "
          f"phi={summary['main_lobe_phi_deg']:.1f} deg; "
          f"verification {'passed' if resp['passed'] else 'FAILED'}")
    return 0 if resp["passed"] else 1


def cmd_farfield(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    with open(args.pattern) as fh:
        pattern_text = fh.read()
    payload = {
        "pattern_text": pattern_text,
        "theta_step_deg": args.theta_step,
        "phi_step_deg": args.phi_step,
        "db": args.db,
    }
    if "spacing_wavelengths" in config:
        payload["spacing_wavelengths"] = config["spacing_wavelengths"]
    resp = client.post("/farfield", payload)
    _write(os.path.join(out, "farfield.csv"), resp["farfield_csv"])
    _write_json(os.path.join(out, "summary.json"), resp["summary"])
    summary = resp["summary"]
    print(f"main lobe: theta={summary['main_lobe_theta_deg']:.1f} deg, "
          f"phi={summary['main_lobe_phi_deg']:.1f} deg, "
          f"|AF|={summary['main_lobe_magnitude']:.1f}")
    return 0


def cmd_ber_sweep(args, client: ServiceClient) -> int:
    config = _load_config_payload(args)
    out = _out_dir(args, config)
    try:
        grid = [float(v) for v in args.snr.split(",") if v.strip()]
    except ValueError as exc:
        raise MindlinkError(f"bad --snr grid {args.snr!r}: {exc}") from exc
    resp = client.post("/ber-sweep", {
        "snr_grid_db": grid, "n_bits": args.bits, "config": config,
    })
    _write(os.path.join(out, "ber.csv"), resp["csv"])
    for point in resp["points"]:
        print(f"snr {point['snr_db']:5.1f} dB -> ber {point['ber']:.6f}")
    if not resp["monotone"]:
        print("warning: BER is not monotone over the grid", file=sys.stderr)
    return 0 if resp["monotone"] else 1


def cmd_serve(args, client: ServiceClient) -> int:
    import uvicorn

    uvicorn.run("mindlink.service:app", host=args.host, port=args.port)
    return 0


def _write_stream_file(path: str, stream_csv: str, fmt: str) -> None:
    if fmt == "csv":
        _write(path, stream_csv)
        return
    from . import codec

    stream = codec.stream_from_csv(stream_csv)
    codec.save_stream(stream, path, fmt="f32")
    print(f"wrote {path}")


def _read_stream_file(path: str, fmt: str) -> str:
    if fmt == "csv":
        with open(path) as fh:
            return fh.read()
    from . import codec

    return codec.stream_to_csv(codec.load_stream(path, fmt="f32"))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.func is cmd_serve:
        return cmd_serve(args, None)
    try:
        with ServiceClient(getattr(args, "server", None)) as client:
            return args.func(args, client)
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except MindlinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
