"""HTTP service exposing the simulator.

Each endpoint is a stateless wrapper over the core modules: the request
carries the full session configuration (and the decoder, where one is
needed), so identical requests always produce identical responses.
Package errors map to HTTP 400 with the error class name in the detail.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, channel, codec, metasurface, session
from .errors import MindlinkError
from .schemas import (
    BerPoint,
    BerSweepRequest,
    BerSweepResponse,
    CalibrateRequest,
    CalibrateResponse,
    CalibrationTrialRow,
    CharOutcomeModel,
    DecoderModel,
    E2ERequest,
    E2EResponse,
    EncodeRequest,
    EncodeResponse,
    FarfieldRequest,
    FarfieldResponse,
    HealthResponse,
    PatternRequest,
    PatternResponse,
    ReceiveRequest,
    ReceiveResponse,
    SpellRequest,
    SpellResponse,
    ThroughputModel,
    TransmitRequest,
    TransmitResponse,
)

app = FastAPI(title="mindlink", version=__version__)


@app.exception_handler(MindlinkError)
async def _package_error_handler(request: Request, exc: MindlinkError):
    return JSONResponse(
        status_code=400,
        content={"detail": {"error": type(exc).__name__, "message": str(exc)}},
    )


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/calibrate", response_model=CalibrateResponse)
def calibrate(req: CalibrateRequest) -> CalibrateResponse:
    result = session.calibrate(req.config.to_session_config())
    return CalibrateResponse(
        decoder=DecoderModel.from_decoder(result.decoder),
        report=[CalibrationTrialRow(**row) for row in result.report],
        feature_dim=result.feature_dim,
    )


def _char_outcomes(spell_result: session.SpellResult) -> list:
    return [CharOutcomeModel(**vars(c)) for c in spell_result.per_char]


@app.post("/spell", response_model=SpellResponse)
def spell(req: SpellRequest) -> SpellResponse:
    config = req.config.to_session_config()
    result = session.spell(config, req.text, req.decoder.to_decoder())
    return SpellResponse(
        requested=result.requested,
        spelled=result.spelled,
        per_char=_char_outcomes(result),
        simulated_seconds=result.simulated_seconds,
        char_errors=result.char_errors,
        mean_rounds=result.mean_rounds,
    )


@app.post("/encode", response_model=EncodeResponse)
def encode(req: EncodeRequest) -> EncodeResponse:
    bits = codec.encode_text(req.text, req.header)
    frame = len(codec.parse_bits(req.header)) + codec.PAYLOAD_BITS
    return EncodeResponse(
        bits=codec.bits_to_text(bits), frame_bits=frame, n_frames=len(req.text)
    )


@app.post("/transmit", response_model=TransmitResponse)
def transmit(req: TransmitRequest) -> TransmitResponse:
    config = req.config.to_session_config()
    bits = codec.parse_bits(req.bits)
    levels = session.link_levels(config)
    stream = channel.transmit_bits(bits, levels, session.channel_config(config))
    return TransmitResponse(
        stream_csv=codec.stream_to_csv(stream),
        high_level=levels[0],
        low_level=levels[1],
        n_samples=int(stream.samples.size),
        sample_rate_hz=stream.sample_rate_hz,
        symbol_rate_hz=stream.symbol_rate_hz,
    )


@app.post("/receive", response_model=ReceiveResponse)
def receive(req: ReceiveRequest) -> ReceiveResponse:
    stream = codec.stream_from_csv(
        req.stream_csv, req.sample_rate_hz, req.symbol_rate_hz
    )
    return ReceiveResponse(text=codec.decode_stream(stream, req.header))


@app.post("/e2e", response_model=E2EResponse)
def e2e(req: E2ERequest) -> E2EResponse:
    config = req.config.to_session_config()
    decoder = req.decoder.to_decoder() if req.decoder else None
    result = session.e2e(config, req.text, decoder)
    frame = session.frame_bits(config)
    throughput = ThroughputModel(
        chars_per_sec=session.channel_chars_per_sec(config.symbol_rate_hz, frame),
        chars_per_min_one_round=session.spelling_chars_per_min(
            config.layout().n_buttons, config.soa_ms, rounds=1
        ),
        frame_bits=frame,
    )
    return E2EResponse(
        requested=result.requested,
        spelled=result.spelled,
        received=result.received,
        char_errors=result.char_errors,
        bit_errors=result.bit_errors,
        ber=result.ber,
        ok=result.ok,
        decode_error=result.decode_error,
        per_char=_char_outcomes(result.spell_result),
        simulated_seconds=result.spell_result.simulated_seconds,
        mean_rounds=result.spell_result.mean_rounds,
        bits=codec.bits_to_text(result.bits),
        high_level=result.levels[0],
        low_level=result.levels[1],
        stream_csv=codec.stream_to_csv(result.stream),
        throughput=throughput,
    )


@app.post("/pattern", response_model=PatternResponse)
def pattern(req: PatternRequest) -> PatternResponse:
    pat = session.synthesize_pattern(
        req.kind,
        n=req.n,
        spacing_wavelengths=req.spacing_wavelengths,
        state=req.state,
        theta_deg=req.theta_deg,
        axis=req.axis,
        mode=req.mode,
        level=req.level,
        pattern_seed=req.pattern_seed,
    )
    farfield = metasurface.far_field(pat, req.theta_step_deg, req.phi_step_deg)
    summary = session.pattern_report(
        req.kind, pat, farfield, theta_deg=req.theta_deg, mode=req.mode,
        level=req.level,
    )
    return PatternResponse(
        pattern_text=metasurface.pattern_to_text(pat),
        farfield_csv=metasurface.farfield_to_csv(farfield, db=req.db),
        summary=summary,
        passed=bool(summary["passed"]),
    )


@app.post("/farfield", response_model=FarfieldResponse)
def farfield(req: FarfieldRequest) -> FarfieldResponse:
    pat = metasurface.pattern_from_text(req.pattern_text, req.spacing_wavelengths)
    ff = metasurface.far_field(pat, req.theta_step_deg, req.phi_step_deg)
    lobe_theta, lobe_phi, lobe_mag = metasurface.main_lobe(ff)
    summary = {
        "n": pat.n,
        "spacing_wavelengths": pat.spacing_wavelengths,
        "main_lobe_theta_deg": lobe_theta,
        "main_lobe_phi_deg": lobe_phi,
        "main_lobe_magnitude": lobe_mag,
        "peak": ff.peak,
    }
    return FarfieldResponse(
        farfield_csv=metasurface.farfield_to_csv(ff, db=req.db), summary=summary
    )


@app.post("/ber-sweep", response_model=BerSweepResponse)
def ber_sweep(req: BerSweepRequest) -> BerSweepResponse:
    config = req.config.to_session_config()
    results = session.ber_over_snr(config, req.snr_grid_db, n_bits=req.n_bits)
    order = np.argsort([snr for snr, _ in results])
    bers_by_snr = np.array([results[i][1] for i in order])
    monotone = bool(np.all(np.diff(bers_by_snr) <= 0))
    return BerSweepResponse(
        points=[BerPoint(snr_db=snr, ber=ber) for snr, ber in results],
        csv=channel.ber_csv(results),
        monotone=monotone,
    )
