"""HTTP service wrapping the diagnostic pipeline."""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .audio import decode_audio, peak_normalize, resample_to_16k
from .embedding import SliceEmbedder, embed_recording, parse_reference_embedder_id
from .errors import DiagnosticError
from .index import (
    LOCATION_LABELS,
    TIMING_LABELS,
    DiagnosticIndex,
    Location,
    Timing,
    parse_location,
    parse_timing,
)

MAX_UPLOAD_BYTES = 25 * 1024 * 1024
MAX_UPLOAD_SECONDS = 30.0

# DiagnosticError codes that have a dedicated HTTP status; anything else is 500.
STATUS_BY_CODE = {
    "UNSUPPORTED_FORMAT": 415,
    "TOO_LARGE": 413,
    "TOO_LONG": 413,
    "TOO_SHORT": 422,
    "SILENT_AUDIO": 422,
    "EMPTY_AUDIO": 422,
    "CORRUPT_STREAM": 422,
    "INVALID_ENUM": 422,
    "INDEX_NOT_LOADED": 503,
}


class TooLargeError(DiagnosticError):
    code = "TOO_LARGE"


class TooLongError(DiagnosticError):
    code = "TOO_LONG"


class IndexNotLoadedError(DiagnosticError):
    code = "INDEX_NOT_LOADED"


def resolve_embedder(index: DiagnosticIndex) -> SliceEmbedder | None:
    """Embedder for live queries, reconstructed from the index's embedder id
    when possible. Sidecar and external ids are opaque, so those indexes need
    an embedder supplied by the caller."""
    return parse_reference_embedder_id(index.embedder_id)


def create_app(index: DiagnosticIndex | None = None,
               audio_root=None,
               embedder: SliceEmbedder | None = None,
               assets_dir=None) -> FastAPI:
    """Build the service. index=None serves 503s until one is loaded; the
    embedder defaults to whatever the index id implies."""
    if index is not None and embedder is None:
        embedder = resolve_embedder(index)
        if embedder is None:
            raise ValueError(
                f"cannot reconstruct an embedder from id {index.embedder_id!r}; "
                "pass one explicitly"
            )
    app = FastAPI(title="car-sound diagnostics", docs_url=None, redoc_url=None)
    # mutable holder so an admin reload can swap the pair atomically
    app.state.diag = {"index": index, "embedder": embedder}
    app.state.audio_root = Path(audio_root) if audio_root is not None else None

    @app.exception_handler(DiagnosticError)
    async def _diag_error(request: Request, exc: DiagnosticError):
        return JSONResponse(
            status_code=STATUS_BY_CODE.get(exc.code, 500),
            content={"code": exc.code, "message": str(exc)},
        )

    def _require_index() -> tuple[DiagnosticIndex, SliceEmbedder]:
        state = app.state.diag
        if state["index"] is None or state["embedder"] is None:
            raise IndexNotLoadedError("no index is loaded")
        return state["index"], state["embedder"]

    @app.get("/healthz")
    def healthz():
        state = app.state.diag
        if state["index"] is None:
            return JSONResponse(status_code=503,
                                content={"status": "unavailable", "records": 0,
                                         "embedder_id": None})
        return {"status": "ok", "records": len(state["index"]),
                "embedder_id": state["index"].embedder_id}

    @app.get("/api/v1/options")
    def options():
        return {
            "locations": [{"value": loc.value, "label": LOCATION_LABELS[loc]}
                          for loc in Location],
            "timings": [{"value": t.value, "label": TIMING_LABELS[t]}
                        for t in Timing],
        }

    @app.post("/api/v1/diagnose")
    async def diagnose(audio: UploadFile = File(...),
                       where: str = Form(Location.NOT_SURE.value),
                       when: str = Form(Timing.NOT_SURE.value)):
        index, embedder = _require_index()
        loc = parse_location(where, query=True)
        timing = parse_timing(when, query=True)
        data = await audio.read()
        if len(data) > MAX_UPLOAD_BYTES:
            raise TooLargeError(
                f"upload is {len(data)} bytes; limit is {MAX_UPLOAD_BYTES}"
            )
        started = time.perf_counter()
        w = decode_audio(data, format_hint=audio.filename)
        if w.duration_ms > MAX_UPLOAD_SECONDS * 1000.0:
            raise TooLongError(
                f"recording is {w.duration_ms / 1000.0:.1f} s; limit is "
                f"{MAX_UPLOAD_SECONDS:.0f} s"
            )
        w = peak_normalize(resample_to_16k(w))
        query = embed_recording(w, embedder)
        result = index.query(query, loc, timing)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return {
            "matches": [
                {
                    "record_id": m.record_id,
                    "diagnosis": m.diagnosis,
                    "similarity": m.similarity,
                    "confidence": m.confidence,
                    "search_url": m.search_url,
                    "reference_audio_url": f"/api/v1/reference-audio/{m.record_id}",
                    "rank": m.rank,
                }
                for m in result.matches
            ],
            "fallback": result.fallback,
            "query_duration_ms": elapsed_ms,
            "embedder_id": index.embedder_id,
        }

    @app.get("/api/v1/reference-audio/{record_id}")
    def reference_audio(record_id: str):
        state = app.state.diag
        if state["index"] is None:
            raise IndexNotLoadedError("no index is loaded")
        record = state["index"].record_by_id(record_id)
        if record is None:
            return JSONResponse(status_code=404,
                                content={"code": "UNKNOWN_ID",
                                         "message": f"no record {record_id!r}"})
        root = app.state.audio_root
        path = (root / record.audio_path) if root is not None else Path(record.audio_path)
        if not record.audio_path or not path.is_file():
            return JSONResponse(status_code=404,
                                content={"code": "UNKNOWN_ID",
                                         "message": f"no audio for {record_id!r}"})
        return FileResponse(path, media_type="audio/wav")

    if assets_dir is not None:
        app.mount("/", StaticFiles(directory=assets_dir, html=True), name="assets")

    return app
