"""HTTP service exposing classification, demo excerpts, and schemas.

A directory of web client files can be attached through the static_dir
setting; it is served from the root path with API routes taking
precedence.

All shared state (model, embeddings, lexical resources) is loaded once
at application creation and treated as immutable, so request handling
is safely concurrent and identical requests always produce identical
reports. Authentication is a single static bearer token from config;
when no token is configured the service is open.
"""

from __future__ import annotations

import hmac
import json
import time
from pathlib import Path
from typing import Mapping

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool

from . import __version__
from .config import EngineConfig
from .curriculum import load_curriculum_lexicon
from .errors import EngineError, ResourceError, ValidationError
from .fusion import FusedModel
from .lexicons import default_resource_dir, default_resources
from .pipeline import analysis_to_dict, analyze_text, load_engine_artifacts
from .report import report_schema_document

__all__ = ["DEMO_IDS", "EMBEDDING_SOURCE_ID", "create_app"]

DEMO_IDS = ("christmas-carol", "looking-glass", "iliad")

# Name of the single embedding source a config can attach.
EMBEDDING_SOURCE_ID = "default"

_CLASSIFY_FIELDS = frozenset(
    {"text", "token_budget", "linguistics_only", "embedding_source"}
)


def _load_demo_texts() -> dict[str, str]:
    demo_dir = default_resource_dir() / "demo"
    texts = {}
    for demo_id in DEMO_IDS:
        path = demo_dir / f"{demo_id}.txt"
        if not path.is_file():
            raise ResourceError(f"demo excerpt missing at {path}")
        texts[demo_id] = path.read_text(encoding="utf-8")
    return texts


def _authorize(request: Request, token: str | None) -> None:
    if token is None:
        return
    header = request.headers.get("authorization", "")
    scheme, _, presented = header.partition(" ")
    if scheme.lower() != "bearer" or not hmac.compare_digest(presented, token):
        raise HTTPException(status_code=401, detail="invalid or missing bearer token")


def _parse_classify_body(body: bytes, config: EngineConfig) -> dict:
    try:
        payload = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise HTTPException(status_code=422, detail="body must be a UTF-8 JSON object")
    if not isinstance(payload, dict):
        raise HTTPException(status_code=422, detail="body must be a JSON object")
    unknown = set(payload) - _CLASSIFY_FIELDS
    if unknown:
        raise HTTPException(
            status_code=422, detail=f"unknown fields: {', '.join(sorted(unknown))}"
        )
    text = payload.get("text")
    if not isinstance(text, str) or not text.strip():
        raise HTTPException(status_code=422, detail="text must be a non-empty string")
    budget = payload.get("token_budget", config.token_budget)
    if isinstance(budget, bool) or not isinstance(budget, int) or budget < 1:
        raise HTTPException(
            status_code=422, detail="token_budget must be a positive integer"
        )
    linguistics_only = payload.get("linguistics_only", False)
    if not isinstance(linguistics_only, bool):
        raise HTTPException(status_code=422, detail="linguistics_only must be boolean")
    source = payload.get("embedding_source")
    if source is not None and not isinstance(source, str):
        raise HTTPException(status_code=422, detail="embedding_source must be a string")
    return {
        "text": text,
        "token_budget": budget,
        "linguistics_only": linguistics_only,
        "embedding_source": source,
    }


def create_app(config: EngineConfig | None = None) -> FastAPI:
    """Build the application with all shared state loaded eagerly."""
    if config is None:
        config = EngineConfig()
    model, embeddings = load_engine_artifacts(config)
    resources = default_resources()
    lexicon = load_curriculum_lexicon()
    vocabulary = frozenset(
        resources.common_words.entries | resources.academic_words.entries
    )
    demo_texts = _load_demo_texts()
    schema = report_schema_document()

    app = FastAPI(title="keystage", version=__version__)
    app.state.config = config
    app.state.model = model
    app.state.embeddings = embeddings

    def _run_analysis(options: Mapping) -> dict:
        outcome = analyze_text(
            options["text"],
            model,
            resources,
            curriculum_lexicon=lexicon,
            embeddings=None if options["linguistics_only"] else embeddings,
            token_budget=options["token_budget"],
            vocabulary=vocabulary,
            linguistics_only=options["linguistics_only"],
        )
        return analysis_to_dict(outcome)

    @app.post("/classify")
    async def classify(request: Request) -> JSONResponse:
        _authorize(request, config.token)
        declared = request.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > config.request_limit_bytes:
            raise HTTPException(status_code=413, detail="request body too large")
        body = await request.body()
        if len(body) > config.request_limit_bytes:
            raise HTTPException(status_code=413, detail="request body too large")
        options = _parse_classify_body(body, config)
        if options["embedding_source"] is not None and (
            embeddings is None or options["embedding_source"] != EMBEDDING_SOURCE_ID
        ):
            raise HTTPException(
                status_code=422,
                detail=f"unknown embedding source {options['embedding_source']!r}",
            )
        if model is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        started = time.perf_counter()
        try:
            payload = await run_in_threadpool(_run_analysis, options)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except EngineError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        payload["timing_ms"] = (time.perf_counter() - started) * 1000.0
        return JSONResponse(payload)

    @app.get("/health")
    def health() -> dict:
        kind = None
        if model is not None:
            kind = "fused" if isinstance(model, FusedModel) else "mlp"
        return {
            "status": "ok" if model is not None else "not_ready",
            "model_loaded": model is not None,
            "model_kind": kind,
            "embeddings_loaded": embeddings is not None,
            "resources_loaded": True,
            "engine_version": __version__,
        }

    @app.get("/demo/{demo_id}")
    def demo(demo_id: str) -> dict:
        if demo_id not in demo_texts:
            raise HTTPException(
                status_code=404,
                detail=f"unknown demo id {demo_id!r}; known: {', '.join(DEMO_IDS)}",
            )
        return {"id": demo_id, "text": demo_texts[demo_id]}

    @app.get("/schema")
    def schema_endpoint() -> dict:
        return schema

    # Mounted last so every API route above wins the path match; only
    # unclaimed paths fall through to the web client files.
    if config.static_dir is not None:
        static_root = Path(config.static_dir)
        if not static_root.is_dir():
            raise ResourceError(f"static_dir not found at {static_root}")
        app.mount("/", StaticFiles(directory=static_root, html=True), name="static")

    return app
