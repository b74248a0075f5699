"""HTTP query service.

Endpoints (all read-only with respect to the index):

* ``POST /search`` — multipart ``file`` (canonical JSON or XMI), ``modelType``,
  ``maxResults`` (default 20, capped at 200), ``explain``; returns the ranked
  results with optional per-path score contributions.
* ``GET /model/{model_id}`` — original stored bytes with metadata headers.
* ``GET /stats`` — per-index corpus statistics.
* ``POST /classify`` — multipart ``file``, ``modelType``, ``k``; weighted-kNN
  label using ``labels.csv`` next to the index.

The service opens indexes read-only; ingestion runs out of process through
the CLI, with the store's lock file keeping writers exclusive.
"""

from __future__ import annotations

import json
import os
import time
from typing import Sequence

from fastapi import FastAPI, Form, Request, UploadFile
from fastapi.responses import JSONResponse, Response

from .classifier import classify_ranked, load_labels_csv
from .errors import (ModelParseError, ModelValidationError, PathmarkError,
                     StorageError, UnclassifiableError, UnknownModelError)
from .index import ModelIndex, path_text
from .ingest import MAX_MODEL_BYTES, parse_model_bytes, query_bop
from .scorer import ScoringParams, score_query

__all__ = ["create_app", "discover_indexes"]

MAX_RESULTS_CAP = 200


def discover_indexes(index_root: str) -> dict[str, ModelIndex]:
    """Open every index under the root (or the root itself), read-only."""
    indexes: dict[str, ModelIndex] = {}
    if os.path.exists(os.path.join(index_root, "meta.json")):
        idx = ModelIndex.open(index_root, readonly=True)
        indexes[idx.model_type] = idx
        return indexes
    if not os.path.isdir(index_root):
        raise StorageError(f"index root {index_root!r} does not exist")
    for name in sorted(os.listdir(index_root)):
        sub = os.path.join(index_root, name)
        if os.path.isdir(sub) and os.path.exists(os.path.join(sub, "meta.json")):
            idx = ModelIndex.open(sub, readonly=True)
            indexes[idx.model_type] = idx
    return indexes


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(index_root: str, cors_origins: Sequence[str] = (),
               max_body: int = MAX_MODEL_BYTES,
               params: ScoringParams = ScoringParams()) -> FastAPI:
    app = FastAPI(title="pathmark", version="0.1.0")
    indexes = discover_indexes(index_root)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(CORSMiddleware, allow_origins=list(cors_origins),
                           allow_methods=["*"], allow_headers=["*"])

    @app.middleware("http")
    async def body_cap(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > max_body:
            return _error(413, f"request body exceeds {max_body} bytes")
        return await call_next(request)

    def require_index(model_type: str) -> ModelIndex | JSONResponse:
        idx = indexes.get(model_type)
        if idx is None:
            return _error(404, f"no index for model type {model_type!r}")
        return idx

    @app.post("/search")
    async def search(file: UploadFile, modelType: str = Form(...),
                     maxResults: int = Form(20), explain: bool = Form(False)):
        idx = require_index(modelType)
        if not isinstance(idx, ModelIndex):
            return idx
        data = await file.read()
        if len(data) > max_body:
            return _error(413, f"model exceeds {max_body} bytes")
        if not data:
            return _error(400, "empty model payload")
        max_results = max(1, min(int(maxResults), MAX_RESULTS_CAP))
        try:
            model, _ = parse_model_bytes(data, modelType)
        except (ModelParseError, ModelValidationError) as e:
            return _error(400, f"malformed model: {e}")
        started = time.perf_counter()
        bop = query_bop(idx, model)
        segments_by_text = {}
        if explain:
            segments_by_text = {path_text(p): p.segments() for p in bop.paths()}
        results = score_query(idx, bop, params, max_results=max_results, explain=explain)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        body = {
            "results": [
                {
                    "id": r.model_id,
                    "score": r.score,
                    **({"matchedPaths": [
                        {"path": text, "contribution": value,
                         "segments": segments_by_text.get(text, [])}
                        for text, value in r.matched_paths
                    ]} if r.matched_paths is not None else {}),
                }
                for r in results
            ],
            "stats": {"queryPaths": bop.total, "distinctQueryPaths": len(bop),
                      "elapsedMs": elapsed_ms},
        }
        return JSONResponse(content=body)

    @app.get("/model/{model_id}")
    def get_model(model_id: str):
        for idx in indexes.values():
            try:
                blob = idx.model_blob(model_id)
                meta = idx.model_meta(model_id)
            except UnknownModelError:
                continue
            media = "application/json" if meta.get("format") == "json" else "application/xml"
            headers = {
                "X-Model-Type": meta.get("model_type", idx.model_type),
                "X-Source-Uri": meta.get("source_uri", ""),
                "X-Content-Hash": meta.get("content_hash", ""),
            }
            return Response(content=blob, media_type=media, headers=headers)
        return _error(404, f"unknown model {model_id!r}")

    @app.get("/stats")
    def stats():
        return {"indexes": [idx.stats().to_dict() for idx in indexes.values()]}

    @app.post("/classify")
    async def classify_endpoint(file: UploadFile, modelType: str = Form(...),
                                k: int = Form(2)):
        idx = require_index(modelType)
        if not isinstance(idx, ModelIndex):
            return idx
        if not idx.directory:
            return _error(500, "index has no directory for labels")
        labels_path = os.path.join(idx.directory, "labels.csv")
        if not os.path.exists(labels_path):
            return _error(400, f"no labels.csv next to the {modelType} index")
        data = await file.read()
        try:
            model, _ = parse_model_bytes(data, modelType)
        except (ModelParseError, ModelValidationError) as e:
            return _error(400, f"malformed model: {e}")
        try:
            labels = load_labels_csv(labels_path)
            bop = query_bop(idx, model)
            ranked = score_query(idx, bop, params, max_results=None)
            result = classify_ranked(ranked, labels, k)
        except UnclassifiableError as e:
            return _error(422, str(e))
        except PathmarkError as e:
            return _error(500, str(e))
        return JSONResponse(content=result.to_dict())

    @app.exception_handler(StorageError)
    async def storage_error(_, exc):
        return _error(500, str(exc))

    return app
