"""Corpus ingestion: walk a directory of model files, run the encode
pipeline, populate the index, then compute and purge stop paths.

The encode pipeline for one model is parse -> graph -> path extraction ->
normalization (-> stop-path filter when the index already has a stop set).
Queries must go through the same pipeline with the same configuration, which
is pinned in the index's ``meta.json``; :func:`query_bop` rebuilds it from
there.
"""

from __future__ import annotations

import fnmatch
import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import PathmarkError
from .graph import FilterConfig, model_to_bop
from .index import IndexStats, ModelIndex
from .model import Model, parse_model_json, parse_model_xmi
from .normalize import (StopPathSet, TokenizerConfig, compute_stop_paths,
                        filter_stop_paths, normalize_bop)
from .paths import BagOfPaths

__all__ = ["ManifestEntry", "CorpusManifest", "IndexReport", "crawl_directory",
           "index_corpus", "prepare_bop", "query_bop", "parse_model_bytes",
           "MAX_MODEL_BYTES"]

MAX_MODEL_BYTES = 32 * 1024 * 1024
DEFAULT_GLOBS = ("**/*.json", "**/*.xmi", "**/*.ecore", "**/*.uml")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    model_type: str
    model_id: str
    sha256: str


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    skips: list[tuple[str, str]] = field(default_factory=list)  # (path, reason)
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "created_at": self.created_at,
            "entries": [vars(e) for e in self.entries],
            "skips": [{"path": p, "reason": r} for p, r in self.skips],
        }

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for e in self.entries:
            h.update(e.sha256.encode())
            h.update(e.model_id.encode())
        return h.hexdigest()


@dataclass
class IndexReport:
    indexed: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)
    stop_paths_removed: int = 0
    elapsed_seconds: float = 0.0
    stats: IndexStats | None = None

    def to_dict(self) -> dict:
        return {
            "indexed": self.indexed,
            "skipped": [{"path": p, "reason": r} for p, r in self.skipped],
            "stop_paths_removed": self.stop_paths_removed,
            "elapsed_seconds": self.elapsed_seconds,
            "stats": self.stats.to_dict() if self.stats else None,
        }


def _glob_match(rel: str, patterns) -> bool:
    for pat in patterns:
        if fnmatch.fnmatch(rel, pat):
            return True
        # fnmatch has no '**'; also accept a match against the basename.
        if "**/" in pat and fnmatch.fnmatch(os.path.basename(rel), pat.split("**/")[-1]):
            return True
    return False


def crawl_directory(root: str, model_type: str,
                    include_globs=DEFAULT_GLOBS) -> CorpusManifest:
    """Deterministic (sorted) walk of ``root``; dedupes by content hash.

    Model ids are the content-hash prefix joined with the filename stem, so
    identical files collapse and renames keep searchable ids readable.
    """
    if not os.path.isdir(root):
        raise PathmarkError(f"corpus root {root!r} is not a directory")
    manifest = CorpusManifest(created_at=datetime.now(timezone.utc).isoformat())
    seen_hashes: set[str] = set()
    seen_ids: set[str] = set()
    files: list[str] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            rel = os.path.relpath(os.path.join(dirpath, name), root)
            if _glob_match(rel.replace(os.sep, "/"), include_globs):
                files.append(rel)
    for rel in sorted(files):
        full = os.path.join(root, rel)
        try:
            with open(full, "rb") as f:
                data = f.read(MAX_MODEL_BYTES + 1)
        except OSError as e:
            manifest.skips.append((rel, f"unreadable: {e}"))
            continue
        if len(data) > MAX_MODEL_BYTES:
            manifest.skips.append((rel, f"larger than {MAX_MODEL_BYTES} bytes"))
            continue
        digest = hashlib.sha256(data).hexdigest()
        if digest in seen_hashes:
            manifest.skips.append((rel, "duplicate content"))
            continue
        seen_hashes.add(digest)
        stem = os.path.splitext(os.path.basename(rel))[0]
        model_id = f"{digest[:12]}-{stem}"
        if model_id in seen_ids:
            manifest.skips.append((rel, f"duplicate model id {model_id}"))
            continue
        seen_ids.add(model_id)
        manifest.entries.append(ManifestEntry(rel, model_type, model_id, digest))
    return manifest


def parse_model_bytes(data: bytes, model_type: str, source: str = "") -> tuple[Model, str]:
    """Dispatch to the JSON or XMI parser by sniffing; returns (model, format)."""
    head = data.lstrip()[:1]
    if head == b"<":
        return parse_model_xmi(data, model_type=model_type), "xmi"
    return parse_model_json(data), "json"


def prepare_bop(model: Model, filter_cfg: FilterConfig, tok_cfg: TokenizerConfig,
                stop_set: StopPathSet | None = None) -> BagOfPaths:
    """Full encode pipeline for one model."""
    bop = normalize_bop(model_to_bop(model, filter_cfg), tok_cfg)
    if stop_set is not None and stop_set.paths:
        bop = filter_stop_paths(bop, stop_set)
    return bop


def index_stop_set(index: ModelIndex) -> StopPathSet:
    keys, threshold, size = index.stored_stop_paths()
    return StopPathSet(keys, threshold, size)


def index_configs(index: ModelIndex) -> tuple[FilterConfig, TokenizerConfig]:
    return (FilterConfig.from_dict(index.filter_config or {}),
            TokenizerConfig.from_dict(index.tokenizer or {}))


def query_bop(index: ModelIndex, model: Model) -> BagOfPaths:
    """Encode a query with the index's own pipeline and stop-path set."""
    filter_cfg, tok_cfg = index_configs(index)
    return prepare_bop(model, filter_cfg, tok_cfg, index_stop_set(index))


def index_corpus(index: ModelIndex, root: str, manifest: CorpusManifest,
                 batch_models: int = 64, workers: int = 4,
                 stop_path_postprocess: bool = True,
                 store_blobs: bool = True) -> IndexReport:
    """Index every manifest entry, then run the stop-path post-process.

    Parse/encode runs on a bounded worker pool; a single writer commits
    batches in manifest order. Parse failures skip the file, never the batch.
    """
    started = time.perf_counter()
    report = IndexReport()
    filter_cfg, tok_cfg = index_configs(index)
    # an index that already went through stop-path post-processing keeps new
    # models consistent by filtering them against the existing set up front
    existing_stop_set = index_stop_set(index)

    def encode(entry: ManifestEntry):
        full = os.path.join(root, entry.path)
        with open(full, "rb") as f:
            data = f.read()
        model, fmt = parse_model_bytes(data, entry.model_type, source=entry.path)
        bop = prepare_bop(model, filter_cfg, tok_cfg, existing_stop_set)
        meta = {
            "source_uri": entry.path,
            "model_type": entry.model_type,
            "content_hash": entry.sha256,
            "format": fmt,
        }
        return entry, bop, meta, (data if store_blobs else None)

    with index.bulk(batch_models=batch_models) as staging:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for outcome in pool.map(_safe(encode), manifest.entries):
                if isinstance(outcome, tuple):
                    entry, bop, meta, blob = outcome
                    try:
                        staging.add(entry.model_id, bop, meta, blob)
                        report.indexed += 1
                    except PathmarkError as e:
                        report.skipped.append((entry.path, str(e)))
                else:
                    report.skipped.append(outcome.path_reason)

    if stop_path_postprocess:
        stats = index.stats()
        if stats.t:
            df = index.document_frequencies()
            sps = compute_stop_paths(df, stats.t, index.stop_path_threshold)
            report.stop_paths_removed = index.apply_stop_path_purge(
                sps.paths, sps.threshold, sps.corpus_size_at_computation
            )
    if index.directory:
        with open(os.path.join(index.directory, "manifest.json"), "w", encoding="utf-8") as f:
            json.dump(manifest.to_dict(), f, indent=1)
    report.elapsed_seconds = time.perf_counter() - started
    report.stats = index.stats()
    return report


class _EncodeFailure:
    def __init__(self, path: str, reason: str):
        self.path_reason = (path, reason)


def _safe(fn):
    def wrapped(entry):
        try:
            return fn(entry)
        except Exception as e:  # parse/validation errors must not abort the batch
            return _EncodeFailure(entry.path, f"{type(e).__name__}: {e}")
    return wrapped
