"""Latency benchmarking: response time by index size and query-size bucket,
decomposed into the path-extraction, storage-get and scoring phases."""

from __future__ import annotations

import csv
import statistics
import time
from typing import Sequence

from ..index import ModelIndex
from ..ingest import index_configs, index_stop_set, prepare_bop
from ..model import Model
from ..scorer import QueryTimings, ScoringParams, score_query

__all__ = ["element_count", "bucket_of", "run_queries", "benchmark_latency",
           "write_latency_csv"]

COUNTED_KINDS = {"EPackage", "EClass", "EAttribute", "EReference", "EEnum"}
PHASES = ("paths", "get", "score", "total")


def element_count(model: Model) -> int:
    """Packages + classes + structural features + enumerations."""
    return sum(1 for o in model.objects if o.class_name in COUNTED_KINDS)


def bucket_of(model: Model) -> str:
    n = element_count(model)
    if n < 20:
        return "small"
    if n <= 70:
        return "medium"
    return "large"


def run_queries(index: ModelIndex, queries: Sequence[tuple[str, Model]],
                params: ScoringParams = ScoringParams(),
                max_results: int = 20) -> list[dict]:
    """Per query: bucket and wall-clock seconds for each phase."""
    filter_cfg, tok_cfg = index_configs(index)
    stop_set = index_stop_set(index)
    samples = []
    for qid, model in queries:
        timings = QueryTimings()
        t0 = time.perf_counter()
        bop = prepare_bop(model, filter_cfg, tok_cfg, stop_set)
        timings.paths = time.perf_counter() - t0
        score_query(index, bop, params, max_results=max_results, timings=timings)
        samples.append({
            "query": qid,
            "bucket": bucket_of(model),
            "paths": timings.paths,
            "get": timings.get,
            "score": timings.score,
            "total": timings.total,
        })
    return samples


def summarize(samples: list[dict], index_size: int) -> list[dict]:
    rows = []
    for bucket in ("small", "medium", "large"):
        in_bucket = [s for s in samples if s["bucket"] == bucket]
        if not in_bucket:
            continue
        for phase in PHASES:
            values = [s[phase] for s in in_bucket]
            rows.append({
                "index_size": index_size,
                "bucket": bucket,
                "phase": phase,
                "queries": len(values),
                "mean_ms": statistics.mean(values) * 1000.0,
                "max_ms": max(values) * 1000.0,
            })
    return rows


def benchmark_latency(build_index, corpus: Sequence[tuple[str, Model]],
                      queries: Sequence[tuple[str, Model]],
                      index_sizes: Sequence[int],
                      params: ScoringParams = ScoringParams()) -> list[dict]:
    """Measure every query against an index of each requested size.

    ``build_index(models)`` must return a ready (ingested, stop-path
    post-processed) ModelIndex; a fresh index is built per size so each
    measurement sees consistent corpus statistics. Measurements run serially.
    """
    rows: list[dict] = []
    for size in sorted(index_sizes):
        if size > len(corpus):
            raise ValueError(f"index size {size} exceeds corpus of {len(corpus)}")
        index = build_index(corpus[:size])
        try:
            samples = run_queries(index, queries, params)
            rows.extend(summarize(samples, size))
        finally:
            index.close()
    return rows


def write_latency_csv(rows: list[dict], path: str) -> None:
    fields = ["index_size", "bucket", "phase", "mean_ms", "max_ms"]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
