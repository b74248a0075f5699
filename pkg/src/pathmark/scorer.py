"""Ranking of indexed models against a query bag of paths.

The ranking function is an Okapi BM25 adapted to paths: for every path shared
by the query and a model,

    c_q * (z+1) * c_m / (c_m + z * (1 - b + b * |BoP_m| / avdl)) * ln((t+1) / df)

summed over the distinct shared paths. ``score_query`` groups the query's
paths by row-key prefix and issues one storage get per distinct prefix;
``brute_force_score`` evaluates the same formula by visiting every model and
is kept as the engine's test oracle.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .index import ModelIndex, SplitKey, join_key, split_path
from .paths import BagOfPaths

__all__ = ["ScoringParams", "ScoredResult", "bm25_term", "score_query",
           "brute_force_score", "QueryTimings"]


@dataclass(frozen=True)
class ScoringParams:
    b: float = 0.75
    z: float = 0.1

    def __post_init__(self):
        if not (0.0 <= self.b <= 1.0):
            raise ValueError("b must be in [0, 1]")
        if self.z < 0.0:
            raise ValueError("z must be >= 0")


@dataclass(frozen=True)
class ScoredResult:
    model_id: str
    score: float
    matched_paths: tuple[tuple[str, float], ...] | None = None


@dataclass
class QueryTimings:
    """Wall-clock phase decomposition of one query, in seconds."""

    paths: float = 0.0
    get: float = 0.0
    score: float = 0.0

    @property
    def total(self) -> float:
        return self.paths + self.get + self.score


def bm25_term(c_q: int, c_m: int, bop_len_m: int, avdl: float, t: int, df: int,
              params: ScoringParams = ScoringParams()) -> float:
    """One summand of the ranking function; natural logarithm."""
    if c_q < 1 or c_m < 1:
        raise ValueError("counts must be >= 1")
    if df < 1 or df > t:
        raise ValueError("df must satisfy 1 <= df <= t")
    if avdl <= 0:
        raise ValueError("avdl must be positive")
    saturation = c_q * (params.z + 1) * c_m / (
        c_m + params.z * (1 - params.b + params.b * bop_len_m / avdl)
    )
    return saturation * math.log((t + 1) / df)


def _query_keys(bop_q: BagOfPaths) -> dict[SplitKey, int]:
    """Query counts keyed by canonical split form (merging collisions)."""
    keys: dict[SplitKey, int] = {}
    for path, n in bop_q.items():
        key = split_path(path)
        keys[key] = keys.get(key, 0) + n
    return keys


def _ranked(scores: dict[str, float],
            contributions: dict[str, list[tuple[str, float]]] | None,
            max_results: int | None) -> list[ScoredResult]:
    order = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    if max_results is not None:
        order = order[:max_results]
    out = []
    for model_id, score in order:
        matched = None
        if contributions is not None:
            matched = tuple(sorted(contributions[model_id], key=lambda pc: -pc[1]))
        out.append(ScoredResult(model_id, score, matched))
    return out


def score_query(index: ModelIndex, bop_q: BagOfPaths,
                params: ScoringParams = ScoringParams(),
                max_results: int | None = 20,
                explain: bool = False,
                timings: QueryTimings | None = None) -> list[ScoredResult]:
    """Rank indexed models against the query bag.

    The query must already be normalized with the index's pipeline and
    filtered against its stop-path set. Models sharing no path are omitted;
    ties break by ascending model id.
    """
    stats_t, sum_totals = index.corpus_sums()
    if stats_t == 0 or bop_q.total == 0:
        return []
    avdl = sum_totals / stats_t
    if avdl <= 0:
        return []
    by_row: dict[str, dict[str, int]] = {}
    for key, c_q in _query_keys(bop_q).items():
        by_row.setdefault(key.row, {})[key.qualifier] = c_q

    scores: dict[str, float] = {}
    contributions: dict[str, list[tuple[str, float]]] | None = {} if explain else None
    for row, quals in by_row.items():
        t0 = time.perf_counter()
        postings = index.get_postings(row, quals.keys())
        t1 = time.perf_counter()
        for qualifier, payload in postings.items():
            c_q = quals[qualifier]
            df = len(payload)
            for model_id, (c_m, total_m) in payload.items():
                term = bm25_term(c_q, c_m, total_m, avdl, stats_t, df, params)
                scores[model_id] = scores.get(model_id, 0.0) + term
                if contributions is not None:
                    contributions.setdefault(model_id, []).append(
                        (join_key(SplitKey(row, qualifier)), term)
                    )
        t2 = time.perf_counter()
        if timings is not None:
            timings.get += t1 - t0
            timings.score += t2 - t1
    return _ranked(scores, contributions, max_results)


def brute_force_score(bop_q: BagOfPaths,
                      corpus: Sequence[tuple[str, BagOfPaths]],
                      params: ScoringParams = ScoringParams(),
                      max_results: int | None = 20,
                      explain: bool = False) -> list[ScoredResult]:
    """Direct evaluation over an in-memory corpus; same ordering contract.

    Corpus bags must be the same normalized, stop-path-filtered bags that an
    index would hold for these models.
    """
    if not corpus:
        return []
    model_keys = [(model_id, _query_keys(bop)) for model_id, bop in corpus]
    t = len(corpus)
    avdl = sum(bop.total for _, bop in corpus) / t
    if avdl <= 0 or bop_q.total == 0:
        return []
    df: dict[SplitKey, int] = {}
    for _, keys in model_keys:
        for key in keys:
            df[key] = df.get(key, 0) + 1
    query_keys = _query_keys(bop_q)
    scores: dict[str, float] = {}
    contributions: dict[str, list[tuple[str, float]]] | None = {} if explain else None
    for model_id, keys in model_keys:
        total_m = sum(keys.values())
        acc = 0.0
        for key, c_q in query_keys.items():
            c_m = keys.get(key)
            if not c_m:
                continue
            term = bm25_term(c_q, c_m, total_m, avdl, t, df[key], params)
            acc += term
            if contributions is not None:
                contributions.setdefault(model_id, []).append((join_key(key), term))
        if acc > 0.0:
            scores[model_id] = acc
    return _ranked(scores, contributions, max_results)
