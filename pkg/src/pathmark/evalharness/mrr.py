"""Known-item evaluation: each mutant query has exactly one relevant model
(its origin); quality is summarized as the mean reciprocal rank."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..model import Model
from .mutate import QueryMutant

__all__ = ["QueryOutcome", "EvalReport", "evaluate_mrr"]

HISTOGRAM_BUCKETS = ("1", "2", "3", "4", ">=5")


@dataclass(frozen=True)
class QueryOutcome:
    origin: str
    rank: int | None  # 1-based; None when the origin never appeared
    reciprocal: float


@dataclass
class EvalReport:
    engine_id: str
    query_set_id: str
    corpus_hash: str = ""
    per_query: list[QueryOutcome] = field(default_factory=list)

    @property
    def mrr(self) -> float:
        if not self.per_query:
            return 0.0
        return sum(q.reciprocal for q in self.per_query) / len(self.per_query)

    @property
    def histogram(self) -> dict[str, int]:
        hist = {bucket: 0 for bucket in HISTOGRAM_BUCKETS}
        for q in self.per_query:
            if q.rank is not None and q.rank <= 4:
                hist[str(q.rank)] += 1
            else:
                hist[">=5"] += 1
        return hist

    def to_dict(self) -> dict:
        return {
            "engine_id": self.engine_id,
            "query_set_id": self.query_set_id,
            "corpus_hash": self.corpus_hash,
            "queries": len(self.per_query),
            "mrr": self.mrr,
            "histogram": self.histogram,
            "per_query": [
                {"origin": q.origin, "rank": q.rank, "reciprocal": q.reciprocal}
                for q in self.per_query
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_csv_rows(self) -> list[list]:
        rows = [["origin", "rank", "reciprocal"]]
        for q in self.per_query:
            rows.append([q.origin, "" if q.rank is None else q.rank, q.reciprocal])
        return rows


def evaluate_mrr(mutants: Sequence[QueryMutant],
                 engine: Callable[[Model], Sequence[str]],
                 engine_id: str = "", query_set_id: str = "",
                 corpus_hash: str = "") -> EvalReport:
    """Run every mutant through ``engine`` (query model -> ranked model ids).

    The rank of an origin absent from the result list counts as reciprocal 0.
    """
    report = EvalReport(engine_id=engine_id, query_set_id=query_set_id,
                        corpus_hash=corpus_hash)
    for mutant in mutants:
        ranked = list(engine(mutant.model))
        try:
            rank = ranked.index(mutant.origin) + 1
        except ValueError:
            report.per_query.append(QueryOutcome(mutant.origin, None, 0.0))
            continue
        report.per_query.append(QueryOutcome(mutant.origin, rank, 1.0 / rank))
    return report
