"""Text-search control: standard BM25 over element-name token documents.

Each model becomes one document holding the normalized tokens of its element
names; queries are reduced the same way. This is the keyword-search baseline
the structural engine is compared against — same normalization pipeline, same
b and z parameter semantics, whole-document term frequencies.
"""

from __future__ import annotations

import math
from collections import Counter

from ..model import Model
from ..normalize import TokenizerConfig
from ..scorer import ScoredResult, ScoringParams
from .cluster import name_tokens

__all__ = ["NameTextIndex", "build_name_index"]


class NameTextIndex:
    def __init__(self, cfg: TokenizerConfig = TokenizerConfig()):
        self.cfg = cfg
        self._docs: list[tuple[str, Counter]] = []
        self._df: Counter = Counter()
        self._avdl = 0.0

    def add(self, model_id: str, model: Model) -> None:
        tf = Counter(name_tokens(model, self.cfg))
        self._docs.append((model_id, tf))
        for token in tf:
            self._df[token] += 1
        self._avdl = sum(sum(tf.values()) for _, tf in self._docs) / len(self._docs)

    def search(self, query: Model, max_results: int | None = 20,
               params: ScoringParams = ScoringParams()) -> list[ScoredResult]:
        q = Counter(name_tokens(query, self.cfg))
        if not q or not self._docs:
            return []
        t = len(self._docs)
        scores: dict[str, float] = {}
        for model_id, tf in self._docs:
            dl = sum(tf.values())
            acc = 0.0
            for token, c_q in q.items():
                c_d = tf.get(token)
                if not c_d:
                    continue
                saturation = c_q * (params.z + 1) * c_d / (
                    c_d + params.z * (1 - params.b + params.b * dl / self._avdl)
                )
                acc += saturation * math.log((t + 1) / self._df[token])
            if acc > 0.0:
                scores[model_id] = acc
        ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        if max_results is not None:
            ranked = ranked[:max_results]
        return [ScoredResult(mid, score) for mid, score in ranked]


def build_name_index(corpus: list[tuple[str, Model]],
                     cfg: TokenizerConfig = TokenizerConfig()) -> NameTextIndex:
    index = NameTextIndex(cfg)
    for model_id, model in corpus:
        index.add(model_id, model)
    return index
