"""Weighted k-nearest-neighbor domain classification backed by search scores.

A model is classified by querying the index with it, keeping the top ``k``
labeled neighbors, and summing their retrieval scores per label; the label
with the largest sum wins, ties going to the label of the single
highest-scoring neighbor. ``select_k`` picks ``k`` by seeded, stratified
10-fold cross-validation over a labeled corpus.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .errors import PathmarkError, UnclassifiableError
from .index import ModelIndex
from .ingest import parse_model_bytes, query_bop
from .model import Model
from .paths import BagOfPaths
from .scorer import ScoredResult, ScoringParams, score_query

__all__ = ["ClassificationResult", "classify", "classify_ranked", "select_k",
           "split_labeled_corpus", "load_labels_csv"]

LabeledCorpus = Mapping[str, str]  # model id -> domain label


@dataclass(frozen=True)
class ClassificationResult:
    label: str
    label_weights: dict[str, float]
    k: int
    neighbors: tuple[tuple[str, float, str], ...]  # (model id, score, label)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "label_weights": self.label_weights,
            "k": self.k,
            "neighbors": [
                {"id": mid, "score": score, "label": label}
                for mid, score, label in self.neighbors
            ],
        }


def load_labels_csv(path: str) -> dict[str, str]:
    """Read a ``model_id,label`` CSV (header row required)."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["model_id", "label"]:
            raise PathmarkError(f"{path}: expected header 'model_id,label'")
        labels = {}
        for line in reader:
            if not line:
                continue
            if len(line) < 2 or not line[0] or not line[1]:
                raise PathmarkError(f"{path}: malformed row {line!r}")
            labels[line[0]] = line[1]
    return labels


def classify_ranked(ranked: Sequence[ScoredResult], corpus: LabeledCorpus, k: int,
                    exclude: str | None = None) -> ClassificationResult:
    """Weighted vote over an already-ranked result list."""
    if k < 1:
        raise ValueError("k must be >= 1")
    neighbors: list[tuple[str, float, str]] = []
    for r in ranked:
        if r.model_id == exclude or r.model_id not in corpus:
            continue
        neighbors.append((r.model_id, r.score, corpus[r.model_id]))
        if len(neighbors) == k:
            break
    if not neighbors:
        raise UnclassifiableError("no scoreable labeled neighbor")
    weights: dict[str, float] = {}
    for _, score, label in neighbors:
        weights[label] = weights.get(label, 0.0) + score
    best = max(weights.values())
    tied = [label for label, w in weights.items() if w == best]
    if len(tied) == 1:
        label = tied[0]
    else:
        label = next(lbl for _, _, lbl in neighbors if lbl in tied)
    return ClassificationResult(label, weights, k, tuple(neighbors))


def classify(index: ModelIndex, m: Model, corpus: LabeledCorpus, k: int = 2,
             params: ScoringParams = ScoringParams(),
             exclude_id: str | None = None) -> ClassificationResult:
    """Classify ``m`` against a labeled, indexed corpus.

    ``exclude_id`` removes the model itself from its neighbor list when it is
    part of the index (mandatory during cross-validation).
    """
    bop = query_bop(index, m)
    ranked = score_query(index, bop, params, max_results=None)
    return classify_ranked(ranked, corpus, k, exclude=exclude_id)


def split_labeled_corpus(corpus: LabeledCorpus, ratio: float = 0.7, seed: int = 0
                         ) -> tuple[dict[str, str], dict[str, str]]:
    """Stratified train/test split; ``ratio`` is the training share."""
    if not (0.0 < ratio < 1.0):
        raise ValueError("ratio must be in (0, 1)")
    by_label: dict[str, list[str]] = {}
    for mid in sorted(corpus):
        by_label.setdefault(corpus[mid], []).append(mid)
    rng = random.Random(seed)
    train: dict[str, str] = {}
    test: dict[str, str] = {}
    for label in sorted(by_label):
        ids = by_label[label]
        rng.shuffle(ids)
        cut = round(ratio * len(ids))
        for mid in ids[:cut]:
            train[mid] = label
        for mid in ids[cut:]:
            test[mid] = label
    return train, test


def _stratified_folds(corpus: LabeledCorpus, folds: int, seed: int) -> list[list[str]]:
    by_label: dict[str, list[str]] = {}
    for mid in sorted(corpus):
        by_label.setdefault(corpus[mid], []).append(mid)
    rng = random.Random(seed)
    buckets: list[list[str]] = [[] for _ in range(folds)]
    cursor = 0
    for label in sorted(by_label):
        ids = by_label[label]
        rng.shuffle(ids)
        for mid in ids:
            buckets[cursor % folds].append(mid)
            cursor += 1
    return buckets


def select_k(index: ModelIndex, corpus: LabeledCorpus,
             k_range: Sequence[int] = range(2, 11), folds: int = 10, seed: int = 0,
             params: ScoringParams = ScoringParams(),
             ranker: Callable[[str], Sequence[ScoredResult]] | None = None
             ) -> tuple[int, float, dict[int, float]]:
    """Pick the k maximizing mean validation accuracy over stratified folds.

    Ties go to the smallest k. ``ranker`` overrides how a model's ranked
    neighbor list is produced (the brute-force oracle plugs in here).
    Returns (k, its mean accuracy, mean accuracy per k).
    """
    if len(corpus) < folds:
        raise PathmarkError(f"corpus of {len(corpus)} models cannot fill {folds} folds")
    if not k_range:
        raise ValueError("k_range is empty")
    if ranker is None:
        def ranker(mid: str) -> Sequence[ScoredResult]:
            model, _ = _stored_model(index, mid)
            bop = query_bop(index, model)
            return score_query(index, bop, params, max_results=None)

    ranked_cache: dict[str, Sequence[ScoredResult]] = {
        mid: ranker(mid) for mid in sorted(corpus)
    }
    buckets = _stratified_folds(corpus, folds, seed)
    means: dict[int, float] = {}
    for k in k_range:
        accuracies = []
        for fold in buckets:
            if not fold:
                continue
            training = {mid: corpus[mid] for mid in corpus if mid not in set(fold)}
            correct = 0
            for mid in fold:
                try:
                    result = classify_ranked(ranked_cache[mid], training, k, exclude=mid)
                except UnclassifiableError:
                    continue
                if result.label == corpus[mid]:
                    correct += 1
            accuracies.append(correct / len(fold))
        means[k] = sum(accuracies) / len(accuracies) if accuracies else 0.0
    best_k = max(sorted(k_range), key=lambda k: (means[k], -k))
    return best_k, means[best_k], means


def _stored_model(index: ModelIndex, model_id: str):
    data = index.model_blob(model_id)
    return parse_model_bytes(data, index.model_type)
