"""Name-based k-means clustering of models (drives cluster renaming)."""

from __future__ import annotations

from ..errors import PathmarkError
from ..model import Model
from ..normalize import TokenizerConfig, remove_stopwords, stem, tokenize

__all__ = ["cluster_names", "name_tokens"]


def name_tokens(model: Model, cfg: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Normalized tokens of every element name (all attribute values as fallback)."""
    values = [v for o in model.objects for v in o.attributes.get("name", ())]
    if not values:
        values = [v for o in model.objects for vs in o.attributes.values() for v in vs]
    tokens: list[str] = []
    for value in values:
        tokens.extend(stem(t) for t in remove_stopwords(tokenize(value, cfg), cfg))
    return tokens


def cluster_names(corpus: list[tuple[str, Model]], k: int, seed: int = 0,
                  cfg: TokenizerConfig = TokenizerConfig()) -> dict[str, int]:
    """Cluster models by TF-IDF over their element-name tokens; seeded k-means."""
    if not corpus:
        raise PathmarkError("cannot cluster an empty corpus")
    if k > len(corpus):
        raise PathmarkError(f"k={k} exceeds corpus size {len(corpus)}")
    from sklearn.cluster import KMeans
    from sklearn.feature_extraction.text import TfidfVectorizer

    docs = [" ".join(name_tokens(model, cfg)) or "empty" for _, model in corpus]
    vectors = TfidfVectorizer(analyzer=str.split).fit_transform(docs)
    labels = KMeans(n_clusters=k, random_state=seed, n_init=10).fit_predict(vectors)
    return {mid: int(label) for (mid, _), label in zip(corpus, labels)}
