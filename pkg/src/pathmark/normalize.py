"""Word-level normalization of attribute labels and stop-path handling.

Attribute-value labels inside paths go through tokenize -> stop-word removal
-> stemming. A label that normalizes to zero tokens drops its paths; a label
with several tokens replicates its paths once per token (cartesian product
when a path has more than one attribute label). Class and edge labels are
never touched.

Stop paths are paths present in at least ``threshold`` (default 70%) of the
indexed models; they are computed once as an indexing post-process and
filtered from both index and queries.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from itertools import product

from . import porter
from .errors import EncodingError
from .index import SplitKey, split_path
from .paths import ATTR, BagOfPaths, Path

__all__ = [
    "TokenizerConfig",
    "StopPathSet",
    "tokenize",
    "remove_stopwords",
    "stem",
    "normalize_bop",
    "compute_stop_paths",
    "filter_stop_paths",
    "stopword_list",
]

# Replication cap per source path; excess tokens are trimmed from the longest
# label (ties: the later label) so pathological strings cannot explode the bag.
MAX_REPLICAS_PER_PATH = 64

_SPLIT_PUNCT = re.compile(r"[\W_]+", re.UNICODE)
_SPLIT_WS = re.compile(r"\s+")
_CAMEL = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+[0-9]*|[A-Z]+[0-9]*|[0-9]+")

_STOPWORD_CACHE: dict[str, frozenset[str]] = {}


def stopword_list(list_id: str) -> frozenset[str]:
    """Load an embedded stop-word list by id (cached)."""
    if list_id not in _STOPWORD_CACHE:
        name = f"stopwords_{list_id.replace('-', '_')}.txt"
        try:
            text = resources.files("pathmark.data").joinpath(name).read_text("utf-8")
        except FileNotFoundError:
            raise EncodingError(f"unknown stop-word list id {list_id!r}") from None
        words = frozenset(
            line.strip() for line in text.splitlines()
            if line.strip() and not line.startswith("#")
        )
        _STOPWORD_CACHE[list_id] = words
    return _STOPWORD_CACHE[list_id]


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    split_camel_case: bool = True
    splitter: str = "whitespace+punctuation"  # or "whitespace"
    stopword_list_id: str = "english-v1"

    def __post_init__(self):
        if self.splitter not in ("whitespace", "whitespace+punctuation"):
            raise ValueError(f"unknown splitter {self.splitter!r}")
        stopword_list(self.stopword_list_id)  # fail fast on unknown lists

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "split_camel_case": self.split_camel_case,
            "splitter": self.splitter,
            "stopword_list_id": self.stopword_list_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TokenizerConfig":
        return cls(
            lowercase=bool(d.get("lowercase", True)),
            split_camel_case=bool(d.get("split_camel_case", True)),
            splitter=d.get("splitter", "whitespace+punctuation"),
            stopword_list_id=d.get("stopword_list_id", "english-v1"),
        )


def tokenize(value: str, cfg: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Split an attribute value into tokens per the configured rules."""
    splitter = _SPLIT_PUNCT if cfg.splitter == "whitespace+punctuation" else _SPLIT_WS
    pieces = [p for p in splitter.split(value) if p]
    if cfg.split_camel_case:
        expanded: list[str] = []
        for p in pieces:
            if p.isascii() and p.isalnum():
                expanded.extend(_CAMEL.findall(p))
            else:
                expanded.append(p)
        pieces = expanded
    if cfg.lowercase:
        pieces = [p.lower() for p in pieces]
    return pieces


def remove_stopwords(tokens: list[str], cfg: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Order-preserving filter against the configured stop-word list."""
    words = stopword_list(cfg.stopword_list_id)
    return [t for t in tokens if t not in words]


def stem(token: str) -> str:
    return porter.stem(token)


def _normalize_label(value: str, cfg: TokenizerConfig) -> list[str]:
    return [stem(t) for t in remove_stopwords(tokenize(value, cfg), cfg)]


def normalize_bop(bop: BagOfPaths, cfg: TokenizerConfig = TokenizerConfig()) -> BagOfPaths:
    """Normalize every attribute label in the bag, replicating paths per token."""
    counts: dict[Path, int] = {}
    label_cache: dict[str, list[str]] = {}  # labels repeat across many paths
    for path, n in bop.items():
        token_lists: list[list[str]] = []
        attr_positions: list[int] = []
        dropped = False
        for i, (kind, label) in enumerate(path.vertices):
            if kind != ATTR:
                continue
            tokens = label_cache.get(label)
            if tokens is None:
                tokens = _normalize_label(label, cfg)
                label_cache[label] = tokens
            if not tokens:
                dropped = True
                break
            attr_positions.append(i)
            token_lists.append(list(tokens))
        if dropped:
            continue
        if not token_lists:
            counts[path] = counts.get(path, 0) + n
            continue
        replicas = math.prod(len(ts) for ts in token_lists)
        while replicas > MAX_REPLICAS_PER_PATH:
            longest = max(range(len(token_lists)), key=lambda j: (len(token_lists[j]), j))
            token_lists[longest].pop()
            replicas = math.prod(len(ts) for ts in token_lists)
        for combo in product(*token_lists):
            vertices = list(path.vertices)
            for pos, token in zip(attr_positions, combo):
                vertices[pos] = (ATTR, token)
            replica = Path(tuple(vertices), path.edges)
            counts[replica] = counts.get(replica, 0) + n
    return BagOfPaths(counts)


@dataclass(frozen=True)
class StopPathSet:
    """Paths too common to discriminate, keyed by their canonical split form."""

    paths: frozenset[SplitKey] = frozenset()
    threshold: float = 0.70
    corpus_size_at_computation: int = 0

    def __post_init__(self):
        if not (0 < self.threshold <= 1):
            raise ValueError("threshold must be in (0, 1]")

    def __contains__(self, key: SplitKey) -> bool:
        return key in self.paths

    def __len__(self) -> int:
        return len(self.paths)


def compute_stop_paths(
    df: dict[SplitKey, int], corpus_size: int, threshold: float = 0.70
) -> StopPathSet:
    """Paths whose document frequency reaches ``threshold * corpus_size``."""
    if corpus_size <= 0:
        return StopPathSet(frozenset(), threshold, 0)
    cutoff = threshold * corpus_size
    members = frozenset(k for k, n in df.items() if n + 1e-9 >= cutoff)
    return StopPathSet(members, threshold, corpus_size)


def filter_stop_paths(bop: BagOfPaths, sps: StopPathSet) -> BagOfPaths:
    """Multiset minus: drop every path whose split key is a stop path."""
    if not sps.paths:
        return bop
    counts = {p: n for p, n in bop.items() if split_path(p) not in sps.paths}
    return BagOfPaths(counts)
