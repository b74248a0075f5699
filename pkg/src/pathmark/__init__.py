"""pathmark: structure-based search over typed object-graph models.

Models are encoded as bags of paths over a labeled multigraph, indexed in a
prefix-split inverted index on an ordered key-value store, and ranked with an
adapted Okapi BM25. Ships with a weighted-kNN classifier, an HTTP query
service, a CLI, and a mutation-based evaluation harness.
"""

from .classifier import ClassificationResult, classify, select_k
from .graph import FilterConfig, build_graph, extract_paths, model_to_bop
from .index import ModelIndex, SplitKey, split_path
from .ingest import crawl_directory, index_corpus, prepare_bop, query_bop
from .model import (Model, ModelObject, ValidationReport, parse_model_json,
                    parse_model_xmi, serialize_model_json, validate_model)
from .normalize import (StopPathSet, TokenizerConfig, compute_stop_paths,
                        filter_stop_paths, normalize_bop, remove_stopwords,
                        stem, tokenize)
from .paths import BagOfPaths, Path
from .scorer import (ScoredResult, ScoringParams, bm25_term, brute_force_score,
                     score_query)

__version__ = "0.1.0"

__all__ = [
    "BagOfPaths", "ClassificationResult", "FilterConfig", "Model", "ModelIndex",
    "ModelObject", "Path", "ScoredResult", "ScoringParams", "SplitKey",
    "StopPathSet", "TokenizerConfig", "ValidationReport", "bm25_term",
    "brute_force_score", "build_graph", "classify", "compute_stop_paths",
    "crawl_directory", "extract_paths", "filter_stop_paths", "index_corpus",
    "model_to_bop", "normalize_bop", "parse_model_json", "parse_model_xmi",
    "prepare_bop", "query_bop", "remove_stopwords", "score_query", "select_k",
    "serialize_model_json", "split_path", "stem", "tokenize", "validate_model",
]
