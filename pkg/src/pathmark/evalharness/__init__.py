"""Evaluation harness: synthetic corpora, query mutation, known-item MRR,
a text-search baseline, and latency benchmarking."""

from .baseline import NameTextIndex, build_name_index
from .bench import benchmark_latency, bucket_of, element_count
from .cluster import cluster_names
from .mrr import EvalReport, evaluate_mrr
from .mutate import MutationConfig, QueryMutant, derive_query_set, mutate
from .synth import SynthCorpus, generate_corpus, generate_model

__all__ = [
    "NameTextIndex", "build_name_index", "benchmark_latency", "bucket_of",
    "element_count", "cluster_names", "EvalReport", "evaluate_mrr",
    "MutationConfig", "QueryMutant", "derive_query_set", "mutate",
    "SynthCorpus", "generate_corpus", "generate_model",
]
