"""Operator command line: index, search, classify, stats, serve, eval.

Data goes to stdout, diagnostics to stderr. Exit codes: 0 success, 1 user
error, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .classifier import classify_ranked, load_labels_csv
from .errors import PathmarkError
from .graph import FilterConfig
from .index import ModelIndex, path_text
from .ingest import (crawl_directory, index_corpus, parse_model_bytes,
                     query_bop)
from .model import serialize_model_json
from .normalize import TokenizerConfig
from .scorer import ScoringParams, score_query

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _emit(data, fmt: str, table_fields=None):
    if fmt == "json":
        print(json.dumps(data, indent=1))
    elif fmt == "csv":
        rows = data if isinstance(data, list) else [data]
        if not rows:
            return
        fields = table_fields or list(rows[0].keys())
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
        print(out.getvalue(), end="")
    else:  # table
        rows = data if isinstance(data, list) else [data]
        if not rows:
            return
        fields = table_fields or list(rows[0].keys())
        widths = [max(len(str(f)), *(len(str(r.get(f, ""))) for r in rows)) for f in fields]
        print("  ".join(str(f).ljust(w) for f, w in zip(fields, widths)))
        for r in rows:
            print("  ".join(str(r.get(f, "")).ljust(w) for f, w in zip(fields, widths)))


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise PathmarkError(f"cannot read config file {path!r}: {e}") from e
    if not isinstance(doc, dict):
        raise PathmarkError(f"config file {path!r} must hold a JSON object")
    return doc


def _filter_config(args) -> FilterConfig:
    base = FilterConfig.from_dict(_load_config_file(args.config).get("filter", {}))
    return FilterConfig(
        excluded_classes=base.excluded_classes | frozenset(args.exclude_class or ()),
        excluded_attributes=base.excluded_attributes
        | frozenset(args.exclude_attribute or ()),
        excluded_references=base.excluded_references
        | frozenset(args.exclude_reference or ()),
        max_path_length=args.max_path_length
        if args.max_path_length is not None else base.max_path_length,
    )


def _tokenizer_config(args) -> TokenizerConfig:
    base = TokenizerConfig.from_dict(_load_config_file(args.config).get("tokenizer", {}))
    return TokenizerConfig(
        lowercase=base.lowercase,
        split_camel_case=False if args.no_camel_split else base.split_camel_case,
        splitter=args.splitter or base.splitter,
        stopword_list_id=args.stopwords or base.stopword_list_id,
    )


def _index_dir(root: str, model_type: str) -> str:
    return os.path.join(root, model_type)


def _open_index(args, readonly=True) -> ModelIndex:
    directory = _index_dir(args.index, args.type)
    if not os.path.exists(os.path.join(directory, "meta.json")):
        if os.path.exists(os.path.join(args.index, "meta.json")):
            directory = args.index
        else:
            raise PathmarkError(f"no {args.type!r} index under {args.index!r}")
    return ModelIndex.open(directory, readonly=readonly)


def _load_query(path: str, model_type: str):
    with open(path, "rb") as f:
        data = f.read()
    model, _ = parse_model_bytes(data, model_type)
    return model


def cmd_index(args) -> int:
    from .ingest import DEFAULT_GLOBS

    globs = tuple(args.glob) if args.glob else DEFAULT_GLOBS
    manifest = crawl_directory(args.corpus, args.type, globs)
    directory = _index_dir(args.index, args.type)
    index = ModelIndex.create(
        directory, args.type,
        tokenizer=_tokenizer_config(args).to_dict(),
        filter_config=_filter_config(args).to_dict(),
        stop_path_threshold=args.stop_threshold,
    )
    try:
        report = index_corpus(index, args.corpus, manifest,
                              batch_models=args.batch, workers=args.workers)
    finally:
        index.close()
    _emit(report.to_dict(), args.format)
    return 0


def cmd_search(args) -> int:
    index = _open_index(args)
    try:
        model = _load_query(args.query, args.type)
        bop = query_bop(index, model)
        results = score_query(index, bop, ScoringParams(), max_results=args.max,
                              explain=args.explain)
    finally:
        index.close()
    rows = []
    for rank, r in enumerate(results, start=1):
        row = {"rank": rank, "id": r.model_id, "score": r.score}
        if r.matched_paths is not None:
            row["matched_paths"] = [
                {"path": text, "contribution": value} for text, value in r.matched_paths
            ]
        rows.append(row)
    _emit(rows, args.format, table_fields=["rank", "id", "score"])
    return 0


def cmd_classify(args) -> int:
    index = _open_index(args)
    try:
        labels = load_labels_csv(args.labels)
        model = _load_query(args.query, args.type)
        bop = query_bop(index, model)
        ranked = score_query(index, bop, ScoringParams(), max_results=None)
        result = classify_ranked(ranked, labels, args.k)
    finally:
        index.close()
    _emit(result.to_dict(), args.format)
    return 0


def cmd_stats(args) -> int:
    if args.type:
        index = _open_index(args)
        stats = [index.stats().to_dict()]
        index.close()
    else:
        from .service import discover_indexes

        indexes = discover_indexes(args.index)
        if not indexes:
            raise PathmarkError(f"no indexes under {args.index!r}")
        stats = [idx.stats().to_dict() for idx in indexes.values()]
        for idx in indexes.values():
            idx.close()
    _emit(stats, args.format,
          table_fields=["model_type", "models", "avdl", "stop_paths"])
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.index, cors_origins=args.cors or ())
    print(f"serving index root {args.index} on {args.host}:{args.port}", file=sys.stderr)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_eval_synth(args) -> int:
    from .evalharness import generate_corpus
    from .evalharness.synth import DOMAIN_POOLS

    domains = list(DOMAIN_POOLS)[: args.domains] if args.domains else None
    corpus = generate_corpus(args.models, seed=args.seed,
                             class_range=(args.min_classes, args.max_classes),
                             domains=domains, model_type=args.type)
    os.makedirs(args.out, exist_ok=True)
    import hashlib

    # label rows use the ids the crawler will assign (hash-prefixed stems)
    crawl_ids = {}
    for model_id, model in corpus.models:
        data = serialize_model_json(model)
        with open(os.path.join(args.out, f"{model_id}.json"), "wb") as f:
            f.write(data)
        crawl_ids[model_id] = f"{hashlib.sha256(data).hexdigest()[:12]}-{model_id}"
    with open(os.path.join(args.out, "labels.csv"), "w", newline="",
              encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["model_id", "label"])
        for model_id, _ in corpus.models:
            writer.writerow([crawl_ids[model_id], corpus.labels[model_id]])
    print(f"wrote {len(corpus.models)} models to {args.out}", file=sys.stderr)
    return 0


def _load_corpus_dir(root: str, model_type: str):
    corpus = []
    manifest = crawl_directory(root, model_type)
    for entry in manifest.entries:
        with open(os.path.join(root, entry.path), "rb") as f:
            model, _ = parse_model_bytes(f.read(), model_type)
        corpus.append((entry.model_id, model))
    return corpus, manifest


def cmd_eval_mutate(args) -> int:
    from .evalharness import derive_query_set

    corpus, manifest = _load_corpus_dir(args.corpus, args.type)
    mutants = derive_query_set(corpus, radii=tuple(args.radii), seed=args.seed,
                               low_df_ceiling=args.low_df_ceiling, limit=args.limit)
    os.makedirs(args.out, exist_ok=True)
    queryset = []
    for i, mutant in enumerate(mutants):
        name = f"query-{i:04d}.json"
        with open(os.path.join(args.out, name), "wb") as f:
            f.write(serialize_model_json(mutant.model))
        queryset.append({"file": name, "origin": mutant.origin,
                         "radius": mutant.radius,
                         "operators": list(mutant.operator_log)})
    with open(os.path.join(args.out, "queryset.json"), "w", encoding="utf-8") as f:
        json.dump({"corpus_hash": manifest.content_hash(), "seed": args.seed,
                   "queries": queryset}, f, indent=1)
    print(f"wrote {len(mutants)} queries to {args.out}", file=sys.stderr)
    return 0


def _load_queryset(queries_dir: str, model_type: str):
    meta_path = os.path.join(queries_dir, "queryset.json")
    with open(meta_path, encoding="utf-8") as f:
        meta = json.load(f)
    queries = []
    for q in meta["queries"]:
        with open(os.path.join(queries_dir, q["file"]), "rb") as f:
            model, _ = parse_model_bytes(f.read(), model_type)
        queries.append((q, model))
    return meta, queries


def cmd_eval_mrr(args) -> int:
    from .evalharness import build_name_index, evaluate_mrr
    from .evalharness.mutate import QueryMutant

    meta, queries = _load_queryset(args.queries, args.type)
    mutants = [QueryMutant(model, q["origin"], (), q.get("radius"))
               for q, model in queries]
    if args.engine == "mar":
        index = _open_index(args)
        try:
            def engine(model):
                bop = query_bop(index, model)
                return [r.model_id for r in
                        score_query(index, bop, max_results=args.max)]

            report = evaluate_mrr(mutants, engine, engine_id="mar",
                                  query_set_id=args.queries,
                                  corpus_hash=meta.get("corpus_hash", ""))
        finally:
            index.close()
    else:
        if not args.corpus:
            raise PathmarkError("--corpus is required for the text baseline")
        corpus, manifest = _load_corpus_dir(args.corpus, args.type)
        text_index = build_name_index(corpus)

        def engine(model):
            return [r.model_id for r in text_index.search(model, max_results=args.max)]

        report = evaluate_mrr(mutants, engine, engine_id="text",
                              query_set_id=args.queries,
                              corpus_hash=manifest.content_hash())
    if args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerows(report.to_csv_rows())
    else:
        print(report.to_json())
    return 0


def cmd_eval_bench(args) -> int:
    import tempfile

    from .evalharness import benchmark_latency
    from .evalharness.bench import write_latency_csv
    from .ingest import CorpusManifest, index_corpus

    corpus, _ = _load_corpus_dir(args.corpus, args.type)
    _, queries = _load_queryset(args.queries, args.type)
    query_models = [(q["file"], model) for q, model in queries]

    workdir = tempfile.mkdtemp(prefix="pathmark-bench-")
    builds = [0]

    def build_index(models):
        builds[0] += 1
        directory = os.path.join(workdir, f"idx{builds[0]}")
        index = ModelIndex.create(directory, args.type,
                                  tokenizer=TokenizerConfig().to_dict(),
                                  filter_config=FilterConfig().to_dict())
        with index.bulk() as staging:
            for model_id, model in models:
                from .ingest import index_configs, prepare_bop

                filter_cfg, tok_cfg = index_configs(index)
                staging.add(model_id, prepare_bop(model, filter_cfg, tok_cfg), {}, None)
        stats = index.stats()
        if stats.t:
            from .normalize import compute_stop_paths

            sps = compute_stop_paths(index.document_frequencies(), stats.t,
                                     index.stop_path_threshold)
            index.apply_stop_path_purge(sps.paths, sps.threshold, stats.t)
        return index

    rows = benchmark_latency(build_index, corpus, query_models, args.sizes)
    write_latency_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="pathmark",
                     description="Structure-based search engine for object-graph models")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_index(p):
        p.add_argument("--index", required=True, help="index root directory")
        p.add_argument("--type", required=True, help="model type (index name)")
        p.add_argument("--format", choices=["json", "csv", "table"], default="json")

    p = sub.add_parser("index", help="crawl a corpus directory and build an index")
    p.add_argument("corpus")
    common_index(p)
    p.add_argument("--glob", action="append", help="include glob (repeatable)")
    p.add_argument("--config", help="JSON file with tokenizer/filter sections; flags win")
    p.add_argument("--max-path-length", type=int, default=None)
    p.add_argument("--stop-threshold", type=float, default=0.70)
    p.add_argument("--exclude-class", action="append")
    p.add_argument("--exclude-attribute", action="append")
    p.add_argument("--exclude-reference", action="append")
    p.add_argument("--no-camel-split", action="store_true")
    p.add_argument("--splitter", choices=["whitespace", "whitespace+punctuation"],
                   default=None)
    p.add_argument("--stopwords", default=None)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("search", help="rank indexed models against a query model")
    p.add_argument("query")
    common_index(p)
    p.add_argument("--max", type=int, default=20)
    p.add_argument("--explain", action="store_true")
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("classify", help="weighted-kNN domain classification")
    p.add_argument("query")
    common_index(p)
    p.add_argument("--labels", required=True, help="CSV of model_id,label")
    p.add_argument("--k", type=int, default=2)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("stats", help="index statistics")
    p.add_argument("--index", required=True)
    p.add_argument("--type", default="")
    p.add_argument("--format", choices=["json", "csv", "table"], default="json")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("serve", help="run the HTTP query service")
    p.add_argument("--index", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--cors", action="append")
    p.set_defaults(fn=cmd_serve)

    ev = sub.add_parser("eval", help="evaluation workflows").add_subparsers(
        dest="eval_command", required=True)

    p = ev.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("out")
    p.add_argument("--models", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-classes", type=int, default=22)
    p.add_argument("--max-classes", type=int, default=34)
    p.add_argument("--domains", type=int, default=0, help="restrict to the first N domains")
    p.add_argument("--type", default="ecore")
    p.set_defaults(fn=cmd_eval_synth)

    p = ev.add_parser("mutate", help="derive mutant queries from a corpus")
    p.add_argument("corpus")
    p.add_argument("out")
    p.add_argument("--type", required=True)
    p.add_argument("--radii", type=int, nargs="+", default=[5, 6, 7])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--low-df-ceiling", type=int, default=2)
    p.add_argument("--limit", type=int)
    p.set_defaults(fn=cmd_eval_mutate)

    p = ev.add_parser("mrr", help="known-item mean reciprocal rank")
    p.add_argument("--queries", required=True, help="directory from 'eval mutate'")
    p.add_argument("--engine", choices=["mar", "text"], default="mar")
    p.add_argument("--index", default="")
    p.add_argument("--type", required=True)
    p.add_argument("--corpus", default="", help="corpus dir (text baseline)")
    p.add_argument("--max", type=int, default=100)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(fn=cmd_eval_mrr)

    p = ev.add_parser("bench", help="latency by index size and query bucket")
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--type", required=True)
    p.add_argument("--sizes", type=int, nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_eval_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except PathmarkError as e:
        print(f"pathmark: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as e:  # internal errors get a distinct exit code
        print(f"pathmark: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
