import json
import os

import pytest

from pathmark.graph import FilterConfig
from pathmark.index import ModelIndex, split_path
from pathmark.ingest import (crawl_directory, index_corpus, parse_model_bytes,
                             prepare_bop, query_bop)
from pathmark.model import serialize_model_json
from pathmark.normalize import TokenizerConfig
from pathmark.paths import ATTR, CLASS, Path


def write(root, rel, content: bytes):
    path = os.path.join(root, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "wb") as f:
        f.write(content)


def model_doc(words, model_type="uml"):
    return json.dumps({"modelType": model_type, "objects": [
        {"id": f"o{i}", "class": "Thing", "attrs": {"name": [w]}}
        for i, w in enumerate(words)]}).encode()


def test_crawl_empty(tmp_path):
    manifest = crawl_directory(str(tmp_path), "uml")
    assert manifest.entries == [] and manifest.skips == []


def test_crawl_missing_root(tmp_path):
    with pytest.raises(Exception):
        crawl_directory(str(tmp_path / "nope"), "uml")


def test_crawl_dedupes_identical_content(tmp_path):
    write(str(tmp_path), "a.json", model_doc(["x"]))
    write(str(tmp_path), "b.json", model_doc(["x"]))
    manifest = crawl_directory(str(tmp_path), "uml")
    assert len(manifest.entries) == 1
    assert manifest.skips == [("b.json", "duplicate content")]


def test_crawl_sorted_nested_globs(tmp_path):
    write(str(tmp_path), "b/two.json", model_doc(["two"]))
    write(str(tmp_path), "a/one.json", model_doc(["one"]))
    write(str(tmp_path), "a/ignore.txt", b"not a model")
    manifest = crawl_directory(str(tmp_path), "uml", ("**/*.json",))
    assert [e.path for e in manifest.entries] == ["a/one.json", "b/two.json"]
    listed = sorted(
        os.path.join(r, f) for r, _, fs in os.walk(tmp_path) for f in fs
        if f.endswith(".json"))
    assert len(listed) == len(manifest.entries)
    for entry in manifest.entries:
        assert entry.model_id.startswith(entry.sha256[:12])
        assert entry.model_type == "uml"


def make_index(tmp_path, threshold=0.7):
    return ModelIndex.create(str(tmp_path / "idx"), "uml",
                             TokenizerConfig().to_dict(), FilterConfig().to_dict(),
                             stop_path_threshold=threshold)


def test_index_corpus_skips_malformed(tmp_path):
    corpus = str(tmp_path / "corpus")
    write(corpus, "ok1.json", model_doc(["alpha"]))
    write(corpus, "ok2.json", model_doc(["beta"]))
    write(corpus, "ok3.json", model_doc(["gamma"]))
    write(corpus, "bad.json", b"{ not json")
    manifest = crawl_directory(corpus, "uml")
    index = make_index(tmp_path)
    report = index_corpus(index, corpus, manifest, stop_path_postprocess=False)
    assert report.indexed == 3
    assert len(report.skipped) == 1 and report.skipped[0][0] == "bad.json"
    assert report.indexed + len(report.skipped) == len(manifest.entries)
    assert index.stats().t == report.indexed
    assert os.path.exists(os.path.join(index.directory, "manifest.json"))
    index.close()


def test_index_corpus_purges_frequent_path(tmp_path):
    corpus = str(tmp_path / "corpus")
    # "omnipresent" appears in 4 of 5 models (80% >= 70%)
    for i in range(4):
        write(corpus, f"m{i}.json", model_doc(["omnipresent", f"unique{i}"]))
    write(corpus, "m4.json", model_doc(["loner"]))
    manifest = crawl_directory(corpus, "uml")
    index = make_index(tmp_path)
    report = index_corpus(index, corpus, manifest)
    assert report.stop_paths_removed == 1
    stop_key = split_path(Path(((ATTR, "omnipres"), (CLASS, "Thing")), ("name",)))
    assert index.get_postings(stop_key.row) == {}
    keys, threshold, size = index.stored_stop_paths()
    assert keys == {stop_key} and size == 5
    index.close()


def test_reindex_same_corpus_reports_duplicates(tmp_path):
    corpus = str(tmp_path / "corpus")
    write(corpus, "m.json", model_doc(["solo"]))
    manifest = crawl_directory(corpus, "uml")
    index = make_index(tmp_path)
    index_corpus(index, corpus, manifest, stop_path_postprocess=False)
    report = index_corpus(index, corpus, manifest, stop_path_postprocess=False)
    assert report.indexed == 0
    assert "already indexed" in report.skipped[0][1]
    index.close()


def test_stored_bop_matches_fresh_pipeline(tmp_path):
    corpus = str(tmp_path / "corpus")
    words = [["State machine", "Waiting"], ["Region container"], ["Transition kind"]]
    for i, ws in enumerate(words):
        write(corpus, f"m{i}.json", model_doc(ws))
    manifest = crawl_directory(corpus, "uml")
    index = make_index(tmp_path)
    index_corpus(index, corpus, manifest)
    filter_cfg = FilterConfig.from_dict(index.filter_config)
    tok_cfg = TokenizerConfig.from_dict(index.tokenizer)
    from pathmark.ingest import index_stop_set

    sps = index_stop_set(index)
    for entry in manifest.entries:
        model, _ = parse_model_bytes(index.model_blob(entry.model_id), "uml")
        fresh = prepare_bop(model, filter_cfg, tok_cfg, sps)
        assert index.model_total(entry.model_id) == fresh.total
        grouped = {}
        for p, n in fresh.items():
            key = split_path(p)
            grouped[key] = grouped.get(key, 0) + n
        for key, count in grouped.items():
            payload = index.get_postings(key.row, [key.qualifier])[key.qualifier]
            assert payload[entry.model_id] == (count, fresh.total)
        meta = index.model_meta(entry.model_id)
        assert meta["content_hash"] == entry.sha256
        assert meta["source_uri"] == entry.path
    index.close()


def test_query_bop_uses_index_configuration(tmp_path):
    corpus = str(tmp_path / "corpus")
    for i in range(3):
        write(corpus, f"m{i}.json", model_doc(["Shared thing", f"rare{i}"]))
    manifest = crawl_directory(corpus, "uml")
    index = make_index(tmp_path)
    index_corpus(index, corpus, manifest)
    model, _ = parse_model_bytes(model_doc(["Shared thing", "rare1"]), "uml")
    bop = query_bop(index, model)
    texts = {split_path(p).row for p in bop.paths()}
    assert "(share,name,Thing" not in texts  # stop path filtered from the query too
    assert "(rare1,name,Thing" in texts
    index.close()


def test_incremental_ingest_respects_existing_stop_set(tmp_path):
    first = str(tmp_path / "first")
    for i in range(5):
        write(first, f"m{i}.json", model_doc(["ubiquitous", f"first{i}"]))
    index = make_index(tmp_path)
    index_corpus(index, first, crawl_directory(first, "uml"))
    stop_key = split_path(Path(((ATTR, "ubiquit"), (CLASS, "Thing")), ("name",)))
    keys, _, _ = index.stored_stop_paths()
    assert stop_key in keys
    second = str(tmp_path / "second")
    write(second, "extra.json", model_doc(["ubiquitous", "newcomer"]))
    index_corpus(index, second, crawl_directory(second, "uml"),
                 stop_path_postprocess=False)
    # the new model's postings and totals exclude the known stop path
    payload = index.get_postings(stop_key.row, [stop_key.qualifier])
    assert payload == {}
    newcomer = next(mid for mid in index.model_ids() if "extra" in mid)
    assert index.model_total(newcomer) == 1
    index.close()
