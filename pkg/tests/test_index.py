import json

import pytest
from hypothesis import given, strategies as st

from pathmark.errors import DuplicateModelError, EncodingError, UnknownModelError
from pathmark.graph import FilterConfig
from pathmark.index import (ModelIndex, SplitKey, decode_key, decode_payload,
                            decode_segment, encode_payload, encode_segment,
                            join_key, path_text, split_path)
from pathmark.normalize import TokenizerConfig, compute_stop_paths
from pathmark.paths import ATTR, CLASS, BagOfPaths, Path


def ap(*segments) -> Path:
    """Path from alternating label args, first/last kinds inferred by '@'."""
    vertices = []
    edges = []
    for i, s in enumerate(segments):
        if i % 2 == 0:
            kind = ATTR if s.startswith("@") else CLASS
            vertices.append((kind, s.lstrip("@")))
        else:
            edges.append(s)
    return Path(tuple(vertices), tuple(edges))


# -- split schema golden checks ----------------------------------------------

from support.goldens import GOLDEN_KEYS as GOLDEN


@pytest.mark.parametrize("path,row,qual", GOLDEN)
def test_split_golden_bytes(path, row, qual):
    key = split_path(path)
    assert (key.row, key.qualifier) == (row, qual)


@pytest.mark.parametrize("path,row,qual", GOLDEN)
def test_join_inverse(path, row, qual):
    key = split_path(path)
    assert join_key(key) == row + qual
    labels, attr_start = decode_key(key)
    assert labels == path.labels()
    assert attr_start == path.starts_with_attribute


def test_segment_escaping():
    assert encode_segment("a,b") == "a\\,b"
    assert encode_segment("plain") == "plain"
    assert encode_segment("(x)\\") == "\\(x\\)\\\\"
    with pytest.raises(EncodingError):
        decode_segment("bad\\x")


@given(st.text(max_size=20))
def test_segment_round_trip(label):
    assert decode_segment(encode_segment(label)) == label


def test_split_path_with_delimiters_in_labels():
    p = ap("@va,lue", "ed(ge", "Cl)ass")
    key = split_path(p)
    labels, attr_start = decode_key(key)
    assert labels == ["va,lue", "ed(ge", "Cl)ass"] and attr_start


def test_payload_round_trip():
    payload = {"sm1": (1, 1032), "sm2": (7, 12), "учёт": (2, 3)}
    assert decode_payload(encode_payload(payload)) == payload
    assert decode_payload(encode_payload({})) == {}


# -- index behaviour -----------------------------------------------------------

def bag(*pairs) -> BagOfPaths:
    return BagOfPaths(dict(pairs))


@pytest.fixture(params=["ephemeral", "disk"])
def index(request, tmp_path):
    if request.param == "ephemeral":
        idx = ModelIndex.ephemeral("uml", TokenizerConfig().to_dict(),
                                   FilterConfig().to_dict())
    else:
        idx = ModelIndex.create(str(tmp_path / "idx"), "uml",
                                TokenizerConfig().to_dict(), FilterConfig().to_dict())
    yield idx
    idx.close()


P1 = ap("@wait", "name", "State")
P2 = ap("@talk", "name", "State")
P3 = ap("Region")


def test_index_single_model(index):
    index.index_model("m1", bag((P1, 2), (P2, 1), (P3, 1)), {"source_uri": "m1.json"})
    stats = index.stats()
    assert stats.t == 1 and stats.avdl == 4.0 and stats.totals == {"m1": 4}
    postings = index.get_postings("(wait,name,State")
    assert postings == {")": {"m1": (2, 4)}}


def test_shared_path_has_two_entries(index):
    index.index_model("m1", bag((P1, 1)))
    index.index_model("m2", bag((P1, 3), (P2, 1)))
    postings = index.get_postings("(wait,name,State", [")"])
    assert postings[")"] == {"m1": (1, 1), "m2": (3, 4)}


def test_duplicate_id_rejected(index):
    index.index_model("m1", bag((P1, 1)))
    with pytest.raises(DuplicateModelError):
        index.index_model("m1", bag((P2, 1)))


def test_remove_model(index):
    index.index_model("m1", bag((P1, 1), (P3, 2)))
    index.index_model("m2", bag((P1, 2)))
    index.remove_model("m1")
    stats = index.stats()
    assert stats.t == 1 and stats.totals == {"m2": 2}
    assert index.get_postings("(wait,name,State")[")"] == {"m2": (2, 2)}
    assert index.get_postings("(Region") == {}
    with pytest.raises(UnknownModelError):
        index.remove_model("m1")


def test_remove_then_stats_match_empty(index):
    index.index_model("m1", bag((P1, 1)))
    index.remove_model("m1")
    stats = index.stats()
    assert (stats.t, stats.avdl, stats.totals) == (0, 0.0, {})


def test_document_frequencies(index):
    assert index.document_frequencies() == {}
    index.index_model("m1", bag((P1, 1), (P2, 1)))
    index.index_model("m2", bag((P1, 5)))
    index.index_model("m3", bag((P3, 1)))
    df = index.document_frequencies()
    assert df[split_path(P1)] == 2
    assert df[split_path(P2)] == 1
    assert df[split_path(P3)] == 1
    stats = index.stats()
    assert all(n <= stats.t for n in df.values())


def test_get_postings_partial(index):
    index.index_model("m1", bag((P1, 1),
                                (ap("@wait", "name", "State", "name", "@more"), 2)))
    row = "(wait,name,State"
    assert set(index.get_postings(row)) == {")", ",name,more)"}
    got = index.get_postings(row, [")", ",absent)"])
    assert set(got) == {")"}


def test_single_get_per_row(index):
    index.index_model("m1", bag((P1, 1), (P2, 1)))
    before = index.store.get_count
    index.get_postings("(wait,name,State", [")"])
    assert index.store.get_count == before + 1


def test_blob_and_meta(index):
    blob = b'{"modelType":"uml","objects":[]}'
    index.index_model("m1", bag((P1, 1)), {"source_uri": "a/b.json"}, blob)
    assert index.model_blob("m1") == blob
    assert index.model_meta("m1")["source_uri"] == "a/b.json"
    with pytest.raises(UnknownModelError):
        index.model_blob("nope")


def test_stop_path_purge_rewrites_totals(index):
    common = P1
    index.index_model("m1", bag((common, 2), (P2, 1)))
    index.index_model("m2", bag((common, 1), (P3, 1)))
    index.index_model("m3", bag((common, 3)))
    df = index.document_frequencies()
    sps = compute_stop_paths(df, 3, 0.7)
    assert sps.paths == frozenset({split_path(common)})
    purged = index.apply_stop_path_purge(sps.paths, 0.7, 3)
    assert purged == 1
    assert index.get_postings("(wait,name,State") == {}
    # totals now exclude the purged counts, inside payloads and stats alike
    assert index.get_postings("(talk,name,State")[")"] == {"m1": (1, 1)}
    assert index.get_postings("(Region")[")"] == {"m2": (1, 1)}
    stats = index.stats()
    assert stats.totals == {"m1": 1, "m2": 1, "m3": 0}
    assert stats.avdl == pytest.approx(2 / 3)
    assert stats.zero_total_models == 1
    keys, threshold, size = index.stored_stop_paths()
    assert keys == sps.paths and threshold == 0.7 and size == 3


def test_avdl_matches_recomputation(index):
    import random

    rng = random.Random(0)
    for i in range(12):
        paths = {ap(f"@v{rng.randrange(6)}", "e", "C"): rng.randint(1, 4)
                 for _ in range(rng.randint(1, 5))}
        index.index_model(f"m{i}", BagOfPaths(paths))
    stats = index.stats()
    assert stats.avdl == pytest.approx(sum(stats.totals.values()) / stats.t, rel=1e-9)


def test_disk_round_trip(tmp_path):
    directory = str(tmp_path / "idx")
    idx = ModelIndex.create(directory, "uml", TokenizerConfig().to_dict(),
                            FilterConfig().to_dict())
    idx.index_model("m1", bag((P1, 2)), {"source_uri": "x"}, b"bytes")
    df = idx.document_frequencies()
    sps = compute_stop_paths(df, 1, 0.7)
    idx.apply_stop_path_purge(sps.paths, 0.7, 1)
    idx.close()

    reopened = ModelIndex.open(directory)
    assert reopened.model_type == "uml"
    assert reopened.stats().t == 1
    assert reopened.model_blob("m1") == b"bytes"
    keys, _, _ = reopened.stored_stop_paths()
    assert keys == {split_path(P1)}
    with open(f"{directory}/meta.json") as f:
        meta = json.load(f)
    assert meta["model_type"] == "uml" and meta["format_version"] == 1
    import os

    assert os.path.exists(f"{directory}/stoppaths.bin")
    reopened.close()


def test_bulk_batches(index):
    with index.bulk(batch_models=2) as staging:
        for i in range(5):
            staging.add(f"m{i}", bag((P1, 1)), {}, None)
    assert index.stats().t == 5
    assert len(index.get_postings("(wait,name,State")[")"]) == 5


@given(st.dictionaries(st.text(min_size=1, max_size=12),
                       st.tuples(st.integers(1, 2**40), st.integers(1, 2**40)),
                       max_size=8))
def test_payload_fuzz_round_trip(payload):
    assert decode_payload(encode_payload(payload)) == payload
