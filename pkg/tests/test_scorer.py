import math
import random

import pytest

from pathmark.graph import FilterConfig
from pathmark.index import ModelIndex
from pathmark.normalize import TokenizerConfig
from pathmark.paths import ATTR, CLASS, BagOfPaths, Path
from pathmark.scorer import (QueryTimings, ScoringParams, bm25_term,
                             brute_force_score, score_query)


def ap(value, cls="State", edge="name") -> Path:
    return Path(((ATTR, value), (CLASS, cls)), (edge,))


def test_bm25_unit_vector():
    # Length factor cancels when the model length equals avdl; the rest is ln 2.
    got = bm25_term(c_q=1, c_m=1, bop_len_m=10, avdl=10.0, t=1, df=1,
                    params=ScoringParams(b=0.75, z=0.1))
    assert got == pytest.approx(math.log(2), abs=1e-12)


def test_bm25_df_equals_t_still_positive():
    got = bm25_term(1, 1, 5, 5.0, t=40, df=40)
    assert got > 0.0
    assert got == pytest.approx(1.0 * math.log(41 / 40), rel=1e-12)


def test_bm25_saturation_limit():
    params = ScoringParams(z=0.1)
    limit = 3 * (params.z + 1) * math.log(11 / 2)
    values = [bm25_term(3, c_m, 10, 10.0, 10, 2, params) for c_m in (1, 10, 1000, 10**6)]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(limit, rel=1e-4)
    assert values[-1] < limit


def test_bm25_contract_errors():
    with pytest.raises(ValueError):
        bm25_term(0, 1, 1, 1.0, 1, 1)
    with pytest.raises(ValueError):
        bm25_term(1, 1, 1, 1.0, 1, 0)
    with pytest.raises(ValueError):
        bm25_term(1, 1, 1, 1.0, 2, 3)  # df > t
    with pytest.raises(ValueError):
        bm25_term(1, 1, 1, 0.0, 1, 1)


def build_index(corpus):
    idx = ModelIndex.ephemeral("t", TokenizerConfig().to_dict(),
                               FilterConfig().to_dict())
    for model_id, bop in corpus:
        idx.index_model(model_id, bop)
    return idx


def random_bop(rng, vocabulary, max_paths=12) -> BagOfPaths:
    counts = {}
    for _ in range(rng.randint(0, max_paths)):
        value = rng.choice(vocabulary)
        if rng.random() < 0.3:
            p = Path(((ATTR, value), (CLASS, "C"), (ATTR, rng.choice(vocabulary))),
                     ("e", "e"))
        else:
            p = ap(value)
        counts[p] = counts.get(p, 0) + rng.randint(1, 3)
    return BagOfPaths(counts)


@pytest.mark.parametrize("seed", range(25))
def test_oracle_equivalence(seed):
    rng = random.Random(seed)
    vocabulary = [f"w{i}" for i in range(rng.randint(3, 12))]
    corpus = [(f"m{i:03d}", random_bop(rng, vocabulary))
              for i in range(rng.randint(1, 40))]
    corpus = [(mid, bop) for mid, bop in corpus]
    idx = build_index(corpus)
    query = random_bop(rng, vocabulary)
    got = score_query(idx, query, max_results=None)
    want = brute_force_score(query, corpus, max_results=None)
    assert [r.model_id for r in got] == [r.model_id for r in want]
    for g, w in zip(got, want):
        assert g.score == pytest.approx(w.score, rel=1e-9)
    idx.close()


def test_zero_match_query_empty(phone_query_model=None):
    corpus = [("m1", BagOfPaths({ap("red"): 1}))]
    idx = build_index(corpus)
    assert score_query(idx, BagOfPaths({ap("blue"): 1})) == []
    assert score_query(idx, BagOfPaths()) == []
    assert brute_force_score(BagOfPaths({ap("blue"): 1}), corpus) == []
    assert brute_force_score(BagOfPaths(), []) == []
    idx.close()


def test_identical_bop_single_model():
    bop = BagOfPaths({ap("only"): 2})
    results = brute_force_score(bop, [("m1", bop)])
    assert [r.model_id for r in results] == ["m1"]


def test_sorted_desc_and_tie_break():
    shared = ap("shared")
    corpus = [("b", BagOfPaths({shared: 1})), ("a", BagOfPaths({shared: 1})),
              ("c", BagOfPaths({shared: 1, ap("extra"): 1}))]
    idx = build_index(corpus)
    got = score_query(idx, BagOfPaths({shared: 1, ap("extra"): 1}), max_results=None)
    assert got[0].model_id == "c"
    assert [r.model_id for r in got[1:]] == ["a", "b"]  # equal scores, id ascending
    scores = [r.score for r in got]
    assert scores == sorted(scores, reverse=True)
    assert all(s > 0 for s in scores)
    idx.close()


def test_max_results_truncation():
    corpus = [(f"m{i}", BagOfPaths({ap("shared"): 1})) for i in range(10)]
    idx = build_index(corpus)
    got = score_query(idx, BagOfPaths({ap("shared"): 1}), max_results=3)
    assert len(got) == 3
    idx.close()


def test_one_get_per_distinct_prefix():
    counts = {
        ap("wait"): 1,
        Path(((ATTR, "wait"), (CLASS, "State"), (ATTR, "x")), ("name", "name")): 1,
        ap("talk"): 2,
        Path(((CLASS, "Region"), (CLASS, "State")), ("subvertex",)): 1,
    }
    query = BagOfPaths(counts)
    # distinct prefixes: (wait,name,State x2 -> 1 row), (talk,name,State), (Region
    corpus = [("m1", query)]
    idx = build_index(corpus)
    idx.corpus_sums()  # warm the stats cache; only posting reads remain
    before = idx.store.get_count
    score_query(idx, query, max_results=None)
    assert idx.store.get_count - before == 3
    idx.close()


def test_explanations_sum_to_score():
    corpus = [("m1", BagOfPaths({ap("wait"): 2, ap("talk"): 1})),
              ("m2", BagOfPaths({ap("wait"): 1}))]
    idx = build_index(corpus)
    got = score_query(idx, BagOfPaths({ap("wait"): 1, ap("talk"): 3}),
                      max_results=None, explain=True)
    for r in got:
        assert r.matched_paths
        assert sum(c for _, c in r.matched_paths) == pytest.approx(r.score, rel=1e-9)
    texts = {t for t, _ in got[0].matched_paths}
    assert texts == {"(wait,name,State)", "(talk,name,State)"}
    idx.close()


def test_self_retrieval_on_distinct_vocabulary():
    rng = random.Random(99)
    corpus = []
    for i in range(30):
        vocab = [f"m{i}w{j}" for j in range(6)] + ["common"]
        bop = random_bop(rng, vocab, max_paths=8)
        if bop.total == 0:
            bop = BagOfPaths({ap(vocab[0]): 1})
        corpus.append((f"m{i:02d}", bop))
    idx = build_index(corpus)
    for mid, bop in corpus:
        got = score_query(idx, bop, max_results=1)
        assert got and got[0].model_id == mid
    idx.close()


def test_monotone_in_matching_count():
    # Adding an occurrence of a matching path never lowers the score (df, avdl held).
    query = BagOfPaths({ap("w"): 2})
    lo = bm25_term(2, 1, 10, 10.0, 5, 2)
    hi = bm25_term(2, 2, 10, 10.0, 5, 2)
    assert hi >= lo


def test_timings_populated():
    corpus = [("m1", BagOfPaths({ap("w"): 1}))]
    idx = build_index(corpus)
    timings = QueryTimings()
    score_query(idx, BagOfPaths({ap("w"): 1}), timings=timings)
    assert timings.get >= 0 and timings.score >= 0
    assert timings.total == pytest.approx(timings.paths + timings.get + timings.score)
    idx.close()


def test_oracle_equivalence_after_removals():
    rng = random.Random(404)
    vocabulary = [f"w{i}" for i in range(8)]
    corpus = [(f"m{i:02d}", random_bop(rng, vocabulary)) for i in range(25)]
    idx = build_index(corpus)
    removed = {"m03", "m11", "m19"}
    for mid in sorted(removed):
        idx.remove_model(mid)
    survivors = [(mid, bop) for mid, bop in corpus if mid not in removed]
    for _ in range(5):
        query = random_bop(rng, vocabulary)
        got = score_query(idx, query, max_results=None)
        want = brute_force_score(query, survivors, max_results=None)
        assert [r.model_id for r in got] == [r.model_id for r in want]
        for g, w in zip(got, want):
            assert g.score == pytest.approx(w.score, rel=1e-9)
    idx.close()
