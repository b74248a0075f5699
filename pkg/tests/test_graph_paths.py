import json
import random
from collections import Counter

import pytest

from pathmark.graph import FilterConfig, build_graph, extract_paths, model_to_bop
from pathmark.index import path_text
from pathmark.model import Model, ModelObject, parse_model_json
from pathmark.paths import ATTR, CLASS, BagOfPaths, Path

from support.enumeration import enumerate_bag


def texts(bop: BagOfPaths) -> Counter:
    out = Counter()
    for p, n in bop.items():
        out[path_text(p)] += n
    return out


def test_single_attribute_object_graph():
    m = parse_model_json(b'{"modelType":"uml","objects":'
                         b'[{"id":"s1","class":"State","attrs":{"name":["Talking"]}}]}')
    g = build_graph(m, FilterConfig())
    kinds = Counter(v.kind for v in g.vertices)
    assert kinds == {CLASS: 1, ATTR: 1}
    # attribute edges in both directions, same label
    assert len(g.edges) == 2
    assert {e.label for e in g.edges} == {"name"}
    assert {(g.vertices[e.source].kind, g.vertices[e.target].kind) for e in g.edges} \
        == {(CLASS, ATTR), (ATTR, CLASS)}


def test_empty_model_empty_graph():
    g = build_graph(Model("x", ()), FilterConfig())
    assert not g.vertices and not g.edges


def test_reference_edge_directed():
    doc = {"modelType": "uml", "objects": [
        {"id": "t", "class": "Transition", "refs": {"source": ["s"]}},
        {"id": "s", "class": "State"}]}
    g = build_graph(parse_model_json(json.dumps(doc).encode()), FilterConfig())
    assert len(g.edges) == 1
    e = g.edges[0]
    assert (g.vertices[e.source].label, e.label, g.vertices[e.target].label) == \
        ("Transition", "source", "State")


def test_attribute_less_object_singleton_only():
    m = parse_model_json(b'{"modelType":"x","objects":[{"id":"r","class":"Region"}]}')
    assert texts(model_to_bop(m)) == {"(Region)": 1}


def test_exclusions():
    doc = {"modelType": "x", "objects": [
        {"id": "a", "class": "Keep", "attrs": {"name": ["x"], "noise": ["y"]},
         "refs": {"ref": ["b"], "skip": ["b"]}},
        {"id": "b", "class": "Drop"}]}
    cfg = FilterConfig(excluded_classes=frozenset({"Drop"}),
                       excluded_attributes=frozenset({"noise"}),
                       excluded_references=frozenset({"skip", "ref"}))
    g = build_graph(parse_model_json(json.dumps(doc).encode()), cfg)
    assert [v.label for v in g.vertices] == ["Keep", "x"]
    assert len(g.edges) == 2  # just the attribute pair


def running_example_query(phone_query_model):
    return model_to_bop(phone_query_model, FilterConfig())


def test_running_example_paths(phone_query_model):
    got = texts(model_to_bop(phone_query_model))
    # singleton: Region is the only attribute-free object
    singletons = [t for t in got if "," not in t]
    assert singletons == ["(Region)"]
    # length-1 attribute/class pairs named in the path criteria
    assert got["(initial,kind,PseudoState)"] == 1
    assert got["(Phone call,name,StateMachine)"] == 1
    # longer paths from the criteria examples
    assert got["(answer call,name,Transition,kind,external)"] == 1
    assert got["(Phone call,name,StateMachine,region,Region)"] == 1
    assert got["(answer call,name,Transition,target,State,name,Talking)"] == 1


def test_interior_vertices_are_class_vertices(phone_repo_model):
    bop = model_to_bop(phone_repo_model)
    for p in bop.paths():
        for kind, _ in p.vertices[1:-1]:
            assert kind == CLASS
        assert p.length <= 4


def random_model(rng: random.Random, max_objects: int = 3) -> Model:
    n = rng.randint(1, max_objects)
    objects = []
    classes = ["A", "B", "C"]
    attr_values = ["x", "y"]
    for i in range(n):
        attrs = {}
        if rng.random() < 0.6:
            attrs["a"] = tuple(rng.choices(attr_values, k=rng.randint(1, 2)))
        refs = {}
        if i and rng.random() < 0.8:
            refs["r"] = tuple(f"o{rng.randrange(i)}"
                              for _ in range(rng.randint(1, 2)))
        objects.append(ModelObject(f"o{i}", rng.choice(classes), attrs, refs))
    return Model("t", tuple(objects))


@pytest.mark.parametrize("seed", range(60))
def test_extraction_equals_enumeration(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    cfg = FilterConfig(max_path_length=rng.randint(1, 4))
    g = build_graph(m, cfg)
    assert len(g.vertices) <= 8
    got = Counter(dict(extract_paths(g, cfg).items()))
    assert got == enumerate_bag(g, cfg.max_path_length)


def test_monotone_in_max_path_length():
    rng = random.Random(1234)
    for _ in range(20):
        m = random_model(rng, max_objects=4)
        previous = None
        for limit in (1, 2, 3, 4):
            bag = Counter(dict(model_to_bop(m, FilterConfig(max_path_length=limit)).items()))
            if previous is not None:
                assert all(bag[p] >= n for p, n in previous.items())
            previous = bag


def test_duplicate_attribute_values_accumulate():
    doc = {"modelType": "x", "objects": [
        {"id": "o", "class": "C", "attrs": {"a": ["v", "v"]}}]}
    got = texts(model_to_bop(parse_model_json(json.dumps(doc).encode())))
    assert got["(v,a,C)"] == 2
    # the two identical values are distinct vertices: a length-2 path each way
    assert got["(v,a,C,a,v)"] == 2


def test_determinism_under_object_order():
    doc_a = {"modelType": "x", "objects": [
        {"id": "a", "class": "A", "attrs": {"n": ["one"]}, "refs": {"r": ["b"]}},
        {"id": "b", "class": "B", "attrs": {"n": ["two"]}}]}
    doc_b = {"modelType": "x", "objects": list(reversed(doc_a["objects"]))}
    bop_a = model_to_bop(parse_model_json(json.dumps(doc_a).encode()))
    bop_b = model_to_bop(parse_model_json(json.dumps(doc_b).encode()))
    assert texts(bop_a) == texts(bop_b)


def test_structural_path_between_attribute_free_classes():
    doc = {"modelType": "x", "objects": [
        {"id": "r", "class": "Region", "refs": {"transition": ["t"]}},
        {"id": "t", "class": "Transition"}]}
    got = texts(model_to_bop(parse_model_json(json.dumps(doc).encode())))
    assert got["(Region,transition,Transition)"] == 1
    assert got["(Region)"] == 1 and got["(Transition)"] == 1


def test_empty_model_empty_bag():
    bop = model_to_bop(Model("x", ()))
    assert len(bop) == 0 and bop.total == 0
