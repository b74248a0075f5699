"""Model-to-multigraph transformation and bag-of-paths extraction.

The graph has one class vertex per object (labeled with the class name) and
one attribute vertex per (object, attribute, value) occurrence (labeled with
the value). Attribute edges are materialized in both directions so paths can
start and end on attribute values; reference edges keep their declared
direction.

Extraction collects, bounded by ``max_path_length``:

* a singleton path for every class vertex with no attribute neighbor;
* every length-1 path from an attribute vertex to its owning class vertex;
* every longer simple path whose two endpoints are each either an attribute
  vertex or a class vertex with no attribute neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Model
from .paths import ATTR, CLASS, BagOfPaths, Path

__all__ = ["Vertex", "Edge", "ModelGraph", "FilterConfig", "build_graph",
           "extract_paths", "model_to_bop"]

REFERENCE = "reference"
ATTRIBUTE = "attribute"


@dataclass(frozen=True)
class Vertex:
    kind: str  # paths.ATTR or paths.CLASS
    label: str
    origin: str = ""  # owning object id; attribute vertices append the attribute name


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    label: str
    kind: str  # REFERENCE or ATTRIBUTE


@dataclass
class ModelGraph:
    vertices: list[Vertex] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    adjacency: list[list[int]] = field(default_factory=list)  # vertex -> outgoing edge indexes

    def add_vertex(self, v: Vertex) -> int:
        self.vertices.append(v)
        self.adjacency.append([])
        return len(self.vertices) - 1

    def add_edge(self, source: int, target: int, label: str, kind: str) -> int:
        e = Edge(source, target, label, kind)
        self.edges.append(e)
        self.adjacency[source].append(len(self.edges) - 1)
        return len(self.edges) - 1

    def out_edges(self, vertex: int) -> list[Edge]:
        return [self.edges[i] for i in self.adjacency[vertex]]


@dataclass(frozen=True)
class FilterConfig:
    excluded_classes: frozenset[str] = frozenset()
    excluded_attributes: frozenset[str] = frozenset()
    excluded_references: frozenset[str] = frozenset()
    max_path_length: int = 4

    def __post_init__(self):
        if self.max_path_length < 1:
            raise ValueError("max_path_length must be >= 1")

    def to_dict(self) -> dict:
        return {
            "excluded_classes": sorted(self.excluded_classes),
            "excluded_attributes": sorted(self.excluded_attributes),
            "excluded_references": sorted(self.excluded_references),
            "max_path_length": self.max_path_length,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterConfig":
        return cls(
            excluded_classes=frozenset(d.get("excluded_classes", ())),
            excluded_attributes=frozenset(d.get("excluded_attributes", ())),
            excluded_references=frozenset(d.get("excluded_references", ())),
            max_path_length=int(d.get("max_path_length", 4)),
        )


def build_graph(m: Model, cfg: FilterConfig = FilterConfig()) -> ModelGraph:
    """Build the labeled directed multigraph for ``m``, honoring exclusions."""
    g = ModelGraph()
    class_vertex: dict[str, int] = {}
    for o in m.objects:
        if o.class_name in cfg.excluded_classes:
            continue
        class_vertex[o.id] = g.add_vertex(Vertex(CLASS, o.class_name, origin=o.id))
    for o in m.objects:
        if o.id not in class_vertex:
            continue
        cv = class_vertex[o.id]
        for name, values in o.attributes.items():
            if name in cfg.excluded_attributes:
                continue
            for value in values:
                av = g.add_vertex(Vertex(ATTR, value, origin=f"{o.id}#{name}"))
                g.add_edge(cv, av, name, ATTRIBUTE)
                g.add_edge(av, cv, name, ATTRIBUTE)
        for name, targets in o.references.items():
            if name in cfg.excluded_references:
                continue
            for t in targets:
                if t in class_vertex:
                    g.add_edge(cv, class_vertex[t], name, REFERENCE)
    return g


def _attribute_free(g: ModelGraph) -> list[bool]:
    """Per class vertex: has it no attribute neighbor one hop away?"""
    free = [True] * len(g.vertices)
    for e in g.edges:
        if e.kind == ATTRIBUTE and g.vertices[e.target].kind == ATTR:
            free[e.source] = False
    return free


def extract_paths(g: ModelGraph, cfg: FilterConfig = FilterConfig()) -> BagOfPaths:
    """Extract the bag of paths of ``g`` under the endpoint criteria."""
    bare = _attribute_free(g)
    limit = cfg.max_path_length
    out: list[Path] = []

    def is_endpoint(v: int) -> bool:
        return g.vertices[v].kind == ATTR or bare[v]

    def vlabel(v: int) -> tuple[str, str]:
        vert = g.vertices[v]
        return (vert.kind, vert.label)

    def dfs(start: int):
        # Iterative DFS over simple paths of length <= limit from one endpoint.
        stack = [(start, iter(g.adjacency[start]))]
        on_path = {start}
        vertices = [start]
        edge_labels: list[str] = []
        while stack:
            v, it = stack[-1]
            advanced = False
            for ei in it:
                e = g.edges[ei]
                w = e.target
                if w in on_path:
                    continue
                vertices.append(w)
                edge_labels.append(e.label)
                length = len(edge_labels)
                emit = False
                if length == 1:
                    if g.vertices[start].kind == ATTR:
                        emit = True  # attribute value -> owning class
                    elif bare[start] and bare[w] and g.vertices[w].kind == CLASS:
                        emit = True  # structural path between attribute-less objects
                elif is_endpoint(w):
                    emit = True
                if emit:
                    out.append(Path(tuple(vlabel(x) for x in vertices), tuple(edge_labels)))
                if length < limit:
                    stack.append((w, iter(g.adjacency[w])))
                    on_path.add(w)
                    advanced = True
                    break
                vertices.pop()
                edge_labels.pop()
            if not advanced:
                stack.pop()
                on_path.discard(v)
                if edge_labels:
                    vertices.pop()
                    edge_labels.pop()

    for v in range(len(g.vertices)):
        vert = g.vertices[v]
        if vert.kind == CLASS and bare[v]:
            out.append(Path((vlabel(v),), ()))
        if vert.kind == ATTR or (vert.kind == CLASS and bare[v]):
            dfs(v)
    return BagOfPaths.from_paths(out)


def model_to_bop(m: Model, cfg: FilterConfig = FilterConfig()) -> BagOfPaths:
    """Convenience composition: build the graph, then extract its paths."""
    return extract_paths(build_graph(m, cfg), cfg)
