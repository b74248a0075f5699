"""Path and bag-of-paths value types.

A path alternates vertex labels and edge labels, starting and ending on a
vertex. Vertex labels carry a kind: ``ATTR`` for attribute-value vertices,
``CLASS`` for object-class vertices. A bag of paths is a multiset of paths
with a cached total.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

ATTR = "a"
CLASS = "c"

__all__ = ["ATTR", "CLASS", "Path", "BagOfPaths"]


@dataclass(frozen=True)
class Path:
    """Immutable alternating sequence of (kind-tagged) vertex and edge labels."""

    vertices: tuple[tuple[str, str], ...]  # (kind, label), kind in {ATTR, CLASS}
    edges: tuple[str, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise ValueError("path must alternate vertex/edge/vertex")

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def starts_with_attribute(self) -> bool:
        return self.vertices[0][0] == ATTR

    def labels(self) -> list[str]:
        """Interleaved labels: v0, e0, v1, e1, ..., vn."""
        out = [self.vertices[0][1]]
        for edge, (_, vlabel) in zip(self.edges, self.vertices[1:]):
            out.append(edge)
            out.append(vlabel)
        return out

    def segments(self) -> list[dict]:
        """Render-friendly description of the path (used by explanations)."""
        out: list[dict] = [{"kind": "attribute" if self.vertices[0][0] == ATTR else "class",
                            "label": self.vertices[0][1]}]
        for edge, (kind, vlabel) in zip(self.edges, self.vertices[1:]):
            out.append({"kind": "edge", "label": edge})
            out.append({"kind": "attribute" if kind == ATTR else "class", "label": vlabel})
        return out

    def __repr__(self) -> str:
        return "Path(" + ",".join(self.labels()) + ")"


def _as_counter(counts) -> Counter:
    c = Counter()
    for path, n in dict(counts).items():
        if n < 0:
            raise ValueError("path counts must be non-negative")
        if n:
            c[path] = n
    return c


class BagOfPaths:
    """Multiset of paths; ``total`` is the sum of all counts."""

    __slots__ = ("_counts", "_total")

    def __init__(self, counts: Mapping[Path, int] | None = None):
        self._counts = _as_counter(counts or {})
        self._total = sum(self._counts.values())

    @classmethod
    def from_paths(cls, paths: Iterable[Path]) -> "BagOfPaths":
        bag = cls()
        bag._counts = Counter(paths)
        bag._total = sum(bag._counts.values())
        return bag

    @property
    def total(self) -> int:
        return self._total

    def count(self, path: Path) -> int:
        return self._counts.get(path, 0)

    def items(self) -> Iterator[tuple[Path, int]]:
        return iter(self._counts.items())

    def paths(self) -> Iterator[Path]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, path: Path) -> bool:
        return path in self._counts

    def __eq__(self, other) -> bool:
        return isinstance(other, BagOfPaths) and self._counts == other._counts

    def __repr__(self) -> str:
        return f"BagOfPaths(distinct={len(self._counts)}, total={self._total})"
