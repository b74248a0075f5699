"""Query derivation by mutation of meta-model-shaped models.

A mutant simulates a user's approximate query: a connected subset of the
original within a radius of a root class, with packages renamed, a share of
inheritance links, classes, references, enumerations and attributes removed,
"rare"-named elements dropped, and a share of names replaced from the
vocabulary of same-cluster models. All sampling is driven by the config's
seed, so a (model, config) pair deterministically yields the same mutant.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from ..errors import ModelTooSmallError, MutantDiscardedError
from ..model import Model, ModelObject
from .cluster import cluster_names

__all__ = ["MutationConfig", "QueryMutant", "mutate", "derive_query_set",
           "name_document_frequencies"]

CLASS_KIND = "EClass"
PACKAGE_KIND = "EPackage"
ATTRIBUTE_KIND = "EAttribute"
REFERENCE_KIND = "EReference"
ENUM_KIND = "EEnum"
LITERAL_KIND = "EEnumLiteral"

_RATE_CAPS = {
    "inheritance_removal": 0.20,
    "class_removal": 0.30,
    "reference_removal": 0.30,
    "enum_removal": 0.50,
    "attribute_removal": 0.30,
    "rename_rate": 0.30,
}


@dataclass(frozen=True)
class MutationConfig:
    radius: int | None = 5  # None = unbounded
    inheritance_removal: float = 0.20
    class_removal: float = 0.30
    reference_removal: float = 0.30
    enum_removal: float = 0.50
    attribute_removal: float = 0.30
    rename_rate: float = 0.30
    low_df_ceiling: int = 2
    rare_names: frozenset[str] = frozenset()
    rename_vocabulary: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.radius is not None and self.radius < 1:
            raise ValueError("radius must be >= 1")
        for name, cap in _RATE_CAPS.items():
            rate = getattr(self, name)
            if not (0.0 <= rate <= cap):
                raise ValueError(f"{name} must be within [0, {cap}]")


@dataclass(frozen=True)
class QueryMutant:
    model: Model
    origin: str
    operator_log: tuple[dict, ...]
    radius: int | None


def _name_of(o: ModelObject) -> str:
    values = o.attributes.get("name", ())
    return values[0] if values else ""


class _Workspace:
    """Mutable view of a meta-model-shaped model during mutation."""

    def __init__(self, m: Model):
        self.model = m
        self.objects = {o.id: o for o in m.objects}
        self.order = [o.id for o in m.objects]
        self.alive = set(self.order)
        self.names = {oid: _name_of(self.objects[oid]) for oid in self.order}
        self.owner: dict[str, str] = {}  # feature/literal -> owning class/enum
        for o in m.objects:
            for fid in o.references.get("eStructuralFeatures", ()):
                self.owner[fid] = o.id
            for lid in o.references.get("eLiterals", ()):
                self.owner[lid] = o.id
        self.super_links: set[tuple[str, str]] = set()
        for o in m.objects:
            if o.class_name == CLASS_KIND:
                for sup in o.references.get("eSuperTypes", ()):
                    self.super_links.add((o.id, sup))

    def of_kind(self, kind: str) -> list[str]:
        return [oid for oid in self.order
                if oid in self.alive and self.objects[oid].class_name == kind]

    def features_of(self, cid: str) -> list[str]:
        return [fid for fid in self.objects[cid].references.get("eStructuralFeatures", ())
                if fid in self.alive]

    def ref_target(self, rid: str) -> str | None:
        targets = self.objects[rid].references.get("eType", ())
        return targets[0] if targets else None

    def remove_feature(self, fid: str):
        self.alive.discard(fid)

    def remove_class(self, cid: str):
        self.alive.discard(cid)
        for fid, owner in self.owner.items():
            if owner == cid:
                self.alive.discard(fid)
        for rid in list(self.alive):
            o = self.objects[rid]
            if o.class_name == REFERENCE_KIND and self.ref_target(rid) == cid:
                self.alive.discard(rid)
        self.super_links = {(c, s) for c, s in self.super_links
                            if c != cid and s != cid}

    def remove_enum_item(self, oid: str):
        self.alive.discard(oid)
        if self.objects[oid].class_name == ENUM_KIND:
            for lid, owner in self.owner.items():
                if owner == oid:
                    self.alive.discard(lid)

    def class_adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {cid: set() for cid in self.of_kind(CLASS_KIND)}
        for cid in list(adj):
            for fid in self.features_of(cid):
                if self.objects[fid].class_name != REFERENCE_KIND:
                    continue
                target = self.ref_target(fid)
                if target in adj:
                    adj[cid].add(target)
                    adj[target].add(cid)
        for c, s in self.super_links:
            if c in adj and s in adj:
                adj[c].add(s)
                adj[s].add(c)
        return adj

    def rebuild(self) -> Model:
        objects = []
        for oid in self.order:
            if oid not in self.alive:
                continue
            o = self.objects[oid]
            attrs = dict(o.attributes)
            if self.names[oid] != _name_of(o) and "name" in attrs:
                attrs["name"] = (self.names[oid],)
            refs: dict[str, tuple[str, ...]] = {}
            for rname, targets in o.references.items():
                if rname == "eSuperTypes":
                    kept = tuple(t for t in targets if (oid, t) in self.super_links)
                else:
                    kept = tuple(t for t in targets if t in self.alive)
                if kept:
                    refs[rname] = kept
            objects.append(ModelObject(oid, o.class_name, attrs, refs))
        return Model(self.model.model_type, tuple(objects), self.model.source_uri)


def _pick_root(ws: _Workspace) -> str:
    """Class with maximal reference out-degree plus subtype count; ties by name."""
    scores = []
    subtype_count: dict[str, int] = {}
    for _, sup in ws.super_links:
        subtype_count[sup] = subtype_count.get(sup, 0) + 1
    for cid in ws.of_kind(CLASS_KIND):
        out_degree = sum(1 for fid in ws.features_of(cid)
                         if ws.objects[fid].class_name == REFERENCE_KIND)
        scores.append((-(out_degree + subtype_count.get(cid, 0)),
                       ws.names[cid], cid))
    return min(scores)[2]


def _distances(ws: _Workspace, root: str) -> dict[str, int]:
    adj = ws.class_adjacency()
    dist = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for cid in frontier:
            for other in adj.get(cid, ()):
                if other not in dist:
                    dist[other] = dist[cid] + 1
                    nxt.append(other)
        frontier = nxt
    return dist


def mutate(m: Model, cfg: MutationConfig, origin_id: str = "") -> QueryMutant:
    """Apply the eight operators in order; deterministic under cfg.seed.

    Raises ModelTooSmallError when the input fails the minimum-size
    precondition and MutantDiscardedError when the result has fewer than 3
    classes or fewer references than half its class count.
    """
    ws = _Workspace(m)
    n_classes = len(ws.of_kind(CLASS_KIND))
    n_features = len(ws.of_kind(ATTRIBUTE_KIND)) + len(ws.of_kind(REFERENCE_KIND))
    if n_classes < 20 or n_classes + n_features < 40:
        raise ModelTooSmallError(
            f"model has {n_classes} classes and {n_classes + n_features} elements; "
            "need >= 20 classes and >= 40 class+feature elements"
        )
    rng = random.Random(cfg.seed)
    log: list[dict] = []

    # 1. Connected subset within the radius; rename every package.
    root = _pick_root(ws)
    dist = _distances(ws, root)
    dropped = 0
    for cid in ws.of_kind(CLASS_KIND):
        d = dist.get(cid)
        if d is None or (cfg.radius is not None and d > cfg.radius):
            ws.remove_class(cid)
            dropped += 1
    for pid in ws.of_kind(PACKAGE_KIND):
        ws.names[pid] = f"pkg{rng.randrange(1 << 30):08x}"
    log.append({"op": "extract_connected_subset", "root": root,
                "radius": cfg.radius, "classes_dropped": dropped,
                "packages_renamed": len(ws.of_kind(PACKAGE_KIND))})

    # 2. Remove inheritance links.
    links = sorted(ws.super_links)
    k = int(cfg.inheritance_removal * len(links))
    for link in rng.sample(links, k):
        ws.super_links.discard(link)
    log.append({"op": "remove_inheritance", "removed": k})

    # 3. Remove classes, farthest from the root first.
    classes = ws.of_kind(CLASS_KIND)
    candidates = [cid for cid in classes if cid != root]
    rng.shuffle(candidates)
    candidates.sort(key=lambda cid: -dist.get(cid, 0))
    k = int(cfg.class_removal * len(classes))
    for cid in candidates[:k]:
        ws.remove_class(cid)
    log.append({"op": "remove_leaf_classes", "removed": min(k, len(candidates))})

    # 4. Remove references.
    refs = ws.of_kind(REFERENCE_KIND)
    k = int(cfg.reference_removal * len(refs))
    for rid in rng.sample(sorted(refs), k):
        ws.remove_feature(rid)
    log.append({"op": "remove_references", "removed": k})

    # 5. Remove enumerations or literals.
    pool = sorted(ws.of_kind(ENUM_KIND) + ws.of_kind(LITERAL_KIND))
    k = int(cfg.enum_removal * len(pool))
    removed = 0
    for oid in rng.sample(pool, k):
        if oid in ws.alive:
            ws.remove_enum_item(oid)
            removed += 1
    log.append({"op": "remove_enumerations", "removed": removed})

    # 6. Remove attributes.
    attrs = ws.of_kind(ATTRIBUTE_KIND)
    k = int(cfg.attribute_removal * len(attrs))
    for aid in rng.sample(sorted(attrs), k):
        ws.remove_feature(aid)
    log.append({"op": "remove_attributes", "removed": k})

    # 7. Remove elements whose name is rare in the corpus.
    removed = 0
    if cfg.rare_names:
        for oid in list(ws.alive):
            kind = ws.objects[oid].class_name
            if kind == PACKAGE_KIND or oid not in ws.alive:
                continue
            if ws.names[oid] in cfg.rare_names:
                if kind == CLASS_KIND:
                    ws.remove_class(oid)
                elif kind == ENUM_KIND:
                    ws.remove_enum_item(oid)
                else:
                    ws.alive.discard(oid)
                removed += 1
    log.append({"op": "remove_low_df_elements", "removed": removed})

    # 8. Rename from the same-cluster vocabulary (classes, attributes, refs).
    eligible = sorted(ws.of_kind(CLASS_KIND) + ws.of_kind(ATTRIBUTE_KIND)
                      + ws.of_kind(REFERENCE_KIND))
    renamed = 0
    if cfg.rename_vocabulary:
        k = int(cfg.rename_rate * len(eligible))
        for oid in rng.sample(eligible, k):
            ws.names[oid] = rng.choice(cfg.rename_vocabulary)
            renamed += 1
    log.append({"op": "rename_from_cluster", "renamed": renamed})

    mutant = ws.rebuild()
    final_classes = sum(1 for o in mutant.objects if o.class_name == CLASS_KIND)
    final_refs = sum(1 for o in mutant.objects if o.class_name == REFERENCE_KIND)
    if final_classes < 3 or final_refs < math.ceil(final_classes / 2):
        raise MutantDiscardedError(
            f"mutant has {final_classes} classes and {final_refs} references"
        )
    return QueryMutant(mutant, origin_id or m.source_uri, tuple(log), cfg.radius)


def name_document_frequencies(corpus: list[tuple[str, Model]]) -> dict[str, int]:
    """Per element name, the number of models containing it."""
    df: dict[str, int] = {}
    for _, model in corpus:
        for name in {_name_of(o) for o in model.objects if _name_of(o)}:
            df[name] = df.get(name, 0) + 1
    return df


def derive_query_set(corpus: list[tuple[str, Model]], radii=(5, 6, 7), seed: int = 0,
                     low_df_ceiling: int = 2, k_clusters: int | None = None,
                     limit: int | None = None,
                     base: MutationConfig | None = None) -> list[QueryMutant]:
    """Mutants for every (eligible model, radius) pair, corpus-wide inputs included.

    Rare names are those at or below the document-frequency ceiling; the
    rename vocabulary of a model comes from other models in its name cluster.
    """
    base = base or MutationConfig()
    df = name_document_frequencies(corpus)
    rare = frozenset(name for name, n in df.items() if n <= low_df_ceiling)
    k = k_clusters or max(5, math.ceil(len(corpus) / 20))
    k = min(k, len(corpus))
    clusters = cluster_names(corpus, k, seed) if len(corpus) > 1 else {}
    names_by_model = {
        mid: sorted({_name_of(o) for o in model.objects if _name_of(o)})
        for mid, model in corpus
    }
    mutants: list[QueryMutant] = []
    for i, (mid, model) in enumerate(corpus):
        cluster = clusters.get(mid)
        vocab = tuple(
            name
            for other, names in names_by_model.items()
            if other != mid and clusters.get(other) == cluster
            for name in names
        )
        for radius in radii:
            cfg = replace(base, radius=radius, rare_names=rare,
                          rename_vocabulary=vocab, low_df_ceiling=low_df_ceiling,
                          seed=seed * 7_919 + i * 13 + radius)
            try:
                mutants.append(mutate(model, cfg, origin_id=mid))
            except (ModelTooSmallError, MutantDiscardedError):
                continue
            if limit is not None and len(mutants) >= limit:
                return mutants
    return mutants
