"""In-memory model representation and parsers for the two input formats.

A model is a typed object graph: a flat, ordered collection of objects, each
with a class name, multi-valued string attributes and multi-valued references
to other objects in the same model.

The canonical interchange format is JSON::

    {"modelType": "uml",
     "objects": [
        {"id": "s1", "class": "State",
         "attrs": {"name": ["Talking"]},
         "refs":  {"outgoing": ["t1", "t2"]}}
     ]}

``attrs``/``refs`` are optional and default to empty. Attribute values that
arrive as JSON numbers or booleans are canonicalized to their decimal /
lowercase string rendering. Key order is irrelevant for equality; object and
value order is preserved and significant.

A minimal XMI subset is supported for compatibility:

* one root object element, or several under an ``xmi:XMI`` wrapper;
* ``xmi:id`` ids, with deterministic containment-path ids (``/0/@region.0``)
  synthesized for elements that lack one;
* child elements become containment references named by the child tag, the
  child class name coming from ``xsi:type`` (falling back to the tag);
* XML attributes whose whitespace-split tokens all resolve to element ids
  are references, everything else is a single string attribute value;
* cross-document ``href``s are rejected as unsupported, never dropped.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ModelParseError, ModelValidationError, UnsupportedFeatureError

__all__ = [
    "Model",
    "ModelObject",
    "ValidationReport",
    "parse_model_json",
    "parse_model_xmi",
    "serialize_model_json",
    "validate_model",
]


@dataclass(frozen=True)
class ModelObject:
    id: str
    class_name: str
    attributes: dict[str, tuple[str, ...]] = field(default_factory=dict)
    references: dict[str, tuple[str, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class Model:
    model_type: str
    objects: tuple[ModelObject, ...]
    source_uri: str = field(default="", compare=False)

    def object_ids(self) -> set[str]:
        return {o.id for o in self.objects}

    def get(self, object_id: str) -> ModelObject | None:
        for o in self.objects:
            if o.id == object_id:
                return o
        return None


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[tuple[str, str], ...] = ()
    warnings: tuple[tuple[str, str], ...] = ()

    @property
    def valid(self) -> bool:
        return not self.errors


def validate_model(m: Model) -> ValidationReport:
    """Collect every invariant violation in ``m``. Pure; violations are data."""
    errors: list[tuple[str, str]] = []
    if not m.model_type:
        errors.append(("", "model_type is empty"))
    seen: set[str] = set()
    for o in m.objects:
        if not o.id:
            errors.append((o.id, "object id is empty"))
        if o.id in seen:
            errors.append((o.id, f"duplicate object id {o.id!r}"))
        seen.add(o.id)
        if not o.class_name:
            errors.append((o.id, "class name is empty"))
        for name, values in o.attributes.items():
            if not name:
                errors.append((o.id, "attribute name is empty"))
            if len(values) == 0:
                errors.append((o.id, f"attribute {name!r} has an empty value list"))
        for name, targets in o.references.items():
            if not name:
                errors.append((o.id, "reference name is empty"))
            if len(targets) == 0:
                errors.append((o.id, f"reference {name!r} has an empty target list"))
    ids = {o.id for o in m.objects}
    for o in m.objects:
        for name, targets in o.references.items():
            for t in targets:
                if t not in ids:
                    errors.append(
                        (o.id, f"reference {name!r} of {o.id!r} targets missing object {t!r}")
                    )
    return ValidationReport(errors=tuple(errors))


def _require_valid(m: Model) -> Model:
    report = validate_model(m)
    if not report.valid:
        msgs = "; ".join(msg for _, msg in report.errors)
        raise ModelValidationError(f"invalid model: {msgs}", errors=report.errors)
    return m


def _canon_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return str(v)
    raise ModelParseError(f"attribute value {v!r} is not a string or primitive")


def parse_model_json(data: bytes | str) -> Model:
    """Parse the canonical JSON model format. Raises on malformed input."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelParseError(f"input is not UTF-8: {e}", offset=e.start) from e
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelParseError(f"malformed JSON at byte {e.pos}: {e.msg}", offset=e.pos) from e
    if not isinstance(doc, dict):
        raise ModelParseError("top-level JSON value must be an object")
    model_type = doc.get("modelType")
    if not isinstance(model_type, str):
        raise ModelParseError("missing or non-string 'modelType'")
    raw_objects = doc.get("objects", [])
    if not isinstance(raw_objects, list):
        raise ModelParseError("'objects' must be an array")
    objects = []
    for i, raw in enumerate(raw_objects):
        if not isinstance(raw, dict):
            raise ModelParseError(f"objects[{i}] is not an object")
        oid = raw.get("id")
        cls = raw.get("class")
        if not isinstance(oid, str):
            raise ModelParseError(f"objects[{i}] is missing a string 'id'")
        if not isinstance(cls, str):
            raise ModelParseError(f"objects[{i}] ({oid!r}) is missing a string 'class'")
        attrs: dict[str, tuple[str, ...]] = {}
        for name, values in (raw.get("attrs") or {}).items():
            if not isinstance(values, list):
                values = [values]
            attrs[name] = tuple(_canon_value(v) for v in values)
        refs: dict[str, tuple[str, ...]] = {}
        for name, targets in (raw.get("refs") or {}).items():
            if not isinstance(targets, list):
                targets = [targets]
            for t in targets:
                if not isinstance(t, str):
                    raise ModelParseError(
                        f"reference {name!r} of {oid!r} has a non-string target {t!r}"
                    )
            refs[name] = tuple(targets)
        objects.append(ModelObject(id=oid, class_name=cls, attributes=attrs, references=refs))
    return _require_valid(Model(model_type=model_type, objects=tuple(objects)))


def serialize_model_json(m: Model) -> bytes:
    """Inverse writer of :func:`parse_model_json` (round-trips every valid model)."""
    objects = []
    for o in m.objects:
        entry: dict = {"id": o.id, "class": o.class_name}
        if o.attributes:
            entry["attrs"] = {k: list(v) for k, v in o.attributes.items()}
        if o.references:
            entry["refs"] = {k: list(v) for k, v in o.references.items()}
        objects.append(entry)
    doc = {"modelType": m.model_type, "objects": objects}
    return json.dumps(doc, ensure_ascii=False, indent=1).encode("utf-8")


# -- XMI subset -------------------------------------------------------------

_XMI_ID_KEYS = ("id",)
_XSI_TYPE_KEYS = ("type",)
_NS_SPLIT = re.compile(r"^\{.*\}")
_UNBOUND_PREFIXES = {
    "xmi": "http://www.omg.org/XMI",
    "xsi": "http://www.w3.org/2001/XMLSchema-instance",
    "uml": "http://www.eclipse.org/uml2",
    "ecore": "http://www.eclipse.org/emf/2002/Ecore",
}


def _local(tag: str) -> str:
    return _NS_SPLIT.sub("", tag)


def _parse_xml(data: bytes) -> ET.Element:
    try:
        return ET.fromstring(data)
    except ET.ParseError as e:
        # Fixture-style fragments often use xmi:/xsi: without declaring the
        # namespace; bind the standard prefixes on the root and retry once.
        if "unbound prefix" in str(e):
            try:
                text = data.decode("utf-8")
            except UnicodeDecodeError:
                raise ModelParseError(f"malformed XML: {e}") from e
            decls = "".join(
                f' xmlns:{p}="{uri}"' for p, uri in _UNBOUND_PREFIXES.items()
                if f"{p}:" in text and f"xmlns:{p}" not in text
            )
            patched = re.sub(r"<([A-Za-z_][\w.:-]*)", r"<\1" + decls, text, count=1)
            try:
                return ET.fromstring(patched)
            except ET.ParseError as e2:
                raise ModelParseError(f"malformed XML: {e2}") from e2
        raise ModelParseError(f"malformed XML: {e}") from e


def _attr_of(elem: ET.Element, local_names: tuple[str, ...]) -> str | None:
    for key, value in elem.attrib.items():
        if _local(key) in local_names and key != _local(key):
            return value
    return None


def _class_of(elem: ET.Element) -> str:
    xsi = _attr_of(elem, _XSI_TYPE_KEYS)
    if xsi:
        return xsi.split(":")[-1]
    return _local(elem.tag)


def parse_model_xmi(data: bytes, model_type: str = "") -> Model:
    """Parse the supported XMI subset into a model.

    ``model_type`` defaults to the root element's namespace prefix when the
    document declares one, else the lowercased root class name.
    """
    root = _parse_xml(data)
    if _local(root.tag) == "XMI":
        roots = list(root)
    else:
        roots = [root]
    if not model_type:
        ns = re.match(r"^\{(.*)\}", roots[0].tag if roots else root.tag)
        if ns:
            model_type = ns.group(1).rstrip("/").rsplit("/", 1)[-1].lower() or "xmi"
        else:
            model_type = _class_of(roots[0]).lower() if roots else "xmi"

    # First pass: walk the containment tree, assign ids, collect elements.
    elements: list[tuple[ET.Element, str, str | None, str | None]] = []
    ids: dict[str, str] = {}  # declared or synthesized id -> canonical id

    def walk(elem: ET.Element, path_id: str, parent: str | None, containment: str | None):
        declared = _attr_of(elem, _XMI_ID_KEYS)
        canonical = declared if declared else path_id
        if canonical in ids:
            raise ModelValidationError(f"duplicate object id {canonical!r}")
        ids[canonical] = canonical
        ids.setdefault(path_id, canonical)
        elements.append((elem, canonical, parent, containment))
        counters: dict[str, int] = {}
        for child in elem:
            tag = _local(child.tag)
            n = counters.get(tag, 0)
            counters[tag] = n + 1
            walk(child, f"{path_id}/@{tag}.{n}", canonical, tag)

    for i, r in enumerate(roots):
        walk(r, f"/{i}", None, None)

    def resolve(token: str) -> str | None:
        if token.startswith("#"):
            token = token[1:]
        if "#" in token:
            return None  # cross-document fragment; only legal under an href, handled there
        if token.startswith("//@"):
            token = "/0/" + token[2:]  # EMF-style fragment on a single root
        return ids.get(token)

    by_id: dict[str, ModelObject] = {}
    order: list[str] = []
    for elem, oid, parent, containment in elements:
        attrs: dict[str, tuple[str, ...]] = {}
        refs: dict[str, list[str]] = {}
        for key, value in elem.attrib.items():
            local = _local(key)
            if key != local and local in _XMI_ID_KEYS + _XSI_TYPE_KEYS:
                continue
            if key.startswith("xmlns"):
                continue
            if local == "href":
                raise UnsupportedFeatureError(
                    f"href on <{_local(elem.tag)}> is outside the supported XMI subset"
                )
            tokens = value.split()
            resolved = [resolve(t) for t in tokens] if tokens else []
            if tokens and all(r is not None for r in resolved):
                refs.setdefault(local, []).extend(r for r in resolved if r is not None)
            else:
                attrs[local] = (value,)
        by_id[oid] = ModelObject(id=oid, class_name=_class_of(elem), attributes=attrs,
                                 references={k: tuple(v) for k, v in refs.items()})
        order.append(oid)
        if parent is not None and containment is not None:
            p = by_id[parent]
            merged = dict(p.references)
            merged[containment] = merged.get(containment, ()) + (oid,)
            by_id[parent] = ModelObject(id=p.id, class_name=p.class_name,
                                        attributes=p.attributes, references=merged)

    objects = tuple(by_id[oid] for oid in order)
    return _require_valid(Model(model_type=model_type, objects=objects))
