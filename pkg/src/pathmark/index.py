"""Persistent inverted index over an ordered key-value store.

Every path is serialized with ``(``/``)`` delimiters and split into a row key
(the prefix) and a column qualifier (the rest), so that paths sharing a
prefix land in adjacent columns of one row and are fetched with a single
``get``:

* a path starting on an attribute vertex uses its first length-1 sub-path as
  the prefix: ``(hang,name,Transition`` + ``,source,State,name,talk)``;
* a path starting on a class vertex uses just that vertex: ``(Region`` +
  ``,subvertex,State,name,talk)``;
* a path equal to its prefix gets the single-byte qualifier ``)``.

Labels escape ``( ) , \\`` with a backslash. The value under each key is a
posting payload: per model id, the path's occurrence count and the model's
total path count. Corpus statistics (model count, totals, the stop-path set,
model metadata and original bytes) live in a sidecar keyspace of the same
store and are updated in the same write batch as the postings they describe.

One key namespace per model type keeps the schema compatible with a shared
multi-tenant table even though an index directory holds a single type.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import DuplicateModelError, EncodingError, StorageError, UnknownModelError
from .paths import ATTR, Path
from .storage import Delete, LogStore, MemoryStore, OrderedStore, Put

__all__ = [
    "SplitKey",
    "PostingPayload",
    "IndexStats",
    "ModelIndex",
    "encode_segment",
    "decode_segment",
    "split_path",
    "join_key",
    "decode_key",
    "path_text",
]

FORMAT_VERSION = 1
PAYLOAD_VERSION = 1

_ESCAPED = "\\(),"


def encode_segment(label: str) -> str:
    """Escape delimiter characters so any label round-trips through a key."""
    out = []
    for ch in label:
        if ch in _ESCAPED:
            out.append("\\")
        out.append(ch)
    return "".join(out)


def decode_segment(data: str) -> str:
    out = []
    i = 0
    while i < len(data):
        ch = data[i]
        if ch == "\\":
            if i + 1 >= len(data) or data[i + 1] not in _ESCAPED:
                raise EncodingError(f"ill-formed escape in segment {data!r}")
            out.append(data[i + 1])
            i += 2
        elif ch in "(),":
            raise EncodingError(f"unescaped delimiter in segment {data!r}")
        else:
            out.append(ch)
            i += 1
    return "".join(out)


@dataclass(frozen=True)
class SplitKey:
    row: str
    qualifier: str


def split_path(p: Path) -> SplitKey:
    """Split a path into its prefix row key and rest qualifier."""
    labels = [encode_segment(s) for s in p.labels()]
    if p.starts_with_attribute:
        if len(labels) < 3:
            raise EncodingError("attribute-started path must have length >= 1")
        row = "(" + ",".join(labels[:3])
        rest = labels[3:]
    else:
        row = "(" + labels[0]
        rest = labels[1:]
    if not rest:
        return SplitKey(row, ")")
    qual = "".join("," + s for s in rest) + ")"
    return SplitKey(row, qual)


def join_key(key: SplitKey) -> str:
    """Canonical full serialized form: row and qualifier concatenated."""
    return key.row + key.qualifier


def path_text(p: Path) -> str:
    """Canonical serialized form of a whole path."""
    return join_key(split_path(p))


def _split_segments(text: str) -> list[str]:
    segments = []
    current = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            current.append(text[i : i + 2])
            i += 2
        elif ch == ",":
            segments.append("".join(current))
            current = []
            i += 1
        else:
            current.append(ch)
            i += 1
    segments.append("".join(current))
    return segments


def decode_key(key: SplitKey) -> tuple[list[str], bool]:
    """Decode a split key to (labels, starts_with_attribute).

    The byte format does not record the kind of the final vertex; callers
    needing full paths must resolve that against the corpus.
    """
    full = join_key(key)
    if not full.startswith("(") or not full.endswith(")"):
        raise EncodingError(f"malformed key {full!r}")
    if not key.row.startswith("("):
        raise EncodingError(f"malformed row {key.row!r}")
    row_segments = _split_segments(key.row[1:])
    attr_start = len(row_segments) == 3
    if len(row_segments) not in (1, 3):
        raise EncodingError(f"row {key.row!r} is neither a class nor an attribute prefix")
    body = full[1:-1]
    labels = [decode_segment(s) for s in _split_segments(body)] if body else []
    if len(labels) % 2 == 0:
        raise EncodingError(f"key {full!r} does not alternate vertex/edge labels")
    return labels, attr_start


# -- posting payloads -------------------------------------------------------

PostingPayload = dict[str, tuple[int, int]]  # model id -> (count, total)


def _write_uvarint(out: bytearray, n: int) -> None:
    if n < 0:
        raise EncodingError("varint must be non-negative")
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def _read_uvarint(data: bytes, i: int) -> tuple[int, int]:
    shift = 0
    value = 0
    while True:
        if i >= len(data):
            raise EncodingError("truncated varint")
        b = data[i]
        i += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            return value, i
        shift += 7


def encode_payload(payload: PostingPayload) -> bytes:
    out = bytearray([PAYLOAD_VERSION])
    for model_id in sorted(payload):
        count, total = payload[model_id]
        raw = model_id.encode("utf-8")
        _write_uvarint(out, len(raw))
        out.extend(raw)
        _write_uvarint(out, count)
        _write_uvarint(out, total)
    return bytes(out)


def decode_payload(data: bytes) -> PostingPayload:
    if not data or data[0] != PAYLOAD_VERSION:
        raise EncodingError("unknown posting payload version")
    payload: PostingPayload = {}
    i = 1
    while i < len(data):
        n, i = _read_uvarint(data, i)
        model_id = data[i : i + n].decode("utf-8")
        i += n
        count, i = _read_uvarint(data, i)
        total, i = _read_uvarint(data, i)
        payload[model_id] = (count, total)
    return payload


@dataclass(frozen=True)
class IndexStats:
    model_type: str
    t: int
    avdl: float
    totals: dict[str, int]
    stop_path_count: int = 0
    stop_path_threshold: float = 0.70
    zero_total_models: int = 0

    def to_dict(self) -> dict:
        return {
            "model_type": self.model_type,
            "models": self.t,
            "avdl": self.avdl,
            "stop_paths": self.stop_path_count,
            "stop_path_threshold": self.stop_path_threshold,
            "zero_total_models": self.zero_total_models,
        }


def _esc_part(part: str) -> str:
    return part.replace("\\", "\\\\").replace("!", "\\!")


def _unesc_part(part: str) -> str:
    out = []
    i = 0
    while i < len(part):
        if part[i] == "\\" and i + 1 < len(part):
            out.append(part[i + 1])
            i += 2
        else:
            out.append(part[i])
            i += 1
    return "".join(out)


_SUMS_STRUCT = struct.Struct("<QQ")


class ModelIndex:
    """Inverted index for one model type, plus corpus statistics.

    A single logical writer at a time; readers see only fully applied
    batches. Open for writing from at most one process (the store's lock
    file enforces this for on-disk indexes).
    """

    def __init__(self, store: OrderedStore, model_type: str, directory: str | None = None,
                 tokenizer: dict | None = None, filter_config: dict | None = None,
                 stop_path_threshold: float = 0.70):
        self.store = store
        self.model_type = model_type
        self.directory = directory
        self.tokenizer = tokenizer or {}
        self.filter_config = filter_config or {}
        self.stop_path_threshold = stop_path_threshold
        t = _esc_part(model_type)
        self._posting_prefix = f"p!{t}!".encode()
        self._total_prefix = f"s!t!{t}!".encode()
        self._meta_prefix = f"s!m!{t}!".encode()
        self._blob_prefix = f"s!b!{t}!".encode()
        self._sums_row = f"s!s!{t}".encode()
        self._stop_row = f"s!x!{t}".encode()
        self._staged: _Staging | None = None
        self._sums_cache: tuple[int, int] | None = None

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def create(cls, directory: str, model_type: str, tokenizer: dict | None = None,
               filter_config: dict | None = None,
               stop_path_threshold: float = 0.70) -> "ModelIndex":
        os.makedirs(directory, exist_ok=True)
        meta_path = os.path.join(directory, "meta.json")
        if os.path.exists(meta_path):
            raise StorageError(f"index already exists at {directory}")
        store = LogStore(os.path.join(directory, "store"))
        idx = cls(store, model_type, directory, tokenizer, filter_config, stop_path_threshold)
        meta = {
            "format_version": FORMAT_VERSION,
            "model_type": model_type,
            "tokenizer": idx.tokenizer,
            "filter": idx.filter_config,
            "stop_path_threshold": stop_path_threshold,
            "stopword_list_id": idx.tokenizer.get("stopword_list_id", "english-v1"),
        }
        with open(meta_path, "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=1)
        return idx

    @classmethod
    def open(cls, directory: str, readonly: bool = True) -> "ModelIndex":
        meta_path = os.path.join(directory, "meta.json")
        try:
            with open(meta_path, encoding="utf-8") as f:
                meta = json.load(f)
        except FileNotFoundError:
            raise StorageError(f"no index at {directory} (missing meta.json)") from None
        if meta.get("format_version") != FORMAT_VERSION:
            raise StorageError(f"unsupported index format {meta.get('format_version')!r}")
        store = LogStore(os.path.join(directory, "store"), readonly=readonly)
        return cls(store, meta["model_type"], directory, meta.get("tokenizer"),
                   meta.get("filter"), meta.get("stop_path_threshold", 0.70))

    @classmethod
    def ephemeral(cls, model_type: str, tokenizer: dict | None = None,
                  filter_config: dict | None = None,
                  stop_path_threshold: float = 0.70) -> "ModelIndex":
        return cls(MemoryStore(), model_type, None, tokenizer, filter_config,
                   stop_path_threshold)

    def close(self):
        self.store.close()

    # -- write path ----------------------------------------------------------

    def bulk(self, batch_models: int = 64) -> "_Staging":
        """Context manager staging models and committing in batches."""
        return _Staging(self, batch_models)

    def index_model(self, model_id: str, bop, meta: dict | None = None,
                    blob: bytes | None = None) -> None:
        """Add one model's (normalized) bag of paths to the index.

        The payload written under every path records the occurrence count and
        the bag total, so the scorer never needs a second lookup.
        """
        if self._staged is not None:
            self._staged.add(model_id, bop, meta, blob)
            return
        with self.bulk(batch_models=1) as staging:
            staging.add(model_id, bop, meta, blob)

    def has_model(self, model_id: str) -> bool:
        return bool(self.store.get(self._total_prefix + _esc_part(model_id).encode()))

    def remove_model(self, model_id: str) -> None:
        """Remove a model's postings and stats contributions (full scan)."""
        key = _esc_part(model_id).encode()
        total_cells = self.store.get(self._total_prefix + key)
        if not total_cells:
            raise UnknownModelError(f"model {model_id!r} is not indexed")
        total, _ = _read_uvarint(next(iter(total_cells.values())), 0)
        ops: list[Put | Delete] = []
        for row, qual, value in self.store.scan(self._posting_prefix):
            payload = decode_payload(value)
            if model_id not in payload:
                continue
            del payload[model_id]
            if payload:
                ops.append(Put(row, qual, encode_payload(payload)))
            else:
                ops.append(Delete(row, qual))
        t, sum_totals = self._sums()
        ops.append(Put(self._sums_row, b"", _SUMS_STRUCT.pack(t - 1, sum_totals - total)))
        ops.append(Delete(self._total_prefix + key, b""))
        ops.append(Delete(self._meta_prefix + key, b""))
        ops.append(Delete(self._blob_prefix + key, b""))
        self.store.write_batch(ops)
        self._sums_cache = None

    # -- read path ------------------------------------------------------------

    def get_postings(self, row: str, qualifiers: Iterable[str] | None = None
                     ) -> dict[str, PostingPayload]:
        """Requested qualifiers of one prefix row; a single storage get."""
        quals = None if qualifiers is None else [q.encode() for q in qualifiers]
        cells = self.store.get(self._posting_prefix + row.encode(), quals)
        return {q.decode(): decode_payload(v) for q, v in cells.items()}

    def postings(self) -> Iterator[tuple[SplitKey, PostingPayload]]:
        plen = len(self._posting_prefix)
        for row, qual, value in self.store.scan(self._posting_prefix):
            yield SplitKey(row[plen:].decode(), qual.decode()), decode_payload(value)

    def document_frequencies(self) -> dict[SplitKey, int]:
        """df per stored path: the number of posting entries under it."""
        return {key: len(payload) for key, payload in self.postings()}

    def corpus_sums(self) -> tuple[int, int]:
        """(t, sum of totals); cached between writes so queries skip the read."""
        if self._sums_cache is None:
            cells = self.store.get(self._sums_row)
            if not cells:
                self._sums_cache = (0, 0)
            else:
                self._sums_cache = _SUMS_STRUCT.unpack(next(iter(cells.values())))
        return self._sums_cache

    _sums = corpus_sums

    def model_ids(self) -> list[str]:
        out = []
        plen = len(self._total_prefix)
        for row, _, _ in self.store.scan(self._total_prefix):
            out.append(_unesc_part(row[plen:].decode()))
        return out

    def model_total(self, model_id: str) -> int:
        cells = self.store.get(self._total_prefix + _esc_part(model_id).encode())
        if not cells:
            raise UnknownModelError(f"model {model_id!r} is not indexed")
        total, _ = _read_uvarint(next(iter(cells.values())), 0)
        return total

    def model_meta(self, model_id: str) -> dict:
        cells = self.store.get(self._meta_prefix + _esc_part(model_id).encode())
        if not cells:
            raise UnknownModelError(f"model {model_id!r} is not indexed")
        return json.loads(next(iter(cells.values())))

    def model_blob(self, model_id: str) -> bytes:
        cells = self.store.get(self._blob_prefix + _esc_part(model_id).encode())
        if not cells:
            raise UnknownModelError(f"model {model_id!r} has no stored bytes")
        return next(iter(cells.values()))

    def stats(self) -> IndexStats:
        t, sum_totals = self._sums()
        totals = {}
        plen = len(self._total_prefix)
        for row, _, value in self.store.scan(self._total_prefix):
            mid = _unesc_part(row[plen:].decode())
            totals[mid], _ = _read_uvarint(value, 0)
        stop_keys, threshold, _ = self.stored_stop_paths()
        return IndexStats(
            model_type=self.model_type,
            t=t,
            avdl=(sum_totals / t) if t else 0.0,
            totals=totals,
            stop_path_count=len(stop_keys),
            stop_path_threshold=threshold,
            zero_total_models=sum(1 for v in totals.values() if v == 0),
        )

    # -- stop paths ------------------------------------------------------------

    def stored_stop_paths(self) -> tuple[frozenset[SplitKey], float, int]:
        """(keys, threshold, corpus size at computation) from the sidecar."""
        cells = self.store.get(self._stop_row)
        if not cells:
            return frozenset(), self.stop_path_threshold, 0
        return _decode_stop_set(next(iter(cells.values())))

    def apply_stop_path_purge(self, stop_keys: frozenset[SplitKey], threshold: float,
                              corpus_size: int) -> int:
        """Delete stop-path postings and rewrite affected totals everywhere.

        Payload totals are denormalized across every posting of a model, so
        shrinking |BoP| means rewriting all of that model's payloads. Runs as
        one atomic batch; returns the number of purged posting keys.
        """
        raw = {(self._posting_prefix + k.row.encode(), k.qualifier.encode())
               for k in stop_keys}
        removed_counts: dict[str, int] = {}
        purged = 0
        for row, qual, value in self.store.scan(self._posting_prefix):
            if (row, qual) in raw:
                for mid, (count, _) in decode_payload(value).items():
                    removed_counts[mid] = removed_counts.get(mid, 0) + count
                purged += 1
        new_totals: dict[str, int] = {}
        for mid, removed in removed_counts.items():
            new_totals[mid] = self.model_total(mid) - removed
        ops: list[Put | Delete] = []
        for row, qual, value in self.store.scan(self._posting_prefix):
            if (row, qual) in raw:
                ops.append(Delete(row, qual))
                continue
            payload = decode_payload(value)
            changed = False
            for mid in payload:
                if mid in new_totals:
                    count, _ = payload[mid]
                    payload[mid] = (count, new_totals[mid])
                    changed = True
            if changed:
                ops.append(Put(row, qual, encode_payload(payload)))
        for mid, total in new_totals.items():
            out = bytearray()
            _write_uvarint(out, total)
            ops.append(Put(self._total_prefix + _esc_part(mid).encode(), b"", bytes(out)))
        t, sum_totals = self._sums()
        sum_totals -= sum(removed_counts.values())
        ops.append(Put(self._sums_row, b"", _SUMS_STRUCT.pack(t, sum_totals)))
        ops.append(Put(self._stop_row, b"", _encode_stop_set(stop_keys, threshold, corpus_size)))
        self.store.write_batch(ops)
        self._sums_cache = None
        if self.directory:
            self._export_stop_paths(stop_keys, threshold, corpus_size)
        return purged

    def _export_stop_paths(self, stop_keys, threshold, corpus_size):
        path = os.path.join(self.directory, "stoppaths.bin")
        tmp = path + ".tmp"
        with open(tmp, "wb") as f:
            f.write(_encode_stop_set(stop_keys, threshold, corpus_size))
        os.replace(tmp, path)


_STOP_MAGIC = b"PMSP"


def _encode_stop_set(keys: frozenset[SplitKey], threshold: float, corpus_size: int) -> bytes:
    out = bytearray(_STOP_MAGIC)
    out.append(1)
    out.extend(struct.pack("<d", threshold))
    _write_uvarint(out, corpus_size)
    _write_uvarint(out, len(keys))
    for key in sorted(keys, key=lambda k: (k.row, k.qualifier)):
        for part in (key.row, key.qualifier):
            raw = part.encode("utf-8")
            _write_uvarint(out, len(raw))
            out.extend(raw)
    return bytes(out)


def _decode_stop_set(data: bytes) -> tuple[frozenset[SplitKey], float, int]:
    if data[:4] != _STOP_MAGIC or data[4] != 1:
        raise EncodingError("unknown stop-path set format")
    (threshold,) = struct.unpack_from("<d", data, 5)
    i = 13
    corpus_size, i = _read_uvarint(data, i)
    n, i = _read_uvarint(data, i)
    keys = set()
    for _ in range(n):
        ln, i = _read_uvarint(data, i)
        row = data[i : i + ln].decode("utf-8")
        i += ln
        ln, i = _read_uvarint(data, i)
        qual = data[i : i + ln].decode("utf-8")
        i += ln
        keys.add(SplitKey(row, qual))
    return frozenset(keys), threshold, corpus_size


class _Staging:
    """Accumulates models and commits batched, read-modify-write postings."""

    def __init__(self, index: ModelIndex, batch_models: int):
        self.index = index
        self.batch_models = batch_models
        self._models: dict[str, tuple] = {}

    def __enter__(self):
        self.index._staged = self
        return self

    def __exit__(self, exc_type, exc, tb):
        self.index._staged = None
        if exc_type is None:
            self.flush()
        return False

    def add(self, model_id: str, bop, meta: dict | None, blob: bytes | None) -> None:
        if model_id in self._models or self.index.has_model(model_id):
            raise DuplicateModelError(f"model {model_id!r} is already indexed")
        self._models[model_id] = (bop, meta or {}, blob)
        if len(self._models) >= self.batch_models:
            self.flush()

    def flush(self) -> None:
        if not self._models:
            return
        idx = self.index
        # Merge per-key deltas across the staged models.
        deltas: dict[SplitKey, dict[str, tuple[int, int]]] = {}
        for model_id, (bop, _, _) in self._models.items():
            key_counts: dict[SplitKey, int] = {}
            for path, n in bop.items():
                key = split_path(path)
                key_counts[key] = key_counts.get(key, 0) + n
            for key, count in key_counts.items():
                deltas.setdefault(key, {})[model_id] = (count, bop.total)
        # One read per touched row, then one atomic batch.
        by_row: dict[str, list[SplitKey]] = {}
        for key in deltas:
            by_row.setdefault(key.row, []).append(key)
        ops: list[Put | Delete] = []
        for row, keys in by_row.items():
            existing = idx.get_postings(row, [k.qualifier for k in keys])
            for key in keys:
                payload = existing.get(key.qualifier, {})
                payload.update(deltas[key])
                ops.append(Put(idx._posting_prefix + key.row.encode(),
                               key.qualifier.encode(), encode_payload(payload)))
        t, sum_totals = idx._sums()
        for model_id, (bop, meta, blob) in self._models.items():
            mid = _esc_part(model_id).encode()
            out = bytearray()
            _write_uvarint(out, bop.total)
            ops.append(Put(idx._total_prefix + mid, b"", bytes(out)))
            ops.append(Put(idx._meta_prefix + mid, b"",
                           json.dumps(meta, ensure_ascii=False).encode("utf-8")))
            if blob is not None:
                ops.append(Put(idx._blob_prefix + mid, b"", blob))
            t += 1
            sum_totals += bop.total
        ops.append(Put(idx._sums_row, b"", _SUMS_STRUCT.pack(t, sum_totals)))
        idx.store.write_batch(ops)
        idx._sums_cache = None
        self._models.clear()
