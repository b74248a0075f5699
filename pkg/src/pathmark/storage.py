"""Ordered key-value storage contract and embedded engines.

Keys are (row, qualifier) byte pairs sorted lexicographically by row, then
qualifier. The contract mirrors a BigTable-style store: ``get`` reads any
number of columns of one row in a single round trip, ``scan`` iterates in
key order, and ``write_batch`` applies a group of puts/deletes atomically.

Two engines are provided: :class:`MemoryStore` (ephemeral, used by tests and
oracles) and :class:`LogStore`, which keeps the sorted map in memory and
makes batches durable through an append-only, checksummed log; a torn tail
record is discarded on replay, so a batch is visible either fully or not at
all. A lock file enforces the single-writer rule across processes.
"""

from __future__ import annotations

import os
import struct
import threading
import zlib
from typing import Iterable, Iterator

from sortedcontainers import SortedDict

from .errors import StorageError

__all__ = ["Put", "Delete", "OrderedStore", "MemoryStore", "LogStore"]

Key = tuple[bytes, bytes]


class Put:
    __slots__ = ("row", "qualifier", "value")

    def __init__(self, row: bytes, qualifier: bytes, value: bytes):
        self.row, self.qualifier, self.value = row, qualifier, value


class Delete:
    __slots__ = ("row", "qualifier")

    def __init__(self, row: bytes, qualifier: bytes):
        self.row, self.qualifier = row, qualifier


class OrderedStore:
    """Abstract contract; see module docstring."""

    def get(self, row: bytes, qualifiers: Iterable[bytes] | None = None) -> dict[bytes, bytes]:
        """All (or the requested) columns of one row. One round trip."""
        raise NotImplementedError

    def scan(self, prefix: bytes = b"") -> Iterator[tuple[bytes, bytes, bytes]]:
        """Ordered iteration over (row, qualifier, value) with row prefix."""
        raise NotImplementedError

    def write_batch(self, ops: Iterable[Put | Delete]) -> None:
        """Apply all operations atomically and durably."""
        raise NotImplementedError

    def close(self) -> None:
        pass

    # Round trips issued via get(); lets callers audit access patterns.
    @property
    def get_count(self) -> int:
        raise NotImplementedError


class MemoryStore(OrderedStore):
    def __init__(self):
        self._data: SortedDict = SortedDict()
        self._lock = threading.RLock()
        self._gets = 0

    def get(self, row, qualifiers=None):
        with self._lock:
            self._gets += 1
            lo: Key = (row, b"")
            hi: Key = (row + b"\x00", b"")
            out = {}
            wanted = set(qualifiers) if qualifiers is not None else None
            for key in self._data.irange(lo, hi, inclusive=(True, False)):
                if wanted is None or key[1] in wanted:
                    out[key[1]] = self._data[key]
            return out

    def scan(self, prefix=b""):
        with self._lock:
            keys = list(self._data.irange((prefix, b""), None))
        for key in keys:
            if not key[0].startswith(prefix):
                break
            try:
                value = self._data[key]
            except KeyError:
                continue
            yield key[0], key[1], value

    def write_batch(self, ops):
        with self._lock:
            for op in ops:
                if isinstance(op, Put):
                    self._data[(op.row, op.qualifier)] = op.value
                else:
                    self._data.pop((op.row, op.qualifier), None)

    @property
    def get_count(self):
        return self._gets

    def __len__(self):
        return len(self._data)


_MAGIC = b"PMLG"
_FORMAT = 1


class LogStore(MemoryStore):
    """Durable store: MemoryStore semantics + append-only batch log.

    Record layout: u32 body length, u32 crc32(body); body is a sequence of
    ops (op byte, then u32-length-prefixed row / qualifier [/ value]).
    """

    def __init__(self, directory: str, readonly: bool = False):
        super().__init__()
        self._dir = directory
        self._readonly = readonly
        os.makedirs(directory, exist_ok=True)
        self._log_path = os.path.join(directory, "store.log")
        self._lock_path = os.path.join(directory, "store.lock")
        self._log = None
        self._replay()
        if not readonly:
            self._acquire_lock()
            self._log = open(self._log_path, "ab")

    def _acquire_lock(self):
        try:
            fd = os.open(self._lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StorageError(
                f"store at {self._dir} is locked by another writer "
                f"(remove {self._lock_path} if stale)"
            ) from None
        with os.fdopen(fd, "w") as f:
            f.write(str(os.getpid()))

    def _replay(self):
        if not os.path.exists(self._log_path):
            with open(self._log_path, "wb") as f:
                f.write(_MAGIC + bytes([_FORMAT]))
            return
        with open(self._log_path, "rb") as f:
            header = f.read(5)
            if header[:4] != _MAGIC:
                raise StorageError(f"{self._log_path} is not a store log")
            good = 5
            while True:
                head = f.read(8)
                if len(head) < 8:
                    break
                length, crc = struct.unpack("<II", head)
                body = f.read(length)
                if len(body) < length or zlib.crc32(body) != crc:
                    break  # torn batch: discard the tail
                self._apply(body)
                good += 8 + length
        if not self._readonly:
            with open(self._log_path, "r+b") as f:
                f.truncate(good)

    def _apply(self, body: bytes):
        i = 0
        while i < len(body):
            op = body[i]
            i += 1
            parts = []
            for _ in range(3 if op == 0 else 2):
                (n,) = struct.unpack_from("<I", body, i)
                i += 4
                parts.append(body[i : i + n])
                i += n
            if op == 0:
                self._data[(parts[0], parts[1])] = parts[2]
            else:
                self._data.pop((parts[0], parts[1]), None)

    def write_batch(self, ops):
        if self._readonly:
            raise StorageError("store opened read-only")
        ops = list(ops)
        chunks = []
        for op in ops:
            if isinstance(op, Put):
                chunks.append(b"\x00")
                fields = (op.row, op.qualifier, op.value)
            else:
                chunks.append(b"\x01")
                fields = (op.row, op.qualifier)
            for fb in fields:
                chunks.append(struct.pack("<I", len(fb)))
                chunks.append(fb)
        body = b"".join(chunks)
        with self._lock:
            self._log.write(struct.pack("<II", len(body), zlib.crc32(body)))
            self._log.write(body)
            self._log.flush()
            os.fsync(self._log.fileno())
            super().write_batch(ops)

    def compact(self):
        """Rewrite the log as one snapshot batch (drops dead records)."""
        if self._readonly:
            raise StorageError("store opened read-only")
        with self._lock:
            tmp = self._log_path + ".tmp"
            with open(tmp, "wb") as f:
                f.write(_MAGIC + bytes([_FORMAT]))
                chunks = []
                for (row, qual), value in self._data.items():
                    chunks.append(b"\x00")
                    for fb in (row, qual, value):
                        chunks.append(struct.pack("<I", len(fb)))
                        chunks.append(fb)
                body = b"".join(chunks)
                f.write(struct.pack("<II", len(body), zlib.crc32(body)))
                f.write(body)
                f.flush()
                os.fsync(f.fileno())
            self._log.close()
            os.replace(tmp, self._log_path)
            self._log = open(self._log_path, "ab")

    def close(self):
        with self._lock:
            if self._log is not None:
                self._log.close()
                self._log = None
            if not self._readonly and os.path.exists(self._lock_path):
                os.remove(self._lock_path)
