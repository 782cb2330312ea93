"""Persistent vector collection with exact cosine top-k retrieval.

Collections are small (thousands of chunks), so retrieval is a brute-force
scan: correctness and reproducibility over speed. The on-disk format is a
length-prefixed record log with a header and a whole-file checksum;
embeddings are serialized as IEEE-754 binary64 little-endian, which makes
round-trips bit-exact across machines.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .similarity import DimensionMismatchError, cosine_similarity

_MAGIC = b"QRVECCOL"
_VERSION = 1


class StoreError(Exception):
    pass


class DuplicateCollectionError(StoreError):
    pass


class EmptyCollectionError(StoreError):
    pass


class CorruptFileError(StoreError):
    pass


class VersionError(StoreError):
    pass


@dataclass(frozen=True)
class ChunkRecord:
    chunk_id: str
    doc_id: str
    ordinal: int
    text: str
    embedding: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not self.chunk_id:
            raise ValueError("chunk_id must be nonempty")
        if self.ordinal < 0:
            raise ValueError("ordinal must be >= 0")
        vec = np.asarray(self.embedding, dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] < 1:
            raise ValueError("embedding must be a 1-D vector")
        if not np.all(np.isfinite(vec)):
            raise ValueError("embedding entries must be finite")
        vec = vec.copy()
        vec.setflags(write=False)
        object.__setattr__(self, "embedding", vec)

    @property
    def dimension(self) -> int:
        return self.embedding.shape[0]


@dataclass(frozen=True)
class RankedResult:
    chunk: ChunkRecord
    cosine: float
    distance: float
    qim_score: float | None = None

    @property
    def chunk_id(self) -> str:
        return self.chunk.chunk_id


class Collection:
    """Handle over an ordered set of chunk records.

    When `path` is set, every mutation is written through to that file
    with an atomic replace, so readers never observe partial updates.
    """

    def __init__(self, name: str, dimension: int,
                 path: Path | None = None) -> None:
        self.name = name
        self.dimension = dimension
        self.path = path
        self._records: dict[str, ChunkRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._records

    def get(self, chunk_id: str) -> ChunkRecord | None:
        return self._records.get(chunk_id)

    def records(self) -> list[ChunkRecord]:
        return list(self._records.values())

    def doc_ids(self) -> set[str]:
        return {r.doc_id for r in self._records.values()}


def create_collection(name: str, dimension: int,
                      root: Path | str | None = None) -> Collection:
    """Create an empty collection; with `root`, persist it immediately.

    Creating a name that already has a file under `root` fails rather
    than truncating existing data.
    """
    if not name:
        raise ValueError("collection name must be nonempty")
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    path = None
    if root is not None:
        path = Path(root) / f"{name}.vec"
        if path.exists():
            raise DuplicateCollectionError(f"collection exists: {name}")
    collection = Collection(name, dimension, path)
    if path is not None:
        persist(collection, path)
    return collection


def upsert(collection: Collection, records: list[ChunkRecord]) -> int:
    """Insert or replace records as one batch; invalid batches change nothing.

    Zero embeddings are rejected: cosine similarity is undefined for them,
    so they could never be retrieved anyway.
    """
    for record in records:
        if record.dimension != collection.dimension:
            raise DimensionMismatchError(
                f"record {record.chunk_id!r} has dimension "
                f"{record.dimension}, collection needs {collection.dimension}"
            )
        if not record.embedding.any():
            raise ValueError(
                f"record {record.chunk_id!r} has a zero embedding"
            )
    for record in records:
        collection._records[record.chunk_id] = record
    if collection.path is not None:
        persist(collection, collection.path)
    return len(records)


def remove(collection: Collection, chunk_ids: list[str]) -> int:
    """Drop records by id; unknown ids are ignored. Returns removed count."""
    removed = 0
    for chunk_id in chunk_ids:
        if collection._records.pop(chunk_id, None) is not None:
            removed += 1
    if removed and collection.path is not None:
        persist(collection, collection.path)
    return removed


def query_topk(collection: Collection, query_embedding,
               k: int) -> list[RankedResult]:
    """Exact top-k by cosine similarity, descending; ties by chunk_id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(collection) == 0:
        raise EmptyCollectionError("cannot query an empty collection")
    query = np.asarray(query_embedding, dtype=np.float64)
    if query.ndim != 1 or query.shape[0] != collection.dimension:
        raise DimensionMismatchError(
            f"query dimension {query.shape} does not match "
            f"collection dimension {collection.dimension}"
        )
    scored = []
    for record in collection._records.values():
        cos = cosine_similarity(query, record.embedding)
        scored.append(RankedResult(record, cos, 1.0 - cos))
    scored.sort(key=lambda r: (-r.cosine, r.chunk_id))
    return scored[:k]


def filter_by_distance(results: list[RankedResult],
                       threshold: float) -> list[RankedResult]:
    """Keep results with distance <= threshold; order preserved."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    return [r for r in results if r.distance <= threshold]


def _pack_str(value: str) -> bytes:
    data = value.encode("utf-8")
    return struct.pack("<I", len(data)) + data


class _Reader:
    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0

    def take(self, count: int) -> bytes:
        if self._pos + count > len(self._data):
            raise CorruptFileError("unexpected end of file")
        chunk = self._data[self._pos:self._pos + count]
        self._pos += count
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def string(self) -> str:
        try:
            return self.take(self.u32()).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptFileError("malformed string field") from exc

    def at_end(self) -> bool:
        return self._pos == len(self._data)


def _serialize(collection: Collection) -> bytes:
    parts = [
        _MAGIC,
        struct.pack("<I", _VERSION),
        struct.pack("<I", collection.dimension),
        _pack_str(collection.name),
        struct.pack("<I", len(collection._records)),
    ]
    for record in collection._records.values():
        payload = b"".join([
            _pack_str(record.chunk_id),
            _pack_str(record.doc_id),
            struct.pack("<I", record.ordinal),
            _pack_str(record.text),
            record.embedding.astype("<f8").tobytes(),
        ])
        parts.append(struct.pack("<I", len(payload)))
        parts.append(payload)
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def persist(collection: Collection, path: Path | str) -> None:
    """Write the collection atomically (temp file + rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(_serialize(collection))
    os.replace(tmp, path)


def load(path: Path | str) -> Collection:
    """Read a collection file, verifying checksum and format version."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 32 + len(_MAGIC):
        raise CorruptFileError("file too short")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptFileError("checksum mismatch")
    reader = _Reader(body)
    if reader.take(len(_MAGIC)) != _MAGIC:
        raise CorruptFileError("bad magic")
    version = reader.u32()
    if version != _VERSION:
        raise VersionError(f"unsupported format version {version}")
    dimension = reader.u32()
    name = reader.string()
    count = reader.u32()
    collection = Collection(name, dimension, path)
    for _ in range(count):
        payload = reader.take(reader.u32())
        sub = _Reader(payload)
        chunk_id = sub.string()
        doc_id = sub.string()
        ordinal = sub.u32()
        text = sub.string()
        vec = np.frombuffer(sub.take(8 * dimension), dtype="<f8")
        if not sub.at_end():
            raise CorruptFileError("trailing bytes in record")
        collection._records[chunk_id] = ChunkRecord(
            chunk_id, doc_id, ordinal, text, vec.astype(np.float64)
        )
    if not reader.at_end():
        raise CorruptFileError("trailing bytes after records")
    return collection


def rerank_with(results: list[RankedResult], scores: list[float],
                ) -> list[RankedResult]:
    """Attach judge scores and sort by them (desc), cosine, chunk_id."""
    if len(results) != len(scores):
        raise ValueError("one score per result required")
    annotated = [replace(r, qim_score=s) for r, s in zip(results, scores)]
    annotated.sort(key=lambda r: (-r.qim_score, -r.cosine, r.chunk_id))
    return annotated
