import hashlib
import math
import struct

import numpy as np
import pytest

from qimrag.similarity import DimensionMismatchError, cosine_similarity
from qimrag.store import (
    ChunkRecord,
    Collection,
    CorruptFileError,
    DuplicateCollectionError,
    EmptyCollectionError,
    RankedResult,
    VersionError,
    create_collection,
    filter_by_distance,
    load,
    persist,
    query_topk,
    remove,
    rerank_with,
    upsert,
)


def _record(chunk_id, vec, doc_id="d", ordinal=0, text="t"):
    return ChunkRecord(chunk_id, doc_id, ordinal, text, np.array(vec, float))


def _seven_records(dim=4):
    rng = np.random.RandomState(7)
    return [
        _record(f"c{i}", rng.uniform(-1, 1, dim), doc_id=str(i + 1),
                text=f"document {i + 1}")
        for i in range(7)
    ]


def test_create_collection():
    col = create_collection("ysa", 64)
    assert len(col) == 0
    assert col.dimension == 64


def test_create_collection_persists_and_rejects_duplicates(tmp_path):
    col = create_collection("ysa", 8, root=tmp_path)
    assert (tmp_path / "ysa.vec").exists()
    assert len(load(tmp_path / "ysa.vec")) == 0
    del col
    with pytest.raises(DuplicateCollectionError):
        create_collection("ysa", 8, root=tmp_path)


@pytest.mark.parametrize("name,dim", [("", 4), ("ok", 0), ("ok", -3)])
def test_create_collection_validation(name, dim):
    with pytest.raises(ValueError):
        create_collection(name, dim)


def test_upsert_seven_and_replace_one():
    col = create_collection("t", 4)
    assert upsert(col, _seven_records()) == 7
    assert len(col) == 7
    replacement = _record("c3", [1, 0, 0, 0], text="rewritten")
    assert upsert(col, [replacement]) == 1
    assert len(col) == 7
    assert col.get("c3").text == "rewritten"


def test_upsert_mixed_dimension_batch_is_atomic():
    col = create_collection("t", 4)
    bad_batch = [_record("a", [1, 0, 0, 0]), _record("b", [1, 0, 0])]
    with pytest.raises(DimensionMismatchError):
        upsert(col, bad_batch)
    assert len(col) == 0


def test_upsert_rejects_zero_embedding():
    col = create_collection("t", 3)
    with pytest.raises(ValueError):
        upsert(col, [_record("z", [0, 0, 0])])


def test_chunk_record_validation():
    with pytest.raises(ValueError):
        _record("", [1.0])
    with pytest.raises(ValueError):
        _record("a", [np.nan, 1.0])
    with pytest.raises(ValueError):
        ChunkRecord("a", "d", -1, "t", np.array([1.0]))


def test_query_exact_match_is_first_with_unit_cosine():
    col = create_collection("t", 4)
    records = _seven_records()
    upsert(col, records)
    results = query_topk(col, records[2].embedding, 3)
    assert results[0].chunk_id == "c2"
    assert results[0].cosine == 1.0
    assert results[0].distance == 0.0


def test_query_unit_vector_example():
    col = create_collection("t", 2)
    e1 = [1.0, 0.0]
    e2 = [0.0, 1.0]
    mixed = [1 / math.sqrt(2), 1 / math.sqrt(2)]
    upsert(col, [_record("e1", e1), _record("e2", e2),
                 _record("mix", mixed)])
    results = query_topk(col, np.array(e1), 2)
    assert [r.chunk_id for r in results] == ["e1", "mix"]
    assert results[0].cosine == 1.0
    assert results[1].cosine == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_query_k_larger_than_collection_returns_all():
    col = create_collection("t", 4)
    upsert(col, _seven_records())
    assert len(query_topk(col, np.ones(4), 50)) == 7


def test_query_ties_break_by_chunk_id():
    col = create_collection("t", 2)
    upsert(col, [_record("b", [2, 0]), _record("a", [1, 0]),
                 _record("c", [3, 0])])
    results = query_topk(col, np.array([1.0, 0.0]), 3)
    assert [r.chunk_id for r in results] == ["a", "b", "c"]


def test_query_errors():
    col = create_collection("t", 4)
    with pytest.raises(EmptyCollectionError):
        query_topk(col, np.ones(4), 1)
    upsert(col, _seven_records())
    with pytest.raises(DimensionMismatchError):
        query_topk(col, np.ones(3), 1)
    with pytest.raises(ValueError):
        query_topk(col, np.ones(4), 0)


def test_query_matches_linear_scan_oracle():
    rng = np.random.RandomState(20240817)
    col = create_collection("t", 8)
    records = [_record(f"r{i:03d}", rng.normal(size=8)) for i in range(50)]
    upsert(col, records)
    for _ in range(20):
        query = rng.normal(size=8)
        results = query_topk(col, query, 50)
        oracle = sorted(
            ((cosine_similarity(query, r.embedding), r.chunk_id)
             for r in records),
            key=lambda t: (-t[0], t[1]),
        )
        assert [r.chunk_id for r in results] == [cid for _, cid in oracle]
        assert results[0].cosine == max(c for c, _ in oracle)
        for r in results:
            assert abs(r.distance - (1.0 - r.cosine)) <= 1e-12


def test_filter_by_distance_inclusive_boundary():
    chunk = _record("x", [1.0])
    results = [RankedResult(chunk, 1 - d, d) for d in (0.05, 0.2, 0.21)]
    kept = filter_by_distance(results, 0.2)
    assert [r.distance for r in kept] == [0.05, 0.2]


def test_filter_by_distance_edges():
    chunk = _record("x", [1.0])
    exact = RankedResult(chunk, 1.0, 0.0)
    near = RankedResult(chunk, 0.99, 0.01)
    assert filter_by_distance([exact, near], 0.0) == [exact]
    assert filter_by_distance([], 0.5) == []
    with pytest.raises(ValueError):
        filter_by_distance([exact], -0.1)


def test_persist_round_trip(tmp_path):
    col = create_collection("ysa", 4)
    upsert(col, _seven_records())
    path = tmp_path / "col.vec"
    persist(col, path)
    loaded = load(path)
    assert loaded.name == "ysa"
    assert loaded.dimension == 4
    assert len(loaded) == 7
    for original in col.records():
        copy = loaded.get(original.chunk_id)
        assert copy.doc_id == original.doc_id
        assert copy.ordinal == original.ordinal
        assert copy.text == original.text
        assert copy.embedding.tobytes() == original.embedding.tobytes()


def test_load_truncated_file_is_corrupt(tmp_path):
    col = create_collection("t", 4)
    upsert(col, _seven_records())
    path = tmp_path / "col.vec"
    persist(col, path)
    blob = path.read_bytes()
    path.write_bytes(blob[:len(blob) // 2])
    with pytest.raises(CorruptFileError):
        load(path)


def test_load_bitflip_is_corrupt(tmp_path):
    col = create_collection("t", 4)
    upsert(col, _seven_records())
    path = tmp_path / "col.vec"
    persist(col, path)
    blob = bytearray(path.read_bytes())
    blob[40] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(CorruptFileError):
        load(path)


def test_load_future_version_rejected(tmp_path):
    col = create_collection("t", 4)
    path = tmp_path / "col.vec"
    persist(col, path)
    blob = bytearray(path.read_bytes())
    body = blob[:-32]
    body[8:12] = struct.pack("<I", 99)
    path.write_bytes(bytes(body) + hashlib.sha256(bytes(body)).digest())
    with pytest.raises(VersionError):
        load(path)


def test_write_through_on_upsert_and_remove(tmp_path):
    col = create_collection("live", 4, root=tmp_path)
    upsert(col, _seven_records())
    assert len(load(tmp_path / "live.vec")) == 7
    assert remove(col, ["c0", "missing"]) == 1
    assert len(load(tmp_path / "live.vec")) == 6
    assert "c0" not in load(tmp_path / "live.vec")


def test_rerank_with_sorts_by_score_then_cosine_then_id():
    chunks = [_record(c, [1.0]) for c in ("a", "b", "c")]
    results = [
        RankedResult(chunks[0], 0.9, 0.1),
        RankedResult(chunks[1], 0.8, 0.2),
        RankedResult(chunks[2], 0.95, 0.05),
    ]
    ranked = rerank_with(results, [1.0, 2.0, 1.0])
    assert [r.chunk_id for r in ranked] == ["b", "c", "a"]
    assert [r.qim_score for r in ranked] == [2.0, 1.0, 1.0]
    with pytest.raises(ValueError):
        rerank_with(results, [1.0])
