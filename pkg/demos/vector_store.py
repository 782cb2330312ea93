"""
Persistent vector store: top-k retrieval and threshold filtering
================================================================
"""

import tempfile
from pathlib import Path

from qimrag import (
    ChunkRecord,
    create_collection,
    det_embed,
    filter_by_distance,
    load_collection,
    query_topk,
    upsert,
)

root = Path(tempfile.mkdtemp())
collection = create_collection("notes", dimension=64, root=root)

texts = {
    "apply": "Fill out the application form to apply for the program.",
    "hours": "The studio is open weekday afternoons and Saturday mornings.",
    "board": "The board of directors meets quarterly to review programs.",
    "paint": "Murals are painted with community members every summer.",
}
records = [
    ChunkRecord(chunk_id=f"{key}:0", doc_id=key, ordinal=0, text=text,
                embedding=det_embed(text, 64).values)
    for key, text in texts.items()
]
upsert(collection, records)
print(f"stored {len(collection)} chunks in {root / 'notes.vec'}")

query = det_embed("how do I apply for the art program", 64)
results = query_topk(collection, query.values, k=4)
print("\ntop-k by cosine:")
for r in results:
    print(f"  {r.chunk_id:8} cosine {r.cosine:+.4f}  distance {r.distance:.4f}")

# only candidates within the distance threshold may be shown to a user
kept = filter_by_distance(results, threshold=0.95)
print(f"\nwithin distance 0.95: {[r.chunk_id for r in kept]}")

# the file round-trips bit for bit, checksummed against corruption
reloaded = load_collection(root / "notes.vec")
again = query_topk(reloaded, query.values, k=1)[0]
print(f"\nreloaded from disk, top hit still {again.chunk_id} "
      f"at cosine {again.cosine:+.4f}")
