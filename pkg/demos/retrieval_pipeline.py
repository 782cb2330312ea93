"""
Retrieval pipeline walkthrough
==============================

Embed the question, pull top-k chunks by cosine, drop anything past the
distance threshold, rerank the survivors by quantized influence, then
compose the final answer from the retrieved context (answer 1) and a
fine-tuned generator's reply (answer 2).

Stub providers keep everything offline: the embedder is a deterministic
hash embedder and both generators echo their prompts.
"""

import tempfile
from pathlib import Path

from qimrag import (
    ChunkRecord,
    PipelineOptions,
    answer,
    create_collection,
    default_provider_set,
    upsert,
)
from qimrag.corpus import load_corpus
from qimrag.dataset import chunk_text

providers = default_provider_set()
collection = create_collection("corpus", dimension=64,
                               root=Path(tempfile.mkdtemp()))

records = []
for doc_id, text in load_corpus().items():
    for ordinal, piece in enumerate(chunk_text(doc_id, text)):
        records.append(ChunkRecord(
            chunk_id=f"{doc_id}:{ordinal}", doc_id=doc_id, ordinal=ordinal,
            text=piece, embedding=providers.embedder.embed(piece, 64).values))
upsert(collection, records)
print(f"ingested {len(records)} chunks from {len(load_corpus())} documents")

result = answer("how do I apply", collection, providers,
                PipelineOptions(k=7, threshold=0.8, q=16))

print(f"\noutcome: {result.outcome}   degraded: {result.degraded}")
print("references after influence reranking:")
for ref in result.references:
    print(f"  chunk {ref.chunk_id}  cosine {ref.cosine:.4f}  "
          f"influence {ref.qim_score:.4f}")

print(f"\nanswer1 (retrieved context, {len(result.answer1)} chars):")
print(" ", result.answer1[:120].replace("\n", " "), "...")
print(f"\nfinal answer ({len(result.final_answer)} chars):")
print(" ", result.final_answer[:120].replace("\n", " "), "...")
print("\nstage timings (s):",
      {k: round(v, 5) for k, v in result.timings.items()})
