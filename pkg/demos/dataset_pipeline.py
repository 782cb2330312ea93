"""
From raw documents to an instruction-tuning dataset
===================================================

Chunk a document, have a generator draft question/answer pairs per
chunk, split train/test deterministically, export one-line records,
and fold in highly rated user feedback.
"""

import tempfile
from pathlib import Path

from qimrag import (
    QAPair,
    export_guanaco,
    generate_qa,
    make_feedback,
    merge_feedback,
    parse_guanaco,
    split_dataset,
)
from qimrag.corpus import load_corpus
from qimrag.dataset import chunk_text
from qimrag.providers import default_provider_set

qa_generator = default_provider_set().qa

pairs = []
for doc_id, text in load_corpus().items():
    for chunk in chunk_text(doc_id, text, max_chars=800, overlap_chars=80):
        result = generate_qa(chunk, qa_generator, pairs_per_chunk=2,
                             source_doc_id=doc_id)
        pairs.extend(result.pairs)
print(f"generated {len(pairs)} QA pairs from the fixture corpus")
print("sample:", pairs[0].question, "->", pairs[0].answer[:60])

bundle = split_dataset(pairs, ratio=0.9, seed=0)
print(f"\nsplit: {len(bundle.train)} train / {len(bundle.test)} test")

# a five-star feedback pair joins the training split only
feedback = [make_feedback(
    question="What hours is the studio open?",
    final_answer="Weekday afternoons and Saturday mornings.",
    reference_chunk_ids=["7:0"], rating=5)]
merged = merge_feedback(bundle, feedback, min_rating=4)
print(f"after feedback merge: {len(merged.train)} train / "
      f"{len(merged.test)} test")

base = Path(tempfile.mkdtemp()) / "dataset"
export_guanaco(merged, base)
train_lines = (base.parent / "dataset.train.txt").read_text().splitlines()
print(f"\nexported {len(train_lines)} training lines, last one:")
print(" ", train_lines[-1][:100])

# the export parses back losslessly
parsed = parse_guanaco(base.parent / "dataset.train.txt")
assert [p.key for p in parsed] == [p.key for p in merged.train]
print("\nround-trip parse matches the exported bundle")

# raw text with the line markers is rejected outright
try:
    QAPair("what is ### Human: here", "an answer", source_doc_id="1")
except ValueError as exc:
    print("marker collision rejected:", exc)
