"""Document chunking, Q&A pair generation, splitting, and export.

The export format is one line per pair:

    ### Human: {question} ### Assistant: {answer}

Pairs containing the literal marker substrings are rejected at
construction so an exported line can never be misparsed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .feedback import FeedbackRecord
from .rng import SplitMix64

HUMAN_MARKER = "### Human:"
ASSISTANT_MARKER = "### Assistant:"

_LINE_RE = re.compile(
    r"^### Human: (?P<question>.+?) ### Assistant: (?P<answer>.+)$"
)

QA_PROMPT_VERSION = "qa-prompt-v1"
QA_PROMPT_TEMPLATE = (
    f"[{QA_PROMPT_VERSION}] Write question and answer pairs grounded in "
    "the text below.\n"
    "Use exactly one line per pair, formatted as:\n"
    "### Human: <question> ### Assistant: <answer>\n"
    "Every question must be answerable from the text alone.\n"
    "Text:\n"
    "{chunk}"
)

DEFAULT_MAX_CHARS = 800
DEFAULT_OVERLAP_CHARS = 80

_WHITESPACE_LOOKBACK = 32


def _normalize(text: str) -> str:
    return " ".join(text.split())


@dataclass(frozen=True)
class QAPair:
    question: str
    answer: str
    source_doc_id: str
    origin: str = "generated"

    def __post_init__(self) -> None:
        question = _normalize(self.question)
        answer = _normalize(self.answer)
        if not question or not answer:
            raise ValueError("question and answer must be nonempty")
        for marker in (HUMAN_MARKER, ASSISTANT_MARKER):
            if marker in question or marker in answer:
                raise ValueError(f"pair contains marker substring {marker!r}")
        if self.origin not in ("generated", "feedback"):
            raise ValueError(f"unknown origin {self.origin!r}")
        object.__setattr__(self, "question", question)
        object.__setattr__(self, "answer", answer)

    @property
    def key(self) -> tuple[str, str]:
        return (self.question, self.answer)


@dataclass(frozen=True)
class DatasetBundle:
    train: tuple[QAPair, ...]
    test: tuple[QAPair, ...]
    split_seed: int
    split_ratio: float


def chunk_text(doc_id: str, text: str, max_chars: int = DEFAULT_MAX_CHARS,
               overlap_chars: int = DEFAULT_OVERLAP_CHARS) -> list[str]:
    """Split text into overlapping chunks covering it in order.

    Consecutive chunks share exactly `overlap_chars` characters (the
    final chunk may be shorter than `max_chars`). Non-final splits back
    up to the nearest whitespace within a 32-char window when that still
    leaves the chunk longer than the overlap; otherwise the split is a
    hard cut at `max_chars`. Concatenating chunks with the overlap
    removed reproduces the input byte for byte.
    """
    if max_chars <= overlap_chars or overlap_chars < 0:
        raise ValueError("require max_chars > overlap_chars >= 0")
    if not text:
        return []
    chunks = []
    start = 0
    while True:
        end = min(start + max_chars, len(text))
        if end == len(text):
            chunks.append(text[start:end])
            break
        floor = max(start + overlap_chars + 1, end - _WHITESPACE_LOOKBACK)
        cut = end
        while cut > floor and not text[cut - 1].isspace():
            cut -= 1
        if cut > floor or (cut == floor and text[cut - 1].isspace()):
            end = cut
        chunks.append(text[start:end])
        start = end - overlap_chars
    return chunks


@dataclass
class QAGenerationResult:
    pairs: list[QAPair] = field(default_factory=list)
    discarded: int = 0


def qa_prompt(chunk: str) -> str:
    return QA_PROMPT_TEMPLATE.format(chunk=chunk)


def generate_qa(chunk: str, generator, pairs_per_chunk: int,
                source_doc_id: str = "") -> QAGenerationResult:
    """Ask the generator for pairs about one chunk and parse its output.

    Lines that do not match the marker grammar (or violate pair
    invariants) are counted in `discarded`, not raised. Zero parseable
    pairs is a valid, empty result; provider failures propagate.
    """
    if pairs_per_chunk < 1:
        raise ValueError("pairs_per_chunk must be >= 1")
    output = generator.generate(qa_prompt(chunk))
    result = QAGenerationResult()
    for line in output.splitlines():
        line = line.strip()
        if not line:
            continue
        if len(result.pairs) == pairs_per_chunk:
            break
        match = _LINE_RE.match(line)
        if match is None:
            result.discarded += 1
            continue
        try:
            pair = QAPair(match["question"], match["answer"],
                          source_doc_id=source_doc_id)
        except ValueError:
            result.discarded += 1
            continue
        result.pairs.append(pair)
    return result


def split_dataset(pairs: list[QAPair], ratio: float,
                  seed: int) -> DatasetBundle:
    """Deduplicate, shuffle deterministically, and split train/test.

    The first ceil(ratio * N) shuffled pairs go to train.
    """
    if not 0 < ratio < 1:
        raise ValueError("ratio must be strictly between 0 and 1")
    unique: dict[tuple[str, str], QAPair] = {}
    for pair in pairs:
        unique.setdefault(pair.key, pair)
    deduped = list(unique.values())
    if len(deduped) < 2:
        raise ValueError("need at least 2 distinct pairs to split")
    SplitMix64(seed).shuffle(deduped)
    cut = math.ceil(ratio * len(deduped))
    return DatasetBundle(
        train=tuple(deduped[:cut]),
        test=tuple(deduped[cut:]),
        split_seed=seed,
        split_ratio=ratio,
    )


def format_guanaco_line(pair: QAPair) -> str:
    return f"{HUMAN_MARKER} {pair.question} {ASSISTANT_MARKER} {pair.answer}"


def export_guanaco(bundle: DatasetBundle, base_path: Path | str) -> None:
    """Write `<base>.train.txt` and `<base>.test.txt`, one line per pair."""
    base = Path(base_path)
    for split_name, pairs in (("train", bundle.train),
                              ("test", bundle.test)):
        lines = [format_guanaco_line(p) for p in pairs]
        body = "\n".join(lines) + ("\n" if lines else "")
        target = base.with_name(f"{base.name}.{split_name}.txt")
        target.write_text(body, encoding="utf-8")


def parse_guanaco(path: Path | str,
                  source_doc_id: str = "") -> list[QAPair]:
    """Inverse of export for one split file; malformed lines raise."""
    pairs = []
    for number, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        match = _LINE_RE.match(line)
        if match is None:
            raise ValueError(f"line {number} does not match the pair grammar")
        pairs.append(QAPair(match["question"], match["answer"],
                            source_doc_id=source_doc_id))
    return pairs


def merge_feedback(bundle: DatasetBundle, feedback: list[FeedbackRecord],
                   min_rating: int) -> DatasetBundle:
    """Append well-rated feedback to the train split, deduplicated.

    Records below `min_rating` are ignored; duplicates of any existing
    train or test pair (by question and answer) are dropped.
    """
    seen = {p.key for p in bundle.train} | {p.key for p in bundle.test}
    additions = []
    for record in feedback:
        if record.rating < min_rating:
            continue
        try:
            pair = QAPair(record.question, record.final_answer,
                          source_doc_id="feedback", origin="feedback")
        except ValueError:
            continue
        if pair.key in seen:
            continue
        seen.add(pair.key)
        additions.append(pair)
    if not additions:
        return bundle
    return DatasetBundle(
        train=bundle.train + tuple(additions),
        test=bundle.test,
        split_seed=bundle.split_seed,
        split_ratio=bundle.split_ratio,
    )
