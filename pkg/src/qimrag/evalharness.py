"""Answer-quality evaluation: embedding cosine per document, mean and
sample standard deviation over the set.

Aggregates are computed unrounded; rounding (3 decimals, half-up) happens
only at the reporting layer.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .providers import DetEmbedder
from .similarity import cosine_similarity

EMBED_DIMENSION = 64


class DegenerateEmbeddingError(ValueError):
    """A text produced the zero embedding and cannot be scored."""


@dataclass(frozen=True)
class EvalRow:
    doc_id: str
    score: float

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id must be nonempty")
        if not -1.0 <= self.score <= 1.0:
            raise ValueError("score must lie in [-1, 1]")


@dataclass(frozen=True)
class EvalSummary:
    rows: tuple[EvalRow, ...]
    ave: float
    sd: float


def score_pair(answer_text: str, reference_text: str, embedder=None,
               dimension: int = EMBED_DIMENSION) -> float:
    """Cosine similarity between the embeddings of answer and reference."""
    embedder = embedder or DetEmbedder()
    answer = embedder.embed(answer_text, dimension)
    reference = embedder.embed(reference_text, dimension)
    if answer.degenerate:
        raise DegenerateEmbeddingError("answer text has no tokens")
    if reference.degenerate:
        raise DegenerateEmbeddingError("reference text has no tokens")
    return cosine_similarity(answer.values, reference.values)


def aggregate(rows: list[EvalRow]) -> EvalSummary:
    """Mean and sample standard deviation (divisor N-1), unrounded."""
    if len(rows) < 2:
        raise ValueError("aggregate needs at least 2 rows")
    scores = np.array([row.score for row in rows], dtype=np.float64)
    return EvalSummary(
        rows=tuple(rows),
        ave=float(np.mean(scores)),
        sd=float(np.std(scores, ddof=1)),
    )


def round_half_up(value: float, places: int = 3) -> float:
    """Decimal rounding with ties away from zero (0.0625 -> 0.063)."""
    exponent = Decimal(1).scaleb(-places)
    return float(
        Decimal(repr(float(value))).quantize(exponent, rounding=ROUND_HALF_UP)
    )


def _format_score(value: float, places: int = 3) -> str:
    exponent = Decimal(1).scaleb(-places)
    return str(
        Decimal(repr(float(value))).quantize(exponent, rounding=ROUND_HALF_UP)
    )


def write_report(summary: EvalSummary, path: Path | str) -> None:
    """CSV of doc_id,score rows with an ave/sd footer, all 3-decimal."""
    lines = ["doc_id,score"]
    for row in summary.rows:
        lines.append(f"{row.doc_id},{_format_score(row.score)}")
    lines.append(f"ave,{_format_score(summary.ave)}")
    lines.append(f"sd,{_format_score(summary.sd)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _doc_sort_key(path: Path):
    return (0, int(path.stem)) if path.stem.isdigit() else (1, path.stem)


def evaluate_directories(answers_dir: Path | str, refs_dir: Path | str,
                         dimension: int = EMBED_DIMENSION) -> EvalSummary:
    """Score each answers/<id>.txt against refs/<id>.txt and aggregate."""
    answers_dir = Path(answers_dir)
    refs_dir = Path(refs_dir)
    rows = []
    answer_paths = sorted(answers_dir.glob("*.txt"), key=_doc_sort_key)
    if not answer_paths:
        raise FileNotFoundError(f"no .txt answers under {answers_dir}")
    for answer_path in answer_paths:
        ref_path = refs_dir / answer_path.name
        if not ref_path.exists():
            raise FileNotFoundError(f"missing reference {ref_path}")
        score = score_pair(
            answer_path.read_text(encoding="utf-8"),
            ref_path.read_text(encoding="utf-8"),
            dimension=dimension,
        )
        rows.append(EvalRow(answer_path.stem, score))
    return aggregate(rows)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="evalharness",
        description="Score answer files against reference files by "
                    "embedding cosine similarity.",
    )
    parser.add_argument("--answers", required=True,
                        help="directory of <doc_id>.txt answer files")
    parser.add_argument("--refs", required=True,
                        help="directory of matching reference files")
    parser.add_argument("--out", required=True, help="report CSV path")
    parser.add_argument("--dimension", type=int, default=EMBED_DIMENSION)
    args = parser.parse_args(argv)
    summary = evaluate_directories(args.answers, args.refs,
                                   dimension=args.dimension)
    write_report(summary, args.out)
    print(f"scored {len(summary.rows)} documents: "
          f"ave {_format_score(summary.ave)}, sd {_format_score(summary.sd)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
