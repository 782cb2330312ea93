"""User feedback records and their append-only NDJSON log."""

from __future__ import annotations

import json
import os
import time
import uuid
from dataclasses import asdict, dataclass
from pathlib import Path


@dataclass(frozen=True)
class FeedbackRecord:
    id: str
    question: str
    final_answer: str
    reference_chunk_ids: tuple[str, ...]
    rating: int
    comment: str | None
    timestamp: float  # UTC seconds

    def __post_init__(self) -> None:
        if not isinstance(self.rating, int) or not 1 <= self.rating <= 5:
            raise ValueError("rating must be an integer in [1, 5]")
        if not self.question:
            raise ValueError("question must be nonempty")
        object.__setattr__(self, "reference_chunk_ids",
                           tuple(self.reference_chunk_ids))


def make_feedback(question: str, final_answer: str,
                  reference_chunk_ids: list[str], rating: int,
                  comment: str | None = None,
                  timestamp: float | None = None) -> FeedbackRecord:
    return FeedbackRecord(
        id=uuid.uuid4().hex,
        question=question,
        final_answer=final_answer,
        reference_chunk_ids=tuple(reference_chunk_ids),
        rating=rating,
        comment=comment,
        timestamp=time.time() if timestamp is None else timestamp,
    )


class FeedbackLog:
    """Append-only newline-delimited JSON log.

    Appends are fsynced before returning, so an acknowledged record
    survives a crash. Timestamps are clamped to be non-decreasing in
    file order.
    """

    def __init__(self, path: Path | str) -> None:
        self.path = Path(path)
        self._last_timestamp = 0.0
        if self.path.exists():
            records = self.records()
            if records:
                self._last_timestamp = records[-1].timestamp

    def append(self, record: FeedbackRecord) -> FeedbackRecord:
        if record.timestamp < self._last_timestamp:
            record = FeedbackRecord(**{
                **asdict(record), "timestamp": self._last_timestamp,
            })
        line = json.dumps(asdict(record), ensure_ascii=False,
                          sort_keys=True)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "ab") as handle:
            handle.write(line.encode("utf-8") + b"\n")
            handle.flush()
            os.fsync(handle.fileno())
        self._last_timestamp = record.timestamp
        return record

    def records(self) -> list[FeedbackRecord]:
        if not self.path.exists():
            return []
        out = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            raw = json.loads(line)
            raw["reference_chunk_ids"] = tuple(raw["reference_chunk_ids"])
            out.append(FeedbackRecord(**raw))
        return out

    def __len__(self) -> int:
        return len(self.records())
