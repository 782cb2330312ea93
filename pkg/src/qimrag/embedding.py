"""Deterministic text embeddings for offline retrieval work.

No model weights: each token hashes to a seeded random direction and the
token directions are summed and normalized. The result is stable across
processes and platforms, which is what the retrieval tests need.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .rng import SplitMix64

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# maximal runs of alphanumerics; underscore and punctuation separate tokens
_TOKEN_RE = re.compile(r"[^\W_]+")


def _fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Embedding:
    """A fixed-dimension real vector; degenerate means no tokens survived."""

    values: np.ndarray = field(repr=False)
    degenerate: bool

    def __post_init__(self) -> None:
        self.values.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.values.shape[0]


def _token_direction(token: str, dimension: int) -> np.ndarray:
    stream = SplitMix64(_fnv1a_64(token.encode("utf-8")))
    return np.array(
        [2.0 * u - 1.0 for u in stream.floats(dimension)], dtype=np.float64
    )


def det_embed(text: str, dimension: int) -> Embedding:
    """Embed text as the normalized sum of per-token hashed directions.

    Tokens are lowercased alphanumeric runs. Each token seeds its own
    splitmix64 stream via a 64-bit FNV-1a hash of its UTF-8 bytes, and the
    stream's first `dimension` floats map onto [-1, 1]. Texts with no
    tokens produce the zero vector, flagged degenerate.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    tokens = tokenize(text)
    if not tokens:
        return Embedding(np.zeros(dimension, dtype=np.float64), True)
    total = np.zeros(dimension, dtype=np.float64)
    for token in tokens:
        total += _token_direction(token, dimension)
    norm = float(np.sqrt(np.dot(total, total)))
    if norm == 0.0 or not np.isfinite(norm):
        return Embedding(np.zeros(dimension, dtype=np.float64), True)
    return Embedding(total / norm, False)
