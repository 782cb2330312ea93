"""Counter-based deterministic random numbers (splitmix64).

Everything downstream that needs randomness (perturbation sweeps, hash
embeddings, dataset shuffles) draws from this module so that a fixed seed
reproduces identical streams on every platform. The generator is the
canonical splitmix64: 64-bit state, golden-ratio increment, two murmur-style
finalizer multiplies.
"""

from __future__ import annotations

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """splitmix64 stream seeded with a 64-bit value."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform double in [0, 1) using the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def floats(self, count: int) -> list[float]:
        return [self.next_float() for _ in range(count)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]


def keyed_stream(seed: int, *subkeys: int) -> SplitMix64:
    """Derive an independent substream from (seed, subkeys...).

    Each subkey is avalanched and folded into the running state, so streams
    for distinct key tuples are decorrelated even when the raw integers are
    small and adjacent (trial 0, 1, 2, ...).
    """
    state = seed & _MASK64
    for key in subkeys:
        state = mix64(state ^ mix64(key & _MASK64))
    return SplitMix64(state)
