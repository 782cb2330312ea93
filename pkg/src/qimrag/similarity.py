"""Influence-score kernels: cosine similarity, quantization, and QIM.

The quantized influence measure (QIM) scores how strongly a reference array
tracks a query array: the query is binned, and the reference's per-bin means
are compared against its global mean, each squared deviation weighted by the
squared bin population. Large, coherent bins dominate, which is what lets QIM
separate near-duplicates that cosine similarity saturates on.

All functions are pure and accept any 1-D array-like of reals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    """Inputs that must share a length do not."""


class ZeroNormError(ValueError):
    """A vector with zero Euclidean norm where a direction is required."""


def _as_vector(values, name: str = "vector") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors, in [-1, 1].

    Uses dot(a, b) / sqrt(dot(a, a) * dot(b, b)) so that bit-identical
    inputs yield exactly 1.0.

    Raises:
        DimensionMismatchError: lengths differ.
        ZeroNormError: either vector has zero norm (degenerate embedding).
    """
    va = _as_vector(a, "a")
    vb = _as_vector(b, "b")
    if va.shape != vb.shape:
        raise DimensionMismatchError(
            f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}"
        )
    norm_aa = float(np.dot(va, va))
    norm_bb = float(np.dot(vb, vb))
    if norm_aa == 0.0 or norm_bb == 0.0:
        raise ZeroNormError("cosine similarity undefined for zero-norm vector")
    product = norm_aa * norm_bb
    if 0.0 < product < math.inf:
        denom = math.sqrt(product)
    else:
        # norm_aa * norm_bb left the normal range; split the square roots.
        denom = math.sqrt(norm_aa) * math.sqrt(norm_bb)
    return float(np.dot(va, vb)) / denom


def cosine_distance(a, b) -> float:
    """1 - cosine_similarity(a, b); 0 for identical directions."""
    return 1.0 - cosine_similarity(a, b)


@dataclass(frozen=True)
class BinPartition:
    """Equal-width binning of a real array.

    Attributes:
        q_requested: nominal bin count.
        edges: q_requested + 1 ascending bin edges.
        labels: per-element bin index in [0, q_requested).
        occupied: sorted indices of bins that received at least one element.
    """

    q_requested: int
    edges: np.ndarray
    labels: np.ndarray
    occupied: tuple[int, ...]

    @property
    def n_occupied(self) -> int:
        return len(self.occupied)


def quantize(x, q: int, scheme: str = "width") -> BinPartition:
    """Partition x into q bins.

    The default scheme is equal-width bins over [min(x), max(x)]: element v
    maps to floor((v - min) * q / (max - min)), with max(x) clamped into the
    last bin. A constant array maps entirely to bin 0 (edges are synthesized
    with unit width so they stay ascending). scheme="quantile" instead places
    edges at equally spaced quantiles, trading uniform widths for more evenly
    populated bins.
    """
    vx = _as_vector(x, "x")
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if scheme not in ("width", "quantile"):
        raise ValueError(f"unknown binning scheme {scheme!r}")

    lo = float(vx.min())
    hi = float(vx.max())
    if scheme == "quantile" and hi > lo:
        edges = np.quantile(vx, np.linspace(0.0, 1.0, q + 1))
        # Collapsed quantiles would break ascending edges; nudge duplicates.
        edges = np.maximum.accumulate(edges)
        for i in range(1, q + 1):
            if edges[i] <= edges[i - 1]:
                edges[i] = np.nextafter(edges[i - 1], np.inf)
        labels = np.clip(np.searchsorted(edges, vx, side="right") - 1, 0, q - 1)
    elif hi > lo:
        span = hi - lo
        edges = lo + np.arange(q + 1, dtype=np.float64) * (span / q)
        edges[-1] = hi
        labels = np.floor((vx - lo) * q / span).astype(np.int64)
        np.clip(labels, 0, q - 1, out=labels)
    else:
        edges = lo + np.arange(q + 1, dtype=np.float64)
        labels = np.zeros(vx.shape[0], dtype=np.int64)

    occupied = tuple(int(i) for i in np.unique(labels))
    return BinPartition(q_requested=q, edges=edges, labels=labels, occupied=occupied)


@dataclass(frozen=True)
class PartitionStats:
    """Per-bin and global statistics of y under a partition of x.

    sigma_y is the population standard deviation (divisor n). pi_1 is the
    global proportion of ones and is only set when y is binary.
    """

    bin_counts: np.ndarray
    bin_means: np.ndarray
    occupied: tuple[int, ...]
    y_global_mean: float
    sigma_y: float
    n: int
    pi_1: float | None


def _group_stats(labels: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Counts and sums of y grouped by label (dense over 0..max(label))."""
    counts = np.bincount(labels)
    sums = np.bincount(labels, weights=y)
    return counts, sums


def partition_stats(labels, y) -> PartitionStats:
    """Compute the statistics QIM and the influence scores are built from.

    Only occupied bins appear; `occupied` carries the original label values.
    """
    vy = _as_vector(y, "y")
    larr = np.asarray(labels)
    if larr.shape[0] != vy.shape[0]:
        raise DimensionMismatchError(
            f"labels length {larr.shape[0]} != y length {vy.shape[0]}"
        )
    # Arbitrary label values are allowed; compact them for bincount.
    uniques, dense = np.unique(larr, return_inverse=True)
    counts, sums = _group_stats(dense, vy)
    n = int(vy.shape[0])
    global_mean = float(vy.mean())
    sigma = float(np.sqrt(np.mean((vy - global_mean) ** 2)))
    is_binary = bool(np.all((vy == 0.0) | (vy == 1.0)))
    return PartitionStats(
        bin_counts=counts,
        bin_means=sums / counts,
        occupied=tuple(int(u) for u in uniques),
        y_global_mean=global_mean,
        sigma_y=sigma,
        n=n,
        pi_1=global_mean if is_binary else None,
    )


def iscore_general(labels, y) -> float:
    """General influence score: sum over bins of n_j^2 (mean_j - mean)^2."""
    stats = partition_stats(labels, y)
    dev = stats.bin_means - stats.y_global_mean
    return float(np.sum(stats.bin_counts.astype(np.float64) ** 2 * dev**2))


def iscore_binary(labels, y) -> float:
    """Binary influence score: sum over bins of (n1_j - n_j * pi_1)^2.

    Algebraically equal to iscore_general when y takes values in {0, 1}.
    """
    vy = _as_vector(y, "y")
    if not np.all((vy == 0.0) | (vy == 1.0)):
        raise ValueError("iscore_binary requires y values in {0, 1}")
    larr = np.asarray(labels)
    if larr.shape[0] != vy.shape[0]:
        raise DimensionMismatchError(
            f"labels length {larr.shape[0]} != y length {vy.shape[0]}"
        )
    _, dense = np.unique(larr, return_inverse=True)
    counts, ones = _group_stats(dense, vy)
    pi_1 = float(vy.mean())
    return float(np.sum((ones - counts * pi_1) ** 2))


def normalized_iscore(labels, y) -> float:
    """Influence score normalized by n * variance(y) (population variance).

    Raises:
        ValueError: y has zero variance.
    """
    stats = partition_stats(labels, y)
    if stats.sigma_y == 0.0:
        raise ValueError("normalized influence score undefined for constant y")
    score = iscore_general(labels, y)
    return score / (stats.n * stats.sigma_y**2)


def qim(x, y, q: int = 16, scheme: str = "width") -> float:
    """Quantized influence measure of reference y against query x.

    Bins x into q equal-width intervals, then returns

        sum_over_occupied_bins((mean_j - global_mean)^2 * N_j^2)
        -------------------------------------------------------
                   (occupied bin count) * sigma_y

    with sigma_y the population standard deviation of y. Empty bins
    contribute nothing and do not enter the denominator. A constant y has a
    provably zero numerator; the 0/0 is resolved to 0.0 (no influence
    signal).
    """
    vx = _as_vector(x, "x")
    vy = _as_vector(y, "y")
    if vx.shape != vy.shape:
        raise DimensionMismatchError(
            f"length mismatch: x has {vx.shape[0]}, y has {vy.shape[0]}"
        )
    part = quantize(vx, q, scheme=scheme)
    stats = partition_stats(part.labels, vy)
    if stats.sigma_y == 0.0:
        return 0.0
    dev = stats.bin_means - stats.y_global_mean
    numerator = float(np.sum(dev**2 * stats.bin_counts.astype(np.float64) ** 2))
    return numerator / (len(stats.occupied) * stats.sigma_y)
