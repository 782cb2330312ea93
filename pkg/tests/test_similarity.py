import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qimrag.similarity import (
    BinPartition,
    DimensionMismatchError,
    ZeroNormError,
    cosine_distance,
    cosine_similarity,
    iscore_binary,
    iscore_general,
    normalized_iscore,
    partition_stats,
    qim,
    quantize,
)


def brute_force_qim(x, y, q):
    """Independent QIM: explicit bin member lists, scalar Python arithmetic.

    Shares only the documented bin-assignment rule with the library
    implementation; every statistic is recomputed from materialized bins.
    """
    n = len(x)
    lo, hi = min(x), max(x)
    bins = {}
    for v, yv in zip(x, y):
        if hi > lo:
            idx = min(math.floor((v - lo) * q / (hi - lo)), q - 1)
        else:
            idx = 0
        bins.setdefault(idx, []).append(yv)
    global_mean = sum(y) / n
    sigma = math.sqrt(sum((v - global_mean) ** 2 for v in y) / n)
    if sigma == 0.0:
        return 0.0
    numerator = 0.0
    for members in bins.values():
        local_mean = sum(members) / len(members)
        numerator += (local_mean - global_mean) ** 2 * len(members) ** 2
    return numerator / (len(bins) * sigma)


finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestCosine:
    def test_identical_vectors(self):
        assert cosine_similarity([1, 2, 3], [1, 2, 3]) == 1.0

    def test_antiparallel(self):
        assert cosine_similarity([1, 0], [-1, 0]) == -1.0

    def test_orthogonal_plus_diagonal(self):
        assert cosine_similarity([1, 0], [1, 1]) == pytest.approx(1 / math.sqrt(2))

    def test_distance_complements_similarity(self):
        assert cosine_distance([1, 0], [1, 0]) == 0.0
        assert cosine_distance([1, 0], [-1, 0]) == 2.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            cosine_similarity([1, 2], [1, 2, 3])

    def test_zero_norm(self):
        with pytest.raises(ZeroNormError):
            cosine_similarity([0, 0], [1, 2])

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            cosine_similarity([1, float("nan")], [1, 2])

    @given(st.lists(finite_floats, min_size=2, max_size=32), st.data())
    def test_bounds_and_self_similarity(self, a, data):
        if sum(v * v for v in a) < 1e-200:
            return
        b = data.draw(st.lists(finite_floats, min_size=len(a), max_size=len(a)))
        if sum(v * v for v in b) < 1e-200:
            return
        c = cosine_similarity(a, b)
        assert -1 - 1e-12 <= c <= 1 + 1e-12
        assert abs(cosine_similarity(a, a) - 1.0) <= 1e-12

    @given(
        st.lists(finite_floats, min_size=2, max_size=16),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_positive_scale_invariance(self, a, scale):
        if sum(v * v for v in a) < 1e-200:
            return
        b = [v + 1.0 for v in a]
        if sum(v * v for v in b) < 1e-200:
            return
        scaled = [scale * v for v in a]
        assert cosine_similarity(scaled, b) == pytest.approx(
            cosine_similarity(a, b), rel=1e-9, abs=1e-12
        )


class TestQuantize:
    def test_two_bins(self):
        part = quantize([1, 1, 2, 2], 2)
        assert list(part.labels) == [0, 0, 1, 1]
        assert part.edges == pytest.approx([1.0, 1.5, 2.0])
        assert part.occupied == (0, 1)

    def test_constant_input_degenerates_to_one_bin(self):
        part = quantize([5, 5, 5], 4)
        assert list(part.labels) == [0, 0, 0]
        assert part.occupied == (0,)
        assert np.all(np.diff(part.edges) > 0)

    def test_four_bins_direct_edge_arithmetic(self):
        part = quantize([0, 0.24, 0.5, 0.99], 4)
        assert list(part.labels) == [0, 0, 2, 3]

    def test_max_clamps_into_last_bin(self):
        part = quantize([0.0, 1.0], 3)
        assert part.labels[-1] == 2

    def test_invalid_q(self):
        with pytest.raises(ValueError):
            quantize([1, 2], 0)

    def test_quantile_scheme_balances_counts(self):
        x = np.concatenate([np.linspace(0, 1, 90), np.linspace(9, 10, 10)])
        part = quantize(x, 4, scheme="quantile")
        counts = np.bincount(part.labels, minlength=4)
        assert counts.max() <= 40  # equal-width would put 90 in one bin

    @given(st.lists(finite_floats, min_size=1, max_size=64), st.integers(1, 16))
    def test_every_element_gets_exactly_one_bin(self, x, q):
        part = quantize(x, q)
        assert len(part.labels) == len(x)
        assert np.all(part.labels >= 0) and np.all(part.labels < q)
        assert part.occupied == tuple(sorted(set(int(v) for v in part.labels)))
        assert len(part.edges) == q + 1


class TestPartitionStats:
    def test_counts_sum_to_n(self):
        stats = partition_stats([0, 0, 1, 1, 1], [1, 2, 3, 4, 5])
        assert int(stats.bin_counts.sum()) == stats.n == 5

    def test_weighted_local_means_recover_global(self):
        rng = np.random.RandomState(3)
        y = rng.rand(50)
        labels = rng.randint(0, 5, 50)
        stats = partition_stats(labels, y)
        weighted = float(np.sum(stats.bin_counts * stats.bin_means)) / stats.n
        assert weighted == pytest.approx(stats.y_global_mean, rel=1e-9)

    def test_pi_1_only_for_binary(self):
        assert partition_stats([0, 1], [0, 1]).pi_1 == 0.5
        assert partition_stats([0, 1], [0.3, 1.0]).pi_1 is None


class TestIscoreGeneral:
    def test_matching_split(self):
        assert iscore_general([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(2.0)

    def test_single_partition_element(self):
        assert iscore_general([7, 7, 7], [1, 5, 9]) == pytest.approx(0.0)

    def test_singleton_bins(self):
        assert iscore_general([0, 1, 2], [1, 2, 3]) == pytest.approx(2.0)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            iscore_general([0, 1], [1, 2, 3])


class TestIscoreBinary:
    def test_matching_split(self):
        assert iscore_binary([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(2.0)

    def test_all_zeros(self):
        assert iscore_binary([0, 1, 0], [0, 0, 0]) == 0.0

    def test_two_singletons(self):
        assert iscore_binary([0, 1], [1, 0]) == pytest.approx(0.5)

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            iscore_binary([0, 1], [0.5, 1.0])

    @given(
        st.lists(st.integers(0, 3), min_size=2, max_size=40).flatmap(
            lambda labels: st.tuples(
                st.just(labels),
                st.lists(
                    st.sampled_from([0.0, 1.0]),
                    min_size=len(labels),
                    max_size=len(labels),
                ),
            )
        )
    )
    def test_agrees_with_general_form(self, labels_y):
        labels, y = labels_y
        assert iscore_binary(labels, y) == pytest.approx(
            iscore_general(labels, y), rel=1e-9, abs=1e-12
        )


class TestNormalizedIscore:
    def test_matching_split(self):
        assert normalized_iscore([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(2.0)

    def test_single_partition_element(self):
        assert normalized_iscore([1, 1, 1], [0, 1, 2]) == 0.0

    def test_singleton_bins(self):
        assert normalized_iscore([0, 1, 2], [1, 2, 3]) == pytest.approx(1.0)

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError):
            normalized_iscore([0, 1], [3, 3])


class TestQim:
    def test_perfect_two_bin_split(self):
        assert qim([1, 1, 2, 2], [0, 0, 1, 1], 2) == pytest.approx(2.0)

    def test_constant_y_is_zero(self):
        assert qim([1, 2, 3, 4], [5, 5, 5, 5], 2) == 0.0

    def test_threefold_replication_scales_by_nine(self):
        x = np.repeat([1, 1, 2, 2], 3)
        y = np.repeat([0, 0, 1, 1], 3)
        assert qim(x, y, 2) == pytest.approx(18.0)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            qim([1, 2, 3], [1, 2], 2)

    def test_oracle_agreement_bulk(self):
        rng = np.random.RandomState(20240817)
        for trial in range(1000):
            n = rng.randint(1, 65)
            x = rng.rand(n)
            y = rng.rand(n)
            q = int(rng.choice([2, 4, 8]))
            expected = brute_force_qim(list(x), list(y), q)
            assert qim(x, y, q) == pytest.approx(expected, rel=1e-9, abs=1e-12)

    @settings(max_examples=60)
    @given(
        st.lists(finite_floats, min_size=2, max_size=24).flatmap(
            lambda x: st.tuples(
                st.just(x),
                st.lists(finite_floats, min_size=len(x), max_size=len(x)),
            )
        ),
        st.integers(1, 8),
        st.integers(2, 5),
    )
    def test_replication_law(self, xy, q, m):
        x, y = xy
        base = qim(x, y, q)
        replicated = qim(np.repeat(x, m), np.repeat(y, m), q)
        assert replicated == pytest.approx(m * m * base, rel=1e-9, abs=1e-12)

    @settings(max_examples=60)
    @given(
        st.lists(finite_floats, min_size=2, max_size=24).flatmap(
            lambda x: st.tuples(
                st.just(x),
                st.lists(finite_floats, min_size=len(x), max_size=len(x)),
                st.permutations(range(len(x))),
            )
        ),
        st.integers(1, 8),
    )
    def test_joint_permutation_invariance(self, xyp, q):
        x, y, perm = xyp
        xp = [x[i] for i in perm]
        yp = [y[i] for i in perm]
        assert qim(xp, yp, q) == pytest.approx(qim(x, y, q), rel=1e-9, abs=1e-12)

    @given(
        st.lists(finite_floats, min_size=1, max_size=32).flatmap(
            lambda x: st.tuples(
                st.just(x),
                st.lists(finite_floats, min_size=len(x), max_size=len(x)),
            )
        ),
        st.integers(1, 8),
    )
    def test_nonnegative(self, xy, q):
        x, y = xy
        assert qim(x, y, q) >= 0.0

    @settings(max_examples=60)
    @given(
        st.lists(finite_floats, min_size=2, max_size=24).flatmap(
            lambda x: st.tuples(
                st.just(x),
                st.lists(finite_floats, min_size=len(x), max_size=len(x)),
            )
        ),
        st.integers(1, 8),
    )
    def test_decomposition_into_iscore(self, xy, q):
        x, y = xy
        part = quantize(x, q)
        sigma = partition_stats(part.labels, y).sigma_y
        if sigma == 0.0:
            assert qim(x, y, q) == 0.0
        else:
            expected = iscore_general(part.labels, y) / (part.n_occupied * sigma)
            assert qim(x, y, q) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_bin_partition_is_frozen():
    part = quantize([1, 2, 3], 2)
    assert isinstance(part, BinPartition)
    with pytest.raises(AttributeError):
        part.q_requested = 5
