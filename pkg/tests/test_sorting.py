import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noisy_pooled.greedy import ranking_order
from noisy_pooled.sorting import bitonic_sort, comparator_count


def reference(scores):
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


@pytest.mark.parametrize("size,count", [(1, 0), (2, 1), (4, 6), (8, 24), (16, 80), (1024, 28160)])
def test_comparator_count(size, count):
    assert comparator_count(size) == count


def test_comparator_count_rejects_non_power():
    with pytest.raises(ValueError):
        comparator_count(6)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 7, 8, 9, 33])
def test_executed_comparators(n):
    _, executed = bitonic_sort(np.arange(n, dtype=float), return_count=True)
    size = 1 << max(0, (n - 1).bit_length())
    assert executed == comparator_count(size)


def test_four_wires_six_comparators():
    _, executed = bitonic_sort([0.3, 0.1, 0.4, 0.2], return_count=True)
    assert executed == 6


def test_sorted_input_identity():
    assert bitonic_sort(np.arange(10, 0, -1, dtype=float)).tolist() == list(range(10))


def test_empty_input():
    assert bitonic_sort(np.zeros(0)).tolist() == []


def test_thousand_random_vectors():
    gen = np.random.default_rng(0)
    for _ in range(1000):
        n = int(gen.integers(1, 70))
        scores = gen.integers(-5, 6, size=n).astype(float) if gen.random() < 0.5 else gen.normal(size=n)
        assert bitonic_sort(scores).tolist() == reference(scores.tolist())


def test_negative_infinity_scores_beat_padding():
    scores = np.array([-np.inf, 1.0, -np.inf])
    assert bitonic_sort(scores).tolist() == [1, 0, 2]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=32), max_size=80))
def test_matches_comparison_sort(values):
    scores = np.array(values, dtype=float)
    assert bitonic_sort(scores).tolist() == reference(values)
    assert np.array_equal(bitonic_sort(scores), ranking_order(scores, "sort"))
