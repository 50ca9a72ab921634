import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment

from posetrack import DEFAULT_SKELETON, SimilarityMatrix, build_similarity, gate, hungarian_assign, oks
from posetrack.association import associate

from helpers import figure, random_pose


def brute_force_max(w: np.ndarray) -> float:
    """Exhaustive maximum over all injective row/column pairings."""
    n, m = w.shape
    if n > m:
        return brute_force_max(w.T)
    return max(math.fsum(w[i, c] for i, c in enumerate(perm))
               for perm in itertools.permutations(range(m), n))


def total(w, pairs):
    return math.fsum(w[i, j] for i, j in pairs)


def test_identity_dominant():
    w = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert hungarian_assign(w) == [(0, 0), (1, 1)]


def test_three_by_three_example():
    w = np.array([[2, 9, 1], [9, 8, 3], [1, 3, 0]], dtype=float)
    pairs = hungarian_assign(w)
    assert pairs == [(0, 1), (1, 0), (2, 2)]
    assert total(w, pairs) == 18 == brute_force_max(w)


def test_rectangular():
    w = np.array([[0.1, 0.9, 0.3], [0.8, 0.7, 0.2]])
    pairs = hungarian_assign(w)
    assert pairs == [(0, 1), (1, 0)]
    tall = hungarian_assign(w.T)
    assert tall == [(0, 1), (1, 0)]


def test_empty_and_invalid():
    assert hungarian_assign(np.zeros((0, 3))) == []
    with pytest.raises(ValueError):
        hungarian_assign(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        hungarian_assign(np.zeros(3))


def test_ties_resolve_deterministically():
    assert hungarian_assign(np.ones((3, 3))) == [(0, 0), (1, 1), (2, 2)]
    assert hungarian_assign(np.ones((2, 4))) == [(0, 0), (1, 1)]
    assert hungarian_assign(np.ones((4, 2))) == [(0, 0), (1, 1)]


def test_matches_exhaustive_search_on_small_matrices():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n, m = rng.integers(1, 6, 2)
        w = rng.random((n, m)) if rng.random() < 0.5 else rng.integers(0, 4, (n, m)).astype(float)
        assert total(w, hungarian_assign(w)) == brute_force_max(w)


def test_agrees_with_scipy_on_larger_matrices():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n, m = rng.integers(1, 25, 2)
        w = rng.random((n, m))
        r, c = linear_sum_assignment(w, maximize=True)
        assert total(w, hungarian_assign(w)) == pytest.approx(w[r, c].sum(), rel=1e-12)


matrices = st.integers(1, 6).flatmap(lambda n: st.integers(1, 6).flatmap(
    lambda m: st.lists(st.floats(0, 1, allow_nan=False), min_size=n * m, max_size=n * m)
    .map(lambda v: np.array(v).reshape(n, m))))


@settings(max_examples=150, deadline=None)
@given(matrices, st.floats(0, 1))
def test_partition_invariant(w, threshold):
    m = SimilarityMatrix([f"t{i}" for i in range(w.shape[0])], list(range(w.shape[1])), w)
    res = gate(hungarian_assign(m), m, threshold)
    rows = [a for a, _, _ in res.matches] + res.unmatched_tracks
    cols = [b for _, b, _ in res.matches] + res.unmatched_detections
    assert sorted(rows) == sorted(m.row_ids)
    assert sorted(cols) == sorted(m.col_ids)
    assert all(wt >= threshold for _, _, wt in res.matches)


@settings(max_examples=100, deadline=None)
@given(matrices, st.integers(-5, 5))
def test_constant_shift_keeps_assignment(w, shift):
    # Exact integer weights keep ties exact after the shift.
    w = np.round(w * 8)
    assert hungarian_assign(w + shift) == hungarian_assign(w)


def test_build_similarity_examples():
    p = figure(100, 100)
    assert build_similarity([p], [p], DEFAULT_SKELETON).weights.tolist() == [[1.0]]
    far = build_similarity([figure(40, 60)], [figure(280, 180)], DEFAULT_SKELETON).weights
    assert far[0, 0] < 1e-12


def test_build_similarity_crossing_elementwise():
    tracks = [figure(100, 100), figure(140, 100)]
    dets = [figure(138, 102), figure(103, 99)]
    w = build_similarity(tracks, dets, DEFAULT_SKELETON).weights
    for i, j in itertools.product(range(2), range(2)):
        assert w[i, j] == oks(tracks[i], dets[j], DEFAULT_SKELETON)
    assert hungarian_assign(w) == [(0, 1), (1, 0)]


def test_build_similarity_transpose_symmetry():
    rng = np.random.default_rng(2)
    a = [random_pose(rng) for _ in range(4)]
    b = [random_pose(rng) for _ in range(3)]
    w1 = build_similarity(a, b, DEFAULT_SKELETON).weights
    w2 = build_similarity(b, a, DEFAULT_SKELETON).weights
    assert np.array_equal(w1, w2.T)


def test_gate_examples():
    ones = SimilarityMatrix([0, 1], [0, 1], np.ones((2, 2)))
    res = gate(hungarian_assign(ones), ones, 0.2)
    assert len(res.matches) == 2 and not res.unmatched_tracks

    weak = SimilarityMatrix(["a"], ["x"], np.array([[0.1]]))
    res = gate(hungarian_assign(weak), weak, 0.2)
    assert res.matches == [] and res.unmatched_tracks == ["a"] and res.unmatched_detections == ["x"]

    mixed = SimilarityMatrix(["a", "b"], ["x", "y"], np.array([[0.9, 0.0], [0.0, 0.15]]))
    res = gate(hungarian_assign(mixed), mixed, 0.2)
    assert res.matches == [("a", "x", 0.9)]
    assert res.unmatched_tracks == ["b"] and res.unmatched_detections == ["y"]


def test_associate_uses_ids():
    res = associate([figure(100, 100)], [figure(250, 100), figure(101, 100)], DEFAULT_SKELETON,
                    row_ids=[7])
    assert [(a, b) for a, b, _ in res.matches] == [(7, 1)]
    assert res.unmatched_detections == [0]
