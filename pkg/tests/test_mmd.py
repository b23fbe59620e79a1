import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ujmmd._validation import ValidationError
from ujmmd.checks import random_instance
from ujmmd.data import one_hot
from ujmmd.kernels import feature_kernel, label_kernel
from ujmmd.mmd import (
    brute_force_hsi,
    brute_force_jmmd,
    hsi_metric,
    jmmd_distance,
    mmd_classwise,
    mmd_hsi,
    mmd_marginal,
    mmd_novel,
    mmd_weighted_classwise,
    projected_jmmd,
    projected_jmmd_inner,
)

seeds = st.integers(0, 2**32 - 1)


def rel(a, b):
    return abs(a - b) / (1 + max(abs(a), abs(b)))


def test_marginal_examples():
    np.testing.assert_array_equal(mmd_marginal(1, 1), [[1, -1], [-1, 1]])
    np.testing.assert_allclose(
        mmd_marginal(2, 1), [[0.25, 0.25, -0.5], [0.25, 0.25, -0.5], [-0.5, -0.5, 1]]
    )
    with pytest.raises(ValidationError):
        mmd_marginal(0, 3)


@given(st.integers(1, 40), st.integers(1, 40))
def test_marginal_rows_sum_to_zero(n_s, n_t):
    np.testing.assert_allclose(mmd_marginal(n_s, n_t).sum(axis=1), 0, atol=1e-15)


def test_classwise_examples():
    np.testing.assert_array_equal(mmd_classwise([0, 1], [0], 0), [[1, 0, -1], [0, 0, 0], [-1, 0, 1]])
    np.testing.assert_array_equal(mmd_classwise([0, 1], [0], 1), np.zeros((3, 3)))


def test_classwise_rows_sum_to_zero():
    M = mmd_classwise([0, 1, 1, 2], [1, 1, 0], 1)
    np.testing.assert_allclose(M.sum(axis=1), 0, atol=1e-15)


def test_weighted_classwise_examples():
    np.testing.assert_allclose(
        mmd_weighted_classwise([0, 1], [0], 0), [[0.25, 0, -0.5], [0, 0, 0], [-0.5, 0, 1]]
    )
    np.testing.assert_array_equal(mmd_weighted_classwise([0, 1], [0], 2), np.zeros((3, 3)))


def test_weighted_classwise_sum_pattern():
    ys, yt = np.array([0, 1, 1, 2]), np.array([2, 0, 1])
    total = sum(mmd_weighted_classwise(ys, yt, c) for c in range(3))
    y = np.concatenate([ys, yt])
    same = y[:, None] == y[None, :]
    np.testing.assert_allclose(total, np.where(same, mmd_marginal(4, 3), 0.0))


def test_hsi_matrix_examples():
    np.testing.assert_array_equal(mmd_hsi(1, 1), np.eye(2))
    M = mmd_hsi(2, 2)
    np.testing.assert_array_equal(M[:2, :2], 0.25)
    np.testing.assert_array_equal(M[:2, 2:], 0)
    Mm = mmd_marginal(3, 2)
    np.testing.assert_array_equal(mmd_hsi(3, 2)[:3, :3], Mm[:3, :3])
    np.testing.assert_array_equal(mmd_hsi(3, 2)[3:, 3:], Mm[3:, 3:])


def test_novel_examples():
    np.testing.assert_array_equal(mmd_novel(3, 4, 0.0), mmd_marginal(3, 4))
    np.testing.assert_allclose(mmd_novel(1, 1, 0.1), [[0.9, -1], [-1, 0.9]])
    M = mmd_novel(3, 3, 1.0)
    np.testing.assert_array_equal(M[:3, :3], 0)
    np.testing.assert_array_equal(M[3:, 3:], 0)
    np.testing.assert_array_equal(M[:3, 3:], mmd_marginal(3, 3)[:3, 3:])
    with pytest.raises(ValidationError):
        mmd_novel(2, 2, -0.1)


def test_jmmd_with_ones_is_plain_mmd(rng):
    X = rng.standard_normal((7, 3))
    K = feature_kernel(X)
    M = mmd_marginal(4, 3)
    assert jmmd_distance(K, np.ones((7, 7)), M) == pytest.approx(np.trace(K @ M), rel=1e-12)


def test_jmmd_identical_domains_zero(rng):
    Xs = rng.standard_normal((5, 3))
    ys = np.array([0, 1, 2, 1, 0])
    K = feature_kernel(np.vstack([Xs, Xs]))
    for v in (1, 2, 3, 4):
        assert abs(jmmd_distance(K, label_kernel(v, ys, ys, 3), mmd_marginal(5, 5))) <= 1e-12


def test_jmmd_dimension_mismatch():
    with pytest.raises(ValidationError, match="dimension"):
        jmmd_distance(np.eye(3), np.ones((3, 3)), mmd_marginal(2, 2))


def test_brute_force_hand_example():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    Y = np.array([[1.0], [1.0]])
    assert brute_force_jmmd(X, Y, 1, 1) == pytest.approx(2.0)
    assert brute_force_jmmd(np.vstack([X, X]), np.ones((4, 1)), 2, 2) == 0.0


def test_oracle_small_instance(rng):
    X = rng.standard_normal((7, 3))
    ys, yt = np.array([0, 1, 1, 0]), np.array([1, 0, 1])
    Y = one_hot(np.concatenate([ys, yt]), 2)
    got = jmmd_distance(feature_kernel(X), label_kernel(3, ys, yt, 2), mmd_marginal(4, 3))
    assert rel(got, brute_force_jmmd(X, Y, 4, 3)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_oracle_random(seed):
    X, ys, yt, n_s, n_t, C = random_instance(np.random.default_rng(seed))
    Y = one_hot(np.concatenate([ys, yt]), C)
    got = jmmd_distance(feature_kernel(X), label_kernel(3, ys, yt, C), mmd_marginal(n_s, n_t))
    assert rel(got, brute_force_jmmd(X, Y, n_s, n_t)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_label_kernel_identities(seed):
    X, ys, yt, n_s, n_t, C = random_instance(np.random.default_rng(seed))
    K = feature_kernel(X)
    M = mmd_marginal(n_s, n_t)
    assert rel(jmmd_distance(K, label_kernel(1, ys, yt, C), M), np.trace(K @ M)) <= 1e-10
    cw = sum(np.trace(K @ mmd_classwise(ys, yt, c)) for c in range(C))
    assert rel(jmmd_distance(K, label_kernel(2, ys, yt, C), M), cw) <= 1e-10
    wcw = sum(np.trace(K @ mmd_weighted_classwise(ys, yt, c)) for c in range(C))
    assert rel(jmmd_distance(K, label_kernel(3, ys, yt, C), M), wcw) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_distance_nonnegative_for_psd_kernels(seed):
    rng = np.random.default_rng(seed)
    X, ys, yt, n_s, n_t, C = random_instance(rng)
    K = feature_kernel(X)
    for v in (1, 2, 3, 4):
        assert jmmd_distance(K, label_kernel(v, ys, yt, C), mmd_marginal(n_s, n_t)) >= -1e-10
    for c in range(C):
        assert np.trace(K @ mmd_classwise(ys, yt, c)) >= -1e-10


def test_hsi_single_pair():
    X = np.array([[1.0, 2.0], [3.0, -1.0]])
    K = feature_kernel(X)
    Kyy = label_kernel(4, [1], [1], 2)
    expected = K[0, 0] * Kyy[0, 0] + K[1, 1] * Kyy[1, 1]
    assert hsi_metric(K, Kyy, 1, 1) == pytest.approx(expected)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_hsi_oracle(seed):
    X, ys, yt, n_s, n_t, C = random_instance(np.random.default_rng(seed))
    Y = one_hot(np.concatenate([ys, yt]), C)
    got = hsi_metric(feature_kernel(X), label_kernel(3, ys, yt, C), n_s, n_t)
    assert rel(got, brute_force_hsi(X, Y, n_s, n_t)) <= 1e-10


def test_hsi_bilinearity(rng):
    X = rng.standard_normal((9, 4))
    ys, yt = np.array([0, 1, 1, 2, 0]), np.array([2, 1, 0, 0])
    Kyy = label_kernel(3, ys, yt, 3)
    src = jmmd_distance(feature_kernel(X), Kyy, np.pad(mmd_hsi(5, 4)[:5, :5], ((0, 4), (0, 4))))
    X2 = X.copy()
    X2[:5] *= 2
    src2 = jmmd_distance(feature_kernel(X2), Kyy, np.pad(mmd_hsi(5, 4)[:5, :5], ((0, 4), (0, 4))))
    assert src2 == pytest.approx(4 * src, rel=1e-12)
    total = hsi_metric(feature_kernel(X), Kyy, 5, 4)
    total2 = hsi_metric(feature_kernel(X2), Kyy, 5, 4)
    assert total2 - total == pytest.approx(3 * src, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_projected_forms_agree(seed):
    rng = np.random.default_rng(seed)
    X, ys, yt, n_s, n_t, C = random_instance(rng)
    K = feature_kernel(X)
    Kyy = label_kernel(int(rng.integers(1, 5)), ys, yt, C)
    M = mmd_novel(n_s, n_t, float(rng.uniform(0, 1)))
    B = rng.standard_normal((n_s + n_t, int(rng.integers(1, 6))))
    assert rel(projected_jmmd(K, Kyy, M, B), projected_jmmd_inner(K, Kyy, M, B)) <= 1e-10


def test_projected_zero_b(rng):
    K = feature_kernel(rng.standard_normal((5, 2)))
    assert projected_jmmd(K, np.ones((5, 5)), mmd_marginal(3, 2), np.zeros((5, 2))) == 0.0


def test_projected_inverse_sqrt_reduces_to_distance(rng):
    X = rng.standard_normal((8, 10))  # m > n keeps the linear Gram matrix definite
    K = feature_kernel(X)
    w, V = np.linalg.eigh(K)
    assert w.min() > 1e-6
    B = V @ np.diag(w ** -0.5) @ V.T
    ys, yt = np.array([0, 1, 2, 0, 1]), np.array([2, 1, 0])
    Kyy = label_kernel(2, ys, yt, 3)
    M = mmd_marginal(5, 3)
    assert rel(projected_jmmd(K, Kyy, M, B), jmmd_distance(K, Kyy, M)) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_source_duplication_invariance_variant4(seed):
    rng = np.random.default_rng(seed)
    X, ys, yt, n_s, n_t, C = random_instance(rng)
    base = jmmd_distance(feature_kernel(X), label_kernel(4, ys, yt, C), mmd_marginal(n_s, n_t))
    X2 = np.vstack([X[:n_s], X[:n_s], X[n_s:]])
    dup = jmmd_distance(
        feature_kernel(X2), label_kernel(4, np.concatenate([ys, ys]), yt, C),
        mmd_marginal(2 * n_s, n_t),
    )
    assert rel(base, dup) <= 1e-10
