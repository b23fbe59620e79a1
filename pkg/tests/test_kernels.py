import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ujmmd._validation import ValidationError
from ujmmd.checks import random_labels
from ujmmd.kernels import (
    KernelSpec,
    feature_kernel,
    label_kernel,
    load_matrix,
    median_bandwidth,
    psd_report,
    save_matrix,
)


def test_linear_identity():
    np.testing.assert_array_equal(feature_kernel(np.eye(2)), np.eye(2))


def test_rbf_diagonal_and_formula():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [3.0, 4.0]])
    K = feature_kernel(X, KernelSpec("rbf", bandwidth=5.0))
    assert K[0, 1] == 1.0
    assert K[0, 2] == pytest.approx(np.exp(-25.0 / 50.0), rel=1e-15)


def test_rbf_psd(rng):
    K = feature_kernel(rng.standard_normal((5, 3)), KernelSpec("rbf", bandwidth=1.3))
    assert np.linalg.eigvalsh(K).min() >= -1e-10
    np.testing.assert_array_equal(K, K.T)


def test_poly():
    X = np.array([[1.0, 2.0], [0.0, -1.0]])
    K = feature_kernel(X, KernelSpec("poly", degree=3, offset=2.0))
    G = X @ X.T
    np.testing.assert_allclose(K, (G + 2.0) ** 3)


def test_cross_kernel_shape(rng):
    X, Y = rng.standard_normal((4, 3)), rng.standard_normal((6, 3))
    K = feature_kernel(X, Y=Y)
    assert K.shape == (4, 6)
    np.testing.assert_allclose(K, X @ Y.T)


def test_median_bandwidth_examples():
    assert median_bandwidth(np.array([[0.0], [2.0]])) == 2.0
    assert median_bandwidth(np.array([[0.0], [1.0], [2.0]])) == 1.0
    with pytest.raises(ValidationError, match="bandwidth"):
        median_bandwidth(np.zeros((4, 3)))


def test_median_bandwidth_monte_carlo():
    # |x - y|^2 for standard Gaussians in dim 10 is 2 * chi2(10), median near 2 * 9.34
    X = np.random.default_rng(0).standard_normal((100, 10))
    assert abs(median_bandwidth(X) - np.sqrt(20.0)) <= 0.15 * np.sqrt(20.0)


def test_median_heuristic_used_when_bandwidth_missing():
    X = np.array([[0.0], [1.0], [2.0]])
    K = feature_kernel(X, KernelSpec("rbf"))
    assert K[0, 1] == pytest.approx(np.exp(-0.5))


def test_variant1_all_ones():
    np.testing.assert_array_equal(label_kernel(1, [0, 1], [1], 2), np.ones((3, 3)))


def test_variant2_example():
    K = label_kernel(2, [0, 1], [0], 2)
    np.testing.assert_array_equal(K, [[4, 0, 2], [0, 0, 0], [2, 0, 1]])
    # with a class-1 target sample the class-1 block takes the same pattern
    K = label_kernel(2, [0, 1], [0, 1], 2)
    np.testing.assert_array_equal(
        K, [[4, 0, 4, 0], [0, 4, 0, 4], [4, 0, 4, 0], [0, 4, 0, 4]]
    )


def test_variant3_indicator():
    ys, yt = [0, 1, 1], [1, 2]
    y = np.array(ys + yt)
    np.testing.assert_array_equal(label_kernel(3, ys, yt, 3), (y[:, None] == y[None, :]) * 1.0)


def test_variant4_example():
    K = label_kernel(4, [0, 0, 1], [0, 1, 1], 2)
    # rows/cols: s0 s0 s1 | t0 t1 t1
    assert K[0, 1] == pytest.approx(0.25)
    assert K[0, 3] == pytest.approx(0.5)
    assert K[3, 3] == 1.0
    assert K[2, 2] == pytest.approx(4.0)
    assert K[2, 4] == pytest.approx(2.0)
    assert K[4, 5] == 1.0
    assert K[0, 2] == 0 and K[0, 4] == 0 and K[3, 4] == 0


def test_variant4_equal_priors_equals_variant3():
    ys = [0, 0, 1, 2, 2, 2]
    yt = [2, 0, 1, 2, 0, 2]
    np.testing.assert_array_equal(label_kernel(4, ys, yt, 3), label_kernel(3, ys, yt, 3))


def test_label_range_checked():
    with pytest.raises(ValidationError):
        label_kernel(3, [0, 3], [1], 3)
    with pytest.raises(ValidationError):
        label_kernel(5, [0, 1], [1], 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_label_kernels_psd_and_block_rank_one(seed, variant):
    rng = np.random.default_rng(seed)
    C = int(rng.integers(2, 6))
    ys, yt = random_labels(rng, int(rng.integers(C, 25)), int(rng.integers(C, 25)), C)
    K = label_kernel(variant, ys, yt, C)
    np.testing.assert_array_equal(K, K.T)
    assert psd_report(K).passed
    y = np.concatenate([ys, yt])
    same = y[:, None] == y[None, :]
    if variant > 1:
        assert np.all(K[~same] == 0)
        for c in range(C):
            idx = np.flatnonzero(y == c)
            assert np.linalg.matrix_rank(K[np.ix_(idx, idx)]) <= 1


def test_missing_target_class_zeroed_for_variant2():
    K = label_kernel(2, [0, 1, 2], [0, 0], 3)
    assert np.all(K[1] == 0) and np.all(K[2] == 0)


def test_psd_report_examples():
    r = psd_report(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not r.passed
    assert r.min_eigenvalue == pytest.approx(-1.0)
    assert psd_report(label_kernel(3, [0, 1, 2], [2, 2], 3)).passed


def test_matrix_csv_round_trip(tmp_path, rng):
    M = rng.standard_normal((4, 4))
    save_matrix(tmp_path / "m.csv", M)
    np.testing.assert_array_equal(load_matrix(tmp_path / "m.csv"), M)
