import numpy as np
import pytest
from sklearn.base import clone

from ujmmd._validation import ValidationError
from ujmmd.data import generate_synthetic
from ujmmd.estimator import JMMDClassifier, JMMDTransformer, knn_predict, split_domains


def _stack(pair):
    X = pair.stacked()
    y = np.concatenate([pair.source_labels, np.full(pair.n_target, -1)])
    dom = np.concatenate([np.ones(pair.n_source), -np.ones(pair.n_target)])
    return X, y, dom


@pytest.fixture
def pair():
    return generate_synthetic(3, [12] * 3, [10] * 3, 5, 4.0, 3.0, seed=4)


def test_knn_exact_match():
    Xtr = np.array([[0.0, 0.0], [5.0, 5.0]])
    assert knn_predict(Xtr, [3, 1], np.array([[5.0, 5.0]]))[0] == 1


def test_knn_equidistant_tie_goes_to_first_index():
    Xtr = np.array([[-1.0], [1.0]])
    assert knn_predict(Xtr, [2, 0], np.array([[0.0]]), k=2)[0] == 2
    assert knn_predict(Xtr[::-1], [0, 2], np.array([[0.0]]), k=2)[0] == 0


def test_knn_vote_tie_goes_to_nearest_class():
    Xtr = np.array([[0.1], [0.2], [0.3], [0.4]])
    # votes: class 1 twice, class 0 twice; nearest neighbour is class 1
    assert knn_predict(Xtr, [1, 0, 0, 1], np.array([[0.0]]), k=4)[0] == 1


def test_knn_majority():
    Xtr = np.array([[0.0], [1.0], [1.1], [1.2]])
    assert knn_predict(Xtr, [0, 1, 1, 0], np.array([[0.0]]), k=3)[0] == 1


def test_knn_errors():
    with pytest.raises(ValidationError):
        knn_predict(np.zeros((2, 1)), [0, 1], np.zeros((1, 1)), k=3)
    with pytest.raises(ValidationError):
        knn_predict(np.zeros((2, 1)), [0, 1], np.zeros((1, 2)))


def test_knn_positive_scaling_invariance(pair):
    a = knn_predict(pair.source_features, pair.source_labels, pair.target_features)
    b = knn_predict(3.7 * pair.source_features, pair.source_labels, 3.7 * pair.target_features)
    np.testing.assert_array_equal(a, b)


def test_split_domains_order():
    X = np.arange(10.0).reshape(5, 2)
    order, n_s, n_t = split_domains(X, None, [-1, 1, -1, 1, 1])
    np.testing.assert_array_equal(order, [1, 3, 4, 0, 2])
    assert (n_s, n_t) == (3, 2)
    with pytest.raises(ValidationError):
        split_domains(X, None, [1, 1, 1, 1, 1])
    with pytest.raises(ValidationError):
        split_domains(X, None, [1, 0, -1, 1, 1])


def test_get_params_and_clone():
    est = JMMDClassifier(n_components=4, delta=0.3, lam=2.0, kernel="rbf")
    params = est.get_params()
    assert params["n_components"] == 4 and params["delta"] == 0.3 and params["kernel"] == "rbf"
    c = clone(est)
    assert c.get_params() == params and c is not est
    est.set_params(n_iter=2)
    assert est.n_iter == 2
    assert clone(JMMDTransformer(label_kernel=4)).label_kernel == 4


def test_transformer_fit_transform(pair):
    X, y, dom = _stack(pair)
    y[pair.n_source:] = pair.target_truth
    t = JMMDTransformer(n_components=3).fit(X, y, dom)
    np.testing.assert_allclose(t.transform(X), t.embedding_, atol=1e-9)
    assert t.embedding_.shape == (X.shape[0], 3)


def test_transformer_input_order_independent(pair):
    X, y, dom = _stack(pair)
    y[pair.n_source:] = pair.target_truth
    perm = np.random.default_rng(0).permutation(X.shape[0])
    a = JMMDTransformer(n_components=3).fit(X, y, dom)
    b = JMMDTransformer(n_components=3).fit(X[perm], y[perm], dom[perm])
    # same pencil up to a symmetric permutation; LAPACK rounding differs, so
    # compare at a tolerance relative to the embedding scale
    scale = np.abs(a.embedding_).max()
    np.testing.assert_allclose(b.embedding_, a.embedding_[perm], rtol=0, atol=1e-5 * scale)


def test_classifier_never_reads_target_labels(pair):
    X, y, dom = _stack(pair)
    a = JMMDClassifier(n_components=3, n_iter=3).fit(X, y, dom)
    y2 = y.copy()
    y2[pair.n_source:] = pair.target_truth
    b = JMMDClassifier(n_components=3, n_iter=3).fit(X, y2, dom)
    np.testing.assert_array_equal(a.target_labels_, b.target_labels_)
    np.testing.assert_array_equal(a.embedding_, b.embedding_)


def test_classifier_attributes_and_predict(pair):
    X, y, dom = _stack(pair)
    clf = JMMDClassifier(n_components=3, n_iter=4).fit(X, y, dom)
    assert len(clf.pseudo_label_history_) == 4
    np.testing.assert_array_equal(clf.target_labels_, clf.pseudo_label_history_[-1])
    np.testing.assert_array_equal(clf.predict(pair.target_features), clf.target_labels_)
    np.testing.assert_array_equal(clf.classes_, [0, 1, 2])
    with pytest.raises(ValidationError):
        clf.transform(np.zeros((2, 4)))


def test_rbf_and_poly_kernels_fit(pair):
    X, y, dom = _stack(pair)
    for kernel in ("rbf", "poly"):
        clf = JMMDClassifier(n_components=3, n_iter=2, kernel=kernel, delta=0.1).fit(X, y, dom)
        assert np.isfinite(clf.embedding_).all()
    clf = JMMDClassifier(kernel="rbf", n_components=3, n_iter=1).fit(X, y, dom)
    assert clf.bandwidth_ > 0


def test_target_equal_source_full_accuracy():
    p = generate_synthetic(3, [10] * 3, [1] * 3, 4, 3.0, 0.0, seed=0)
    X = np.vstack([p.source_features, p.source_features])
    n = p.n_source
    y = np.concatenate([p.source_labels, np.full(n, -1)])
    dom = np.concatenate([np.ones(n), -np.ones(n)])
    clf = JMMDClassifier(n_components=3, n_iter=3).fit(X, y, dom)
    np.testing.assert_array_equal(clf.target_labels_, p.source_labels)
