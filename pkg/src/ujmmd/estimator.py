"""scikit-learn compatible estimators for joint-MMD kernel subspace adaptation.

Both estimators take the stacked samples of both domains in ``fit`` together
with a ``sample_domain`` array (positive for source rows, negative for target
rows), following the convention of domain-adaptation toolkits built on
scikit-learn.
"""

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import ValidationError, check_features, check_labels
from .kernels import KernelSpec, feature_kernel, label_kernel, resolve_bandwidth
from .solver import build_objective, embed, solve_projection


def knn_predict(X_train, y_train, X_test, k=1):
    """Euclidean k-nearest-neighbour majority vote.

    Neighbours at equal distance are ranked by training index. A tie in the
    vote goes to the tied class that owns the nearest neighbour.
    """
    X_train = check_features(X_train, "X_train")
    X_test = check_features(X_test, "X_test")
    y_train = check_labels(y_train, name="y_train")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > X_train.shape[0]:
        raise ValidationError(f"k={k} exceeds the {X_train.shape[0]} training samples")
    if X_train.shape[1] != X_test.shape[1]:
        raise ValidationError("train and test embeddings differ in dimension")
    D = cdist(X_test, X_train, "sqeuclidean")
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    neigh = y_train[order]
    if k == 1:
        return neigh[:, 0]
    n_classes = int(y_train.max()) + 1
    out = np.empty(X_test.shape[0], dtype=np.intp)
    for i, row in enumerate(neigh):
        votes = np.bincount(row, minlength=n_classes)
        tied = votes == votes.max()
        out[i] = next(c for c in row if tied[c])
    return out


def split_domains(X, y, sample_domain):
    """Source-first permutation of ``X``/``y`` plus the domain sizes."""
    sample_domain = np.asarray(sample_domain)
    if sample_domain.shape != (X.shape[0],):
        raise ValidationError("sample_domain must have one entry per sample")
    if np.any(sample_domain == 0):
        raise ValidationError("sample_domain entries must be positive (source) or negative (target)")
    src = sample_domain > 0
    order = np.concatenate([np.flatnonzero(src), np.flatnonzero(~src)])
    n_s = int(src.sum())
    n_t = X.shape[0] - n_s
    if n_s == 0 or n_t == 0:
        raise ValidationError("both a source and a target domain are required")
    return order, n_s, n_t


class _KernelSubspaceMixin:
    """Shared kernel/objective plumbing for the two estimators."""

    def _kernel_spec(self):
        return KernelSpec(
            family=self.kernel, bandwidth=self.bandwidth, degree=self.degree, offset=self.offset
        )

    def _solve(self, K, ys, yt, n_s, n_t, n_classes):
        K_yy = label_kernel(self.label_kernel, ys, yt, n_classes) if self.adapt else None
        obj = build_objective(
            K, K_yy, self.delta, self.lam, n_s, n_t, normalize=self.normalize_mmd
        )
        return solve_projection(obj, self.n_components, ridge=self.ridge)

    def _kernel_to_fit(self, X):
        check_is_fitted(self, "projection_")
        X = check_features(X)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X has {X.shape[1]} features, estimator was fitted with {self.n_features_in_}"
            )
        return feature_kernel(X, self.kernel_spec_, Y=self.X_fit_, bandwidth=self.bandwidth_)


class JMMDTransformer(_KernelSubspaceMixin, TransformerMixin, BaseEstimator):
    """Domain-invariant kernel subspace from one solve of the joint-MMD objective.

    Parameters
    ----------
    n_components : int, default=20
        Subspace dimension ``d``.
    label_kernel : {1, 2, 3, 4}, default=3
        1: marginal, 2: class-conditional, 3: prior-weighted class-conditional,
        4: prior-weighted with target/source class-ratio reweighting.
    delta : float, default=0.0
        Weight of the within-domain feature/label dependence reward.
    lam : float, default=0.1
        Regularisation on ``||B||_F^2``.
    kernel : {"linear", "rbf", "poly"}, default="linear"
    bandwidth : float, default=None
        RBF bandwidth; None uses the median pairwise distance.
    degree, offset : polynomial kernel parameters.
    ridge : float, default=None
        Ridge added to the constraint matrix; None means
        ``1e-9 * trace(K H K) / n``.
    normalize_mmd : bool, default=False
        Scale the weighted MMD matrix to unit Frobenius norm.
    adapt : bool, default=True
        If False the discrepancy term is dropped (kernel PCA).
    n_classes : int, default=None
        Inferred from ``y`` when None.

    Attributes
    ----------
    projection_ : Projection
    X_fit_ : ndarray of shape (n_s + n_t, n_features)
        Fitted samples, source rows first.
    n_source_ : int
    embedding_ : ndarray of shape (n_samples, n_components)
        Embeddings of the training samples in the order given to ``fit``.
    """

    def __init__(
        self,
        n_components=20,
        label_kernel=3,
        delta=0.0,
        lam=0.1,
        kernel="linear",
        bandwidth=None,
        degree=2,
        offset=1.0,
        ridge=None,
        normalize_mmd=False,
        adapt=True,
        n_classes=None,
    ):
        self.n_components = n_components
        self.label_kernel = label_kernel
        self.delta = delta
        self.lam = lam
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.degree = degree
        self.offset = offset
        self.ridge = ridge
        self.normalize_mmd = normalize_mmd
        self.adapt = adapt
        self.n_classes = n_classes

    def fit(self, X, y, sample_domain):
        """Fit the projection.

        ``y`` holds source labels and target (pseudo-)labels; with
        ``label_kernel=1`` or ``adapt=False`` its target entries are unused.
        """
        X = check_features(X)
        y = np.asarray(y)
        order, n_s, n_t = split_domains(X, y, sample_domain)
        Xo = X[order]
        yo = y[order]
        uses_target_labels = self.adapt and self.label_kernel != 1
        if not uses_target_labels:
            yo = yo.copy()
            yo[n_s:] = 0
        yo = check_labels(yo, self.n_classes)
        n_classes = self.n_classes or int(yo.max()) + 1

        self.kernel_spec_ = self._kernel_spec()
        self.bandwidth_ = resolve_bandwidth(Xo, self.kernel_spec_)
        K = feature_kernel(Xo, self.kernel_spec_, bandwidth=self.bandwidth_)
        self.projection_ = self._solve(K, yo[:n_s], yo[n_s:], n_s, n_t, n_classes)
        self.X_fit_ = Xo
        self.n_source_ = n_s
        self.n_features_in_ = X.shape[1]
        Z = embed(self.projection_, K)
        self.embedding_ = np.empty_like(Z)
        self.embedding_[order] = Z
        return self

    def transform(self, X):
        return embed(self.projection_, self._kernel_to_fit(X))


class JMMDClassifier(_KernelSubspaceMixin, ClassifierMixin, BaseEstimator):
    """Iterative pseudo-label adaptation with a k-NN classifier in the learned subspace.

    Round 1 labels the target by k-NN on the raw features. Each of the
    ``n_iter`` rounds then rebuilds the label kernel from the source labels
    and the current target pseudo-labels, solves for the projection, embeds
    both domains and relabels the target by k-NN against the source
    embeddings. The feature kernel is computed once.

    Parameters
    ----------
    n_iter : int, default=5
        Number of solve/relabel rounds.
    n_neighbors : int, default=1
    Other parameters are as in :class:`JMMDTransformer`.

    Attributes
    ----------
    pseudo_label_history_ : list of ndarray
        Target pseudo-labels after each round (target rows in input order).
    target_labels_ : ndarray
        Final target pseudo-labels.
    embedding_ : ndarray of shape (n_samples, n_components)
    source_embedding_, source_labels_ : training set of the final k-NN.
    """

    def __init__(
        self,
        n_components=20,
        label_kernel=3,
        delta=0.0,
        lam=0.1,
        n_iter=5,
        n_neighbors=1,
        kernel="linear",
        bandwidth=None,
        degree=2,
        offset=1.0,
        ridge=None,
        normalize_mmd=False,
        adapt=True,
        n_classes=None,
    ):
        self.n_components = n_components
        self.label_kernel = label_kernel
        self.delta = delta
        self.lam = lam
        self.n_iter = n_iter
        self.n_neighbors = n_neighbors
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.degree = degree
        self.offset = offset
        self.ridge = ridge
        self.normalize_mmd = normalize_mmd
        self.adapt = adapt
        self.n_classes = n_classes

    def fit(self, X, y, sample_domain):
        """Adapt from labeled source rows to unlabeled target rows.

        Target entries of ``y`` are never read; pass any placeholder (e.g. -1).
        """
        if self.n_iter < 1:
            raise ValidationError(f"n_iter must be >= 1, got {self.n_iter}")
        X = check_features(X)
        y = np.asarray(y)
        order, n_s, n_t = split_domains(X, y, sample_domain)
        Xo = X[order]
        ys = check_labels(y[order[:n_s]], self.n_classes, "source labels")
        n_classes = self.n_classes or int(ys.max()) + 1

        self.kernel_spec_ = self._kernel_spec()
        self.bandwidth_ = resolve_bandwidth(Xo, self.kernel_spec_)
        K = feature_kernel(Xo, self.kernel_spec_, bandwidth=self.bandwidth_)

        pseudo = knn_predict(Xo[:n_s], ys, Xo[n_s:], self.n_neighbors)
        history = []
        for _ in range(self.n_iter):
            if pseudo.size == 0:
                raise ValidationError("no target pseudo-labels available")
            proj = self._solve(K, ys, pseudo, n_s, n_t, n_classes)
            Z = embed(proj, K)
            pseudo = knn_predict(Z[:n_s], ys, Z[n_s:], self.n_neighbors)
            history.append(pseudo)

        self.projection_ = proj
        self.X_fit_ = Xo
        self.n_source_ = n_s
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.arange(n_classes)
        self.source_embedding_ = Z[:n_s]
        self.source_labels_ = ys
        self.pseudo_label_history_ = history
        self.target_labels_ = pseudo
        self.embedding_ = np.empty_like(Z)
        self.embedding_[order] = Z
        return self

    def transform(self, X):
        return embed(self.projection_, self._kernel_to_fit(X))

    def predict(self, X):
        return knn_predict(
            self.source_embedding_, self.source_labels_, self.transform(X), self.n_neighbors
        )
