"""Feature kernels over stacked source/target samples and the label kernels.

The label kernels weight same-class pairs only. With per-sample weights
``w`` the entry for samples ``i``, ``j`` is ``w[i] * w[j]`` when their labels
agree and 0 otherwise, so each class block is rank one:

* variant 1: all ones (labels ignored);
* variant 2: ``w = n_s / n_s[c]`` on source, ``n_t / n_t[c]`` on target;
* variant 3: ``w = 1`` (same-label indicator);
* variant 4: ``w = (n_t[c] / n_t) * (n_s / n_s[c])`` on source, ``1`` on target.

A class with no members in a domain it needs is skipped (its weights are 0).
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial.distance import pdist

from ._validation import ValidationError, check_features, check_labels, check_square

FAMILIES = ("linear", "rbf", "poly")


@dataclass(frozen=True)
class KernelSpec:
    """Feature kernel family and parameters.

    ``bandwidth=None`` with the RBF family selects the median heuristic.
    """

    family: str = "linear"
    bandwidth: Optional[float] = None
    degree: int = 2
    offset: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(
                f"unknown kernel family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValidationError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.degree < 1:
            raise ValidationError(f"degree must be >= 1, got {self.degree}")


def median_bandwidth(X):
    """Median pairwise Euclidean distance between rows of ``X``."""
    X = check_features(X)
    if X.shape[0] < 2:
        raise ValidationError("median heuristic needs at least 2 samples")
    sigma = float(np.median(pdist(X)))
    if sigma == 0.0:
        raise ValidationError(
            "median pairwise distance is 0; pass an explicit RBF bandwidth"
        )
    return sigma


def _sq_dists(X, Y):
    d = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * X @ Y.T
    np.maximum(d, 0.0, out=d)
    return d


def feature_kernel(X, spec=KernelSpec(), Y=None, bandwidth=None):
    """Gram matrix ``k(X[i], Y[j])``; ``Y=None`` means ``Y = X``.

    For an RBF spec without an explicit bandwidth, ``bandwidth`` (if given)
    overrides the median heuristic, which is otherwise computed on ``X``.
    """
    X = check_features(X)
    symmetric = Y is None
    Y = X if symmetric else check_features(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValidationError(f"feature dimensions differ: {X.shape[1]} vs {Y.shape[1]}")

    if spec.family == "linear":
        K = X @ Y.T
    elif spec.family == "poly":
        K = (X @ Y.T + spec.offset) ** spec.degree
    else:
        sigma = spec.bandwidth or bandwidth or median_bandwidth(X)
        K = np.exp(-_sq_dists(X, Y) / (2.0 * sigma**2))
        if symmetric:
            np.fill_diagonal(K, 1.0)
    if symmetric:
        K = 0.5 * (K + K.T)
    return K


def resolve_bandwidth(X, spec):
    """Bandwidth that :func:`feature_kernel` would use for ``X`` (None if not RBF)."""
    if spec.family != "rbf":
        return None
    return spec.bandwidth or median_bandwidth(X)


def label_weights(variant, source_labels, target_labels, n_classes):
    """Per-sample weights whose same-class outer products form the label kernel."""
    ys = check_labels(source_labels, n_classes, "source_labels")
    yt = check_labels(target_labels, n_classes, "target_labels")
    n_s, n_t = ys.shape[0], yt.shape[0]
    cs = np.bincount(ys, minlength=n_classes).astype(np.float64)
    ct = np.bincount(yt, minlength=n_classes).astype(np.float64)

    if variant in (1, 3):
        return np.ones(n_s), np.ones(n_t)
    with np.errstate(divide="ignore", invalid="ignore"):
        if variant == 2:
            both = (cs > 0) & (ct > 0)
            ws = np.where(both, n_s / cs, 0.0)
            wt = np.where(both, n_t / ct, 0.0)
        elif variant == 4:
            ws = np.where(cs > 0, (ct / n_t) * (n_s / cs), 0.0)
            wt = np.where(cs > 0, 1.0, 0.0)
        else:
            raise ValidationError(f"label kernel variant must be 1-4, got {variant}")
    return ws[ys], wt[yt]


def label_kernel(variant, source_labels, target_labels, n_classes):
    """Label Gram matrix over source-then-target samples.

    Parameters
    ----------
    variant : {1, 2, 3, 4}
    source_labels, target_labels : array-like of int
        Hard labels; target labels are usually pseudo-labels.
    n_classes : int

    Returns
    -------
    ndarray of shape (n_s + n_t, n_s + n_t)
    """
    ws, wt = label_weights(variant, source_labels, target_labels, n_classes)
    n = ws.shape[0] + wt.shape[0]
    if variant == 1:
        return np.ones((n, n))
    y = np.concatenate([np.asarray(source_labels), np.asarray(target_labels)])
    w = np.concatenate([ws, wt])
    return np.outer(w, w) * (y[:, None] == y[None, :])


class PSDReport(NamedTuple):
    min_eigenvalue: float
    passed: bool


def psd_report(K, tol=1e-8):
    """Smallest eigenvalue of symmetric ``K`` and whether it is ``>= -tol``."""
    K = check_square(K, name="K")
    lam = float(np.linalg.eigvalsh(0.5 * (K + K.T))[0])
    return PSDReport(lam, lam >= -tol)


def save_matrix(path, M):
    """Dump a matrix as row-major CSV."""
    np.savetxt(path, np.atleast_2d(M), delimiter=",", fmt="%.17g")


def load_matrix(path):
    return np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))
