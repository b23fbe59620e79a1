"""MMD coefficient matrices and the trace-form distances built on them.

All matrices index the stacked source-then-target samples. A distance between
kernel mean embeddings is evaluated as ``trace((K_xx * K_yy) @ M)`` where
``*`` is the elementwise product; with ``K_yy`` all ones this is the plain
kernel MMD.
"""

import numpy as np

from ._validation import ValidationError, check_features, check_labels, check_square


def _check_counts(n_s, n_t):
    if n_s < 1 or n_t < 1:
        raise ValidationError(f"both domains need samples, got n_s={n_s}, n_t={n_t}")


def _outer(e):
    return np.outer(e, e)


def mmd_marginal(n_s, n_t):
    """``1/n_s**2`` within source, ``1/n_t**2`` within target, ``-1/(n_s n_t)`` across."""
    _check_counts(n_s, n_t)
    e = np.concatenate([np.full(n_s, 1.0 / n_s), np.full(n_t, -1.0 / n_t)])
    return _outer(e)


def mmd_hsi(n_s, n_t):
    """Block-diagonal part of :func:`mmd_marginal`; the cross-domain block is 0."""
    _check_counts(n_s, n_t)
    M = np.zeros((n_s + n_t, n_s + n_t))
    M[:n_s, :n_s] = 1.0 / n_s**2
    M[n_s:, n_s:] = 1.0 / n_t**2
    return M


def mmd_novel(n_s, n_t, delta):
    """``mmd_marginal - delta * mmd_hsi``.

    Minimising the trace form against this matrix shrinks the joint
    discrepancy while growing the within-domain feature/label dependence.
    """
    if delta < 0:
        raise ValidationError(f"delta must be non-negative, got {delta}")
    return mmd_marginal(n_s, n_t) - delta * mmd_hsi(n_s, n_t)


def mmd_classwise(source_labels, target_labels, c):
    """Class-conditional MMD matrix for class ``c``.

    Zero when ``c`` is missing from either domain.
    """
    ys = check_labels(source_labels, name="source_labels")
    yt = check_labels(target_labels, name="target_labels")
    in_s, in_t = ys == c, yt == c
    ns_c, nt_c = in_s.sum(), in_t.sum()
    e = np.zeros(ys.shape[0] + yt.shape[0])
    if ns_c and nt_c:
        e[: ys.shape[0]][in_s] = 1.0 / ns_c
        e[ys.shape[0]:][in_t] = -1.0 / nt_c
    return _outer(e)


def mmd_weighted_classwise(source_labels, target_labels, c, n_s=None, n_t=None):
    """Class-prior weighted MMD matrix for class ``c``.

    Same pattern as :func:`mmd_classwise` but with the domain sizes in the
    denominators, so the class-``c`` mean of each domain enters scaled by its
    empirical class prior.
    """
    ys = check_labels(source_labels, name="source_labels")
    yt = check_labels(target_labels, name="target_labels")
    n_s = ys.shape[0] if n_s is None else n_s
    n_t = yt.shape[0] if n_t is None else n_t
    if n_s != ys.shape[0] or n_t != yt.shape[0]:
        raise ValidationError("n_s / n_t disagree with the label vector lengths")
    _check_counts(n_s, n_t)
    e = np.concatenate([(ys == c) / n_s, (yt == c) / -n_t])
    return _outer(e)


def _check_conform(*mats):
    n = mats[0].shape[0]
    for M in mats:
        if M.shape != (n, n):
            shapes = ", ".join(str(m.shape) for m in mats)
            raise ValidationError(f"dimension mismatch: {shapes}")


def jmmd_distance(K_xx, K_yy, M):
    """``trace((K_xx * K_yy) @ M)`` without forming the matrix product."""
    K_xx = check_square(K_xx, name="K_xx")
    K_yy = check_square(K_yy, name="K_yy")
    M = check_square(M, name="M")
    _check_conform(K_xx, K_yy, M)
    return float(np.sum(K_xx * K_yy * M.T))


def hsi_metric(K_xx, K_yy, n_s, n_t):
    """Sum of the squared norms of the source and target cross-covariance embeddings."""
    K_xx = check_square(K_xx, n_s + n_t, "K_xx")
    K_yy = check_square(K_yy, n_s + n_t, "K_yy")
    return jmmd_distance(K_xx, K_yy, mmd_hsi(n_s, n_t))


def _check_projection(K_xx, B):
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != K_xx.shape[0]:
        raise ValidationError(
            f"B must have {K_xx.shape[0]} rows, got shape {B.shape}"
        )
    return B


def projected_jmmd(K_xx, K_yy, M, B):
    """Discrepancy after projecting with coefficients ``B``: ``trace(((K B B^T K) * K_yy) @ M)``."""
    K_xx = check_square(K_xx, name="K_xx")
    B = _check_projection(K_xx, B)
    KB = K_xx @ B
    return jmmd_distance(KB @ KB.T, K_yy, M)


def projected_jmmd_inner(K_xx, K_yy, M, B):
    """Same quantity as :func:`projected_jmmd`, as ``trace(B^T K (M * K_yy) K B)``."""
    K_xx = check_square(K_xx, name="K_xx")
    K_yy = check_square(K_yy, name="K_yy")
    M = check_square(M, name="M")
    _check_conform(K_xx, K_yy, M)
    B = _check_projection(K_xx, B)
    KB = K_xx @ B
    return float(np.trace(KB.T @ (M * K_yy) @ KB))


# --------------------------------------------------------------------------
# Explicit-embedding oracle (linear feature map, one-hot label map)
# --------------------------------------------------------------------------


def cross_covariance(X, Y):
    """Mean of the outer products ``x_i y_i^T``, shape ``(m, C)``."""
    return X.T @ Y / X.shape[0]


def brute_force_jmmd(X, Y, n_s, n_t):
    """Squared Frobenius distance between source and target cross-covariances.

    Parameters
    ----------
    X : array-like of shape (n_s + n_t, m)
        Stacked features; the identity feature map is used.
    Y : array-like of shape (n_s + n_t, C)
        Stacked one-hot (or soft) label rows.
    """
    X = check_features(X)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[0] != n_s + n_t or Y.shape[0] != n_s + n_t:
        raise ValidationError("X and Y must have n_s + n_t rows")
    D = cross_covariance(X[:n_s], Y[:n_s]) - cross_covariance(X[n_s:], Y[n_s:])
    return float(np.sum(D * D))


def brute_force_hsi(X, Y, n_s, n_t):
    """``||C_ss||_F**2 + ||C_tt||_F**2`` from explicit cross-covariances."""
    X = check_features(X)
    Y = np.asarray(Y, dtype=np.float64)
    Cs = cross_covariance(X[:n_s], Y[:n_s])
    Ct = cross_covariance(X[n_s:], Y[n_s:])
    return float(np.sum(Cs * Cs) + np.sum(Ct * Ct))
