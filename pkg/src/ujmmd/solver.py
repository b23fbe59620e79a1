"""Kernel subspace objective and its generalized eigensolution.

The projection coefficients ``B`` minimise

    trace(B^T K (M * K_yy) K B) + lam * ||B||_F^2   s.t.  B^T K H K B = I

which leads to the symmetric pencil ``A b = theta (K H K + ridge I) b`` with
``A = K (M * K_yy) K + lam I``. ``H`` is the centering matrix. ``K H K`` is
singular (constants are annihilated) so a small ridge makes the right-hand
matrix definite.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._validation import ValidationError, check_square
from .mmd import mmd_novel


class SolverError(ArithmeticError):
    """The eigenproblem could not be solved as posed."""


@dataclass(frozen=True)
class Objective:
    A: np.ndarray
    C: np.ndarray
    lam: float
    delta: float


@dataclass(frozen=True)
class Projection:
    """Coefficients ``B`` (n_st x d) and ascending eigenvalues ``theta``."""

    B: np.ndarray
    theta: np.ndarray
    ridge: float

    @property
    def n_components(self):
        return self.B.shape[1]

    def truncate(self, d):
        return Projection(self.B[:, :d], self.theta[:d], self.ridge)


def centering_matrix(n):
    return np.eye(n) - np.full((n, n), 1.0 / n)


def _sym(X):
    return 0.5 * (X + X.T)


def build_objective(K_xx, K_yy, delta, lam, n_s, n_t, normalize=False):
    """Assemble the pencil matrices.

    Parameters
    ----------
    K_xx : ndarray of shape (n_st, n_st)
        Feature kernel over stacked source/target samples.
    K_yy : ndarray of shape (n_st, n_st) or None
        Label kernel. ``None`` drops the discrepancy term entirely, leaving
        the ``lam * I`` regulariser (kernel PCA, the large-``lam`` limit).
    delta : float
        Weight of the within-domain dependence term.
    lam : float
        Positive regularisation weight.
    n_s, n_t : int
        Domain sizes; ``n_s + n_t == n_st``.
    normalize : bool, default=False
        Scale ``M * K_yy`` to unit Frobenius norm before use.
    """
    if not lam > 0:
        raise ValidationError(f"lam must be positive, got {lam}")
    n = n_s + n_t
    K_xx = check_square(K_xx, n, "K_xx")
    if K_yy is None:
        A = lam * np.eye(n)
    else:
        K_yy = check_square(K_yy, n, "K_yy")
        W = mmd_novel(n_s, n_t, delta) * K_yy
        if normalize:
            norm = np.linalg.norm(W)
            if norm > 0:
                W = W / norm
        A = _sym(K_xx @ W @ K_xx) + lam * np.eye(n)
    H = centering_matrix(n)
    C = _sym(K_xx @ H @ K_xx)
    return Objective(A=A, C=C, lam=float(lam), delta=float(delta))


def default_ridge(C):
    n = C.shape[0]
    return 1e-9 * float(np.trace(C)) / n


def _fix_signs(B):
    idx = np.argmax(np.abs(B), axis=0)
    signs = np.sign(B[idx, np.arange(B.shape[1])])
    signs[signs == 0] = 1.0
    return B * signs


def solve_projection(obj, d, ridge=None):
    """Eigenvectors of the ``d`` smallest eigenvalues of the ridged pencil.

    Returns columns normalised so that ``B^T (C + ridge I) B = I``, each with
    its largest-magnitude entry made positive.
    """
    A, C = obj.A, obj.C
    n = A.shape[0]
    if not 1 <= d < n:
        raise ValidationError(f"need 1 <= d < n_st = {n}, got d={d}")
    if ridge is None:
        ridge = default_ridge(C)
    if ridge < 0:
        raise ValidationError(f"ridge must be non-negative, got {ridge}")
    rhs = C + ridge * np.eye(n)
    try:
        theta, B = scipy.linalg.eigh(A, rhs, driver="gvd")
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"constraint matrix is not positive definite with ridge={ridge:.3g}; "
            "increase the ridge"
        ) from exc
    return Projection(B=_fix_signs(B[:, :d]), theta=theta[:d], ridge=float(ridge))


def embed(proj, K_xx):
    """Sample embeddings ``K_xx @ B``; rows follow the columns of ``K_xx``.

    Row ``i`` is the projection of sample ``i``. For a kernel between new
    samples and the fitted ones this gives out-of-sample embeddings.
    """
    K_xx = np.asarray(K_xx, dtype=np.float64)
    if K_xx.ndim != 2 or K_xx.shape[1] != proj.B.shape[0]:
        raise ValidationError(
            f"kernel has {K_xx.shape[-1]} columns, projection expects {proj.B.shape[0]}"
        )
    return K_xx @ proj.B


def generalized_residuals(obj, proj):
    """Per-column ``||A b - theta (C + ridge I) b||`` and its relative scale."""
    rhs = obj.C + proj.ridge * np.eye(obj.C.shape[0])
    R = obj.A @ proj.B - (rhs @ proj.B) * proj.theta
    res = np.linalg.norm(R, axis=0)
    scale = np.linalg.norm(obj.A, 2) + np.abs(proj.theta) * np.linalg.norm(obj.C, 2)
    return res, scale


def save_projection(path, proj):
    np.savez(path, B=proj.B, theta=proj.theta, ridge=proj.ridge)


def load_projection(path):
    with np.load(path) as f:
        return Projection(B=f["B"], theta=f["theta"], ridge=float(f["ridge"]))
