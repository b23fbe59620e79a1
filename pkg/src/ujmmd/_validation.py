"""Input validation helpers shared across the package."""

import numpy as np
from sklearn.utils import check_array


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


def check_features(X, name="X"):
    """Return ``X`` as a finite 2-d float array of shape (n_samples, n_features)."""
    X = check_array(X, dtype=np.float64, ensure_all_finite=True, input_name=name)
    return X


def check_labels(y, n_classes=None, name="y"):
    """Return ``y`` as a 1-d int array, optionally checking ``0 <= y < n_classes``."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValidationError(f"{name} must be 1-d, got shape {y.shape}")
    if y.size == 0:
        return y.astype(np.intp)
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise ValidationError(f"{name} must contain integer class ids")
    y = y.astype(np.intp)
    if y.min() < 0:
        raise ValidationError(f"{name} contains negative class id {y.min()}")
    if n_classes is not None and y.max() >= n_classes:
        raise ValidationError(
            f"{name} contains class id {y.max()} outside [0, {n_classes})"
        )
    return y


def check_square(M, n=None, name="matrix"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise ValidationError(f"{name} must be {n}x{n}, got {M.shape[0]}x{M.shape[1]}")
    return M


def check_same_shape(*named):
    """Raise unless all ``(name, array)`` pairs share one shape."""
    shapes = {name: np.shape(a) for name, a in named}
    if len(set(shapes.values())) > 1:
        desc = ", ".join(f"{k}={v}" for k, v in shapes.items())
        raise ValidationError(f"dimension mismatch: {desc}")


def check_n_classes(n_classes):
    if int(n_classes) != n_classes or n_classes < 1:
        raise ValidationError(f"n_classes must be a positive integer, got {n_classes}")
    return int(n_classes)
