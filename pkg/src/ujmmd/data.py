"""Domain containers, feature/label file IO, synthetic domains and label shift.

Feature arrays follow the scikit-learn layout ``(n_samples, n_features)``.
Feature files hold one sample per line as comma-separated decimals; label
files hold one 0-based integer class id per line.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._validation import ValidationError, check_features, check_labels, check_n_classes


class DataFormatError(ValueError):
    """A feature or label file could not be parsed."""


@dataclass(frozen=True)
class DomainPair:
    """A labeled source domain and an unlabeled target domain.

    ``target_truth`` is kept for evaluation only; no learning routine in this
    package reads it.
    """

    source_features: np.ndarray
    source_labels: np.ndarray
    target_features: np.ndarray
    n_classes: int
    target_truth: Optional[np.ndarray] = None

    def __post_init__(self):
        Xs = check_features(self.source_features, "source_features")
        Xt = check_features(self.target_features, "target_features")
        if Xs.shape[1] != Xt.shape[1]:
            raise ValidationError(
                f"source and target feature dimensions differ: {Xs.shape[1]} vs {Xt.shape[1]}"
            )
        C = check_n_classes(self.n_classes)
        ys = check_labels(self.source_labels, C, "source_labels")
        if ys.shape[0] != Xs.shape[0]:
            raise ValidationError(
                f"{ys.shape[0]} source labels for {Xs.shape[0]} source samples"
            )
        object.__setattr__(self, "source_features", Xs)
        object.__setattr__(self, "target_features", Xt)
        object.__setattr__(self, "source_labels", ys)
        object.__setattr__(self, "n_classes", C)
        if self.target_truth is not None:
            yt = check_labels(self.target_truth, C, "target_truth")
            if yt.shape[0] != Xt.shape[0]:
                raise ValidationError(
                    f"{yt.shape[0]} target labels for {Xt.shape[0]} target samples"
                )
            object.__setattr__(self, "target_truth", yt)
        for arr in (self.source_features, self.target_features, self.source_labels):
            arr.setflags(write=False)
        if self.target_truth is not None:
            self.target_truth.setflags(write=False)

    @property
    def n_source(self):
        return self.source_features.shape[0]

    @property
    def n_target(self):
        return self.target_features.shape[0]

    @property
    def n_features(self):
        return self.source_features.shape[1]

    def stacked(self):
        """Concatenated source-then-target features, shape ``(n_s + n_t, m)``."""
        return np.vstack([self.source_features, self.target_features])


# --------------------------------------------------------------------------
# File IO
# --------------------------------------------------------------------------


def _read_feature_rows(path):
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            tokens = text.split(",")
            try:
                row = [float(tok) for tok in tokens]
            except ValueError:
                bad = next(t for t in tokens if not _is_float(t))
                raise DataFormatError(
                    f"{path}:{lineno}: non-numeric token {bad.strip()!r}"
                ) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {width} columns, found {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise DataFormatError(f"{path}: no samples found")
    X = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        lineno = int(np.argwhere(~np.isfinite(X))[0, 0]) + 1
        raise DataFormatError(f"{path}: sample {lineno} has a non-finite value")
    return X


def _is_float(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def _read_label_rows(path):
    labels = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                labels.append(int(text))
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: label {text!r} is not an integer"
                ) from None
    return np.asarray(labels, dtype=np.intp)


def load_domain(features_path, labels_path=None, n_classes=None):
    """Read a feature file and an optional label file.

    Parameters
    ----------
    features_path : path-like
        One sample per line, comma-separated floats.
    labels_path : path-like, optional
        One integer class id per line, aligned with the feature rows.
    n_classes : int, optional
        When given, every label must lie in ``[0, n_classes)``.

    Returns
    -------
    X : ndarray of shape (n_samples, n_features)
    y : ndarray of shape (n_samples,) or None
    """
    X = _read_feature_rows(features_path)
    if labels_path is None:
        return X, None
    y = _read_label_rows(labels_path)
    if y.shape[0] != X.shape[0]:
        raise ValidationError(
            f"{labels_path}: {y.shape[0]} labels for {X.shape[0]} feature rows"
        )
    y = check_labels(y, n_classes, name=str(labels_path))
    return X, y


def save_domain(features_path, X, labels_path=None, y=None):
    """Write ``X`` (and ``y``) in the format read by :func:`load_domain`."""
    X = check_features(X)
    np.savetxt(features_path, X, delimiter=",", fmt="%.17g")
    if labels_path is not None:
        if y is None:
            raise ValueError("labels_path given without labels")
        np.savetxt(labels_path, check_labels(y), fmt="%d")


def normalize_features(X, how="none"):
    """Per-sample L2 scaling (``"l2"``) or per-feature z-scoring (``"zscore"``)."""
    X = check_features(X)
    if how == "none":
        return X
    if how == "l2":
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return X / norms
    if how == "zscore":
        std = X.std(axis=0)
        std[std == 0] = 1.0
        return (X - X.mean(axis=0)) / std
    raise ValueError(f"unknown normalization {how!r}; expected none, l2 or zscore")


# --------------------------------------------------------------------------
# Labels
# --------------------------------------------------------------------------


def harden(probs):
    """Argmax over classes of a row-stochastic ``(n_samples, n_classes)`` array.

    Ties go to the lowest class index.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2:
        raise ValidationError(f"soft labels must be 2-d, got shape {probs.shape}")
    return np.argmax(probs, axis=1).astype(np.intp)


def one_hot(y, n_classes):
    y = check_labels(y, n_classes)
    out = np.zeros((y.shape[0], n_classes))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def class_counts(y, n_classes):
    """Histogram of class ids, length ``n_classes``."""
    y = check_labels(y, n_classes)
    return np.bincount(y, minlength=n_classes)


# --------------------------------------------------------------------------
# Synthetic domains and label shift
# --------------------------------------------------------------------------


def _class_means(n_classes, dim, separation, rng):
    if n_classes <= dim:
        # simplex vertices: every pair of means is exactly `separation` apart
        means = np.zeros((n_classes, dim))
        means[np.arange(n_classes), np.arange(n_classes)] = separation / np.sqrt(2.0)
        return means
    directions = rng.standard_normal((n_classes, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * separation / np.sqrt(2.0)


def _random_vector(dim, norm, rng):
    v = rng.standard_normal(dim)
    return v * (norm / np.linalg.norm(v))


def _draw(means, counts, rng):
    X = [rng.standard_normal((n, means.shape[1])) + means[c] for c, n in enumerate(counts)]
    y = [np.full(n, c, dtype=np.intp) for c, n in enumerate(counts)]
    return np.vstack(X), np.concatenate(y)


def generate_synthetic(
    n_classes,
    per_class_source,
    per_class_target,
    dim,
    class_separation,
    domain_shift,
    seed,
    class_shift=0.0,
):
    """Isotropic unit-variance Gaussian blobs for a source/target pair.

    Parameters
    ----------
    n_classes : int
        Number of classes, at least 2.
    per_class_source, per_class_target : sequence of int
        Samples per class in each domain.
    dim : int
        Feature dimension, at least 2.
    class_separation : float
        Distance between any two class means (exact when ``n_classes <= dim``).
    domain_shift : float
        Norm of the common translation applied to all target means.
    seed : int
        Seed for ``numpy.random.default_rng``.
    class_shift : float, default=0.0
        Norm of an extra per-class translation of the target means.

    Returns
    -------
    DomainPair
        Samples ordered by class within each domain; ``target_truth`` is set.
    """
    C = check_n_classes(n_classes)
    if C < 2:
        raise ValidationError("need at least 2 classes")
    if dim < 2:
        raise ValidationError("dim must be >= 2")
    ns = np.asarray(per_class_source, dtype=int)
    nt = np.asarray(per_class_target, dtype=int)
    if ns.shape != (C,) or nt.shape != (C,):
        raise ValidationError(f"per-class counts must both have length {C}")
    if (ns < 0).any() or (nt < 0).any():
        raise ValidationError("per-class counts must be non-negative")
    empty = np.flatnonzero((ns == 0) & (nt == 0))
    if empty.size:
        raise ValidationError(f"classes {empty.tolist()} have no samples in either domain")

    rng = np.random.default_rng(seed)
    means = _class_means(C, dim, class_separation, rng)
    shift = _random_vector(dim, domain_shift, rng) if domain_shift else np.zeros(dim)
    target_means = means + shift
    if class_shift:
        target_means = target_means + np.array(
            [_random_vector(dim, class_shift, rng) for _ in range(C)]
        )
    Xs, ys = _draw(means, ns, rng)
    Xt, yt = _draw(target_means, nt, rng)
    return DomainPair(Xs, ys, Xt, C, target_truth=yt)


def _drop_per_class(labels, classes, drop_fraction, rng):
    keep = np.ones(labels.shape[0], dtype=bool)
    for c in classes:
        members = np.flatnonzero(labels == c)
        n_drop = int(np.floor(drop_fraction * members.size))
        if n_drop:
            keep[rng.choice(members, size=n_drop, replace=False)] = False
    return keep


def simulate_label_shift(pair, drop_fraction=0.5, seed=0):
    """Drop samples per class to create opposite class imbalance in both domains.

    ``floor(drop_fraction * n_c)`` randomly chosen samples are removed from
    every class ``c < C // 2`` of the source and from every class
    ``c >= C // 2`` of the target. Remaining samples keep their order.
    """
    if not 0 <= drop_fraction < 1:
        raise ValidationError(f"drop_fraction must lie in [0, 1), got {drop_fraction}")
    if pair.target_truth is None:
        raise ValidationError("label shift needs target_truth to drop target samples by class")
    C = pair.n_classes
    half = C // 2
    rng = np.random.default_rng(seed)
    keep_s = _drop_per_class(pair.source_labels, range(half), drop_fraction, rng)
    keep_t = _drop_per_class(pair.target_truth, range(half, C), drop_fraction, rng)

    ys = pair.source_labels[keep_s]
    missing = np.flatnonzero(class_counts(ys, C) == 0)
    if missing.size:
        raise ValidationError(f"source classes {missing.tolist()} would be empty")
    return replace(
        pair,
        source_features=pair.source_features[keep_s],
        source_labels=ys,
        target_features=pair.target_features[keep_t],
        target_truth=pair.target_truth[keep_t],
    )
