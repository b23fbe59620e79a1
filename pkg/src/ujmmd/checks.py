"""Executable property checks on seeded random instances.

Each check returns a :class:`CheckResult`; :func:`run_checks` runs them all.
The ``marginal`` argument lets tests inject a faulty MMD-matrix builder to
confirm the identities actually discriminate.
"""

import time
from typing import Callable, NamedTuple

import numpy as np

from .data import one_hot
from .kernels import feature_kernel, label_kernel, psd_report
from .mmd import (
    brute_force_hsi,
    brute_force_jmmd,
    hsi_metric,
    jmmd_distance,
    mmd_classwise,
    mmd_marginal,
    mmd_weighted_classwise,
    projected_jmmd,
    projected_jmmd_inner,
)
from .solver import Objective, generalized_residuals, solve_projection


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float


def _rel(a, b):
    return abs(a - b) / (1.0 + max(abs(a), abs(b)))


def random_labels(rng, n_s, n_t, n_classes, cover=True):
    """Random source/target labels; with ``cover`` every class appears in both."""
    def draw(n):
        y = rng.integers(0, n_classes, size=n)
        if cover:
            y[:n_classes] = rng.permutation(n_classes)
        return rng.permutation(y)

    return draw(n_s), draw(n_t)


def random_instance(rng, max_n=30, max_m=8, max_c=5):
    C = int(rng.integers(2, max_c + 1))
    n_s = int(rng.integers(C, max_n + 1))
    n_t = int(rng.integers(C, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    X = rng.standard_normal((n_s + n_t, m))
    ys, yt = random_labels(rng, n_s, n_t, C)
    return X, ys, yt, n_s, n_t, C


def check_oracle(rng, n=50, marginal=mmd_marginal):
    worst = 0.0
    for _ in range(n):
        X, ys, yt, n_s, n_t, C = random_instance(rng)
        K = feature_kernel(X)
        K_yy = label_kernel(3, ys, yt, C)
        got = jmmd_distance(K, K_yy, marginal(n_s, n_t))
        Y = one_hot(np.concatenate([ys, yt]), C)
        worst = max(worst, _rel(got, brute_force_jmmd(X, Y, n_s, n_t)))
    return worst <= 1e-10, f"max rel err {worst:.2e}"


def check_label_kernel_identities(rng, n=50, marginal=mmd_marginal):
    worst = 0.0
    for _ in range(n):
        X, ys, yt, n_s, n_t, C = random_instance(rng)
        K = feature_kernel(X)
        M = marginal(n_s, n_t)
        lhs1 = jmmd_distance(K, label_kernel(1, ys, yt, C), M)
        rhs1 = float(np.sum(K * M.T))
        lhs2 = jmmd_distance(K, label_kernel(2, ys, yt, C), M)
        rhs2 = sum(float(np.sum(K * mmd_classwise(ys, yt, c))) for c in range(C))
        lhs3 = jmmd_distance(K, label_kernel(3, ys, yt, C), M)
        rhs3 = sum(float(np.sum(K * mmd_weighted_classwise(ys, yt, c))) for c in range(C))
        worst = max(worst, _rel(lhs1, rhs1), _rel(lhs2, rhs2), _rel(lhs3, rhs3))
    return worst <= 1e-10, f"max rel err {worst:.2e}"


def check_projected(rng, n=50, marginal=mmd_marginal):
    worst = 0.0
    for _ in range(n):
        X, ys, yt, n_s, n_t, C = random_instance(rng)
        K = feature_kernel(X, Y=None)
        K_yy = label_kernel(int(rng.integers(1, 5)), ys, yt, C)
        M = marginal(n_s, n_t)
        B = rng.standard_normal((n_s + n_t, int(rng.integers(1, 6))))
        worst = max(worst, _rel(projected_jmmd(K, K_yy, M, B), projected_jmmd_inner(K, K_yy, M, B)))
    return worst <= 1e-10, f"max rel err {worst:.2e}"


def check_label_psd(rng, n=100, **_):
    lowest = np.inf
    for _ in range(n):
        C = int(rng.integers(2, 6))
        n_s, n_t = int(rng.integers(C, 31)), int(rng.integers(C, 31))
        ys, yt = random_labels(rng, n_s, n_t, C)
        for v in (1, 2, 3, 4):
            lowest = min(lowest, psd_report(label_kernel(v, ys, yt, C)).min_eigenvalue)
    # proportional classes: target is the source label multiset repeated
    ys, _ = random_labels(rng, 12, 3, 3)
    yt = rng.permutation(np.tile(ys, 2))
    equal = np.array_equal(label_kernel(4, ys, yt, 3), label_kernel(3, ys, yt, 3))
    ok = lowest >= -1e-8 and equal
    return ok, f"min eigenvalue {lowest:.2e}, K4==K3 under equal priors: {equal}"


def check_hsi_oracle(rng, n=50, **_):
    worst = 0.0
    for _ in range(n):
        X, ys, yt, n_s, n_t, C = random_instance(rng)
        got = hsi_metric(feature_kernel(X), label_kernel(3, ys, yt, C), n_s, n_t)
        Y = one_hot(np.concatenate([ys, yt]), C)
        worst = max(worst, _rel(got, brute_force_hsi(X, Y, n_s, n_t)))
    return worst <= 1e-10, f"max rel err {worst:.2e}"


def check_duplication(rng, n=20, marginal=mmd_marginal):
    worst = 0.0
    for _ in range(n):
        X, ys, yt, n_s, n_t, C = random_instance(rng)
        Xs, Xt = X[:n_s], X[n_s:]
        base = jmmd_distance(feature_kernel(X), label_kernel(4, ys, yt, C), marginal(n_s, n_t))
        X2 = np.vstack([Xs, Xs, Xt])
        ys2 = np.concatenate([ys, ys])
        dup = jmmd_distance(
            feature_kernel(X2), label_kernel(4, ys2, yt, C), marginal(2 * n_s, n_t)
        )
        worst = max(worst, _rel(base, dup))
    return worst <= 1e-10, f"max rel err {worst:.2e}"


def random_objective(rng, n_max=100):
    n = int(rng.integers(20, n_max + 1))
    G = rng.standard_normal((n, n))
    A = 0.5 * (G + G.T)
    F = rng.standard_normal((n, n + 5))
    C = F @ F.T / n
    return Objective(A=A, C=0.5 * (C + C.T), lam=0.0, delta=0.0)


def check_eigensolver(rng, n=20, **_):
    worst_res = worst_orth = 0.0
    for _ in range(n):
        obj = random_objective(rng)
        d = int(rng.integers(1, 11))
        proj = solve_projection(obj, d)
        res, scale = generalized_residuals(obj, proj)
        worst_res = max(worst_res, float(np.max(res / scale)))
        rhs = obj.C + proj.ridge * np.eye(obj.C.shape[0])
        G = proj.B.T @ rhs @ proj.B
        worst_orth = max(worst_orth, float(np.max(np.abs(G - np.eye(d)))))
    ok = worst_res <= 1e-6 and worst_orth <= 1e-8
    return ok, f"max rel residual {worst_res:.2e}, max |B'CB - I| {worst_orth:.2e}"


CHECKS = {
    "oracle_jmmd_vs_explicit_embedding": check_oracle,
    "label_kernel_mmd_identities": check_label_kernel_identities,
    "projected_trace_identity": check_projected,
    "label_kernels_psd": check_label_psd,
    "hsi_vs_explicit_embedding": check_hsi_oracle,
    "k4_source_duplication_invariance": check_duplication,
    "generalized_eigensolver_contract": check_eigensolver,
}


def run_checks(seed=0, marginal: Callable = mmd_marginal):
    """Run every registered check with its own seeded generator."""
    results = []
    for i, (name, fn) in enumerate(CHECKS.items()):
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng, marginal=marginal)
        except Exception as exc:  # a crash is a failed property, not a crashed report
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results
