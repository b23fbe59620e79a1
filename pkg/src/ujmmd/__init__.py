"""Joint maximum mean discrepancy kernel subspace domain adaptation."""

from .data import (
    DomainPair,
    class_counts,
    generate_synthetic,
    harden,
    load_domain,
    one_hot,
    save_domain,
    simulate_label_shift,
)
from .estimator import JMMDClassifier, JMMDTransformer, knn_predict
from .kernels import KernelSpec, feature_kernel, label_kernel, median_bandwidth, psd_report
from .mmd import (
    brute_force_jmmd,
    hsi_metric,
    jmmd_distance,
    mmd_classwise,
    mmd_hsi,
    mmd_marginal,
    mmd_novel,
    mmd_weighted_classwise,
    projected_jmmd,
)
from .pipeline import (
    PRESET_NAMES,
    MethodSpec,
    RunResult,
    evaluate_ablation,
    method_from_preset,
    run_da,
    run_label_shift_experiment,
)
from .solver import Projection, build_objective, embed, solve_projection

__all__ = [
    "DomainPair",
    "class_counts",
    "generate_synthetic",
    "harden",
    "load_domain",
    "one_hot",
    "save_domain",
    "simulate_label_shift",
    "JMMDClassifier",
    "JMMDTransformer",
    "knn_predict",
    "KernelSpec",
    "feature_kernel",
    "label_kernel",
    "median_bandwidth",
    "psd_report",
    "brute_force_jmmd",
    "hsi_metric",
    "jmmd_distance",
    "mmd_classwise",
    "mmd_hsi",
    "mmd_marginal",
    "mmd_novel",
    "mmd_weighted_classwise",
    "projected_jmmd",
    "PRESET_NAMES",
    "MethodSpec",
    "RunResult",
    "evaluate_ablation",
    "method_from_preset",
    "run_da",
    "run_label_shift_experiment",
    "Projection",
    "build_objective",
    "embed",
    "solve_projection",
]

__version__ = "0.1.0"
