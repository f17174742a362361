"""Measuring and fixing the bias that hidden positives cause in validation metrics.

The package covers the full loop: tabular datasets with true and observed
labels, a from-scratch GBDT scorer, class-conditional noise injection,
label-cleaning methods, threshold/FPR metrics, exact identity checks for
the cleaning-error algebra, and an experiment harness with a CLI.
"""

from .cleaning import (
    METHOD_CLEANLAB,
    METHOD_DIRECT,
    METHOD_MICROMODEL,
    METHOD_NONE,
    CleaningAssignment,
    CleaningErrors,
    VoteMatrix,
    calibrated_flip_budget,
    clean_cleanlab_style,
    clean_direct_calibrated,
    clean_micromodel,
    clean_none,
    cleaning_errors,
)
from .datagen import benchmark_manifest, generate_benchmark, write_benchmark
from .experiment import (
    ConfigError,
    ExperimentConfig,
    ExperimentError,
    ExperimentResult,
    config_hash,
    emit_tables,
    load_config,
    run_experiment,
    run_theory_suite,
    write_outputs,
)
from .extremality import (
    ExtremalityReport,
    brute_force_max_fpr_gap,
    random_extremality_instance,
)
from .gbdt import (
    GbdtConfig,
    Model,
    ScoredExample,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    save_model,
    train,
    train_micromodels,
)
from .identities import (
    TOLERANCE,
    EmpiricalWorld,
    IdentityReport,
    check_calibration_balance,
    check_covariance_form,
    check_fpr_gap,
    check_gap_ratio,
    check_tpr_gap,
    random_world,
)
from .metrics import (
    MetricsReport,
    ThresholdReport,
    evaluate_method,
    rate_at_threshold,
    roc_points,
    threshold_for_fpr,
)
from .noise import (
    TIME_LINEAR,
    UNIFORM,
    NoiseReport,
    NoiseSpec,
    inject_noise,
    true_fraud_rate_from_noise,
)
from .tabular import (
    CATEGORICAL,
    NUMERIC,
    Column,
    DataError,
    Dataset,
    Example,
    FeatureSchema,
    SchemaError,
    load_dataset,
    parse_manifest,
    slice_shuffled,
    split_train_validation,
)
from .util import derive_seed, round_half_up

__version__ = "0.1.0"

__all__ = [
    "CATEGORICAL",
    "NUMERIC",
    "Column",
    "CleaningAssignment",
    "CleaningErrors",
    "ConfigError",
    "DataError",
    "Dataset",
    "EmpiricalWorld",
    "Example",
    "ExperimentConfig",
    "ExperimentError",
    "ExperimentResult",
    "ExtremalityReport",
    "FeatureSchema",
    "GbdtConfig",
    "IdentityReport",
    "METHOD_CLEANLAB",
    "METHOD_DIRECT",
    "METHOD_MICROMODEL",
    "METHOD_NONE",
    "MetricsReport",
    "Model",
    "NoiseReport",
    "NoiseSpec",
    "SchemaError",
    "ScoredExample",
    "ThresholdReport",
    "TIME_LINEAR",
    "TOLERANCE",
    "UNIFORM",
    "VoteMatrix",
    "benchmark_manifest",
    "brute_force_max_fpr_gap",
    "calibrated_flip_budget",
    "check_calibration_balance",
    "check_covariance_form",
    "check_fpr_gap",
    "check_gap_ratio",
    "check_tpr_gap",
    "clean_cleanlab_style",
    "clean_direct_calibrated",
    "clean_micromodel",
    "clean_none",
    "cleaning_errors",
    "config_hash",
    "derive_seed",
    "emit_tables",
    "evaluate_method",
    "generate_benchmark",
    "inject_noise",
    "load_config",
    "load_dataset",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "parse_manifest",
    "predict",
    "random_extremality_instance",
    "random_world",
    "rate_at_threshold",
    "roc_points",
    "round_half_up",
    "run_experiment",
    "run_theory_suite",
    "save_model",
    "slice_shuffled",
    "split_train_validation",
    "threshold_for_fpr",
    "train",
    "train_micromodels",
    "true_fraud_rate_from_noise",
    "write_benchmark",
    "write_outputs",
]
