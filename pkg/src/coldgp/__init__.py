"""coldgp: tempered Gaussian-process inference and experiment harness.

Exact GP regression with posterior tempering, latent GP classification via
elliptical slice sampling (including infinite-width network kernels), a
closed-form relabel-disagreement probe for aleatoric uncertainty, and a
deterministic CLI for running temperature-sweep experiments.
"""
from .aleatoric import (
    ProbeConfig,
    ProbePoint,
    relabel_disagreement_mc,
    relabel_prob_quadrature,
    relabel_prob_zero_temperature,
    relabel_ratio_curve,
)
from .classification import (
    EssConfig,
    LatentSampleSet,
    LatentState,
    classification_metrics,
    classification_temperature_sweep,
    ess_transition,
    latent_conditional_moments,
    predictive_class_probs,
    sample_latent_posterior,
    tempered_log_likelihood,
)
from .cli import emit_plot_data, main, run_experiment
from .config import ExperimentConfig, apply_overrides, load_config, parse_config
from .data import (
    CIFAR_TEST_FILE,
    CIFAR_TRAIN_FILES,
    LabeledDataset,
    gen_cluster_classification,
    gen_rbf_regression,
    input_stats,
    load_cifar10,
    load_dataset,
    normalize_inputs,
    save_dataset,
)
from .exceptions import (
    ColdGPError,
    ConfigError,
    DimensionMismatchError,
    EmptyInputError,
    IndexOutOfRangeError,
    LabelOutOfRangeError,
    LengthMismatchError,
    MalformedRecordError,
    NonFiniteInputError,
    NonFiniteLikelihoodError,
    NonPositiveScaleError,
    NonPositiveTemperatureError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    QuadratureNotConvergedError,
    SchemaMismatchError,
    ZeroVarianceError,
)
from .kernels import FAMILIES, KernelSpec, gram, gram_diag, kernel_eval, scale_kernel
from .linalg import (
    JITTER_LADDER,
    SpdFactor,
    cholesky,
    log_sum_exp,
    mvn_logpdf,
    mvn_sample,
    solve_spd,
)
from .records import SweepRecord, SweepResult, format_cell, read_csv, select_best, write_csv
from .regression import (
    DEFAULT_TEMPERATURE_GRID,
    ConditionedRegression,
    PredictiveGaussian,
    RegressionModel,
    condition,
    gaussian_test_nll,
    posterior_predict,
    regression_temperature_sweep,
    temper_predictive,
)
from .rng import RngStream, derive_seed

__version__ = "0.1.0"

__all__ = [
    "ProbeConfig", "ProbePoint", "relabel_disagreement_mc", "relabel_prob_quadrature",
    "relabel_prob_zero_temperature", "relabel_ratio_curve",
    "EssConfig", "LatentSampleSet", "LatentState", "classification_metrics",
    "classification_temperature_sweep", "ess_transition", "latent_conditional_moments",
    "predictive_class_probs", "sample_latent_posterior", "tempered_log_likelihood",
    "emit_plot_data", "main", "run_experiment",
    "ExperimentConfig", "apply_overrides", "load_config", "parse_config",
    "CIFAR_TEST_FILE", "CIFAR_TRAIN_FILES",
    "LabeledDataset", "gen_cluster_classification", "gen_rbf_regression", "input_stats",
    "load_cifar10", "load_dataset", "normalize_inputs", "save_dataset",
    "ColdGPError", "ConfigError", "DimensionMismatchError", "EmptyInputError",
    "IndexOutOfRangeError", "LabelOutOfRangeError", "LengthMismatchError",
    "MalformedRecordError", "NonFiniteInputError", "NonFiniteLikelihoodError",
    "NonPositiveScaleError", "NonPositiveTemperatureError", "NotPositiveDefiniteError",
    "NotSymmetricError", "QuadratureNotConvergedError", "SchemaMismatchError",
    "ZeroVarianceError",
    "FAMILIES", "KernelSpec", "gram", "gram_diag", "kernel_eval", "scale_kernel",
    "JITTER_LADDER", "SpdFactor", "cholesky", "log_sum_exp", "mvn_logpdf", "mvn_sample",
    "solve_spd",
    "SweepRecord", "SweepResult", "format_cell", "read_csv", "select_best", "write_csv",
    "DEFAULT_TEMPERATURE_GRID", "ConditionedRegression", "PredictiveGaussian",
    "RegressionModel", "condition", "gaussian_test_nll", "posterior_predict",
    "regression_temperature_sweep", "temper_predictive",
    "RngStream", "derive_seed",
    "__version__",
]
