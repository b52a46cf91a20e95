"""Quadratic-distance risk estimation for parametric model selection.

Implements kernel-based quadratic distances, their U/V estimators, the
QAIC/QBIC risk criteria with the MLF + PEC decomposition, the
minimal-risk-adequate (MRA) rule, and a simulation harness — specialized to
selecting the number of components in multivariate Gaussian mixtures, with
the Pearson chi-squared (partition) kernel retained as an exact oracle.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DegenerateDataError,
    DegenerateKernelError,
    DomainError,
    FitFailureError,
    InfeasibleError,
    QuadriskError,
    ScoreUnderflowError,
)
from .kernels import (
    GaussianKernel,
    KernelMatrix,
    ModelIntegrals,
    PartitionKernel,
    center_empirically,
    center_under_model,
    eval_kernel,
    integrals_vs_gaussian_mixture,
    integrals_vs_partition_model,
    kernel_matrix,
    scale_kernel,
)
from .mixture import (
    FitConfig,
    FitResult,
    GaussianMixture,
    extended_scores,
    fit_em,
    param_dim,
    score_matrix,
    score_vector,
)
from .quaddist import (
    DistanceEstimates,
    ProjectionMatrix,
    build_projection,
    distance_estimates,
    score_center,
    traces,
    u_statistic,
    v_statistic,
)
from .risk import (
    Benchmark,
    CVConfig,
    RandomSubsets,
    RiskBreakdown,
    VFold,
    aic,
    bic,
    cv_unbiased_risk,
    empirical_risk_biased,
    empirical_risk_unbiased,
    mlf_hat,
    model_centered_matrix,
    pec_hat,
    qaic,
    qbic,
    quadratic_risk_at_m,
)
from .selection import ModelScanResult, mra, risk_curve, scan, standardize
from .simgen import FrequencyTable, ScanConfig, ScenarioSpec, canonical_mixture, generate, run_experiment
from .tuning import SdofReport, recommend_h, sdof_empirical, sdof_of_matrix
