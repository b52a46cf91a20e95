"""Risk estimators: empirical benchmarks, MLF/PEC, QAIC, QBIC and CV risk.

The estimated risk of a fitted model decomposes as

    total(m) = MLF_hat + (n / m) * PEC_hat(n),

where MLF_hat is the bias-corrected model lack of fit and PEC_hat(n) the
parameter estimation cost at the observed sample size.  QAIC evaluates the
risk at m = n, QBIC at m = n / (log n - 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConfigurationError, FitFailureError, InfeasibleError
from .kernels import (
    EMPIRICALLY_CENTERED,
    MODEL_CENTERED,
    RAW,
    GaussianKernel,
    KernelMatrix,
    PartitionKernel,
    center_under_model,
    integrals_vs_gaussian_mixture,
    integrals_vs_partition_model,
    kernel_matrix,
)
from .mixture import FitConfig, fit_em
from .quaddist import ProjectionMatrix, u_statistic

__all__ = [
    "RiskBreakdown",
    "Benchmark",
    "VFold",
    "RandomSubsets",
    "CVConfig",
    "empirical_risk_unbiased",
    "empirical_risk_biased",
    "mlf_hat",
    "pec_hat",
    "qaic",
    "qbic",
    "quadratic_risk_at_m",
    "aic",
    "bic",
    "cv_unbiased_risk",
    "model_centered_matrix",
]


@dataclass
class RiskBreakdown:
    """Estimated quadratic risk of one fitted model at sample-size argument m."""

    mlf_hat: float
    pec_hat_at_n: float
    m: float
    total: float
    criterion: str

    def to_dict(self) -> dict:
        return {
            "mlf_hat": self.mlf_hat,
            "pec_hat_at_n": self.pec_hat_at_n,
            "m": self.m,
            "total": self.total,
            "criterion": self.criterion,
        }

    @classmethod
    def from_dict(cls, d) -> "RiskBreakdown":
        return cls(**d)


@dataclass
class Benchmark:
    """Risk of the empirical distribution: no lack of fit, maximal parameter cost."""

    empirical_risk_biased: float
    empirical_risk_unbiased: float
    m: float

    def to_dict(self) -> dict:
        return {
            "empirical_risk_biased": self.empirical_risk_biased,
            "empirical_risk_unbiased": self.empirical_risk_unbiased,
            "m": self.m,
        }

    @classmethod
    def from_dict(cls, d) -> "Benchmark":
        return cls(**d)


@dataclass(frozen=True)
class VFold:
    v: int
    seed: int = 0


@dataclass(frozen=True)
class RandomSubsets:
    count: int
    seed: int = 0


@dataclass(frozen=True)
class CVConfig:
    scheme: VFold | RandomSubsets
    m: int | None = None  # required for RandomSubsets; implied by folds for VFold


def empirical_risk_unbiased(raw: KernelMatrix, m) -> float:
    """Unbiased estimate of the empirical-distribution risk at sample size m."""
    if raw.centering != RAW:
        raise ConfigurationError("empirical_risk_unbiased expects a raw kernel matrix")
    n = raw.n
    if n < 2:
        raise InfeasibleError("need n >= 2")
    diag_mean = float(np.trace(raw.values)) / n
    off_mean = (float(raw.values.sum()) - float(np.trace(raw.values))) / (n * (n - 1))
    return (diag_mean - off_mean) / m


def empirical_risk_biased(cen: KernelMatrix, m) -> float:
    """tr(K_cen(Fhat)) / (n m), nonnegative for CNND kernels."""
    if cen.centering != EMPIRICALLY_CENTERED:
        raise ConfigurationError("empirical_risk_biased expects an empirically centered matrix")
    return float(np.trace(cen.values)) / (cen.n * m)


def mlf_hat(cen_model: KernelMatrix, proj: ProjectionMatrix, tr_scen: float) -> float:
    """Bias-corrected model lack of fit.

    The empirical distance term is the score-centered quadratic form
    (1/n^2) w' K_cen w with w = (I - P) 1; at an exact MLE the score columns
    sum to zero, making this equal to the model-centered V-statistic.  The
    result may be negative (the correction can overshoot).
    """
    if cen_model.centering != MODEL_CENTERED:
        raise ConfigurationError("mlf_hat expects a model-centered kernel matrix")
    if cen_model.n != proj.n:
        raise ConfigurationError("kernel and projection sizes differ")
    n = cen_model.n
    ones = np.ones(n)
    w = ones - proj.values @ ones
    dist = float(w @ cen_model.values @ w) / n**2
    return dist - tr_scen / n**2


def pec_hat(tr_pkp: float, n: int, m: float) -> float:
    """Parameter estimation cost: tr(P K P) / (n m)."""
    if m <= 0:
        raise ConfigurationError("m must be positive")
    return tr_pkp / (n * m)


def quadratic_risk_at_m(mlf: float, pec_at_n: float, n: int, m: float,
                        criterion: str = "risk@m") -> RiskBreakdown:
    """Estimated risk at an arbitrary sample-size argument m."""
    if m <= 0:
        raise ConfigurationError("m must be positive")
    total = mlf + (n / m) * pec_at_n
    return RiskBreakdown(mlf, pec_at_n, float(m), total, criterion)


def qaic(mlf: float, pec_at_n: float, n: int) -> RiskBreakdown:
    """Quadratic AIC risk: the estimate evaluated at m = n."""
    return quadratic_risk_at_m(mlf, pec_at_n, n, n, criterion="QAIC")


def qbic(mlf: float, pec_at_n: float, n: int) -> RiskBreakdown:
    """Quadratic BIC risk: the estimate evaluated at m = n / (log n - 1)."""
    if n < 3:
        raise InfeasibleError("QBIC needs n >= 3 (log n > 1)")
    breakdown = quadratic_risk_at_m(
        mlf, pec_at_n, n, n / (math.log(n) - 1.0), criterion="QBIC"
    )
    return breakdown


def aic(log_lik: float, p: int, n: int) -> float:
    """AIC on the per-observation scale: -2 l/n + 2 p/n."""
    return -2.0 * log_lik / n + 2.0 * p / n


def bic(log_lik: float, p: int, n: int) -> float:
    """BIC on the per-observation scale: -2 l/n + log(n) p/n."""
    return -2.0 * log_lik / n + math.log(n) * p / n


def model_centered_matrix(kernel_spec, data, model) -> KernelMatrix:
    """Raw kernel matrix of ``data`` centered under a fitted model.

    ``model`` is a GaussianMixture for the Gaussian kernel, or a vector of
    cell probabilities for the partition kernel.
    """
    raw = kernel_matrix(kernel_spec, data)
    if isinstance(kernel_spec, GaussianKernel):
        ints = integrals_vs_gaussian_mixture(kernel_spec, data, model)
    elif isinstance(kernel_spec, PartitionKernel):
        ints = integrals_vs_partition_model(kernel_spec, data, model)
    else:
        raise ConfigurationError(f"unsupported kernel spec {type(kernel_spec)!r}")
    return center_under_model(raw, ints)


def _subset_indices(n, cv: CVConfig):
    """Yield (train_indices, holdout_indices) pairs for the chosen scheme."""
    scheme = cv.scheme
    all_idx = np.arange(n)
    if isinstance(scheme, VFold):
        if scheme.v < 2:
            raise ConfigurationError("V-fold needs V >= 2")
        rng = np.random.default_rng(scheme.seed)
        perm = rng.permutation(n)
        folds = np.array_split(perm, scheme.v)
        for fold in folds:
            train = np.setdiff1d(all_idx, fold)
            yield train, np.sort(fold)
    elif isinstance(scheme, RandomSubsets):
        if cv.m is None:
            raise ConfigurationError("RandomSubsets requires an explicit m")
        m = cv.m
        total = math.comb(n, m)
        if total <= scheme.count:
            for combo in combinations(range(n), m):
                train = np.asarray(combo)
                yield train, np.setdiff1d(all_idx, train)
        else:
            rng = np.random.default_rng(scheme.seed)
            seen = set()
            while len(seen) < scheme.count:
                pick = tuple(sorted(rng.choice(n, size=m, replace=False).tolist()))
                if pick in seen:
                    continue
                seen.add(pick)
                train = np.asarray(pick)
                yield train, np.setdiff1d(all_idx, train)
    else:
        raise ConfigurationError(f"unknown CV scheme {scheme!r}")


def cv_unbiased_risk(data, k, structure, fit_config: FitConfig, kernel_spec,
                     cv: CVConfig):
    """Subset-based unbiased risk estimate.

    For each subset the model is fitted on the subset and the U-statistic of
    the model-centered kernel is computed over the held-out pairs.  Returns
    (mean, standard error) across subsets; the standard error ignores the
    correlation between overlapping subsets.
    """
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[0] == 1 and np.asarray(data).ndim == 1:
        x = x.T
    n = x.shape[0]
    estimates = []
    skipped = 0
    for train, holdout in _subset_indices(n, cv):
        m = train.size
        if not (2 <= m <= n - 2):
            raise InfeasibleError(f"subset size m={m} violates 2 <= m <= n-2")
        if holdout.size < 2:
            raise InfeasibleError("holdout must contain at least 2 points")
        try:
            fit = fit_em(x[train], k, structure, fit_config)
            cen = model_centered_matrix(kernel_spec, x[holdout], fit.model)
            estimates.append(u_statistic(cen))
        except FitFailureError as exc:
            skipped += 1
            warnings.warn(f"CV subset skipped after fit failure: {exc}")
    if not estimates:
        raise FitFailureError("every CV subset failed to fit")
    estimates = np.asarray(estimates)
    mean = float(estimates.mean())
    stderr = float(estimates.std(ddof=1) / math.sqrt(estimates.size)) if estimates.size > 1 else float("nan")
    return mean, stderr
