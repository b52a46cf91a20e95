"""End-to-end model scan over k: criteria, adequacy benchmark and MRA rule.

For each candidate component count k the pipeline fits a mixture, builds the
score projection, centers the (shared) kernel matrix under the fitted model
and assembles QAIC/QBIC/AIC/BIC.  A model is adequate when its QAIC total
does not exceed the risk of the empirical distribution; the MRA decision is
the smallest adequate k, or None when every scanned model is inadequate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, FitFailureError
from .kernels import center_empirically, kernel_matrix
from .mixture import FitConfig, FitResult, GaussianMixture, fit_em, score_matrix
from .quaddist import build_projection, traces
from .risk import (
    Benchmark,
    CVConfig,
    RiskBreakdown,
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

__all__ = ["PerKResult", "ModelScanResult", "standardize", "scan", "mra", "risk_curve"]

CRITERIA = ("AIC", "BIC", "QAIC", "QBIC", "MRA")


def standardize(data):
    """Scale each coordinate to unit sample variance (means untouched).

    Returns (scaled data, scale vector); raises on zero-variance coordinates.
    """
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[0] == 1 and np.asarray(data).ndim == 1:
        x = x.T
    var = x.var(axis=0, ddof=1)
    bad = np.flatnonzero(var <= 0)
    if bad.size:
        raise DegenerateDataError(f"coordinate {bad[0]} has zero sample variance")
    scales = 1.0 / np.sqrt(var)
    return x * scales, scales


@dataclass
class PerKResult:
    k: int
    fit: FitResult | None
    qaic: RiskBreakdown | None
    qbic: RiskBreakdown | None
    aic: float | None
    bic: float | None
    risk_at_m: RiskBreakdown | None = None
    cv_risk: tuple | None = None
    adequate: bool = False
    failed: str | None = None

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "fit": self.fit.to_dict() if self.fit else None,
            "qaic": self.qaic.to_dict() if self.qaic else None,
            "qbic": self.qbic.to_dict() if self.qbic else None,
            "aic": self.aic,
            "bic": self.bic,
            "risk_at_m": self.risk_at_m.to_dict() if self.risk_at_m else None,
            "cv_risk": list(self.cv_risk) if self.cv_risk else None,
            "adequate": self.adequate,
            "failed": self.failed,
        }

    @classmethod
    def from_dict(cls, d) -> "PerKResult":
        fit = None
        if d["fit"] is not None:
            f = d["fit"]
            fit = FitResult(
                model=GaussianMixture.from_dict(f["model"]),
                log_lik=f["log_lik"],
                iterations=f["iterations"],
                converged=f["converged"],
                param_dim=f["param_dim"],
            )
        return cls(
            k=d["k"],
            fit=fit,
            qaic=RiskBreakdown.from_dict(d["qaic"]) if d["qaic"] else None,
            qbic=RiskBreakdown.from_dict(d["qbic"]) if d["qbic"] else None,
            aic=d["aic"],
            bic=d["bic"],
            risk_at_m=RiskBreakdown.from_dict(d["risk_at_m"]) if d.get("risk_at_m") else None,
            cv_risk=tuple(d["cv_risk"]) if d.get("cv_risk") else None,
            adequate=d["adequate"],
            failed=d["failed"],
        )


@dataclass
class ModelScanResult:
    per_k: list
    benchmark: Benchmark
    decisions: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_k": [r.to_dict() for r in self.per_k],
            "benchmark": self.benchmark.to_dict(),
            "decisions": dict(self.decisions),
        }

    @classmethod
    def from_dict(cls, d) -> "ModelScanResult":
        return cls(
            per_k=[PerKResult.from_dict(r) for r in d["per_k"]],
            benchmark=Benchmark.from_dict(d["benchmark"]),
            decisions={k: v for k, v in d["decisions"].items()},
        )


def _argmin_k(rows, key):
    best_k, best_val = None, None
    for row in rows:
        val = key(row)
        if val is None:
            continue
        if best_val is None or val < best_val:  # ties resolve to the smaller k
            best_k, best_val = row.k, val
    return best_k


def scan(data, k_min, k_max, kernel_spec, fit_config: FitConfig | None = None,
         structure="full", extra_m=None, cv: CVConfig | None = None,
         check_standardized=True) -> ModelScanResult:
    """Scan component counts k_min..k_max and assemble all criteria."""
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[0] == 1 and np.asarray(data).ndim == 1:
        x = x.T
    n = x.shape[0]
    fit_config = fit_config or FitConfig()
    if check_standardized:
        var = x.var(axis=0, ddof=1)
        if np.any(np.abs(var - 1.0) > 0.5):
            warnings.warn("data does not look standardized (coordinate variance far from 1)")

    raw = kernel_matrix(kernel_spec, x)  # shared across k; only centering differs
    cen_emp = center_empirically(raw)
    benchmark = Benchmark(
        empirical_risk_biased=empirical_risk_biased(cen_emp, n),
        empirical_risk_unbiased=empirical_risk_unbiased(raw, n),
        m=float(n),
    )

    rows = []
    for k in range(k_min, k_max + 1):
        try:
            fit = fit_em(x, k, structure, fit_config)
        except FitFailureError as exc:
            rows.append(PerKResult(k, None, None, None, None, None, failed=str(exc)))
            continue
        scores = score_matrix(fit.model, x)
        proj = build_projection(scores)
        cen = model_centered_matrix(kernel_spec, x, fit.model)
        tr_scen, tr_pkp = traces(cen, proj)
        mlf = mlf_hat(cen, proj, tr_scen)
        pec_n = pec_hat(tr_pkp, n, n)
        row = PerKResult(
            k=k,
            fit=fit,
            qaic=qaic(mlf, pec_n, n),
            qbic=qbic(mlf, pec_n, n),
            aic=aic(fit.log_lik, fit.param_dim, n),
            bic=bic(fit.log_lik, fit.param_dim, n),
        )
        if extra_m is not None:
            row.risk_at_m = quadratic_risk_at_m(mlf, pec_n, n, extra_m)
        if cv is not None:
            row.cv_risk = cv_unbiased_risk(x, k, structure, fit_config, kernel_spec, cv)
        row.adequate = row.qaic.total <= benchmark.empirical_risk_biased
        rows.append(row)

    if all(r.failed for r in rows):
        raise FitFailureError("every candidate k failed to fit")

    decisions = {
        "AIC": _argmin_k(rows, lambda r: r.aic),
        "BIC": _argmin_k(rows, lambda r: r.bic),
        "QAIC": _argmin_k(rows, lambda r: r.qaic.total if r.qaic else None),
        "QBIC": _argmin_k(rows, lambda r: r.qbic.total if r.qbic else None),
    }
    result = ModelScanResult(per_k=rows, benchmark=benchmark, decisions=decisions)
    result.decisions["MRA"] = mra(result)
    return result


def mra(result: ModelScanResult):
    """Smallest adequate k, or None when no scanned model is adequate."""
    for row in result.per_k:
        if row.failed is None and row.adequate:
            return row.k
    return None


def risk_curve(result: ModelScanResult):
    """One row per scanned k for plotting risk components against k."""
    rows = []
    for r in result.per_k:
        if r.failed is not None:
            continue
        rows.append(
            {
                "k": r.k,
                "mlf_hat": r.qaic.mlf_hat,
                "pec_hat": r.qaic.pec_hat_at_n,
                "qaic": r.qaic.total,
                "qbic": r.qbic.total,
                "benchmark": result.benchmark.empirical_risk_biased,
            }
        )
    return rows
