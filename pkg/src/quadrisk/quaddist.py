"""Distance estimators, score projections and trace machinery.

The projection onto a score column span is realized as the hat matrix
``U (U'U)^- U'`` with a rank-revealing pseudo-inverse, which is idempotent
and reproduces the identity projection in the saturated case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InfeasibleError
from .kernels import (
    EMPIRICALLY_CENTERED,
    MODEL_CENTERED,
    SCORE_CENTERED,
    KernelMatrix,
)

__all__ = [
    "ProjectionMatrix",
    "DistanceEstimates",
    "v_statistic",
    "u_statistic",
    "distance_estimates",
    "build_projection",
    "score_center",
    "traces",
]

_SV_RTOL = 1e-10  # singular values below this fraction of the largest are dropped


@dataclass
class ProjectionMatrix:
    """Symmetric idempotent projection onto a column span."""

    values: np.ndarray
    rank: int
    condition_number: float
    rank_deficient: bool = False

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class DistanceEstimates:
    """Plug-in (V) and unbiased (U) estimates of a quadratic distance."""

    v_stat: float
    u_stat: float
    n: int


def v_statistic(cen: KernelMatrix) -> float:
    """1' K 1 / n^2 of a centered kernel matrix."""
    if cen.centering not in (MODEL_CENTERED, EMPIRICALLY_CENTERED, SCORE_CENTERED):
        raise ConfigurationError("v_statistic expects a centered kernel matrix")
    return float(cen.values.sum()) / cen.n**2


def u_statistic(cen: KernelMatrix) -> float:
    """[1' K 1 - tr(K)] / (n (n-1)): mean of the off-diagonal entries."""
    if cen.centering not in (MODEL_CENTERED, EMPIRICALLY_CENTERED, SCORE_CENTERED):
        raise ConfigurationError("u_statistic expects a centered kernel matrix")
    n = cen.n
    if n < 2:
        raise InfeasibleError("u_statistic needs n >= 2")
    return (float(cen.values.sum()) - float(np.trace(cen.values))) / (n * (n - 1))


def distance_estimates(cen: KernelMatrix) -> DistanceEstimates:
    return DistanceEstimates(v_statistic(cen), u_statistic(cen), cen.n)


def build_projection(columns) -> ProjectionMatrix:
    """Hat matrix of a column matrix via a rank-revealing SVD."""
    u = np.atleast_2d(np.asarray(columns, dtype=float))
    n, m = u.shape
    if n <= m:
        raise InfeasibleError(f"need more rows than columns, got {n} x {m}")
    if m == 0:
        return ProjectionMatrix(np.zeros((n, n)), 0, 1.0)
    left, sv, _ = np.linalg.svd(u, full_matrices=False)
    keep = sv > _SV_RTOL * sv[0] if sv[0] > 0 else np.zeros_like(sv, dtype=bool)
    rank = int(keep.sum())
    basis = left[:, keep]
    values = basis @ basis.T
    values = 0.5 * (values + values.T)
    cond = float(sv[0] / sv[keep][-1]) if rank > 0 else np.inf
    return ProjectionMatrix(values, rank, cond, rank_deficient=rank < m)


def score_center(km: KernelMatrix, proj: ProjectionMatrix) -> KernelMatrix:
    """(I - P) K (I - P); annihilated by P on both sides."""
    if km.n != proj.n:
        raise ConfigurationError("kernel and projection sizes differ")
    res = np.eye(km.n) - proj.values
    values = res @ km.values @ res
    values = 0.5 * (values + values.T)
    return KernelMatrix(values, SCORE_CENTERED, model_id=km.model_id)


def traces(km: KernelMatrix, proj: ProjectionMatrix):
    """tr((I-P) K (I-P)) and tr(P K P) of a symmetric kernel matrix.

    Uses tr(P K P) = tr(P K) = sum(P * K) for an idempotent symmetric P;
    the O(n^3) sandwich is never formed.
    """
    if km.n != proj.n:
        raise ConfigurationError("kernel and projection sizes differ")
    tr_k = float(np.trace(km.values))
    tr_pkp = float(np.sum(proj.values * km.values))
    tr_scen = tr_k - tr_pkp
    return tr_scen, tr_pkp
