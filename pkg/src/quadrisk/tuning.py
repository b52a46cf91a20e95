"""Spectral degrees of freedom and bandwidth recommendation.

The sDOF of a kernel on a dataset calibrates the bandwidth the way the cell
count calibrates a chi-squared test: (sum lambda_i)^2 / sum lambda_i^2 of the
empirically centered kernel matrix, computed through traces only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateDataError
from .kernels import KernelMatrix, center_empirically, kernel_matrix

__all__ = [
    "SdofReport",
    "sdof_of_matrix",
    "sdof_empirical",
    "default_h_grid",
    "recommend_h",
    "sdof_bounds",
]

TOO_SMOOTH = "TooSmooth"
IN_RANGE = "InRange"
TOO_ROUGH = "TooRough"


@dataclass
class SdofReport:
    h: float
    sdof: float
    verdict: str


def sdof_of_matrix(cen: KernelMatrix) -> float:
    """(tr K_cen)^2 / tr(K_cen^2); lies in [1, rank] by Cauchy-Schwarz."""
    tr = float(np.trace(cen.values))
    tr2 = float(np.sum(cen.values**2))
    if tr2 <= 0:
        raise DegenerateDataError("centered kernel matrix is zero (identical points?)")
    return tr**2 / tr2


def sdof_empirical(data, kernel_spec) -> float:
    """Empirical sDOF of a kernel on a dataset."""
    data = np.asarray(data, dtype=float)
    if (data.shape[0] if data.ndim else 0) < 2:
        raise ConfigurationError("need at least 2 points")
    cen = center_empirically(kernel_matrix(kernel_spec, data))
    return sdof_of_matrix(cen)


def sdof_bounds(n: int, d: int):
    """(lower, upper) rule-of-thumb bounds: max(5, D(D+1)/2) and n/5."""
    return max(5.0, d * (d + 1) / 2.0), n / 5.0


def default_h_grid(lo=0.1, hi=3.0, count=24) -> np.ndarray:
    """Log-spaced bandwidth grid bracketing unit-variance scales."""
    return np.geomspace(lo, hi, count)


def recommend_h(data, h_grid=None):
    """Score a bandwidth grid by sDOF and pick a representative value.

    Returns (reports, recommended).  The recommendation is the median
    in-range grid point; if no grid point is in range, the one whose sDOF is
    closest (in log) to the geometric mean of the two bounds, with verdicts
    left to flag the situation.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[0] == 1 and np.asarray(data).ndim == 1:
        data = data.T
    n, d = data.shape
    if h_grid is None:
        h_grid = default_h_grid()
    h_grid = np.asarray(h_grid, dtype=float)
    if h_grid.size == 0:
        raise ConfigurationError("bandwidth grid must be nonempty")
    lower, upper = sdof_bounds(n, d)

    reports = []
    for h in h_grid:
        from .kernels import GaussianKernel

        sdof = sdof_empirical(data, GaussianKernel(h=float(h), dim=d))
        if sdof < lower:
            verdict = TOO_SMOOTH
        elif sdof > upper:
            verdict = TOO_ROUGH
        else:
            verdict = IN_RANGE
        reports.append(SdofReport(float(h), float(sdof), verdict))

    in_range = [r for r in reports if r.verdict == IN_RANGE]
    if in_range:
        recommended = in_range[len(in_range) // 2].h
    else:
        target = np.sqrt(lower * upper)
        recommended = min(reports, key=lambda r: abs(np.log(r.sdof) - np.log(target))).h
    return reports, recommended
