"""Spectral degrees of freedom and bandwidth recommendation."""

import numpy as np
import pytest

from quadrisk import (
    ConfigurationError,
    DegenerateDataError,
    GaussianKernel,
    KernelMatrix,
    recommend_h,
    sdof_empirical,
    sdof_of_matrix,
)
from quadrisk.tuning import IN_RANGE, TOO_ROUGH, TOO_SMOOTH, default_h_grid, sdof_bounds


def test_sdof_of_projection_matrix_is_its_rank():
    # For an exact projection the eigenvalues are 0/1, so sdof = rank.
    rng = np.random.default_rng(0)
    u = np.linalg.qr(rng.normal(size=(12, 4)))[0]
    p = u @ u.T
    assert sdof_of_matrix(KernelMatrix(p, centering="empirical")) == pytest.approx(4.0)


def test_sdof_rejects_zero_matrix():
    with pytest.raises(DegenerateDataError):
        sdof_of_matrix(KernelMatrix(np.zeros((3, 3)), centering="empirical"))


def test_sdof_empirical_monotone_in_bandwidth():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(100, 2))
    values = [sdof_empirical(x, GaussianKernel(h=h, dim=2)) for h in (0.1, 0.5, 2.0)]
    assert values[0] > values[1] > values[2]  # rougher kernels spread the spectrum


def test_sdof_bounds_rules():
    assert sdof_bounds(100, 2) == (5.0, 20.0)
    assert sdof_bounds(1000, 4) == (10.0, 200.0)


def test_default_h_grid_shape():
    grid = default_h_grid()
    assert grid.size == 24
    assert grid[0] == pytest.approx(0.1) and grid[-1] == pytest.approx(3.0)


def test_recommend_h_prefers_in_range():
    rng = np.random.default_rng(2)
    x, _ = np.linalg.qr(rng.normal(size=(200, 2)))  # just well-spread points
    x = rng.normal(size=(200, 2))
    reports, h = recommend_h(x)
    verdicts = {r.verdict for r in reports}
    assert verdicts <= {TOO_SMOOTH, IN_RANGE, TOO_ROUGH}
    chosen = next(r for r in reports if r.h == h)
    if any(r.verdict == IN_RANGE for r in reports):
        assert chosen.verdict == IN_RANGE


def test_recommend_h_empty_grid_rejected():
    with pytest.raises(ConfigurationError):
        recommend_h(np.zeros((10, 1)), h_grid=[])
