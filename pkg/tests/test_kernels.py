"""Kernel families, kernel matrices, centering and scaling."""

import numpy as np
import pytest

from quadrisk import (
    ConfigurationError,
    DomainError,
    GaussianKernel,
    PartitionKernel,
    center_empirically,
    center_under_model,
    eval_kernel,
    integrals_vs_gaussian_mixture,
    integrals_vs_partition_model,
    kernel_matrix,
    scale_kernel,
)
from quadrisk.kernels import EMPIRICALLY_CENTERED, MODEL_CENTERED, gaussian_logpdf
from quadrisk.mixture import GaussianMixture


def test_gaussian_kernel_validation():
    with pytest.raises(ConfigurationError):
        GaussianKernel(h=0.0)
    with pytest.raises(ConfigurationError):
        GaussianKernel(h=-1.0)
    with pytest.raises(ConfigurationError):
        GaussianKernel(h=1.0, dim=0)


def test_gaussian_kernel_peak_and_eval():
    spec = GaussianKernel(h=2.0, dim=3)
    assert spec.peak == pytest.approx((2 * np.pi * 4.0) ** (-1.5))
    x = np.array([1.0, 0.0, -1.0])
    assert eval_kernel(spec, x, x) == pytest.approx(spec.peak)
    y = np.zeros(3)
    expected = spec.peak * np.exp(-0.5 * 2.0 / 4.0)
    assert eval_kernel(spec, x, y) == pytest.approx(expected, rel=1e-14)


def test_gaussian_kernel_matrix_matches_pairwise_eval():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(7, 2))
    spec = GaussianKernel(h=0.8, dim=2)
    km = kernel_matrix(spec, x)
    assert km.centering == "raw"
    for i in range(7):
        for j in range(7):
            assert km.values[i, j] == pytest.approx(
                eval_kernel(spec, x[i], x[j]), rel=1e-12
            )
    assert np.array_equal(km.values, km.values.T)


def test_partition_kernel_validation():
    with pytest.raises(ConfigurationError):
        PartitionKernel(edges=[0, 1], cell_probs=[0.5, 0.5])
    with pytest.raises(ConfigurationError):
        PartitionKernel(edges=[0, 1, 0.5], cell_probs=[0.5, 0.5])
    with pytest.raises(ConfigurationError):
        PartitionKernel(edges=[0, 1, 2], cell_probs=[0.7, 0.4])
    with pytest.raises(ConfigurationError):
        PartitionKernel(edges=[0, 1, 2], cell_probs=[1.0, 0.0])


def test_partition_cell_index_edges():
    pk = PartitionKernel(edges=[0.0, 1.0, 2.0, 3.0], cell_probs=[0.2, 0.3, 0.5])
    idx = pk.cell_index([0.0, 0.5, 1.0, 2.9, 3.0])
    assert idx.tolist() == [0, 0, 1, 2, 2]  # last cell is right-closed
    with pytest.raises(DomainError):
        pk.cell_index([3.1])
    with pytest.raises(DomainError):
        pk.cell_index([-0.1])


def test_partition_kernel_matrix_values():
    pk = PartitionKernel(edges=[0.0, 1.0, 2.0], cell_probs=[0.25, 0.75])
    x = np.array([0.5, 0.6, 1.5])
    km = kernel_matrix(pk, x)
    assert km.values[0, 1] == pytest.approx(4.0)
    assert km.values[0, 2] == 0.0
    assert km.values[2, 2] == pytest.approx(1.0 / 0.75)


def test_gaussian_logpdf_matches_scipy():
    from scipy.stats import multivariate_normal

    rng = np.random.default_rng(1)
    x = rng.normal(size=(5, 3))
    mean = rng.normal(size=3)
    a = rng.normal(size=(3, 3))
    cov = a @ a.T + 0.5 * np.eye(3)
    ours = gaussian_logpdf(x, mean, cov)
    ref = multivariate_normal(mean, cov).logpdf(x)
    np.testing.assert_allclose(ours, ref, rtol=1e-10)


def test_integrals_vs_gaussian_mixture_single_component():
    # One standard normal component: K(x, G) is a normal density with
    # variance 1 + h^2, and K(G, G) one with variance 2 + h^2, both at 0.
    h = 0.7
    spec = GaussianKernel(h=h, dim=1)
    mix = GaussianMixture(
        weights=[1.0], means=[[0.0]], covs=[np.eye(1)], structure="spherical"
    )
    x = np.array([[0.0], [1.3]])
    ints = integrals_vs_gaussian_mixture(spec, x, mix)
    s2 = 1.0 + h**2
    expected = np.exp(-0.5 * x[:, 0] ** 2 / s2) / np.sqrt(2 * np.pi * s2)
    np.testing.assert_allclose(ints.kxg, expected, rtol=1e-12)
    assert ints.kgg == pytest.approx(1.0 / np.sqrt(2 * np.pi * (2 + h**2)), rel=1e-12)


def test_integrals_vs_partition_model_reduces_to_one():
    pk = PartitionKernel(edges=[0, 1, 2, 3], cell_probs=[0.2, 0.3, 0.5])
    x = np.array([0.5, 1.5, 2.5])
    ints = integrals_vs_partition_model(pk, x, [0.2, 0.3, 0.5])
    np.testing.assert_allclose(ints.kxg, 1.0)
    assert ints.kgg == pytest.approx(1.0)


def test_center_under_model_formula():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(6, 1))
    spec = GaussianKernel(h=1.0, dim=1)
    mix = GaussianMixture(
        weights=[1.0], means=[[0.0]], covs=[np.eye(1)], structure="spherical"
    )
    raw = kernel_matrix(spec, x)
    ints = integrals_vs_gaussian_mixture(spec, x, mix)
    cen = center_under_model(raw, ints)
    assert cen.centering == MODEL_CENTERED
    i, j = 2, 4
    expected = raw.values[i, j] - ints.kxg[i] - ints.kxg[j] + ints.kgg
    assert cen.values[i, j] == pytest.approx(expected, rel=1e-14)
    with pytest.raises(ConfigurationError):
        center_under_model(cen, ints)  # double centering is refused


def test_center_empirically_row_sums_vanish():
    rng = np.random.default_rng(5)
    raw = kernel_matrix(GaussianKernel(h=0.5, dim=2), rng.normal(size=(9, 2)))
    cen = center_empirically(raw)
    assert cen.centering == EMPIRICALLY_CENTERED
    np.testing.assert_allclose(cen.values.sum(axis=1), 0.0, atol=1e-12)


def test_scale_kernel_normalizes_trace_ratio():
    rng = np.random.default_rng(2)
    raw = kernel_matrix(GaussianKernel(h=0.6, dim=1), rng.normal(size=(20, 1)))
    cen = center_empirically(raw)
    scaled, c = scale_kernel(cen)
    assert c == pytest.approx(np.trace(cen.values) / np.sum(cen.values**2))
    np.testing.assert_allclose(scaled.values, cen.values / c)
