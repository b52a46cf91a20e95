"""Kernel families, kernel matrices and centering operations.

Two kernel families are supported:

* a Gaussian (normal) kernel with covariance ``h**2 * I``, whose integrals
  against Gaussian mixtures are available in closed form, and
* a partition kernel on a binned 1-D sample space, which reproduces the
  Pearson chi-squared distance and serves as an exact analytic oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateKernelError, DomainError

__all__ = [
    "GaussianKernel",
    "PartitionKernel",
    "KernelMatrix",
    "ModelIntegrals",
    "eval_kernel",
    "kernel_matrix",
    "integrals_vs_gaussian_mixture",
    "integrals_vs_partition_model",
    "center_under_model",
    "center_empirically",
    "scale_kernel",
    "gaussian_logpdf",
]

RAW = "raw"
MODEL_CENTERED = "model"
EMPIRICALLY_CENTERED = "empirical"
SCORE_CENTERED = "score"


@dataclass(frozen=True)
class GaussianKernel:
    """Normal kernel K(x, y) = N(x - y; 0, h^2 I) in ``dim`` dimensions."""

    h: float
    dim: int = 1

    def __post_init__(self):
        if not self.h > 0:
            raise ConfigurationError(f"bandwidth h must be positive, got {self.h}")
        if self.dim < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {self.dim}")

    @property
    def peak(self) -> float:
        """Value on the diagonal, (2*pi*h^2)^(-dim/2)."""
        return float((2.0 * np.pi * self.h**2) ** (-self.dim / 2.0))


@dataclass(frozen=True)
class PartitionKernel:
    """Binned-indicator kernel on a 1-D sample space.

    ``edges`` are the C+1 increasing cell boundaries; ``cell_probs`` is the
    target measure of each cell.  K(x, y) = 1[same cell] / prob(cell).
    """

    edges: tuple = field()
    cell_probs: tuple = field()

    def __init__(self, edges, cell_probs):
        edges = tuple(float(e) for e in edges)
        cell_probs = tuple(float(p) for p in cell_probs)
        if len(edges) != len(cell_probs) + 1:
            raise ConfigurationError("need len(edges) == len(cell_probs) + 1")
        if np.any(np.diff(edges) <= 0):
            raise ConfigurationError("cell edges must be strictly increasing")
        if min(cell_probs) <= 0:
            raise ConfigurationError("every cell probability must be positive")
        if abs(sum(cell_probs) - 1.0) > 1e-12:
            raise ConfigurationError(
                f"cell probabilities must sum to 1, got {sum(cell_probs)}"
            )
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "cell_probs", cell_probs)

    @property
    def n_cells(self) -> int:
        return len(self.cell_probs)

    def cell_index(self, x) -> np.ndarray:
        """Map points to cell indices; raises DomainError outside the bins."""
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        edges = np.asarray(self.edges)
        idx = np.searchsorted(edges, x, side="right") - 1
        # right-closed last cell
        idx[x == edges[-1]] = self.n_cells - 1
        if np.any((idx < 0) | (idx >= self.n_cells)):
            bad = x[(idx < 0) | (idx >= self.n_cells)][0]
            raise DomainError(f"point {bad} lies outside the declared partition")
        return idx


@dataclass
class KernelMatrix:
    """An n x n symmetric kernel evaluation with a centering tag."""

    values: np.ndarray
    centering: str = RAW
    model_id: str | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ConfigurationError("kernel matrix must be square")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.values))


@dataclass
class ModelIntegrals:
    """K(x_i, G) for each data point and the double integral K(G, G)."""

    kxg: np.ndarray
    kgg: float

    def __post_init__(self):
        self.kxg = np.asarray(self.kxg, dtype=float).ravel()
        self.kgg = float(self.kgg)


def _as_points(data, dim=None) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2:
        raise ConfigurationError("data must be an (n, D) array")
    if dim is not None and data.shape[1] != dim:
        raise ConfigurationError(
            f"data dimension {data.shape[1]} does not match kernel dimension {dim}"
        )
    return data


def eval_kernel(spec, x, y) -> float:
    """Evaluate K(x, y) for a single pair of points."""
    if isinstance(spec, GaussianKernel):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != y.shape or x.size != spec.dim:
            raise ConfigurationError("point dimensions must match the kernel")
        d2 = float(np.sum((x - y) ** 2))
        return spec.peak * float(np.exp(-0.5 * d2 / spec.h**2))
    if isinstance(spec, PartitionKernel):
        ix = spec.cell_index(x)[0]
        iy = spec.cell_index(y)[0]
        if ix != iy:
            return 0.0
        return 1.0 / spec.cell_probs[ix]
    raise ConfigurationError(f"unknown kernel spec {type(spec)!r}")


def kernel_matrix(spec, data) -> KernelMatrix:
    """Raw n x n kernel matrix of a dataset."""
    if isinstance(spec, GaussianKernel):
        x = _as_points(data, spec.dim)
        if x.shape[0] == 0:
            raise ConfigurationError("empty dataset")
        sq = np.sum(x**2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
        np.maximum(d2, 0.0, out=d2)
        values = spec.peak * np.exp(-0.5 * d2 / spec.h**2)
        # exact symmetry regardless of floating-point summation order
        values = 0.5 * (values + values.T)
        return KernelMatrix(values, RAW)
    if isinstance(spec, PartitionKernel):
        x = _as_points(data)
        if x.shape[0] == 0:
            raise ConfigurationError("empty dataset")
        idx = spec.cell_index(x[:, 0])
        probs = np.asarray(spec.cell_probs)
        same = idx[:, None] == idx[None, :]
        values = np.where(same, 1.0 / probs[idx][None, :], 0.0)
        return KernelMatrix(values, RAW)
    raise ConfigurationError(f"unknown kernel spec {type(spec)!r}")


def gaussian_logpdf(x, mean, cov) -> np.ndarray:
    """Multivariate normal log density via Cholesky factorization.

    A failed factorization gets one retry with a ridge of
    1e-8 * tr(cov)/D added to the diagonal (EM can produce near-singular
    covariances).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mean = np.asarray(mean, dtype=float).ravel()
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = mean.size
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        ridge = 1e-8 * np.trace(cov) / d
        chol = np.linalg.cholesky(cov + ridge * np.eye(d))
    diff = x - mean
    sol = np.linalg.solve(chol, diff.T)
    maha = np.sum(sol**2, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (d * np.log(2.0 * np.pi) + logdet + maha)


def integrals_vs_gaussian_mixture(spec: GaussianKernel, data, mix) -> ModelIntegrals:
    """Closed-form K(x_i, G) and K(G, G) for a Gaussian mixture G.

    K(x, G) = sum_j pi_j N(x; mu_j, Sigma_j + h^2 I) and
    K(G, G) = sum_{j,l} pi_j pi_l N(mu_j; mu_l, Sigma_j + Sigma_l + h^2 I).
    """
    if spec.dim != mix.dim:
        raise ConfigurationError(
            f"kernel dimension {spec.dim} != mixture dimension {mix.dim}"
        )
    x = _as_points(data, spec.dim)
    h2i = spec.h**2 * np.eye(spec.dim)
    kxg = np.zeros(x.shape[0])
    for w, mu, cov in zip(mix.weights, mix.means, mix.covs):
        kxg += w * np.exp(gaussian_logpdf(x, mu, cov + h2i))
    kgg = 0.0
    for wj, muj, cj in zip(mix.weights, mix.means, mix.covs):
        for wl, mul, cl in zip(mix.weights, mix.means, mix.covs):
            kgg += wj * wl * float(
                np.exp(gaussian_logpdf(muj[None, :], mul, cj + cl + h2i))[0]
            )
    return ModelIntegrals(kxg, kgg)


def integrals_vs_partition_model(spec: PartitionKernel, data, model_probs) -> ModelIntegrals:
    """K(x_i, G) and K(G, G) against a binned model with cell masses ``model_probs``.

    When the model coincides with the kernel's target measure both reduce to 1.
    """
    model_probs = np.asarray(model_probs, dtype=float).ravel()
    if model_probs.size != spec.n_cells:
        raise ConfigurationError("model_probs length must equal the cell count")
    if np.any(model_probs <= 0):
        raise ConfigurationError("model cell probabilities must be positive")
    if abs(model_probs.sum() - 1.0) > 1e-12:
        raise ConfigurationError("model cell probabilities must sum to 1")
    x = _as_points(data)
    idx = spec.cell_index(x[:, 0])
    cell_probs = np.asarray(spec.cell_probs)
    kxg = model_probs[idx] / cell_probs[idx]
    kgg = float(np.sum(model_probs**2 / cell_probs))
    return ModelIntegrals(kxg, kgg)


def center_under_model(raw: KernelMatrix, ints: ModelIntegrals, model_id=None) -> KernelMatrix:
    """G-centered matrix: K_ij - K(x_i,G) - K(x_j,G) + K(G,G)."""
    if raw.centering != RAW:
        raise ConfigurationError("center_under_model expects a raw kernel matrix")
    if ints.kxg.size != raw.n:
        raise ConfigurationError("model integrals size does not match the matrix")
    values = raw.values - ints.kxg[:, None] - ints.kxg[None, :] + ints.kgg
    return KernelMatrix(values, MODEL_CENTERED, model_id=model_id)


def center_empirically(raw: KernelMatrix) -> KernelMatrix:
    """Double centering against the empirical distribution; row sums vanish."""
    if raw.centering != RAW:
        raise ConfigurationError("center_empirically expects a raw kernel matrix")
    row = raw.values.mean(axis=1)
    grand = row.mean()
    values = raw.values - row[:, None] - row[None, :] + grand
    return KernelMatrix(values, EMPIRICALLY_CENTERED)


def scale_kernel(km: KernelMatrix):
    """Rescale by c = tr(K) / tr(K^2); returns (K/c, c)."""
    k = km.values
    tr = float(np.trace(k))
    tr2 = float(np.sum(k * k))  # tr(K^2) for symmetric K
    if tr2 <= 0.0:
        raise DegenerateKernelError("cannot scale a zero kernel matrix")
    c = tr / tr2
    return KernelMatrix(k / c, km.centering, model_id=km.model_id), c
