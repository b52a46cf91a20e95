"""Gaussian mixtures: density, sampling, EM fitting and likelihood scores.

The free parameterization used for scores (and for the finite-difference
oracles in the tests) is:

* weights: pi_1 .. pi_{k-1}, with pi_k = 1 - sum (absent when k = 1),
* means: raw entries, component by component,
* covariances: log sigma^2 for spherical, per-coordinate log sigma_d^2 for
  diagonal, and the lower-triangular Cholesky entries for full.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import (
    ConfigurationError,
    DegenerateDataError,
    FitFailureError,
    InfeasibleError,
    ScoreUnderflowError,
)
from .kernels import gaussian_logpdf

__all__ = [
    "GaussianMixture",
    "FitConfig",
    "FitResult",
    "param_dim",
    "fit_em",
    "score_matrix",
    "score_vector",
    "extended_scores",
    "pack_free_params",
    "mixture_from_free_params",
]

SPHERICAL = "spherical"
DIAGONAL = "diagonal"
FULL = "full"
_STRUCTURES = (SPHERICAL, DIAGONAL, FULL)


@dataclass
class GaussianMixture:
    """A k-component multivariate normal mixture."""

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    structure: str = FULL

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
        covs = np.asarray(self.covs, dtype=float)
        if covs.ndim == 2:
            covs = covs[None, :, :]
        self.covs = covs
        k, d = self.means.shape
        if self.weights.size != k or self.covs.shape != (k, d, d):
            raise ConfigurationError("inconsistent mixture component shapes")
        if self.structure not in _STRUCTURES:
            raise ConfigurationError(f"unknown covariance structure {self.structure!r}")
        if abs(self.weights.sum() - 1.0) > 1e-10:
            raise ConfigurationError("mixture weights must sum to 1")
        if np.any(self.weights <= 0) or np.any(self.weights > 1):
            raise ConfigurationError("mixture weights must lie in (0, 1]")
        for cov in self.covs:
            if np.min(np.linalg.eigvalsh(cov)) <= 0:
                raise ConfigurationError("every component covariance must be SPD")
        if self.structure == SPHERICAL:
            for cov in self.covs:
                if not np.allclose(cov, cov[0, 0] * np.eye(d), atol=1e-12 * abs(cov[0, 0])):
                    raise ConfigurationError("spherical structure requires sigma^2 * I")
        elif self.structure == DIAGONAL:
            for cov in self.covs:
                off = cov - np.diag(np.diag(cov))
                if np.max(np.abs(off)) > 1e-12 * np.max(np.diag(cov)):
                    raise ConfigurationError("diagonal structure requires diagonal covariances")

    @property
    def k(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def param_dim(self) -> int:
        return param_dim(self.k, self.dim, self.structure)

    def component_logpdfs(self, x) -> np.ndarray:
        """(n, k) matrix of per-component log densities."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty((x.shape[0], self.k))
        for j in range(self.k):
            out[:, j] = gaussian_logpdf(x, self.means[j], self.covs[j])
        return out

    def log_density(self, x) -> np.ndarray:
        lp = self.component_logpdfs(x)
        return logsumexp(lp + np.log(self.weights), axis=1)

    def density(self, x):
        """Mixture density; scalar for a single point, array for a batch."""
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1
        pts = np.atleast_2d(x) if x.ndim > 0 else x.reshape(1, 1)
        if x.ndim == 1 and self.dim == 1 and x.size > 1:
            pts = x[:, None]
            single = False
        if pts.shape[1] != self.dim:
            raise ConfigurationError(
                f"point dimension {pts.shape[1]} != mixture dimension {self.dim}"
            )
        vals = np.exp(self.log_density(pts))
        return float(vals[0]) if single else vals

    def sample(self, n, seed=None) -> np.ndarray:
        """n i.i.d. draws, deterministic for a fixed seed."""
        if n < 1:
            raise ConfigurationError("need n >= 1")
        rng = np.random.default_rng(seed)
        comps = rng.choice(self.k, size=n, p=self.weights)
        z = rng.standard_normal((n, self.dim))
        out = np.empty((n, self.dim))
        for j in range(self.k):
            mask = comps == j
            if not np.any(mask):
                continue
            chol = np.linalg.cholesky(self.covs[j])
            out[mask] = self.means[j] + z[mask] @ chol.T
        return out

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "covs": self.covs.tolist(),
            "structure": self.structure,
        }

    @classmethod
    def from_dict(cls, d) -> "GaussianMixture":
        return cls(
            weights=np.asarray(d["weights"]),
            means=np.asarray(d["means"]),
            covs=np.asarray(d["covs"]),
            structure=d["structure"],
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, s) -> "GaussianMixture":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 300
    tol: float = 1e-8
    restarts: int = 3
    cov_floor: float = 1e-4
    weight_floor: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1 or self.restarts < 1:
            raise ConfigurationError("max_iter and restarts must be positive")
        if self.tol <= 0 or self.cov_floor <= 0 or self.weight_floor <= 0:
            raise ConfigurationError("tol, cov_floor and weight_floor must be positive")


@dataclass
class FitResult:
    model: GaussianMixture
    log_lik: float
    iterations: int
    converged: bool
    param_dim: int
    loglik_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    min_loglik_delta: float = np.inf  # smallest per-iteration change over all restarts

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "log_lik": self.log_lik,
            "iterations": self.iterations,
            "converged": self.converged,
            "param_dim": self.param_dim,
        }


def param_dim(k, d, structure=FULL) -> int:
    """Number of free parameters of a k-component mixture in d dimensions."""
    if k < 1 or d < 1:
        raise ConfigurationError("need k >= 1 and d >= 1")
    if structure == FULL:
        cov = k * d * (d + 1) // 2
    elif structure == DIAGONAL:
        cov = k * d
    elif structure == SPHERICAL:
        cov = k
    else:
        raise ConfigurationError(f"unknown covariance structure {structure!r}")
    return k * d + cov + (k - 1)


def _kmeanspp_centers(x, k, rng):
    """k-means++ seeding: spread initial centers by squared-distance sampling."""
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min(
            np.sum((x[:, None, :] - np.asarray(centers)[None, :, :]) ** 2, axis=2),
            axis=1,
        )
        total = d2.sum()
        if total <= 0:
            centers.append(x[rng.integers(n)])
            continue
        centers.append(x[rng.choice(n, p=d2 / total)])
    return np.asarray(centers)


def _project_cov(cov, structure, floor):
    d = cov.shape[0]
    if structure == SPHERICAL:
        s2 = max(np.trace(cov) / d, floor)
        return s2 * np.eye(d)
    if structure == DIAGONAL:
        return np.diag(np.maximum(np.diag(cov), floor))
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, floor)
    return (vecs * vals) @ vecs.T


def _em_single(x, k, structure, config, rng):
    n, d = x.shape
    floor = config.cov_floor * float(np.mean(np.var(x, axis=0)))
    floor = max(floor, 1e-300)
    means = _kmeanspp_centers(x, k, rng)
    pooled = np.cov(x, rowvar=False).reshape(d, d)
    covs = np.array([_project_cov(pooled, structure, floor) for _ in range(k)])
    weights = np.full(k, 1.0 / k)

    loglik = -np.inf
    trace = []
    min_delta = np.inf
    converged = False
    for it in range(config.max_iter):
        comp_lp = np.empty((n, k))
        for j in range(k):
            comp_lp[:, j] = gaussian_logpdf(x, means[j], covs[j])
        joint = comp_lp + np.log(weights)
        ll_i = logsumexp(joint, axis=1)
        new_loglik = float(ll_i.sum())
        if it > 0:
            min_delta = min(min_delta, new_loglik - loglik)
            if abs(new_loglik - loglik) <= config.tol * (1.0 + abs(new_loglik)):
                loglik = new_loglik
                trace.append(new_loglik)
                converged = True
                break
        loglik = new_loglik
        trace.append(new_loglik)

        resp = np.exp(joint - ll_i[:, None])
        nk = resp.sum(axis=0)
        weights = np.maximum(nk / n, config.weight_floor)
        weights = weights / weights.sum()
        means = (resp.T @ x) / nk[:, None]
        for j in range(k):
            diff = x - means[j]
            cov = (resp[:, j][:, None] * diff).T @ diff / nk[j]
            covs[j] = _project_cov(cov, structure, floor)
    iterations = it + 1
    model = GaussianMixture(weights, means, covs, structure)
    return model, loglik, iterations, converged, np.asarray(trace), min_delta


def fit_em(data, k, structure=FULL, config: FitConfig | None = None) -> FitResult:
    """Best-of-restarts EM fit of a k-component mixture."""
    config = config or FitConfig()
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[0] == 1 and x.shape[1] > 1 and np.asarray(data).ndim == 1:
        x = x.T
    n, d = x.shape
    if n <= k:
        raise InfeasibleError(f"cannot fit k={k} components to n={n} points")
    if not np.all(np.isfinite(x)):
        raise ConfigurationError("data must be finite")
    if np.all(np.var(x, axis=0) == 0):
        raise DegenerateDataError("all data points are identical")

    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best = None
    min_delta = np.inf
    failures = []
    for seq in seeds:
        rng = np.random.default_rng(seq)
        try:
            model, ll, its, conv, trace, delta = _em_single(x, k, structure, config, rng)
        except (np.linalg.LinAlgError, FloatingPointError) as exc:  # degenerate restart
            failures.append(str(exc))
            continue
        min_delta = min(min_delta, delta)
        if not np.isfinite(ll):
            failures.append("non-finite log-likelihood")
            continue
        if best is None or ll > best[1]:
            best = (model, ll, its, conv, trace)
    if best is None:
        raise FitFailureError(
            f"all {config.restarts} EM restarts degenerated for k={k}",
            diagnostics={"k": k, "n": n, "errors": failures},
        )
    model, ll, its, conv, trace = best
    return FitResult(
        model=model,
        log_lik=ll,
        iterations=its,
        converged=conv,
        param_dim=param_dim(k, d, structure),
        loglik_trace=trace,
        min_loglik_delta=min_delta,
    )


def _responsibilities(mix, x):
    comp_lp = mix.component_logpdfs(x)
    joint = comp_lp + np.log(mix.weights)
    ll = logsumexp(joint, axis=1)
    if np.any(np.isneginf(ll)):
        raise ScoreUnderflowError("mixture density underflowed at a data point")
    return np.exp(joint - ll[:, None])


def score_matrix(mix: GaussianMixture, data) -> np.ndarray:
    """(n, p) matrix of log-density gradients in the free parameterization."""
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[1] != mix.dim:
        x = np.asarray(data, dtype=float).reshape(-1, mix.dim)
    n = x.shape[0]
    k, d = mix.k, mix.dim
    resp = _responsibilities(mix, x)

    blocks = []
    if k > 1:
        w = resp / mix.weights  # phi_j / f
        blocks.append(w[:, :-1] - w[:, -1:])
    for j in range(k):
        prec = np.linalg.inv(mix.covs[j])
        a = (x - mix.means[j]) @ prec  # Sigma^{-1} (x - mu)
        blocks.append(resp[:, j][:, None] * a)
    for j in range(k):
        diff = x - mix.means[j]
        if mix.structure == SPHERICAL:
            s2 = mix.covs[j][0, 0]
            g = np.sum(diff**2, axis=1) / (2.0 * s2) - d / 2.0
            blocks.append((resp[:, j] * g)[:, None])
        elif mix.structure == DIAGONAL:
            s2 = np.diag(mix.covs[j])
            g = diff**2 / (2.0 * s2) - 0.5
            blocks.append(resp[:, j][:, None] * g)
        else:
            prec = np.linalg.inv(mix.covs[j])
            chol = np.linalg.cholesky(mix.covs[j])
            a = diff @ prec  # rows are Sigma^{-1} d_i
            al = a @ chol
            outer = np.einsum("ni,nj->nij", a, al)
            grad = outer - (prec @ chol)[None, :, :]
            rows, cols = np.tril_indices(d)
            blocks.append(resp[:, j][:, None] * grad[:, rows, cols])
    if not blocks:
        return np.empty((n, 0))
    return np.hstack(blocks)


def score_vector(mix: GaussianMixture, x) -> np.ndarray:
    """Score at a single point; gradient of log density in the free parameters."""
    return score_matrix(mix, np.atleast_2d(np.asarray(x, dtype=float)))[0]


def extended_scores(mix: GaussianMixture, data) -> np.ndarray:
    """(n, p+1) matrix whose first column is all ones."""
    s = score_matrix(mix, data)
    return np.hstack([np.ones((s.shape[0], 1)), s])


def pack_free_params(mix: GaussianMixture) -> np.ndarray:
    """Flatten a mixture into the free-parameter vector used by the scores."""
    parts = []
    if mix.k > 1:
        parts.append(mix.weights[:-1])
    for j in range(mix.k):
        parts.append(mix.means[j])
    for j in range(mix.k):
        if mix.structure == SPHERICAL:
            parts.append([np.log(mix.covs[j][0, 0])])
        elif mix.structure == DIAGONAL:
            parts.append(np.log(np.diag(mix.covs[j])))
        else:
            chol = np.linalg.cholesky(mix.covs[j])
            rows, cols = np.tril_indices(mix.dim)
            parts.append(chol[rows, cols])
    return np.concatenate([np.asarray(p, dtype=float).ravel() for p in parts])


def mixture_from_free_params(theta, k, d, structure=FULL) -> GaussianMixture:
    """Inverse of :func:`pack_free_params`."""
    theta = np.asarray(theta, dtype=float).ravel()
    pos = 0
    if k > 1:
        head = theta[pos : pos + k - 1]
        weights = np.append(head, 1.0 - head.sum())
        pos += k - 1
    else:
        weights = np.array([1.0])
    means = theta[pos : pos + k * d].reshape(k, d)
    pos += k * d
    covs = np.empty((k, d, d))
    for j in range(k):
        if structure == SPHERICAL:
            covs[j] = np.exp(theta[pos]) * np.eye(d)
            pos += 1
        elif structure == DIAGONAL:
            covs[j] = np.diag(np.exp(theta[pos : pos + d]))
            pos += d
        else:
            m = d * (d + 1) // 2
            chol = np.zeros((d, d))
            rows, cols = np.tril_indices(d)
            chol[rows, cols] = theta[pos : pos + m]
            covs[j] = chol @ chol.T
            pos += m
    return GaussianMixture(weights, means, covs, structure)
