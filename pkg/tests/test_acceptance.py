"""Acceptance suite: one test per criterion, printing a pass/fail line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines.  Tolerances are part of the contract; do not loosen them to make a
failing criterion pass.
"""

import math
from itertools import combinations

import numpy as np
import pytest
from scipy.integrate import dblquad, quad
from scipy.optimize import brentq

from quadrisk import (
    FitConfig,
    GaussianKernel,
    GaussianMixture,
    PartitionKernel,
    RandomSubsets,
    VFold,
    CVConfig,
    build_projection,
    center_under_model,
    cv_unbiased_risk,
    fit_em,
    integrals_vs_gaussian_mixture,
    integrals_vs_partition_model,
    kernel_matrix,
    mlf_hat,
    model_centered_matrix,
    pec_hat,
    qaic,
    qbic,
    quadratic_risk_at_m,
    scan,
    sdof_empirical,
    standardize,
    traces,
    u_statistic,
    v_statistic,
)
from quadrisk.mixture import (
    extended_scores,
    mixture_from_free_params,
    pack_free_params,
    score_matrix,
)
from quadrisk.simgen import ScanConfig, ScenarioSpec, run_experiment


def _report(num, body):
    try:
        body()
    except BaseException:
        print(f"criterion {num}: FAIL")
        raise
    print(f"criterion {num}: PASS")


# --------------------------------------------------------------------------
# helpers for the binned (partition) setting


def _binned_dataset(counts):
    """Points at cell midpoints with the given per-cell counts."""
    return np.concatenate(
        [np.full(c, i + 0.5) for i, c in enumerate(counts)]
    )[:, None]


def _random_multinomial(rng, c, n):
    probs = rng.dirichlet(np.full(c, 2.0))
    counts = rng.multinomial(n, probs)
    while np.any(counts == 0):  # keep every cell occupied
        counts = rng.multinomial(n, probs)
    return counts


# --------------------------------------------------------------------------
# criterion 1: exact chi-squared oracle through the generic pipeline


def test_criterion_1_chi_squared_oracle_exact():
    def body():
        rng = np.random.default_rng(101)
        cases = [(c, n) for c in (3, 5, 10) for n in (50, 500)]
        done = 0
        while done < 50:
            c, n = cases[done % len(cases)]
            counts = _random_multinomial(rng, c, n)
            x = _binned_dataset(counts)
            model = np.full(c, 1.0 / c)  # fixed equiprobable model, no parameters
            pk = PartitionKernel(edges=np.arange(c + 1.0), cell_probs=model)
            chi2 = float(np.sum((counts - n / c) ** 2 / (n / c)))

            raw = kernel_matrix(pk, x)
            ints = integrals_vs_partition_model(pk, x, model)
            cen = center_under_model(raw, ints)

            # plug-in statistic reproduces the chi-squared statistic over n
            assert abs(v_statistic(cen) - chi2 / n) < 1e-10

            # the unbiased statistic has the exact finite-sample closed form
            assert abs(u_statistic(cen) - (chi2 - (c - 1)) / (n - 1)) < 1e-10

            # risk criterion at m = n with zero fitted parameters
            proj = build_projection(np.empty((n, 0)))
            tr_scen, tr_pkp = traces(cen, proj)
            total = qaic(mlf_hat(cen, proj, tr_scen), pec_hat(tr_pkp, n, n), n).total
            assert abs(total - (chi2 / n - (c - 1) / n)) < 1e-10
            done += 1

    _report(1, body)


@pytest.mark.xfail(
    strict=True,
    reason=(
        "the first-order large-n form chi2/n - (C-1)/n of the unbiased "
        "statistic differs from the exact finite-sample identity "
        "(chi2 - (C-1))/(n-1) by O(1/n); it cannot hold at 1e-10"
    ),
)
def test_criterion_1_first_order_u_statistic_form():
    rng = np.random.default_rng(55)
    c, n = 5, 500
    counts = _random_multinomial(rng, c, n)
    x = _binned_dataset(counts)
    model = np.full(c, 1.0 / c)
    pk = PartitionKernel(edges=np.arange(c + 1.0), cell_probs=model)
    chi2 = float(np.sum((counts - n / c) ** 2 / (n / c)))
    raw = kernel_matrix(pk, x)
    cen = center_under_model(raw, integrals_vs_partition_model(pk, x, model))
    assert abs(u_statistic(cen) - (chi2 / n - (c - 1) / n)) < 1e-10


# --------------------------------------------------------------------------
# criterion 2: unbiasedness under a correctly specified model


def test_criterion_2_u_statistic_unbiased_under_truth():
    def body():
        rng = np.random.default_rng(202)
        spec = GaussianKernel(h=1.0, dim=1)
        truth = GaussianMixture([1.0], [[0.0]], [np.eye(1)], "spherical")
        n, reps = 50, 500
        stats = np.empty(reps)
        for r in range(reps):
            x = rng.normal(size=(n, 1))
            cen = model_centered_matrix(spec, x, truth)
            stats[r] = u_statistic(cen)
        se = stats.std(ddof=1) / math.sqrt(reps)
        assert abs(stats.mean()) < 3 * se

    _report(2, body)


# --------------------------------------------------------------------------
# criterion 3: closed-form model integrals vs adaptive quadrature


def _random_mixture(rng, d, k):
    weights = rng.dirichlet(np.full(k, 5.0))
    means = rng.uniform(-2, 2, size=(k, d))
    covs = np.array([np.diag(rng.uniform(0.3, 1.5, size=d)) for _ in range(k)])
    return GaussianMixture(weights, means, covs, "diagonal")


_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(u, s):
    """Scalar normal density, kept elementary so quadrature stays fast."""
    return math.exp(-0.5 * (u / s) ** 2) / (s * _SQRT_2PI)


def _dens_1d(mix, dim):
    """Density of one coordinate of a diagonal-covariance mixture."""
    comps = [(w, mix.means[j][dim], math.sqrt(mix.covs[j][dim, dim]))
             for j, w in enumerate(mix.weights)]

    def f(y):
        return sum(w * _phi(y - m, s) for w, m, s in comps)

    return f


def test_criterion_3_gaussian_integrals_match_quadrature():
    def body():
        rng = np.random.default_rng(303)
        cases = [(1, k) for k in (1, 2, 3) for _ in range(4)]  # 12 in 1-D
        cases += [(2, 1), (2, 1), (2, 1), (2, 2), (2, 2), (2, 2), (2, 3), (2, 3)]
        assert len(cases) == 20
        lo, hi = -10.0, 10.0
        opts = dict(epsabs=1e-11, epsrel=1e-8)
        for d, k in cases:
            mix = _random_mixture(rng, d, k)
            h = rng.uniform(0.4, 1.2)
            spec = GaussianKernel(h=h, dim=d)
            pts = rng.uniform(-2, 2, size=(2, d))
            ints = integrals_vs_gaussian_mixture(spec, pts, mix)
            if d == 1:
                g = _dens_1d(mix, 0)
                for i, x in enumerate(pts[:, 0]):
                    val, _ = quad(lambda y: _phi(x - y, h) * g(y), lo, hi, **opts)
                    assert abs(ints.kxg[i] - val) < 1e-6 * abs(val)
                val, _ = dblquad(
                    lambda t, s: _phi(s - t, h) * g(s) * g(t), lo, hi, lo, hi, **opts
                )
                assert abs(ints.kgg - val) < 1e-6 * abs(val)
            else:
                # kxg directly as a 2-D integral over the mixture density
                x = pts[0]

                def dens2(y1, y2):
                    return sum(
                        w * _phi(y1 - mix.means[j][0], math.sqrt(mix.covs[j][0, 0]))
                        * _phi(y2 - mix.means[j][1], math.sqrt(mix.covs[j][1, 1]))
                        for j, w in enumerate(mix.weights)
                    )

                val, _ = dblquad(
                    lambda y2, y1: _phi(x[0] - y1, h) * _phi(x[1] - y2, h)
                    * dens2(y1, y2),
                    lo, hi, lo, hi, **opts,
                )
                assert abs(ints.kxg[0] - val) < 1e-6 * abs(val)
                # with diagonal covariances the 4-D double integral factorizes
                # across coordinates into products of 2-D integrals; the (j, l)
                # component pairs are symmetric
                kgg = 0.0
                for j in range(mix.k):
                    for l in range(j, mix.k):
                        factor = mix.weights[j] * mix.weights[l]
                        for dim in range(2):
                            sj = math.sqrt(mix.covs[j][dim, dim])
                            sl = math.sqrt(mix.covs[l][dim, dim])
                            mj, ml = mix.means[j][dim], mix.means[l][dim]
                            part, _ = dblquad(
                                lambda t, s, sj=sj, sl=sl, mj=mj, ml=ml:
                                _phi(s - t, h) * _phi(s - mj, sj) * _phi(t - ml, sl),
                                lo, hi, lo, hi, **opts,
                            )
                            factor *= part
                        kgg += factor if j == l else 2.0 * factor
                assert abs(ints.kgg - kgg) < 1e-6 * abs(kgg)

    _report(3, body)


# --------------------------------------------------------------------------
# criterion 4: projection properties and score finite differences


def _fitted_models():
    rng = np.random.default_rng(404)
    out = []
    for structure in ("spherical", "diagonal", "full"):
        x = np.vstack([
            rng.normal(size=(70, 2)),
            rng.normal(size=(70, 2)) + np.array([4.0, 1.0]),
        ])
        fit = fit_em(x, 2, structure, FitConfig(restarts=2, seed=9))
        out.append((fit, x))
    x = rng.normal(size=(60, 1))
    out.append((fit_em(x, 1, "full", FitConfig(restarts=1, seed=2)), x))
    return out


def test_criterion_4_projection_and_score_accuracy():
    def body():
        for fit, x in _fitted_models():
            mix = fit.model
            for cols in (score_matrix(mix, x), extended_scores(mix, x)):
                proj = build_projection(cols)
                p = proj.values
                assert np.max(np.abs(p @ p - p)) <= 1e-8
                assert abs(np.trace(p) - proj.rank) <= 1e-6

            sub = x[:5]
            analytic = score_matrix(mix, sub)
            theta = pack_free_params(mix)
            eps = 1e-6
            numeric = np.empty_like(analytic)
            for r in range(theta.size):
                tp, tm = theta.copy(), theta.copy()
                tp[r] += eps
                tm[r] -= eps
                mp = mixture_from_free_params(tp, mix.k, mix.dim, mix.structure)
                mm = mixture_from_free_params(tm, mix.k, mix.dim, mix.structure)
                numeric[:, r] = (mp.log_density(sub) - mm.log_density(sub)) / (2 * eps)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-6)

    _report(4, body)


# --------------------------------------------------------------------------
# criterion 5: decomposition identities on scans


def test_criterion_5_decomposition_identities():
    def body():
        rng = np.random.default_rng(505)
        data = np.vstack([
            rng.normal(size=(70, 2)),
            rng.normal(size=(70, 2)) + np.array([5.0, 0.0]),
        ])
        data, _ = standardize(data)
        n = data.shape[0]
        result = scan(data, 1, 3, GaussianKernel(h=0.5, dim=2),
                      FitConfig(restarts=2, seed=1))
        for row in result.per_k:
            mlf, pec = row.qaic.mlf_hat, row.qaic.pec_hat_at_n
            assert abs(row.qaic.total - (mlf + pec)) <= 1e-12
            assert abs(row.qbic.total - (mlf + (math.log(n) - 1.0) * pec)) <= 1e-12
            generic = quadratic_risk_at_m(mlf, pec, n, n / (math.log(n) - 1.0))
            assert abs(row.qbic.total - generic.total) <= 1e-12

    _report(5, body)


# --------------------------------------------------------------------------
# criterion 6: parameter cost approaches dim(theta)/m in the binned setting


def test_criterion_6_parameter_cost_limit_binned():
    def body():
        c, n, reps = 5, 2000, 100
        z = np.arange(c) - 2.0
        base = np.full(c, 1.0 / c)

        def cell_probs(theta):
            w = base * np.exp(theta * z)  # one-parameter exponential tilt
            return w / w.sum()

        truth = cell_probs(0.3)
        rng = np.random.default_rng(606)
        vals = np.empty(reps)
        for r in range(reps):
            counts = rng.multinomial(n, truth)
            while np.any(counts == 0):
                counts = rng.multinomial(n, truth)
            x = _binned_dataset(counts)
            zbar = float(counts @ z) / n
            theta_hat = brentq(lambda t: cell_probs(t) @ z - zbar, -20, 20)
            p = cell_probs(theta_hat)

            pk = PartitionKernel(edges=np.arange(c + 1.0), cell_probs=p)
            cen = model_centered_matrix(pk, x, p)
            # per-observation score of the tilt parameter: z_cell - E[z]
            idx = np.repeat(np.arange(c), counts)
            scores = (z - p @ z)[idx][:, None]
            proj = build_projection(scores)
            _, tr_pkp = traces(cen, proj)
            vals[r] = n * pec_hat(tr_pkp, n, n)
        assert abs(vals.mean() - 1.0) <= 0.15

    _report(6, body)


# --------------------------------------------------------------------------
# criterion 7: sdof of the frequency-based partition kernel


def test_criterion_7_partition_sdof_exact():
    def body():
        rng = np.random.default_rng(707)
        for c in (3, 5, 10):
            counts = _random_multinomial(rng, c, 200)
            x = _binned_dataset(counts)
            pk = PartitionKernel(edges=np.arange(c + 1.0), cell_probs=counts / 200)
            assert abs(sdof_empirical(x, pk) - (c - 1)) <= 1e-8

    _report(7, body)


# --------------------------------------------------------------------------
# criteria 8 and 9: desk-scale selection trends


def test_criterion_8_four_cluster_trend():
    def body():
        spec = ScenarioSpec("M2", 1000)
        cfg = ScanConfig(k_min=1, k_max=8, h="auto", fit=FitConfig(restarts=2))
        table = run_experiment(spec, 25, cfg, seed=801)
        reps = table.reps
        assert table.counts["MRA"].get("4", 0) >= 0.8 * reps
        assert table.counts["BIC"].get("4", 0) >= 0.8 * reps
        qaic_ge_4 = sum(
            cnt for lbl, cnt in table.counts["QAIC"].items()
            if lbl.isdigit() and int(lbl) >= 4
        )
        assert qaic_ge_4 >= 0.9 * reps

    _report(8, body)


def test_criterion_9_no_adequate_model_below_truth():
    def body():
        spec = ScenarioSpec("M3", 1000)
        cfg = ScanConfig(k_min=1, k_max=5, h="auto", fit=FitConfig(restarts=2))
        table = run_experiment(spec, 25, cfg, seed=901)
        assert table.counts["MRA"].get("None", 0) >= 0.8 * table.reps

    _report(9, body)


# --------------------------------------------------------------------------
# criterion 10: CV equals exhaustive subset enumeration


def _oracle_subset_estimate(x, train, holdout, spec):
    """Independent path: closed-form single-Gaussian MLE + direct U-statistic."""
    xt = x[train]
    mean = xt.mean(axis=0)
    cov = np.cov(xt, rowvar=False, bias=True).reshape(x.shape[1], x.shape[1])
    mix = GaussianMixture([1.0], [mean], [cov], "full")
    xh = x[holdout]
    raw = kernel_matrix(spec, xh)
    ints = integrals_vs_gaussian_mixture(spec, xh, mix)
    k = raw.values - ints.kxg[:, None] - ints.kxg[None, :] + ints.kgg
    m = xh.shape[0]
    return (k.sum() - np.trace(k)) / (m * (m - 1))


def test_criterion_10_cv_enumeration_equality():
    def body():
        rng = np.random.default_rng(1010)
        x = rng.normal(size=(6, 2)) * 1.5
        spec = GaussianKernel(h=0.8, dim=2)
        fit_cfg = FitConfig(restarts=1, seed=0)

        # all C(6, 4) = 15 subsets, enumerated independently
        oracle = np.mean([
            _oracle_subset_estimate(x, np.asarray(tr),
                                    np.setdiff1d(np.arange(6), tr), spec)
            for tr in combinations(range(6), 4)
        ])
        mean, _ = cv_unbiased_risk(x, 1, "full", fit_cfg, spec,
                                   CVConfig(RandomSubsets(15, seed=3), m=4))
        assert math.isclose(mean, oracle, rel_tol=1e-10)

        # V-fold with V = 3: equals the mean over its three folds
        fold_rng = np.random.default_rng(7)
        perm = fold_rng.permutation(6)
        folds = np.array_split(perm, 3)
        per_fold = [
            _oracle_subset_estimate(
                x, np.setdiff1d(np.arange(6), f), np.sort(f), spec
            )
            for f in folds
        ]
        mean, _ = cv_unbiased_risk(x, 1, "full", fit_cfg, spec,
                                   CVConfig(VFold(3, seed=7)))
        assert math.isclose(mean, np.mean(per_fold), rel_tol=1e-10)

    _report(10, body)


# --------------------------------------------------------------------------
# criterion 11: EM never decreases the log-likelihood


def test_criterion_11_em_monotonicity():
    def body():
        rng = np.random.default_rng(1111)
        worst = np.inf
        for structure in ("spherical", "diagonal", "full"):
            for k in (1, 2, 3):
                x = np.vstack([
                    rng.normal(size=(60, 2)),
                    rng.normal(size=(60, 2)) + np.array([3.0, -2.0]),
                ])
                fit = fit_em(x, k, structure, FitConfig(restarts=3, seed=k))
                worst = min(worst, fit.min_loglik_delta)
        for fit, _ in _fitted_models():
            worst = min(worst, fit.min_loglik_delta)
        assert worst >= -1e-8

    _report(11, body)
