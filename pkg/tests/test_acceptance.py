"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Runtime-heavy criteria (Monte Carlo tables, the scaling grid) run at desk
scale with the tolerances pinned below; they dominate the suite's runtime.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate, optimize, special as sp

from conftest import make_beta_dataset, random_params_dataset

from betalasso.exceptions import ValidationError
from betalasso.inference import approximate_inverse, debias, kkt_subgradient
from betalasso.model import Dataset, Params, gradient, hessian_beta, neg_log_likelihood
from betalasso.selection import exhaustive_aic
from betalasso.simulate import SimConfig, run_simulation, scaling_regression
from betalasso.solver import FitConfig, _intercept_only_mle, fit, lambda_max, solution_path
from betalasso.special import Rng, digamma, sample_beta


def report(number, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {number}: {description} {detail}")
    assert ok, f"criterion {number} failed: {description} {detail}"


def test_criterion_01_gradient_matches_finite_differences():
    start = time.time()
    gen = np.random.default_rng(20260808)
    h = 1e-6
    worst = 0.0
    for _ in range(100):
        theta, ds = random_params_dataset(gen)

        def nll(b0, b, phi):
            return neg_log_likelihood(Params(b0, b, phi), ds)

        g = gradient(theta, ds)
        analytic = np.concatenate([[g.d_beta0], g.d_beta, [g.d_phi]])
        fd = np.empty_like(analytic)
        fd[0] = (nll(theta.beta0 + h, theta.beta, theta.phi)
                 - nll(theta.beta0 - h, theta.beta, theta.phi)) / (2 * h)
        for j in range(theta.p):
            bp, bm = theta.beta.copy(), theta.beta.copy()
            bp[j] += h
            bm[j] -= h
            fd[1 + j] = (nll(theta.beta0, bp, theta.phi)
                         - nll(theta.beta0, bm, theta.phi)) / (2 * h)
        fd[-1] = (nll(theta.beta0, theta.beta, theta.phi + h)
                  - nll(theta.beta0, theta.beta, theta.phi - h)) / (2 * h)
        err = np.abs(analytic - fd) / np.maximum(np.abs(fd), 1e-2)
        worst = max(worst, float(err.max()))
        assert np.allclose(analytic, fd, rtol=1e-5, atol=1e-7)
    elapsed = time.time() - start
    report(1, "gradient matches central finite differences on 100 draws",
           elapsed < 10.0, f"(max rel err {worst:.2e}, {elapsed:.1f}s)")


def test_criterion_02_hessian_matches_finite_differences():
    start = time.time()
    gen = np.random.default_rng(7071)
    h = 1e-5
    worst = 0.0
    for _ in range(20):
        theta, ds = random_params_dataset(gen, phi_range=(0.5, 50.0))
        H = hessian_beta(theta, ds)
        vec = np.concatenate([[theta.beta0], theta.beta])
        fd = np.zeros_like(H)
        for j in range(vec.size):
            vp, vm = vec.copy(), vec.copy()
            vp[j] += h
            vm[j] -= h
            gp = gradient(Params(vp[0], vp[1:], theta.phi), ds).stacked()
            gm = gradient(Params(vm[0], vm[1:], theta.phi), ds).stacked()
            fd[:, j] = (gp - gm) / (2 * h)
        scale = np.maximum(np.abs(fd), 1e-2)
        worst = max(worst, float((np.abs(H - fd) / scale).max()))
        assert np.allclose(H, fd, rtol=1e-4, atol=1e-6)
    elapsed = time.time() - start
    report(2, "hessian matches finite differences of the gradient on 20 draws",
           elapsed < 10.0, f"(max rel err {worst:.2e}, {elapsed:.1f}s)")


def test_criterion_03_log_beta_moments():
    start = time.time()
    gen = np.random.default_rng(515)
    n_draws = 100_000
    for k in range(10):
        mu = float(gen.uniform(0.1, 0.9))
        phi = float(gen.uniform(0.8, 30.0))
        a, b = mu * phi, (1 - mu) * phi
        y = sample_beta(Rng(99, k), a, b, size=n_draws)
        logs = np.log(y)
        se = logs.std() / math.sqrt(n_draws)
        assert abs(logs.mean() - (digamma(a) - digamma(phi))) < 3 * se

        u2 = np.log(y) ** 2
        dens = lambda t: np.exp((a - 1) * np.log(t) + (b - 1) * np.log1p(-t)
                                - sp.betaln(a, b))
        oracle, _ = integrate.quad(lambda t: np.log(t) ** 2 * dens(t), 0.0, 1.0,
                                   limit=200)
        se2 = u2.std() / math.sqrt(n_draws)
        assert np.isfinite(u2.mean())
        assert abs(u2.mean() - oracle) < 3 * se2
    elapsed = time.time() - start
    report(3, "log-Beta first and second moments match psi identity / quadrature",
           elapsed < 30.0, f"({elapsed:.1f}s)")


def test_criterion_04_solver_contract():
    tol = 1e-8
    checked = 0
    for seed, lam_frac in [(1, 0.0), (2, 0.15), (3, 0.5), (4, 0.9)]:
        ds, *_ = make_beta_dataset(seed, 350, 5, beta=np.array([1.0, -0.6, 0.3, 0.0, 0.0]))
        lam_bar = lambda_max(ds)
        res = fit(ds, FitConfig(lam=lam_frac * lam_bar, tol=tol))
        tr = res.objective_trace
        assert np.all(np.diff(tr) <= 1e-10 * np.maximum(1.0, np.abs(tr[:-1])))
        assert res.converged and res.kkt_residual <= 10 * tol
        checked += 1
    # null-model regime at and above the penalty upper bound
    ds, *_ = make_beta_dataset(5, 400, 4, beta=np.array([0.9, -0.6, 0.0, 0.0]))
    lam_bar = lambda_max(ds)
    b0_null, phi_null = _intercept_only_mle(ds)
    for lam in (lam_bar, 1.01 * lam_bar, 2.0 * lam_bar):
        res = fit(ds, FitConfig(lam=lam, tol=tol))
        assert np.all(res.params.beta == 0.0)
        assert abs(res.params.beta0 - b0_null) < 1e-6
        assert abs(res.params.phi - phi_null) < 1e-6
        checked += 1
    report(4, "monotone trace, KKT certificate, exact null fit at lambda >= bound",
           checked == 7, f"({checked} fits)")


def test_criterion_05_low_dimensional_oracle_equivalence():
    start = time.time()
    worst = 0.0
    for rep in range(20):
        ds, *_ = make_beta_dataset(3000 + rep, 500, 3,
                                   beta=np.array([0.9, -0.45, 0.0]))
        res = fit(ds, FitConfig(lam=0.0, tol=1e-10))

        def nll(v):
            eta = v[0] + ds.X @ v[1:-1]
            mu = sp.expit(eta)
            phi = math.exp(v[-1])
            a, b = mu * phi, (1 - mu) * phi
            return float(np.mean(-sp.gammaln(phi) + sp.gammaln(a) + sp.gammaln(b)
                                 - (a - 1) * np.log(ds.y) - (b - 1) * np.log1p(-ds.y)))

        out = optimize.minimize(nll, np.zeros(5), method="BFGS",
                                options={"gtol": 1e-11, "maxiter": 5000})
        oracle = np.concatenate([out.x[:-1], [math.exp(out.x[-1])]])
        ours = np.concatenate([[res.params.beta0], res.params.beta, [res.params.phi]])
        diff = np.abs(ours - oracle)
        worst = max(worst, float(diff[:4].max()))
        assert np.all(diff[:4] < 1e-4)  # beta0 and beta coordinates
        assert diff[4] < 1e-3  # scale, oracle converges less tightly here
    elapsed = time.time() - start
    report(5, "unpenalized fit matches a dense second-order optimizer (20 reps)",
           True, f"(max coord diff {worst:.1e}, {elapsed:.1f}s)")


def test_criterion_06_table2_desk_scale():
    start = time.time()
    failures = []

    cfg_a = SimConfig(n=1000, p=20, s_star=2, reps=200, seed=601,
                      lambda_rule=0.2, lambda0_rule=0.01, alpha=0.05,
                      run_ci=True, tol=1e-8)
    rep_a = run_simulation(cfg_a, n_workers=8)
    cvg = rep_a.aggregates["coverage"][0] * 100
    tpr_a = rep_a.aggregates["tpr"][0] * 100
    fpr_a = rep_a.aggregates["fpr"][0] * 100
    print(f"  config A (n=1000,p=20,s=2): CVG={cvg:.1f} TPR={tpr_a:.1f} FPR={fpr_a:.1f} "
          f"failed={rep_a.n_failed}")
    if not 93.1 <= cvg <= 97.1:
        failures.append(f"CVG {cvg:.1f} outside [93.1, 97.1]")
    if tpr_a != 100.0:
        failures.append(f"TPR {tpr_a:.1f} != 100")
    if not 14.5 <= fpr_a <= 22.5:
        failures.append(f"FPR {fpr_a:.1f} outside [14.5, 22.5]")

    cfg_b = SimConfig(n=500, p=100, s_star=10, reps=200, seed=602,
                      lambda_rule=0.2, lambda0_rule=0.01, run_ci=False, tol=1e-8)
    rep_b = run_simulation(cfg_b, n_workers=8)
    tpr_b = rep_b.aggregates["tpr"][0] * 100
    fpr_b = rep_b.aggregates["fpr"][0] * 100
    print(f"  config B (n=500,p=100,s=10): TPR={tpr_b:.1f} FPR={fpr_b:.1f} "
          f"failed={rep_b.n_failed}")
    if not 76.0 <= tpr_b <= 86.0:
        # a correctly converged minimizer recovers the 0.35-magnitude signal
        # coordinates essentially always at any penalty keeping FPR near 11%;
        # the reference row's TPR is reproducible only by a partially
        # converged solver (see the sweep evidence in the decisions ledger)
        failures.append(f"TPR {tpr_b:.1f} outside [76, 86]")
    if not 9.0 <= fpr_b <= 13.5:
        failures.append(f"FPR {fpr_b:.1f} outside [9, 13.5]")

    elapsed = time.time() - start
    report(6, "Table-2 desk-scale reproduction (200 reps per config)",
           not failures, f"({'; '.join(failures) or 'all bands met'}, {elapsed:.0f}s)")


def test_criterion_07_scaling_law():
    start = time.time()
    reports = []
    for s in (2, 5, 10):
        for p in (20, 50, 100):
            for n in (500, 1000):
                cfg = SimConfig(n=n, p=p, s_star=s, reps=50,
                                seed=700 + s * 97 + p * 7 + n, tol=1e-7)
                reports.append(run_simulation(cfg, n_workers=8))
    sr = scaling_regression(reports)
    g = sr.coefficients
    elapsed = time.time() - start
    ok = (0.45 <= g[1] <= 0.95) and (-0.65 <= g[2] <= -0.35)
    report(7, "error-scaling regression exponents in band",
           ok, f"(g1={g[1]:.3f} in [0.45,0.95], g2={g[2]:.3f} in [-0.65,-0.35], "
               f"R2={sr.r_squared:.2f}, {elapsed:.0f}s)")


def test_criterion_08_debias_algebra():
    ds, *_ = make_beta_dataset(801, 400, 6, beta=np.array([1.0, -0.7, 0.0, 0.0, 0.0, 0.0]))
    res = fit(ds, FitConfig(lam=0.08, tol=1e-9))
    lam0 = 0.02
    dres = debias(res, ds, lambda0=lam0)
    z = kkt_subgradient(res, ds)
    ai = approximate_inverse(hessian_beta(res.params, ds), lam0)
    estimate = np.concatenate([[res.params.beta0], res.params.beta])
    exact = np.array_equal(dres.debiased, estimate + res.lam * (ai.omega @ z))
    within = dres.omega_constraint_violation <= dres.lambda0
    ident = np.array_equal(approximate_inverse(np.eye(9), 0.05).omega, np.eye(9))
    report(8, "debias identity exact, constraint within final level, identity case",
           exact and within and ident,
           f"(violation {dres.omega_constraint_violation:.2e} <= {dres.lambda0:.2e})")


def test_criterion_09_simulation_determinism():
    cfg = SimConfig(n=400, p=10, s_star=2, reps=12, seed=901, run_ci=True, tol=1e-7)
    rep1 = run_simulation(cfg, n_workers=1)
    rep8 = run_simulation(cfg, n_workers=8)
    same = rep1.statistical_fields() == rep8.statistical_fields()
    report(9, "simulate reports bit-identical across 1 and 8 workers", same)


def test_criterion_10_case_study_shape_smoke():
    n, p = 2377, 20
    beta = np.zeros(p)
    beta[[0, 3, 7, 11]] = [0.4, -0.3, 0.25, -0.2]
    ds_raw, *_ = make_beta_dataset(1001, n, p, beta=beta, phi=30.0)
    Xs = (ds_raw.X - ds_raw.X.mean(axis=0)) / ds_raw.X.std(axis=0)
    ds = Dataset(Xs, ds_raw.y)

    start = time.time()
    pts = solution_path(ds, n_lambda=50, config=FitConfig(lam=0.0, tol=1e-8))
    elapsed = time.time() - start
    path_ok = len(pts) == 50 and elapsed < 60.0

    with pytest.raises(ValidationError):
        exhaustive_aic(ds)  # p=20 above the default cap: refused
    small, *_ = make_beta_dataset(1002, 200, 3)
    allowed = exhaustive_aic(small, p_cap=20)  # raising the cap enables it
    report(10, "50-point path under 60s; enumeration refused unless cap raised",
           path_ok and allowed is not None, f"(path {elapsed:.1f}s)")
