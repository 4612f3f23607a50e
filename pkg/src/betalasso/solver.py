"""Proximal gradient solver for the L1-penalized Beta regression objective.

The smooth part is minimized over (beta0, beta) with soft-threshold steps
(the intercept is never penalized) and a backtracking stepsize; the scale
parameter is re-optimized by one-dimensional minimization every few accepted
steps. Termination requires both a small decrease of the penalized objective
and a small stationarity residual, so a fit reported as converged carries a
meaningful KKT certificate.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ComputationError, StrategyError, ValidationError
from .model import (
    Dataset,
    GradientTriple,
    Params,
    _mu_pair,
    _nll_from_mu,
    _phi_gradient_from_mu,
    gradient,
    hessian_beta,
    hessian_weights,
)
from .special import logistic_mu, soft_threshold

__all__ = [
    "FitConfig",
    "FitResult",
    "initial_iterate",
    "default_stepsize",
    "fit",
    "lambda_max",
    "solution_path",
]

# Relative slack when testing the majorization inequality; below this scale
# the comparison is dominated by floating-point noise in the objective.
_MAJORIZE_SLACK = 1e-13

_PHI_LOG_LO = math.log(1e-4)
_PHI_LOG_HI = math.log(1e8)

# widest design for which the Hessian is materialized for its spectral norm
_SPECTRAL_LIMIT = 2000


@dataclass(frozen=True)
class FitConfig:
    """Solver settings: penalty level, tolerances, and update schedule."""

    lam: float
    tol: float = 1e-8
    max_iter: int = 10_000
    phi_update_every: int = 5
    init_strategy: object = "logistic"  # "beta" | "logistic" | Params
    backtrack_factor: float = 0.9
    stepsize_override: float | None = None
    max_shrink: int = 100

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValidationError("FitConfig: lam must be a nonnegative real")
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise ValidationError("FitConfig: tol must be positive")
        if self.max_iter < 1 or self.phi_update_every < 1:
            raise ValidationError("FitConfig: max_iter and phi_update_every must be >= 1")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValidationError("FitConfig: backtrack_factor must lie in (0, 1)")
        if self.stepsize_override is not None and not (
            np.isfinite(self.stepsize_override) and self.stepsize_override > 0
        ):
            raise ValidationError("FitConfig: stepsize_override must be positive")
        if not isinstance(self.init_strategy, Params) and self.init_strategy not in (
            "beta",
            "logistic",
        ):
            raise ValidationError(
                "FitConfig: init_strategy must be 'beta', 'logistic' or a Params instance"
            )


@dataclass(frozen=True)
class FitResult:
    """Converged parameters plus the diagnostics of the run."""

    params: Params
    lam: float
    objective_trace: np.ndarray
    kkt_residual: float
    active_set: np.ndarray
    iterations: int
    converged: bool
    final_stepsize: float


def _golden_minimize(f, lo, hi, xtol, max_iter=200):
    """Golden-section search for a scalar minimum on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _newton_refine(x, g, lo, hi, steps, xtol=1e-11, h=1e-6):
    """Safeguarded 1-d Newton steps on g(x) = 0 with finite-difference curvature."""
    for _ in range(steps):
        g0 = g(x)
        curv = (g(x + h) - g0) / h
        if not np.isfinite(curv) or curv <= 0.0:
            return x, False
        x_new = min(max(x - g0 / curv, lo), hi)
        moved = abs(x_new - x)
        x = x_new
        if moved < xtol:
            return x, True
    return x, True


def _minimize_phi(dataset, mu, omu, phi_hint=None):
    """argmin over the scale of the mean negative log likelihood at fixed means.

    Cold calls run golden-section on log(phi) over a wide bracket and polish
    with Newton steps; warm calls try Newton directly from the previous scale
    and fall back to the cold path if that stalls. Never returns a scale with
    a worse objective than the hint.
    """

    def fval(t):
        return _nll_from_mu(mu, omu, dataset, math.exp(t))

    def gval(t):
        phi = math.exp(t)
        return _phi_gradient_from_mu(mu, omu, dataset, phi) * phi

    x = None
    if phi_hint is not None and _PHI_LOG_LO < math.log(phi_hint) < _PHI_LOG_HI:
        x0 = math.log(phi_hint)
        x, ok = _newton_refine(x0, gval, _PHI_LOG_LO, _PHI_LOG_HI, steps=8)
        if not ok or x in (_PHI_LOG_LO, _PHI_LOG_HI):
            x = None
    if x is None:
        x = _golden_minimize(fval, _PHI_LOG_LO, _PHI_LOG_HI, xtol=1e-6)
        x, _ = _newton_refine(x, gval, _PHI_LOG_LO, _PHI_LOG_HI, steps=3)
    phi_new = math.exp(x)
    f_new = fval(x)
    if phi_hint is not None:
        f_hint = fval(math.log(phi_hint))
        if f_new > f_hint:
            return float(phi_hint), f_hint
    return phi_new, f_new


def _design_with_intercept(dataset):
    return np.column_stack([np.ones(dataset.n), dataset.X])


def _logit(y):
    return np.log(y) - np.log1p(-y)


def _prox_step(x, gx, fx, f, s, lam, backtrack_factor, max_shrink):
    """One accepted proximal step; shrinks s until the quadratic model majorizes.

    x and gx are intercept-first stacked vectors; the penalty applies to
    x[1:]. Returns (new point, its smooth value, stepsize, shrink count).
    """
    for shrink in range(max_shrink + 1):
        cand = np.empty_like(x)
        cand[0] = x[0] - s * gx[0]
        cand[1:] = soft_threshold(x[1:] - s * gx[1:], lam * s)
        d = cand - x
        quad = fx + gx @ d + (d @ d) / (2.0 * s)
        fc = f(cand)
        if fc <= quad + _MAJORIZE_SLACK * max(1.0, abs(quad)):
            return cand, fc, s, shrink
        s *= backtrack_factor
    raise ComputationError(
        f"proximal step: majorization still violated after {max_shrink} stepsize shrinkages"
    )


def _cross_entropy_value_grad(dataset, Xt):
    y = dataset.y

    def value(x):
        eta = Xt @ x
        # -[y log mu + (1-y) log(1-mu)] = softplus(eta) - y eta
        sp = np.log1p(np.exp(-np.abs(eta))) + np.maximum(eta, 0.0)
        return float(np.mean(sp - y * eta))

    def grad(x):
        eta = Xt @ x
        resid = np.asarray(logistic_mu(eta)) - y
        return Xt.T @ resid / dataset.n

    return value, grad


def _penalized_logistic_start(dataset, lam, tol=1e-9, max_iter=2000):
    """L1-penalized cross-entropy fit of the pseudo-binary responses."""
    Xt = _design_with_intercept(dataset)
    value, grad = _cross_entropy_value_grad(dataset, Xt)
    x = np.zeros(dataset.p + 1)
    x[0] = float(_logit(np.clip(np.mean(dataset.y), 1e-6, 1 - 1e-6)))
    # cross-entropy curvature is at most ||X~||^2 / (4n)
    s = 4.0 * dataset.n / np.linalg.norm(Xt, 2) ** 2
    fx = value(x)
    obj = fx + lam * np.abs(x[1:]).sum()
    for _ in range(max_iter):
        gx = grad(x)
        x, fx, s, _ = _prox_step(x, gx, fx, value, s, lam, 0.9, 100)
        obj_new = fx + lam * np.abs(x[1:]).sum()
        if obj - obj_new < tol:
            break
        obj = obj_new
    return x


def initial_iterate(dataset: Dataset, strategy, lam: float = 0.0) -> Params:
    """Starting point for the solver.

    "beta" builds logit-scale least-squares starting values (needs p < n and
    a full-rank design); "logistic" runs an L1-penalized cross-entropy fit of
    the proportions at penalty ``lam``; a Params instance passes (beta0, beta)
    through. In every case the scale is then re-optimized at fixed means.
    """
    if isinstance(strategy, Params):
        if strategy.p != dataset.p:
            raise ValidationError("initial_iterate: supplied Params have wrong dimension")
        b0, beta = strategy.beta0, strategy.beta
        phi_hint = strategy.phi
    elif strategy == "beta":
        if dataset.p >= dataset.n:
            raise StrategyError(
                "initial_iterate: 'beta' start requires p < n; use 'logistic' instead"
            )
        Xt = _design_with_intercept(dataset)
        sol, _, rank, _ = np.linalg.lstsq(Xt, _logit(dataset.y), rcond=None)
        if rank < dataset.p + 1:
            raise StrategyError("initial_iterate: design is rank deficient")
        b0, beta = float(sol[0]), sol[1:]
        phi_hint = None
    elif strategy == "logistic":
        x = _penalized_logistic_start(dataset, lam)
        b0, beta = float(x[0]), x[1:]
        phi_hint = None
    else:
        raise ValidationError(f"initial_iterate: unknown strategy {strategy!r}")

    mu, omu = _mu_pair(b0 + dataset.X @ beta)
    phi, _ = _minimize_phi(dataset, mu, omu, phi_hint=phi_hint)
    return Params(beta0=b0, beta=beta, phi=phi)


def default_stepsize(dataset: Dataset, init: Params, override: float | None = None) -> float:
    """Initial stepsize 1/||H|| from the Hessian at the starting point.

    For designs with more than 2000 columns the Hessian is not materialized;
    the bound max_i w_i ||X~||^2 / n replaces its spectral norm. If no weight
    is positive the stepsize falls back to 1 and backtracking takes over.
    """
    if override is not None:
        if not (np.isfinite(override) and override > 0):
            raise ValidationError("default_stepsize: override must be positive")
        return float(override)
    if dataset.p + 1 <= _SPECTRAL_LIMIT:
        H = hessian_beta(init, dataset)
        nrm = float(np.max(np.abs(np.linalg.eigvalsh(H))))
        if np.isfinite(nrm) and nrm > 0:
            return 1.0 / nrm
        return 1.0
    w = hessian_weights(init, dataset)
    w_max = float(np.max(w))
    if w_max <= 0 or not np.isfinite(w_max):
        return 1.0
    Xt = _design_with_intercept(dataset)
    return dataset.n / (w_max * np.linalg.norm(Xt, 2) ** 2)


def _kkt_residual(g: GradientTriple, beta: np.ndarray, lam: float) -> float:
    """Max violation of the first-order conditions of the penalized problem."""
    worst = max(abs(g.d_beta0), abs(g.d_phi))
    if beta.size:
        active = beta != 0.0
        if np.any(active):
            worst = max(
                worst,
                float(np.max(np.abs(g.d_beta[active] + lam * np.sign(beta[active])))),
            )
        if np.any(~active):
            worst = max(worst, float(np.max(np.abs(g.d_beta[~active])) - lam), 0.0)
    return float(worst)


def fit(dataset: Dataset, config: FitConfig, _on_accept=None) -> FitResult:
    """Minimize the penalized objective R_n + lam * ||beta||_1.

    Proximal steps update (beta0, beta); every ``phi_update_every`` accepted
    steps the scale is re-optimized. The loop stops once the penalized
    objective decrease falls below tol and the stationarity residual is below
    10 * tol; hitting max_iter returns converged=False with the last iterate.

    ``_on_accept(x_old, x_new, gx, fx_old, fx_new, s)`` is a test hook called
    after each accepted proximal step.
    """
    theta = initial_iterate(dataset, config.init_strategy, lam=config.lam)
    if not isinstance(config.init_strategy, Params) and not np.any(theta.beta):
        # all-zero start: place the unpenalized coordinates at the null-model
        # optimum (the same routine that defines the penalty upper bound), so
        # penalties at or above that bound keep the coefficients at zero
        b0_null, phi_null = _intercept_only_mle(dataset)
        theta = Params(b0_null, theta.beta, phi_null)
    s = default_stepsize(dataset, theta, override=config.stepsize_override)
    lam = config.lam
    M = config.phi_update_every

    x = np.concatenate([[theta.beta0], theta.beta])
    phi = theta.phi

    def smooth(xvec):
        mu, omu = _mu_pair(xvec[0] + dataset.X @ xvec[1:])
        val = _nll_from_mu(mu, omu, dataset, phi)
        if not np.isfinite(val):
            raise ComputationError("fit: objective is not finite")
        return val

    fx = smooth(x)
    obj = fx + lam * np.abs(x[1:]).sum()
    trace = [obj]
    converged = False
    kkt = math.inf
    iterations = 0
    # after a failed stationarity check, let the coefficient block iterate a
    # while before re-polishing the scale; checking every step sets up a
    # one-step-per-coordinate zigzag that can stall just above the gate
    check_cooldown = 0
    last_kkt = math.inf
    stalled = 0

    for it in range(1, config.max_iter + 1):
        params = Params(x[0], x[1:], phi)
        g = gradient(params, dataset)
        gx = g.stacked()
        x_old, fx_old = x, fx
        x, fx, s, _ = _prox_step(
            x, gx, fx, smooth, s, lam, config.backtrack_factor, config.max_shrink
        )
        if _on_accept is not None:
            _on_accept(x_old, x, gx, fx_old, fx, s)
        iterations = it
        phi_fresh = False
        if it % M == 0:
            mu, omu = _mu_pair(x[0] + dataset.X @ x[1:])
            phi, fx = _minimize_phi(dataset, mu, omu, phi_hint=phi)
            phi_fresh = True
        obj_new = fx + lam * np.abs(x[1:]).sum()
        trace.append(obj_new)
        decrease = obj - obj_new

        if decrease < config.tol and check_cooldown == 0:
            # candidate stop: bring the scale to its coordinate optimum, then
            # accept only with a matching stationarity certificate
            if not phi_fresh:
                mu, omu = _mu_pair(x[0] + dataset.X @ x[1:])
                phi, fx = _minimize_phi(dataset, mu, omu, phi_hint=phi)
                obj_new = fx + lam * np.abs(x[1:]).sum()
                if obj_new < trace[-1]:
                    trace.append(obj_new)
            g_final = gradient(Params(x[0], x[1:], phi), dataset)
            kkt = _kkt_residual(g_final, x[1:], lam)
            if kkt <= 10.0 * config.tol:
                converged = True
                obj = obj_new
                break
            # objective already flat at float precision with no certificate
            # progress: further iterations cannot improve the iterate
            if decrease <= 4e-16 * max(1.0, abs(obj_new)) and kkt >= 0.9 * last_kkt:
                stalled += 1
                if stalled >= 3:
                    obj = obj_new
                    break
            else:
                stalled = 0
            last_kkt = kkt
            check_cooldown = 2 * M
        elif check_cooldown > 0:
            check_cooldown -= 1
        obj = obj_new

    if not converged:
        g_final = gradient(Params(x[0], x[1:], phi), dataset)
        kkt = _kkt_residual(g_final, x[1:], lam)

    params = Params(x[0], x[1:], phi)
    return FitResult(
        params=params,
        lam=lam,
        objective_trace=np.asarray(trace),
        kkt_residual=kkt,
        active_set=np.flatnonzero(params.beta != 0.0),
        iterations=iterations,
        converged=converged,
        final_stepsize=float(s),
    )


def _intercept_only_mle(dataset: Dataset, tol: float = 1e-10, max_rounds: int = 200):
    """Alternating 1-d minimizations of the null model (beta identically 0)."""
    b0 = float(_logit(np.clip(np.mean(dataset.y), 1e-6, 1 - 1e-6)))
    zeros = np.zeros(dataset.p)

    def b0_objective(b):
        mu, omu = _mu_pair(np.full(dataset.n, b))
        return _nll_from_mu(mu, omu, dataset, phi)

    def b0_gradient(b):
        params = Params(b, zeros, phi)
        return gradient(params, dataset).d_beta0

    mu, omu = _mu_pair(np.full(dataset.n, b0))
    phi, _ = _minimize_phi(dataset, mu, omu)
    for rounds in range(max_rounds):
        if rounds == 0:
            b0_new = _golden_minimize(b0_objective, b0 - 2.0, b0 + 2.0, xtol=1e-6)
        else:
            b0_new = b0
        b0_new, _ = _newton_refine(b0_new, b0_gradient, b0 - 4.0, b0 + 4.0, steps=6)
        mu, omu = _mu_pair(np.full(dataset.n, b0_new))
        phi_new, _ = _minimize_phi(dataset, mu, omu, phi_hint=phi)
        moved = max(abs(b0_new - b0), abs(math.log(phi_new) - math.log(phi)))
        b0, phi = b0_new, phi_new
        if moved < tol:
            break
    return b0, phi


def lambda_max(dataset: Dataset) -> float:
    """Smallest penalty at which the all-zero coefficient vector is optimal.

    Computes the intercept-only maximum likelihood fit and returns the sup
    norm of the coefficient-block gradient there.
    """
    b0, phi = _intercept_only_mle(dataset)
    g = gradient(Params(b0, np.zeros(dataset.p), phi), dataset)
    return float(np.max(np.abs(g.d_beta)))


def solution_path(
    dataset: Dataset,
    n_lambda: int = 50,
    lambda_min: float = 1e-4,
    lambda_min_fraction: float | None = None,
    lambda_max_fraction: float = 0.95,
    config: FitConfig | None = None,
):
    """Warm-started fits on a descending log-spaced penalty grid.

    The grid runs from lambda_max_fraction times the data-driven upper bound
    down to an absolute floor (default 1e-4) or, when lambda_min_fraction is
    given, a fractional floor. Each fit starts from the previous solution.
    Returns a list of (lam, FitResult), largest penalty first.
    """
    if n_lambda < 2:
        raise ValidationError("solution_path: need n_lambda >= 2")
    if lambda_min_fraction is not None and not 0.0 < lambda_min_fraction < 1.0:
        raise ValidationError("solution_path: lambda_min_fraction must lie in (0, 1)")
    if not 0.0 < lambda_max_fraction <= 1.0:
        raise ValidationError("solution_path: lambda_max_fraction must lie in (0, 1]")
    base = config if config is not None else FitConfig(lam=0.0)
    lam_bar = lambda_max(dataset)
    top = lambda_max_fraction * lam_bar
    floor = lambda_min_fraction * lam_bar if lambda_min_fraction is not None else lambda_min
    if not 0.0 < floor < top:
        raise ValidationError(
            f"solution_path: empty grid (floor {floor:.3g} vs top {top:.3g})"
        )
    grid = np.geomspace(top, floor, n_lambda)
    out = []
    warm = base.init_strategy
    for lam in grid:
        cfg = replace(base, lam=float(lam), init_strategy=warm)
        try:
            res = fit(dataset, cfg)
        except ComputationError as exc:
            raise ComputationError(f"solution_path: fit failed at lambda={lam:.6g}") from exc
        out.append((float(lam), res))
        warm = res.params
    return out
