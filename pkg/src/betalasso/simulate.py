"""Monte Carlo study harness: ground truth, replications, and aggregation.

Each replication draws a Gaussian design and Beta responses from a sparse
ground truth, fits the penalized model, and records the l1 estimation error
plus support-recovery and (optionally) interval-coverage metrics. Replications
run on isolated counter-based substreams keyed by the replication index, so
reports are bit-identical regardless of how many workers execute them.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .inference import debias
from .model import Dataset, Params
from .solver import FitConfig, fit
from .special import Rng, logistic_mu, sample_beta

__all__ = [
    "SimConfig",
    "RepRecord",
    "SimReport",
    "ScalingRegression",
    "gen_beta_star",
    "gen_dataset",
    "run_simulation",
    "scaling_regression",
]


@dataclass(frozen=True)
class SimConfig:
    """One simulation cell: problem shape, truth, penalty rules, replications.

    The fitting penalty is lambda_rule * phi_star * sqrt(log(p)/n): the rule
    coefficient is scaled by the generative scale parameter because the
    coefficient-block gradient of the likelihood is proportional to the scale,
    so a fixed rule coefficient corresponds to a fixed quantile of the noise
    gradient only after that scaling. The interval-constraint level is
    lambda0_rule * sqrt(log(p)/n), unscaled.
    """

    n: int
    p: int
    s_star: int
    phi_star: float = 4.0
    reps: int = 100
    seed: int = 0
    lambda_rule: float = 0.2
    lambda0_rule: float = 0.01
    alpha: float = 0.05
    run_ci: bool = False
    beta0_star: float = 0.0
    tol: float = 1e-8

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValidationError("SimConfig: need n >= 1 and p >= 1")
        if not 1 <= self.s_star <= self.p:
            raise ValidationError("SimConfig: need 1 <= s_star <= p")
        if self.reps < 1:
            raise ValidationError("SimConfig: need reps >= 1")
        if not (np.isfinite(self.phi_star) and self.phi_star > 0):
            raise ValidationError("SimConfig: phi_star must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("SimConfig: alpha must lie in (0, 1)")

    @property
    def lam(self) -> float:
        return self.lambda_rule * self.phi_star * math.sqrt(math.log(self.p) / self.n)

    @property
    def lambda0(self) -> float:
        return self.lambda0_rule * math.sqrt(math.log(self.p) / self.n)


@dataclass(frozen=True)
class RepRecord:
    rep: int
    l1_error: float = math.nan
    tpr: float = math.nan
    fpr: float = math.nan
    coverage: float = math.nan
    coverage_support: float = math.nan
    iterations: int = 0
    runtime: float = 0.0
    failed: bool = False
    error: str | None = None


# metrics aggregated over successful replications; runtime is diagnostic only
_METRICS = ("l1_error", "tpr", "fpr", "coverage", "coverage_support")


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    per_rep: tuple
    aggregates: dict = field(default_factory=dict)
    n_failed: int = 0

    def statistical_fields(self):
        """Deterministic content: everything except wall-clock runtimes."""
        rows = tuple(
            (r.rep, r.l1_error, r.tpr, r.fpr, r.coverage, r.coverage_support,
             r.iterations, r.failed, r.error)
            for r in self.per_rep
        )
        return (self.config, rows, tuple(sorted(self.aggregates.items())), self.n_failed)


def gen_beta_star(p: int, s_star: int) -> np.ndarray:
    """Sparse ground truth with paired alternating signs, squared norm 13/6.

    Pair j carries magnitudes sqrt(1/(j+1)); the vector is truncated to
    exactly s_star non-zeros, zero-padded to length p, then rescaled.
    """
    if not 1 <= s_star <= p:
        raise ValidationError("gen_beta_star: need 1 <= s_star <= p")
    beta = np.zeros(p)
    for j in range(1, (s_star + 1) // 2 + 1):
        mag = math.sqrt(1.0 / (j + 1))
        if 2 * j - 2 < s_star:
            beta[2 * j - 2] = mag
        if 2 * j - 1 < s_star:
            beta[2 * j - 1] = -mag
    beta *= math.sqrt((13.0 / 6.0) / float(beta @ beta))
    return beta


def gen_dataset(rng: Rng, config: SimConfig):
    """Standard normal design and Beta responses at the ground truth."""
    gen = rng.generator if isinstance(rng, Rng) else rng
    beta_star = gen_beta_star(config.p, config.s_star)
    X = gen.standard_normal((config.n, config.p))
    mu = np.asarray(logistic_mu(config.beta0_star + X @ beta_star))
    y = sample_beta(gen, mu * config.phi_star, (1.0 - mu) * config.phi_star)
    truth = Params(beta0=config.beta0_star, beta=beta_star, phi=config.phi_star)
    return Dataset(X, y), truth


def _one_replication(config: SimConfig, rep: int) -> RepRecord:
    start = time.perf_counter()
    try:
        dataset, truth = gen_dataset(Rng(config.seed, rep), config)
        result = fit(dataset, FitConfig(lam=config.lam, tol=config.tol))
        beta_hat = result.params.beta
        s = config.s_star
        active = beta_hat != 0.0
        tpr = float(np.mean(active[:s]))
        fpr = float(np.mean(active[s:])) if config.p > s else math.nan
        l1 = float(np.abs(beta_hat - truth.beta).sum())
        coverage = math.nan
        coverage_support = math.nan
        if config.run_ci:
            db = debias(result, dataset, lambda0=config.lambda0, alpha=config.alpha)
            lo, hi = db.intervals[1:, 0], db.intervals[1:, 1]
            hit = (lo <= truth.beta) & (truth.beta <= hi)
            coverage = float(np.mean(hit))
            coverage_support = float(np.mean(hit[:s]))
        return RepRecord(
            rep=rep,
            l1_error=l1,
            tpr=tpr,
            fpr=fpr,
            coverage=coverage,
            coverage_support=coverage_support,
            iterations=result.iterations,
            runtime=time.perf_counter() - start,
        )
    except Exception as exc:  # noqa: BLE001 - per-replication isolation
        return RepRecord(
            rep=rep,
            runtime=time.perf_counter() - start,
            failed=True,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_simulation(config: SimConfig, n_workers: int = 1) -> SimReport:
    """Execute all replications and aggregate means with standard errors.

    Failed replications are recorded and excluded from the aggregates.
    Results are collected in replication order, so the report's statistical
    content does not depend on n_workers.
    """
    if n_workers < 1:
        raise ValidationError("run_simulation: n_workers must be >= 1")
    if n_workers == 1:
        records = [_one_replication(config, rep) for rep in range(config.reps)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            records = list(pool.map(lambda r: _one_replication(config, r), range(config.reps)))
    records.sort(key=lambda r: r.rep)

    aggregates = {}
    good = [r for r in records if not r.failed]
    for name in _METRICS:
        vals = np.array([getattr(r, name) for r in good], dtype=float)
        vals = vals[~np.isnan(vals)]
        if vals.size:
            mean = float(np.mean(vals))
            se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
            aggregates[name] = (mean, se)
    return SimReport(
        config=config,
        per_rep=tuple(records),
        aggregates=aggregates,
        n_failed=len(records) - len(good),
    )


@dataclass(frozen=True)
class ScalingRegression:
    coefficients: np.ndarray  # intercept, log s, log n, log log p
    r_squared: float


def scaling_regression(reports) -> ScalingRegression:
    """Least squares of per-replication log l1 errors on the size regressors.

    Pools every successful replication across the supplied reports and
    regresses log(l1_error) on [1, log s, log n, log log p] via the normal
    equations of the 4x4 system.
    """
    rows, targets = [], []
    for report in reports:
        c = report.config
        regressors = (1.0, math.log(c.s_star), math.log(c.n), math.log(math.log(c.p)))
        for r in report.per_rep:
            if not r.failed and np.isfinite(r.l1_error) and r.l1_error > 0:
                rows.append(regressors)
                targets.append(math.log(r.l1_error))
    if not rows:
        raise ValidationError("scaling_regression: no usable replications")
    A = np.asarray(rows)
    b = np.asarray(targets)
    for k, name in ((1, "s"), (2, "n"), (3, "p")):
        if np.unique(A[:, k]).size < 2:
            raise ValidationError(
                f"scaling_regression: regressor log {name} is constant across reports"
            )
    gram = A.T @ A
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise ValidationError("scaling_regression: rank-deficient design") from exc
    gamma = np.linalg.solve(chol.T, np.linalg.solve(chol, A.T @ b))
    resid = b - A @ gamma
    tss = float(np.sum((b - b.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else 0.0
    return ScalingRegression(coefficients=gamma, r_squared=r2)
