"""Information-criterion subset selection for small feature counts.

Each candidate subset is refit without penalty and scored by AIC with the
intercept and the scale counted as free parameters. Enumeration walks the
subset lattice depth-first so every child fit warm-starts from its parent.
"""

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ComputationError, ValidationError
from .model import Dataset, Params, _mu_pair, _nll_from_mu, neg_log_likelihood
from .solver import FitConfig, _intercept_only_mle, fit

__all__ = ["SubsetFit", "fit_subset", "exhaustive_aic", "DEFAULT_P_CAP"]

# 2^p unpenalized fits grow fast; beyond this the penalty path is the tool.
DEFAULT_P_CAP = 15


@dataclass(frozen=True)
class SubsetFit:
    """An unpenalized fit restricted to a feature subset, with its AIC."""

    subset: tuple
    params: Params
    aic: float
    loglik: float


def _aic(n, nll_mean, k_features):
    # intercept and scale are always estimated
    return 2.0 * n * nll_mean + 2.0 * (k_features + 2)


def _null_subset_fit(dataset):
    b0, phi = _intercept_only_mle(dataset)
    mu, omu = _mu_pair(np.full(dataset.n, b0))
    nll = _nll_from_mu(mu, omu, dataset, phi)
    params = Params(beta0=b0, beta=np.zeros(0), phi=phi)
    return SubsetFit(
        subset=(),
        params=params,
        aic=_aic(dataset.n, nll, 0),
        loglik=-dataset.n * nll,
    )


def fit_subset(dataset: Dataset, subset, config: FitConfig | None = None) -> SubsetFit:
    """Unpenalized fit on the columns in ``subset`` plus its AIC score."""
    subset = tuple(sorted(int(j) for j in subset))
    if len(set(subset)) != len(subset):
        raise ValidationError("fit_subset: duplicate feature indices")
    if subset and (subset[0] < 0 or subset[-1] >= dataset.p):
        raise ValidationError("fit_subset: feature index out of range")
    if len(subset) >= dataset.n:
        raise ValidationError("fit_subset: subset must be smaller than the sample size")
    if not subset:
        return _null_subset_fit(dataset)

    X_sub = dataset.X[:, list(subset)]
    design = np.column_stack([np.ones(dataset.n), X_sub])
    if np.linalg.matrix_rank(design) < len(subset) + 1:
        raise ComputationError(f"fit_subset: singular design for subset {subset}")
    ds_sub = Dataset(X_sub, dataset.y)
    cfg = config if config is not None else FitConfig(lam=0.0, tol=1e-9)
    cfg = replace(cfg, lam=0.0)
    res = fit(ds_sub, cfg)
    nll = neg_log_likelihood(res.params, ds_sub)
    return SubsetFit(
        subset=subset,
        params=res.params,
        aic=_aic(dataset.n, nll, len(subset)),
        loglik=-dataset.n * nll,
    )


def exhaustive_aic(
    dataset: Dataset, p_cap: int = DEFAULT_P_CAP, config: FitConfig | None = None
) -> SubsetFit:
    """Minimum-AIC subset over all 2^p candidates.

    Refuses when p exceeds p_cap; raise p_cap explicitly to allow larger
    enumerations. Ties break toward the smaller subset, then lexicographic
    order. Fits warm-start from the parent subset's solution.
    """
    if dataset.p > p_cap:
        raise ValidationError(
            f"exhaustive_aic: p={dataset.p} exceeds p_cap={p_cap}; enumeration of "
            f"2^{dataset.p} subsets refused. Raise p_cap explicitly, or use "
            "solution_path for a penalized sweep instead."
        )
    base = config if config is not None else FitConfig(lam=0.0, tol=1e-9)
    best = _null_subset_fit(dataset)
    root_params = best.params
    n_visited = 1

    def better(cand, incumbent):
        key_c = (cand.aic, len(cand.subset), cand.subset)
        key_i = (incumbent.aic, len(incumbent.subset), incumbent.subset)
        return key_c < key_i

    # depth-first over increasing index sequences; parent warm start gets a
    # zero coefficient appended for the new feature
    stack = [((), Params(root_params.beta0, np.zeros(0), root_params.phi), 0)]
    while stack:
        subset, parent_params, next_j = stack.pop()
        for j in range(next_j, dataset.p):
            child = subset + (j,)
            warm_beta = np.append(parent_params.beta, 0.0)
            warm = Params(parent_params.beta0, warm_beta, parent_params.phi)
            cfg = replace(base, init_strategy=warm)
            sub_fit = fit_subset(dataset, child, cfg)
            n_visited += 1
            if better(sub_fit, best):
                best = sub_fit
            stack.append((child, sub_fit.params, j + 1))
    expected = 2**dataset.p
    if n_visited != expected:
        raise ComputationError(
            f"exhaustive_aic: visited {n_visited} subsets, expected {expected}"
        )
    return best
