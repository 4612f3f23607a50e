"""Beta regression model with logit mean link and a common scale parameter.

The response is Beta-distributed with mean mu_i = logistic(beta0 + x_i'beta)
and scale phi, i.e. shape parameters (mu_i phi, (1 - mu_i) phi). The loss is
the mean negative log density over observations; the scale enters every
per-observation term, so its log-Gamma normalizer appears inside the mean.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ComputationError, ValidationError
from .special import digamma, log_gamma, logistic_mu, trigamma

__all__ = [
    "Dataset",
    "Params",
    "GradientTriple",
    "mu_vector",
    "neg_log_likelihood",
    "gradient",
    "per_observation_gradients",
    "hessian_beta",
]

# Responses may sit exactly on this clamp after simulation draws are guarded.
RESPONSE_EPS = 1e-12
# Saturation guard for the mean so mu*phi never underflows to a Gamma pole.
MU_FLOOR = 1e-15


@dataclass(frozen=True)
class Dataset:
    """Immutable predictor matrix and (0,1) responses.

    X is n-by-p with one row per observation; y lies in
    [RESPONSE_EPS, 1 - RESPONSE_EPS] so both log(y) and log(1-y) are finite.
    When the predictors were standardized at load time, ``center`` and
    ``scale`` record the original-scale transforms for back-mapping.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple | None = None
    center: np.ndarray | None = None
    scale: np.ndarray | None = None
    log_y: np.ndarray = field(init=False, repr=False, compare=False)
    log_1my: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=float))
        if X.ndim != 2:
            raise ValidationError("Dataset: X must be a 2-d array")
        n, p = X.shape
        if n < 1 or p < 1:
            raise ValidationError("Dataset: need n >= 1 and p >= 1")
        if y.shape != (n,):
            raise ValidationError(f"Dataset: y must have shape ({n},), got {y.shape}")
        if not np.all(np.isfinite(X)):
            raise ValidationError("Dataset: X contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise ValidationError("Dataset: y contains non-finite entries")
        bad = np.flatnonzero((y < RESPONSE_EPS) | (y > 1.0 - RESPONSE_EPS))
        if bad.size:
            raise ValidationError(
                "Dataset: responses must lie strictly inside (0, 1); "
                f"offending rows: {bad[:10].tolist()}"
            )
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != p:
                raise ValidationError("Dataset: feature_names length must equal p")
            object.__setattr__(self, "feature_names", names)
        for attr in ("center", "scale"):
            v = getattr(self, attr)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != (p,) or not np.all(np.isfinite(v)):
                    raise ValidationError(f"Dataset: {attr} must be a finite ({p},) vector")
                v.flags.writeable = False
                object.__setattr__(self, attr, v)
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        ly = np.log(y)
        l1y = np.log1p(-y)
        ly.flags.writeable = False
        l1y.flags.writeable = False
        object.__setattr__(self, "log_y", ly)
        object.__setattr__(self, "log_1my", l1y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class Params:
    """Parameter triple: intercept, coefficient vector, positive scale."""

    beta0: float
    beta: np.ndarray
    phi: float

    def __post_init__(self):
        beta = np.ascontiguousarray(np.asarray(self.beta, dtype=float))
        if beta.ndim != 1:
            raise ValidationError("Params: beta must be a 1-d array")
        if not np.all(np.isfinite(beta)):
            raise ValidationError("Params: beta contains non-finite entries")
        if not np.isfinite(self.beta0):
            raise ValidationError("Params: beta0 must be finite")
        if not (np.isfinite(self.phi) and self.phi > 0):
            raise ValidationError("Params: phi must be positive and finite")
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "beta0", float(self.beta0))
        object.__setattr__(self, "phi", float(self.phi))

    @property
    def p(self) -> int:
        return self.beta.shape[0]


@dataclass(frozen=True)
class GradientTriple:
    d_beta0: float
    d_beta: np.ndarray
    d_phi: float

    def stacked(self) -> np.ndarray:
        """Intercept-first flat vector (d_beta0, d_beta)."""
        return np.concatenate([[self.d_beta0], self.d_beta])


def _check_pair(params: Params, dataset: Dataset):
    if params.p != dataset.p:
        raise ValidationError(
            f"dimension mismatch: params has p={params.p}, dataset has p={dataset.p}"
        )


def _linear_predictor(params, dataset):
    return params.beta0 + dataset.X @ params.beta


def _mu_pair(eta):
    """Mean and complement computed from both tails, clipped away from {0,1}."""
    mu = np.clip(np.asarray(logistic_mu(eta)), MU_FLOOR, 1.0 - MU_FLOOR)
    omu = np.clip(np.asarray(logistic_mu(-eta)), MU_FLOOR, 1.0 - MU_FLOOR)
    return mu, omu


def mu_vector(params: Params, dataset: Dataset) -> np.ndarray:
    """Conditional means logistic(beta0 + X beta), strictly inside (0, 1)."""
    _check_pair(params, dataset)
    mu, _ = _mu_pair(_linear_predictor(params, dataset))
    return mu


def _nll_from_mu(mu, omu, dataset, phi):
    a = mu * phi
    b = omu * phi
    val = (
        -log_gamma(phi)
        + np.mean(
            log_gamma(a)
            + log_gamma(b)
            - (a - 1.0) * dataset.log_y
            - (b - 1.0) * dataset.log_1my
        )
    )
    return float(val)


def neg_log_likelihood(params: Params, dataset: Dataset) -> float:
    """Mean negative log density of the observed responses."""
    _check_pair(params, dataset)
    mu, omu = _mu_pair(_linear_predictor(params, dataset))
    val = _nll_from_mu(mu, omu, dataset, params.phi)
    if not np.isfinite(val):
        raise ComputationError("neg_log_likelihood: objective is not finite")
    return val


def _bracket(mu, omu, dataset, phi):
    """[psi(mu phi) - log y] - [psi((1-mu) phi) - log(1-y)], per observation."""
    return (digamma(mu * phi) - dataset.log_y) - (digamma(omu * phi) - dataset.log_1my)


def _phi_gradient_from_mu(mu, omu, dataset, phi):
    val = -digamma(phi) + np.mean(
        mu * digamma(mu * phi)
        + omu * digamma(omu * phi)
        - mu * dataset.log_y
        - omu * dataset.log_1my
    )
    return float(val)


def gradient(params: Params, dataset: Dataset) -> GradientTriple:
    """Analytic gradient of the mean negative log likelihood.

    The intercept is the coefficient of an implicit all-ones column; the
    scale derivative completes the triple for coordinate updates.
    """
    _check_pair(params, dataset)
    eta = _linear_predictor(params, dataset)
    mu, omu = _mu_pair(eta)
    phi = params.phi
    w = phi * (mu * omu) * _bracket(mu, omu, dataset, phi)
    d_beta0 = float(np.mean(w))
    d_beta = dataset.X.T @ w / dataset.n
    d_phi = _phi_gradient_from_mu(mu, omu, dataset, phi)
    return GradientTriple(d_beta0=d_beta0, d_beta=d_beta, d_phi=d_phi)


def per_observation_gradients(
    params: Params, dataset: Dataset, include_phi: bool = False
) -> np.ndarray:
    """Unaveraged per-observation gradient rows over (beta0, beta).

    Row i is the gradient of the i-th negative log density, so the column
    means reproduce gradient(). With include_phi a scale column is appended.
    """
    _check_pair(params, dataset)
    eta = _linear_predictor(params, dataset)
    mu, omu = _mu_pair(eta)
    phi = params.phi
    w = phi * (mu * omu) * _bracket(mu, omu, dataset, phi)
    rows = np.column_stack([w, dataset.X * w[:, None]])
    if include_phi:
        d_phi_rows = (
            -digamma(phi)
            + mu * digamma(mu * phi)
            + omu * digamma(omu * phi)
            - mu * dataset.log_y
            - omu * dataset.log_1my
        )
        rows = np.column_stack([rows, d_phi_rows])
    return rows


def hessian_weights(params: Params, dataset: Dataset) -> np.ndarray:
    """Observation weights w_i of the (beta0, beta) Hessian (1/n) X'WX."""
    _check_pair(params, dataset)
    eta = _linear_predictor(params, dataset)
    mu, omu = _mu_pair(eta)
    phi = params.phi
    mp = mu * omu
    mpp = mp * (1.0 - 2.0 * mu)
    curv = phi**2 * mp**2 * (trigamma(mu * phi) + trigamma(omu * phi))
    tilt = phi * mpp * _bracket(mu, omu, dataset, phi)
    return curv + tilt


def hessian_beta(params: Params, dataset: Dataset) -> np.ndarray:
    """(p+1)x(p+1) Hessian over (beta0, beta), intercept first."""
    w = hessian_weights(params, dataset)
    Xt = np.column_stack([np.ones(dataset.n), dataset.X])
    H = Xt.T @ (Xt * w[:, None]) / dataset.n
    return 0.5 * (H + H.T)
