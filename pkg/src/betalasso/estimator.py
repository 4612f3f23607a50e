"""Scikit-learn estimator wrapper around the penalized Beta regression solver."""

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .inference import debias as _debias
from .model import Dataset
from .solver import FitConfig, fit as _fit
from .special import logistic_mu


class BetaLassoRegressor(BaseEstimator, RegressorMixin):
    """L1-penalized Beta regression for responses strictly inside (0, 1).

    The conditional mean is logistic in the linear predictor and a common
    scale parameter is estimated alongside the coefficients. The penalty
    excludes the intercept and the scale.

    Parameters
    ----------
    lam : float or None, default=None
        Penalty level. When None, ``lambda_rule * sqrt(log(p)/n)`` is used.
    lambda_rule : float, default=0.2
        Rule coefficient applied when ``lam`` is None.
    tol : float, default=1e-8
        Convergence tolerance on the penalized objective decrease; the
        stationarity residual must also fall below ``10 * tol``.
    max_iter : int, default=10000
        Cap on accepted proximal steps.
    phi_update_every : int, default=5
        Scale re-optimization period, in accepted steps.
    init : str, default="logistic"
        Starting strategy: "logistic" (penalized cross-entropy) or "beta"
        (logit-scale least squares, requires p < n).
    standardize : bool, default=False
        Center and scale the predictors before fitting. Coefficients are
        reported on the standardized scale; ``coef_original_scale_`` maps back.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
        Estimated coefficients (standardized scale when ``standardize``).
    intercept_ : float
    phi_ : float
        Estimated scale parameter.
    result_ : FitResult
        Full solver output (trace, KKT residual, active set).
    """

    def __init__(
        self,
        lam=None,
        lambda_rule=0.2,
        tol=1e-8,
        max_iter=10_000,
        phi_update_every=5,
        init="logistic",
        standardize=False,
    ):
        self.lam = lam
        self.lambda_rule = lambda_rule
        self.tol = tol
        self.max_iter = max_iter
        self.phi_update_every = phi_update_every
        self.init = init
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        center = scale = None
        if self.standardize:
            center = X.mean(axis=0)
            scale = X.std(axis=0)
            if np.any(scale == 0):
                raise ValueError("standardize: constant feature column")
            X = (X - center) / scale
        dataset = Dataset(X, y, center=center, scale=scale)
        lam = (
            float(self.lam)
            if self.lam is not None
            else self.lambda_rule * math.sqrt(math.log(dataset.p) / dataset.n)
        )
        config = FitConfig(
            lam=lam,
            tol=self.tol,
            max_iter=self.max_iter,
            phi_update_every=self.phi_update_every,
            init_strategy=self.init,
        )
        result = _fit(dataset, config)
        self.n_features_in_ = dataset.p
        self.lambda_ = lam
        self.coef_ = result.params.beta.copy()
        self.intercept_ = result.params.beta0
        self.phi_ = result.params.phi
        self.result_ = result
        self._dataset = dataset
        if self.standardize:
            self.coef_original_scale_ = self.coef_ / scale
            self.intercept_original_scale_ = self.intercept_ - float(
                self.coef_original_scale_ @ center
            )
        return self

    def _linear_predictor(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        if self.standardize:
            X = (X - self._dataset.center) / self._dataset.scale
        return self.intercept_ + X @ self.coef_

    def predict(self, X):
        """Predicted conditional means in (0, 1)."""
        return np.asarray(logistic_mu(self._linear_predictor(X)))

    def conf_int(self, lambda0=None, alpha=0.05):
        """Debiased coefficient intervals from the training fit.

        Returns the DebiasResult; row 0 of ``intervals`` is the intercept.
        """
        check_is_fitted(self, "result_")
        if lambda0 is None:
            ds = self._dataset
            lambda0 = 0.01 * math.sqrt(math.log(ds.p) / ds.n)
        return _debias(self.result_, self._dataset, lambda0=lambda0, alpha=alpha)
