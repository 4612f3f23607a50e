import numpy as np
import pytest
from sklearn.base import clone

from conftest import make_beta_dataset

from betalasso.estimator import BetaLassoRegressor


@pytest.fixture
def data():
    ds, beta, beta0, phi = make_beta_dataset(0, 400, 4, beta=np.array([1.0, -0.6, 0.0, 0.0]))
    return ds.X, ds.y


class TestSklearnApi:
    def test_get_set_params_and_clone(self):
        est = BetaLassoRegressor(lam=0.05, tol=1e-7)
        params = est.get_params()
        assert params["lam"] == 0.05
        est2 = clone(est)
        assert est2.get_params() == params
        est.set_params(lam=0.2)
        assert est.get_params()["lam"] == 0.2

    def test_fit_predict_shapes_and_range(self, data):
        X, y = data
        est = BetaLassoRegressor(lam=0.05).fit(X, y)
        preds = est.predict(X)
        assert preds.shape == (X.shape[0],)
        assert np.all((preds > 0) & (preds < 1))
        assert est.coef_.shape == (4,)
        assert est.phi_ > 0
        assert est.result_.converged

    def test_rule_based_penalty(self, data):
        X, y = data
        est = BetaLassoRegressor(lambda_rule=0.3).fit(X, y)
        import math

        assert est.lambda_ == pytest.approx(0.3 * math.sqrt(math.log(4) / 400))

    def test_score_is_r2_like(self, data):
        X, y = data
        est = BetaLassoRegressor(lam=0.02).fit(X, y)
        assert est.score(X, y) > 0.1

    def test_standardize_back_mapping(self, data):
        X, y = data
        Xs = X * np.array([2.0, 0.5, 1.0, 3.0]) + np.array([1.0, -2.0, 0.0, 5.0])
        est = BetaLassoRegressor(lam=0.02, standardize=True).fit(Xs, y)
        # predictions computed through the standardized pipeline agree with
        # the original-scale coefficient representation
        eta = est.intercept_original_scale_ + Xs @ est.coef_original_scale_
        np.testing.assert_allclose(est.predict(Xs), 1 / (1 + np.exp(-eta)), rtol=1e-10)

    def test_predict_validates_width(self, data):
        X, y = data
        est = BetaLassoRegressor(lam=0.05).fit(X, y)
        with pytest.raises(ValueError):
            est.predict(X[:, :2])

    def test_conf_int(self, data):
        X, y = data
        est = BetaLassoRegressor(lam=0.08).fit(X, y)
        dres = est.conf_int(alpha=0.05)
        assert dres.intervals.shape == (5, 2)
        assert np.all(dres.std_errors > 0)

    def test_pipeline_compatible(self, data):
        from sklearn.pipeline import make_pipeline
        from sklearn.preprocessing import StandardScaler

        X, y = data
        pipe = make_pipeline(StandardScaler(), BetaLassoRegressor(lam=0.05))
        pipe.fit(X, y)
        preds = pipe.predict(X)
        assert np.all((preds > 0) & (preds < 1))
