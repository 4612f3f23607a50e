import numpy as np

from betalasso.model import Dataset
from betalasso.special import Rng, logistic_mu, sample_beta


def make_beta_dataset(seed, n, p, beta=None, beta0=0.0, phi=4.0):
    """Simulated design and Beta responses; returns (Dataset, beta, beta0, phi)."""
    gen = Rng(seed, 0).generator
    X = gen.standard_normal((n, p))
    if beta is None:
        beta = np.zeros(p)
        beta[: min(2, p)] = [1.0, -0.5][: min(2, p)]
    mu = np.asarray(logistic_mu(beta0 + X @ beta))
    y = sample_beta(gen, mu * phi, (1.0 - mu) * phi)
    return Dataset(X, y), np.asarray(beta, dtype=float), beta0, phi


def random_params_dataset(gen, n_range=(5, 50), p_range=(1, 10), phi_range=(0.5, 100.0)):
    """A random parameter/dataset pair for derivative checks."""
    from betalasso.model import Params

    n = int(gen.integers(*n_range))
    p = int(gen.integers(*p_range))
    X = gen.standard_normal((n, p))
    y = gen.uniform(0.02, 0.98, n)
    theta = Params(
        beta0=float(gen.normal(scale=0.5)),
        beta=gen.normal(scale=0.5, size=p),
        phi=float(gen.uniform(*phi_range)),
    )
    return theta, Dataset(X, y)
