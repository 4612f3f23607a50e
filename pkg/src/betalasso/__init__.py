"""L1-penalized Beta regression: fitting, inference, selection, simulation."""

from .exceptions import (
    ComputationError,
    InferenceError,
    StrategyError,
    ValidationError,
)
from .model import Dataset, GradientTriple, Params
from .solver import FitConfig, FitResult, fit, lambda_max, solution_path
from .inference import DebiasResult, debias
from .selection import SubsetFit, exhaustive_aic, fit_subset
from .simulate import SimConfig, SimReport, gen_beta_star, gen_dataset, run_simulation, scaling_regression
from .io import RunArtifact, read_artifact, read_dataset, write_artifact
from .estimator import BetaLassoRegressor
from .special import Rng, sample_beta

__version__ = "0.1.0"

__all__ = [
    "BetaLassoRegressor",
    "ComputationError",
    "Dataset",
    "DebiasResult",
    "FitConfig",
    "FitResult",
    "GradientTriple",
    "InferenceError",
    "Params",
    "Rng",
    "RunArtifact",
    "SimConfig",
    "SimReport",
    "StrategyError",
    "SubsetFit",
    "ValidationError",
    "debias",
    "exhaustive_aic",
    "fit",
    "fit_subset",
    "gen_beta_star",
    "gen_dataset",
    "lambda_max",
    "read_artifact",
    "read_dataset",
    "run_simulation",
    "sample_beta",
    "scaling_regression",
    "solution_path",
    "write_artifact",
    "__version__",
]
