"""Debiased coefficients, sandwich standard errors, and confidence intervals.

The lasso estimate is corrected by lam * Omega @ z, where z is the KKT
subgradient extracted from the fitted model and Omega is an approximate
inverse of the coefficient-block Hessian satisfying an entrywise sup-norm
constraint. Standard errors come from the score outer-product sandwich
Omega M Omega', with M built from unaveraged per-observation gradients
divided by n.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InferenceError
from .model import Dataset, hessian_beta, per_observation_gradients
from .solver import FitResult
from . import model as _model

__all__ = [
    "DebiasResult",
    "kkt_subgradient",
    "approximate_inverse",
    "ApproximateInverse",
    "debias",
    "normal_quantile",
]

# Rational approximation coefficients for the standard normal quantile
# (Acklam). Absolute error below 1.2e-9 over (0, 1).
_PPF_A = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_PPF_B = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_PPF_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_PPF_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
    3.754408661907416e00,
)


def normal_quantile(prob: float) -> float:
    """Inverse standard normal CDF, accurate to about 1e-9."""
    if not 0.0 < prob < 1.0:
        raise ValueError("normal_quantile: probability must lie in (0, 1)")
    p_low, p_high = 0.02425, 1.0 - 0.02425
    if prob < p_low:
        q = math.sqrt(-2.0 * math.log(prob))
        num = ((((_PPF_C[0] * q + _PPF_C[1]) * q + _PPF_C[2]) * q + _PPF_C[3]) * q + _PPF_C[4]) * q + _PPF_C[5]
        den = (((_PPF_D[0] * q + _PPF_D[1]) * q + _PPF_D[2]) * q + _PPF_D[3]) * q + 1.0
        return num / den
    if prob > p_high:
        return -normal_quantile(1.0 - prob)
    q = prob - 0.5
    r = q * q
    num = (((((_PPF_A[0] * r + _PPF_A[1]) * r + _PPF_A[2]) * r + _PPF_A[3]) * r + _PPF_A[4]) * r + _PPF_A[5]) * q
    den = ((((_PPF_B[0] * r + _PPF_B[1]) * r + _PPF_B[2]) * r + _PPF_B[3]) * r + _PPF_B[4]) * r + 1.0
    return num / den


@dataclass(frozen=True)
class DebiasResult:
    """Debiased coefficients with per-coordinate intervals, intercept first."""

    debiased: np.ndarray
    std_errors: np.ndarray
    intervals: np.ndarray  # shape (p+1, 2)
    omega_constraint_violation: float
    lambda0: float
    alpha: float


def kkt_subgradient(fit: FitResult, dataset: Dataset) -> np.ndarray:
    """Subgradient vector recovered from the stationarity conditions.

    Penalized coordinates carry -grad_j / lam clamped to [-1, 1]; the
    unpenalized intercept entry is zero.
    """
    if fit.lam == 0.0:
        raise InferenceError("kkt_subgradient: fit has no penalty to invert")
    if fit.kkt_residual > 1e-3:
        raise InferenceError(
            f"kkt_subgradient: stationarity residual {fit.kkt_residual:.3g} too "
            "large for the KKT identity to be meaningful"
        )
    g = _model.gradient(fit.params, dataset)
    z = np.empty(dataset.p + 1)
    z[0] = 0.0
    z[1:] = np.clip(-g.d_beta / fit.lam, -1.0, 1.0)
    return z


@dataclass(frozen=True)
class ApproximateInverse:
    omega: np.ndarray
    violation: float
    lambda0_per_column: np.ndarray

    @property
    def lambda0_final(self) -> float:
        return float(np.max(self.lambda0_per_column))


def _solve_column(sigma, j, lam0, max_sweeps, stall_tol=1e-8):
    """Clamped coordinate updates driving |sigma m - e_j| under lam0.

    Starts from the diagonal guess e_j / sigma_jj; each pass moves only the
    violating coordinates, landing their residual just inside the box.
    Returns (m, achieved violation, feasible flag).
    """
    p1 = sigma.shape[0]
    m = np.zeros(p1)
    m[j] = 1.0 / sigma[j, j]
    r = sigma[:, j] * m[j]
    r[j] -= 1.0
    for _ in range(max_sweeps):
        worst = float(np.max(np.abs(r)))
        if worst <= lam0:
            return m, worst, True
        moved = 0.0
        for k in range(p1):
            rk = r[k]
            if abs(rk) > lam0:
                # full coordinate step; zeroing a violating residual entry
                # strictly decreases the quadratic energy when sigma is PD
                delta = -rk / sigma[k, k]
                m[k] += delta
                r += sigma[:, k] * delta
                r[k] = 0.0
                moved = max(moved, abs(delta))
        if moved < stall_tol:
            break
    worst = float(np.max(np.abs(r)))
    return m, worst, worst <= lam0


def approximate_inverse(hessian: np.ndarray, lambda0: float) -> ApproximateInverse:
    """Columnwise approximate inverse under an entrywise sup-norm constraint.

    Column j satisfies ||hessian @ m_j - e_j||_inf <= lambda0, escalating
    lambda0 by 1.5 per column (at most 10 times) when the constraint cannot
    be met, and recording the final value per column.
    """
    sigma = np.asarray(hessian, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("approximate_inverse: hessian must be square")
    if not np.all(np.isfinite(sigma)):
        raise ValueError("approximate_inverse: hessian has non-finite entries")
    if np.any(np.diag(sigma) <= 0):
        raise InferenceError("approximate_inverse: Hessian diagonal not positive")
    if not (np.isfinite(lambda0) and lambda0 > 0):
        raise ValueError("approximate_inverse: lambda0 must be positive")
    p1 = sigma.shape[0]
    max_sweeps = 10 * p1 * p1
    omega = np.empty((p1, p1))
    lam_final = np.empty(p1)
    worst_seen = 0.0
    for j in range(p1):
        lam_j = float(lambda0)
        for attempt in range(11):
            m, worst, ok = _solve_column(sigma, j, lam_j, max_sweeps)
            if ok:
                break
            if attempt < 10:
                lam_j *= 1.5
        if not ok:
            raise InferenceError(
                f"approximate_inverse: column {j} infeasible even at lambda0={lam_j:.3g}"
            )
        omega[:, j] = m
        lam_final[j] = lam_j
        worst_seen = max(worst_seen, worst)
    return ApproximateInverse(
        omega=omega, violation=worst_seen, lambda0_per_column=lam_final
    )


def debias(
    fit: FitResult,
    dataset: Dataset,
    lambda0: float,
    alpha: float = 0.05,
) -> DebiasResult:
    """Debiased estimate, sandwich standard errors, and level-alpha intervals."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("debias: alpha must lie in (0, 1)")
    z = kkt_subgradient(fit, dataset)
    hess = hessian_beta(fit.params, dataset)
    approx = approximate_inverse(hess, lambda0)
    estimate = np.concatenate([[fit.params.beta0], fit.params.beta])
    debiased = estimate + fit.lam * (approx.omega @ z)

    g_rows = per_observation_gradients(fit.params, dataset) / dataset.n
    m_hat = g_rows.T @ g_rows
    cov = approx.omega @ m_hat @ approx.omega.T
    diag = np.diag(cov).copy()
    if np.any(diag <= 0):
        raise InferenceError("debias: covariance diagonal not positive")
    se = np.sqrt(diag)
    zq = normal_quantile(1.0 - alpha / 2.0)
    intervals = np.column_stack([debiased - zq * se, debiased + zq * se])
    return DebiasResult(
        debiased=debiased,
        std_errors=se,
        intervals=intervals,
        omega_constraint_violation=approx.violation,
        lambda0=approx.lambda0_final,
        alpha=alpha,
    )
