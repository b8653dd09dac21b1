"""Turn variational posterior means into sparse coefficient estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, FitResult, Method
from .special_math import log_gamma


@dataclass(frozen=True)
class SparseCoefficients:
    """Thresholded coefficient vector with its selection bookkeeping."""

    beta_hat: np.ndarray
    support: tuple
    kappa: float
    aic: float
    df: int
    p_binary: np.ndarray


def poisson_loglik(beta: np.ndarray, dataset: Dataset) -> float:
    """Exact Poisson log-likelihood at a fixed coefficient vector.

    Overflow of the rate returns -inf so a wild candidate loses any model
    comparison instead of crashing it.
    """
    eta = dataset.design @ np.asarray(beta, dtype=float)
    if np.any(eta > 700.0):
        return -np.inf
    y = dataset.response
    return float(np.sum(y * eta - np.exp(eta) - log_gamma(y + 1.0)))


def default_grid(mu: np.ndarray, size: int = 50) -> np.ndarray:
    """Log-spaced threshold grid from 1e-4 up to the largest slope magnitude."""
    top = float(np.max(np.abs(mu[1:]))) if mu.shape[0] > 1 else 1e-4
    top = max(top, 1e-4)
    return np.logspace(-4, np.log10(top), size)


def _aic(loglik: float, df: int, conventional: bool) -> float:
    if conventional:
        return -2.0 * loglik + 2.0 * df
    return -loglik + 2.0 * df


def threshold_bernoulli(fit: FitResult, dataset: Dataset | None = None) -> SparseCoefficients:
    """Zero the slopes whose inclusion probability is not above one half."""
    if fit.method is not Method.BERNOULLI:
        raise ValueError("probability thresholding applies to the Bernoulli fit")
    mu = fit.posterior.mean
    keep = fit.inclusion_prob > 0.5
    keep[0] = True
    beta_hat = np.where(keep, mu, 0.0)
    support = tuple(sorted(set(np.flatnonzero(beta_hat != 0.0).tolist()) | {0}))
    df = len(support)
    aic = np.nan
    if dataset is not None:
        aic = _aic(poisson_loglik(beta_hat, dataset), df, conventional=False)
    return SparseCoefficients(
        beta_hat=beta_hat,
        support=support,
        kappa=0.0,
        aic=float(aic),
        df=df,
        p_binary=keep.astype(float),
    )


def threshold_hard(
    fit: FitResult,
    dataset: Dataset,
    grid: np.ndarray | None = None,
    conventional_aic: bool = False,
) -> SparseCoefficients:
    """Pick the information-criterion-minimizing hard threshold from a grid.

    Slope coordinates with magnitude at or below the threshold are zeroed;
    the intercept is exempt. Ties go to the larger threshold.
    """
    if fit.method not in (Method.LAPLACE, Method.CS):
        raise ValueError("hard thresholding applies to the Laplace and CS fits")
    mu = fit.posterior.mean
    if grid is None:
        grid = default_grid(mu)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("threshold grid must be non-empty")
    best = None
    for kappa in np.sort(grid):
        beta_hat = mu.copy()
        beta_hat[1:] = np.where(np.abs(mu[1:]) <= kappa, 0.0, mu[1:])
        support = tuple(sorted(set(np.flatnonzero(beta_hat != 0.0).tolist()) | {0}))
        df = len(support)
        aic = _aic(poisson_loglik(beta_hat, dataset), df, conventional_aic)
        if best is None or aic <= best.aic:
            p_binary = (beta_hat != 0.0).astype(float)
            p_binary[0] = 1.0
            best = SparseCoefficients(
                beta_hat=beta_hat,
                support=support,
                kappa=float(kappa),
                aic=float(aic),
                df=df,
                p_binary=p_binary,
            )
    return best
