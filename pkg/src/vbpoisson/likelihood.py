"""Quadratic bound on the exponential and the induced approximate likelihood.

The surrogate g(x, xi) = e^xi [(1-xi)(1+x) + x^2/2 + xi^2/2] agrees with e^x
at x = xi and restores Gaussian conjugacy for the coefficient block in all
three fit engines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import DivergenceError

XI_OVERFLOW = 700.0


def quad_bound(x: float, xi: float) -> float:
    """Quadratic surrogate for e^x expanded at xi; exact when x equals xi."""
    return np.exp(xi) * ((1.0 - xi) * (1.0 + x) + 0.5 * x * x + 0.5 * xi * xi)


@dataclass(frozen=True)
class QuadApprox:
    """Snapshot of the bound at expansion points xi.

    m_xi holds e^xi (1 - xi) per observation and s_x_xi the exp-weighted
    design cross-product sum(e^xi_i x_i x_i^T).
    """

    xi: np.ndarray
    m_xi: np.ndarray
    s_x_xi: np.ndarray


def refresh(xi: np.ndarray, dataset: Dataset) -> QuadApprox:
    """Recompute the bound quantities at new expansion points."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[0] != dataset.n:
        raise ValueError("xi length must match the number of observations")
    if np.any(xi > XI_OVERFLOW):
        raise DivergenceError("linear predictor exceeded the overflow guard")
    w = np.exp(xi)
    m_xi = w * (1.0 - xi)
    x = dataset.design
    s_x_xi = (x * w[:, None]).T @ x
    s_x_xi = 0.5 * (s_x_xi + s_x_xi.T)
    return QuadApprox(xi=xi, m_xi=m_xi, s_x_xi=s_x_xi)


def approx_loglik(q: QuadApprox, dataset: Dataset, mu: np.ndarray, d_beta: np.ndarray) -> float:
    """Expected surrogate log-likelihood, dropping the log y! constant."""
    x, y = dataset.design, dataset.response
    if mu.shape[0] != dataset.p or d_beta.shape != (dataset.p, dataset.p):
        raise ValueError("coefficient dimensions do not match the design")
    xmu = x @ mu
    return float(
        -q.m_xi @ (1.0 + xmu)
        - 0.5 * np.sum(q.xi**2 * np.exp(q.xi))
        - 0.5 * np.trace(q.s_x_xi @ d_beta)
        + y @ xmu
    )
