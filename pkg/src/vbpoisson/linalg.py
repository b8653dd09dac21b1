"""Symmetric positive definite solves shared by the fit engines."""

from __future__ import annotations

import numpy as np
from scipy import linalg as _la

from .errors import NumericalError


def pd_inverse(precision: np.ndarray) -> tuple[np.ndarray, float]:
    """Invert a symmetric PD matrix via Cholesky; returns (inverse, logdet).

    A single jitter retry (1e-10 * trace/p added to the diagonal) is tried
    before giving up, since near-singular curvature matrices do occur for
    collinear designs. The returned logdet is log|inverse|.
    """
    precision = np.asarray(precision, dtype=float)
    p = precision.shape[0]
    try:
        chol = _la.cholesky(precision, lower=True)
    except _la.LinAlgError:
        jitter = 1e-10 * np.trace(precision) / p
        try:
            chol = _la.cholesky(precision + jitter * np.eye(p), lower=True)
        except _la.LinAlgError:
            cond = float(np.linalg.cond(precision))
            raise NumericalError(
                "precision matrix is not positive definite", condition=cond
            ) from None
    inv = _la.cho_solve((chol, True), np.eye(p))
    inv = 0.5 * (inv + inv.T)
    logdet_precision = 2.0 * np.sum(np.log(np.diag(chol)))
    return inv, -logdet_precision
