"""Posterior predictive mass functions and HPD summaries.

A new count mixes a Poisson pmf over a log-normal rate: with u = log(rate),
p(y0) = (1/y0!) * integral of exp(-e^u) e^(u*y0) N(u; m, s^2) du, where m and
s^2 come from the Gaussian coefficient posterior at the covariate row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as _st

from .core import FitResult, GaussianPosterior, Method
from .errors import TruncationError
from .sparsify import SparseCoefficients
from .special_math import integrate_1d, log_gamma

_DEGENERATE_VAR = 1e-12
_WINDOW_SD = 12.0
_MASS_TARGET = 1.0 - 1e-6
_ENUM_CAP = 10**6


def _poisson_logpmf(y: np.ndarray, log_rate: float) -> np.ndarray:
    return y * log_rate - np.exp(log_rate) - log_gamma(y + 1.0)


def ppmf_gaussian(x0: np.ndarray, posterior: GaussianPosterior, y0: int) -> float:
    """Predictive probability of the count y0 at covariate row x0."""
    x0 = np.asarray(x0, dtype=float)
    m = float(x0 @ posterior.mean)
    s2 = float(x0 @ posterior.covariance @ x0)
    return _ppmf_scalar(m, s2, int(y0))


def _ppmf_scalar(m: float, s2: float, y0: int) -> float:
    if y0 < 0:
        raise ValueError("count must be nonnegative")
    if s2 < _DEGENERATE_VAR:
        return float(np.exp(_poisson_logpmf(np.array(float(y0)), m)))
    s = np.sqrt(s2)
    lo, hi = m - _WINDOW_SD * s, m + _WINDOW_SD * s

    def log_f(u):
        return (
            -np.exp(u)
            + y0 * u
            - float(log_gamma(y0 + 1.0))
            - 0.5 * (u - m) ** 2 / s2
            - 0.5 * np.log(2.0 * np.pi * s2)
        )

    probe = np.linspace(lo, hi, 65)
    shift = max(log_f(u) for u in probe)
    if not np.isfinite(shift):
        return 0.0
    val = integrate_1d(lambda u: np.exp(log_f(u) - shift), lo, hi, 1e-8)
    return float(np.exp(shift) * val)


def ppmf_bernoulli(
    x0: np.ndarray, posterior: GaussianPosterior, p_binary: np.ndarray, y0: int
) -> float:
    """Predictive probability under a binarized inclusion mask."""
    p_binary = np.asarray(p_binary, dtype=float)
    if not np.all(np.isin(p_binary, (0.0, 1.0))) or p_binary[0] != 1.0:
        raise ValueError("mask must be 0/1 with the intercept included")
    x0 = np.asarray(x0, dtype=float) * p_binary
    m = float(x0 @ posterior.mean)
    s2 = float(x0 @ posterior.covariance @ x0)
    return _ppmf_scalar(m, s2, int(y0))


def _pmf_batch(m: float, s2: float, ys: np.ndarray) -> np.ndarray:
    """Vectorized Simpson evaluation of the predictive pmf at many counts."""
    if s2 < _DEGENERATE_VAR:
        return np.exp(_poisson_logpmf(ys.astype(float), m))
    s = np.sqrt(s2)
    lo, hi = m - _WINDOW_SD * s, m + _WINDOW_SD * s
    ymax = float(ys.max())
    # the integrand's narrowest scale is the smaller of the mixing sd and the
    # Poisson factor's curvature scale 1/sqrt(y)
    feature = min(s, 1.0 / np.sqrt(max(ymax, 1.0)))
    n = int(np.clip(np.ceil(16.0 * (hi - lo) / feature), 200, 6000))
    n += n % 2
    u = np.linspace(lo, hi, n + 1)
    log_mix = -0.5 * (u - m) ** 2 / s2 - 0.5 * np.log(2.0 * np.pi * s2)
    h = (hi - lo) / n
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    out = np.empty(ys.shape[0])
    # keep the count-by-node matrix bounded so long supports stay cheap
    block = max(1, int(2**22 // (n + 1)))
    for start in range(0, ys.shape[0], block):
        yb = ys[start : start + block]
        log_int = (
            yb[:, None] * u[None, :]
            - np.exp(u)[None, :]
            - log_gamma(yb + 1.0)[:, None]
            + log_mix[None, :]
        )
        shift = log_int.max(axis=1, keepdims=True)
        shift = np.where(np.isfinite(shift), shift, 0.0)
        vals = np.exp(log_int - shift)
        out[start : start + yb.shape[0]] = np.exp(shift[:, 0]) * (h / 3.0) * (vals @ w)
    return out


@dataclass(frozen=True)
class PredictiveDistribution:
    """Truncated predictive pmf with its point and interval summaries."""

    support_max: int
    pmf: np.ndarray
    mode: int
    hpd_set: tuple
    tail_mass: float

    @property
    def mean(self) -> float:
        return float(np.arange(self.support_max + 1) @ self.pmf)


def _hpd_set(pmf: np.ndarray, level: float, contiguous: bool) -> tuple:
    order = np.argsort(-pmf, kind="stable")
    if not contiguous:
        total = 0.0
        chosen = []
        for idx in order:
            chosen.append(int(idx))
            total += pmf[idx]
            if total >= level:
                break
        return tuple(sorted(chosen))
    # contiguous variant: smallest window around the mode reaching the level
    best = None
    cum = np.concatenate([[0.0], np.cumsum(pmf)])
    for lo in range(pmf.shape[0]):
        hi = np.searchsorted(cum, cum[lo] + level)
        if hi <= pmf.shape[0]:
            if best is None or hi - lo < best[1] - best[0]:
                best = (lo, hi)
    if best is None:
        best = (0, pmf.shape[0])
    return tuple(range(best[0], best[1]))


def predictive_distribution(
    x0: np.ndarray,
    fit: FitResult,
    sparse: SparseCoefficients | None = None,
    level: float = 0.95,
    restricted: bool = True,
    contiguous: bool = False,
) -> PredictiveDistribution:
    """Enumerate the predictive pmf until only negligible mass remains."""
    x0 = np.asarray(x0, dtype=float)
    mask = np.ones_like(x0)
    if sparse is not None:
        if fit.method is Method.BERNOULLI or restricted:
            mask = sparse.p_binary
    xm = x0 * mask
    m = float(xm @ fit.posterior.mean)
    s2 = float(xm @ fit.posterior.covariance @ xm)
    pmf_parts = []
    total = 0.0
    start = 0
    chunk = 256
    while total < _MASS_TARGET:
        if start >= _ENUM_CAP:
            raise TruncationError(
                "predictive enumeration cap reached", accumulated_mass=total
            )
        ys = np.arange(start, min(start + chunk, _ENUM_CAP))
        part = _pmf_batch(m, s2, ys)
        pmf_parts.append(part)
        total += float(part.sum())
        start += ys.shape[0]
        chunk = min(chunk * 2, 2**16)
    pmf = np.concatenate(pmf_parts)
    # trim trailing all-but-zero entries past the last point carrying mass
    keep = np.flatnonzero(pmf > 0.0)
    support_max = int(keep[-1]) if keep.size else 0
    pmf = pmf[: support_max + 1]
    tail_mass = max(0.0, 1.0 - float(pmf.sum()))
    mode = int(np.argmax(pmf))
    return PredictiveDistribution(
        support_max=support_max,
        pmf=pmf,
        mode=mode,
        hpd_set=_hpd_set(pmf, level, contiguous),
        tail_mass=tail_mass,
    )


def hpd_coefficients(posterior: GaussianPosterior, level: float = 0.95) -> np.ndarray:
    """Per-coordinate symmetric HPD intervals of the Gaussian marginals."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = _st.norm.ppf(0.5 * (1.0 + level))
    sd = np.sqrt(np.diag(posterior.covariance))
    return np.column_stack([posterior.mean - z * sd, posterior.mean + z * sd])
