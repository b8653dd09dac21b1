"""Scalar special functions and 1-D quadrature shared by the fit engines.

All functions here are pure; they hold no state and may be called from any
number of concurrent contexts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import IntegrationError

__all__ = [
    "GigParams",
    "digamma",
    "log_gamma",
    "sigmoid",
    "bessel_k_half_ratio",
    "log_bessel_k_half",
    "log_bessel_k",
    "gig_moments",
    "integrate_1d",
]

_ORDER_STEP = 1e-5
_MAX_DEPTH = 60


def digamma(x):
    """Digamma function, restricted to positive arguments."""
    if np.any(np.asarray(x) <= 0.0):
        raise ValueError("digamma requires x > 0")
    return _sp.digamma(x)


def log_gamma(x):
    """log Gamma(x) for positive x."""
    if np.any(np.asarray(x) <= 0.0):
        raise ValueError("log_gamma requires x > 0")
    return _sp.gammaln(x)


def sigmoid(v):
    """Logistic function 1/(1+exp(-v)); saturates cleanly for huge |v|."""
    return _sp.expit(v)


def bessel_k_half_ratio(x):
    """K_{3/2}(x) / K_{1/2}(x), which reduces to 1 + 1/x for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("bessel_k_half_ratio requires x > 0")
    out = 1.0 + 1.0 / x
    return float(out) if out.ndim == 0 else out


def log_bessel_k_half(x):
    """log K_{1/2}(x) via the closed form 0.5*log(pi/(2x)) - x."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("log_bessel_k_half requires x > 0")
    out = 0.5 * np.log(np.pi / (2.0 * x)) - x
    return float(out) if out.ndim == 0 else out


def log_bessel_k(order, x):
    """log K_order(x), stable for large x (uses the scaled kve)."""
    if x <= 0.0:
        raise ValueError("log_bessel_k requires x > 0")
    return float(np.log(_sp.kve(order, x)) - x)


@dataclass(frozen=True)
class GigParams:
    """Parameters of a generalized inverse Gaussian distribution.

    Only order 1/2 is used in this package; `a` is the rate-like parameter
    and `b` the inverse-scale-like one (density ~ x^{order-1} e^{-(ax+b/x)/2}).
    """

    a: float
    b: float
    order: float = 0.5

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError("GigParams.a must be positive and finite")
        if not (self.b > 0.0 and math.isfinite(self.b)):
            raise ValueError("GigParams.b must be positive and finite")
        if self.order != 0.5:
            raise ValueError("only order 1/2 is supported")


def gig_moments(p: GigParams):
    """Mean, inverse-moment and log-moment of a GIG(1/2, a, b) variable.

    Closed forms use the half-integer Bessel ratio; the log-moment needs the
    order derivative of log K_t at t = 1/2, evaluated by central finite
    difference (step 1e-5) on the stable log-K evaluation.
    """
    root = math.sqrt(p.a * p.b)
    ratio = bessel_k_half_ratio(root)
    mean = math.sqrt(p.b / p.a) * ratio
    inv_mean = math.sqrt(p.a / p.b) * ratio - 1.0 / p.b
    dlogk = (
        log_bessel_k(0.5 + _ORDER_STEP, root) - log_bessel_k(0.5 - _ORDER_STEP, root)
    ) / (2.0 * _ORDER_STEP)
    log_mean = 0.5 * math.log(p.b / p.a) + dlogk
    return mean, inv_mean, log_mean


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, b, fa, fm, fb, whole, atol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    err = left + right - whole
    if abs(err) <= 15.0 * atol:
        return left + right + err / 15.0
    if depth >= _MAX_DEPTH:
        raise IntegrationError(
            "quadrature did not converge within the refinement cap",
            estimate=left + right,
        )
    half = 0.5 * atol
    return _adaptive(f, a, m, fa, flm, fm, left, half, depth + 1) + _adaptive(
        f, m, b, fm, frm, fb, right, half, depth + 1
    )


def integrate_1d(f, lower, upper, tol):
    """Adaptive Simpson quadrature of a nonnegative function.

    A semi-infinite upper bound is handled by the substitution
    x = lower + t/(1-t) on t in [0, 1). The result carries relative error
    of order `tol`; failure to converge raises IntegrationError with the
    partial estimate attached.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if math.isinf(upper):
        lo = float(lower)

        def g(t):
            if t >= 1.0 - 1e-16:
                return 0.0
            one_m = 1.0 - t
            return f(lo + t / one_m) / (one_m * one_m)

        return _integrate_finite(g, 0.0, 1.0, tol)
    if not lower < upper:
        raise ValueError("lower must be below upper")
    return _integrate_finite(f, float(lower), float(upper), tol)


def _integrate_finite(f, a, b, tol):
    # Rough composite-Simpson pass fixes the absolute-error scale and seeds
    # the refinement with interior structure the first bisection could miss.
    n = 64
    xs = np.linspace(a, b, n + 1)
    fs = np.array([f(x) for x in xs])
    h = (b - a) / n
    rough = h / 3.0 * (fs[0] + fs[-1] + 4.0 * fs[1:-1:2].sum() + 2.0 * fs[2:-1:2].sum())
    scale = max(abs(rough), 1e-300)
    atol = tol * scale / (n // 2)
    total = 0.0
    for i in range(0, n, 2):
        a_i, m_i, b_i = xs[i], xs[i + 1], xs[i + 2]
        whole = _simpson(fs[i], fs[i + 1], fs[i + 2], b_i - a_i)
        total += _adaptive(f, a_i, b_i, fs[i], fs[i + 1], fs[i + 2], whole, atol, 0)
    return total
