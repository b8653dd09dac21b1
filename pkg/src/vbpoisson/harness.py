"""Synthetic-data scenarios, evaluation metrics and the replication runner."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bernoulli import fit_bernoulli
from .core import Dataset, FitResult, Hyperparameters, Method, rho2_for_inclusion
from .errors import GenerationError, VbPoissonError
from .laplace import fit_laplace
from .predict import predictive_distribution
from .sparsify import threshold_bernoulli, threshold_hard
from .spike_slab import fit_cs

_AR_RHO = 0.3
_RATE_CAP = np.exp(20.0)
_REGEN_CAP = 100


@dataclass(frozen=True)
class ScenarioConfig:
    """Generator settings for one simulation scenario."""

    n: int
    p: int
    mu0: float
    sigma0: float
    mu_x: float
    sigma2_x: float
    z_mask: np.ndarray | None = None
    random_k: int | None = None
    train_fraction: float = 0.8
    replications: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.z_mask is not None:
            mask = np.asarray(self.z_mask, dtype=float)
            if mask.shape[0] != self.p or mask[0] != 1.0:
                raise ValueError("z_mask must have length p with entry 0 equal to 1")
            object.__setattr__(self, "z_mask", mask)
        elif self.random_k is None:
            raise ValueError("either z_mask or random_k is required")
        elif not 1 <= self.random_k <= self.p:
            raise ValueError("random_k must lie in 1..p")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


LOW_DIM = ScenarioConfig(
    n=100,
    p=10,
    mu0=0.7,
    sigma0=0.5,
    mu_x=0.1,
    sigma2_x=1.0,
    z_mask=np.array([1.0, 0, 1, 0, 0, 0, 1, 0, 1, 0]),
)

HIGH_DIM = ScenarioConfig(
    n=30,
    p=200,
    mu0=0.1,
    sigma0=0.6,
    mu_x=0.1,
    sigma2_x=0.05,
    random_k=60,
)


def _draw_mask(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    if config.z_mask is not None:
        return config.z_mask.copy()
    mask = np.zeros(config.p)
    mask[0] = 1.0
    extra = rng.choice(np.arange(1, config.p), size=config.random_k - 1, replace=False)
    mask[extra] = 1.0
    return mask


def _draw_design(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Intercept plus AR(1)-correlated Gaussian covariates (lag weight 0.3)."""
    n, k = config.n, config.p - 1
    x = np.ones((n, config.p))
    if k == 0:
        return x
    sd = np.sqrt(config.sigma2_x)
    eps = rng.standard_normal((n, k))
    cols = np.empty((n, k))
    cols[:, 0] = sd * eps[:, 0]
    innov_sd = np.sqrt(1.0 - _AR_RHO**2)
    for j in range(1, k):
        cols[:, j] = _AR_RHO * cols[:, j - 1] + sd * innov_sd * eps[:, j]
    x[:, 1:] = config.mu_x + cols
    return x


def generate(
    config: ScenarioConfig, rng: np.random.Generator
) -> tuple[Dataset, Dataset, np.ndarray]:
    """One replication's train/test datasets plus the generating coefficients."""
    for _ in range(_REGEN_CAP):
        mask = _draw_mask(config, rng)
        beta = rng.normal(config.mu0, config.sigma0, size=config.p) * mask
        x = _draw_design(config, rng)
        rates = np.exp(np.clip(x @ beta, None, 700.0))
        if np.max(rates) > _RATE_CAP:
            continue
        y = rng.poisson(rates).astype(float)
        n_train = int(round(config.train_fraction * config.n))
        n_train = min(max(n_train, 1), config.n - 1)
        perm = rng.permutation(config.n)
        tr, te = perm[:n_train], perm[n_train:]
        return Dataset(x[tr], y[tr]), Dataset(x[te], y[te]), beta
    raise GenerationError("scenario kept producing degenerate Poisson rates")


def metric_cre(beta_hats: list, beta_trues: list) -> float:
    """Pooled squared coefficient error relative to pooled squared truth."""
    num = sum(float(np.sum((np.asarray(h) - np.asarray(t)) ** 2)) for h, t in zip(beta_hats, beta_trues))
    den = sum(float(np.sum(np.asarray(t) ** 2)) for t in beta_trues)
    if den == 0.0:
        raise ZeroDivisionError("all true coefficient vectors are zero")
    return num / den


def metric_relative_error(preds: list, actuals: list) -> float:
    """Pooled squared prediction error relative to pooled variance about the mean."""
    num = 0.0
    den = 0.0
    for yhat, y in zip(preds, actuals):
        yhat, y = np.asarray(yhat, dtype=float), np.asarray(y, dtype=float)
        num += float(np.sum((yhat - y) ** 2))
        den += float(np.sum((y - y.mean()) ** 2))
    if den == 0.0:
        raise ZeroDivisionError("actuals have zero variance in every replication")
    return num / den


def metric_selection(beta_hat: np.ndarray, beta_true: np.ndarray) -> tuple[float, float]:
    """(FNR, FPR) over the slope coordinates; nan when a class is empty."""
    est = np.asarray(beta_hat)[1:] != 0.0
    tru = np.asarray(beta_true)[1:] != 0.0
    n_pos = int(tru.sum())
    n_neg = int((~tru).sum())
    fnr = float(np.sum(tru & ~est)) / n_pos if n_pos else float("nan")
    fpr = float(np.sum(~tru & est)) / n_neg if n_neg else float("nan")
    return fnr, fpr


def aicc(loglik: float, df: int, n: int) -> float:
    """Small-sample corrected information criterion; +inf when undefined."""
    if n <= df + 1:
        return float("inf")
    return -loglik + 2.0 * df + 2.0 * df * (df + 1.0) / (n - df - 1.0)


@dataclass
class MetricsReport:
    """Aggregate study metrics for one method."""

    cre: float = float("nan")
    trre: float = float("nan")
    tsre: float = float("nan")
    fnr: float = float("nan")
    fpr: float = float("nan")
    coverage: np.ndarray = field(default_factory=lambda: np.array([]))
    wall_time_s: float = 0.0
    failures: int = 0


@dataclass
class StudyResult:
    reports: dict
    raw: list


_FITTERS = {
    Method.LAPLACE: fit_laplace,
    Method.CS: fit_cs,
    Method.BERNOULLI: fit_bernoulli,
}


def _sparsify(fit: FitResult, train: Dataset):
    if fit.method is Method.BERNOULLI:
        return threshold_bernoulli(fit, train)
    return threshold_hard(fit, train)


def _predict_counts(rows: np.ndarray, fit: FitResult, sparse) -> np.ndarray:
    return np.array(
        [predictive_distribution(row, fit, sparse).mode for row in rows], dtype=float
    )


def run_study(
    config: ScenarioConfig,
    methods: tuple = (Method.LAPLACE, Method.CS, Method.BERNOULLI),
    hp: Hyperparameters | None = None,
    hpd_level: float = 0.95,
) -> StudyResult:
    """Seeded replication loop; every replication is independently reseeded."""
    reports = {m: MetricsReport(coverage=np.zeros(config.p)) for m in methods}
    acc = {
        m: {"bh": [], "bt": [], "tr_p": [], "tr_a": [], "ts_p": [], "ts_a": [], "cov": [], "n": 0}
        for m in methods
    }
    raw = []
    for t in range(config.replications):
        rng = np.random.default_rng([config.seed, t])
        train, test, beta_true = generate(config, rng)
        if hp is None:
            p0 = float(np.count_nonzero(beta_true)) / config.p
            hp_t = Hyperparameters(rho2=rho2_for_inclusion(p0))
        else:
            hp_t = hp
        for m in methods:
            t0 = time.perf_counter()
            try:
                fit = _FITTERS[m](train, hp_t)
                sparse = _sparsify(fit, train)
                yhat_tr = _predict_counts(train.design, fit, sparse)
                yhat_ts = _predict_counts(test.design, fit, sparse)
                lo_hi = _coverage_interval(fit, hpd_level)
                covered = (lo_hi[:, 0] <= beta_true) & (beta_true <= lo_hi[:, 1])
            except VbPoissonError as exc:
                reports[m].failures += 1
                raw.append(
                    {"rep": t, "method": m.value, "failed": True, "error": str(exc)}
                )
                continue
            finally:
                reports[m].wall_time_s += time.perf_counter() - t0
            a = acc[m]
            a["bh"].append(sparse.beta_hat)
            a["bt"].append(beta_true)
            a["tr_p"].append(yhat_tr)
            a["tr_a"].append(train.response)
            a["ts_p"].append(yhat_ts)
            a["ts_a"].append(test.response)
            a["cov"].append(covered.astype(float))
            a["n"] += 1
            fnr, fpr = metric_selection(sparse.beta_hat, beta_true)
            raw.append(
                {
                    "rep": t,
                    "method": m.value,
                    "failed": False,
                    "cre": metric_cre([sparse.beta_hat], [beta_true]),
                    "trre": _safe_re([yhat_tr], [train.response]),
                    "tsre": _safe_re([yhat_ts], [test.response]),
                    "fnr": fnr,
                    "fpr": fpr,
                    "df": sparse.df,
                    "converged": fit.converged,
                    "iterations": fit.iterations,
                }
            )
    for m in methods:
        a = acc[m]
        rep = reports[m]
        if a["n"] == 0:
            continue
        rep.cre = metric_cre(a["bh"], a["bt"])
        rep.trre = _safe_re(a["tr_p"], a["tr_a"])
        rep.tsre = _safe_re(a["ts_p"], a["ts_a"])
        sel = [metric_selection(h, t_) for h, t_ in zip(a["bh"], a["bt"])]
        fnrs = [s[0] for s in sel if not np.isnan(s[0])]
        fprs = [s[1] for s in sel if not np.isnan(s[1])]
        rep.fnr = float(np.mean(fnrs)) if fnrs else float("nan")
        rep.fpr = float(np.mean(fprs)) if fprs else float("nan")
        rep.coverage = np.mean(np.array(a["cov"]), axis=0)
    return StudyResult(reports={m.value: reports[m] for m in methods}, raw=raw)


def _safe_re(preds, actuals) -> float:
    try:
        return metric_relative_error(preds, actuals)
    except ZeroDivisionError:
        return float("nan")


def _coverage_interval(fit: FitResult, level: float) -> np.ndarray:
    from .predict import hpd_coefficients

    return hpd_coefficients(fit.interval_posterior or fit.posterior, level)
