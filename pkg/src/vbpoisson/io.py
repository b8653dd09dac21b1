"""CSV ingestion, config parsing and result serialization."""

from __future__ import annotations

import csv
import dataclasses
import json

import numpy as np

from .core import Dataset, FitResult, GaussianPosterior, Hyperparameters, Method
from .sparsify import SparseCoefficients

FORMAT_VERSION = "1"


class ParseError(ValueError):
    """A cell or header in an input file could not be interpreted."""


def load_csv(path: str, response_column: str | None, add_intercept: bool = True):
    """Read a headered numeric CSV into a design matrix and optional response.

    Returns (Dataset, column_names) when a response column is named, else
    (matrix, column_names) of the covariates alone.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for r, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
            vals = []
            for name, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: could not parse {cell!r} at row {r}, column {name!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    data = np.array(rows)
    if response_column is None:
        covs = data
        names = header
        if add_intercept:
            covs = np.column_stack([np.ones(covs.shape[0]), covs])
            names = ["(intercept)"] + names
        return covs, names
    if response_column not in header:
        raise ParseError(f"{path}: response column {response_column!r} not found")
    ridx = header.index(response_column)
    y = data[:, ridx]
    covs = np.delete(data, ridx, axis=1)
    names = [h for i, h in enumerate(header) if i != ridx]
    if add_intercept:
        covs = np.column_stack([np.ones(covs.shape[0]), covs])
        names = ["(intercept)"] + names
    return Dataset(covs, y), names


def load_config(path: str) -> dict:
    """Flat key=value config; blank lines and # comments are skipped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}: line {lineno} is not key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


def hyperparameters_from_config(cfg: dict) -> Hyperparameters:
    fields = {f.name: f.type for f in dataclasses.fields(Hyperparameters)}
    kwargs = {}
    for key, value in cfg.items():
        if key not in fields:
            raise ParseError(f"unknown hyperparameter {key!r}")
        kwargs[key] = int(value) if key == "max_iter" else float(value)
    return Hyperparameters(**kwargs)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def result_bundle(
    fit: FitResult,
    sparse: SparseCoefficients,
    hpd: np.ndarray,
    hp: Hyperparameters,
    seed: int | None,
    column_names: list,
    wall_time_s: float | None = None,
) -> dict:
    """Assemble the serializable record of one fitted model.

    Wall time is excluded unless explicitly passed, so identical seeds give
    byte-identical files.
    """
    meta = {
        "format_version": FORMAT_VERSION,
        "method": fit.method.value,
        "hyperparameters": _jsonable(dataclasses.asdict(hp)),
        "seed": seed,
        "columns": list(column_names),
    }
    if wall_time_s is not None:
        meta["wall_time_s"] = wall_time_s
    fit_block = {
        "mean": _jsonable(fit.posterior.mean),
        "covariance": _jsonable(fit.posterior.covariance),
        "inclusion_prob": _jsonable(fit.inclusion_prob),
        "hyper_expectations": _jsonable(fit.hyper_expectations),
        "elbo_trace": _jsonable(fit.elbo_trace),
        "iterations": fit.iterations,
        "converged": fit.converged,
    }
    if fit.interval_posterior is not None:
        fit_block["interval_mean"] = _jsonable(fit.interval_posterior.mean)
        fit_block["interval_covariance"] = _jsonable(fit.interval_posterior.covariance)
    return {
        "metadata": meta,
        "fit": fit_block,
        "sparse": {
            "beta_hat": _jsonable(sparse.beta_hat),
            "support": list(sparse.support),
            "kappa": sparse.kappa,
            "aic": sparse.aic,
            "df": sparse.df,
            "p_binary": _jsonable(sparse.p_binary),
        },
        "hpd": _jsonable(hpd),
    }


def save_bundle(bundle: dict, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(bundle, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_bundle(path: str) -> tuple[FitResult, SparseCoefficients, dict]:
    with open(path, encoding="utf-8") as fh:
        bundle = json.load(fh)
    fit_d = bundle["fit"]
    fit = FitResult(
        method=Method(bundle["metadata"]["method"]),
        posterior=GaussianPosterior(
            mean=np.array(fit_d["mean"]), covariance=np.array(fit_d["covariance"])
        ),
        inclusion_prob=np.array(fit_d["inclusion_prob"]),
        hyper_expectations={
            k: np.array(v) if isinstance(v, list) else v
            for k, v in fit_d["hyper_expectations"].items()
        },
        elbo_trace=np.array(fit_d["elbo_trace"]),
        iterations=fit_d["iterations"],
        converged=fit_d["converged"],
        interval_posterior=(
            GaussianPosterior(
                mean=np.array(fit_d["interval_mean"]),
                covariance=np.array(fit_d["interval_covariance"]),
            )
            if "interval_mean" in fit_d
            else None
        ),
    )
    sp = bundle["sparse"]
    sparse = SparseCoefficients(
        beta_hat=np.array(sp["beta_hat"]),
        support=tuple(sp["support"]),
        kappa=sp["kappa"],
        aic=sp["aic"],
        df=sp["df"],
        p_binary=np.array(sp["p_binary"]),
    )
    return fit, sparse, bundle


def write_raw_table(rows: list, path: str):
    """Raw per-replication metric table as CSV."""
    cols = ["rep", "method", "failed", "cre", "trre", "tsre", "fnr", "fpr", "df",
            "converged", "iterations", "error"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _format_cell(row.get(c)) for c in cols})


def _format_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v
