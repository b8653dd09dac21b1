"""Command-line entry points: fit, predict, simulate, validate."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as _io
from .bernoulli import fit_bernoulli
from .core import Dataset, FitResult, GaussianPosterior, Hyperparameters, Method, validate
from .errors import VbPoissonError
from .harness import HIGH_DIM, LOW_DIM, ScenarioConfig, run_study
from .laplace import fit_laplace
from .predict import hpd_coefficients, predictive_distribution
from .sparsify import threshold_bernoulli, threshold_hard
from .spike_slab import fit_cs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

_FITTERS = {"laplace": fit_laplace, "cs": fit_cs, "bernoulli": fit_bernoulli}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="vbpoisson", description="Variational Bayes for sparse Poisson regression")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_fit = sub.add_parser("fit", help="fit one model to a CSV dataset")
    p_fit.add_argument("--method", required=True, choices=sorted(_FITTERS))
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--response", required=True)
    p_fit.add_argument("--config")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--threads", type=int, default=1,
                       help="accepted for interface compatibility; execution is serial")
    p_fit.add_argument("--level", type=float, default=0.95)
    std = p_fit.add_mutually_exclusive_group()
    std.add_argument("--standardize", dest="standardize", action="store_true", default=True)
    std.add_argument("--no-standardize", dest="standardize", action="store_false")
    p_fit.add_argument("--out", required=True)

    p_pred = sub.add_parser("predict", help="predict counts from a saved fit")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--level", type=float, default=0.95)
    p_pred.add_argument("--out", required=True)

    p_sim = sub.add_parser("simulate", help="run a seeded replication study")
    p_sim.add_argument("--scenario", required=True, choices=["low", "high", "custom"])
    p_sim.add_argument("--config")
    p_sim.add_argument("--replications", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--threads", type=int, default=1,
                       help="accepted for interface compatibility; execution is serial")
    p_sim.add_argument("--methods", default="laplace,cs,bernoulli")
    p_sim.add_argument("--summary-out")
    p_sim.add_argument("--out", required=True)

    p_val = sub.add_parser("validate", help="check a CSV dataset's invariants")
    p_val.add_argument("--data", required=True)
    p_val.add_argument("--response", required=True)
    return parser


def _standardize(dataset: Dataset) -> tuple[Dataset, np.ndarray, np.ndarray]:
    x = dataset.design.copy()
    center = np.zeros(dataset.p)
    scale = np.ones(dataset.p)
    if dataset.p > 1:
        center[1:] = x[:, 1:].mean(axis=0)
        sd = x[:, 1:].std(axis=0)
        scale[1:] = np.where(sd > 0.0, sd, 1.0)
        x[:, 1:] = (x[:, 1:] - center[1:]) / scale[1:]
    return Dataset(x, dataset.response), center, scale


def _destandardize(fit: FitResult, center: np.ndarray, scale: np.ndarray) -> FitResult:
    """Map the posterior back to the original covariate scale."""
    p = center.shape[0]
    t = np.eye(p)
    for j in range(1, p):
        t[j, j] = 1.0 / scale[j]
        t[0, j] = -center[j] / scale[j]
    def _map(post: GaussianPosterior) -> GaussianPosterior:
        mean = t @ post.mean
        cov = t @ post.covariance @ t.T
        return GaussianPosterior(mean=mean, covariance=0.5 * (cov + cov.T))

    return FitResult(
        method=fit.method,
        posterior=_map(fit.posterior),
        inclusion_prob=fit.inclusion_prob,
        hyper_expectations=fit.hyper_expectations,
        elbo_trace=fit.elbo_trace,
        iterations=fit.iterations,
        converged=fit.converged,
        interval_posterior=(
            _map(fit.interval_posterior) if fit.interval_posterior is not None else None
        ),
    )


def _cmd_fit(args) -> int:
    dataset, names = _io.load_csv(args.data, args.response)
    diags = validate(dataset)
    fatal = [d for d in diags if "zero-variance" not in d and "non-integer" not in d]
    if fatal:
        for d in fatal:
            print(f"invalid dataset: {d}", file=sys.stderr)
        return EXIT_NUMERICAL
    hp = Hyperparameters()
    if args.config:
        hp = _io.hyperparameters_from_config(_io.load_config(args.config))
    work = dataset
    center = np.zeros(dataset.p)
    scale = np.ones(dataset.p)
    if args.standardize:
        work, center, scale = _standardize(dataset)
    fit = _FITTERS[args.method](work, hp)
    if args.standardize:
        fit = _destandardize(fit, center, scale)
    if fit.method is Method.BERNOULLI:
        sparse = threshold_bernoulli(fit, dataset)
    else:
        sparse = threshold_hard(fit, dataset)
    hpd = hpd_coefficients(fit.interval_posterior or fit.posterior, args.level)
    bundle = _io.result_bundle(fit, sparse, hpd, hp, args.seed, names)
    _io.save_bundle(bundle, args.out)
    print(f"fit written to {args.out} (converged={fit.converged}, iterations={fit.iterations})")
    return EXIT_OK


def _cmd_predict(args) -> int:
    fit, sparse, _bundle = _io.load_bundle(args.model)
    covs, _names = _io.load_csv(args.data, response_column=None)
    if covs.shape[1] != fit.posterior.mean.shape[0]:
        print(
            f"error: model expects {fit.posterior.mean.shape[0]} columns "
            f"(incl. intercept), data has {covs.shape[1]}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    rows = []
    for row in covs:
        dist = predictive_distribution(row, fit, sparse, level=args.level)
        rows.append(
            {
                "mode": dist.mode,
                "mean": dist.mean,
                "hpd_set": list(int(v) for v in dist.hpd_set),
                "tail_mass": dist.tail_mass,
            }
        )
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump({"level": args.level, "predictions": rows}, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"predictions for {len(rows)} rows written to {args.out}")
    return EXIT_OK


def _scenario_from_args(args) -> ScenarioConfig:
    if args.scenario == "low":
        base = LOW_DIM
    elif args.scenario == "high":
        base = HIGH_DIM
    else:
        if not args.config:
            raise _io.ParseError("--scenario custom requires --config")
        base = None
    overrides = {}
    if args.config:
        cfg = _io.load_config(args.config)
        casts = {
            "n": int, "p": int, "mu0": float, "sigma0": float, "mu_x": float,
            "sigma2_x": float, "random_k": int, "train_fraction": float,
        }
        for key, value in cfg.items():
            if key == "z_mask":
                overrides[key] = np.array([float(v) for v in value.split(",")])
            elif key in casts:
                overrides[key] = casts[key](value)
            else:
                raise _io.ParseError(f"unknown scenario key {key!r}")
    if base is None:
        fields = dict(overrides)
    else:
        fields = {
            "n": base.n, "p": base.p, "mu0": base.mu0, "sigma0": base.sigma0,
            "mu_x": base.mu_x, "sigma2_x": base.sigma2_x, "z_mask": base.z_mask,
            "random_k": base.random_k,
        }
        fields.update(overrides)
    if overrides.get("random_k") is not None and "z_mask" not in overrides:
        fields["z_mask"] = None
    fields["replications"] = args.replications
    fields["seed"] = args.seed
    return ScenarioConfig(**fields)


def _cmd_simulate(args) -> int:
    config = _scenario_from_args(args)
    methods = tuple(Method(m.strip()) for m in args.methods.split(",") if m.strip())
    result = run_study(config, methods=methods)
    _io.write_raw_table(result.raw, args.out)
    summary = {}
    for name, rep in result.reports.items():
        summary[name] = {
            "cre": rep.cre,
            "trre": rep.trre,
            "tsre": rep.tsre,
            "fnr": rep.fnr,
            "fpr": rep.fpr,
            "coverage": rep.coverage.tolist(),
            "failures": rep.failures,
        }
    if args.summary_out:
        with open(args.summary_out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, sort_keys=True, indent=1)
            fh.write("\n")
    for name, row in summary.items():
        print(
            f"{name}: cre={row['cre']:.4f} trre={row['trre']:.4f} "
            f"tsre={row['tsre']:.4f} fnr={row['fnr']:.4f} fpr={row['fpr']:.4f} "
            f"failures={row['failures']}"
        )
    print(f"raw table written to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    dataset, _names = _io.load_csv(args.data, args.response)
    diags = validate(dataset)
    if not diags:
        print("dataset is valid")
        return EXIT_OK
    for d in diags:
        print(f"diagnostic: {d}")
    return EXIT_NUMERICAL


def cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "validate":
            return _cmd_validate(args)
    except (_io.ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except VbPoissonError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_USAGE


def entry():
    raise SystemExit(cli())
