"""End-to-end command-line workflows and exit codes."""

import json

import numpy as np
import pytest

from vbpoisson.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, cli


@pytest.fixture()
def data_csv(tmp_path):
    rng = np.random.default_rng(4)
    n = 60
    x1 = rng.standard_normal(n)
    x2 = rng.standard_normal(n)
    y = rng.poisson(np.exp(0.5 + 0.8 * x1)).astype(int)
    lines = ["x1,x2,y"] + [
        f"{float(a)!r},{float(b)!r},{int(c)}" for a, b, c in zip(x1, x2, y)
    ]
    path = tmp_path / "data.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def test_fit_then_predict(tmp_path, data_csv, capsys):
    out = str(tmp_path / "fit.json")
    code = cli(["fit", "--method", "laplace", "--data", data_csv,
                "--response", "y", "--out", out])
    assert code == EXIT_OK
    assert "converged=True" in capsys.readouterr().out
    bundle = json.load(open(out, encoding="utf-8"))
    assert bundle["metadata"]["method"] == "laplace"
    assert len(bundle["fit"]["mean"]) == 3

    new = tmp_path / "new.csv"
    new.write_text("x1,x2\n0.0,0.0\n1.0,-1.0\n", encoding="utf-8")
    pred_out = str(tmp_path / "pred.json")
    code = cli(["predict", "--model", out, "--data", str(new), "--out", pred_out])
    assert code == EXIT_OK
    preds = json.load(open(pred_out, encoding="utf-8"))
    assert len(preds["predictions"]) == 2
    assert all(p["mode"] >= 0 for p in preds["predictions"])


@pytest.mark.parametrize("method", ["cs", "bernoulli"])
def test_fit_all_methods(tmp_path, data_csv, method):
    out = str(tmp_path / f"{method}.json")
    code = cli(["fit", "--method", method, "--data", data_csv,
                "--response", "y", "--out", out])
    assert code == EXIT_OK
    bundle = json.load(open(out, encoding="utf-8"))
    assert bundle["metadata"]["method"] == method


def test_fit_output_is_byte_identical_across_thread_settings(tmp_path, data_csv):
    outs = []
    for threads, name in [(1, "a.json"), (4, "b.json"), (1, "c.json")]:
        out = str(tmp_path / name)
        code = cli(["fit", "--method", "cs", "--data", data_csv, "--response", "y",
                    "--seed", "3", "--threads", str(threads), "--out", out])
        assert code == EXIT_OK
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1] == outs[2]


def test_fit_with_config_and_no_standardize(tmp_path, data_csv):
    cfg = tmp_path / "hp.cfg"
    cfg.write_text("max_iter = 300\nepsilon = 1e-7\n", encoding="utf-8")
    out = str(tmp_path / "fit.json")
    code = cli(["fit", "--method", "laplace", "--data", data_csv, "--response", "y",
                "--config", str(cfg), "--no-standardize", "--out", out])
    assert code == EXIT_OK
    bundle = json.load(open(out, encoding="utf-8"))
    assert bundle["metadata"]["hyperparameters"]["max_iter"] == 300


def test_usage_errors_exit_one(tmp_path, data_csv, capsys):
    assert cli(["fit", "--method", "laplace"]) == EXIT_USAGE
    assert cli(["fit", "--method", "nope", "--data", data_csv,
                "--response", "y", "--out", str(tmp_path / "o.json")]) == EXIT_USAGE
    assert cli([]) == EXIT_USAGE
    capsys.readouterr()


def test_file_errors_exit_two(tmp_path, capsys):
    code = cli(["fit", "--method", "laplace", "--data", str(tmp_path / "missing.csv"),
                "--response", "y", "--out", str(tmp_path / "o.json")])
    assert code == EXIT_NUMERICAL
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,oops\n", encoding="utf-8")
    code = cli(["fit", "--method", "laplace", "--data", str(bad),
                "--response", "y", "--out", str(tmp_path / "o.json")])
    assert code == EXIT_NUMERICAL
    assert "error:" in capsys.readouterr().err


def test_validate_clean_and_dirty(tmp_path, data_csv, capsys):
    assert cli(["validate", "--data", data_csv, "--response", "y"]) == EXIT_OK
    assert "valid" in capsys.readouterr().out
    dirty = tmp_path / "dirty.csv"
    dirty.write_text("x1,y\n0.5,-3\n0.2,1\n", encoding="utf-8")
    assert cli(["validate", "--data", str(dirty), "--response", "y"]) == EXIT_NUMERICAL
    assert "diagnostic:" in capsys.readouterr().out


def test_simulate_writes_raw_and_summary(tmp_path, capsys):
    cfg = tmp_path / "scen.cfg"
    cfg.write_text(
        "n = 50\np = 5\nmu0 = 0.6\nsigma0 = 0.4\nmu_x = 0.1\nsigma2_x = 1.0\n"
        "z_mask = 1,0,1,0,0\n",
        encoding="utf-8",
    )
    raw_out = str(tmp_path / "raw.csv")
    sum_out = str(tmp_path / "summary.json")
    code = cli(["simulate", "--scenario", "custom", "--config", str(cfg),
                "--replications", "2", "--seed", "5", "--methods", "laplace",
                "--summary-out", sum_out, "--out", raw_out])
    assert code == EXIT_OK
    assert "laplace:" in capsys.readouterr().out
    lines = open(raw_out, encoding="utf-8").read().splitlines()
    assert len(lines) == 3
    summary = json.load(open(sum_out, encoding="utf-8"))
    assert "laplace" in summary and len(summary["laplace"]["coverage"]) == 5


def test_simulate_is_deterministic(tmp_path):
    outs = []
    for name in ("r1.csv", "r2.csv"):
        out = str(tmp_path / name)
        code = cli(["simulate", "--scenario", "low", "--replications", "2",
                    "--seed", "9", "--methods", "laplace,bernoulli", "--out", out])
        assert code == EXIT_OK
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1]


def test_simulate_custom_requires_config(tmp_path, capsys):
    code = cli(["simulate", "--scenario", "custom", "--replications", "1",
                "--out", str(tmp_path / "o.csv")])
    assert code == EXIT_NUMERICAL
    capsys.readouterr()
