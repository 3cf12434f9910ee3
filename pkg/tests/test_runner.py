import json
import subprocess
import sys
from pathlib import Path

import pytest
from hydra import compose, initialize

from common.errors import ConfigError, NumericalFailure
from common.io_utils import load_csv, load_json, load_yaml
from run import EXIT_CONFIG, EXIT_INTERNAL, EXIT_SOLVER, exit_code
from runner import build_runner

ROOT = Path(__file__).resolve().parents[1]


def _compose(exp_dir, *overrides):
    with initialize(version_base=None, config_path="../config"):
        return compose(config_name="default",
                       overrides=[f"exp_dir='{exp_dir}'", "progress=false", *overrides])


def _run(exp_dir, *overrides):
    return build_runner(_compose(exp_dir, *overrides)).run()


def test_fluid(tmp_path):
    manifest = _run(tmp_path / "fluid", "command=fluid")
    report = load_json(tmp_path / "fluid" / "report.json")
    assert report["delta_true"] == pytest.approx(1.40625)
    assert report["delta_rct"] == pytest.approx(29 / 7)
    assert report["delta_sp"] == pytest.approx(1.0)
    psi, cols = load_csv(tmp_path / "fluid" / "psi.csv")
    assert cols == ["eta", "value", "slope"]
    assert len(psi["eta"]) == 6
    written = load_json(tmp_path / "fluid" / "manifest.json")
    assert written["command"] == "fluid"
    assert written["config_digest"] == manifest.config_digest
    assert set(written["outputs"]) == {"report", "psi"}
    saved = load_yaml(tmp_path / "fluid" / "config.yaml")
    assert saved["command"] == "fluid" and saved["rho"] == 0.5


def test_kink_report_is_strict_json(tmp_path):
    _run(tmp_path / "kink", "command=fluid", "rho=0.125")

    def reject(token):
        raise ValueError(f"non-standard JSON constant {token}")

    report = json.loads((tmp_path / "kink" / "report.json").read_text(), parse_constant=reject)
    assert report["flags"]["breakpoint_ambiguity"]
    assert report["delta_sp"] is None and report["bias_sp"] is None
    assert report["psi_hat_sp"] == [None, None]


def test_no_treatment_effect(tmp_path):
    _run(tmp_path / "flat", "command=fluid", "market.beta=0.0")
    report = load_json(tmp_path / "flat" / "report.json")
    assert report["delta_true"] == report["delta_rct"] == report["delta_sp"] == 0.0


def test_counterexample_preset(tmp_path):
    _run(tmp_path / "ce", "command=fluid", "market=counterexample")
    report = load_json(tmp_path / "ce" / "report.json")
    assert report["rho"] == 0.75
    assert report["bias_sp"] == pytest.approx(0.625)
    assert report["bias_rct"] == pytest.approx(5 / 24)


def test_psi_and_sweep(tmp_path):
    _run(tmp_path / "psi", "command=psi")
    summary = load_json(tmp_path / "psi" / "psi.json")
    assert summary["n_pieces"] == 5 and summary["concave"]
    assert summary["gte_via_integral"] == pytest.approx(summary["gte_fluid"], abs=1e-7)

    _run(tmp_path / "sweep", "command=sweep")
    rows, _ = load_csv(tmp_path / "sweep" / "sweep.csv")
    assert len(rows["factor"]) == 8


def test_config_digest_ignores_exp_dir(tmp_path):
    one = _run(tmp_path / "a", "command=fluid")
    two = _run(tmp_path / "b", "command=fluid")
    three = _run(tmp_path / "c", "command=fluid", "rho=0.25")
    assert one.config_digest == two.config_digest != three.config_digest


def test_simulate_is_byte_identical(tmp_path):
    overrides = ["command=simulate", "simulate.taus=[20,50]", "simulate.reps=10", "rng_seed=3"]
    _run(tmp_path / "one", *overrides)
    _run(tmp_path / "two", *overrides, "threads=2")
    for name in ("replications.csv", "summary.json", "aggregate.csv"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()
    rows, _ = load_csv(tmp_path / "one" / "replications.csv")
    assert len(rows["tau"]) == 20


def test_secondary(tmp_path):
    _run(tmp_path / "sec", "command=secondary", "secondary.tau=20", "secondary.reps=5")
    report = load_json(tmp_path / "sec" / "report.json")
    assert report["replications"] == 5


def test_supplychain(tmp_path):
    _run(tmp_path / "sc", "command=supplychain", "supply_chain.reps=5", "supply_chain.betas=[[10,10]]")
    (report,) = load_json(tmp_path / "sc" / "report.json")
    assert report["beta"] == [10.0, 10.0]
    rows, _ = load_csv(tmp_path / "sc" / "aggregate.csv")
    assert len(rows["estimator"]) == 4


def test_rideshare(tmp_path):
    _run(tmp_path / "rs", "command=rideshare", "rideshare.n_rides=40", "rideshare.n_drivers=40",
         "rideshare.reps=3", "rideshare.window=21600")
    report = load_json(tmp_path / "rs" / "report.json")
    assert report["replications"] == 3
    rows, _ = load_csv(tmp_path / "rs" / "replications.csv")
    assert len(rows["replication"]) == 3
    agg, cols = load_csv(tmp_path / "rs" / "aggregate.csv")
    assert cols == ["effect_e", "estimator", "mean", "stderr"]
    assert agg["estimator"] == ["true_effect", "rct_estimate", "sp_estimate"]


def test_bad_config_writes_nothing(tmp_path):
    with pytest.raises(ConfigError):
        _run(tmp_path / "bad", "command=fluid", "market.name=nope")
    with pytest.raises(ConfigError):
        _run(tmp_path / "bad", "command=launch")
    assert not (tmp_path / "bad").exists()


@pytest.mark.parametrize("overrides", [["market.name=nope"], ["command=launch"], ["market=missing"]])
def test_cli_exit_code_for_bad_config(tmp_path, overrides):
    exp_dir = tmp_path / "cli"
    proc = subprocess.run([sys.executable, "run.py", f"exp_dir='{exp_dir}'", "progress=false", *overrides],
                          cwd=ROOT, capture_output=True, text=True)
    assert proc.returncode == 2
    assert not (exp_dir / "manifest.json").exists()


def test_exit_codes_separate_config_solver_and_internal_failures():
    assert exit_code(ConfigError("bad key")) == EXIT_CONFIG == 2
    assert exit_code(NumericalFailure("highs failed")) == EXIT_SOLVER == 3
    assert exit_code(KeyError("boom")) == EXIT_INTERNAL
    assert len({EXIT_CONFIG, EXIT_SOLVER, EXIT_INTERNAL, 1}) == 4
