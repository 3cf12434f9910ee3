from common.type_utils import cfg2dict
from scenario import (RIDESHARE_RECORD_COLUMNS, SUPPLY_CHAIN_RECORD_COLUMNS, RideshareConfig,
                      SupplyChainConfig, run_rideshare_experiment, run_supply_chain_experiment)

from .build import RUNNER_REGISTRY, BaseRunner

RIDESHARE_AGGREGATE_COLUMNS = ["effect_e", "estimator", "mean", "stderr"]
SUPPLY_CHAIN_AGGREGATE_COLUMNS = ["regime", "beta_1", "beta_2", "estimator", "mean", "stderr"]


def _scenario_cfg(runner, node):
    cfg = dict(cfg2dict(node))
    cfg.update(rho=runner.rho, seed=runner.seed, threads=runner.threads, progress=runner.progress)
    return cfg


@RUNNER_REGISTRY.register()
class RideshareRunner(BaseRunner):
    def execute(self):
        config = RideshareConfig.from_cfg(_scenario_cfg(self, self.cfg.rideshare))
        report, records = run_rideshare_experiment(config)
        aggregate = []
        for name, std in (("true_effect", "true_std"), ("rct_estimate", "rct_std"), ("sp_estimate", "sp_std")):
            stderr = None if report[std] is None else report[std] / report["replications"] ** 0.5
            aggregate.append(dict(effect_e=report["effect_e"], estimator=name, mean=report[name], stderr=stderr))
        self.emit_json("report.json", report)
        self.emit_csv("replications.csv", records, RIDESHARE_RECORD_COLUMNS)
        self.emit_csv("aggregate.csv", aggregate, RIDESHARE_AGGREGATE_COLUMNS)


@RUNNER_REGISTRY.register()
class SupplyChainRunner(BaseRunner):
    def execute(self):
        config = SupplyChainConfig.from_cfg(_scenario_cfg(self, self.cfg.supply_chain))
        reports, records = run_supply_chain_experiment(config)
        aggregate = []
        for rep in reports:
            for name in ("delta_true", "delta_rct_raw", "delta_rct_rb", "delta_sp"):
                aggregate.append(dict(regime=rep["regime"], beta_1=rep["beta"][0], beta_2=rep["beta"][1],
                                      estimator=name, mean=rep[name], stderr=rep[f"{name}_stderr"]))
        self.emit_json("report.json", reports)
        self.emit_csv("replications.csv", records, SUPPLY_CHAIN_RECORD_COLUMNS)
        self.emit_csv("aggregate.csv", aggregate, SUPPLY_CHAIN_AGGREGATE_COLUMNS)
