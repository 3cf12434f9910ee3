from common.type_utils import cfg2dict
from secondary import SECONDARY_RECORD_COLUMNS, run_secondary_experiment, secondary_weights
from sim import RECORD_COLUMNS, SimConfig, monte_carlo

from .build import RUNNER_REGISTRY
from .fluid import MarketRunner

AGGREGATE_COLUMNS = ["tau", "rho", "estimator", "mean", "stderr", "scaled_variance", "replications"]


@RUNNER_REGISTRY.register()
class SimulateRunner(MarketRunner):
    def execute(self):
        sim_cfg = cfg2dict(self.cfg.simulate)
        config = SimConfig(self.inst, self.rates, taus=sim_cfg["taus"], rho=self.rho,
                           reps=int(sim_cfg["reps"]), seed=self.seed,
                           estimators=tuple(sim_cfg.get("estimators", ("rct_raw", "rct_rb", "sp"))),
                           gte_reps=sim_cfg.get("gte_reps"), threads=self.threads,
                           progress=self.progress)
        stats = monte_carlo(config)
        self.emit_csv("replications.csv", [r.to_row() for s in stats for r in s.records], RECORD_COLUMNS)
        self.emit_json("summary.json", [s.to_dict() for s in stats])
        self.emit_csv("aggregate.csv", [row for s in stats for row in s.aggregate_rows()],
                      AGGREGATE_COLUMNS)


@RUNNER_REGISTRY.register()
class SecondaryRunner(MarketRunner):
    def execute(self):
        sec_cfg = cfg2dict(self.cfg.secondary)
        w = secondary_weights(self.inst, sec_cfg.get("w"))
        report, records = run_secondary_experiment(
            self.inst, self.rates, w, float(sec_cfg["tau"]), self.rho, int(sec_cfg["reps"]),
            self.seed, threads=self.threads, progress=self.progress)
        self.logger.info(f"secondary GTE {report['delta_w_true']:.6g}, RCT {report['rct_w']:.6g}, "
                         f"SP {report['sp_w']:.6g} ({report['used']}/{report['replications']} used)")
        self.emit_json("report.json", report)
        self.emit_csv("replications.csv", records, SECONDARY_RECORD_COLUMNS)
