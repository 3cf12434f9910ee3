"""Runners on the fluid model: bias report, psi profile, imbalance sweep."""
from tabulate import tabulate

from common.type_utils import cfg2dict
from estimators import bias_report, expected_sp_uniform_rho
from market import build_market, build_psi_profile, gte_fluid, gte_via_integral
from sim import supply_scaling_sweep

from .build import RUNNER_REGISTRY, BaseRunner

PSI_COLUMNS = ["eta", "value", "slope"]
SWEEP_COLUMNS = ["direction", "factor", "delta_true", "delta_rct", "delta_sp", "bias_rct",
                 "bias_sp", "degenerate"]


class MarketRunner(BaseRunner):
    def __init__(self, cfg):
        super().__init__(cfg)
        self.inst, self.rates = build_market(cfg.market)
        self.tol = float(cfg.psi.tol)


@RUNNER_REGISTRY.register()
class FluidRunner(MarketRunner):
    def execute(self):
        report = bias_report(self.inst, self.rates, self.rho, tol=self.tol)
        profile = build_psi_profile(self.inst, self.rates, tol=self.tol)
        self.logger.info("\n" + tabulate(
            [["delta", report.delta_true, 0.0], ["rct", report.delta_rct, report.bias_rct],
             ["sp", report.delta_sp, report.bias_sp]],
            headers=["estimator", "value", "bias"], floatfmt=".10g"))
        self.emit_json("report.json", report.to_dict())
        self.emit_csv("psi.csv", profile.rows(), PSI_COLUMNS)


@RUNNER_REGISTRY.register()
class PsiRunner(MarketRunner):
    def execute(self):
        profile = build_psi_profile(self.inst, self.rates, tol=self.tol)
        summary = dict(
            n_pieces=profile.n_pieces,
            breakpoints=[float(b) for b in profile.breakpoints],
            gte_fluid=gte_fluid(self.inst, self.rates),
            gte_via_integral=gte_via_integral(profile),
            expected_sp_uniform_rho=expected_sp_uniform_rho(profile),
            concave=profile.check(),
        )
        self.logger.info("\n" + tabulate([[r["eta"], r["value"], r["slope"]] for r in profile.rows()],
                                         headers=PSI_COLUMNS, floatfmt=".10g"))
        self.emit_csv("psi.csv", profile.rows(), PSI_COLUMNS)
        self.emit_json("psi.json", summary)


@RUNNER_REGISTRY.register()
class SweepRunner(MarketRunner):
    def execute(self):
        sweep_cfg = cfg2dict(self.cfg.sweep)
        rows = supply_scaling_sweep(self.inst, self.rates, sweep_cfg["factors"], self.rho,
                                    direction=sweep_cfg.get("direction", "both"))
        self.logger.info("\n" + tabulate([[r[c] for c in SWEEP_COLUMNS] for r in rows],
                                         headers=SWEEP_COLUMNS, floatfmt=".6g"))
        self.emit_csv("sweep.csv", rows, SWEEP_COLUMNS)
        self.emit_json("sweep.json", rows)
