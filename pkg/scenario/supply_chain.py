"""Two-plant / two-retailer supply chain with two warehouse layers."""
import logging
from dataclasses import dataclass, field

import numpy as np
from tabulate import tabulate

from common.errors import ConfigError, InconsistentCounts
from common.misc import child_seeds, mean_var, parallel_map
from lp import FlowNetwork, decompose_paths, solve_min_cost_flow
from sim import split_matches

__all__ = ["PLANTS", "RETAILERS", "EXAMPLE_TOPOLOGY", "BETA_GRID", "REGIMES", "SupplyChainConfig",
           "build_example_network", "retailer_average_values", "run_supply_chain_experiment",
           "SUPPLY_CHAIN_RECORD_COLUMNS"]

logger = logging.getLogger(__name__)

PLANTS = ("p1", "p2")
RETAILERS = ("r1", "r2")
EXAMPLE_TOPOLOGY = (
    ("p1", "w1"), ("p1", "w2"),
    ("p2", "w3"), ("p2", "w4"), ("p2", "w5"),
    ("w1", "w6"), ("w1", "w9"), ("w2", "w7"), ("w2", "w10"),
    ("w3", "w6"), ("w3", "w9"), ("w4", "w7"), ("w4", "w10"), ("w5", "w8"),
    ("w6", "r1"), ("w7", "r1"), ("w8", "r1"), ("w9", "r2"), ("w10", "r2"),
)
PRODUCTION_COST = {"p1": 37.0, "p2": 20.0}
PRICE = {"r1": 50.0, "r2": 60.0}
CAPACITY_MEAN = 80.0
COST_RANGE = (0.0, 5.0)

BETA_GRID = ((10, 10), (20, 20), (-10, -10), (-20, 20), (20, -20))
REGIMES = {"undersupply": (130.0, 120.0), "oversupply": (60.0, 60.0)}

SUPPLY_CHAIN_RECORD_COLUMNS = ["beta_1", "beta_2", "replication", "delta_true", "delta_rct_raw",
                               "delta_rct_rb", "delta_sp", "a_1", "a_2", "vbar_1", "vbar_2"]


def build_example_network(seed):
    """Example network; capacities ~ Poisson(80) and costs ~ U[0, 5] are drawn per seed."""
    rng = np.random.default_rng(seed)
    capacities = rng.poisson(CAPACITY_MEAN, size=len(EXAMPLE_TOPOLOGY))
    costs = rng.uniform(*COST_RANGE, size=len(EXAMPLE_TOPOLOGY))
    edges = [(i, j, u, c) for (i, j), u, c in zip(EXAMPLE_TOPOLOGY, capacities, costs)]
    return FlowNetwork.from_edges(PLANTS, RETAILERS, edges, PRODUCTION_COST, PRICE)


@dataclass
class SupplyChainConfig:
    lam: tuple = REGIMES["undersupply"]
    pi: tuple = (130.0, 190.0)
    betas: list = field(default_factory=lambda: [list(b) for b in BETA_GRID])
    rho: float = 0.5
    reps: int = 1000
    seed: int = 0
    network_seed: int = 0
    regime: str = "undersupply"
    threads: int = 1
    progress: bool = False

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.pi = np.asarray(self.pi, dtype=float)
        self.betas = [np.asarray(b, dtype=float) for b in self.betas]
        if self.lam.shape != (len(RETAILERS),) or self.pi.shape != (len(PLANTS),):
            raise ConfigError("lam needs one rate per retailer and pi one per plant")
        if np.any(self.lam < 0) or np.any(self.pi < 0):
            raise ConfigError("arrival and capacity rates must be nonnegative")
        for beta in self.betas:
            if beta.shape != self.lam.shape:
                raise ConfigError(f"beta {beta.tolist()} does not match the retailers")
            if np.any(self.lam + beta < 0):
                raise ConfigError(f"lambda + beta is negative for beta {beta.tolist()}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho={self.rho} outside (0, 1)")
        if self.reps < 1:
            raise ConfigError(f"replication count must be >= 1, got {self.reps}")

    @classmethod
    def from_cfg(cls, cfg):
        keys = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in cfg.items() if k in keys})


def retailer_average_values(net, result, demand):
    """v*_j: value of the paths ending at retailer j divided by its demand.

    Paths come from greedy decomposition of the optimal flow, so the upstream
    production and transport costs are charged to the retailer they serve.
    Also returns the served units per retailer.
    """
    values = net.edge_values()
    index = {r: k for k, r in enumerate(net.retailers)}
    captured = np.zeros(len(net.retailers))
    served = np.zeros(len(net.retailers))
    for path, amount in decompose_paths(net, result.x):
        j = index[net.edges[path[-1]][1]]
        captured[j] += amount * float(values[path].sum())
        served[j] += amount
    demand = np.asarray(demand, dtype=float)
    vbar = np.divide(captured, demand, out=np.zeros_like(captured), where=demand > 0)
    return vbar, captured, served


def _served_counts(served):
    counts = np.rint(served)
    if np.any(np.abs(served - counts) > 1e-6):
        raise InconsistentCounts(f"served units {served.tolist()} are not integral")
    return counts.astype(np.int64)


def _replication(net, config, beta, seed):
    supply_seed, demand_seed, gt_seed, split_seed = child_seeds(seed, 4)
    rho = config.rho
    w_t, w_c = 1.0 / rho, 1.0 / (1.0 - rho)

    S = np.random.default_rng(supply_seed).poisson(config.pi)
    rng = np.random.default_rng(demand_seed)
    D_control = rng.poisson((1.0 - rho) * config.lam)
    D_treatment = rng.poisson(rho * (config.lam + beta))
    D = D_control + D_treatment

    result = solve_min_cost_flow(net, D, S)
    vbar, captured, served = retailer_average_values(net, result, D)
    served = _served_counts(served)
    split = split_matches(served[:, None], D_control, D, split_seed)
    unit_value = np.divide(captured, served, out=np.zeros_like(captured), where=served > 0)
    X_c, X_t = split.X_control[:, 0], split.X_treatment[:, 0]

    D_gt = np.random.default_rng(gt_seed).poisson(config.lam + beta)
    D_gc = np.random.default_rng(gt_seed).poisson(config.lam)
    delta = solve_min_cost_flow(net, D_gt, S).objective - solve_min_cost_flow(net, D_gc, S).objective

    return dict(
        delta_true=float(delta),
        delta_rct_raw=float(unit_value @ (w_t * X_t - w_c * X_c)),
        delta_rct_rb=float(vbar @ (w_t * D_treatment - w_c * D_control)),
        delta_sp=float(result.a @ (w_t * D_treatment - w_c * D_control)),
        a=result.a.tolist(),
        vbar=vbar.tolist(),
    )


def _summary(values):
    mean, var = mean_var(values)
    return mean, (None if var is None else float(np.sqrt(var / len(values))))


def run_supply_chain_experiment(config, net=None):
    """Estimator comparison for every beta in ``config.betas``.

    Returns (reports, records): one report per beta and the per-replication rows.
    Capacities and costs stay fixed across the study.
    """
    if net is None:
        net = build_example_network(config.network_seed)
    reports, records = [], []
    for b_idx, beta in enumerate(config.betas):
        seeds = child_seeds(child_seeds(config.seed, len(config.betas))[b_idx], config.reps)
        reps = parallel_map(lambda s: _replication(net, config, beta, s), seeds,
                            threads=config.threads, desc=f"supply chain beta={beta.tolist()}",
                            progress=config.progress)
        report = dict(beta=beta.tolist(), regime=config.regime, replications=config.reps)
        for key in ("delta_true", "delta_rct_raw", "delta_rct_rb", "delta_sp"):
            report[key], report[f"{key}_stderr"] = _summary([r[key] for r in reps])
        report["delta_rct"], report["delta_rct_stderr"] = report["delta_rct_rb"], report["delta_rct_rb_stderr"]
        report["a"] = [mean_var([r["a"][j] for r in reps])[0] for j in range(len(net.retailers))]
        report["vbar"] = [mean_var([r["vbar"][j] for r in reps])[0] for j in range(len(net.retailers))]
        reports.append(report)
        for r_idx, r in enumerate(reps):
            records.append(dict(beta_1=beta[0], beta_2=beta[1], replication=r_idx,
                                delta_true=r["delta_true"], delta_rct_raw=r["delta_rct_raw"],
                                delta_rct_rb=r["delta_rct_rb"], delta_sp=r["delta_sp"],
                                a_1=r["a"][0], a_2=r["a"][1], vbar_1=r["vbar"][0], vbar_2=r["vbar"][1]))

    logger.info("\n" + tabulate(
        [[str(r["beta"]), r["delta_true"], r["delta_rct_raw"], r["delta_rct"], r["delta_sp"]] for r in reports],
        headers=["beta", "true", "rct raw", "rct rb", "sp"], floatfmt=".4g"))
    return reports, records
