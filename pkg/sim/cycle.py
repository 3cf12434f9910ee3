import logging

import numpy as np

from common.errors import ConfigError
from common.misc import child_seeds, mean_var, parallel_map, seed_record
from estimators import CycleData, build_estimators
from lp import solve_matching
from market import is_unit_demand, perturbed_solve, phi

from .build import ESTIMATOR_COLUMNS, EstimateRecord
from .draws import draw_experiment, split_matches

__all__ = ["run_cycle", "gte_samples", "simulate_gte"]

logger = logging.getLogger(__name__)


def run_cycle(inst, rates, tau, rho, seed, estimators=("rct_raw", "rct_rb", "sp")):
    """Simulate one experiment and evaluate the selected estimators on it.

    A degenerate solve on unit-type demand takes its duals from the perturbed
    problem (left shadow prices); otherwise the solver duals are used and the
    degeneracy is only recorded.
    """
    draw_seed, split_seed = child_seeds(seed, 2)
    draw = draw_experiment(rates, tau, rho, draw_seed)
    D = draw.D_experiment
    result = solve_matching(inst, D, draw.S)

    duals, perturbed = result.a, False
    if result.degenerate and is_unit_demand(D):
        duals, perturbed = perturbed_solve(inst, D, draw.S).a, True

    x = result.x
    split = split_matches(x, draw.D_control, D, split_seed) if "rct_raw" in estimators else None
    cycle = CycleData(inst, draw, x, duals, split)
    values = {ESTIMATOR_COLUMNS[name]: float(fn(cycle)) for name, fn in build_estimators(estimators)}
    return EstimateRecord(tau=float(tau), rho=float(rho), seed=seed_record(seed),
                          degenerate_flag=bool(result.degenerate), perturbed=perturbed, **values)


def _gte_pair(inst, rates, tau, seed):
    supply_seed, demand_seed = child_seeds(seed, 2)
    S = np.random.default_rng(supply_seed).poisson(rates.pi * tau)
    D_treat = np.random.default_rng(demand_seed).poisson(rates.demand_at(1.0) * tau)
    D_ctrl = np.random.default_rng(demand_seed).poisson(rates.demand_at(0.0) * tau)
    return (phi(inst, D_treat, S) - phi(inst, D_ctrl, S)) / tau


def gte_samples(rates, inst, tau, R, seed, threads=1, progress=False):
    """R paired draws of (1/tau)[Phi(D^{lam+beta}, S) - Phi(D^lam, S)].

    Both terms of a pair share the supply draw and the demand stream, so a zero
    treatment effect gives exactly zero.
    """
    if R < 1:
        raise ConfigError(f"replication count must be >= 1, got {R}")
    return parallel_map(lambda s: _gte_pair(inst, rates, tau, s), child_seeds(seed, R),
                        threads=threads, desc=f"gte tau={tau:g}", progress=progress)


def simulate_gte(rates, inst, tau, R, seed, threads=1):
    samples = gte_samples(rates, inst, tau, R, seed, threads=threads)
    return mean_var(samples)[0]
