import logging

from tabulate import tabulate

from common.errors import BreakpointAmbiguity, MarketError, SolverError
from common.misc import child_seeds, parallel_map
from estimators import (rct_asymptotic_variance, rct_fluid_parts, sp_asymptotic_variance,
                        sp_estimate_fluid)
from market import gte_fluid

from .build import ESTIMATOR_COLUMNS, EstimatorStats, MonteCarloStats
from .cycle import gte_samples, run_cycle

__all__ = ["monte_carlo", "fluid_predictions"]

logger = logging.getLogger(__name__)


def fluid_predictions(inst, rates, rho):
    """Fluid-limit values the sampled moments should approach as tau grows."""
    rct, _, result, _ = rct_fluid_parts(inst, rates, rho)
    out = dict(delta_true=gte_fluid(inst, rates), delta_rct=rct,
               rct_scaled_variance=rct_asymptotic_variance(inst, rates, rho))
    try:
        out["delta_sp"] = sp_estimate_fluid(inst, rates, rho)
    except BreakpointAmbiguity:
        out["delta_sp"] = None
    out["sp_scaled_variance"] = None if result.degenerate else sp_asymptotic_variance(inst, rates, rho)
    return out


def _stats_at(config, tau, cycle_seeds, gte_root):
    records = parallel_map(
        lambda s: run_cycle(config.inst, config.rates, tau, config.rho, s, config.estimators),
        cycle_seeds, threads=config.threads, desc=f"simulate tau={tau:g}", progress=config.progress)
    gte = gte_samples(config.rates, config.inst, tau, config.gte_reps, gte_root,
                      threads=config.threads, progress=config.progress)

    estimators = {}
    for name in config.estimators:
        column = ESTIMATOR_COLUMNS[name]
        estimators[name] = EstimatorStats.from_values([getattr(r, column) for r in records], tau)
    n_degenerate = sum(r.degenerate_flag for r in records)
    if n_degenerate:
        logger.warning(f"tau={tau:g}: {n_degenerate}/{len(records)} experiment solves degenerate")
    return MonteCarloStats(tau=tau, rho=config.rho, replications=len(records),
                           estimators=estimators, delta_true=EstimatorStats.from_values(gte, tau),
                           records=records)


def monte_carlo(config):
    """Replicate the experiment ``config.reps`` times at every tau.

    Replication r draws from child r of the root seed at every tau, so the
    tau sweep runs on common random numbers. Returns one MonteCarloStats per tau.
    """
    cycle_root, gte_root = child_seeds(config.seed, 2)
    cycle_seeds = child_seeds(cycle_root, config.reps)
    try:
        fluid = fluid_predictions(config.inst, config.rates, config.rho)
    except (MarketError, SolverError) as e:
        logger.warning(f"fluid predictions unavailable: {e}")
        fluid = {}

    out = []
    for tau in config.taus:
        stats = _stats_at(config, tau, cycle_seeds, gte_root)
        stats.fluid = fluid
        out.append(stats)

    rows = [[s.tau, name, st.mean, st.stderr, st.scaled_variance]
            for s in out for name, st in [("delta_true", s.delta_true)] + list(s.estimators.items())]
    logger.info("\n" + tabulate(rows, headers=["tau", "estimator", "mean", "stderr", "tau*var"],
                                floatfmt=".6g"))
    return out
