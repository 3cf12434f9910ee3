"""Simulated experiment on a secondary metric."""
import logging

import numpy as np

from common.errors import DegeneratePrimal, NonUniquePrimal, SingularSystem, SolverError
from common.misc import child_seeds, mean_var, parallel_map
from lp import solve_matching
from sim import draw_experiment, split_matches

from .metrics import secondary_duals, secondary_duals_cs, secondary_estimates

__all__ = ["secondary_weights", "secondary_fluid", "run_secondary_experiment",
           "SECONDARY_RECORD_COLUMNS"]

logger = logging.getLogger(__name__)

SECONDARY_RECORD_COLUMNS = ["replication", "delta_w_true", "rct_w", "sp_w", "skipped"]


def secondary_weights(inst, w=None):
    """Dense weight matrix; None counts matches (w = 1 on every edge)."""
    if w is None:
        return np.ones((inst.n_d, inst.n_s))
    if isinstance(w, str) and w == "value":
        return np.where(inst.edge_mask, inst.v, 0.0)
    return np.asarray(w, dtype=float).reshape(inst.n_d, inst.n_s)


def _metric(inst, weights, d, s):
    # a non-unique optimum still yields a definite vertex here
    return float(solve_matching(inst, d, s).x_edges @ weights)


def secondary_fluid(inst, rates, w, rho):
    """Fluid secondary GTE and the fluid SP estimate a^w(rho) . beta."""
    weights = inst.edge_weights(w)
    out = dict(delta_w_true=_metric(inst, weights, rates.demand_at(1.0), rates.pi)
               - _metric(inst, weights, rates.demand_at(0.0), rates.pi))
    try:
        a_w = secondary_duals_cs(inst, w, rates.demand_at(rho), rates.pi)
        out["sp_w"] = float(a_w.a_w @ rates.beta)
        out["a_w"] = a_w.a_w.tolist()
    except (DegeneratePrimal, NonUniquePrimal, SingularSystem) as e:
        logger.warning(f"fluid secondary duals unavailable at rho={rho}: {e}")
        out["sp_w"] = None
        out["a_w"] = None
    return out


def _replication(inst, rates, w, weights, tau, rho, r, seed):
    cycle_seed, split_seed, gte_seed = child_seeds(seed, 3)
    draw = draw_experiment(rates, tau, rho, cycle_seed)
    D = draw.D_experiment

    supply_seed, demand_seed = child_seeds(gte_seed, 2)
    S = np.random.default_rng(supply_seed).poisson(rates.pi * tau)
    D_gt = np.random.default_rng(demand_seed).poisson(rates.demand_at(1.0) * tau)
    D_gc = np.random.default_rng(demand_seed).poisson(rates.demand_at(0.0) * tau)
    record = dict(replication=r, skipped=False,
                  delta_w_true=(_metric(inst, weights, D_gt, S) - _metric(inst, weights, D_gc, S)) / tau)
    try:
        a_w = secondary_duals(inst, w, D, draw.S)
    except SolverError as e:
        logger.debug(f"replication {r}: secondary duals undefined ({e})")
        record.update(rct_w=float("nan"), sp_w=float("nan"), skipped=True)
        return record
    split = split_matches(solve_matching(inst, D, draw.S).x, draw.D_control, D, split_seed)
    rct_w, sp_w = secondary_estimates(draw, split, a_w, inst, w)
    record.update(rct_w=rct_w, sp_w=sp_w)
    return record


def run_secondary_experiment(inst, rates, w, tau, rho, reps, seed, threads=1, progress=False):
    """Secondary GTE against its RCT and SP estimates over ``reps`` replications.

    Replications whose primary optimum is degenerate or not unique have no
    secondary shadow prices and are left out of the estimator means.
    """
    weights = inst.edge_weights(w)
    records = parallel_map(
        lambda rs: _replication(inst, rates, w, weights, tau, rho, *rs),
        list(enumerate(child_seeds(seed, reps))), threads=threads, desc="secondary",
        progress=progress)
    used = [rec for rec in records if not rec["skipped"]]
    if len(used) < len(records):
        logger.warning(f"{len(records) - len(used)}/{len(records)} replications had no secondary duals")

    report = dict(tau=float(tau), rho=float(rho), replications=reps, used=len(used))
    for key, pool in (("delta_w_true", records), ("rct_w", used), ("sp_w", used)):
        mean, var = mean_var([rec[key] for rec in pool])
        report[key] = mean
        report[f"{key}_stderr"] = None if var is None else float(np.sqrt(var / len(pool)))
    report["fluid"] = secondary_fluid(inst, rates, w, rho)
    return report, records
