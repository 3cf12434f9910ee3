"""Secondary metrics evaluated on the primary optimal matching.

A secondary metric re-weights the edges of the primary optimum with weights w.
Its shadow prices a^w need not be nonnegative; at a unique nondegenerate
optimum they solve the square system given by the support edges and the slack
capacity rows.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from common.errors import DegeneratePrimal, NonUniquePrimal, SingularSystem
from lp import TOL_FEAS, check_vector, is_primal_unique, problem_scale, solve_matching
from market import is_unit_demand

__all__ = ["SecondaryDuals", "phi_secondary", "secondary_duals_bruteforce",
           "secondary_duals_cs", "secondary_duals", "secondary_estimates"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SecondaryDuals:
    a_w: np.ndarray
    method: str = "cs"

    def within_sanity_bound(self, inst, w):
        w_max = float(np.max(np.abs(inst.edge_weights(w)), initial=0.0)) if inst.n_edges else 0.0
        return bool(np.all(np.abs(self.a_w) <= w_max * (inst.n_d + inst.n_s) + 1e-9))


def _unique_solve(inst, d, s):
    result = solve_matching(inst, d, s)
    if not is_primal_unique(inst, d, s, result):
        raise NonUniquePrimal("primary optimum is not unique; secondary metric undefined")
    return result


def phi_secondary(inst, w, d, s):
    """Secondary metric sum_ij w_ij x*_ij at the primary optimum x*."""
    weights = inst.edge_weights(w)
    return float(_unique_solve(inst, d, s).x_edges @ weights)


def secondary_duals_bruteforce(inst, w, d, s, direction="right"):
    """a^w_i = phi^w(d + e_i, s) - phi^w(d, s), or the left difference.

    Left differences need d_i >= 1; smaller entries fall back to the right one.
    """
    d = check_vector(d, inst.n_d, "demand")
    weights = inst.edge_weights(w)
    base = float(_unique_solve(inst, d, s).x_edges @ weights)
    a_w = np.empty(inst.n_d)
    for i in range(inst.n_d):
        e_i = np.zeros(inst.n_d)
        e_i[i] = 1.0
        if direction == "right" or d[i] < 1.0:
            a_w[i] = float(_unique_solve(inst, d + e_i, s).x_edges @ weights) - base
        else:
            a_w[i] = base - float(_unique_solve(inst, d - e_i, s).x_edges @ weights)
    return SecondaryDuals(a_w, method=f"bruteforce-{direction}")


def _cs_system(inst, weights, d, s, result):
    scale = problem_scale(d, s, objective=result.objective)
    tol = TOL_FEAS * scale
    n = inst.n_d + inst.n_s
    x = result.x_edges
    support = np.flatnonzero(x > tol)
    slack_d = np.flatnonzero(result.demand_usage() < d - tol)
    slack_s = np.flatnonzero(result.supply_usage() < s - tol)
    n_rows = support.size + slack_d.size + slack_s.size
    if n_rows != n:
        raise DegeneratePrimal(f"complementary slackness gives {n_rows} rows for {n} unknowns")

    M = np.zeros((n, n))
    rhs = np.zeros(n)
    r = np.arange(support.size)
    M[r, inst.rows[support]] = 1.0
    M[r, inst.n_d + inst.cols[support]] = 1.0
    rhs[r] = weights[support]
    r0 = support.size
    M[r0 + np.arange(slack_d.size), slack_d] = 1.0
    r0 += slack_d.size
    M[r0 + np.arange(slack_s.size), inst.n_d + slack_s] = 1.0
    return M, rhs


def secondary_duals_cs(inst, w, d, s):
    """Secondary shadow prices from the complementary-slackness system M a = w~."""
    d = check_vector(d, inst.n_d, "demand")
    s = check_vector(s, inst.n_s, "supply")
    weights = inst.edge_weights(w)
    result = solve_matching(inst, d, s)
    if result.degenerate:
        raise DegeneratePrimal("primary optimum is degenerate")
    if not is_primal_unique(inst, d, s, result):
        raise NonUniquePrimal("primary optimum is not unique")
    M, rhs = _cs_system(inst, weights, d, s, result)
    try:
        sol = scipy.linalg.solve(M, rhs)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SingularSystem(f"complementary slackness system is singular: {e}") from e
    return SecondaryDuals(sol[:inst.n_d], method="cs")


def secondary_duals(inst, w, d, s):
    """CS duals, falling back to left differences for degenerate unit-type demand."""
    try:
        return secondary_duals_cs(inst, w, d, s)
    except DegeneratePrimal:
        if not is_unit_demand(d):
            raise
        logger.warning("degenerate unit-type primal: secondary duals from left differences")
        return secondary_duals_bruteforce(inst, w, d, s, direction="left")


def secondary_estimates(draw, split, a_w, inst, w):
    """(RCT, SP) estimates of the secondary treatment effect."""
    weights = inst.edge_weights(w)
    w_t, w_c = 1.0 / draw.rho, 1.0 / (1.0 - draw.rho)
    x_t = np.asarray(split.X_treatment, dtype=float)[inst.rows, inst.cols]
    x_c = np.asarray(split.X_control, dtype=float)[inst.rows, inst.cols]
    rct_w = (w_t * float(x_t @ weights) - w_c * float(x_c @ weights)) / draw.tau
    a_w = a_w.a_w if isinstance(a_w, SecondaryDuals) else np.asarray(a_w, dtype=float)
    sp_w = float(a_w @ (w_t * draw.D_treatment - w_c * draw.D_control)) / draw.tau
    return rct_w, sp_w
