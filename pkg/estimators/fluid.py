"""Fluid-limit forms of the RCT and SP estimators.

RCT uses the average value v* of each demand type at the experiment state,
SP the marginal value a^rho. Both are slopes of a linear approximation of psi.
"""
import logging
import warnings

import numpy as np

from common.errors import BreakpointAmbiguity, DegenerateExperimentPoint, OutOfRange
from lp import problem_scale, solve_matching
from market import PROBE_DELTA

__all__ = ["experiment_solve", "average_values", "rct_estimate_fluid", "sp_estimate_fluid",
           "rct_fluid_parts", "sp_asymptotic_variance", "rct_asymptotic_variance"]

logger = logging.getLogger(__name__)


def _check_rho(rho):
    if not 0.0 < rho < 1.0:
        raise OutOfRange(f"treatment fraction rho={rho} outside (0, 1)")


def experiment_solve(inst, rates, rho):
    _check_rho(rho)
    return solve_matching(inst, rates.demand_at(rho), rates.pi)


def average_values(inst, result, d):
    """v*_i = sum_j x*_ij v_ij / d_i; types with zero demand get 0 and a flag."""
    d = np.asarray(d, dtype=float)
    matched = np.bincount(inst.rows, weights=result.x_edges * inst.values, minlength=inst.n_d)
    zero = d <= 0
    return np.divide(matched, d, out=np.zeros(inst.n_d), where=~zero), zero


def rct_fluid_parts(inst, rates, rho):
    """(estimate, v*, experiment solve, zero-demand flags)."""
    result = experiment_solve(inst, rates, rho)
    vbar, zero = average_values(inst, result, rates.demand_at(rho))
    return float(vbar @ rates.beta), vbar, result, zero


def rct_estimate_fluid(inst, rates, rho):
    value, _, result, _ = rct_fluid_parts(inst, rates, rho)
    if result.degenerate:
        warnings.warn(f"experiment point rho={rho} is degenerate", DegenerateExperimentPoint)
    return value


def sp_estimate_fluid(inst, rates, rho, tol=1e-9):
    """a^rho . beta; errors when rho sits on a kink of psi."""
    result = experiment_solve(inst, rates, rho)
    lo, hi = max(rho - PROBE_DELTA, 0.0), min(rho + PROBE_DELTA, 1.0)
    m_left = float(solve_matching(inst, rates.demand_at(lo), rates.pi).a @ rates.beta)
    m_right = float(solve_matching(inst, rates.demand_at(hi), rates.pi).a @ rates.beta)
    scale = problem_scale(rates.beta, objective=result.objective)
    if abs(m_left - m_right) > tol * scale:
        raise BreakpointAmbiguity(
            f"psi has a kink at rho={rho}: left slope {m_left}, right slope {m_right}")
    return float(result.a @ rates.beta)


def _poisson_weight(rates, rho):
    return (rates.lam + rates.beta) / rho + rates.lam / (1.0 - rho)


def sp_asymptotic_variance(inst, rates, rho):
    """Limit of Var(sqrt(tau) * SP estimate) at a nondegenerate experiment point."""
    a = experiment_solve(inst, rates, rho).a
    return float(np.sum(a ** 2 * _poisson_weight(rates, rho)))


def rct_asymptotic_variance(inst, rates, rho):
    """First-order (fixed v*) limit of Var(sqrt(tau) * RCT estimate)."""
    _, vbar, _, _ = rct_fluid_parts(inst, rates, rho)
    return float(np.sum(vbar ** 2 * _poisson_weight(rates, rho)))
