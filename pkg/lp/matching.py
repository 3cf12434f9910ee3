import logging

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from common.errors import NumericalFailure

from .build import (HIGHS_METHOD, HIGHS_OPTIONS, TOL_DUAL, TOL_FEAS, SolveResult,
                    check_vector, problem_scale)

__all__ = ["solve_matching", "matching_constraints"]

logger = logging.getLogger(__name__)


def matching_constraints(inst):
    """Capacity rows [demand; supply] x edge columns of the matching LP."""
    k = np.arange(inst.n_edges)
    data = np.ones(2 * inst.n_edges)
    row_idx = np.concatenate([inst.rows, inst.n_d + inst.cols])
    col_idx = np.concatenate([k, k])
    return sparse.csr_matrix((data, (row_idx, col_idx)), shape=(inst.n_d + inst.n_s, inst.n_edges))


def _is_integral(arr):
    return bool(np.all(arr == np.round(arr)))


def _support_and_tight(x, usage_d, usage_s, d, s, tol):
    support = int(np.count_nonzero(x > tol))
    tight_d = d - usage_d <= tol
    tight_s = s - usage_s <= tol
    return support, tight_d, tight_s


def _package(inst, d, s, x, a, b):
    objective = float(inst.values @ x) if inst.n_edges else 0.0
    scale = problem_scale(d, s, objective=objective)
    tol = TOL_FEAS * scale
    usage_d = np.bincount(inst.rows, weights=x, minlength=inst.n_d)
    usage_s = np.bincount(inst.cols, weights=x, minlength=inst.n_s)
    support, tight_d, tight_s = _support_and_tight(x, usage_d, usage_s, d, s, tol)
    degenerate = support < int(tight_d.sum() + tight_s.sum())

    # strict complementarity w.r.t. the returned dual certifies a unique primal
    dual_tol = TOL_DUAL * scale
    reduced = a[inst.rows] + b[inst.cols] - inst.values
    zero_edges = x <= tol
    primal_unique = (bool(np.all(reduced[zero_edges] > dual_tol))
                     and bool(np.all(a[tight_d] > dual_tol))
                     and bool(np.all(b[tight_s] > dual_tol)))
    return SolveResult(
        x_edges=x, a=a, b=b, objective=objective,
        degenerate=bool(degenerate), dual_unique_hint=not degenerate,
        primal_unique_hint=primal_unique,
        shape=(inst.n_d, inst.n_s), rows=inst.rows, cols=inst.cols,
    )


def solve_matching(inst, d, s):
    """Solve max sum v_ij x_ij s.t. sum_j x_ij <= d_i, sum_i x_ij <= s_j, x >= 0.

    Returns the optimal matching together with the demand duals ``a`` and
    supply duals ``b`` of the capacity rows. Degenerate optima still return one
    vertex of the optimal dual face, with ``dual_unique_hint`` unset.
    """
    d = check_vector(d, inst.n_d, "demand")
    s = check_vector(s, inst.n_s, "supply")

    if inst.n_edges == 0:
        return _package(inst, d, s, np.zeros(0), np.zeros(inst.n_d), np.zeros(inst.n_s))

    res = linprog(
        -inst.values,
        A_ub=matching_constraints(inst),
        b_ub=np.concatenate([d, s]),
        bounds=(0, None),
        method=HIGHS_METHOD,
        options=HIGHS_OPTIONS,
    )
    if res.status != 0:
        raise NumericalFailure(f"matching LP failed (status {res.status}): {res.message}")

    scale = problem_scale(d, s, objective=-res.fun)
    x = np.asarray(res.x, dtype=float)
    x[x < TOL_FEAS * scale] = 0.0
    if _is_integral(d) and _is_integral(s):
        rounded = np.round(x)
        if np.max(np.abs(x - rounded), initial=0.0) > 1e-6 * scale:
            logger.warning("non-integral vertex returned for integral capacities")
        else:
            x = rounded

    duals = np.maximum(-np.asarray(res.ineqlin.marginals, dtype=float), 0.0)
    return _package(inst, d, s, x, duals[:inst.n_d].copy(), duals[inst.n_d:].copy())
