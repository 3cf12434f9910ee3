import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from common.errors import NumericalFailure

from .build import HIGHS_METHOD, HIGHS_OPTIONS, TOL_DUAL, TOL_FEAS, check_vector, problem_scale
from .matching import matching_constraints, solve_matching

__all__ = ["check_complementary_slackness", "is_degenerate", "is_primal_unique", "duality_gap",
           "dual_violation"]

# fixed generic direction used to probe the optimal face
_FACE_PROBE_SEED = 20240611


def _usage(inst, x_edges):
    usage_d = np.bincount(inst.rows, weights=x_edges, minlength=inst.n_d)
    usage_s = np.bincount(inst.cols, weights=x_edges, minlength=inst.n_s)
    return usage_d, usage_s


def check_complementary_slackness(inst, d, s, result):
    d = check_vector(d, inst.n_d, "demand")
    s = check_vector(s, inst.n_s, "supply")
    x = np.asarray(result.x_edges, dtype=float)
    a, b = np.asarray(result.a, dtype=float), np.asarray(result.b, dtype=float)
    scale = problem_scale(d, s, objective=result.objective)
    tol, dual_tol = TOL_FEAS * scale, TOL_DUAL * scale

    usage_d, usage_s = _usage(inst, x)
    positive = x > tol
    edge_tight = np.abs(a[inst.rows] + b[inst.cols] - inst.values) <= dual_tol
    if not np.all(edge_tight[positive]):
        return False
    if np.any(np.abs(a[usage_d < d - tol]) > dual_tol):
        return False
    if np.any(np.abs(b[usage_s < s - tol]) > dual_tol):
        return False
    return True


def is_degenerate(inst, d, s, result):
    """Fewer positive matches than tight capacity rows."""
    d = check_vector(d, inst.n_d, "demand")
    s = check_vector(s, inst.n_s, "supply")
    x = np.asarray(result.x_edges, dtype=float)
    tol = TOL_FEAS * problem_scale(d, s, objective=result.objective)
    usage_d, usage_s = _usage(inst, x)
    tight = int(np.count_nonzero(d - usage_d <= tol) + np.count_nonzero(s - usage_s <= tol))
    return int(np.count_nonzero(x > tol)) < tight


def duality_gap(inst, d, s, result):
    """|primal objective - dual objective|."""
    dual_obj = float(np.dot(result.a, d) + np.dot(result.b, s))
    return abs(result.objective - dual_obj)


def dual_violation(inst, result):
    """Largest violation of a_i + b_j >= v_ij and a, b >= 0."""
    viol = [0.0, float(-np.min(result.a, initial=0.0)), float(-np.min(result.b, initial=0.0))]
    if inst.n_edges:
        viol.append(float(np.max(inst.values - result.a[inst.rows] - result.b[inst.cols])))
    return max(viol)


def _face_extreme(inst, d, s, objective, tol, c, sign):
    A = matching_constraints(inst)
    A_ub = sparse.vstack([A, sparse.csr_matrix(-inst.values.reshape(1, -1))]).tocsr()
    b_ub = np.concatenate([d, s, [-(objective - tol)]])
    res = linprog(sign * c, A_ub=A_ub, b_ub=b_ub, bounds=(0, None),
                  method=HIGHS_METHOD, options=HIGHS_OPTIONS)
    if res.status != 0:
        raise NumericalFailure(f"optimal-face probe failed (status {res.status}): {res.message}")
    return float(c @ res.x)


def is_primal_unique(inst, d, s, result=None):
    """Whether the optimal matching is the only one.

    Strict complementarity of the returned pair settles it directly. Otherwise
    a generic linear function is maximised and minimised over the optimal
    face; it has a single point iff both extremes agree.
    """
    d = check_vector(d, inst.n_d, "demand")
    s = check_vector(s, inst.n_s, "supply")
    if result is None:
        result = solve_matching(inst, d, s)
    if result.primal_unique_hint or inst.n_edges == 0:
        return True
    scale = problem_scale(d, s, objective=result.objective)
    c = np.random.default_rng(_FACE_PROBE_SEED).uniform(1.0, 2.0, size=inst.n_edges)
    hi = _face_extreme(inst, d, s, result.objective, TOL_FEAS * scale, c, -1.0)
    lo = _face_extreme(inst, d, s, result.objective, TOL_FEAS * scale, c, 1.0)
    return abs(hi - lo) <= 1e-6 * max(1.0, abs(hi), abs(lo))
