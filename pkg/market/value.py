"""Fluid value functions of the matching market.

phi is the optimal matching value, psi(eta) = phi(lam + eta * beta, pi) the
partial-treatment value function. psi is concave and piecewise linear with
slope a^eta . beta on each piece, where a^eta are the demand duals.
"""
import logging

import numpy as np

from common.errors import ConfigError, EpsilonOutOfRange, MaxDepthExceeded, NotUnitDemand, OutOfRange
from lp import check_vector, problem_scale, solve_matching

from .build import PsiProfile

__all__ = [
    "phi", "psi", "build_psi_profile", "gte_fluid", "gte_via_integral",
    "marginal_values", "right_left_shadow_prices", "perturb_demand",
    "perturbed_solve", "is_unit_demand", "PROBE_DELTA", "MAX_PROFILE_DEPTH",
]

logger = logging.getLogger(__name__)

PROBE_DELTA = 1e-7
MAX_PROFILE_DEPTH = 60


def phi(inst, d, s):
    return solve_matching(inst, d, s).objective


def psi(inst, rates, eta):
    if not 0.0 <= eta <= 1.0:
        raise OutOfRange(f"eta={eta} outside [0, 1]")
    return phi(inst, rates.demand_at(eta), rates.pi)


def gte_fluid(inst, rates):
    """Fluid global treatment effect phi(lam + beta, pi) - phi(lam, pi)."""
    return phi(inst, rates.demand_at(1.0), rates.pi) - phi(inst, rates.demand_at(0.0), rates.pi)


class _PsiOracle:
    """Memoised LP solves along the segment eta -> lam + eta * beta."""

    def __init__(self, inst, rates):
        self.inst = inst
        self.rates = rates
        self._cache = {}

    def solve(self, eta):
        eta = float(eta)
        if eta not in self._cache:
            self._cache[eta] = solve_matching(self.inst, self.rates.demand_at(eta), self.rates.pi)
        return self._cache[eta]

    def value(self, eta):
        return self.solve(eta).objective

    def slope(self, eta):
        return float(self.solve(eta).a @ self.rates.beta)


def _refine(oracle, lo, hi, tol, delta, depth, pieces):
    if depth > MAX_PROFILE_DEPTH:
        raise MaxDepthExceeded(f"psi profile refinement exceeded depth {MAX_PROFILE_DEPTH} near eta={lo}")
    v_lo, v_hi = oracle.value(lo), oracle.value(hi)
    if hi - lo <= 4 * delta:
        pieces.append((lo, hi))
        return
    m_lo = oracle.slope(lo + delta)
    m_hi = oracle.slope(hi - delta)
    mid = 0.5 * (lo + hi)
    if abs(m_lo - m_hi) <= tol and abs(oracle.value(mid) - 0.5 * (v_lo + v_hi)) <= tol:
        pieces.append((lo, hi))
        return

    cut = mid
    if m_lo - m_hi > tol:
        # the two one-sided tangents meet at the candidate breakpoint
        cand = (v_hi - v_lo + m_lo * lo - m_hi * hi) / (m_lo - m_hi)
        if lo + 2 * delta < cand < hi - 2 * delta:
            cut = cand
            if abs(oracle.value(cand) - (v_lo + m_lo * (cand - lo))) <= tol:
                pieces.append((lo, cand))
                pieces.append((cand, hi))
                return
    _refine(oracle, lo, cut, tol, delta, depth + 1, pieces)
    _refine(oracle, cut, hi, tol, delta, depth + 1, pieces)


def build_psi_profile(inst, rates, tol=1e-9, delta=PROBE_DELTA):
    """Breakpoints, values and slopes of psi on [0, 1].

    Slopes are probed strictly inside candidate pieces (offset ``delta``) since
    duals at a breakpoint are not unique. Adjacent pieces whose slopes agree
    within the tolerance are merged.
    """
    oracle = _PsiOracle(inst, rates)
    scale = problem_scale(oracle.value(0.0), oracle.value(1.0))
    tol_eff = tol * scale
    pieces = []
    _refine(oracle, 0.0, 1.0, tol_eff, delta, 0, pieces)

    etas = [pieces[0][0]] + [hi for _, hi in pieces]
    values = [oracle.value(e) for e in etas]
    slopes = [(values[k + 1] - values[k]) / (etas[k + 1] - etas[k]) for k in range(len(pieces))]

    keep_e, keep_v, keep_m = [etas[0]], [values[0]], []
    for k, m in enumerate(slopes):
        if keep_m and abs(keep_m[-1] - m) <= tol_eff:
            keep_e[-1], keep_v[-1] = etas[k + 1], values[k + 1]
            keep_m[-1] = (keep_v[-1] - keep_v[-2]) / (keep_e[-1] - keep_e[-2])
        else:
            keep_e.append(etas[k + 1])
            keep_v.append(values[k + 1])
            keep_m.append(m)
    profile = PsiProfile(np.array(keep_e), np.array(keep_v), np.array(keep_m))
    logger.debug(f"psi profile: {profile.n_pieces} pieces from {len(oracle._cache)} solves")
    return profile


def gte_via_integral(profile):
    """Integral of psi' over [0, 1], summed piece by piece."""
    return float(np.sum(profile.slopes * np.diff(profile.breakpoints)))


def _is_integral(arr):
    return bool(np.all(arr == np.round(arr)))


def marginal_values(inst, d, s, direction="right", method="auto", return_flags=False):
    """Per-type unit marginal values of demand.

    right: phi(d + e_i, s) - phi(d, s); left: phi(d, s) - phi(d - e_i, s).
    Types with d_i < 1 cannot be decremented by a unit; under ``left`` they
    report the right value and are flagged.
    ``method``: 'bruteforce' (n_d + 1 solves), 'duals' (read a from one solve)
    or 'auto' (duals when d, s are integral and the optimum is nondegenerate).
    """
    if direction not in ("left", "right"):
        raise ConfigError(f"direction must be 'left' or 'right', got {direction!r}")
    d = check_vector(d, inst.n_d, "demand")
    s = check_vector(s, inst.n_s, "supply")
    base = solve_matching(inst, d, s)
    flags = np.zeros(inst.n_d, dtype=bool)
    if direction == "left":
        flags = d < 1.0

    use_duals = method == "duals" or (
        method == "auto" and base.dual_unique_hint and _is_integral(d) and _is_integral(s))
    if use_duals:
        values = base.a.copy()
    else:
        values = np.empty(inst.n_d)
        for i in range(inst.n_d):
            e_i = np.zeros(inst.n_d)
            e_i[i] = 1.0
            if direction == "right" or flags[i]:
                values[i] = solve_matching(inst, d + e_i, s).objective - base.objective
            else:
                values[i] = base.objective - solve_matching(inst, d - e_i, s).objective
    if np.any(flags):
        logger.warning(f"{int(flags.sum())} demand type(s) below one unit report right marginals")
    if return_flags:
        return values, flags
    return values


def right_left_shadow_prices(inst, d, s):
    """(left, right) one-sided unit marginal values of every demand type."""
    left = marginal_values(inst, d, s, direction="left", method="bruteforce")
    right = marginal_values(inst, d, s, direction="right", method="bruteforce")
    return left, right


def is_unit_demand(d):
    d = np.asarray(d, dtype=float)
    return bool(np.all((d == 0.0) | (d == 1.0)) and np.any(d == 1.0))


def perturb_demand(d, epsilon):
    """Lower every unit demand by epsilon, 0 < epsilon < 1/n_d.

    On a unit-type problem the perturbed matching is nondegenerate and its
    demand duals are the left shadow prices of the unperturbed problem.
    Zero entries are absent types and stay at zero.
    """
    d = np.asarray(d, dtype=float)
    if not is_unit_demand(d):
        raise NotUnitDemand("perturbation applies to 0/1 unit-type demand vectors")
    n_d = int(np.count_nonzero(d))
    if not 0.0 < epsilon < 1.0 / n_d:
        raise EpsilonOutOfRange(f"epsilon={epsilon} outside (0, 1/{n_d})")
    return d - epsilon * (d > 0)


def perturbed_solve(inst, d, s, epsilon=None):
    """Solve at the perturbed unit demand; epsilon defaults to 1/(2 n_d)."""
    if epsilon is None:
        epsilon = 0.5 / max(int(np.count_nonzero(np.asarray(d))), 1)
    result = solve_matching(inst, perturb_demand(d, epsilon), s)
    if result.degenerate and np.all(np.asarray(d) > 0):
        logger.warning("perturbed unit-type matching is still degenerate")
    return result
