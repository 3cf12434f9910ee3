"""Poisson draws of one matching cycle and the blind split of its matches."""
import numpy as np

from common.errors import InconsistentCounts
from common.misc import seed_record
from estimators import ExperimentDraw, MatchSplit

__all__ = ["draw_experiment", "split_matches"]


def draw_experiment(rates, tau, rho, seed):
    """Control demand ~ Poisson((1-rho) lam tau), treatment ~ Poisson(rho (lam+beta) tau),
    supply ~ Poisson(pi tau)."""
    rng = np.random.default_rng(seed)
    D_control = rng.poisson(rates.control_rates(rho) * tau)
    D_treatment = rng.poisson(np.maximum(rates.treatment_rates(rho), 0.0) * tau)
    S = rng.poisson(rates.pi * tau)
    return ExperimentDraw(float(tau), float(rho), D_control, D_treatment, S, seed_record(seed))


def _as_counts(values, name):
    arr = np.asarray(values, dtype=float)
    counts = np.rint(arr)
    if np.any(np.abs(arr - counts) > 1e-9) or np.any(counts < 0):
        raise InconsistentCounts(f"{name} must hold nonnegative integer counts")
    return counts.astype(np.int64)


def split_matches(x_total, D_control, D_experiment, seed):
    """Label D_control of the D_experiment units of each demand type as control,
    uniformly at random.

    The units of type i fall into categories matched-to-j and unmatched, so the
    control matches form a multivariate hypergeometric draw and
    E[X_control_i | x] = D_control_i / D_experiment_i * x_i.
    """
    x = _as_counts(x_total, "x_total")
    D_c = _as_counts(D_control, "D_control")
    D = _as_counts(D_experiment, "D_experiment")
    if x.ndim != 2 or x.shape[0] != D.shape[0] or D_c.shape != D.shape:
        raise InconsistentCounts("x_total rows, D_control and D_experiment disagree in length")
    if np.any(D_c > D):
        raise InconsistentCounts("control counts exceed experiment counts")
    unmatched = D - x.sum(axis=1)
    if np.any(unmatched < 0):
        raise InconsistentCounts("matched units exceed experiment demand")

    rng = np.random.default_rng(seed)
    X_control = np.zeros_like(x)
    for i in range(x.shape[0]):
        if D_c[i] == 0:
            continue
        if D_c[i] == D[i]:
            X_control[i] = x[i]
            continue
        colors = np.append(x[i], unmatched[i])
        X_control[i] = rng.multivariate_hypergeometric(colors, int(D_c[i]))[:-1]
    return MatchSplit(X_control, x - X_control)
