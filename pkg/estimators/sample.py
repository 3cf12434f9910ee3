"""Finite-density estimators evaluated on one simulated experiment."""
import numpy as np

from .build import ESTIMATOR_REGISTRY

__all__ = ["rct_estimate_sample", "rct_estimate_sample_rb", "sp_estimate_sample",
           "realised_average_values"]


def _group_weights(draw):
    return 1.0 / draw.rho, 1.0 / (1.0 - draw.rho)


def _edge_total(inst, X):
    X = np.asarray(X, dtype=float)
    return float(X[inst.rows, inst.cols] @ inst.values) if inst.n_edges else 0.0


def rct_estimate_sample(draw, split, inst):
    """Difference of group values, each rescaled by its group fraction."""
    w_t, w_c = _group_weights(draw)
    value_t = _edge_total(inst, split.X_treatment)
    value_c = _edge_total(inst, split.X_control)
    return (w_t * value_t - w_c * value_c) / draw.tau


def realised_average_values(inst, x_total, D):
    """V_i = sum_j x_ij v_ij / D_i, zero for types with no demand."""
    x_total = np.asarray(x_total, dtype=float)
    D = np.asarray(D, dtype=float)
    matched = np.bincount(inst.rows, weights=x_total[inst.rows, inst.cols] * inst.values,
                          minlength=inst.n_d)
    return np.divide(matched, D, out=np.zeros(inst.n_d), where=D > 0)


def rct_estimate_sample_rb(draw, x_total, inst):
    """Conditional expectation of the RCT estimator over the blind split of matches."""
    w_t, w_c = _group_weights(draw)
    vbar = realised_average_values(inst, x_total, draw.D_experiment)
    return float(vbar @ (w_t * draw.D_treatment - w_c * draw.D_control)) / draw.tau


def sp_estimate_sample(draw, duals_a):
    w_t, w_c = _group_weights(draw)
    return float(np.asarray(duals_a) @ (w_t * draw.D_treatment - w_c * draw.D_control)) / draw.tau


@ESTIMATOR_REGISTRY.register()
def rct_raw(cycle):
    return rct_estimate_sample(cycle.draw, cycle.split, cycle.inst)


@ESTIMATOR_REGISTRY.register()
def rct_rb(cycle):
    return rct_estimate_sample_rb(cycle.draw, cycle.x_total, cycle.inst)


@ESTIMATOR_REGISTRY.register()
def sp(cycle):
    return sp_estimate_sample(cycle.draw, cycle.duals_a)
