"""Core LP types shared by the matching and flow solvers."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from common.errors import DimensionMismatch, MarketError

__all__ = ["TOL_FEAS", "TOL_DUAL", "MatchingInstance", "SolveResult", "problem_scale", "check_vector"]

# repo-wide tolerances, multiplied by a problem scale >= 1
TOL_FEAS = 1e-9
TOL_DUAL = 1e-8

# HiGHS dual simplex returns a basic (vertex) solution, which keeps x
# integral for integral d, s and makes repeated solves bit-identical.
HIGHS_METHOD = "highs-ds"
HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def problem_scale(*arrays, objective=0.0):
    scale = max(1.0, abs(float(objective)))
    for arr in arrays:
        arr = np.asarray(arr, dtype=float)
        if arr.size:
            scale = max(scale, float(np.max(np.abs(arr))))
    return scale


def check_vector(values, length, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape != (length,):
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({length},)")
    if not np.all(np.isfinite(arr)):
        raise MarketError(f"{name} has non-finite entries")
    if np.any(arr < 0):
        raise MarketError(f"{name} must be nonnegative")
    return arr


@dataclass(frozen=True, eq=False)
class MatchingInstance:
    """Static bipartite market: demand types x supply types with match values.

    Admissible edges are kept as a row-major sorted edge list; excluded pairs are
    simply absent from the variable set.
    """
    n_d: int
    n_s: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.n_d < 1 or self.n_s < 1:
            raise DimensionMismatch(f"need n_d >= 1 and n_s >= 1, got {self.n_d} x {self.n_s}")
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise DimensionMismatch("edge arrays must be one-dimensional with equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.n_d or cols.min() < 0 or cols.max() >= self.n_s:
                raise DimensionMismatch("edge endpoint out of range")
            if not np.all(np.isfinite(values)):
                raise MarketError("match values must be finite on admissible edges")
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if rows.size > 1:
            dup = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if np.any(dup):
                raise MarketError("duplicate edge in matching instance")
        for name, arr in (("rows", rows), ("cols", cols), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_dense(cls, v, edge_mask=None):
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            v = v.reshape(1, -1)
        if v.ndim != 2:
            raise DimensionMismatch(f"value matrix must be 2-D, got shape {v.shape}")
        if edge_mask is None:
            edge_mask = np.ones(v.shape, dtype=bool)
        else:
            edge_mask = np.asarray(edge_mask, dtype=bool)
            if edge_mask.shape != v.shape:
                raise DimensionMismatch(f"edge mask shape {edge_mask.shape} != value shape {v.shape}")
        rows, cols = np.nonzero(edge_mask)
        return cls(v.shape[0], v.shape[1], rows, cols, v[rows, cols])

    @classmethod
    def from_edges(cls, n_d, n_s, rows, cols, values):
        return cls(int(n_d), int(n_s), rows, cols, values)

    @property
    def n_edges(self):
        return int(self.rows.size)

    @property
    def edge_mask(self):
        mask = np.zeros((self.n_d, self.n_s), dtype=bool)
        mask[self.rows, self.cols] = True
        return mask

    @property
    def v(self):
        """Dense value matrix; excluded pairs read as -inf."""
        dense = np.full((self.n_d, self.n_s), -np.inf)
        dense[self.rows, self.cols] = self.values
        return dense

    def isolated_demand(self):
        return np.bincount(self.rows, minlength=self.n_d) == 0

    def isolated_supply(self):
        return np.bincount(self.cols, minlength=self.n_s) == 0

    def best_value(self):
        """max_j v_ij per demand type (0 for isolated types)."""
        best = np.full(self.n_d, -np.inf)
        np.maximum.at(best, self.rows, self.values)
        best[np.isinf(best)] = 0.0
        return best

    def edge_weights(self, w):
        """Read a secondary weight matrix [n_d x n_s] on the admissible edges."""
        w = np.asarray(w, dtype=float)
        if w.shape != (self.n_d, self.n_s):
            raise DimensionMismatch(f"weight matrix shape {w.shape} != ({self.n_d}, {self.n_s})")
        out = w[self.rows, self.cols]
        if not np.all(np.isfinite(out)):
            raise MarketError("weights must be finite on admissible edges")
        return out

    def restrict_demand(self, keep):
        """Sub-instance on the demand types listed in ``keep`` (renumbered in order)."""
        keep = np.asarray(keep, dtype=np.int64)
        remap = np.full(self.n_d, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        sel = remap[self.rows] >= 0
        return MatchingInstance(int(keep.size), self.n_s,
                                remap[self.rows[sel]], self.cols[sel], self.values[sel])


@dataclass(eq=False)
class SolveResult:
    """Optimal primal/dual pair of a matching or flow LP.

    For matching problems ``x_edges`` follows the instance edge order and ``x``
    is the dense [n_d x n_s] matrix. For flow problems ``x`` is the per-edge
    flow vector, ``a`` holds retailer duals, ``b`` plant duals, and the
    capacity / conservation duals live in ``edge_duals`` / ``node_potentials``.
    """
    x_edges: np.ndarray
    a: np.ndarray
    b: np.ndarray
    objective: float
    degenerate: bool
    dual_unique_hint: bool
    primal_unique_hint: bool = False
    shape: Optional[tuple] = None
    rows: Optional[np.ndarray] = field(default=None, repr=False)
    cols: Optional[np.ndarray] = field(default=None, repr=False)
    edge_duals: Optional[np.ndarray] = None
    node_potentials: Optional[np.ndarray] = None

    @property
    def x(self):
        if self.shape is None:
            return self.x_edges
        dense = np.zeros(self.shape)
        dense[self.rows, self.cols] = self.x_edges
        return dense

    def demand_usage(self):
        return np.bincount(self.rows, weights=self.x_edges, minlength=self.shape[0])

    def supply_usage(self):
        return np.bincount(self.cols, weights=self.x_edges, minlength=self.shape[1])
