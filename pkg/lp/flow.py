"""Single-commodity flow networks from plants to retailers."""
import logging

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from common.errors import DimensionMismatch, MarketError, NumericalFailure

from .build import HIGHS_METHOD, HIGHS_OPTIONS, TOL_FEAS, SolveResult, check_vector, problem_scale

__all__ = ["FlowNetwork", "solve_min_cost_flow", "decompose_paths"]

logger = logging.getLogger(__name__)

ROLES = ("plant", "retailer", "internal")


class FlowNetwork:
    """DAG of plants -> internal nodes -> retailers with edge capacities and costs.

    Node attribute ``role``; edge attributes ``capacity`` (u) and ``cost`` (c).
    Plants carry a per-unit production cost and retailers a per-unit price.
    """

    def __init__(self, graph, production_cost, price):
        self.graph = graph
        self.production_cost = dict(production_cost)
        self.price = dict(price)
        for node, role in graph.nodes(data="role"):
            if role not in ROLES:
                raise MarketError(f"node {node!r} has invalid role {role!r}")
        self.plants = [n for n, r in graph.nodes(data="role") if r == "plant"]
        self.retailers = [n for n, r in graph.nodes(data="role") if r == "retailer"]
        self.internal = [n for n, r in graph.nodes(data="role") if r == "internal"]
        self.edges = list(graph.edges())
        self._validate()

    @classmethod
    def from_edges(cls, plants, retailers, edges, production_cost, price):
        """``edges``: iterable of (tail, head, capacity, cost); other nodes are internal."""
        graph = nx.DiGraph()
        for p in plants:
            graph.add_node(p, role="plant")
        for r in retailers:
            graph.add_node(r, role="retailer")
        for tail, head, capacity, cost in edges:
            for node in (tail, head):
                if node not in graph:
                    graph.add_node(node, role="internal")
            graph.add_edge(tail, head, capacity=float(capacity), cost=float(cost))
        return cls(graph, production_cost, price)

    def _validate(self):
        if not self.plants or not self.retailers:
            raise MarketError("flow network needs at least one plant and one retailer")
        if not nx.is_directed_acyclic_graph(self.graph):
            raise MarketError("flow network must be acyclic")
        for p in self.plants:
            if p not in self.production_cost:
                raise MarketError(f"missing production cost for plant {p!r}")
        for r in self.retailers:
            if r not in self.price:
                raise MarketError(f"missing price for retailer {r!r}")
        reach_from_plants = set().union(*(nx.descendants(self.graph, p) for p in self.plants))
        reach_to_retailers = set().union(*(nx.ancestors(self.graph, r) for r in self.retailers))
        for n in self.internal:
            if n not in reach_from_plants or n not in reach_to_retailers:
                raise MarketError(f"internal node {n!r} is not on a plant -> retailer path")
        if np.any(self.capacities < 0):
            raise MarketError("edge capacities must be nonnegative")

    @property
    def capacities(self):
        return np.array([self.graph.edges[e]["capacity"] for e in self.edges], dtype=float)

    @property
    def costs(self):
        return np.array([self.graph.edges[e]["cost"] for e in self.edges], dtype=float)

    def edge_values(self):
        """Per-unit value of each edge: -cost, minus production at plants, plus price at retailers."""
        values = -self.costs
        for k, (i, j) in enumerate(self.edges):
            if i in self.production_cost:
                values[k] -= self.production_cost[i]
            if j in self.price:
                values[k] += self.price[j]
        return values

    def _constraints(self):
        n_e = len(self.edges)
        node_row = {n: k for k, n in enumerate(self.internal)}
        retailer_row = {n: k for k, n in enumerate(self.retailers)}
        plant_row = {n: len(self.retailers) + k for k, n in enumerate(self.plants)}
        eq_r, eq_c, eq_v, ub_r, ub_c = [], [], [], [], []
        for k, (i, j) in enumerate(self.edges):
            if j in node_row:
                eq_r.append(node_row[j]); eq_c.append(k); eq_v.append(1.0)
            if i in node_row:
                eq_r.append(node_row[i]); eq_c.append(k); eq_v.append(-1.0)
            if j in retailer_row:
                ub_r.append(retailer_row[j]); ub_c.append(k)
            if i in plant_row:
                ub_r.append(plant_row[i]); ub_c.append(k)
        A_eq = sparse.csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(self.internal), n_e))
        A_ub = sparse.csr_matrix((np.ones(len(ub_r)), (ub_r, ub_c)),
                                 shape=(len(self.retailers) + len(self.plants), n_e))
        return A_eq, A_ub


def solve_min_cost_flow(net, retail_demand, plant_capacity):
    """Maximise net value of flow subject to conservation, edge capacities,
    retailer demand and plant capacity.

    ``a`` are the retailer-demand duals, ``b`` the plant-capacity duals,
    ``edge_duals`` the capacity duals and ``node_potentials`` the conservation
    duals of the internal nodes.
    """
    D = check_vector(retail_demand, len(net.retailers), "retail demand")
    S = check_vector(plant_capacity, len(net.plants), "plant capacity")
    values = net.edge_values()
    u = net.capacities
    A_eq, A_ub = net._constraints()
    b_ub = np.concatenate([D, S])

    res = linprog(
        -values,
        A_ub=A_ub, b_ub=b_ub,
        A_eq=A_eq if A_eq.shape[0] else None,
        b_eq=np.zeros(A_eq.shape[0]) if A_eq.shape[0] else None,
        bounds=list(zip(np.zeros_like(u), u)),
        method=HIGHS_METHOD,
        options=HIGHS_OPTIONS,
    )
    if res.status != 0:
        raise NumericalFailure(f"flow LP failed (status {res.status}): {res.message}")

    scale = problem_scale(D, S, u, objective=-res.fun)
    tol = TOL_FEAS * scale
    x = np.asarray(res.x, dtype=float)
    x[x < tol] = 0.0
    over = x > u
    x[over] = u[over]

    duals = np.maximum(-np.asarray(res.ineqlin.marginals, dtype=float), 0.0)
    n_r = len(net.retailers)
    edge_duals = np.maximum(-np.asarray(res.upper.marginals, dtype=float), 0.0)
    if A_eq.shape[0]:
        potentials = -np.asarray(res.eqlin.marginals, dtype=float)
    else:
        potentials = np.zeros(0)

    usage = A_ub @ x
    tight_rows = int(np.count_nonzero(b_ub - usage <= tol)) + A_eq.shape[0]
    interior = int(np.count_nonzero((x > tol) & (x < u - tol)))
    degenerate = interior < tight_rows
    return SolveResult(
        x_edges=x, a=duals[:n_r].copy(), b=duals[n_r:].copy(),
        objective=float(values @ x), degenerate=bool(degenerate),
        dual_unique_hint=not degenerate,
        edge_duals=edge_duals, node_potentials=potentials,
    )


def decompose_paths(net, flow, tol=TOL_FEAS):
    """Greedy path peeling of a plant -> retailer flow.

    Starting from the plants in order, repeatedly follow the outgoing edge with
    the largest remaining flow (lowest edge index on ties) down to a retailer
    and peel off the bottleneck. Returns a list of (path_edges, amount).
    """
    remaining = np.array(flow, dtype=float)
    if remaining.shape != (len(net.edges),):
        raise DimensionMismatch("flow vector does not match network edges")
    out_edges = {n: [] for n in net.graph.nodes}
    for k, (i, _) in enumerate(net.edges):
        out_edges[i].append(k)
    retailers = set(net.retailers)
    paths = []
    for plant in net.plants:
        while True:
            cand = [k for k in out_edges[plant] if remaining[k] > tol]
            if not cand:
                break
            path, node = [], plant
            while node not in retailers:
                cand = [k for k in out_edges[node] if remaining[k] > tol]
                if not cand:
                    break
                k = max(cand, key=lambda e: (remaining[e], -e))
                path.append(k)
                node = net.edges[k][1]
            if node not in retailers:
                # conservation residue below tolerance
                for k in path:
                    remaining[k] = 0.0
                continue
            amount = float(min(remaining[k] for k in path))
            for k in path:
                remaining[k] -= amount
            paths.append((path, amount))
    return paths
