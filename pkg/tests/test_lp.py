import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linprog

from common.errors import DimensionMismatch, MarketError
from lp import (TOL_DUAL, FlowNetwork, MatchingInstance, SolveResult, check_complementary_slackness,
                decompose_paths, dual_violation, duality_gap, is_degenerate, is_primal_unique,
                problem_scale, solve_matching, solve_min_cost_flow)
from scenario import build_example_network


def _random_problem(rng, n_max=8, integral=False):
    n_d, n_s = rng.integers(1, n_max + 1, size=2)
    inst = MatchingInstance.from_dense(rng.uniform(0, 10, size=(n_d, n_s)))
    if integral:
        return inst, rng.integers(0, 6, size=n_d).astype(float), rng.integers(0, 6, size=n_s).astype(float)
    return inst, rng.uniform(0, 5, size=n_d), rng.uniform(0, 5, size=n_s)


class TestSolveMatching:
    def test_geometric_fill(self, geometric):
        inst, _ = geometric
        res = solve_matching(inst, [3.5], np.ones(6))
        assert res.objective == pytest.approx(3.625, abs=1e-12)
        np.testing.assert_allclose(res.x, [[1, 1, 1, 0.5, 0, 0]], atol=1e-12)
        np.testing.assert_allclose(res.a, [0.25], atol=1e-12)
        np.testing.assert_allclose(res.b, [1.75, 0.75, 0.25, 0, 0, 0], atol=1e-12)
        assert not res.degenerate

    def test_empty_demand(self, geometric):
        inst, _ = geometric
        res = solve_matching(inst, [0.0], np.ones(6))
        assert res.objective == 0.0
        assert np.all(res.x == 0)
        np.testing.assert_allclose(res.b, 0.0, atol=1e-12)
        assert res.a[0] >= inst.best_value()[0] - 1e-12

    def test_two_by_one(self, two_by_one):
        res = solve_matching(two_by_one, [2, 2], [3])
        np.testing.assert_array_equal(res.x, [[2], [1]])
        assert res.objective == pytest.approx(5.0)
        np.testing.assert_allclose(res.a, [1, 0], atol=1e-12)
        np.testing.assert_allclose(res.b, [1], atol=1e-12)
        assert not res.degenerate
        assert res.dual_unique_hint and res.primal_unique_hint

    def test_dimension_mismatch(self, two_by_one):
        with pytest.raises(DimensionMismatch):
            solve_matching(two_by_one, [1, 1, 1], [1])

    def test_negative_capacity(self, two_by_one):
        with pytest.raises(MarketError):
            solve_matching(two_by_one, [1, -1], [1])

    def test_excluded_edges_stay_zero(self):
        inst = MatchingInstance.from_dense([[5.0, 1.0], [1.0, 5.0]], edge_mask=[[False, True], [True, True]])
        res = solve_matching(inst, [1, 1], [1, 1])
        assert res.x[0, 0] == 0.0
        assert res.objective == pytest.approx(5.0)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        inst, d, s = _random_problem(rng)
        r1, r2 = solve_matching(inst, d, s), solve_matching(inst, d, s)
        np.testing.assert_array_equal(r1.x, r2.x)
        np.testing.assert_array_equal(r1.a, r2.a)
        np.testing.assert_array_equal(r1.b, r2.b)

    def test_strong_duality_and_slackness(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            inst, d, s = _random_problem(rng)
            res = solve_matching(inst, d, s)
            scale = problem_scale(d, s, objective=res.objective)
            assert duality_gap(inst, d, s, res) <= TOL_DUAL * scale
            assert dual_violation(inst, res) <= TOL_DUAL * scale
            assert check_complementary_slackness(inst, d, s, res)
            assert np.all(res.demand_usage() <= d + 1e-9 * scale)
            assert np.all(res.supply_usage() <= s + 1e-9 * scale)

    def test_integral_capacities_give_integral_matching(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            inst, d, s = _random_problem(rng, integral=True)
            x = solve_matching(inst, d, s).x
            np.testing.assert_array_equal(x, np.round(x))

    @pytest.mark.parametrize("tau", [2, 7, 100])
    def test_scale_invariance(self, tau):
        rng = np.random.default_rng(tau)
        for _ in range(30):
            inst, d, s = _random_problem(rng)
            big = solve_matching(inst, d, s)
            small = solve_matching(inst, d / tau, s / tau)
            assert big.objective == pytest.approx(tau * small.objective, rel=1e-9, abs=1e-9)
            if is_primal_unique(inst, d, s, big):
                scale = problem_scale(d, s)
                np.testing.assert_allclose(small.x, big.x / tau, atol=1e-9 * scale)
            if not big.degenerate and not small.degenerate:
                np.testing.assert_allclose(small.a, big.a, atol=TOL_DUAL * 10)

    def test_unit_increments_are_nonincreasing(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            inst, d, s = _random_problem(rng, n_max=5, integral=True)
            i = int(rng.integers(inst.n_d))
            e_i = np.eye(inst.n_d)[i]
            values = [solve_matching(inst, d + k * e_i, s).objective for k in range(5)]
            steps = np.diff(values)
            assert np.all(np.diff(steps) <= 1e-9 * max(1.0, values[-1]))


class TestDiagnostics:
    def test_forged_duals_fail_slackness(self, two_by_one):
        res = solve_matching(two_by_one, [2, 2], [3])
        forged = SolveResult(x_edges=res.x_edges, a=np.zeros(2), b=np.array([2.0]), objective=5.0,
                             degenerate=False, dual_unique_hint=True, shape=res.shape,
                             rows=res.rows, cols=res.cols)
        assert not check_complementary_slackness(two_by_one, [2, 2], [3], forged)

    def test_zero_solution_satisfies_slackness(self, two_by_one):
        zero = SolveResult(x_edges=np.zeros(2), a=np.zeros(2), b=np.zeros(1), objective=0.0,
                           degenerate=False, dual_unique_hint=True, shape=(2, 1),
                           rows=two_by_one.rows, cols=two_by_one.cols)
        assert check_complementary_slackness(two_by_one, [0, 0], [0], zero)

    def test_unit_type_perfect_matching_is_degenerate(self):
        inst = MatchingInstance.from_dense(np.eye(3) + 0.1)
        res = solve_matching(inst, np.ones(3), np.ones(3))
        assert res.degenerate
        assert is_degenerate(inst, np.ones(3), np.ones(3), res)
        assert not res.dual_unique_hint

    def test_nondegenerate_example(self, two_by_one):
        res = solve_matching(two_by_one, [2, 2], [3])
        assert not is_degenerate(two_by_one, [2, 2], [3], res)

    def test_negative_values_leave_everything_slack(self):
        inst = MatchingInstance.from_dense([[-1.0, -2.0]])
        res = solve_matching(inst, [2.0], [3.0, 3.0])
        assert res.objective == 0.0
        assert not is_degenerate(inst, [2.0], [3.0, 3.0], res)

    def test_primal_uniqueness(self, two_by_one):
        # degenerate but unique: demand 1 and the supply are both exhausted by x = (3, 0)
        res = solve_matching(two_by_one, [3, 2], [3])
        assert res.degenerate
        assert is_primal_unique(two_by_one, [3, 2], [3], res)
        tie = MatchingInstance.from_dense([[1.0, 1.0]])
        assert not is_primal_unique(tie, [1.0], [1.0, 1.0])


def _single_path():
    return FlowNetwork.from_edges(["p"], ["r"], [("p", "w", 10, 1.0), ("w", "r", 10, 1.0)],
                                  production_cost={"p": 3.0}, price={"r": 10.0})


class TestMinCostFlow:
    def test_single_path(self):
        res = solve_min_cost_flow(_single_path(), [4], [8])
        np.testing.assert_allclose(res.x, [4, 4], atol=1e-9)
        assert res.objective == pytest.approx(20.0)
        np.testing.assert_allclose(res.a, [5.0], atol=1e-9)
        np.testing.assert_allclose(res.b, [0.0], atol=1e-9)

    def test_zero_demand(self):
        res = solve_min_cost_flow(_single_path(), [0], [8])
        assert res.objective == 0.0
        assert np.all(res.x == 0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_min_cost_flow(_single_path(), [1, 2], [8])

    def test_rejects_cycle(self):
        with pytest.raises(MarketError):
            FlowNetwork.from_edges(["p"], ["r"], [("p", "a", 1, 0), ("a", "b", 1, 0), ("b", "a", 1, 0),
                                                  ("b", "r", 1, 0)], {"p": 0.0}, {"r": 1.0})

    def test_rejects_dead_end(self):
        with pytest.raises(MarketError):
            FlowNetwork.from_edges(["p"], ["r"], [("p", "w", 1, 0), ("w", "r", 1, 0), ("p", "x", 1, 0)],
                                   {"p": 0.0}, {"r": 1.0})

    def test_example_network_matches_generic_lp(self):
        net = build_example_network(seed=7)
        D, S = np.array([130.0, 120.0]), np.array([130.0, 190.0])
        res = solve_min_cost_flow(net, D, S)

        # independent formulation from the signed incidence matrix
        nodes = list(net.graph.nodes)
        inc = nx.incidence_matrix(net.graph, nodelist=nodes, edgelist=net.edges, oriented=True).toarray()
        internal = [nodes.index(n) for n in net.internal]
        retail = [nodes.index(n) for n in net.retailers]
        plants = [nodes.index(n) for n in net.plants]
        A_ub = np.vstack([inc[retail], -inc[plants]])
        ref = linprog(-net.edge_values(), A_ub=A_ub, b_ub=np.concatenate([D, S]),
                      A_eq=inc[internal], b_eq=np.zeros(len(internal)),
                      bounds=list(zip(np.zeros(len(net.edges)), net.capacities)), method="highs-ipm")
        assert ref.status == 0
        assert res.objective == pytest.approx(-ref.fun, abs=1e-6)

    def test_conservation_and_decomposition(self):
        net = build_example_network(seed=3)
        res = solve_min_cost_flow(net, [100, 150], [130, 190])
        A_eq, _ = net._constraints()
        np.testing.assert_allclose(A_eq @ res.x, 0.0, atol=1e-9)
        paths = decompose_paths(net, res.x)
        inflow = {r: sum(res.x[k] for k, (_, j) in enumerate(net.edges) if j == r) for r in net.retailers}
        for r in net.retailers:
            served = sum(amount for path, amount in paths if net.edges[path[-1]][1] == r)
            assert served == pytest.approx(inflow[r], abs=1e-9)
        assert np.all(res.a >= -1e-9) and np.all(res.a <= 60.0 + 1e-9)
