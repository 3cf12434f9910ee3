import numpy as np
import pytest

from common.errors import BreakpointAmbiguity, ConfigError, InconsistentCounts, OutOfRange
from estimators import (ExperimentDraw, MatchSplit, bias_report, build_estimators,
                        expected_sp_uniform_rho, rct_linearisation, sp_linearisation,
                        rct_asymptotic_variance, rct_estimate_fluid,
                        rct_estimate_sample, rct_estimate_sample_rb, sp_asymptotic_variance,
                        sp_estimate_fluid, sp_estimate_sample)
from lp import MatchingInstance, problem_scale
from market import MarketRates, build_psi_profile, gte_fluid, psi


class TestFluidEstimators:
    def test_geometric(self, geometric):
        assert rct_estimate_fluid(*geometric, 0.5) == pytest.approx(29 / 7)
        assert sp_estimate_fluid(*geometric, 0.5) == pytest.approx(1.0)

    def test_counterexample(self, counterexample):
        assert rct_estimate_fluid(*counterexample, 0.75) == pytest.approx(5 / 6)
        assert sp_estimate_fluid(*counterexample, 0.75) == pytest.approx(0.0, abs=1e-12)

    def test_no_treatment_effect(self, geometric):
        inst, rates = geometric
        flat = MarketRates(rates.lam, rates.pi, [0.0])
        assert rct_estimate_fluid(inst, flat, 0.5) == 0.0
        assert sp_estimate_fluid(inst, flat, 0.5) == 0.0

    def test_kink_is_ambiguous(self, geometric):
        # lam + rho * beta = 2 exhausts the two best supply types
        with pytest.raises(BreakpointAmbiguity):
            sp_estimate_fluid(*geometric, 0.125)

    def test_rho_range(self, geometric):
        with pytest.raises(OutOfRange):
            rct_estimate_fluid(*geometric, 1.0)
        with pytest.raises(OutOfRange):
            sp_estimate_fluid(*geometric, 0.0)

    def test_asymptotic_variances(self, geometric):
        inst, rates = geometric
        assert sp_asymptotic_variance(inst, rates, 0.5) <= rct_asymptotic_variance(inst, rates, 0.5)
        # a = 0.25, weight (5.5 / 0.5 + 1.5 / 0.5) = 14
        assert sp_asymptotic_variance(inst, rates, 0.5) == pytest.approx(0.0625 * 14)


class TestBiasReport:
    def test_geometric(self, geometric):
        report = bias_report(*geometric, 0.5)
        assert report.delta_true == pytest.approx(1.40625)
        assert report.bias_rct == pytest.approx(29 / 7 - 1.40625)
        assert report.bias_sp == pytest.approx(0.40625)
        assert report.a == pytest.approx([0.25])
        vbar = 3.625 / 3.5
        assert report.psi_hat_rct == pytest.approx((1.5 * vbar, 5.5 * vbar))
        assert report.psi_hat_sp == pytest.approx((3.125, 4.125))
        assert report.flags["symmetric"] and not report.flags["degenerate"]

    def test_counterexample(self, counterexample):
        report = bias_report(*counterexample, 0.75)
        assert report.bias_sp == pytest.approx(0.625)
        assert report.bias_rct == pytest.approx(5 / 24)
        assert report.flags["zero_demand_types"] == []

    def test_ambiguous_point(self, geometric):
        report = bias_report(*geometric, 0.125)
        assert report.flags["breakpoint_ambiguity"]
        assert np.isnan(report.delta_sp)

    def test_expected_sp_over_uniform_rho(self, geometric, counterexample):
        assert expected_sp_uniform_rho(build_psi_profile(*geometric)) == pytest.approx(1.40625, abs=1e-7)
        assert expected_sp_uniform_rho(build_psi_profile(*counterexample)) == pytest.approx(0.625, abs=1e-7)
        inst, rates = geometric
        flat = MarketRates(rates.lam, rates.pi, [0.0])
        assert expected_sp_uniform_rho(build_psi_profile(inst, flat)) == 0.0


def _check_orderings(inst, rates, rho):
    report = bias_report(inst, rates, rho)
    scale = problem_scale(rates.lam, rates.pi, rates.beta, objective=report.delta_true)
    tol = 1e-8 * scale
    # RCT overstates the effect in magnitude
    assert abs(report.delta_rct) >= abs(report.delta_true) - tol
    d = rates.demand_at(rho)
    for a_i, v_i, d_i in zip(report.a, report.vbar, d):
        if d_i > 0:
            assert a_i <= v_i + tol
    if np.all(rates.beta >= 0):
        # average values undervalue the control market and overvalue the treated one
        assert report.psi_hat_rct[0] <= psi(inst, rates, 0.0) + tol
        assert report.psi_hat_rct[1] >= psi(inst, rates, 1.0) - tol
    if not report.flags["breakpoint_ambiguity"]:
        if np.all(rates.beta >= 0):
            assert report.delta_sp <= report.delta_rct + tol
        if rho == 0.5:
            assert report.bias_sp <= report.bias_rct + tol


@pytest.mark.parametrize("sign", ["positive", "negative"])
def test_estimator_orderings(random_instances, sign):
    for inst, rates in random_instances(100, seed=21, sign=sign):
        for rho in (0.25, 0.5, 0.75):
            _check_orderings(inst, rates, rho)


@pytest.mark.slow
@pytest.mark.parametrize("sign", ["positive", "negative"])
def test_estimator_orderings_large(random_instances, sign):
    for inst, rates in random_instances(500, seed=22, sign=sign, max_types=10, density=0.7):
        for rho in (0.1, 0.5, 0.9):
            _check_orderings(inst, rates, rho)


class TestSampleEstimators:
    def _single(self):
        return MatchingInstance.from_dense([[1.0]])

    def test_raw_rct(self):
        draw = ExperimentDraw(tau=1.0, rho=0.5, D_control=np.array([1]), D_treatment=np.array([3]),
                              S=np.array([4]))
        split = MatchSplit(X_control=np.array([[1]]), X_treatment=np.array([[3]]))
        assert rct_estimate_sample(draw, split, self._single()) == pytest.approx(4.0)

    def test_rao_blackwellised_rct(self):
        draw = ExperimentDraw(tau=1.0, rho=0.5, D_control=np.array([1]), D_treatment=np.array([3]),
                              S=np.array([2]))
        assert rct_estimate_sample_rb(draw, np.array([[2]]), self._single()) == pytest.approx(2.0)

    def test_shadow_price(self):
        draw = ExperimentDraw(tau=1.0, rho=0.5, D_control=np.array([3]), D_treatment=np.array([4]),
                              S=np.array([1]))
        assert sp_estimate_sample(draw, [0.25]) == pytest.approx(0.5)

    def test_density_rescaling(self):
        draw = ExperimentDraw(tau=10.0, rho=0.5, D_control=np.array([30]), D_treatment=np.array([40]),
                              S=np.array([1]))
        assert sp_estimate_sample(draw, [0.25]) == pytest.approx(0.5)

    def test_negative_counts(self):
        with pytest.raises(InconsistentCounts):
            ExperimentDraw(tau=1.0, rho=0.5, D_control=np.array([-1]), D_treatment=np.array([1]),
                           S=np.array([1]))

    def test_registry(self):
        names = [name for name, _ in build_estimators(["rct_raw", "rct_rb", "sp"])]
        assert names == ["rct_raw", "rct_rb", "sp"]
        with pytest.raises(ConfigError):
            build_estimators(["ipw"])


def test_gte_vanishes_without_demand(geometric):
    inst, rates = geometric
    assert gte_fluid(inst, rates.scaled(demand_factor=0.0)) == 0.0


def test_linearisations(geometric):
    inst, rates = geometric
    vbar = [3.625 / 3.5]
    assert rct_linearisation(vbar, rates, 0.5) == pytest.approx(3.625)
    assert sp_linearisation(3.625, 1.0, 0.5, 0.5) == 3.625
    assert sp_linearisation(3.625, 1.0, 0.5, 1.0) == pytest.approx(4.125)
