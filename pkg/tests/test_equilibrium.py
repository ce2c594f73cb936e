"""
Closed-form equilibria, bargaining solutions and the competition effects.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from core.errors import DomainError, SolverFailure, UnsupportedScopeError
from logic.model.network import Market, NetworkModel, single_attribute_isp, uniform_path
from logic.model.specs import PathProfile, TwoIspMarket
from logic.netgen.topologies import (
    build_competition_pair_homogeneous,
    build_homogeneous,
    build_two_isp_market,
    build_two_path_model,
)
from logic.solvers import competition as competition_module
from logic.solvers import (
    characteristic_ratio,
    competition_pair_valuations,
    construct_competition_decline,
    demand_sweep,
    homogeneous_competition,
    homogeneous_equilibrium,
    homogeneous_nbs,
    is_nash_equilibrium,
    nbs_global,
    quartic_two_path_equilibrium,
    single_path_equilibrium,
    single_path_nbs,
    solve_homogeneous_model,
    two_path_equilibrium,
    two_path_valuations,
)

SQRT3_HALF = math.sqrt(3) / 2


def _shared_path(rho_second: float = 2.0, gamma_second: float = 4.0, base: float = 0.0) -> NetworkModel:
    """Two ISPs on one path of demand 4: (alpha 1, gamma 1, net revenue 1) and a second ISP."""
    return NetworkModel(
        isps=(single_attribute_isp("isp-1", rho=1.0, gamma=1.0),
              single_attribute_isp("isp-2", rho=rho_second, gamma=gamma_second)),
        attributes=("quality",),
        paths=(uniform_path("r", [0, 1], 1.0, base),),
        markets=(Market("s", "t", 4.0, ("r",)),),
    )


def _two_isp_market(**overrides) -> TwoIspMarket:
    params = dict(alpha1=1.0, alpha10=0.0, phi1=0.0, phi10=0.0, gamma1=1.0, rho1=1.0,
                  alpha2=1.0, alpha20=0.0, phi2=0.0, phi20=0.0, gamma2=1.0, rho2=1.0, d=4.0)
    params.update(overrides)
    return TwoIspMarket(**params)


class TestHomogeneous:
    @pytest.mark.parametrize("Q,I,expected", [(1, 1, 1.0), (2, 1, math.sqrt(48) / 8), (1, 2, 0.5)])
    def test_equilibrium(self, unit_spec, Q, I, expected):
        equilibrium = homogeneous_equilibrium(replace(unit_spec, Q=Q, I=I))
        assert equilibrium.a_plus == pytest.approx(expected, abs=1e-9)

    def test_quadratic_terms(self, unit_spec):
        equilibrium = homogeneous_equilibrium(unit_spec)
        assert (equilibrium.T1, equilibrium.T2, equilibrium.T3) == pytest.approx((1.0, 2.0, -3.0))

    def test_expensive_quality_gives_zero(self, unit_spec):
        equilibrium = homogeneous_equilibrium(replace(unit_spec, gamma1=100.0))
        assert equilibrium.a_plus == 0.0
        assert equilibrium.a_hat < 0

    @pytest.mark.parametrize("I,d,expected", [(1, 4.0, 1.0), (2, 4.0, (math.sqrt(8) - 1) / 2), (1, 0.0, 0.0)])
    def test_bargaining(self, unit_spec, I, d, expected):
        assert homogeneous_nbs(replace(unit_spec, I=I, d=d)) == pytest.approx(expected, abs=1e-9)

    def test_bargaining_invests_more_than_competition(self, unit_spec):
        spec = replace(unit_spec, I=2)
        assert homogeneous_nbs(spec) > homogeneous_equilibrium(spec).a_plus

    def test_bargaining_needs_single_path(self, unit_spec):
        with pytest.raises(UnsupportedScopeError):
            homogeneous_nbs(replace(unit_spec, Q=2))

    def test_model_solution_is_nash(self, homogeneous_model):
        result = solve_homogeneous_model(homogeneous_model)
        assert result.attributes[0, 0] == pytest.approx(1.0)
        assert result.residual <= 1e-8

    def test_competition_pair(self, unit_spec):
        spec = replace(unit_spec, Q=2, d=2.0)
        pair = build_competition_pair_homogeneous(2, 1, 2.0, spec)
        assert pair.reduced.markets[0].demand_limit == pytest.approx(4.0)
        assert len(pair.isolated.markets) == len(pair.competitive.markets) == 2
        assert all(len(m.paths) == 1 for m in pair.isolated.markets)
        assert all(len(m.paths) == 2 for m in pair.competitive.markets)

        competition = homogeneous_competition(spec)
        assert competition.a_plus_isolated == pytest.approx(math.sqrt(2) - 1)
        assert competition.a_plus_competitive == pytest.approx(SQRT3_HALF)
        assert competition.a_plus_competitive >= competition.a_plus_isolated

    def test_competition_pair_single_path_is_unchanged(self, unit_spec):
        competition = homogeneous_competition(unit_spec)
        assert competition.a_plus_isolated == pytest.approx(competition.a_plus_competitive)


class TestSinglePath:
    def test_characteristic_ratio(self):
        assert characteristic_ratio(_shared_path(), "r") == pytest.approx(1.0)
        strong = NetworkModel(
            isps=(single_attribute_isp("isp", rho=1.0, gamma=1.0),),
            attributes=("quality",),
            paths=(uniform_path("r", [0], 4.0),),
            markets=(Market("s", "t", 4.0, ("r",)),),
        )
        assert characteristic_ratio(strong, "r") == pytest.approx(2.0)

    def test_characteristic_ratio_without_net_revenue(self):
        assert characteristic_ratio(_shared_path(rho_second=0.0), "r") == pytest.approx(1.0)
        model = NetworkModel(
            isps=(single_attribute_isp("isp", rho=0.5, gamma=1.0, phi0=0.5),),
            attributes=("quality",),
            paths=(uniform_path("r", [0], 1.0),),
            markets=(Market("s", "t", 4.0, ("r",)),),
        )
        assert characteristic_ratio(model, "r") == 0.0

    def test_equilibrium(self):
        model = _shared_path()
        result = single_path_equilibrium(model, "r")
        assert result.path_valuations["r"] == pytest.approx(1.0)
        assert result.diagnostics["winners"] == [[0, 0]]
        assert result.unique_in_attributes
        assert result.attributes[1, 0] == 0.0
        assert is_nash_equilibrium(model, result.attributes).holds

    def test_bargaining(self):
        result = single_path_nbs(_shared_path(), "r")
        assert result.path_valuations["r"] == pytest.approx(math.sqrt(12) - 1)
        assert result.diagnostics["winners"] == [[0, 0]]

    def test_dominating_base_valuation(self):
        model = _shared_path(base=5.0)
        for solve in (single_path_equilibrium, single_path_nbs):
            result = solve(model, "r")
            assert result.path_valuations["r"] == pytest.approx(5.0)
            assert np.all(result.attributes == 0)

    def test_symmetric_isps_are_not_unique(self):
        result = single_path_equilibrium(_shared_path(rho_second=1.0, gamma_second=1.0), "r")
        assert not result.unique_in_attributes
        assert result.path_valuations["r"] == pytest.approx(1.0)

    def test_zero_cost_attribute_is_left_out(self):
        model = _shared_path(rho_second=2.0, gamma_second=0.0)
        for solve in (single_path_equilibrium, single_path_nbs):
            result = solve(model, "r")
            assert result.diagnostics["winners"] == [[0, 0]]
            assert result.diagnostics["excluded"] == [[1, 0]]
            assert len(result.warnings) == 1
            assert "zero cost" in result.warnings[0]
        assert single_path_equilibrium(model, "r").path_valuations["r"] == pytest.approx(1.0)

    def test_zero_cost_without_net_revenue_is_silent(self):
        model = _shared_path(rho_second=0.0, gamma_second=0.0)
        result = single_path_equilibrium(model, "r")
        assert result.diagnostics["excluded"] == [[1, 0]]
        assert result.warnings == []

    def test_path_must_have_its_own_market(self, symmetric_two_path):
        with pytest.raises(UnsupportedScopeError):
            single_path_equilibrium(symmetric_two_path, "r")


class TestTwoPath:
    def test_symmetric(self, symmetric_two_path):
        result = two_path_equilibrium(symmetric_two_path)
        assert result.path_valuations["r"] == pytest.approx(SQRT3_HALF, abs=1e-9)
        assert result.path_valuations["rbar"] == pytest.approx(SQRT3_HALF, abs=1e-9)
        assert result.residual <= 1e-6
        assert result.diagnostics["psi"] == pytest.approx({"r": 1.0, "rbar": 1.0})

    def test_silent_rival(self):
        v_r, v_rbar = two_path_valuations(1.0, 0.0, 0.0, 0.0, 4.0)
        assert v_rbar == 0.0
        assert v_r == pytest.approx(1.0)

    def test_large_base_valuation_dominates(self):
        v_r, _ = two_path_valuations(0.01, 1.0, 1e3, 0.0, 4.0)
        assert v_r == pytest.approx(1e3)

    def test_no_investment_leaves_base_valuations(self):
        assert two_path_valuations(0.0, 0.0, 0.5, 0.25, 4.0) == pytest.approx((0.5, 0.25))

    def test_overlapping_paths_are_rejected(self):
        model = NetworkModel(
            isps=(single_attribute_isp("isp", rho=1.0, gamma=1.0),),
            attributes=("quality",),
            paths=(uniform_path("r", [0], 1.0), uniform_path("rbar", [0], 1.0)),
            markets=(Market("s", "t", 4.0, ("r", "rbar")),),
        )
        with pytest.raises(UnsupportedScopeError):
            two_path_equilibrium(model)


class TestQuartic:
    def test_symmetric_matches_two_path(self):
        result = quartic_two_path_equilibrium(_two_isp_market())
        assert result.diagnostics["a1_plus"] == pytest.approx(SQRT3_HALF, abs=1e-6)
        assert result.diagnostics["a2_plus"] == pytest.approx(SQRT3_HALF, abs=1e-6)
        assert result.residual <= 1e-6

    def test_boundary_equilibrium(self):
        result = quartic_two_path_equilibrium(_two_isp_market(rho2=0.0))
        assert result.diagnostics["a2_plus"] == pytest.approx(0.0, abs=1e-9)
        assert result.diagnostics["a1_plus"] == pytest.approx(1.0, abs=1e-6)

    def test_unit_costs(self):
        params = _two_isp_market(phi1=0.1, phi2=0.05, rho2=1.5)
        result = quartic_two_path_equilibrium(params)
        A = np.array([[result.diagnostics["a1_plus"]], [result.diagnostics["a2_plus"]]])
        assert result.residual <= 1e-6
        assert is_nash_equilibrium(build_two_isp_market(params), A, tol=1e-6).holds


class TestBargaining:
    def test_monopoly(self, monopoly):
        result = nbs_global(monopoly, seed=0)
        assert result.attributes[0, 0] == pytest.approx(1.0, abs=1e-5)

    def test_matches_single_path_nbs(self):
        result = nbs_global(_shared_path(), seed=0)
        assert result.path_valuations["r"] == pytest.approx(math.sqrt(12) - 1, abs=1e-4)

    def test_zero_demand(self):
        model = NetworkModel(
            isps=(single_attribute_isp("isp", rho=1.0, gamma=1.0),),
            attributes=("quality",),
            paths=(uniform_path("r", [0], 1.0),),
            markets=(Market("s", "t", 0.0, ("r",)),),
        )
        result = nbs_global(model, seed=0)
        assert result.attributes[0, 0] == pytest.approx(0.0, abs=1e-9)
        assert any("non-positive" in w for w in result.warnings)

    def test_size_limit(self, unit_spec):
        with pytest.raises(UnsupportedScopeError):
            nbs_global(build_homogeneous(replace(unit_spec, Q=4, I=4)))


class TestCompetitionEffects:
    def test_decline_construction(self):
        construction = construct_competition_decline(2.0, 2.0, 0.1)
        assert construction.profile_rbar.base_valuation == pytest.approx(1.1)
        assert construction.profile_r.psi == pytest.approx(0.715838, abs=1e-6)
        valuations = construction.valuations()
        assert valuations.competitive == pytest.approx(1.1)
        assert valuations.isolated == pytest.approx(1.112346, abs=1e-6)
        assert valuations.delta < 0

    def test_decline_interval(self):
        construction = construct_competition_decline(1.0, 1.0, 0.5)
        low, high = construction.psi_interval
        assert low == pytest.approx(1.0)
        assert high == pytest.approx(2.5 / (math.sqrt(2) * math.sqrt(2.5)))
        assert construction.valuations().delta < 0

    def test_decline_with_tiny_margin(self):
        low, high = construct_competition_decline(3.0, 1.0, 1e-6).psi_interval
        assert low < high

    def test_decline_that_does_not_lower_the_valuation_fails(self, monkeypatch):
        monkeypatch.setattr(competition_module, "competition_pair_valuations",
                            lambda *args: competition_module.PairValuations(isolated=1.0, competitive=1.0))
        with pytest.raises(SolverFailure) as failure:
            construct_competition_decline(2.0, 2.0, 0.1)
        assert failure.value.details["delta"] == 0.0
        assert len(failure.value.details["psi_interval"]) == 2

    def test_decline_networks(self):
        pair = construct_competition_decline(2.0, 2.0, 0.1).networks()
        assert pair.competitive.markets[0].demand_limit == pytest.approx(4.0)
        assert len(pair.isolated.markets) == 2

    def test_decline_rejects_bad_input(self):
        with pytest.raises(DomainError):
            construct_competition_decline(0.0, 1.0, 0.1)
        with pytest.raises(DomainError):
            construct_competition_decline(1.0, 1.0, 0.0)

    def test_competition_raises_valuation_at_high_demand(self):
        sweep = demand_sweep(PathProfile(1.0), PathProfile(1.0), [0.0, 4.0])
        assert sweep.isolated[0] == sweep.competitive[0] == 0.0
        assert sweep.competitive[1] == pytest.approx(2 * SQRT3_HALF)
        assert sweep.isolated[1] == pytest.approx(math.sqrt(8) - 2)
        assert sweep.crossover_demand == 0.0
        assert list(sweep.to_frame().columns) == ["d", "V_plus_N3", "V_plus_N4", "delta"]

    def test_pair_valuations(self):
        valuations = competition_pair_valuations(PathProfile(1.0), PathProfile(1.0), 2.0, 2.0)
        assert valuations.competitive == pytest.approx(2 * SQRT3_HALF)
        assert valuations.isolated == pytest.approx(2 * (math.sqrt(2) - 1))

    def test_two_path_networks_agree_with_closed_forms(self):
        model = build_two_path_model(PathProfile(1.0), PathProfile(1.0), 4.0)
        result = two_path_equilibrium(model)
        assert sum(result.path_valuations.values()) == pytest.approx(2 * SQRT3_HALF)
