"""
AS graph ingestion, valley-free paths, gravity demand, parameter synthesis and topology builders.
"""

import json
import re
from dataclasses import replace

import networkx as nx
import pytest

from core.errors import DomainError, GraphParseError, ModelValidationError
from logic.model.network import Tier
from logic.model.specs import PathProfile
from logic.netgen import (
    GravitySpec,
    MarketCandidate,
    ParamProfile,
    Relation,
    build_homogeneous,
    build_market_model,
    build_two_path_pair,
    enumerate_paths,
    generate_synthetic_graph,
    gravity_demand,
    ingest_as_graph,
    is_gao_rexford,
    prune_to_core,
    synthesize_params,
    tier_classify,
)
from logic.netgen.as_graph import Step, parse_as_graph
from logic.netgen.gravity import gravity_weight

# 1 and 2 peer at the top; 3 and 4 are their customers and peer laterally
DIAMOND = """
# tier-1 clique
1 2 p2p 100 100
1 3 p2c 100 10
2 4 p2c 100 10
1 4 p2c
3 4 p2p
"""

_STEP_LETTER = {Step.UP: "U", Step.PEER: "P", Step.DOWN: "D"}


def _valley_free(graph, path) -> bool:
    letters = "".join(_STEP_LETTER[graph.step(a, b)] for a, b in zip(path, path[1:]))
    return re.fullmatch("U*P?D*", letters) is not None


def _brute_force_paths(graph, src, dst, max_hops):
    found = [tuple(p) for p in nx.all_simple_paths(graph.graph, src, dst, cutoff=max_hops - 1)]
    return sorted((p for p in found if _valley_free(graph, p)), key=lambda p: (len(p), [int(a) for a in p]))


class TestParsing:
    def test_parse_links_and_masses(self):
        graph = parse_as_graph(DIAMOND)
        assert graph.nodes == ["1", "2", "3", "4"]
        assert len(graph.links) == 5
        assert ("1", "3", Relation.CUSTOMER_TO_PROVIDER) in graph.links
        assert ("3", "4", Relation.PEER_TO_PEER) in graph.links
        assert graph.providers("4") == ["1", "2"]
        assert graph.customers("1") == ["3", "4"]
        assert graph.peers("3") == ["4"]
        assert graph.mass("3") == 10.0
        assert graph.step("3", "1") == Step.UP
        assert not graph.has_provider_cycle()

    def test_comments_and_blank_lines_only(self):
        graph = parse_as_graph("# nothing here\n\n")
        assert len(graph) == 0
        assert graph.links == []

    @pytest.mark.parametrize("text", [
        "1 1 p2c",
        "1 2 c2p",
        "1 2",
        "1 2 p2c 5",
        "1 2 p2c x 5",
    ])
    def test_malformed_lines(self, text):
        with pytest.raises(GraphParseError):
            parse_as_graph(text)

    def test_parse_errors_are_validation_errors(self):
        with pytest.raises(ModelValidationError):
            parse_as_graph("1 2 p2c\n2 1 p2p")

    def test_ingest_with_sidecar(self, tmp_path):
        graph_file = tmp_path / "graph.txt"
        graph_file.write_text("1 2 p2c\n", encoding="utf-8")
        sidecar = tmp_path / "sidecar.json"
        sidecar.write_text(json.dumps({
            "1": {"mass": 5.0, "energy": {"mean_energy_intensity": 0.01, "idle_power": 2e4}},
            "99": {"mass": 1.0},
        }), encoding="utf-8")
        graph = ingest_as_graph(str(graph_file), str(sidecar))
        assert graph.mass("1") == 5.0
        assert graph.mass("2") is None
        assert graph.energy("1").idle_power == 2e4
        assert "99" not in graph

    def test_ingest_missing_file(self, tmp_path):
        with pytest.raises(ModelValidationError):
            ingest_as_graph(str(tmp_path / "absent.txt"))


class TestValleyFree:
    def test_climb_and_descend(self):
        chain = parse_as_graph("1 2 p2c\n2 3 p2c")
        assert is_gao_rexford(chain, ["3", "2", "1"])
        assert is_gao_rexford(chain, ["1", "2", "3"])

    def test_two_peering_links_are_rejected(self):
        peers = parse_as_graph("1 2 p2p\n2 3 p2p")
        assert is_gao_rexford(peers, ["1", "2"])
        assert not is_gao_rexford(peers, ["1", "2", "3"])

    def test_valley_is_rejected(self):
        valley = parse_as_graph("1 2 p2c\n3 2 p2c")
        assert not is_gao_rexford(valley, ["1", "2", "3"])

    def test_degenerate_paths(self):
        graph = parse_as_graph(DIAMOND)
        assert not is_gao_rexford(graph, ["1"])
        assert not is_gao_rexford(graph, ["3", "1", "3"])
        assert not is_gao_rexford(graph, ["3", "2"])

    def test_enumeration_order(self):
        graph = parse_as_graph(DIAMOND)
        assert enumerate_paths(graph, "3", "4", k=5, max_hops=4) == [
            ("3", "4"), ("3", "1", "4"), ("3", "1", "2", "4"),
        ]
        assert enumerate_paths(graph, "3", "4", k=2, max_hops=4) == [("3", "4"), ("3", "1", "4")]
        assert enumerate_paths(graph, "3", "4", k=5, max_hops=2) == [("3", "4")]
        assert enumerate_paths(graph, "3", "3", k=5, max_hops=4) == []
        assert enumerate_paths(graph, "3", "42", k=5, max_hops=4) == []

    def test_matches_brute_force_on_synthetic_graph(self):
        graph = generate_synthetic_graph(25, seed=9)
        for src, dst in [("1", "2"), ("3", "20"), ("12", "25"), ("25", "4"), ("8", "9")]:
            expected = _brute_force_paths(graph, src, dst, max_hops=4)
            assert enumerate_paths(graph, src, dst, k=1000, max_hops=4) == expected
            assert all(is_gao_rexford(graph, p) for p in expected)

    def test_candidate_summary(self):
        candidate = MarketCandidate("3", "4", (("3", "4"), ("3", "1", "4")))
        assert candidate.mean_hops == 1.5
        assert candidate.pair == ("3", "4")


class TestGravity:
    def test_weight(self):
        assert gravity_weight(100.0, 100.0, 2.0) == pytest.approx(2500.0)
        with pytest.raises(DomainError):
            gravity_weight(1.0, 1.0, 0.0)

    def test_allocation_is_proportional(self):
        graph = parse_as_graph("1 2 p2p 1 1\n2 3 p2p 1 1\n1 3 p2p 1 1")
        demands = gravity_demand(
            graph, {("1", "2"): 2.0, ("1", "3"): 2.0, ("2", "3"): 1.0},
            GravitySpec(total_traffic=170.0, exponent=1.0),
        )
        assert demands[("1", "2")] == pytest.approx(42.5)
        assert demands[("1", "3")] == pytest.approx(42.5)
        assert demands[("2", "3")] == pytest.approx(85.0)

    def test_allocation_errors(self):
        weightless = parse_as_graph("1 2 p2p 0 0")
        with pytest.raises(DomainError):
            gravity_demand(weightless, {("1", "2"): 1.0}, GravitySpec())
        massless = parse_as_graph("1 2 p2p")
        with pytest.raises(ModelValidationError):
            gravity_demand(massless, {("1", "2"): 1.0}, GravitySpec())
        with pytest.raises(ModelValidationError):
            GravitySpec(total_traffic=0.0)


def test_tier_classification():
    graph = parse_as_graph("1 2 p2c\n2 3 p2c\n3 4 p2c\n1 5 p2p")
    tiers = tier_classify(graph)
    assert tiers == {"1": Tier.T1, "2": Tier.T2, "3": Tier.T3, "4": Tier.OTHER, "5": Tier.T1}


class TestParameterSynthesis:
    def test_valuation_coefficient(self):
        graph = parse_as_graph("1 2 p2c 1000 1000")
        candidate = MarketCandidate("2", "1", (("2", "1"),))
        model = synthesize_params(graph, [candidate], {("2", "1"): 1.0}, ParamProfile())
        path = model.paths[0]
        assert path.id == "2-1#0"
        assert path.coeffs[0][0] == pytest.approx(8.5e-5)
        assert model.markets[0].demand_limit == pytest.approx(324_000.0)
        assert model.attributes == ("bandwidth", "clean-energy")
        assert model.lower_bounds[:, 0] == pytest.approx([0.1, 0.1])
        assert model.upper_bounds[:, 1].tolist() == [1.0, 1.0]
        assert [isp.tier for isp in model.isps] == [Tier.T1, Tier.T2]

    def test_synthesis_is_seeded(self):
        graph = parse_as_graph(DIAMOND)
        candidate = MarketCandidate("3", "4", tuple(enumerate_paths(graph, "3", "4", 3, 4)))
        first = synthesize_params(graph, [candidate], {("3", "4"): 2.0}, ParamProfile(seed=4))
        second = synthesize_params(graph, [candidate], {("3", "4"): 2.0}, ParamProfile(seed=4))
        assert [isp.gamma for isp in first.isps] == [isp.gamma for isp in second.isps]
        assert min(p.base_valuation for p in first.paths) == 0.0

    def test_zero_mass_is_rejected(self):
        graph = parse_as_graph("1 2 p2c 0 1000")
        candidate = MarketCandidate("2", "1", (("2", "1"),))
        with pytest.raises(ModelValidationError):
            synthesize_params(graph, [candidate], {("2", "1"): 1.0}, ParamProfile())

    def test_profile_validation(self):
        with pytest.raises(ModelValidationError):
            ParamProfile(w=0.0)
        with pytest.raises(ModelValidationError):
            ParamProfile.from_dict({"unknown": 1})
        assert ParamProfile.from_dict(ParamProfile(seed=3).to_dict()) == ParamProfile(seed=3)


class TestGraphPipeline:
    def test_synthetic_graph_is_deterministic(self):
        first = generate_synthetic_graph(30, seed=3)
        second = generate_synthetic_graph(30, seed=3)
        assert first.links == second.links
        assert [first.mass(a) for a in first.nodes] == [second.mass(a) for a in second.nodes]
        assert len(first) == 30
        assert not first.has_provider_cycle()
        assert tier_classify(first)["1"] == Tier.T1
        with pytest.raises(ModelValidationError):
            generate_synthetic_graph(2, seed=0)

    def test_prune_to_core(self):
        graph = parse_as_graph("1 2 p2c\n1 3 p2c\n1 4 p2c\n1 5 p2c\n2 3 p2p")
        core = prune_to_core(graph, 3)
        assert core.nodes == ["1", "2", "3"]
        assert prune_to_core(graph, 10).nodes == graph.nodes
        with pytest.raises(ModelValidationError):
            prune_to_core(graph, 0)

    def test_build_market_model(self):
        graph = parse_as_graph(DIAMOND)
        model = build_market_model(graph, k=2, max_hops=4, gravity=GravitySpec(total_traffic=10.0))
        assert sorted(m.key for m in model.markets) == ["1->4", "2->4", "3->4"]
        assert all(len(m.paths) == 2 for m in model.markets)
        total = sum(m.demand_limit for m in model.markets)
        assert total == pytest.approx(10.0 * 324_000.0)

        limited = build_market_model(graph, k=2, max_hops=4, max_markets=1)
        assert len(limited.markets) == 1

    def test_build_market_model_without_candidates(self):
        chain = parse_as_graph("1 2 p2c 10 10")
        with pytest.raises(ModelValidationError):
            build_market_model(chain, k=2, max_hops=4)


class TestTopologies:
    def test_homogeneous(self, unit_spec):
        model = build_homogeneous(replace(unit_spec, Q=2, I=3))
        assert model.num_isps == 6
        assert [len(p.isps) for p in model.paths] == [3, 3]
        assert len(model.markets) == 1
        assert model.markets[0].paths == ("r0", "r1")

    def test_two_path_pair(self):
        pair = build_two_path_pair(PathProfile(1.0), PathProfile(1.0), 1.5, 2.5)
        assert [m.demand_limit for m in pair.competitive.markets] == [4.0]
        assert [m.demand_limit for m in pair.isolated.markets] == [1.5, 2.5]
        with pytest.raises(ModelValidationError):
            build_two_path_pair(PathProfile(1.0), PathProfile(1.0), -1.0, 2.0)
