"""
Randomized verification suites for the closed forms, the stability results
and the network generator.

Every suite draws seeded random instances, checks one property per instance
and returns a ``SuiteReport``. Solver errors on an instance count as
failures; the suite itself never raises.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from itertools import permutations
from typing import Any, Callable, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from core.errors import SimulationError, UnsupportedScopeError
from logic.model.evaluation import path_valuations
from logic.model.network import IspParams, Market, NetworkModel, Path
from logic.model.specs import HomogeneousSpec, PathProfile, TwoIspMarket
from logic.netgen.as_graph import AsGraph, Relation, path_key
from logic.netgen.gravity import GravitySpec, gravity_demand
from logic.netgen.paths import enumerate_paths, is_gao_rexford
from logic.netgen.topologies import build_homogeneous, build_two_isp_market
from logic.solvers.best_response import is_nash_equilibrium, numeric_best_response, unrestricted_best_response
from logic.solvers.competition import construct_competition_decline, demand_sweep
from logic.solvers.dynamics import DynamicsConfig, DynamicsMode, round_robin
from logic.solvers.heterogeneous import single_path_equilibrium, single_path_nbs, two_path_equilibrium
from logic.solvers.homogeneous import homogeneous_competition, homogeneous_equilibrium, homogeneous_nbs
from logic.solvers.quartic import ORACLE_ETA, ORACLE_TOL, quartic_two_path_equilibrium
from logic.solvers.stability import jacobian_homogeneous, jacobian_two_path

logger = logging.getLogger(__name__)

MAX_REPORTED_FAILURES = 50


@dataclass
class SuiteReport:
    suite: str
    passed: int = 0
    failed: int = 0
    failures: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def check(self, condition: bool, message: str) -> bool:
        if condition:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < MAX_REPORTED_FAILURES:
                self.failures.append(message)
        return condition

    def guard(self, label: str, check: Callable[[], None]) -> None:
        """Run one instance check, recording a solver error as a failure."""
        try:
            check()
        except SimulationError as e:
            self.check(False, f"{label}: {type(e).__name__}: {e}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "failed": self.failed,
            "failures": list(self.failures),
            "details": dict(self.details),
        }


def _scale(*values: Any) -> float:
    """max(1, largest magnitude among the values)."""
    magnitudes = [float(np.max(np.abs(v))) if np.size(v) else 0.0 for v in values]
    return max([1.0] + magnitudes)


def _settled(eta: float, tol: float, max_rounds: int = 10000) -> DynamicsConfig:
    return DynamicsConfig(mode=DynamicsMode.ROUND_ROBIN, step=eta, tol=tol, max_rounds=max_rounds, relative=True)


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

PARAM_LOW, PARAM_HIGH = 1e-2, 1e2
BASE_HIGH = 5.0


def log_uniform(rng: np.random.Generator, low: float = PARAM_LOW, high: float = PARAM_HIGH) -> float:
    return float(np.clip(np.exp(rng.uniform(np.log(low), np.log(high))), low, high))


def base_valuation(rng: np.random.Generator) -> float:
    return float(rng.uniform(0.0, BASE_HIGH))


def revenue_pair(rng: np.random.Generator) -> Tuple[float, float]:
    """(rho, phi0), redrawn until rho >= phi0."""
    while True:
        rho, phi0 = log_uniform(rng), log_uniform(rng)
        if rho >= phi0:
            return rho, phi0


def random_homogeneous_spec(rng: np.random.Generator, Q: Optional[int] = None,
                            I: Optional[int] = None) -> HomogeneousSpec:
    rho, phi0 = revenue_pair(rng)
    return HomogeneousSpec(
        Q=int(Q if Q is not None else rng.integers(1, 5)),
        I=int(I if I is not None else rng.integers(1, 5)),
        alpha1=log_uniform(rng),
        alpha0=base_valuation(rng),
        phi1=log_uniform(rng) if rng.random() < 0.7 else 0.0,
        phi0=phi0,
        gamma1=log_uniform(rng),
        rho=rho,
        d=log_uniform(rng),
    )


def _random_isp(rng: np.random.Generator, name: str, attributes: int, with_unit_costs: bool) -> IspParams:
    rho, phi0 = revenue_pair(rng)
    phi = tuple(
        log_uniform(rng) if with_unit_costs and rng.random() < 0.5 else 0.0
        for _ in range(attributes)
    )
    return IspParams(
        name=name,
        rho=rho,
        phi0=phi0,
        phi=phi,
        gamma=tuple(log_uniform(rng) for _ in range(attributes)),
    )


def random_market_model(rng: np.random.Generator) -> NetworkModel:
    """One market, up to three (possibly overlapping) paths, general unit costs."""
    attributes = int(rng.integers(1, 3))
    num_isps = int(rng.integers(1, 5))
    isps = tuple(_random_isp(rng, f"isp-{n}", attributes, True) for n in range(num_isps))
    paths = []
    for i in range(int(rng.integers(1, 4))):
        size = int(rng.integers(1, min(3, num_isps) + 1))
        members = sorted(int(n) for n in rng.choice(num_isps, size=size, replace=False))
        coeffs = tuple(tuple(log_uniform(rng) for _ in range(attributes)) for _ in members)
        paths.append(Path(id=f"r{i}", isps=tuple(members), base_valuation=base_valuation(rng), coeffs=coeffs))
    market = Market("s", "t", log_uniform(rng), tuple(p.id for p in paths))
    return NetworkModel(isps=isps, attributes=tuple(f"q{k}" for k in range(attributes)),
                        paths=tuple(paths), markets=(market,))


def random_path_model(rng: np.random.Generator, two_paths: bool) -> NetworkModel:
    """Disjoint paths of one or two ISPs each without attribute-dependent unit costs."""
    attributes = int(rng.integers(1, 3))
    isps, paths, offset = [], [], 0
    for path_id in (("r", "rbar") if two_paths else ("r",)):
        size = int(rng.integers(1, 3))
        isps += [_random_isp(rng, f"{path_id}-{i}", attributes, False) for i in range(size)]
        coeffs = tuple(tuple(log_uniform(rng) for _ in range(attributes)) for _ in range(size))
        paths.append(Path(id=path_id, isps=tuple(range(offset, offset + size)), base_valuation=base_valuation(rng),
                          coeffs=coeffs))
        offset += size
    market = Market("s", "t", log_uniform(rng), tuple(p.id for p in paths))
    return NetworkModel(isps=tuple(isps), attributes=tuple(f"q{k}" for k in range(attributes)),
                        paths=tuple(paths), markets=(market,))


def random_two_isp_market(rng: np.random.Generator, with_unit_costs: bool = True) -> TwoIspMarket:
    def side() -> Dict[str, float]:
        rho, phi0 = revenue_pair(rng)
        return {
            "alpha": log_uniform(rng),
            "alpha0": base_valuation(rng),
            "phi": log_uniform(rng) if with_unit_costs else 0.0,
            "phi0": phi0,
            "gamma": log_uniform(rng),
            "rho": rho,
        }

    first, second = side(), side()
    return TwoIspMarket(
        alpha1=first["alpha"], alpha10=first["alpha0"], phi1=first["phi"], phi10=first["phi0"],
        gamma1=first["gamma"], rho1=first["rho"],
        alpha2=second["alpha"], alpha20=second["alpha0"], phi2=second["phi"], phi20=second["phi0"],
        gamma2=second["gamma"], rho2=second["rho"],
        d=log_uniform(rng),
    )


def random_as_graph(rng: np.random.Generator, num_nodes: int) -> AsGraph:
    graph = AsGraph()
    for n in range(1, num_nodes + 1):
        graph.add_node(str(n), mass=float(rng.uniform(1.0, 100.0)))
    for a in range(1, num_nodes + 1):
        for b in range(a + 1, num_nodes + 1):
            u = rng.random()
            if u < 0.35:
                provider, customer = (a, b) if rng.random() < 0.5 else (b, a)
                graph.add_link(str(provider), str(customer), Relation.CUSTOMER_TO_PROVIDER)
            elif u < 0.5:
                graph.add_link(str(a), str(b), Relation.PEER_TO_PEER)
    return graph


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def best_response_suite(count: int, seed: int) -> SuiteReport:
    """Closed-form best response against the numeric oracle on single-market instances."""
    report = SuiteReport("best-response")
    rng = np.random.default_rng(seed)
    undefined = 0
    for i in range(count):
        model = random_market_model(rng)
        A = rng.uniform(0.0, 3.0, size=model.shape)
        on_path = sorted({n for p in model.paths for n in p.isps})
        n = int(rng.choice(on_path))
        k = int(rng.integers(0, model.num_attributes))

        def check():
            nonlocal undefined
            unrestricted = unrestricted_best_response(model, A, n, k)
            if unrestricted is None:
                undefined += 1
                return
            expected = max(0.0, unrestricted)
            numeric = numeric_best_response(model, A, n, k)
            report.check(abs(numeric - expected) <= 1e-5 * max(1.0, expected),
                         f"instance {i}: closed form {expected:.9g}, oracle {numeric:.9g}")

        report.guard(f"instance {i}", check)
    report.details["undefined"] = undefined
    return report


WORKED_HOMOGENEOUS = HomogeneousSpec(Q=1, I=1, alpha1=1.0, alpha0=0.0, phi1=0.0, phi0=0.0, gamma1=1.0,
                                     rho=1.0, d=4.0)


def homogeneous_suite(count: int, seed: int) -> SuiteReport:
    """Closed-form homogeneous equilibria are Nash equilibria of the built model."""
    report = SuiteReport("homogeneous")
    for Q, I, expected in ((1, 1, 1.0), (2, 1, math.sqrt(48) / 8), (1, 2, 0.5)):
        a_plus = homogeneous_equilibrium(replace(WORKED_HOMOGENEOUS, Q=Q, I=I)).a_plus
        report.check(abs(a_plus - expected) <= 5e-7, f"worked Q={Q}, I={I}: {a_plus:.9g} != {expected:.9g}")

    rng = np.random.default_rng(seed)
    for i in range(count):
        spec = random_homogeneous_spec(rng)

        def check():
            model = build_homogeneous(spec)
            a_plus = homogeneous_equilibrium(spec).a_plus
            nash = is_nash_equilibrium(model, np.full(model.shape, a_plus), tol=1e-8 * _scale(a_plus))
            report.check(nash.holds, f"instance {i} {spec}: residual {nash.max_residual:.3g}")

        report.guard(f"instance {i}", check)
    return report


def homogeneous_stability_suite(count: int, seed: int) -> SuiteReport:
    """Analytic spectrum against the numeric one, and round-robin dynamics reaching the equilibrium."""
    report = SuiteReport("stability")
    rng = np.random.default_rng(seed)
    dynamics = _settled(0.5, 1e-10)
    for i in range(count):
        spec = random_homogeneous_spec(rng)
        starts = [rng.uniform(0.0, 3.0, size=(spec.Q * spec.I, 1)) for _ in range(5)]

        def check():
            stability = jacobian_homogeneous(spec)
            spectra_match = all(
                abs(a - b) <= 1e-7 * max(1.0, abs(a))
                for a, b in zip(stability.analytic_eigs, stability.eigenvalues)
            )
            report.check(spectra_match, f"instance {i}: analytic and numeric spectra differ")
            marginal_allowed = spec.phi1 == 0 and spec.I > 1
            stable = all(v.real < 0 or (marginal_allowed and abs(v) <= 1e-12) for v in stability.analytic_eigs)
            report.check(stable, f"instance {i}: eigenvalue with non-negative real part")

            model = build_homogeneous(spec)
            target = spec.I * homogeneous_equilibrium(spec).a_plus
            for j, start in enumerate(starts):
                trace = round_robin(model, start, dynamics)
                sums = trace.final.reshape(spec.Q, spec.I).sum(axis=1)
                report.check(trace.converged and bool(np.all(np.abs(sums - target) <= 1e-4 * _scale(target))),
                             f"instance {i} start {j}: path sums {sums.tolist()} vs {target:.9g}")

        report.guard(f"instance {i}", check)
    return report


def bargaining_gap_suite(count: int, seed: int) -> SuiteReport:
    """The competitive attribute never exceeds the bargaining attribute on a single path."""
    report = SuiteReport("bargaining-gap")
    worked = replace(WORKED_HOMOGENEOUS, I=2)
    a_plus, a_nbs = homogeneous_equilibrium(worked).a_plus, homogeneous_nbs(worked)
    report.check(a_plus < a_nbs - 1e-3, f"worked I=2: no strict gap ({a_plus:.6g} vs {a_nbs:.6g})")

    rng = np.random.default_rng(seed)
    for i in range(count):
        spec = random_homogeneous_spec(rng, Q=1)

        def check():
            a_plus, a_nbs = homogeneous_equilibrium(spec).a_plus, homogeneous_nbs(spec)
            report.check(a_plus <= a_nbs + 1e-9 * _scale(a_nbs),
                         f"instance {i}: a+ {a_plus:.9g} > bargaining {a_nbs:.9g}")

        report.guard(f"instance {i}", check)
    return report


def competition_gain_suite(count: int, seed: int) -> SuiteReport:
    """Shared paths never lower the homogeneous equilibrium attribute; the conditional profit claim holds."""
    report = SuiteReport("competition-gain")
    rng = np.random.default_rng(seed)
    for Q in range(1, 9):
        for i in range(count):
            spec = random_homogeneous_spec(rng, Q=Q)

            def check():
                outcome = homogeneous_competition(spec)
                slack = 1e-9 * _scale(outcome.a_plus_isolated)
                report.check(outcome.a_plus_competitive >= outcome.a_plus_isolated - slack,
                             f"Q={Q} instance {i}: competitive {outcome.a_plus_competitive:.9g} "
                             f"< isolated {outcome.a_plus_isolated:.9g}")
                report.check(outcome.profit_claim, f"Q={Q} instance {i}: profit claim fails")

            report.guard(f"Q={Q} instance {i}", check)
    return report


def heterogeneous_suite(count: int, seed: int) -> SuiteReport:
    """Single- and two-path closed forms are equilibria; equilibrium valuation stays below the bargaining one."""
    report = SuiteReport("heterogeneous")
    symmetric = two_path_equilibrium(build_two_isp_market(TwoIspMarket(
        alpha1=1.0, alpha10=0.0, phi1=0.0, phi10=0.0, gamma1=1.0, rho1=1.0,
        alpha2=1.0, alpha20=0.0, phi2=0.0, phi20=0.0, gamma2=1.0, rho2=1.0, d=4.0,
    )))
    for path_id, value in symmetric.path_valuations.items():
        report.check(abs(value - 0.8660254) <= 1e-6, f"symmetric two-path {path_id}: {value:.9g}")

    rng = np.random.default_rng(seed)
    for i in range(count):
        model = random_path_model(rng, two_paths=bool(i % 2))

        def check():
            if len(model.paths) == 1:
                equilibrium = single_path_equilibrium(model, "r")
                bargaining = single_path_nbs(model, "r")
                v_plus, v_nbs = equilibrium.diagnostics["valuation"], bargaining.diagnostics["valuation"]
                report.check(v_plus <= v_nbs + 1e-9 * _scale(v_nbs),
                             f"instance {i}: v+ {v_plus:.9g} > v° {v_nbs:.9g}")
            else:
                equilibrium = two_path_equilibrium(model)
            report.check(equilibrium.residual <= 1e-6 * _scale(equilibrium.attributes),
                         f"instance {i}: residual {equilibrium.residual:.3g}")

        report.guard(f"instance {i}", check)
    return report


def quartic_suite(count: int, seed: int) -> SuiteReport:
    """Two-ISP equilibria against damped iteration, and against the two-path closed form without unit costs."""
    report = SuiteReport("quartic")
    rng = np.random.default_rng(seed)
    oracle = _settled(ORACLE_ETA, ORACLE_TOL, 200000)
    methods: Dict[str, int] = {}
    for i in range(count):
        params = random_two_isp_market(rng)

        def check():
            result = quartic_two_path_equilibrium(params)
            method = result.diagnostics["method"]
            methods[method] = methods.get(method, 0) + 1
            model = build_two_isp_market(params)
            trace = round_robin(model, model.zeros(), oracle)
            gap = float(np.max(np.abs(result.attributes - trace.final)))
            report.check(gap <= 1e-5 * _scale(trace.final),
                         f"instance {i}: quartic vs iteration gap {gap:.3g} ({method})")

            plain = replace(params, phi1=0.0, phi2=0.0)
            quartic = quartic_two_path_equilibrium(plain)
            closed = two_path_equilibrium(build_two_isp_market(plain))
            worst = max(abs(quartic.path_valuations[p] - v) for p, v in closed.path_valuations.items())
            report.check(worst <= 1e-6 * _scale(list(closed.path_valuations.values())),
                         f"instance {i}: no-unit-cost valuations differ by {worst:.3g}")

        report.guard(f"instance {i}", check)
    report.details["methods"] = methods
    fallbacks = count - methods.get("direct", 0)
    if fallbacks:
        logger.warning("direct quartic rejected on %d of %d instances", fallbacks, count)
    report.details["direct_quartic_rejected"] = fallbacks
    return report


def two_path_stability_suite(count: int, seed: int) -> SuiteReport:
    """Unique two-path equilibria satisfy the product rule and attract perturbed round-robin starts."""
    report = SuiteReport("two-path-stability")
    rng = np.random.default_rng(seed)
    dynamics = _settled(0.5, 1e-10)
    skipped = 0
    for i in range(count):
        model = random_path_model(rng, two_paths=True)
        noise = [rng.uniform(-0.5, 0.5, size=model.shape) for _ in range(20)]

        def check():
            nonlocal skipped
            equilibrium = two_path_equilibrium(model)
            try:
                stability = jacobian_two_path(model, equilibrium)
            except UnsupportedScopeError:
                skipped += 1
                return
            product = float(stability.jacobian[0, 1] * stability.jacobian[1, 0])
            report.check(product < 1, f"instance {i}: J_r J_rbar = {product:.6g}")
            A = equilibrium.attributes
            for j, shift in enumerate(noise):
                trace = round_robin(model, model.clamp(A + shift * np.maximum(1.0, A)), dynamics)
                reached = path_valuations(model, trace.final)
                worst = max(abs(reached[p] - v) for p, v in equilibrium.path_valuations.items())
                scale = _scale(list(equilibrium.path_valuations.values()))
                report.check(trace.converged and worst <= 1e-4 * scale,
                             f"instance {i} start {j}: valuations off by {worst:.3g}")

        report.guard(f"instance {i}", check)
    report.details["non_unique_skipped"] = skipped
    return report


def demand_crossover_suite(count: int, seed: int) -> SuiteReport:
    """For large enough demand the competitive network is valued at least as highly as the isolated one."""
    report = SuiteReport("demand-crossover")
    rng = np.random.default_rng(seed)
    grid = np.logspace(-2, 6, 20)
    for i in range(count):
        profile_r = PathProfile(psi=float(rng.uniform(0.1, 2.0)), base_valuation=float(rng.uniform(0.0, 2.0)))
        profile_rbar = PathProfile(psi=float(rng.uniform(0.1, 2.0)), base_valuation=float(rng.uniform(0.0, 2.0)))

        def check():
            sweep = demand_sweep(profile_r, profile_rbar, grid)
            report.check(sweep.crossover is not None,
                         f"instance {i}: no crossover for {profile_r}, {profile_rbar}")

        report.guard(f"instance {i}", check)
    return report


def competition_decline_suite(count: int, seed: int) -> SuiteReport:
    """The decline construction lowers the network valuation over a demand grid."""
    report = SuiteReport("competition-decline")
    worked = construct_competition_decline(2.0, 2.0, 0.1).valuations()
    report.check(abs(worked.delta + 0.012346) <= 1e-5, f"worked d=(2, 2): delta {worked.delta:.6g}")

    demands = np.linspace(0.5, 8.0, count)
    for d_r in demands:
        for d_rbar in demands:
            def check():
                delta = construct_competition_decline(float(d_r), float(d_rbar), 0.1).valuations().delta
                report.check(delta < 0, f"d=({d_r:.4g}, {d_rbar:.4g}): delta {delta:.3g}")

            report.guard(f"d=({d_r:.4g}, {d_rbar:.4g})", check)
    return report


def _brute_force_paths(graph: AsGraph, src: str, dst: str, max_hops: int) -> List[Tuple[str, ...]]:
    undirected = graph.graph.to_undirected()
    found = [
        tuple(p) for p in nx.all_simple_paths(undirected, src, dst, cutoff=max_hops - 1)
        if is_gao_rexford(graph, p)
    ]
    return sorted(found, key=lambda p: (len(p), path_key(p)))


def topology_suite(count: int, seed: int) -> SuiteReport:
    """Valley-free enumeration against brute force, and gravity demand conservation."""
    report = SuiteReport("topology")
    rng = np.random.default_rng(seed)
    for i in range(count):
        num_nodes = int(rng.integers(3, 9))
        graph = random_as_graph(rng, num_nodes)
        total = float(rng.uniform(1.0, 1e6))
        distances = {(a, b): float(rng.uniform(1.0, 5.0)) for a, b in permutations(graph.nodes, 2) if a < b}

        def check():
            mismatches = [
                (src, dst) for src, dst in permutations(graph.nodes, 2)
                if enumerate_paths(graph, src, dst, k=10 ** 6, max_hops=num_nodes)
                != _brute_force_paths(graph, src, dst, num_nodes)
            ]
            report.check(not mismatches, f"graph {i}: enumeration differs for pairs {mismatches[:5]}")
            demands = gravity_demand(graph, distances, GravitySpec(total_traffic=total))
            allocated = sum(demands.values())
            report.check(abs(allocated - total) <= 1e-9 * total,
                         f"graph {i}: allocated {allocated!r} of {total!r}")

        report.guard(f"graph {i}", check)
    return report


SUITES: Dict[str, Tuple[Callable[[int, int], SuiteReport], int]] = {
    "best-response": (best_response_suite, 1000),
    "homogeneous": (homogeneous_suite, 500),
    "stability": (homogeneous_stability_suite, 200),
    "bargaining-gap": (bargaining_gap_suite, 1000),
    "competition-gain": (competition_gain_suite, 200),
    "heterogeneous": (heterogeneous_suite, 500),
    "quartic": (quartic_suite, 100),
    "two-path-stability": (two_path_stability_suite, 250),
    "demand-crossover": (demand_crossover_suite, 100),
    "competition-decline": (competition_decline_suite, 10),
    "topology": (topology_suite, 50),
}
# Result-numbered names accepted on the command line and the API.
SUITE_ALIASES: Dict[str, str] = {
    "thm31": "best-response",
    "thm32": "homogeneous",
    "thm33": "stability",
    "thm34": "bargaining-gap",
    "thm35": "competition-gain",
    "thm38": "heterogeneous",
    "thm310": "heterogeneous",
    "thm311": "two-path-stability",
    "thm312": "demand-crossover",
    "thm313": "competition-decline",
}
ALL_SUITES = "all"


def suite_names() -> List[str]:
    return list(SUITES) + list(SUITE_ALIASES) + [ALL_SUITES]


def run_suite(name: str, count: Optional[int] = None, seed: int = 0) -> List[SuiteReport]:
    """Run one suite (or every suite for ``all``); ``count`` overrides the instance counts."""
    name = SUITE_ALIASES.get(name, name)
    if name == ALL_SUITES:
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise UnsupportedScopeError(f"unknown suite '{name}'; choose from {', '.join(suite_names())}")
    reports = []
    for suite in names:
        function, default_count = SUITES[suite]
        started = time.monotonic()
        report = function(count if count is not None else default_count, seed)
        report.details["seconds"] = round(time.monotonic() - started, 3)
        logger.info("suite %s: %d passed, %d failed", suite, report.passed, report.failed)
        reports.append(report)
    return reports
