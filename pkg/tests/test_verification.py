"""
Randomized property suites: small smoke runs by default, the full instance counts under the slow marker.
"""

import numpy as np
import pytest

from core.errors import UnsupportedScopeError
from logic.experiments import SuiteReport, run_suite, suite_names
from logic.experiments.verification import (
    BASE_HIGH,
    PARAM_HIGH,
    PARAM_LOW,
    SUITE_ALIASES,
    SUITES,
    log_uniform,
    random_homogeneous_spec,
    random_two_isp_market,
    revenue_pair,
)

SMALL_COUNTS = {
    "competition-decline": 2,
    "topology": 3,
    "quartic": 5,
    "two-path-stability": 5,
    "stability": 5,
}


@pytest.mark.parametrize("name", list(SUITES))
def test_suite_passes_on_a_few_instances(name):
    reports = run_suite(name, count=SMALL_COUNTS.get(name, 10), seed=1)
    assert [r.suite for r in reports] == [name]
    report = reports[0]
    assert report.ok, report.failures
    assert report.passed > 0
    assert "seconds" in report.details


def test_same_seed_same_report():
    first = run_suite("best-response", count=10, seed=4)[0].to_dict()
    second = run_suite("best-response", count=10, seed=4)[0].to_dict()
    first["details"].pop("seconds")
    second["details"].pop("seconds")
    assert first == second


def test_unknown_suite():
    with pytest.raises(UnsupportedScopeError):
        run_suite("everything")


def test_suite_names_include_all():
    assert suite_names()[-1] == "all"
    assert set(SUITES) <= set(suite_names())
    assert set(SUITE_ALIASES) <= set(suite_names())
    assert set(SUITE_ALIASES.values()) <= set(SUITES)


def test_numbered_names_run_the_named_suite():
    reports = run_suite("thm34", count=5, seed=1)
    assert [r.suite for r in reports] == ["bargaining-gap"]
    assert reports[0].ok, reports[0].failures


def test_report_bookkeeping():
    report = SuiteReport(suite="demo")
    assert report.check(True, "fine")
    assert not report.check(False, "broken")
    report.guard("instance 3", lambda: run_suite("nope"))
    assert report.to_dict() == {
        "suite": "demo",
        "passed": 1,
        "failed": 2,
        "failures": ["broken", report.failures[1]],
        "details": {},
    }
    assert report.failures[1].startswith("instance 3: UnsupportedScopeError")
    assert not report.ok


@pytest.mark.slow
def test_every_suite_at_full_size():
    reports = run_suite("all", seed=0)
    assert [r.suite for r in reports] == list(SUITES)
    failing = {r.suite: r.failures[:5] for r in reports if not r.ok}
    assert not failing


def test_random_parameters_span_four_decades():
    rng = np.random.default_rng(0)
    draws = np.array([log_uniform(rng) for _ in range(4000)])
    assert draws.min() >= PARAM_LOW
    assert draws.max() <= PARAM_HIGH
    # log-uniform: about half of the draws fall below the geometric midpoint 1
    assert 0.45 < np.mean(draws < 1.0) < 0.55
    assert draws.min() < 0.02 and draws.max() > 50.0

    pairs = [revenue_pair(rng) for _ in range(500)]
    assert all(rho >= phi0 for rho, phi0 in pairs)


def test_random_instances_respect_the_ranges():
    rng = np.random.default_rng(2)
    for _ in range(200):
        spec = random_homogeneous_spec(rng)
        assert spec.rho >= spec.phi0
        assert 0.0 <= spec.alpha0 <= BASE_HIGH
        for value in (spec.alpha1, spec.gamma1, spec.rho, spec.phi0, spec.d):
            assert PARAM_LOW <= value <= PARAM_HIGH
        assert spec.phi1 == 0.0 or PARAM_LOW <= spec.phi1 <= PARAM_HIGH

        market = random_two_isp_market(rng)
        assert market.rho1 >= market.phi10 and market.rho2 >= market.phi20
        assert 0.0 <= market.alpha10 <= BASE_HIGH and 0.0 <= market.alpha20 <= BASE_HIGH
        assert PARAM_LOW <= market.d <= PARAM_HIGH
