"""
Round-robin better responses, Euler integration and Jacobian stability.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from core.errors import ModelValidationError, SolverFailure, UnsupportedScopeError
from logic.model.network import IspParams, Market, NetworkModel, uniform_path
from logic.model.specs import PathProfile
from logic.netgen.topologies import build_homogeneous, build_two_path_model
from logic.solvers import (
    DynamicsConfig,
    DynamicsMode,
    Stability,
    VisitOrder,
    classify,
    eigenvalues,
    integrate_ode,
    jacobian_homogeneous,
    jacobian_two_path,
    round_robin,
    simulate,
)
from logic.solvers.dynamics import initial_state, multi_start, random_starts
from logic.solvers.stability import numeric_jacobian, stability_of

SQRT3_HALF = math.sqrt(3) / 2


def _rr(step: float, tol: float = 1e-10, **kwargs) -> DynamicsConfig:
    return DynamicsConfig(mode=DynamicsMode.ROUND_ROBIN, step=step, tol=tol, **kwargs)


class TestRoundRobin:
    def test_full_step_reaches_equilibrium_in_one_round(self, monopoly):
        trace = round_robin(monopoly, monopoly.zeros(), _rr(1.0))
        assert trace.states[1][0, 0] == pytest.approx(1.0)
        assert trace.converged
        assert trace.rounds == 1

    def test_half_step_halves_the_gap(self, monopoly):
        trace = round_robin(monopoly, monopoly.zeros(), _rr(0.5))
        for t, state in enumerate(trace.states[:20]):
            assert abs(state[0, 0] - 1.0) == pytest.approx(0.5 ** t)
        assert trace.converged

    def test_start_at_equilibrium(self, monopoly):
        trace = round_robin(monopoly, np.array([[1.0]]), _rr(0.5, tol=1e-6))
        assert trace.converged
        assert trace.rounds == 0
        assert trace.final_residual <= 1e-6

    def test_round_limit(self, monopoly):
        trace = round_robin(monopoly, monopoly.zeros(), _rr(0.5, max_rounds=3))
        assert not trace.converged
        assert trace.rounds == 3
        assert len(trace.states) == 4

    def test_two_path_endpoint(self, symmetric_two_path):
        start = initial_state(symmetric_two_path, "random:7")
        trace = round_robin(symmetric_two_path, start, _rr(0.5))
        assert trace.converged
        assert trace.final[:, 0] == pytest.approx([SQRT3_HALF, SQRT3_HALF], abs=1e-6)

    def test_seeded_shuffle_is_reproducible(self, symmetric_two_path):
        settings = _rr(0.5, order=VisitOrder.SEEDED_SHUFFLE, seed=3)
        first = round_robin(symmetric_two_path, symmetric_two_path.zeros(), settings)
        second = round_robin(symmetric_two_path, symmetric_two_path.zeros(), settings)
        assert first.residuals == second.residuals

    def test_homogeneous_endpoint(self, unit_spec):
        model = build_homogeneous(replace(unit_spec, Q=2))
        trace = round_robin(model, initial_state(model, "random:1"), _rr(0.5))
        assert trace.converged
        assert trace.final[:, 0] == pytest.approx([SQRT3_HALF, SQRT3_HALF], abs=1e-6)


class TestEuler:
    def test_converges_to_constant_best_response(self, monopoly):
        settings = DynamicsConfig(mode=DynamicsMode.ODE_EULER, step=0.1, tol=1e-9)
        trace = integrate_ode(monopoly, monopoly.zeros(), settings)
        assert trace.converged
        assert trace.final[0, 0] == pytest.approx(1.0, abs=1e-6)

    def test_start_at_equilibrium(self, monopoly):
        settings = DynamicsConfig(mode=DynamicsMode.ODE_EULER, step=0.1, tol=1e-6)
        trace = simulate(monopoly, np.array([[1.0]]), settings)
        assert trace.mode == DynamicsMode.ODE_EULER
        assert trace.converged
        assert trace.rounds == 0


class TestSettings:
    @pytest.mark.parametrize("overrides", [{"step": 0.0}, {"step": 1.5}, {"tol": 0.0}, {"max_rounds": 0}])
    def test_invalid(self, overrides):
        with pytest.raises(ModelValidationError):
            DynamicsConfig(mode=DynamicsMode.ROUND_ROBIN, **overrides)

    def test_euler_step_may_exceed_one(self):
        assert DynamicsConfig(mode=DynamicsMode.ODE_EULER, step=2.0).step == 2.0

    def test_for_mode_ignores_missing_overrides(self):
        settings = DynamicsConfig.for_mode(DynamicsMode.ROUND_ROBIN, step=None, tol=1e-4)
        assert settings.tol == 1e-4
        assert 0 < settings.step <= 1

    def test_initial_states(self, tmp_path, monopoly):
        assert initial_state(monopoly, "zeros")[0, 0] == 0.0
        assert np.array_equal(initial_state(monopoly, "random:5"), initial_state(monopoly, "random:5"))
        matrix = tmp_path / "start.json"
        matrix.write_text("[[2.5]]", encoding="utf-8")
        assert initial_state(monopoly, str(matrix))[0, 0] == 2.5
        with pytest.raises(ModelValidationError):
            initial_state(monopoly, "random:x")
        with pytest.raises(ModelValidationError):
            initial_state(monopoly, str(tmp_path / "missing.json"))


def test_multi_start_keeps_start_order(monopoly):
    starts = random_starts(monopoly, 3, seed=11)
    traces = multi_start(monopoly, starts, _rr(0.5), max_workers=2)
    assert [t.states[0][0, 0] for t in traces] == [s[0, 0] for s in starts]
    assert all(t.final[0, 0] == pytest.approx(1.0) for t in traces)


def test_trace_frame_and_csv(tmp_path, monopoly):
    trace = round_robin(monopoly, monopoly.zeros(), _rr(1.0))
    frame = trace.to_frame()
    assert list(frame.columns) == ["round", "n", "k", "value"]
    assert len(frame) == len(trace.states)
    target = tmp_path / "trace" / "trace.csv"
    trace.write_csv(str(target))
    assert target.read_text(encoding="utf-8").splitlines()[0] == "round,n,k,value"
    assert trace.summary()["final_state"] == [[1.0]]


class TestStability:
    def test_two_path_jacobian(self, symmetric_two_path):
        report = jacobian_two_path(symmetric_two_path)
        off_diagonal = 1 / math.sqrt(1 + SQRT3_HALF) - 1
        assert report.jacobian[0, 1] == pytest.approx(off_diagonal, abs=1e-6)
        assert report.jacobian[1, 0] == pytest.approx(-0.267949, abs=1e-6)
        assert report.classification == Stability.STABLE
        assert sorted(v.real for v in report.eigenvalues) == pytest.approx([-1 - abs(off_diagonal),
                                                                             -1 + abs(off_diagonal)])

    def test_two_path_silent_rival(self):
        model = build_two_path_model(PathProfile(1.0), PathProfile(0.0), 4.0)
        report = jacobian_two_path(model)
        assert report.jacobian[1, 0] == 0.0
        assert report.classification == Stability.STABLE

    def test_two_path_needs_unique_equilibrium(self):
        twin = IspParams(name="twin", rho=1.0, phi0=0.0, phi=(0.0, 0.0), gamma=(1.0, 1.0))
        model = NetworkModel(
            isps=(twin, replace(twin, name="rival")),
            attributes=("quality", "energy"),
            paths=(uniform_path("r", [0], [1.0, 1.0]), uniform_path("rbar", [1], [1.0, 1.0])),
            markets=(Market("s", "t", 4.0, ("r", "rbar")),),
        )
        with pytest.raises(UnsupportedScopeError):
            jacobian_two_path(model)

    def test_homogeneous_monopoly(self, unit_spec):
        report = jacobian_homogeneous(unit_spec)
        assert report.jacobian.tolist() == [[-1.0]]
        assert report.classification == Stability.STABLE

    def test_homogeneous_zero_equilibrium(self, unit_spec):
        report = jacobian_homogeneous(replace(unit_spec, Q=2, I=2, gamma1=100.0))
        assert np.array_equal(report.jacobian, -np.eye(4))
        assert all(v == -1 for v in report.eigenvalues)

    def test_homogeneous_analytic_spectrum_matches(self, unit_spec):
        report = jacobian_homogeneous(replace(unit_spec, Q=2))
        assert report.classification == Stability.STABLE
        numeric = sorted(v.real for v in report.eigenvalues)
        analytic = sorted(v.real for v in report.analytic_eigs)
        assert numeric == pytest.approx(analytic, abs=1e-8)

    def test_numeric_jacobian_matches_analytic(self, symmetric_two_path):
        A = np.full((2, 1), SQRT3_HALF)
        J = numeric_jacobian(symmetric_two_path, A)
        assert J == pytest.approx(jacobian_two_path(symmetric_two_path).jacobian, abs=1e-5)
        assert stability_of(symmetric_two_path, A).classification == Stability.STABLE


class TestEigenvalues:
    def test_identity(self):
        assert eigenvalues(np.eye(3)) == pytest.approx([1, 1, 1])

    def test_rotation(self):
        values = eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))
        assert values == pytest.approx([-1j, 1j])

    def test_symmetric_matrix_matches_characteristic_roots(self):
        rng = np.random.default_rng(4)
        B = rng.normal(size=(5, 5))
        M = B + B.T
        roots = np.sort(np.roots(np.poly(M)).real)
        assert np.sort([v.real for v in eigenvalues(M)]) == pytest.approx(roots, abs=1e-7)

    def test_rejects_bad_input(self):
        with pytest.raises(ModelValidationError):
            eigenvalues(np.ones((2, 3)))
        with pytest.raises(SolverFailure):
            eigenvalues(np.array([[np.inf]]))
        assert eigenvalues(np.zeros((0, 0))) == []

    @pytest.mark.parametrize("values,expected", [
        ([-1.0, -0.5], Stability.STABLE),
        ([0.0, -1.0], Stability.MARGINAL),
        ([0.1 + 1j, -1.0], Stability.UNSTABLE),
    ])
    def test_classify(self, values, expected):
        assert classify(values) == expected
