"""
Closed-form equilibria of homogeneous markets.

Q disjoint paths of I identical ISPs share one market. The equilibrium is
unique in the per-ISP attribute sum a+, so a single attribute represents it.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Tuple

import numpy as np

from core.errors import SolverFailure, UnsupportedScopeError
from logic.model.network import CostForm, NetworkModel, ValuationForm
from logic.model.specs import HomogeneousSpec
from logic.solvers.best_response import is_nash_equilibrium
from logic.solvers.results import EquilibriumResult, SolverKind

logger = logging.getLogger(__name__)

LINEAR_THRESHOLD = 1e-14


@dataclass(frozen=True)
class HomogeneousEquilibrium:
    a_plus: float
    a_hat: float
    T1: float
    T2: float
    T3: float

    def to_dict(self) -> Dict[str, Any]:
        return {"a_plus": self.a_plus, "a_hat": self.a_hat, "T1": self.T1, "T2": self.T2, "T3": self.T3}


@dataclass(frozen=True)
class HomogeneousCompetition:
    """Isolated markets (N1) against the shared-path network (N2) for one spec."""

    a_plus_isolated: float
    a_plus_competitive: float
    a_nbs_isolated: float
    profit_isolated: float
    profit_competitive: float
    hypothesis: bool
    profit_claim: bool

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def quadratic_terms(spec: HomogeneousSpec) -> Tuple[float, float, float]:
    """Coefficients (T1, T2, T3) of the equilibrium quadratic in the attribute sum."""
    Q, I = spec.Q, spec.I
    a1, a0, phi1 = spec.alpha1, spec.alpha0, spec.phi1
    c = spec.cost_ratio
    margin = phi1 * (1 + Q * a0) + a1 * (spec.rho - spec.phi0)
    T1 = Q ** 2 * I ** 2 * a1 ** 2 - c * (Q * I - 1) * (Q - 1) * I * a1 ** 2 * phi1
    T2 = 2 * Q * I * a1 * (1 + Q * a0) - c * (
        a1 * phi1 * (Q * I - 1) * (1 + (Q - 1) * a0) + I * a1 * (Q - 1) * margin
    )
    T3 = (1 + Q * a0) ** 2 - c * (1 + (Q - 1) * a0) * margin
    return T1, T2, T3


def homogeneous_equilibrium(spec: HomogeneousSpec) -> HomogeneousEquilibrium:
    T1, T2, T3 = quadratic_terms(spec)
    if abs(T1) <= LINEAR_THRESHOLD * max(1.0, abs(T2), abs(T3)):
        if T2 == 0:
            raise SolverFailure("degenerate equilibrium quadratic: T1 = T2 = 0",
                                details={"T1": T1, "T2": T2, "T3": T3})
        a_hat = -T3 / T2
    else:
        discriminant = T2 ** 2 - 4 * T1 * T3
        if discriminant < 0:
            # T1 > 0 here, so T3 > 0: zero is a best response to zero and the only equilibrium
            logger.warning("negative discriminant %g for %s; equilibrium at zero", discriminant, spec)
            return HomogeneousEquilibrium(a_plus=0.0, a_hat=-T2 / (2 * T1), T1=T1, T2=T2, T3=T3)
        root = math.sqrt(discriminant)
        # Equals (root - T2) / (2 T1).
        a_hat = -2 * T3 / (root + T2) if T2 > 0 else (root - T2) / (2 * T1)
    return HomogeneousEquilibrium(a_plus=max(0.0, a_hat), a_hat=a_hat, T1=T1, T2=T2, T3=T3)


def homogeneous_nbs(spec: HomogeneousSpec) -> float:
    """Per-ISP attribute of the bargaining solution on a single homogeneous path."""
    if spec.Q != 1:
        raise UnsupportedScopeError("the homogeneous bargaining solution is defined for a single path (Q = 1)")
    c = spec.cost_ratio
    radicand = c * (spec.phi1 * (1 + spec.alpha0) + spec.I * spec.alpha1 * (spec.rho - spec.phi0))
    a_hat = (math.sqrt(radicand) - (1 + spec.alpha0)) / spec.alpha1
    return max(0.0, a_hat / spec.I)


def isp_profit(spec: HomogeneousSpec, a: float, markets: int = 1) -> float:
    """Profit of one ISP when every ISP holds attribute a.

    ``markets`` counts the markets of demand ``spec.d`` each path serves.
    """
    v = spec.I * spec.alpha1 * a + spec.alpha0
    demand = markets * spec.d * v / (1 + spec.Q * v)
    return demand * (spec.rho - spec.phi1 * a - spec.phi0) - spec.gamma1 * a


def homogeneous_competition(spec: HomogeneousSpec, tol: float = 1e-9) -> HomogeneousCompetition:
    """Compare Q isolated markets of demand d' = spec.d with Q markets sharing all paths.

    The shared-path network behaves like one market of demand d'Q.
    """
    isolated = replace(spec, Q=1)
    a_isolated = homogeneous_equilibrium(isolated).a_plus
    a_competitive = homogeneous_equilibrium(replace(spec, d=spec.d * spec.Q)).a_plus
    a_nbs = homogeneous_nbs(isolated)
    profit_isolated = isp_profit(isolated, a_isolated)
    profit_competitive = isp_profit(spec, a_competitive, markets=spec.Q)
    slack = tol * max(1.0, abs(a_isolated), abs(a_nbs))
    hypothesis = a_isolated - slack <= a_competitive <= a_nbs + slack
    profit_slack = tol * max(1.0, abs(profit_isolated))
    return HomogeneousCompetition(
        a_plus_isolated=a_isolated,
        a_plus_competitive=a_competitive,
        a_nbs_isolated=a_nbs,
        profit_isolated=profit_isolated,
        profit_competitive=profit_competitive,
        hypothesis=hypothesis,
        profit_claim=(not hypothesis) or profit_competitive >= profit_isolated - profit_slack,
    )


def homogeneous_spec_from_model(model: NetworkModel) -> HomogeneousSpec:
    """Recover the homogeneous parameters of a model, or raise if it is not homogeneous."""
    if model.valuation_form != ValuationForm.AFFINE or model.cost_form != CostForm.AFFINE:
        raise UnsupportedScopeError("homogeneous solver needs affine forms")
    if model.num_attributes != 1 or len(model.markets) != 1:
        raise UnsupportedScopeError("homogeneous solver needs one attribute and one market")
    market = model.markets[0]
    paths = [model.path(p) for p in market.paths]
    on_path = [n for p in paths for n in p.isps]
    if len(set(on_path)) != len(on_path) or len(on_path) != model.num_isps:
        raise UnsupportedScopeError("homogeneous solver needs disjoint paths covering every ISP")
    lengths = {len(p.isps) for p in paths}
    coeffs = {c for p in paths for row in p.coeffs for c in row}
    bases = {p.base_valuation for p in paths}
    params = {(i.rho, i.phi0, i.phi, i.gamma) for i in model.isps}
    if len(lengths) != 1 or len(coeffs) != 1 or len(bases) != 1 or len(params) != 1:
        raise UnsupportedScopeError("paths or ISPs are not identical")
    rho, phi0, phi, gamma = params.pop()
    return HomogeneousSpec(
        Q=len(paths), I=lengths.pop(), alpha1=coeffs.pop(), alpha0=bases.pop(),
        phi1=phi[0], phi0=phi0, gamma1=gamma[0], rho=rho, d=market.demand_limit,
    )


def solve_homogeneous_model(model: NetworkModel) -> EquilibriumResult:
    """Equilibrium of a homogeneous model with every ISP holding a+."""
    spec = homogeneous_spec_from_model(model)
    equilibrium = homogeneous_equilibrium(spec)
    A = np.full(model.shape, equilibrium.a_plus)
    check = is_nash_equilibrium(model, A)
    logger.info("homogeneous equilibrium a+=%.9g (residual %.3g)", equilibrium.a_plus, check.max_residual)
    return EquilibriumResult.from_attributes(
        model, A, SolverKind.HOMOGENEOUS, check.max_residual,
        unique_in_attributes=True, **equilibrium.to_dict(),
    )
