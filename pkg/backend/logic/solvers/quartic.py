"""
Equilibrium of a market with two single-ISP paths and general cost terms.

The fixed point a1 = a1*(a2*(a1)) reduces to a quartic in a1. Roots of the
direct coefficient set are tried first; every candidate is judged by its
best-response residual, so an inconsistent coefficient set is detected and
replaced by an independent elimination polynomial in the first path's
valuation, the boundary candidates, and finally damped iteration.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from core.errors import SolverFailure, UnsupportedScopeError
from logic.model.network import CostForm, NetworkModel, ValuationForm
from logic.model.specs import TwoIspMarket
from logic.netgen.topologies import build_two_isp_market
from logic.solvers.best_response import is_nash_equilibrium, respond
from logic.solvers.dynamics import DynamicsConfig, DynamicsMode, round_robin
from logic.solvers.results import EquilibriumResult, SolverKind

logger = logging.getLogger(__name__)

ACCEPT_RESIDUAL = 1e-8
FAIL_RESIDUAL = 1e-4
IMAG_TOL = 1e-9
ORACLE_ETA = 0.3
ORACLE_TOL = 1e-12


@dataclass(frozen=True)
class QuarticCoefficients:
    T4: float
    T3: float
    T2: float
    T1: float
    T0: float
    L1: float
    L2: float
    L3: float
    L4: float
    L5: float
    L6: float

    def polynomial(self) -> np.ndarray:
        """Coefficients, highest power first."""
        return np.array([self.T4, self.T3, self.T2, self.T1, self.T0])

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def direct_coefficients(params: TwoIspMarket) -> QuarticCoefficients:
    """Closed-form quartic coefficients, reading index 1 as the first ISP and index 2 as the second."""
    p = params
    a1, a2 = p.alpha1, p.alpha2
    phi11, phi21 = p.phi1, p.phi2
    r1, r2 = p.rho1, p.rho2

    L1 = p.d / (p.d * phi21 + p.gamma2)
    L2 = p.gamma1 / (p.d * phi21 + p.gamma2)
    L3 = phi21 * (2 + 2 * p.alpha10 + p.alpha20) - a2 * (p.phi20 - r2)
    L4 = (1 + p.alpha10) * (phi21 * (1 + p.alpha10 + p.alpha20) + a2 * (r2 - p.phi20))
    L5 = phi11 * p.alpha10 - a1 * (r1 - p.phi10)
    L6 = -p.alpha10 * (r1 - p.phi10)

    T4 = a1 ** 4 * (phi11 * (2 * phi21 * (2 * phi11 * L1 + L2) - phi11) - phi21 ** 2 * L2 ** 2)
    T3 = 2 * a1 ** 3 * (
        phi11 * (2 * L1 * (phi11 * L3 + phi21 * L5) + L2 * L3 - L5)
        + phi21 * (L2 * L5 - L2 ** 2 * L3)
    )
    T2 = a1 ** 2 * (
        L1 * (4 * phi11 ** 2 * L4 + 4 * phi11 * L3 * L5 + phi21 * L5 ** 2)
        - L2 ** 2 * (2 * phi21 * L4 + L3 ** 2)
        + 2 * L2 * (phi11 * L4 + L5 * L3 + phi21 * a1 * L6)
        - 2 * phi11 * a1 * L6
        - L5 ** 2
    )
    T1 = a1 * (
        L1 * (4 * phi11 * L4 * L5 + L5 ** 2 * L3)
        - 2 * L2 ** 2 * L3 * L4
        + 2 * L2 * (L5 * L4 + a1 * L3 * L6)
        - 2 * a1 * L5 * L6
    )
    T0 = L1 * L4 * L5 ** 2 - L2 ** 2 * L4 ** 2 + 2 * a1 * L2 * L4 * L6 - a1 ** 2 * L6 ** 2
    return QuarticCoefficients(T4, T3, T2, T1, T0, L1, L2, L3, L4, L5, L6)


@dataclass(frozen=True)
class _Elimination:
    """P M^2 - N^2 = 0 in the first path's valuation w, valid where N / M >= 0."""

    P: Polynomial
    M: Polynomial
    N: Polynomial

    @property
    def quartic(self) -> Polynomial:
        return self.P * self.M ** 2 - self.N ** 2


def elimination_polynomial(params: TwoIspMarket) -> _Elimination:
    p = params
    c1 = p.d / (p.d * p.phi1 + p.gamma1)
    c2 = p.d / (p.d * p.phi2 + p.gamma2)
    w = Polynomial([0.0, 1.0])
    # radicand of the second ISP's best response when the first path is valued w
    P = c2 * (1 + w) * (p.phi2 * (1 + w + p.alpha20) + p.alpha2 * (p.rho2 - p.phi20))
    K = p.phi1 * p.alpha10 + p.alpha1 * (p.rho1 - p.phi10)
    M = c1 * K - 2 * c1 * p.phi1 * w
    N = (1 - c1 * p.phi1) * P - c1 * p.phi1 * w ** 2 + c1 * K * w
    return _Elimination(P=P, M=M, N=N)


def _real_roots(roots: np.ndarray) -> List[float]:
    return [float(z.real) for z in roots if abs(z.imag) <= IMAG_TOL * max(1.0, abs(z))]


def _polynomial_roots(coefficients: np.ndarray) -> np.ndarray:
    """All roots via companion-matrix eigenvalues; an identically zero polynomial has none."""
    coefficients = np.trim_zeros(np.asarray(coefficients, dtype=float), "f")
    if coefficients.size <= 1:
        return np.array([], dtype=complex)
    return np.roots(coefficients).astype(complex)


class _Candidates:
    """Attribute pairs (a1, a2) scored by their best-response residual relative to max(1, |a1|, |a2|)."""

    def __init__(self, model: NetworkModel):
        self.model = model
        self.scored: List[Tuple[float, float, float, str]] = []

    def respond_second(self, a1: float) -> float:
        return respond(self.model, np.array([[a1], [0.0]]), 1, 0)

    def respond_first(self, a2: float) -> float:
        return respond(self.model, np.array([[0.0], [a2]]), 0, 0)

    def add(self, a1: float, a2: float, origin: str) -> float:
        A = np.array([[a1], [a2]])
        residual = is_nash_equilibrium(self.model, A).max_residual / max(1.0, abs(a1), abs(a2))
        self.scored.append((residual, a1, a2, origin))
        return residual

    def add_first(self, a1: float, origin: str) -> Optional[float]:
        if not math.isfinite(a1) or a1 < 0:
            return None
        return self.add(a1, self.respond_second(a1), origin)

    def best(self, origins: Optional[Tuple[str, ...]] = None) -> Optional[Tuple[float, float, float, str]]:
        pool = [c for c in self.scored if origins is None or c[3] in origins]
        return min(pool, key=lambda c: (c[0], c[1], c[2])) if pool else None


def _damped_iteration(model: NetworkModel) -> Tuple[np.ndarray, bool]:
    trace = round_robin(model, model.zeros(),
                        DynamicsConfig(mode=DynamicsMode.ROUND_ROBIN, step=ORACLE_ETA, tol=ORACLE_TOL,
                                       max_rounds=200000, relative=True))
    return trace.final, trace.converged


def quartic_two_path_equilibrium(params: TwoIspMarket) -> EquilibriumResult:
    """Equilibrium (a1+, a2+) of a two-ISP market with general per-unit costs."""
    model = build_two_isp_market(params)
    candidates = _Candidates(model)

    coefficients = direct_coefficients(params)
    direct_roots = _polynomial_roots(coefficients.polynomial())
    for root in _real_roots(direct_roots):
        candidates.add_first(root, "direct")
    direct_best = candidates.best(("direct",))
    direct_residual = direct_best[0] if direct_best else math.inf

    elimination_roots = np.array([], dtype=complex)
    if direct_residual <= ACCEPT_RESIDUAL:
        selected = direct_best
    else:
        logger.warning("direct quartic gives no equilibrium (best residual %.3g); using elimination",
                       direct_residual)
        elimination = elimination_polynomial(params)
        elimination_roots = _polynomial_roots(elimination.quartic.coef[::-1])
        for w in _real_roots(elimination_roots):
            m, n = elimination.M(w), elimination.N(w)
            if m == 0 or n / m < 0:
                continue
            candidates.add_first((w - params.alpha10) / params.alpha1, "elimination")
        # boundary equilibria: one ISP responds to a silent rival, the rival must stay at zero
        candidates.add_first(candidates.respond_first(0.0), "boundary")
        candidates.add(0.0, candidates.respond_second(0.0), "boundary")
        candidates.add(0.0, 0.0, "boundary")
        selected = candidates.best()

    if selected is None or selected[0] > ACCEPT_RESIDUAL:
        A, converged = _damped_iteration(model)
        residual = candidates.add(float(A[0, 0]), float(A[1, 0]), "iteration")
        logger.info("damped iteration %s with residual %.3g",
                    "converged" if converged else "stopped", residual)
        selected = candidates.best()

    all_roots = list(direct_roots) + list(elimination_roots)
    residual, a1, a2, method = selected
    if residual > FAIL_RESIDUAL:
        raise SolverFailure(f"no two-ISP equilibrium candidate within residual {FAIL_RESIDUAL}",
                            roots=all_roots,
                            details={"best_residual": residual, "coefficients": coefficients.to_dict()})

    direct_a1 = [c[1] for c in candidates.scored if c[3] == "direct"]
    discrepancy = min((abs(x - a1) for x in direct_a1), default=math.inf)
    warnings = []
    if method != "direct":
        warnings.append(f"direct quartic rejected: best residual {direct_residual:.3g}, "
                        f"closest root off by {discrepancy:.3g}")
    logger.info("two-ISP equilibrium a1=%.9g a2=%.9g via %s (residual %.3g)", a1, a2, method, residual)
    return EquilibriumResult.from_attributes(
        model, np.array([[a1], [a2]]), SolverKind.QUARTIC, residual,
        unique_in_attributes=True,
        a1_plus=a1,
        a2_plus=a2,
        roots=direct_roots.tolist(),
        elimination_roots=elimination_roots.tolist(),
        method=method,
        direct_residual=direct_residual,
        discrepancy=discrepancy,
        coefficients=coefficients.to_dict(),
        warnings=warnings,
    )


def two_isp_params_from_model(model: NetworkModel) -> TwoIspMarket:
    """Recover the two-ISP parameter set from a model, or raise if it has another shape."""
    if model.valuation_form != ValuationForm.AFFINE or model.cost_form != CostForm.AFFINE:
        raise UnsupportedScopeError("two-ISP quartic needs affine forms")
    if model.num_attributes != 1 or len(model.markets) != 1 or len(model.markets[0].paths) != 2:
        raise UnsupportedScopeError("two-ISP quartic needs one attribute and one market with two paths")
    first, second = (model.path(p) for p in model.markets[0].paths)
    if len(first.isps) != 1 or len(second.isps) != 1 or first.isps == second.isps:
        raise UnsupportedScopeError("two-ISP quartic needs two disjoint single-ISP paths")
    if model.num_isps != 2:
        raise UnsupportedScopeError("two-ISP quartic needs exactly two ISPs")
    isp1, isp2 = model.isps[first.isps[0]], model.isps[second.isps[0]]
    if first.isps[0] != 0:
        raise UnsupportedScopeError("the first path of the market must belong to ISP 0")
    return TwoIspMarket(
        alpha1=first.coeffs[0][0], alpha10=first.base_valuation,
        phi1=isp1.phi[0], phi10=isp1.phi0, gamma1=isp1.gamma[0], rho1=isp1.rho,
        alpha2=second.coeffs[0][0], alpha20=second.base_valuation,
        phi2=isp2.phi[0], phi20=isp2.phi0, gamma2=isp2.gamma[0], rho2=isp2.rho,
        d=model.markets[0].demand_limit,
    )
