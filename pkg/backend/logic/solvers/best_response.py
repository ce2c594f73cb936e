"""
Best responses of a single ISP attribute.

The closed form applies to affine models when the ISP's paths all lie in one
market; everywhere else the numeric oracle (grid scan plus bounded
refinement) maximizes the profit directly.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np
from scipy import optimize

from core.errors import DegenerateCostError, ModelValidationError, UnsupportedScopeError
from logic.model.compiled import IspObjective
from logic.model.network import AttributeMatrix, CostForm, NetworkModel, ValuationForm, check_attribute_matrix

logger = logging.getLogger(__name__)

GRID_POINTS = 513
DEFAULT_SEARCH_MAX = 1e4
MAX_SEARCH_MAX = 1e15
MAX_GRID_POINTS = 2_000_001


@dataclass(frozen=True)
class BestResponseContext:
    """Shorthands of the closed-form best response for attribute (n, k)."""

    alpha_nk_total: float
    v_minus_r_of_n: float
    v_minus_nk: float
    phi_minus_nk: float
    demand: float
    rho: float
    phi: float
    gamma: float


@dataclass(frozen=True)
class BestResponseOutcome:
    unrestricted: Optional[float]
    restricted: float

    @property
    def defined(self) -> bool:
        return self.unrestricted is not None


@dataclass(frozen=True)
class NashCheck:
    holds: bool
    max_residual: float
    worst: Optional[Tuple[int, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "max_residual": self.max_residual,
            "worst": list(self.worst) if self.worst is not None else None,
        }


def closed_form_applies(model: NetworkModel, n: int) -> bool:
    """Affine forms and every path of n inside a single market."""
    if model.valuation_form != ValuationForm.AFFINE or model.cost_form != CostForm.AFFINE:
        return False
    return len(model.markets_of_isp(n)) <= 1


def _objective(model: NetworkModel, A: AttributeMatrix, n: int, k: int) -> IspObjective:
    A = check_attribute_matrix(model, A)
    model.check_isp(n)
    model.check_attribute(k)
    return model.arrays.objective(A, n, k)


def best_response_context(model: NetworkModel, A: AttributeMatrix, n: int, k: int) -> Optional[BestResponseContext]:
    """Context of (n, k), or None when n serves no market."""
    if model.valuation_form != ValuationForm.AFFINE or model.cost_form != CostForm.AFFINE:
        raise UnsupportedScopeError("the closed-form best response needs affine valuation and cost forms")
    objective = _objective(model, A, n, k)
    if objective.num_markets == 0:
        return None
    if objective.num_markets > 1:
        raise UnsupportedScopeError(
            f"ISP {n} serves {objective.num_markets} markets; the closed form is per market"
        )
    isp = model.isps[n]
    totals = float(objective.totals[0])
    return BestResponseContext(
        alpha_nk_total=float(objective.beta[0]),
        v_minus_r_of_n=totals - float(objective.unshared[0]) - 1.0,
        v_minus_nk=totals - 1.0,
        phi_minus_nk=isp.rho - objective.net_revenue,
        demand=float(objective.demand[0]),
        rho=isp.rho,
        phi=objective.phi,
        gamma=objective.gamma,
    )


def closed_form_value(context: BestResponseContext) -> Optional[float]:
    d, phi, gamma, alpha = context.demand, context.phi, context.gamma, context.alpha_nk_total
    denominator = d * phi + gamma
    if denominator <= 0:
        raise DegenerateCostError("d*phi_nk + gamma_nk must be positive for the closed-form best response")
    outside = 1.0 + context.v_minus_r_of_n
    rest = 1.0 + context.v_minus_nk
    radicand = d * outside / denominator * (phi * rest + alpha * (context.rho - context.phi_minus_nk))
    if radicand < 0:
        return None
    return (math.sqrt(radicand) - rest) / alpha


def unrestricted_best_response(model: NetworkModel, A: AttributeMatrix, n: int, k: int) -> Optional[float]:
    """Closed-form optimal attribute without the non-negativity constraint.

    Returns None (undefined) for a negative radicand and for an ISP that
    serves no market.
    """
    context = best_response_context(model, A, n, k)
    if context is None:
        return None
    return closed_form_value(context)


def best_response_outcome(model: NetworkModel, A: AttributeMatrix, n: int, k: int) -> BestResponseOutcome:
    unrestricted = unrestricted_best_response(model, A, n, k)
    restricted = 0.0 if unrestricted is None else max(0.0, unrestricted)
    return BestResponseOutcome(unrestricted=unrestricted, restricted=restricted)


def best_response(model: NetworkModel, A: AttributeMatrix, n: int, k: int) -> float:
    """Closed-form best response clamped to zero and the model bounds."""
    return model.clamp_entry(best_response_outcome(model, A, n, k).restricted, n, k)


def _search_interval(objective: IspObjective, hint: Optional[float]) -> float:
    upper = 10.0 * hint if hint is not None and hint > 0 else DEFAULT_SEARCH_MAX
    while upper < MAX_SEARCH_MAX and float(objective.slope(upper)) > 0:
        upper *= 10.0
    return upper


def _affine_hint(model: NetworkModel, objective: IspObjective) -> Optional[float]:
    if objective.num_markets != 1 or model.valuation_form != ValuationForm.AFFINE:
        return None
    if model.cost_form != CostForm.AFFINE:
        return None
    d = float(objective.demand[0])
    if d * objective.phi + objective.gamma <= 0:
        return None
    context = BestResponseContext(
        alpha_nk_total=float(objective.beta[0]),
        v_minus_r_of_n=float(objective.totals[0] - objective.unshared[0]) - 1.0,
        v_minus_nk=float(objective.totals[0]) - 1.0,
        phi_minus_nk=0.0,
        demand=d,
        rho=objective.net_revenue,
        phi=objective.phi,
        gamma=objective.gamma,
    )
    return closed_form_value(context)


def maximize_objective(objective: IspObjective, search_max: float, step: Optional[float] = None) -> float:
    """Grid scan over [0, search_max] followed by refinement inside the best bracket.

    Ties resolve to the smallest grid point, so a flat profit returns 0.
    """
    if step is not None and step > 0:
        points = min(MAX_GRID_POINTS, int(math.ceil(search_max / step)) + 1)
    else:
        points = GRID_POINTS
    grid = np.linspace(0.0, search_max, max(points, 3))
    values = objective.value(grid)
    best = int(np.argmax(values))
    best_x, best_value = float(grid[best]), float(values[best])

    lo = float(grid[max(best - 1, 0)])
    hi = float(grid[min(best + 1, grid.size - 1)])
    slope_lo, slope_hi = float(objective.slope(lo)), float(objective.slope(hi))
    if slope_lo > 0 > slope_hi:
        return optimize.brentq(lambda x: float(objective.slope(x)), lo, hi,
                               xtol=1e-14, rtol=4 * np.finfo(float).eps)
    refined = optimize.minimize_scalar(
        lambda x: -float(objective.value(x)), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-10},
    )
    candidate = float(refined.x)
    candidate_value = float(objective.value(candidate))
    if candidate_value > best_value + 1e-15 * max(1.0, abs(best_value)):
        return candidate
    return best_x


def numeric_best_response(model: NetworkModel, A: AttributeMatrix, n: int, k: int,
                          search_max: Optional[float] = None, step: Optional[float] = None) -> float:
    """Profit-maximizing a_nk in [0, search_max], valid for any model."""
    if search_max is not None and search_max <= 0:
        raise ModelValidationError("search_max must be positive")
    objective = _objective(model, A, n, k)
    if search_max is None:
        search_max = _search_interval(objective, _affine_hint(model, objective))
    result = maximize_objective(objective, search_max, step)
    logger.debug("numeric best response of (%d, %d) on [0, %g]: %g", n, k, search_max, result)
    return result


def respond(model: NetworkModel, A: AttributeMatrix, n: int, k: int) -> float:
    """Best response of (n, k): closed form where it applies, numeric otherwise, clamped to bounds."""
    if closed_form_applies(model, n):
        try:
            return best_response(model, A, n, k)
        except DegenerateCostError:
            logger.debug("degenerate cost for (%d, %d), using the numeric oracle", n, k)
    return model.clamp_entry(numeric_best_response(model, A, n, k), n, k)


def is_nash_equilibrium(model: NetworkModel, A: AttributeMatrix, tol: float = 1e-6,
                        isps: Optional[Iterable[int]] = None) -> NashCheck:
    """Largest gap between an attribute and its best response over all (n, k), or over ``isps``."""
    A = check_attribute_matrix(model, A)
    members = range(model.num_isps) if isps is None else [model.check_isp(n) for n in isps]
    max_residual, worst = 0.0, None
    for n in members:
        for k in range(model.num_attributes):
            residual = abs(float(A[n, k]) - respond(model, A, n, k))
            if worst is None or residual > max_residual:
                max_residual, worst = residual, (n, k)
    return NashCheck(holds=max_residual <= tol, max_residual=max_residual, worst=worst)
