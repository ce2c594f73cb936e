"""
Evaluation of the economic model for a given attribute matrix.

Path valuations, logit-style selection probabilities, ISP demand, profit,
aggregate valuation and the Nash bargaining product. All functions are pure;
bounds are not enforced here, any non-negative matrix is accepted.
"""

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from core.errors import DomainError, ModelValidationError
from logic.model.compiled import cost_transform, valuation_transform
from logic.model.network import AttributeMatrix, NetworkModel, check_attribute_matrix


@dataclass(frozen=True)
class ProfitBreakdown:
    demand: float
    revenue: float
    demand_cost: float
    fixed_cost: float

    @property
    def profit(self) -> float:
        return self.revenue - self.demand_cost - self.fixed_cost


def path_valuation(model: NetworkModel, A: AttributeMatrix, r: str) -> float:
    """v_r: base valuation plus the (transformed) attributes of the on-path ISPs."""
    A = check_attribute_matrix(model, A)
    path = model.path(r)
    g = valuation_transform(A, model.valuation_form.value)
    value = path.base_valuation
    for n, coeffs in zip(path.isps, path.coeffs):
        value += float(np.dot(coeffs, g[n]))
    return value


def path_valuations(model: NetworkModel, A: AttributeMatrix) -> dict:
    A = check_attribute_matrix(model, A)
    values = model.arrays.valuations(A)
    return {path.id: float(v) for path, v in zip(model.paths, values)}


def selection_probability(model: NetworkModel, A: AttributeMatrix, market: int, r: str) -> float:
    """p_r = v_r / (1 + sum of the market's path valuations)."""
    selected = model.market(market)
    if r not in selected.paths:
        raise ModelValidationError(f"path {r} is not selectable in market {selected.key}")
    valuations = [path_valuation(model, A, p) for p in selected.paths]
    return path_valuation(model, A, r) / (1.0 + sum(valuations))


def path_demand(model: NetworkModel, A: AttributeMatrix, r: str) -> float:
    """Expected demand routed over path r, summed over the markets offering it."""
    A = check_attribute_matrix(model, A)
    return float(model.arrays.path_demand(A)[model.path_index(r)])


def isp_demand(model: NetworkModel, A: AttributeMatrix, n: int) -> float:
    """D_n: expected demand over all paths through n, across markets."""
    A = check_attribute_matrix(model, A)
    model.check_isp(n)
    return float(model.arrays.isp_demand(A)[n])


def profit_breakdown(model: NetworkModel, A: AttributeMatrix, n: int) -> ProfitBreakdown:
    A = check_attribute_matrix(model, A)
    model.check_isp(n)
    isp = model.isps[n]
    h = cost_transform(A[n], model.cost_form.value)
    demand = isp_demand(model, A, n)
    return ProfitBreakdown(
        demand=demand,
        revenue=demand * isp.rho,
        demand_cost=demand * (float(np.dot(isp.phi, h)) + isp.phi0),
        fixed_cost=float(np.dot(isp.gamma, h)) + isp.gamma0,
    )


def profit(model: NetworkModel, A: AttributeMatrix, n: int) -> float:
    """pi_n = D_n (rho - Phi_n) - Gamma_n; may be negative."""
    return profit_breakdown(model, A, n).profit


def profits(model: NetworkModel, A: AttributeMatrix) -> np.ndarray:
    A = check_attribute_matrix(model, A)
    return model.arrays.profits(A)


def aggregate_profit(model: NetworkModel, A: AttributeMatrix) -> float:
    return float(profits(model, A).sum())


def aggregate_valuation(model: NetworkModel, A: AttributeMatrix) -> float:
    """V(A): sum of all path valuations (0 for an empty path set)."""
    A = check_attribute_matrix(model, A)
    return float(model.arrays.valuations(A).sum())


def nash_product(model: NetworkModel, A: AttributeMatrix, subset: Iterable[int]) -> float:
    members = list(subset)
    if not members:
        raise ModelValidationError("the Nash product needs a non-empty ISP subset")
    values = profits(model, A)
    result = 1.0
    for n in members:
        result *= float(values[model.check_isp(n)])
    return result


def cheapness_attribute(price: float, p_max: float) -> float:
    """Turn a price into the desirable 'cheapness' attribute p_max - price."""
    if price < 0 or p_max < 0:
        raise DomainError("price and p_max must be non-negative")
    if price > p_max:
        raise DomainError(f"price {price} exceeds p_max {p_max}")
    return p_max - price
