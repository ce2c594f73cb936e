"""
Numeric Nash bargaining solution for small instances.

The bargaining solution is Pareto efficient under transferable surplus: it
first maximizes the aggregate profit over the bounded attribute box
(multi-start coordinate ascent polished by L-BFGS-B) and then, among
aggregate-optimal profiles, maximizes the Nash product of the ISP profits.
"""

import logging
from typing import List, Optional

import numpy as np
from scipy import optimize

from core.errors import UnsupportedScopeError
from logic.model.network import AttributeMatrix, NetworkModel, check_attribute_matrix
from logic.solvers.results import EquilibriumResult, SolverKind

logger = logging.getLogger(__name__)

MAX_ENTRIES = 12
MAX_BRACKET = 1e12
BOUND_SLACK = 1e-12


def nbs_first_order_residual(model: NetworkModel, A: AttributeMatrix) -> float:
    """Largest component of the aggregate-profit gradient projected onto the attribute box."""
    A = check_attribute_matrix(model, A)
    gradient = model.arrays.aggregate_profit_gradient(A)
    lower, upper = model.lower_matrix(), model.upper_matrix()
    at_lower = A <= lower + BOUND_SLACK * (1.0 + lower)
    at_upper = A >= upper - BOUND_SLACK * (1.0 + np.abs(np.where(np.isfinite(upper), upper, 0.0)))
    projected = np.where(at_lower, np.maximum(gradient, 0.0), gradient)
    projected = np.where(at_upper, np.minimum(projected, 0.0), projected)
    return float(np.abs(projected).max()) if projected.size else 0.0


class _AggregateSearch:
    """Coordinate ascent on the aggregate profit inside the model bounds."""

    def __init__(self, model: NetworkModel, tol: float = 1e-12):
        self.model = model
        self.tol = tol
        self.lower = model.lower_matrix()
        self.upper = model.upper_matrix()

    def value(self, A: np.ndarray) -> float:
        return float(self.model.arrays.profits(A).sum())

    def slope(self, A: np.ndarray, n: int, k: int) -> float:
        return float(self.model.arrays.aggregate_profit_gradient(A)[n, k])

    def _coordinate_max(self, A: np.ndarray, n: int, k: int) -> float:
        lo, cap = float(self.lower[n, k]), float(self.upper[n, k])

        def slope_at(x: float) -> float:
            B = A.copy()
            B[n, k] = x
            return self.slope(B, n, k)

        if slope_at(lo) <= 0:
            return lo
        hi = max(2.0 * A[n, k], lo + 1.0)
        while hi < cap and hi < MAX_BRACKET and slope_at(min(hi, cap)) > 0:
            hi *= 4.0
        hi = min(hi, cap)
        if slope_at(hi) >= 0:
            return hi
        return optimize.brentq(slope_at, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)

    def ascend(self, start: np.ndarray, max_iters: int) -> np.ndarray:
        A = self.model.clamp(start)
        for sweep in range(max_iters):
            change = 0.0
            for n in range(self.model.num_isps):
                for k in range(self.model.num_attributes):
                    updated = self._coordinate_max(A, n, k)
                    change = max(change, abs(updated - A[n, k]) / max(1.0, abs(updated)))
                    A[n, k] = updated
            logger.debug("coordinate sweep %d: change %.3g", sweep, change)
            if change <= self.tol:
                break
        return A

    def polish(self, A: np.ndarray) -> np.ndarray:
        shape = A.shape
        bounds = [(lo, None if np.isinf(hi) else hi) for lo, hi in zip(self.lower.ravel(), self.upper.ravel())]
        result = optimize.minimize(
            lambda x: -self.value(x.reshape(shape)),
            A.ravel(),
            jac=lambda x: -self.model.arrays.aggregate_profit_gradient(x.reshape(shape)).ravel(),
            method="L-BFGS-B",
            bounds=bounds,
            options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 2000},
        )
        polished = self.model.clamp(result.x.reshape(shape))
        return polished if self.value(polished) >= self.value(A) else A


def _nash_product_stage(model: NetworkModel, A: np.ndarray, target: float, slack: float) -> np.ndarray:
    """Among profiles with aggregate profit >= target - slack, maximize the sum of log profits."""
    shape = A.shape
    lower, upper = model.lower_matrix(), model.upper_matrix()
    bounds = [(lo, None if np.isinf(hi) else hi) for lo, hi in zip(lower.ravel(), upper.ravel())]

    def negative_log_product(x: np.ndarray) -> float:
        values = model.arrays.profits(x.reshape(shape))
        if (values <= 0).any():
            return 1e300
        return -float(np.log(values).sum())

    result = optimize.minimize(
        negative_log_product, A.ravel(), method="SLSQP", bounds=bounds,
        constraints=[{"type": "ineq",
                      "fun": lambda x: float(model.arrays.profits(x.reshape(shape)).sum()) - target + slack}],
        options={"ftol": 1e-14, "maxiter": 500},
    )
    candidate = model.clamp(result.x.reshape(shape))
    feasible = float(model.arrays.profits(candidate).sum()) >= target - slack
    if feasible and negative_log_product(candidate.ravel()) < negative_log_product(A.ravel()):
        return candidate
    return A


def nbs_global(model: NetworkModel, max_iters: int = 200, starts: int = 4,
               seed: Optional[int] = None) -> EquilibriumResult:
    """Bargaining solution of a small model (at most 12 attribute entries)."""
    if model.num_isps * model.num_attributes > MAX_ENTRIES:
        raise UnsupportedScopeError(
            f"global bargaining search is limited to {MAX_ENTRIES} attribute entries, "
            f"got {model.num_isps * model.num_attributes}"
        )
    rng = np.random.default_rng(seed)
    search = _AggregateSearch(model)
    candidates: List[np.ndarray] = [model.lower_matrix()]
    for _ in range(max(0, starts - 1)):
        candidates.append(model.lower_matrix() + rng.uniform(0.0, 10.0, size=model.shape))

    best, best_value = None, -np.inf
    for start in candidates:
        A = search.polish(search.ascend(start, max_iters))
        value = search.value(A)
        if value > best_value:
            best, best_value = A, value

    warnings = []
    profits = model.arrays.profits(best)
    if (profits > 0).all():
        best = _nash_product_stage(model, best, best_value, 1e-9 * max(1.0, abs(best_value)))
        profits = model.arrays.profits(best)
    elif (profits <= 0).all():
        logger.warning("no ISP earns a positive profit at the best profile found")
        warnings.append("all profits non-positive at the best profile found")

    logger.info("bargaining search: aggregate profit %.9g, Nash product %.9g", profits.sum(), np.prod(profits))
    return EquilibriumResult.from_attributes(
        model, best, SolverKind.NBS, nbs_first_order_residual(model, best),
        unique_in_attributes=True,
        nash_product=float(np.prod(profits)),
        aggregate_profit=float(profits.sum()),
        profits=profits.tolist(),
        warnings=warnings,
    )
