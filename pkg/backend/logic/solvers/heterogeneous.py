"""
Closed-form solutions of heterogeneous single-path and two-path markets.

Only the attributes with the best return ratio on a path invest; the path
valuation follows from the characteristic ratio of the path and the demand.
Attribute-dependent per-unit costs are assumed to vanish on the paths
involved.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import optimize

from core.errors import DegenerateCostError, UnsupportedScopeError
from logic.model.evaluation import profits
from logic.model.network import CostForm, NetworkModel, Path, ValuationForm
from logic.solvers.bargaining import nbs_first_order_residual
from logic.solvers.best_response import is_nash_equilibrium
from logic.solvers.results import EquilibriumResult, SolverKind

logger = logging.getLogger(__name__)

RATIO_RTOL = 1e-12

Entry = Tuple[int, int]


@dataclass(frozen=True)
class WinnerSets:
    equilibrium: Tuple[Entry, ...]
    nbs: Tuple[Entry, ...]


@dataclass(frozen=True)
class _Ranking:
    winners: Tuple[Entry, ...]
    best_ratio: float
    excluded: Tuple[Entry, ...]
    notes: Tuple[str, ...] = ()


def _require_affine(model: NetworkModel) -> None:
    if model.valuation_form != ValuationForm.AFFINE or model.cost_form != CostForm.AFFINE:
        raise UnsupportedScopeError("heterogeneous closed forms need affine valuation and cost forms")


def _require_no_unit_attribute_cost(model: NetworkModel, path: Path) -> None:
    for n in path.isps:
        if any(phi != 0 for phi in model.isps[n].phi):
            raise UnsupportedScopeError(
                f"ISP {n} on path {path.id} has attribute-dependent per-unit cost; "
                "heterogeneous closed forms assume phi_nk = 0"
            )


def _rank(candidates: List[Tuple[Entry, float, float]], what: str) -> _Ranking:
    """Argmax of numerator / gamma over candidates; zero-cost candidates are left out of the argmax.

    A zero-cost candidate with a positive numerator has an unbounded ratio and
    is reported in ``notes``.
    """
    ratios, excluded, notes = [], [], []
    for entry, numerator, gamma in candidates:
        if gamma == 0:
            if numerator > 0:
                note = f"attribute {list(entry)} has zero cost and positive {what}; excluded from the winner set"
                logger.warning("%s", note)
                notes.append(note)
            else:
                logger.debug("excluding zero-cost attribute %s without %s from the winner set", entry, what)
            excluded.append(entry)
            continue
        ratios.append((entry, numerator / gamma))
    if not ratios:
        return _Ranking(winners=(), best_ratio=0.0, excluded=tuple(excluded), notes=tuple(notes))
    best = max(ratio for _, ratio in ratios)
    winners = tuple(
        entry for entry, ratio in ratios if math.isclose(ratio, best, rel_tol=RATIO_RTOL, abs_tol=0.0)
    )
    return _Ranking(winners=tuple(sorted(winners)), best_ratio=best, excluded=tuple(excluded), notes=tuple(notes))


def _equilibrium_ranking(model: NetworkModel, path: Path) -> _Ranking:
    candidates = []
    for n, row in zip(path.isps, path.coeffs):
        isp = model.isps[n]
        for k, alpha in enumerate(row):
            candidates.append(((n, k), alpha * (isp.rho - isp.phi0), isp.gamma[k]))
    return _rank(candidates, "net revenue")


def _nbs_ranking(model: NetworkModel, path: Path) -> _Ranking:
    total_net_revenue = sum(model.isps[n].rho - model.isps[n].phi0 for n in path.isps)
    candidates = []
    for n, row in zip(path.isps, path.coeffs):
        for k, alpha in enumerate(row):
            candidates.append(((n, k), alpha * total_net_revenue, model.isps[n].gamma[k]))
    ranking = _rank(candidates, "aggregate net revenue")
    if total_net_revenue > 0:
        ranking = _Ranking(ranking.winners, ranking.best_ratio / total_net_revenue, ranking.excluded,
                           ranking.notes)
    return ranking


def heterogeneous_winner_sets(model: NetworkModel, r: str) -> WinnerSets:
    """Attributes that may invest in equilibrium and in the bargaining solution."""
    path = model.path(r)
    return WinnerSets(equilibrium=_equilibrium_ranking(model, path).winners,
                      nbs=_nbs_ranking(model, path).winners)


def characteristic_ratio(model: NetworkModel, r: str) -> float:
    """psi_r: the largest sqrt(alpha_nk (rho_n - phi_n0) / gamma_nk) on path r."""
    path = model.path(r)
    best = 0.0
    for n, row in zip(path.isps, path.coeffs):
        isp = model.isps[n]
        for k, alpha in enumerate(row):
            if isp.gamma[k] == 0:
                raise DegenerateCostError(f"attribute ({n}, {k}) on path {r} has zero cost")
            best = max(best, alpha * (isp.rho - isp.phi0) / isp.gamma[k])
    return math.sqrt(best)


def _isolated_market(model: NetworkModel, r: str) -> float:
    """Demand of the only market offering r, which must offer nothing else."""
    path = model.path(r)
    offering = [m for m, market in enumerate(model.markets) if r in market.paths]
    if len(offering) != 1 or model.markets[offering[0]].paths != (r,):
        raise UnsupportedScopeError(f"path {r} must be the only path of exactly one market")
    for n in path.isps:
        if model.markets_of_isp(n) != (offering[0],):
            raise UnsupportedScopeError(f"ISP {n} of path {r} serves other markets")
    return model.markets[offering[0]].demand_limit


def _place_mass(A: np.ndarray, path: Path, winners: Tuple[Entry, ...], valuation: float) -> None:
    """Give the valuation above the base to the first winner."""
    mass = valuation - path.base_valuation
    if mass <= 0 or not winners:
        return
    n, k = winners[0]
    A[n, k] = mass / path.coeff(n, k)


def single_path_valuation(psi: float, base_valuation: float, d: float) -> float:
    return max(base_valuation, psi * math.sqrt(d) - 1.0)


def single_path_equilibrium(model: NetworkModel, r: str) -> EquilibriumResult:
    _require_affine(model)
    path = model.path(r)
    _require_no_unit_attribute_cost(model, path)
    d = _isolated_market(model, r)
    ranking = _equilibrium_ranking(model, path)
    valuation = single_path_valuation(math.sqrt(ranking.best_ratio), path.base_valuation, d)

    A = model.zeros()
    _place_mass(A, path, ranking.winners, valuation)
    check = is_nash_equilibrium(model, A, isps=path.isps)
    return EquilibriumResult.from_attributes(
        model, A, SolverKind.SINGLE_PATH, check.max_residual,
        unique_in_attributes=len(ranking.winners) == 1,
        valuation=valuation,
        winners=[list(w) for w in ranking.winners],
        excluded=[list(e) for e in ranking.excluded],
        warnings=list(ranking.notes),
    )


def _split_for_nash_product(model: NetworkModel, A: np.ndarray, path: Path,
                            winners: Tuple[Entry, ...], mass: float) -> np.ndarray:
    """Split the valuation mass over the winners so that the Nash product of the path's ISPs is maximal."""
    coeffs = np.array([path.coeff(n, k) for n, k in winners])
    members = list(path.isps)

    def embed(x: np.ndarray) -> np.ndarray:
        B = A.copy()
        for (n, k), value in zip(winners, x):
            B[n, k] = max(0.0, value)
        return B

    def negative_log_product(x: np.ndarray) -> float:
        values = profits(model, embed(x))[members]
        if (values <= 0).any():
            return 1e300
        return -float(np.log(values).sum())

    start = mass / (len(winners) * coeffs)
    if negative_log_product(start) >= 1e300:
        logger.warning("equal split leaves a non-positive profit on path %s; keeping it", path.id)
        return embed(start)
    result = optimize.minimize(
        negative_log_product, start, method="SLSQP",
        bounds=[(0.0, None)] * len(winners),
        constraints=[{"type": "eq", "fun": lambda x: float(coeffs @ x) - mass,
                      "jac": lambda x: coeffs}],
        options={"ftol": 1e-12, "maxiter": 500},
    )
    best = result.x if result.success and negative_log_product(result.x) <= negative_log_product(start) else start
    return embed(best)


def single_path_nbs(model: NetworkModel, r: str) -> EquilibriumResult:
    _require_affine(model)
    path = model.path(r)
    _require_no_unit_attribute_cost(model, path)
    d = _isolated_market(model, r)
    ranking = _nbs_ranking(model, path)
    total_net_revenue = sum(model.isps[n].rho - model.isps[n].phi0 for n in path.isps)
    valuation = max(path.base_valuation, math.sqrt(ranking.best_ratio * d * total_net_revenue) - 1.0)

    A = model.zeros()
    mass = valuation - path.base_valuation
    if len(ranking.winners) > 1 and mass > 0:
        A = _split_for_nash_product(model, A, path, ranking.winners, mass)
    else:
        _place_mass(A, path, ranking.winners, valuation)
    return EquilibriumResult.from_attributes(
        model, A, SolverKind.SINGLE_PATH_NBS, nbs_first_order_residual(model, A),
        unique_in_attributes=len(ranking.winners) == 1,
        valuation=valuation,
        winners=[list(w) for w in ranking.winners],
        excluded=[list(e) for e in ranking.excluded],
        warnings=list(ranking.notes),
    )


def best_response_valuation(psi: float, d: float, other: float) -> float:
    """Unrestricted best-response valuation of a path facing an alternative valued ``other``."""
    return psi * math.sqrt(d) * math.sqrt(1.0 + other) - (1.0 + other)


def unrestricted_two_path_valuation(psi: float, psi_other: float, d: float) -> float:
    s = psi ** 2 + psi_other ** 2
    if s == 0:
        return -1.0
    root = math.sqrt(d * s + 0.25 * psi ** 2 * psi_other ** 2 * d ** 2)
    return psi ** 3 * psi_other / s ** 2 * (root + 0.5 * d * psi * psi_other) - psi_other ** 2 / s


def two_path_valuations(psi_r: float, psi_rbar: float, base_r: float, base_rbar: float,
                        d: float) -> Tuple[float, float]:
    """Equilibrium valuations of two competing paths from their characteristic ratios."""
    hat_r = unrestricted_two_path_valuation(psi_r, psi_rbar, d)
    hat_rbar = unrestricted_two_path_valuation(psi_rbar, psi_r, d)
    v_r = max(base_r, best_response_valuation(psi_r, d, max(base_rbar, hat_rbar)))
    v_rbar = max(base_rbar, best_response_valuation(psi_rbar, d, max(base_r, hat_r)))
    return v_r, v_rbar


def _two_path_scope(model: NetworkModel) -> Tuple[Path, Path, float]:
    _require_affine(model)
    if len(model.markets) != 1 or len(model.markets[0].paths) != 2:
        raise UnsupportedScopeError("two-path solver needs exactly one market with two paths")
    market = model.markets[0]
    path, other = model.path(market.paths[0]), model.path(market.paths[1])
    if set(path.isps) & set(other.isps):
        raise UnsupportedScopeError(f"paths {path.id} and {other.id} overlap")
    for p in (path, other):
        _require_no_unit_attribute_cost(model, p)
    return path, other, market.demand_limit


def two_path_equilibrium(model: NetworkModel) -> EquilibriumResult:
    path, other, d = _two_path_scope(model)
    ranking = _equilibrium_ranking(model, path)
    ranking_other = _equilibrium_ranking(model, other)
    psi_r, psi_rbar = math.sqrt(ranking.best_ratio), math.sqrt(ranking_other.best_ratio)
    v_r, v_rbar = two_path_valuations(psi_r, psi_rbar, path.base_valuation, other.base_valuation, d)

    A = model.zeros()
    _place_mass(A, path, ranking.winners, v_r)
    _place_mass(A, other, ranking_other.winners, v_rbar)
    check = is_nash_equilibrium(model, A, isps=path.isps + other.isps)
    if check.max_residual > 1e-6 * max(1.0, float(np.max(np.abs(A)))):
        logger.warning("two-path equilibrium residual %.3g exceeds 1e-6 relative to the attributes",
                       check.max_residual)
    return EquilibriumResult.from_attributes(
        model, A, SolverKind.TWO_PATH, check.max_residual,
        unique_in_attributes=len(ranking.winners) == 1 and len(ranking_other.winners) == 1,
        psi={path.id: psi_r, other.id: psi_rbar},
        winners={path.id: [list(w) for w in ranking.winners],
                 other.id: [list(w) for w in ranking_other.winners]},
        excluded={path.id: [list(e) for e in ranking.excluded],
                  other.id: [list(e) for e in ranking_other.excluded]},
        warnings=list(ranking.notes + ranking_other.notes),
    )

