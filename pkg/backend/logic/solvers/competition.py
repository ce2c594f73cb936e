"""
Effects of inter-path competition on the equilibrium network valuation.

Compares a competition-free network (two paths in isolated markets) with the
competitive network (both paths in one market holding the combined demand):
a parameter construction under which competition lowers the valuation, and a
demand sweep locating the demand beyond which competition raises it.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from core.errors import DomainError, SolverFailure
from logic.model.specs import PathProfile
from logic.netgen.topologies import CompetitionPair, build_two_path_pair
from logic.solvers.heterogeneous import single_path_valuation, two_path_valuations

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairValuations:
    isolated: float
    competitive: float

    @property
    def delta(self) -> float:
        """Competitive minus isolated network valuation."""
        return self.competitive - self.isolated

    def to_dict(self) -> Dict[str, float]:
        return {"V_N3": self.isolated, "V_N4": self.competitive, "delta": self.delta}


def competition_pair_valuations(profile_r: PathProfile, profile_rbar: PathProfile,
                                d_r: float, d_rbar: float) -> PairValuations:
    """Equilibrium network valuations of the isolated and the competitive two-path networks."""
    if d_r < 0 or d_rbar < 0:
        raise DomainError("demand limits must be non-negative")
    isolated = (single_path_valuation(profile_r.psi, profile_r.base_valuation, d_r)
                + single_path_valuation(profile_rbar.psi, profile_rbar.base_valuation, d_rbar))
    competitive = sum(two_path_valuations(profile_r.psi, profile_rbar.psi, profile_r.base_valuation,
                                          profile_rbar.base_valuation, d_r + d_rbar))
    return PairValuations(isolated=isolated, competitive=competitive)


@dataclass(frozen=True)
class CompetitionDecline:
    """Parameters under which the competitive network has the lower equilibrium valuation."""

    profile_r: PathProfile
    profile_rbar: PathProfile
    d_r: float
    d_rbar: float
    psi_interval: Tuple[float, float]

    def valuations(self) -> PairValuations:
        return competition_pair_valuations(self.profile_r, self.profile_rbar, self.d_r, self.d_rbar)

    def networks(self) -> CompetitionPair:
        return build_two_path_pair(self.profile_r, self.profile_rbar, self.d_r, self.d_rbar)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "psi_r": self.profile_r.psi,
            "psi_rbar": self.profile_rbar.psi,
            "alpha_r0": self.profile_r.base_valuation,
            "alpha_rbar0": self.profile_rbar.base_valuation,
            "d_r": self.d_r,
            "d_rbar": self.d_rbar,
            "psi_interval": list(self.psi_interval),
            **self.valuations().to_dict(),
        }


def construct_competition_decline(d_r: float, d_rbar: float, margin: float) -> CompetitionDecline:
    """Choose psi and base valuations so that V(competitive) < V(isolated).

    The rival path rbar never invests (psi = 0) and carries a base valuation
    d_rbar / d_r + margin; psi_r is the midpoint of the interval in which r
    invests when isolated but not under competition.
    """
    if not (d_r > 0 and d_rbar > 0):
        raise DomainError("demand limits must be positive")
    if not margin > 0:
        raise DomainError("margin must be positive")
    alpha_r0 = 0.0
    alpha_rbar0 = d_rbar / d_r + margin
    d = d_r + d_rbar
    lower = (1 + alpha_r0) / math.sqrt(d_r)
    upper = (1 + alpha_r0 + alpha_rbar0) / (math.sqrt(d) * math.sqrt(1 + alpha_rbar0))
    if not lower < upper:
        raise DomainError(f"empty psi interval ({lower:.6g}, {upper:.6g}); increase the margin")
    construction = CompetitionDecline(
        profile_r=PathProfile(psi=(lower + upper) / 2, base_valuation=alpha_r0),
        profile_rbar=PathProfile(psi=0.0, base_valuation=alpha_rbar0),
        d_r=d_r,
        d_rbar=d_rbar,
        psi_interval=(lower, upper),
    )
    valuations = construction.valuations()
    if not valuations.delta < 0:
        raise SolverFailure(
            f"construction for d_r={d_r:g}, d_rbar={d_rbar:g} does not lower the valuation "
            f"(delta {valuations.delta:.3g})",
            details={"psi_interval": [lower, upper], **valuations.to_dict()},
        )
    logger.debug("decline construction for d_r=%g, d_rbar=%g: delta %.6g", d_r, d_rbar, valuations.delta)
    return construction


@dataclass
class DemandSweep:
    d: List[float]
    isolated: List[float]
    competitive: List[float]
    crossover: Optional[int]

    @property
    def deltas(self) -> List[float]:
        return [c - i for c, i in zip(self.competitive, self.isolated)]

    @property
    def crossover_demand(self) -> Optional[float]:
        return self.d[self.crossover] if self.crossover is not None else None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "d": self.d,
            "V_plus_N3": self.isolated,
            "V_plus_N4": self.competitive,
            "delta": self.deltas,
        })

    def to_dict(self) -> Dict[str, Any]:
        return {"rows": self.to_frame().to_dict(orient="records"), "crossover_d": self.crossover_demand}


def best_split_isolated_valuation(profile_r: PathProfile, profile_rbar: PathProfile, d: float) -> float:
    """Isolated network valuation when d is split in proportion psi^2 between the two markets."""
    s = profile_r.psi ** 2 + profile_rbar.psi ** 2
    share = profile_r.psi ** 2 / s if s > 0 else 0.5
    return (single_path_valuation(profile_r.psi, profile_r.base_valuation, share * d)
            + single_path_valuation(profile_rbar.psi, profile_rbar.base_valuation, (1 - share) * d))


def demand_sweep(profile_r: PathProfile, profile_rbar: PathProfile, d_grid: Sequence[float],
                 tol: float = 0.0) -> DemandSweep:
    """Isolated against competitive valuation over increasing demand limits.

    ``crossover`` indexes the first grid point from which the competitive
    valuation is at least the isolated one for every larger grid point.
    """
    grid = sorted(float(d) for d in d_grid)
    if any(d < 0 for d in grid):
        raise DomainError("demand limits must be non-negative")
    isolated, competitive = [], []
    for d in grid:
        isolated.append(best_split_isolated_valuation(profile_r, profile_rbar, d))
        competitive.append(sum(two_path_valuations(profile_r.psi, profile_rbar.psi, profile_r.base_valuation,
                                                   profile_rbar.base_valuation, d)))
    crossover = None
    for i in range(len(grid) - 1, -1, -1):
        if competitive[i] - isolated[i] < -tol:
            break
        crossover = i
    logger.debug("demand sweep over %d points, crossover at %s", len(grid), crossover)
    return DemandSweep(d=grid, isolated=isolated, competitive=competitive, crossover=crossover)
