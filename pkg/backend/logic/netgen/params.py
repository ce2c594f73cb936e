"""
Parameter synthesis for AS-level market models.

Two attributes per ISP: internal bandwidth (Gbps, bounded below by a share
of the demand it would carry under an even split) and clean-energy share
(bounded by 1). Monetary parameters are per time window; demands arrive in
Gbps and are converted to GB per window with ``window_gb_per_gbps``.
"""

import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from core.errors import ModelValidationError
from logic.model.network import IspParams, Market, NetworkModel, Path
from logic.netgen.as_graph import AsGraph, EnergyProfile, as_key, tier_classify
from logic.netgen.paths import MarketCandidate

logger = logging.getLogger(__name__)

BANDWIDTH, CLEAN_ENERGY = 0, 1
ATTRIBUTES = ("bandwidth", "clean-energy")


@dataclass(frozen=True)
class ParamProfile:
    """Constants of the parameter recipes.

    ``w`` USD per GB; ``bandwidth_cost_max`` USD per Gbps and window;
    ``p_co2`` USD per ton; ``g_clean_premium`` USD per MWh; ``rho`` USD per
    GB; ``c_max`` gCO2 per kWh.
    """

    w: float = 0.17
    bandwidth_cost_max: float = 94.0
    p_co2: float = 90.0
    g_clean_premium: float = 3.375
    rho: float = 0.104
    seed: int = 0
    c_max: float = 875.0
    floor_share: float = 0.1
    window_gb_per_gbps: float = 324_000.0
    energy_intensity_range: Tuple[float, float] = (0.005, 0.05)
    idle_energy_range: Tuple[float, float] = (1e4, 1e6)

    def __post_init__(self):
        for name in ("w", "bandwidth_cost_max", "p_co2", "g_clean_premium", "rho", "c_max",
                     "floor_share", "window_gb_per_gbps"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ModelValidationError(f"parameter profile: {name} must be positive, got {value}")
        for name in ("energy_intensity_range", "idle_energy_range"):
            low, high = getattr(self, name)
            if not 0 < low <= high:
                raise ModelValidationError(f"parameter profile: {name} must satisfy 0 < low <= high")
            object.__setattr__(self, name, (float(low), float(high)))

    @property
    def clean_premium_per_kwh(self) -> float:
        return self.g_clean_premium * 1e-3

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> "ParamProfile":
        try:
            return cls(**{key: tuple(value) if isinstance(value, list) else value
                          for key, value in document.items()})
        except TypeError as e:
            raise ModelValidationError(f"invalid parameter profile: {e}")


def _energy_profiles(graph: AsGraph, members: Sequence[str], profile: ParamProfile,
                     rng: np.random.Generator) -> Dict[str, EnergyProfile]:
    """Graph energy profiles, drawn log-uniform from the profile ranges where missing."""
    energies = {}
    for as_id in members:
        energy = graph.energy(as_id)
        if energy is None:
            low, high = profile.energy_intensity_range
            idle_low, idle_high = profile.idle_energy_range
            energy = EnergyProfile(
                mean_energy_intensity=math.exp(rng.uniform(math.log(low), math.log(high))),
                idle_power=math.exp(rng.uniform(math.log(idle_low), math.log(idle_high))),
            )
        energies[as_id] = energy
    return energies


def synthesize_params(graph: AsGraph, candidates: Sequence[MarketCandidate],
                      demands: Mapping[Tuple[str, str], float], profile: ParamProfile) -> NetworkModel:
    """Model over the ASes on the candidate paths, one market per candidate.

    ``demands`` are in Gbps per pair.
    """
    members = sorted({a for c in candidates for p in c.paths for a in p}, key=as_key)
    index = {as_id: n for n, as_id in enumerate(members)}
    for as_id in members:
        mass = graph.mass(as_id)
        if mass is None or mass <= 0:
            raise ModelValidationError(f"AS {as_id} on an enumerated path has no positive mass")

    rng = np.random.default_rng(profile.seed)
    gamma_bandwidth = rng.uniform(0.0, profile.bandwidth_cost_max, size=len(members))
    energies = _energy_profiles(graph, members, profile, rng)
    tiers = tier_classify(graph)
    # clean-energy valuation per unit share: p_co2 * e * c_max, converting g to t
    carbon = {a: profile.p_co2 * energies[a].mean_energy_intensity * profile.c_max * 1e-6 for a in members}

    paths: List[Path] = []
    markets: List[Market] = []
    floor = np.zeros(len(members))
    for candidate in candidates:
        demand_gbps = demands[candidate.pair]
        max_carbon = max(sum(carbon[a] for a in p) for p in candidate.paths)
        ids = []
        for i, as_path in enumerate(candidate.paths):
            path_id = f"{candidate.source}-{candidate.destination}#{i}"
            coeffs = tuple(
                (profile.w / (len(as_path) * graph.mass(a)), carbon[a]) for a in as_path
            )
            paths.append(Path(
                id=path_id,
                isps=tuple(index[a] for a in as_path),
                base_valuation=max(0.0, max_carbon - sum(carbon[a] for a in as_path)),
                coeffs=coeffs,
            ))
            ids.append(path_id)
            for a in as_path:
                floor[index[a]] += profile.floor_share * demand_gbps / len(candidate.paths)
        markets.append(Market(candidate.source, candidate.destination,
                              demand_gbps * profile.window_gb_per_gbps, tuple(ids)))

    intensities: Dict[int, List[float]] = defaultdict(list)
    for path in paths:
        for n in path.isps:
            intensities[n].append(energies[members[n]].mean_energy_intensity)
    isps = tuple(
        IspParams(
            name=as_id,
            rho=profile.rho,
            phi0=0.0,
            phi=(0.0, profile.clean_premium_per_kwh * float(np.mean(intensities[n]))),
            gamma=(float(gamma_bandwidth[n]), profile.clean_premium_per_kwh * energies[as_id].idle_power),
            gamma0=0.0,
            tier=tiers.get(as_id),
        )
        for n, as_id in enumerate(members)
    )
    lower = np.zeros((len(members), len(ATTRIBUTES)))
    lower[:, BANDWIDTH] = floor
    upper = np.full((len(members), len(ATTRIBUTES)), math.inf)
    upper[:, CLEAN_ENERGY] = 1.0
    logger.info("synthesized parameters for %d ISPs, %d paths, %d markets", len(isps), len(paths), len(markets))
    return NetworkModel(
        isps=isps,
        attributes=ATTRIBUTES,
        paths=tuple(paths),
        markets=tuple(markets),
        lower_bounds=lower,
        upper_bounds=upper,
    )
