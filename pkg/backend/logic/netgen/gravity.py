"""
Gravity-model demand: traffic between two ASes grows with the product of
their masses and shrinks with a power of their distance.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

from core.errors import DomainError, ModelValidationError
from logic.netgen.as_graph import AsGraph

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]

# 170 Tbps, in Gbps
DEFAULT_TOTAL_TRAFFIC = 170_000.0


@dataclass(frozen=True)
class GravitySpec:
    total_traffic: float = DEFAULT_TOTAL_TRAFFIC
    exponent: float = 2.0

    def __post_init__(self):
        if not self.total_traffic > 0:
            raise ModelValidationError("total traffic must be positive")


def gravity_weight(mass_a: float, mass_b: float, distance: float, exponent: float = 2.0) -> float:
    if not distance > 0:
        raise DomainError(f"gravity distance must be positive, got {distance}")
    return mass_a * mass_b / distance ** exponent


def gravity_demand(graph: AsGraph, distances: Mapping[Pair, float], spec: GravitySpec) -> Dict[Pair, float]:
    """Split ``spec.total_traffic`` over the pairs in proportion to their gravity."""
    weights = {}
    for (a, b), distance in distances.items():
        mass_a, mass_b = graph.mass(a), graph.mass(b)
        if mass_a is None or mass_b is None:
            raise ModelValidationError(f"pair ({a}, {b}) has an AS without mass")
        weights[(a, b)] = gravity_weight(mass_a, mass_b, distance, spec.exponent)
    total = sum(weights.values())
    if not total > 0:
        raise DomainError("all gravity weights are zero; nothing to allocate")
    demands = {pair: spec.total_traffic * weight / total for pair, weight in weights.items()}
    logger.debug("allocated %.6g traffic units over %d pairs", spec.total_traffic, len(demands))
    return demands
