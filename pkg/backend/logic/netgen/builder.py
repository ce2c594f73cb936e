"""
Market selection and the full AS-graph to NetworkModel pipeline:
path enumeration, gravity demand, parameter synthesis.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import List, Optional, Tuple

from config.config import config
from core.errors import ModelValidationError
from logic.model.network import NetworkModel
from logic.netgen.as_graph import AsGraph, as_key
from logic.netgen.gravity import GravitySpec, gravity_demand, gravity_weight
from logic.netgen.params import ParamProfile, synthesize_params
from logic.netgen.paths import MarketCandidate, enumerate_paths

logger = logging.getLogger(__name__)


def _candidate(graph: AsGraph, pair: Tuple[str, str], k: int, max_hops: int) -> Optional[MarketCandidate]:
    paths = enumerate_paths(graph, pair[0], pair[1], k, max_hops)
    if len(paths) < k:
        return None
    return MarketCandidate(source=pair[0], destination=pair[1], paths=tuple(paths))


def select_markets(graph: AsGraph, k: int, max_hops: int, max_markets: Optional[int] = None,
                   exponent: float = 2.0) -> List[MarketCandidate]:
    """AS pairs with at least k valley-free paths, heaviest gravity first, ties by AS ids.

    Path enumeration is pure Python, so the thread pool mostly interleaves
    pairs under the GIL rather than running them in parallel.
    """
    pairs = [
        pair for pair in combinations(graph.nodes, 2)
        if graph.mass(pair[0]) and graph.mass(pair[1])
    ]
    with ThreadPoolExecutor(max_workers=config.sim_threads) as pool:
        found = [c for c in pool.map(lambda pair: _candidate(graph, pair, k, max_hops), pairs) if c]

    def rank(candidate: MarketCandidate):
        weight = gravity_weight(graph.mass(candidate.source), graph.mass(candidate.destination),
                                candidate.mean_hops, exponent)
        return (-weight, as_key(candidate.source), as_key(candidate.destination))

    found.sort(key=rank)
    if max_markets is not None:
        found = found[:max_markets]
    logger.info("selected %d markets with %d paths each from %d AS pairs", len(found), k, len(pairs))
    return found


def build_market_model(graph: AsGraph, k: int = 5, max_hops: int = 4,
                       gravity: Optional[GravitySpec] = None, profile: Optional[ParamProfile] = None,
                       max_markets: Optional[int] = None) -> NetworkModel:
    gravity = gravity or GravitySpec()
    profile = profile or ParamProfile()
    candidates = select_markets(graph, k, max_hops, max_markets, gravity.exponent)
    if not candidates:
        raise ModelValidationError(f"no AS pair has {k} valley-free paths of at most {max_hops} ASes")
    distances = {c.pair: c.mean_hops for c in candidates}
    demands = gravity_demand(graph, distances, gravity)
    return synthesize_params(graph, candidates, demands, profile)
