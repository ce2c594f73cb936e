"""
Network generation: theory topologies, AS graphs, path enumeration, gravity demand and parameter synthesis.
"""

from .topologies import (
    CompetitionPair,
    build_competition_pair_homogeneous,
    build_homogeneous,
    build_two_isp_market,
    build_two_path_model,
    build_two_path_pair,
)
from .as_graph import (
    AsGraph,
    EnergyProfile,
    Relation,
    generate_synthetic_graph,
    ingest_as_graph,
    prune_to_core,
    tier_classify,
)
from .paths import MarketCandidate, enumerate_paths, is_gao_rexford
from .gravity import GravitySpec, gravity_demand
from .params import ParamProfile, synthesize_params
from .builder import build_market_model, select_markets

__all__ = [
    'CompetitionPair',
    'build_competition_pair_homogeneous',
    'build_homogeneous',
    'build_two_isp_market',
    'build_two_path_model',
    'build_two_path_pair',
    'AsGraph',
    'EnergyProfile',
    'Relation',
    'generate_synthetic_graph',
    'ingest_as_graph',
    'prune_to_core',
    'tier_classify',
    'MarketCandidate',
    'enumerate_paths',
    'is_gao_rexford',
    'GravitySpec',
    'gravity_demand',
    'ParamProfile',
    'synthesize_params',
    'build_market_model',
    'select_markets',
]
