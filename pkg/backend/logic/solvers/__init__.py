"""
Equilibrium, bargaining, dynamics and stability solvers.
"""

from .results import EquilibriumResult, SolverKind
from .best_response import (
    best_response,
    best_response_context,
    best_response_outcome,
    is_nash_equilibrium,
    numeric_best_response,
    respond,
    unrestricted_best_response,
)
from .bargaining import nbs_first_order_residual, nbs_global
from .homogeneous import (
    homogeneous_competition,
    homogeneous_equilibrium,
    homogeneous_nbs,
    solve_homogeneous_model,
)
from .heterogeneous import (
    characteristic_ratio,
    heterogeneous_winner_sets,
    single_path_equilibrium,
    single_path_nbs,
    two_path_equilibrium,
    two_path_valuations,
)
from .dynamics import DynamicsConfig, DynamicsMode, DynamicsTrace, VisitOrder, integrate_ode, round_robin, simulate
from .stability import Stability, StabilityReport, classify, eigenvalues, jacobian_homogeneous, jacobian_two_path
from .quartic import QuarticCoefficients, direct_coefficients, quartic_two_path_equilibrium
from .competition import competition_pair_valuations, construct_competition_decline, demand_sweep

__all__ = [
    'EquilibriumResult',
    'SolverKind',
    'best_response',
    'best_response_context',
    'best_response_outcome',
    'is_nash_equilibrium',
    'numeric_best_response',
    'respond',
    'unrestricted_best_response',
    'nbs_first_order_residual',
    'nbs_global',
    'homogeneous_competition',
    'homogeneous_equilibrium',
    'homogeneous_nbs',
    'solve_homogeneous_model',
    'characteristic_ratio',
    'heterogeneous_winner_sets',
    'single_path_equilibrium',
    'single_path_nbs',
    'two_path_equilibrium',
    'two_path_valuations',
    'DynamicsConfig',
    'DynamicsMode',
    'DynamicsTrace',
    'VisitOrder',
    'integrate_ode',
    'round_robin',
    'simulate',
    'Stability',
    'StabilityReport',
    'classify',
    'eigenvalues',
    'jacobian_homogeneous',
    'jacobian_two_path',
    'QuarticCoefficients',
    'direct_coefficients',
    'quartic_two_path_equilibrium',
    'competition_pair_valuations',
    'construct_competition_decline',
    'demand_sweep',
]
