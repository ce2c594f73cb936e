"""
Economic model of ISP path competition.
"""

from .network import (
    AttributeMatrix,
    CostForm,
    IspParams,
    Market,
    NetworkModel,
    Path,
    Tier,
    ValuationForm,
)
from .evaluation import (
    aggregate_profit,
    aggregate_valuation,
    cheapness_attribute,
    isp_demand,
    nash_product,
    path_demand,
    path_valuation,
    profit,
    profit_breakdown,
    selection_probability,
)
from .serialization import load_model, model_from_json, model_to_json, save_model

__all__ = [
    'AttributeMatrix',
    'CostForm',
    'IspParams',
    'Market',
    'NetworkModel',
    'Path',
    'Tier',
    'ValuationForm',
    'aggregate_profit',
    'aggregate_valuation',
    'cheapness_attribute',
    'isp_demand',
    'nash_product',
    'path_demand',
    'path_valuation',
    'profit',
    'profit_breakdown',
    'selection_probability',
    'load_model',
    'model_from_json',
    'model_to_json',
    'save_model',
]
