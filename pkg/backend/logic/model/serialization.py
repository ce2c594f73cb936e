"""
JSON (de)serialization of network models.

Schema::

    {
      "attributes": ["bandwidth", ...],
      "isps":    [{"name", "rho", "phi0", "phi": [...], "gamma": [...], "gamma0", "tier"}],
      "paths":   [{"id", "isps": [...], "base_valuation", "valuation_coeffs": [[...], ...]}],
      "markets": [{"source", "destination", "demand_limit", "paths": [...]}],
      "forms":   {"valuation": "affine" | "sqrt-attribute", "cost": "affine" | "quadratic-attribute"},
      "bounds":  {"lower": [[...]] | null, "upper": [[...]] | null}
    }

Infinite upper bounds are written as ``null`` entries.
"""

import json
import math
from pathlib import Path as FilePath
from typing import Any, Dict, List, Optional

import numpy as np

from core.errors import ModelValidationError
from logic.model.network import (
    CostForm, IspParams, Market, NetworkModel, Path, Tier, ValuationForm,
)


def _bounds_to_list(bounds: Optional[np.ndarray]) -> Optional[List[List[Optional[float]]]]:
    if bounds is None:
        return None
    return [[None if math.isinf(x) else float(x) for x in row] for row in bounds]


def _bounds_from_list(rows: Optional[List[List[Optional[float]]]]) -> Optional[np.ndarray]:
    if rows is None:
        return None
    return np.array([[math.inf if x is None else float(x) for x in row] for row in rows], dtype=float)


def model_to_dict(model: NetworkModel) -> Dict[str, Any]:
    return {
        "attributes": list(model.attributes),
        "isps": [
            {
                "name": isp.name,
                "rho": isp.rho,
                "phi0": isp.phi0,
                "phi": list(isp.phi),
                "gamma": list(isp.gamma),
                "gamma0": isp.gamma0,
                "tier": isp.tier.value,
            }
            for isp in model.isps
        ],
        "paths": [
            {
                "id": path.id,
                "isps": list(path.isps),
                "base_valuation": path.base_valuation,
                "valuation_coeffs": [list(row) for row in path.coeffs],
            }
            for path in model.paths
        ],
        "markets": [
            {
                "source": market.source,
                "destination": market.destination,
                "demand_limit": market.demand_limit,
                "paths": list(market.paths),
            }
            for market in model.markets
        ],
        "forms": {"valuation": model.valuation_form.value, "cost": model.cost_form.value},
        "bounds": {
            "lower": _bounds_to_list(model.lower_bounds),
            "upper": _bounds_to_list(model.upper_bounds),
        },
    }


def model_from_dict(document: Dict[str, Any]) -> NetworkModel:
    try:
        forms = document.get("forms", {})
        bounds = document.get("bounds", {}) or {}
        return NetworkModel(
            isps=tuple(
                IspParams(
                    name=item["name"],
                    rho=item["rho"],
                    phi0=item.get("phi0", 0.0),
                    phi=tuple(item["phi"]),
                    gamma=tuple(item["gamma"]),
                    gamma0=item.get("gamma0", 0.0),
                    tier=Tier(item.get("tier", Tier.UNCLASSIFIED.value)),
                )
                for item in document["isps"]
            ),
            attributes=tuple(document["attributes"]),
            paths=tuple(
                Path(
                    id=item["id"],
                    isps=tuple(item["isps"]),
                    base_valuation=item.get("base_valuation", 0.0),
                    coeffs=tuple(tuple(row) for row in item["valuation_coeffs"]),
                )
                for item in document["paths"]
            ),
            markets=tuple(
                Market(
                    source=item["source"],
                    destination=item["destination"],
                    demand_limit=item["demand_limit"],
                    paths=tuple(item["paths"]),
                )
                for item in document["markets"]
            ),
            valuation_form=ValuationForm(forms.get("valuation", ValuationForm.AFFINE.value)),
            cost_form=CostForm(forms.get("cost", CostForm.AFFINE.value)),
            lower_bounds=_bounds_from_list(bounds.get("lower")),
            upper_bounds=_bounds_from_list(bounds.get("upper")),
        )
    except (KeyError, TypeError) as e:
        raise ModelValidationError(f"malformed model document: {e!r}")


def model_to_json(model: NetworkModel) -> str:
    """Canonical JSON text (sorted keys, fixed indentation)."""
    return json.dumps(model_to_dict(model), sort_keys=True, indent=2) + "\n"


def model_from_json(text: str) -> NetworkModel:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelValidationError(f"model document is not valid JSON: {e}")
    return model_from_dict(document)


def load_model(file_path: str) -> NetworkModel:
    path = FilePath(file_path)
    if not path.exists():
        raise ModelValidationError(f"model file '{file_path}' not found")
    return model_from_json(path.read_text(encoding="utf-8"))


def save_model(model: NetworkModel, file_path: str) -> None:
    path = FilePath(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model_to_json(model), encoding="utf-8")
