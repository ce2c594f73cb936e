"""
Result documents returned by the equilibrium solvers.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List

import numpy as np

from logic.model.evaluation import path_valuations
from logic.model.network import AttributeMatrix, NetworkModel


class SolverKind(str, Enum):
    HOMOGENEOUS = "homogeneous"
    SINGLE_PATH = "single-path"
    SINGLE_PATH_NBS = "single-path-nbs"
    TWO_PATH = "two-path"
    QUARTIC = "quartic"
    NBS = "nbs"


@dataclass
class EquilibriumResult:
    """An attribute matrix with its path valuations and provenance.

    ``residual`` is the best-response gap for equilibria and the projected
    aggregate-profit gradient for bargaining solutions.
    """

    attributes: AttributeMatrix
    path_valuations: Dict[str, float]
    solver: SolverKind
    residual: float
    unique_in_attributes: bool = True
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_attributes(cls, model: NetworkModel, A: AttributeMatrix, solver: SolverKind, residual: float,
                        unique_in_attributes: bool = True, **diagnostics) -> "EquilibriumResult":
        A = np.asarray(A, dtype=float)
        return cls(
            attributes=A,
            path_valuations=path_valuations(model, A),
            solver=solver,
            residual=float(residual),
            unique_in_attributes=unique_in_attributes,
            diagnostics=dict(diagnostics),
        )

    @property
    def warnings(self) -> List[str]:
        return list(self.diagnostics.get("warnings", []))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "attributes": self.attributes.tolist(),
            "path_valuations": dict(self.path_valuations),
            "solver": self.solver.value,
            "residual": self.residual,
            "unique_in_attributes": self.unique_in_attributes,
            "diagnostics": _plain(self.diagnostics),
        }


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers into JSON-compatible values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(np.real(value)), "im": float(np.imag(value))}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    return value
