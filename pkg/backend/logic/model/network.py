"""
Domain types of the path competition model.

A ``NetworkModel`` bundles ISPs (with their revenue and cost parameters),
paths (ordered ISP sets with valuation coefficients), markets
(origin-destination pairs with a demand limit and selectable paths) and the
functional-form selectors. Attribute matrices are plain ``numpy`` arrays of
shape ``(num_isps, num_attributes)``.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from core.errors import ModelValidationError
from logic.model.compiled import ModelArrays

AttributeMatrix = npt.NDArray[np.float64]


class ValuationForm(str, Enum):
    AFFINE = "affine"
    SQRT_ATTRIBUTE = "sqrt-attribute"


class CostForm(str, Enum):
    AFFINE = "affine"
    QUADRATIC_ATTRIBUTE = "quadratic-attribute"


class Tier(str, Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    OTHER = "Other"
    UNCLASSIFIED = "Unclassified"


def _finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ModelValidationError(f"{what} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class Path:
    """A selectable path: ordered ISPs, base valuation and per-(ISP, attribute) coefficients.

    ``coeffs[i][k]`` is the valuation coefficient of attribute ``k`` of ISP
    ``isps[i]`` on this path.
    """

    id: str
    isps: Tuple[int, ...]
    base_valuation: float
    coeffs: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "isps", tuple(int(n) for n in self.isps))
        object.__setattr__(self, "coeffs", tuple(tuple(float(c) for c in row) for row in self.coeffs))
        object.__setattr__(self, "base_valuation", _finite(self.base_valuation, f"path {self.id} base valuation"))
        if not self.isps:
            raise ModelValidationError(f"path {self.id} has no ISPs")
        if len(set(self.isps)) != len(self.isps):
            raise ModelValidationError(f"path {self.id} repeats an ISP")
        if self.base_valuation < 0:
            raise ModelValidationError(f"path {self.id} has negative base valuation")
        if len(self.coeffs) != len(self.isps):
            raise ModelValidationError(f"path {self.id} needs one coefficient row per ISP")
        for row in self.coeffs:
            for value in row:
                if not (math.isfinite(value) and value > 0):
                    raise ModelValidationError(
                        f"path {self.id} valuation coefficients must be positive, got {value}"
                    )

    def position(self, n: int) -> int:
        try:
            return self.isps.index(n)
        except ValueError:
            raise ModelValidationError(f"ISP {n} is not on path {self.id}")

    def coeff(self, n: int, k: int) -> float:
        """Valuation coefficient of attribute k of ISP n (0 when n is off-path)."""
        if n not in self.isps:
            return 0.0
        return self.coeffs[self.isps.index(n)][k]

    @property
    def valuation_coeffs(self) -> Dict[Tuple[int, int], float]:
        return {
            (n, k): value
            for n, row in zip(self.isps, self.coeffs)
            for k, value in enumerate(row)
        }


@dataclass(frozen=True)
class Market:
    """An origin-destination pair with a demand limit and its selectable paths."""

    source: str
    destination: str
    demand_limit: float
    paths: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "source", str(self.source))
        object.__setattr__(self, "destination", str(self.destination))
        object.__setattr__(self, "paths", tuple(str(p) for p in self.paths))
        demand = _finite(self.demand_limit, f"demand limit of market {self.key}")
        object.__setattr__(self, "demand_limit", demand)
        if demand < 0:
            raise ModelValidationError(f"market {self.key} has negative demand limit")
        if not self.paths:
            raise ModelValidationError(f"market {self.key} has no paths")
        if len(set(self.paths)) != len(self.paths):
            raise ModelValidationError(f"market {self.key} lists a path twice")

    @property
    def key(self) -> str:
        return f"{self.source}->{self.destination}"


@dataclass(frozen=True)
class IspParams:
    """Revenue and cost parameters of one ISP."""

    name: str
    rho: float
    phi0: float
    phi: Tuple[float, ...]
    gamma: Tuple[float, ...]
    gamma0: float = 0.0
    tier: Tier = Tier.UNCLASSIFIED

    def __post_init__(self):
        object.__setattr__(self, "name", str(self.name))
        object.__setattr__(self, "phi", tuple(_finite(x, f"phi of ISP {self.name}") for x in self.phi))
        object.__setattr__(self, "gamma", tuple(_finite(x, f"gamma of ISP {self.name}") for x in self.gamma))
        for attr in ("rho", "phi0", "gamma0"):
            object.__setattr__(self, attr, _finite(getattr(self, attr), f"{attr} of ISP {self.name}"))
        object.__setattr__(self, "tier", Tier(self.tier))
        if len(self.phi) != len(self.gamma):
            raise ModelValidationError(f"ISP {self.name} has mismatched phi/gamma lengths")
        if min((self.rho, self.phi0, self.gamma0) + self.phi + self.gamma) < 0:
            raise ModelValidationError(f"ISP {self.name} has a negative revenue or cost coefficient")
        if self.rho < self.phi0:
            raise ModelValidationError(f"ISP {self.name} violates rho >= phi0")


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """ISPs, paths, markets, valuation/cost parameters and functional forms."""

    isps: Tuple[IspParams, ...]
    attributes: Tuple[str, ...]
    paths: Tuple[Path, ...]
    markets: Tuple[Market, ...]
    valuation_form: ValuationForm = ValuationForm.AFFINE
    cost_form: CostForm = CostForm.AFFINE
    lower_bounds: Optional[np.ndarray] = field(default=None, repr=False)
    upper_bounds: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "isps", tuple(self.isps))
        object.__setattr__(self, "attributes", tuple(str(a) for a in self.attributes))
        object.__setattr__(self, "paths", tuple(self.paths))
        object.__setattr__(self, "markets", tuple(self.markets))
        object.__setattr__(self, "valuation_form", ValuationForm(self.valuation_form))
        object.__setattr__(self, "cost_form", CostForm(self.cost_form))
        self._validate()
        object.__setattr__(self, "_path_index", {p.id: i for i, p in enumerate(self.paths)})

        object.__setattr__(self, "_arrays", ModelArrays.from_model(self))

    def _validate(self) -> None:
        num_isps, num_attributes = len(self.isps), len(self.attributes)
        if num_attributes < 1:
            raise ModelValidationError("a model needs at least one attribute")
        for isp in self.isps:
            if len(isp.phi) != num_attributes:
                raise ModelValidationError(f"ISP {isp.name} needs {num_attributes} cost coefficients")
        seen = set()
        for path in self.paths:
            if path.id in seen:
                raise ModelValidationError(f"duplicate path id {path.id}")
            seen.add(path.id)
            for n in path.isps:
                if not 0 <= n < num_isps:
                    raise ModelValidationError(f"path {path.id} references unknown ISP {n}")
            if any(len(row) != num_attributes for row in path.coeffs):
                raise ModelValidationError(f"path {path.id} needs {num_attributes} coefficients per ISP")
        for market in self.markets:
            for path_id in market.paths:
                if path_id not in seen:
                    raise ModelValidationError(f"market {market.key} references unknown path {path_id}")

        shape = (num_isps, num_attributes)
        for name in ("lower_bounds", "upper_bounds"):
            bounds = getattr(self, name)
            if bounds is None:
                continue
            bounds = np.array(bounds, dtype=float)
            if bounds.shape != shape:
                raise ModelValidationError(f"{name} must have shape {shape}, got {bounds.shape}")
            if np.isnan(bounds).any():
                raise ModelValidationError(f"{name} contains NaN")
            bounds.setflags(write=False)
            object.__setattr__(self, name, bounds)
        if self.lower_bounds is not None and (self.lower_bounds < 0).any():
            raise ModelValidationError("lower bounds must be non-negative")
        if self.lower_bounds is not None and self.upper_bounds is not None:
            if (self.lower_bounds > self.upper_bounds).any():
                raise ModelValidationError("lower bounds exceed upper bounds")

    @property
    def num_isps(self) -> int:
        return len(self.isps)

    @property
    def num_attributes(self) -> int:
        return len(self.attributes)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.num_isps, self.num_attributes

    @property
    def arrays(self):
        """Sparse/dense array view used by every numeric routine."""
        return self._arrays

    def path_index(self, path_id: str) -> int:
        try:
            return self._path_index[path_id]
        except KeyError:
            raise ModelValidationError(f"unknown path id {path_id}")

    def path(self, path_id: str) -> Path:
        return self.paths[self.path_index(path_id)]

    def market(self, index: int) -> Market:
        if not 0 <= index < len(self.markets):
            raise ModelValidationError(f"unknown market index {index}")
        return self.markets[index]

    def check_isp(self, n: int) -> int:
        if not 0 <= n < self.num_isps:
            raise ModelValidationError(f"unknown ISP index {n}")
        return n

    def check_attribute(self, k: int) -> int:
        if not 0 <= k < self.num_attributes:
            raise ModelValidationError(f"unknown attribute index {k}")
        return k

    def markets_of_isp(self, n: int) -> Tuple[int, ...]:
        """Indices of markets with at least one path through ISP n."""
        return tuple(
            m for m, market in enumerate(self.markets)
            if any(n in self.path(p).isps for p in market.paths)
        )

    def zeros(self) -> AttributeMatrix:
        return np.zeros(self.shape)

    def lower_matrix(self) -> AttributeMatrix:
        return self.zeros() if self.lower_bounds is None else np.array(self.lower_bounds)

    def upper_matrix(self) -> AttributeMatrix:
        if self.upper_bounds is None:
            return np.full(self.shape, np.inf)
        return np.array(self.upper_bounds)

    def clamp(self, A: AttributeMatrix) -> AttributeMatrix:
        """Project onto the non-negative orthant intersected with the model bounds."""
        return np.clip(np.maximum(A, 0.0), self.lower_matrix(), self.upper_matrix())

    def clamp_entry(self, value: float, n: int, k: int) -> float:
        value = max(0.0, value)
        if self.lower_bounds is not None:
            value = max(value, float(self.lower_bounds[n, k]))
        if self.upper_bounds is not None:
            value = min(value, float(self.upper_bounds[n, k]))
        return value

    def with_forms(self, valuation_form: ValuationForm, cost_form: CostForm) -> "NetworkModel":
        return replace(self, valuation_form=valuation_form, cost_form=cost_form)

    def with_markets(self, markets: Iterable[Market]) -> "NetworkModel":
        return replace(self, markets=tuple(markets))


def check_attribute_matrix(model: NetworkModel, A) -> AttributeMatrix:
    """Validate shape, finiteness and non-negativity of an attribute matrix."""
    matrix = np.asarray(A, dtype=float)
    if matrix.shape != model.shape:
        raise ModelValidationError(f"attribute matrix must have shape {model.shape}, got {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise ModelValidationError("attribute matrix contains non-finite entries")
    if (matrix < 0).any():
        raise ModelValidationError("attribute matrix contains negative entries")
    return matrix


def single_attribute_isp(name: str, rho: float, gamma: float, phi: float = 0.0, phi0: float = 0.0,
                         gamma0: float = 0.0, tier: Tier = Tier.UNCLASSIFIED) -> IspParams:
    return IspParams(name=name, rho=rho, phi0=phi0, phi=(phi,), gamma=(gamma,), gamma0=gamma0, tier=tier)


def uniform_path(path_id: str, isps: Sequence[int], coeff: Union[Sequence[float], float],
                 base_valuation: float = 0.0) -> Path:
    """Path whose on-path ISPs all share the same coefficient vector."""
    row = tuple(coeff) if isinstance(coeff, (list, tuple)) else (float(coeff),)
    return Path(id=path_id, isps=tuple(isps), base_valuation=base_valuation, coeffs=tuple(row for _ in isps))

