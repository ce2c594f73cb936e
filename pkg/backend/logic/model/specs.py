"""
Parameter sets of the canonical analytic settings.

``HomogeneousSpec`` describes Q disjoint paths of I identical ISPs in one
market, ``PathProfile`` a path reduced to its characteristic ratio and base
valuation, and ``TwoIspMarket`` a market of two single-ISP paths with general
cost terms.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict

from core.errors import DegenerateCostError, ModelValidationError


def _check_non_negative(owner: str, values: Dict[str, float]) -> None:
    for name, value in values.items():
        if not math.isfinite(value) or value < 0:
            raise ModelValidationError(f"{owner}: {name} must be a finite non-negative number, got {value}")


@dataclass(frozen=True)
class HomogeneousSpec:
    Q: int
    I: int
    alpha1: float
    alpha0: float
    phi1: float
    phi0: float
    gamma1: float
    rho: float
    d: float

    def __post_init__(self):
        if int(self.Q) != self.Q or self.Q < 1 or int(self.I) != self.I or self.I < 1:
            raise ModelValidationError("Q and I must be positive integers")
        object.__setattr__(self, "Q", int(self.Q))
        object.__setattr__(self, "I", int(self.I))
        values = {name: float(getattr(self, name))
                  for name in ("alpha1", "alpha0", "phi1", "phi0", "gamma1", "rho", "d")}
        _check_non_negative("homogeneous spec", values)
        for name, value in values.items():
            object.__setattr__(self, name, value)
        if self.alpha1 <= 0:
            raise ModelValidationError("homogeneous spec: alpha1 must be positive")
        if self.rho < self.phi0:
            raise ModelValidationError("homogeneous spec violates rho >= phi0")
        if self.d * self.phi1 + self.gamma1 <= 0:
            raise DegenerateCostError("homogeneous spec needs d*phi1 + gamma1 > 0")

    @property
    def cost_ratio(self) -> float:
        """d / (d phi1 + gamma1)."""
        return self.d / (self.d * self.phi1 + self.gamma1)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PathProfile:
    """A path summarized by its characteristic ratio psi and base valuation."""

    psi: float
    base_valuation: float = 0.0

    def __post_init__(self):
        _check_non_negative("path profile", {"psi": float(self.psi), "base_valuation": float(self.base_valuation)})
        object.__setattr__(self, "psi", float(self.psi))
        object.__setattr__(self, "base_valuation", float(self.base_valuation))


@dataclass(frozen=True)
class TwoIspMarket:
    """Two disjoint single-ISP paths sharing a market of demand d.

    Index 1 belongs to the ISP on the first path, index 2 to the second.
    ``alpha10``/``alpha20`` are the base valuations of the paths.
    """

    alpha1: float
    alpha10: float
    phi1: float
    phi10: float
    gamma1: float
    rho1: float
    alpha2: float
    alpha20: float
    phi2: float
    phi20: float
    gamma2: float
    rho2: float
    d: float

    def __post_init__(self):
        values = {name: float(value) for name, value in asdict(self).items()}
        _check_non_negative("two-ISP market", values)
        for name, value in values.items():
            object.__setattr__(self, name, value)
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise ModelValidationError("two-ISP market: valuation coefficients must be positive")
        if self.rho1 < self.phi10 or self.rho2 < self.phi20:
            raise ModelValidationError("two-ISP market violates rho >= phi0")
        if self.d * self.phi1 + self.gamma1 <= 0 or self.d * self.phi2 + self.gamma2 <= 0:
            raise DegenerateCostError("two-ISP market needs d*phi + gamma > 0 for both ISPs")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
