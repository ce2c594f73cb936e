"""
Model variants used by the experiment harness: perturbed parameter samples,
path-count truncation and the non-affine functional form.
"""

import logging
import math
from dataclasses import replace
from enum import Enum
from typing import List

import numpy as np

from core.errors import ModelValidationError
from logic.model.network import CostForm, IspParams, Market, NetworkModel, Path, ValuationForm

logger = logging.getLogger(__name__)

MAX_RESAMPLES = 100


class FunctionalForm(str, Enum):
    AFFINE = "affine"
    NON_AFFINE = "non-affine"


def _draw(rng: np.random.Generator, value: float) -> float:
    """max(Normal(y, (y/3)^2), 0); zero stays zero."""
    if value == 0 or not math.isfinite(value):
        return value
    return max(float(rng.normal(value, abs(value) / 3.0)), 0.0)


def _draw_positive(rng: np.random.Generator, value: float) -> float:
    for _ in range(MAX_RESAMPLES):
        drawn = _draw(rng, value)
        if drawn > 0:
            return drawn
    return value


def _perturb_isp(rng: np.random.Generator, isp: IspParams) -> IspParams:
    rho, phi0 = _draw(rng, isp.rho), _draw(rng, isp.phi0)
    attempts = 1
    while rho < phi0 and attempts < MAX_RESAMPLES:
        rho, phi0 = _draw(rng, isp.rho), _draw(rng, isp.phi0)
        attempts += 1
    if rho < phi0:
        logger.debug("clamping phi0 of ISP %s to rho after %d draws", isp.name, attempts)
        phi0 = rho
    return replace(
        isp,
        rho=rho,
        phi0=phi0,
        phi=tuple(_draw(rng, x) for x in isp.phi),
        gamma=tuple(_draw(rng, x) for x in isp.gamma),
        gamma0=_draw(rng, isp.gamma0),
    )


def _perturb_path(rng: np.random.Generator, path: Path) -> Path:
    return replace(
        path,
        base_valuation=_draw(rng, path.base_valuation),
        coeffs=tuple(tuple(_draw_positive(rng, c) for c in row) for row in path.coeffs),
    )


def perturb(model: NetworkModel, seed: int) -> NetworkModel:
    """Independent restricted-normal draw of every numeric parameter.

    Each value y becomes max(Normal(y, y/3 standard deviation), 0). Valuation
    coefficients are redrawn until positive. Finite lower bounds are drawn
    the same way and capped by the upper bounds; upper bounds are kept.
    """
    rng = np.random.default_rng(seed)
    isps = tuple(_perturb_isp(rng, isp) for isp in model.isps)
    paths = tuple(_perturb_path(rng, path) for path in model.paths)
    markets = tuple(replace(m, demand_limit=_draw(rng, m.demand_limit)) for m in model.markets)
    lower = None
    if model.lower_bounds is not None:
        lower = np.vectorize(lambda y: _draw(rng, float(y)), otypes=[float])(model.lower_bounds)
        lower = np.minimum(lower, model.upper_matrix())
    return replace(model, isps=isps, paths=paths, markets=markets, lower_bounds=lower)


def truncate_paths(model: NetworkModel, k: int) -> NetworkModel:
    """Keep the first k paths of every market; paths no market offers are dropped."""
    if int(k) != k or k < 1:
        raise ModelValidationError(f"path count must be a positive integer, got {k}")
    k = int(k)
    markets: List[Market] = [replace(m, paths=m.paths[:k]) for m in model.markets]
    offered = {p for m in markets for p in m.paths}
    paths = tuple(p for p in model.paths if p.id in offered)
    return replace(model, paths=paths, markets=tuple(markets))


def form_variant(model: NetworkModel, functional_form: FunctionalForm) -> NetworkModel:
    """The model under affine or non-affine (square-root valuation, quadratic cost) forms."""
    if FunctionalForm(functional_form) == FunctionalForm.NON_AFFINE:
        return model.with_forms(ValuationForm.SQRT_ATTRIBUTE, CostForm.QUADRATIC_ATTRIBUTE)
    return model.with_forms(ValuationForm.AFFINE, CostForm.AFFINE)
