"""
Stability of equilibria under the continuous competition dynamics.

Analytic Jacobians of da/dt = a*(A) - a for homogeneous and two-path markets,
a finite-difference Jacobian for any model, and an eigen-solver that checks
every returned eigenpair.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg

from core.errors import DomainError, SolverFailure, UnsupportedScopeError
from logic.model.network import AttributeMatrix, NetworkModel, check_attribute_matrix
from logic.model.specs import HomogeneousSpec
from logic.solvers.best_response import respond
from logic.solvers.heterogeneous import (
    _equilibrium_ranking, _two_path_scope, best_response_valuation, two_path_equilibrium,
)
from logic.solvers.homogeneous import homogeneous_equilibrium
from logic.solvers.results import EquilibriumResult

logger = logging.getLogger(__name__)

STABILITY_TOL = 1e-9
MAX_DIMENSION = 64


class Stability(str, Enum):
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


@dataclass
class StabilityReport:
    jacobian: np.ndarray
    eigenvalues: List[complex]
    classification: Stability
    analytic_eigs: Optional[List[complex]] = None

    def to_dict(self) -> Dict[str, Any]:
        def plain(values):
            return [{"re": float(np.real(v)), "im": float(np.imag(v))} for v in values]

        return {
            "jacobian": self.jacobian.tolist(),
            "eigenvalues": plain(self.eigenvalues),
            "classification": self.classification.value,
            "analytic_eigs": plain(self.analytic_eigs) if self.analytic_eigs is not None else None,
        }


def classify(eigenvalues: Sequence[complex], tol: float = STABILITY_TOL) -> Stability:
    leading = max(float(np.real(v)) for v in eigenvalues)
    if leading < -tol:
        return Stability.STABLE
    if abs(leading) <= tol:
        return Stability.MARGINAL
    return Stability.UNSTABLE


def eigenvalues(matrix: np.ndarray) -> List[complex]:
    """Eigenvalues via Hessenberg reduction and LAPACK's shifted QR, each checked against its vector."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"eigenvalues need a square matrix, got shape {M.shape}")
    if M.shape[0] > MAX_DIMENSION:
        raise DomainError(f"matrix dimension {M.shape[0]} exceeds {MAX_DIMENSION}")
    if M.size == 0:
        return []
    if not np.isfinite(M).all():
        raise SolverFailure("matrix contains non-finite entries")
    try:
        H, basis = linalg.hessenberg(M, calc_q=True)
        values, vectors = linalg.eig(H)
    except linalg.LinAlgError as e:
        raise SolverFailure(f"QR iteration did not converge: {e}")
    vectors = basis @ vectors
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    for i, value in enumerate(values):
        v = vectors[:, i]
        residual = np.linalg.norm(M @ v - value * v) / np.linalg.norm(v)
        if not np.isfinite(value) or residual > 1e-8 * scale:
            raise SolverFailure(f"eigenpair {i} has residual {residual:.3g}", roots=list(values))
    return sorted((complex(v) for v in values), key=lambda z: (z.real, z.imag))


def jacobian_homogeneous(spec: HomogeneousSpec) -> StabilityReport:
    """Jacobian of the homogeneous dynamics at the equilibrium, with its analytic spectrum."""
    equilibrium = homogeneous_equilibrium(spec)
    Q, I = spec.Q, spec.I
    size = Q * I
    if equilibrium.a_plus == 0 and equilibrium.T3 > 0:
        J = -np.eye(size)
        analytic = [complex(-1.0)] * size
    else:
        a = equilibrium.a_hat
        a1, phi1 = spec.alpha1, spec.phi1
        v_other_paths = (Q - 1) * (I * a1 * a + spec.alpha0)
        v_others = v_other_paths + (I - 1) * a1 * a + spec.alpha0
        margin = phi1 * (1 + v_others) + a1 * (spec.rho - spec.phi0)
        T4 = spec.d * phi1 * (1 + v_other_paths)
        T5 = 2 * (spec.d * phi1 + spec.gamma1) * math.sqrt(spec.cost_ratio * (1 + v_other_paths) * margin)
        T6 = spec.d * margin
        same_path, cross_path = T4 / T5 - 1, (T4 + T6) / T5 - 1

        J = np.full((size, size), cross_path)
        for q in range(Q):
            J[q * I:(q + 1) * I, q * I:(q + 1) * I] = same_path
        np.fill_diagonal(J, -1.0)

        lambda1 = -T4 / T5
        lambda2 = -(T4 + I * T6) / T5
        lambda3 = Q * I * cross_path - (T4 + I * T6) / T5
        analytic = [complex(lambda1)] * (Q * (I - 1)) + [complex(lambda2)] * (Q - 1) + [complex(lambda3)]
    numeric = eigenvalues(J)
    return StabilityReport(
        jacobian=J,
        eigenvalues=numeric,
        classification=classify(numeric),
        analytic_eigs=sorted(analytic, key=lambda z: (z.real, z.imag)),
    )


def jacobian_two_path(model: NetworkModel, equilibrium: Optional[EquilibriumResult] = None) -> StabilityReport:
    """2x2 Jacobian in the investing attributes of a unique two-path equilibrium."""
    path, other, d = _two_path_scope(model)
    if equilibrium is None:
        equilibrium = two_path_equilibrium(model)
    if not equilibrium.unique_in_attributes:
        raise UnsupportedScopeError("stability is only established for unique two-path equilibria")

    entries = []
    for this, alternative in ((path, other), (other, path)):
        ranking = _equilibrium_ranking(model, this)
        other_ranking = _equilibrium_ranking(model, alternative)
        psi = math.sqrt(ranking.best_ratio)
        v_alternative = equilibrium.path_valuations[alternative.id]
        if best_response_valuation(psi, d, v_alternative) < this.base_valuation:
            entries.append(0.0)
            continue
        own_coeff = this.coeff(*ranking.winners[0])
        alternative_coeff = alternative.coeff(*other_ranking.winners[0])
        entries.append(alternative_coeff / own_coeff
                       * (psi * math.sqrt(d) / (2 * math.sqrt(1 + v_alternative)) - 1))

    J = np.array([[-1.0, entries[0]], [entries[1], -1.0]])
    product = entries[0] * entries[1]
    root = np.sqrt(complex(product))
    analytic = sorted([-1 - root, -1 + root], key=lambda z: (z.real, z.imag))
    numeric = eigenvalues(J)
    report = StabilityReport(jacobian=J, eigenvalues=numeric, classification=classify(numeric),
                             analytic_eigs=analytic)
    if (product < 1) != (report.classification == Stability.STABLE):
        logger.warning("two-path stability condition and spectrum disagree (product %.6g)", product)
    return report


def numeric_jacobian(model: NetworkModel, A: AttributeMatrix, h: float = 1e-6) -> np.ndarray:
    """Finite-difference Jacobian of F(A) = a*(A) - A, entries flattened in (n, k) order."""
    A = check_attribute_matrix(model, A)
    entries = [(n, k) for n in range(model.num_isps) for k in range(model.num_attributes)]

    def field(B: np.ndarray) -> np.ndarray:
        return np.array([respond(model, B, n, k) - B[n, k] for n, k in entries])

    J = np.empty((len(entries), len(entries)))
    for j, (n, k) in enumerate(entries):
        up, down = A.copy(), A.copy()
        up[n, k] += h
        if A[n, k] >= h:
            down[n, k] -= h
            J[:, j] = (field(up) - field(down)) / (2 * h)
        else:
            J[:, j] = (field(up) - field(A)) / h
    return J


def stability_of(model: NetworkModel, A: AttributeMatrix, h: float = 1e-6) -> StabilityReport:
    """Numeric stability report of any model at A."""
    J = numeric_jacobian(model, A, h)
    values = eigenvalues(J)
    return StabilityReport(jacobian=J, eigenvalues=values, classification=classify(values))
